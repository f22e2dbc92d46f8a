//! Rotationally symmetric Cartan–Hadamard model manifolds.

mod model;
mod radial;
mod sphere;
mod validity;

pub use model::{CurvatureFn, ModelManifold, Preset, CH_TOLERANCE, CURVATURE_BLEND, POLE_GUARD};
pub use radial::{
    ConstantFn, DirectionFn, JetFn, Radial, RadialFn, RadialValue, UnitVector, ValueFn,
};
pub use sphere::{sphere_area_unit, sphere_average, SphereAverage};
pub use validity::{CurvatureSample, ValidityReport};

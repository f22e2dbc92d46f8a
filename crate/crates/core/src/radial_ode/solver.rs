//! Shooting from the pole with an embedded Dormand–Prince 5(4) pair.

use serde::Serialize;

use super::equation::ConformalExponents;
use crate::funcexpr::Jet2;
use crate::manifold::{ModelManifold, RadialFn, RadialValue};
use crate::{Error, Real, Result};

/// How an integration ended. The radius is that of the last recorded point.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum SolveStatus<T> {
    Completed,
    BlowUp { r: T },
    Underflow { r: T },
    StepFailure { r: T, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolvePolicy<T> {
    /// Local error tolerance, relative and absolute.
    pub tol: T,
    /// Radius of the Taylor start.
    pub r_start: T,
    pub blowup: T,
    pub underflow: T,
    pub max_steps: usize,
}

impl<T: Real> Default for SolvePolicy<T> {
    fn default() -> Self {
        SolvePolicy {
            tol: T::lit(1e-10),
            r_start: T::lit(1e-4),
            blowup: T::lit(1e12),
            underflow: T::lit(1e-12),
            max_steps: 200_000,
        }
    }
}

impl<T: Real> SolvePolicy<T> {
    pub fn with_tol(tol: T) -> Self {
        SolvePolicy {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SolveStats<T> {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    /// Sum of the local error estimates for `u` over accepted steps.
    pub error_sum: T,
}

/// A computed radial profile `u` with `u(0) = u0`, `u'(0) = 0`.
///
/// Between grid points `u` is the quintic Hermite interpolant of the
/// recorded `u`, `u'` and `u''`, so the profile is `C²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution<T> {
    pub grid: Vec<T>,
    pub u: Vec<T>,
    pub u_prime: Vec<T>,
    pub u_second: Vec<T>,
    pub status: SolveStatus<T>,
    pub u0: T,
    /// Hash of the manifold description and samples of `k` and `K`.
    pub fingerprint: String,
    pub stats: SolveStats<T>,
}

impl<T: Real> Solution<T> {
    /// Wraps externally computed samples; the status is `Completed`.
    pub fn from_samples(grid: Vec<T>, u: Vec<T>, u_prime: Vec<T>, u_second: Vec<T>) -> Result<Self> {
        let n = grid.len();
        if n == 0 || u.len() != n || u_prime.len() != n || u_second.len() != n {
            return Err(Error::InvalidArgument(
                "samples must be nonempty and of equal length".into(),
            ));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
        }
        if u.iter().any(|&x| !(x > T::zero())) {
            return Err(Error::InvalidArgument("u must be positive".into()));
        }
        let u0 = u[0];
        Ok(Solution {
            grid,
            u,
            u_prime,
            u_second,
            status: SolveStatus::Completed,
            u0,
            fingerprint: String::from("external"),
            stats: SolveStats::default(),
        })
    }

    /// Samples a radial function on `grid`.
    pub fn sample(f: &(impl RadialFn<T> + ?Sized), grid: Vec<T>) -> Result<Self> {
        let mut u = Vec::with_capacity(grid.len());
        let mut d1 = Vec::with_capacity(grid.len());
        let mut d2 = Vec::with_capacity(grid.len());
        for &r in &grid {
            let j = f.jet(r)?;
            u.push(j.value);
            d1.push(j.d1);
            d2.push(j.d2);
        }
        Self::from_samples(grid, u, d1, d2)
    }

    pub fn r_end(&self) -> T {
        *self.grid.last().expect("nonempty grid")
    }

    pub fn is_completed(&self) -> bool {
        self.status == SolveStatus::Completed
    }

    /// `u`, `u'`, `u''` at `r` inside the grid.
    pub fn eval(&self, r: T) -> Result<Jet2<T>> {
        let (lo, hi) = (self.grid[0], self.r_end());
        if !(r >= lo && r <= hi) {
            return Err(Error::InvalidArgument(format!(
                "r = {r} outside the solution grid [{lo}, {hi}]"
            )));
        }
        let i = self.grid.partition_point(|&x| x <= r);
        let j = i - 1;
        if self.grid[j] == r {
            return Ok(Jet2::new(self.u[j], self.u_prime[j], self.u_second[j]));
        }
        Ok(hermite5(
            self.grid[j],
            self.grid[j + 1],
            [self.u[j], self.u_prime[j], self.u_second[j]],
            [self.u[j + 1], self.u_prime[j + 1], self.u_second[j + 1]],
            r,
        ))
    }
}

impl<T: Real> RadialValue<T> for Solution<T> {
    fn value(&self, r: T) -> Result<T> {
        Ok(self.eval(r)?.value)
    }
}

impl<T: Real> RadialFn<T> for Solution<T> {
    fn jet(&self, r: T) -> Result<Jet2<T>> {
        self.eval(r)
    }
}

/// Quintic Hermite interpolation from values and two derivatives at both ends.
fn hermite5<T: Real>(a: T, b: T, left: [T; 3], right: [T; 3], r: T) -> Jet2<T> {
    let h = b - a;
    let h2 = h * h;
    let [y0, d0, s0] = left;
    let [y1, d1, s1] = right;
    let half = T::lit(0.5);
    let c = |x: f64| T::lit(x);
    let c0 = y0;
    let c1 = h * d0;
    let c2 = half * h2 * s0;
    let c3 = c(-10.0) * y0 - c(6.0) * h * d0 - c(1.5) * h2 * s0 + half * h2 * s1 - c(4.0) * h * d1
        + c(10.0) * y1;
    let c4 = c(15.0) * y0 + c(8.0) * h * d0 + c(1.5) * h2 * s0 - h2 * s1 + c(7.0) * h * d1
        - c(15.0) * y1;
    let c5 = c(-6.0) * y0 - c(3.0) * h * d0 - half * h2 * s0 + half * h2 * s1 - c(3.0) * h * d1
        + c(6.0) * y1;
    let t = Jet2::new((r - a) / h, T::one() / h, T::zero());
    let k = |x: T| Jet2::constant(x);
    ((((t * k(c5) + k(c4)) * t + k(c3)) * t + k(c2)) * t + k(c1)) * t + k(c0)
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Rhs<'a, T: Real, K: ?Sized> {
    manifold: &'a ModelManifold<T>,
    k: &'a K,
    ex: ConformalExponents<T>,
    evals: usize,
}

enum StageError {
    /// `u` left the positive half-line inside a step.
    NonPositive,
    Fatal(Error),
}

impl<T: Real, K: RadialValue<T> + ?Sized> Rhs<'_, T, K> {
    fn second(&mut self, r: T, u: T, du: T) -> std::result::Result<T, StageError> {
        if !(u > T::zero()) || !u.is_finite() || !du.is_finite() {
            return Err(StageError::NonPositive);
        }
        self.evals += 1;
        let geo = || -> Result<(T, T, T)> {
            Ok((
                self.manifold.scalar_curvature(r)?,
                self.k.value(r)?,
                self.manifold.laplacian_r(r)?,
            ))
        };
        let (kk, big_k, lap) = geo().map_err(StageError::Fatal)?;
        let out = (kk * u - big_k * u.powf(self.ex.sigma)) / self.ex.c_n - lap * du;
        if out.is_finite() {
            Ok(out)
        } else {
            Err(StageError::NonPositive)
        }
    }
}

/// FNV-1a over the problem description, for tagging solutions.
fn fingerprint<T: Real>(manifold: &ModelManifold<T>, k: &(impl RadialValue<T> + ?Sized)) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(0x0100_0000_01b3);
        }
    };
    feed(format!("{};{:?};{:?}", manifold.dim(), manifold.preset(), manifold.warp_text()).as_bytes());
    for r in [0.5, 1.0, 2.0, 4.0] {
        let r = T::lit(r);
        for v in [manifold.scalar_curvature(r), k.value(r)] {
            feed(&v.map(|x| x.as_f64()).unwrap_or(f64::NAN).to_bits().to_le_bytes());
        }
    }
    format!("{hash:016x}")
}

/// Integrates `u'' = (k u − K u^σ)/c_n − Δr u'` from the pole to `r_max`.
///
/// The first point after the pole comes from the Taylor start
/// `u(r₀) = u0 + r₀² (k(0) u0 − K(0) u0^σ)/(2 n c_n)`. Integration stops
/// with `BlowUp` once `u > blowup`, and also when the step size collapses
/// while `u` is already large and increasing, which is how a finite-radius
/// singularity presents itself in floating point. It stops with
/// `Underflow` once `u < underflow`.
pub fn solve_radial<T: Real>(
    manifold: &ModelManifold<T>,
    k: &(impl RadialValue<T> + ?Sized),
    u0: T,
    r_max: T,
    policy: &SolvePolicy<T>,
) -> Result<Solution<T>> {
    if !(u0 > T::zero()) || !u0.is_finite() {
        return Err(Error::InvalidArgument(format!("u0 must be positive, got {u0}")));
    }
    if !(r_max > T::zero()) || !r_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "r_max must be positive, got {r_max}"
        )));
    }
    if !(policy.tol > T::zero()) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let ex = ConformalExponents::new(manifold.dim())?;
    let mut rhs = Rhs {
        manifold,
        k,
        ex,
        evals: 0,
    };
    let n = T::from_count(manifold.dim());
    let k0 = manifold.scalar_curvature(T::zero())?;
    let big_k0 = k.value(T::zero())?;
    let u2_pole = (k0 * u0 - big_k0 * u0.powf(ex.sigma)) / (n * ex.c_n);
    let mut sol = Solution {
        grid: vec![T::zero()],
        u: vec![u0],
        u_prime: vec![T::zero()],
        u_second: vec![u2_pole],
        status: SolveStatus::Completed,
        u0,
        fingerprint: fingerprint(manifold, k),
        stats: SolveStats::default(),
    };

    let r0 = policy.r_start.min(r_max);
    let mut r = r0;
    let mut y = [u0 + r0 * r0 * u2_pole / T::lit(2.0), r0 * u2_pole];
    let mut f0 = match rhs.second(r, y[0], y[1]) {
        Ok(v) => v,
        Err(StageError::Fatal(e)) => return Err(e),
        Err(StageError::NonPositive) => {
            sol.status = SolveStatus::StepFailure {
                r: T::zero(),
                reason: "Taylor start left the positive range".into(),
            };
            return Ok(sol);
        }
    };
    sol.grid.push(r);
    sol.u.push(y[0]);
    sol.u_prime.push(y[1]);
    sol.u_second.push(f0);
    if r >= r_max {
        sol.stats.rhs_evals = rhs.evals;
        return Ok(sol);
    }

    let tol = policy.tol;
    let mut h = (r0 * T::lit(0.5)).min(r_max - r);
    let eps = T::epsilon();
    loop {
        if let Some(status) = threshold_status(&y, r, policy) {
            sol.status = status;
            break;
        }
        if r >= r_max {
            break;
        }
        if sol.stats.accepted + sol.stats.rejected >= policy.max_steps {
            sol.status = SolveStatus::StepFailure {
                r,
                reason: format!("step budget of {} exhausted", policy.max_steps),
            };
            break;
        }
        let h_min = T::lit(16.0) * eps * r.max(T::one());
        if h < h_min {
            sol.status = if y[0] > T::lit(1e6) * u0.max(T::one()) && y[1] > T::zero() {
                SolveStatus::BlowUp { r }
            } else {
                SolveStatus::StepFailure {
                    r,
                    reason: format!("step size fell below {h_min:e}"),
                }
            };
            break;
        }
        let last = r + h >= r_max;
        let h_try = if last { r_max - r } else { h };
        match dopri_step(&mut rhs, r, y, f0, h_try) {
            Ok((y_new, f_new, err_vec)) => {
                let scale = |i: usize| tol + tol * y[i].abs().max(y_new[i].abs());
                let err = (err_vec[0].abs() / scale(0)).max(err_vec[1].abs() / scale(1));
                if err <= T::one() {
                    r = if last { r_max } else { r + h_try };
                    y = y_new;
                    f0 = f_new;
                    sol.stats.accepted += 1;
                    sol.stats.error_sum = sol.stats.error_sum + err_vec[0].abs();
                    sol.grid.push(r);
                    sol.u.push(y[0]);
                    sol.u_prime.push(y[1]);
                    sol.u_second.push(f0);
                    let fac = if err == T::zero() {
                        T::lit(5.0)
                    } else {
                        (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(5.0))
                    };
                    h = h_try * fac.max(T::lit(0.2));
                } else {
                    sol.stats.rejected += 1;
                    let fac = (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.1));
                    h = h_try * fac.min(T::lit(0.5));
                }
            }
            Err(StageError::NonPositive) => {
                sol.stats.rejected += 1;
                h = h_try * T::lit(0.25);
            }
            Err(StageError::Fatal(e)) => return Err(e),
        }
    }
    sol.stats.rhs_evals = rhs.evals;
    Ok(sol)
}

fn threshold_status<T: Real>(y: &[T; 2], r: T, policy: &SolvePolicy<T>) -> Option<SolveStatus<T>> {
    if y[0] > policy.blowup {
        Some(SolveStatus::BlowUp { r })
    } else if y[0] < policy.underflow {
        Some(SolveStatus::Underflow { r })
    } else {
        None
    }
}

type StepOut<T> = ([T; 2], T, [T; 2]);

fn dopri_step<T: Real, K: RadialValue<T> + ?Sized>(
    rhs: &mut Rhs<'_, T, K>,
    r: T,
    y: [T; 2],
    f0: T,
    h: T,
) -> std::result::Result<StepOut<T>, StageError> {
    // y = (u, u'), y' = (u', f)
    let mut ku = [T::zero(); 7];
    let mut kp = [T::zero(); 7];
    ku[0] = y[1];
    kp[0] = f0;
    for s in 1..7 {
        let mut u = y[0];
        let mut p = y[1];
        for j in 0..s {
            let a = T::lit(A[s][j]);
            if a != T::zero() {
                u = u + h * a * ku[j];
                p = p + h * a * kp[j];
            }
        }
        ku[s] = p;
        kp[s] = rhs.second(r + T::lit(C[s]) * h, u, p)?;
    }
    // the seventh stage is evaluated at the fifth-order solution
    let mut u_new = y[0];
    let mut p_new = y[1];
    for j in 0..6 {
        let b = T::lit(A[6][j]);
        u_new = u_new + h * b * ku[j];
        p_new = p_new + h * b * kp[j];
    }
    let mut eu = T::zero();
    let mut ep = T::zero();
    for j in 0..7 {
        let e = T::lit(E[j]);
        eu = eu + h * e * ku[j];
        ep = ep + h * e * kp[j];
    }
    if !(u_new > T::zero()) {
        return Err(StageError::NonPositive);
    }
    Ok(([u_new, p_new], kp[6], [eu, ep]))
}

//! Fixed-step RK4 propagation of the driven four-state equations and the
//! one-period propagator used for exact Floquet analysis.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat4, CVec4, DIM};
use crate::model::{frame_phases, StateVector, SystemParams};
use crate::scalar::Real;

pub const MIN_STEPS_PER_PERIOD: usize = 64;
pub const DEFAULT_STEPS_PER_PERIOD: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig<T> {
    pub steps_per_period: usize,
    pub t_end: T,
    pub sample_stride: usize,
}

impl<T: Real> IntegrationConfig<T> {
    pub fn new(t_end: T) -> Self {
        Self {
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            t_end,
            sample_stride: 1,
        }
    }

    pub fn with_steps_per_period(mut self, steps: usize) -> Self {
        self.steps_per_period = steps;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride;
        self
    }

    /// Configuration ending after `periods` driving periods.
    pub fn periods(p: &SystemParams<T>, periods: usize) -> Self {
        Self::new(p.period() * T::from_usize(periods).unwrap())
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps_per_period < MIN_STEPS_PER_PERIOD {
            return Err(Error::InvalidConfig(format!(
                "steps_per_period must be at least {MIN_STEPS_PER_PERIOD}"
            )));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidConfig(
                "sample_stride must be at least 1".into(),
            ));
        }
        if !self.t_end.is_finite() {
            return Err(Error::InvalidConfig("t_end must be finite".into()));
        }
        Ok(())
    }
}

/// Sampled time series with cached probabilities `(P1, P2, P3, P4, Ptot)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<StateVector<T>>,
    pub probabilities: Vec<[T; 5]>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(times: Vec<T>, states: Vec<StateVector<T>>) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::Alignment(format!(
                "{} times for {} states",
                times.len(),
                states.len()
            )));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Alignment("times must be strictly increasing".into()));
        }
        let probabilities = states.iter().map(probability_row).collect();
        Ok(Self {
            times,
            states,
            probabilities,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn total_probability(&self) -> impl Iterator<Item = T> + '_ {
        self.probabilities.iter().map(|row| row[4])
    }

    pub fn last(&self) -> Option<&StateVector<T>> {
        self.states.last()
    }

    /// Largest mismatch between cached and freshly computed probabilities.
    pub fn probability_drift(&self) -> T {
        self.states
            .iter()
            .zip(&self.probabilities)
            .flat_map(|(s, row)| {
                let fresh = probability_row(s);
                (0..5).map(move |k| (fresh[k] - row[k]).abs())
            })
            .fold(T::zero(), T::max)
    }
}

fn probability_row<T: Real>(s: &StateVector<T>) -> [T; 5] {
    let p = s.probabilities();
    [p[0], p[1], p[2], p[3], p[0] + p[1] + p[2] + p[3]]
}

/// Lab-frame Hamiltonian `H(t)`, with `i da/dt = H(t) a`.
pub fn hamiltonian<T: Real>(p: &SystemParams<T>, t: T) -> CMat4<T> {
    let (s, c) = (T::PI() * p.lambda).sin_cos();
    let tc = Complex::from(-p.nu * c);
    let ts = Complex::from(p.nu * s);
    let half = p.zeeman / T::lit(2.0);
    let drive = p.epsilon * (p.omega * t).cos();
    let mut h = linalg::zeros();
    h[0][0] = Complex::new(half - drive, -p.beta_r);
    h[0][1] = -ts;
    h[0][2] = tc;
    h[1][0] = -ts;
    h[1][1] = Complex::new(-half + drive, p.beta_l);
    h[1][3] = tc;
    h[2][0] = tc;
    h[2][2] = Complex::new(half + drive, p.beta_l);
    h[2][3] = ts;
    h[3][1] = tc;
    h[3][2] = ts;
    h[3][3] = Complex::new(-half - drive, -p.beta_r);
    h
}

/// Time derivative `da/dt = -i H(t) a`.
pub fn rhs<T: Real>(p: &SystemParams<T>, t: T, a: &CVec4<T>) -> CVec4<T> {
    let ha = linalg::matvec(&hamiltonian(p, t), a);
    ha.map(|z| Complex::new(z.im, -z.re))
}

/// `db/dt` for the co-rotating amplitudes `b_k = exp(i theta_k(t)) a_k`,
/// where `theta_k(t)` integrates the real diagonal of `H` (see
/// [`frame_phases`]). Only the couplings and the gain-loss terms remain.
pub fn corotating_rhs<T: Real>(p: &SystemParams<T>, t: T, b: &CVec4<T>) -> CVec4<T> {
    let h = hamiltonian(p, t);
    let phases = frame_phases(p, t);
    let a: CVec4<T> = std::array::from_fn(|k| phases[k] * b[k]);
    std::array::from_fn(|j| {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (k, ak) in a.iter().enumerate() {
            let hjk = if j == k {
                Complex::new(T::zero(), h[j][j].im)
            } else {
                h[j][k]
            };
            acc = acc + hjk * ak;
        }
        let w = phases[j].conj() * acc;
        Complex::new(w.im, -w.re)
    })
}

fn rk4_step<T: Real>(p: &SystemParams<T>, t: T, h: T, b: &CVec4<T>) -> CVec4<T> {
    let half = h / T::lit(2.0);
    let axpy =
        |x: &CVec4<T>, s: T, k: &CVec4<T>| -> CVec4<T> { std::array::from_fn(|i| x[i] + k[i] * s) };
    let k1 = corotating_rhs(p, t, b);
    let k2 = corotating_rhs(p, t + half, &axpy(b, half, &k1));
    let k3 = corotating_rhs(p, t + half, &axpy(b, half, &k2));
    let k4 = corotating_rhs(p, t + h, &axpy(b, h, &k3));
    let sixth = h / T::lit(6.0);
    std::array::from_fn(|i| b[i] + (k1[i] + (k2[i] + k3[i]) * T::lit(2.0) + k4[i]) * sixth)
}

fn to_lab<T: Real>(p: &SystemParams<T>, t: T, b: &CVec4<T>) -> CVec4<T> {
    let phases = frame_phases(p, t);
    std::array::from_fn(|k| phases[k] * b[k])
}

fn check_finite<T: Real>(a: &CVec4<T>, t: T) -> Result<()> {
    let limit = T::divergence_threshold();
    if a.iter().any(|z| !(z.norm() <= limit)) {
        return Err(Error::Divergence {
            time: t.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Integrates from `initial.t` to `cfg.t_end` with step `period / steps_per_period`.
///
/// Classical RK4 runs on the co-rotating amplitudes of [`corotating_rhs`];
/// the large diagonal phases are thus integrated exactly and samples are
/// mapped back to the lab frame.
pub fn propagate<T: Real>(
    p: &SystemParams<T>,
    initial: &StateVector<T>,
    cfg: &IntegrationConfig<T>,
) -> Result<Trajectory<T>> {
    p.validate()?;
    cfg.validate()?;
    let t0 = initial.t;
    let h = p.period() / T::from_usize(cfg.steps_per_period).unwrap();
    let span = (cfg.t_end - t0).max(T::zero());
    let steps = (span / h).round().to_usize().unwrap_or(0);

    let capacity = steps / cfg.sample_stride + 2;
    let mut times = Vec::with_capacity(capacity);
    let mut states = Vec::with_capacity(capacity);
    times.push(t0);
    states.push(*initial);

    let start = frame_phases(p, t0);
    let mut b: CVec4<T> = std::array::from_fn(|k| start[k].conj() * initial.amps[k]);
    for step in 1..=steps {
        let t = t0 + h * T::from_usize(step - 1).unwrap();
        b = rk4_step(p, t, h, &b);
        let t_next = t0 + h * T::from_usize(step).unwrap();
        check_finite(&b, t_next)?;
        if step % cfg.sample_stride == 0 || step == steps {
            times.push(t_next);
            states.push(StateVector::new(to_lab(p, t_next, &b), t_next));
        }
    }
    Trajectory::new(times, states)
}

/// One-period propagator `U(tau)`; column `q` evolves basis state `q`.
pub fn monodromy<T: Real>(p: &SystemParams<T>, cfg: &IntegrationConfig<T>) -> Result<CMat4<T>> {
    p.validate()?;
    cfg.validate()?;
    let h = p.period() / T::from_usize(cfg.steps_per_period).unwrap();
    let mut cols = [[Complex::zero(); DIM]; DIM];
    for (q, col) in cols.iter_mut().enumerate() {
        let mut a = [Complex::zero(); DIM];
        a[q] = Complex::from(T::one());
        for step in 0..cfg.steps_per_period {
            let t = h * T::from_usize(step).unwrap();
            a = rk4_step(p, t, h, &a);
            check_finite(&a, t + h)?;
        }
        *col = to_lab(p, p.period(), &a);
    }
    Ok(linalg::from_columns(&cols))
}

/// Quasienergies `E = (i / tau) log mu` from the eigenvalues `mu` of `U(tau)`,
/// real parts folded into `(-omega/2, omega/2]`.
pub fn numerical_quasienergies<T: Real>(u: &CMat4<T>, omega: T) -> Result<CVec4<T>> {
    if linalg::condition_number(u).is_infinite() {
        return Err(Error::Singular);
    }
    let mu = linalg::eigenvalues(u)?;
    let tau = T::TAU() / omega;
    let mut out = [Complex::zero(); DIM];
    for (e, m) in out.iter_mut().zip(mu) {
        if m.norm() == T::zero() {
            return Err(Error::Singular);
        }
        let log = Complex::new(m.norm().ln(), m.arg());
        *e = fold_quasienergy(Complex::new(T::zero(), T::one()) * log / tau, omega);
    }
    Ok(out)
}

/// Folds the real part into the zone `(-omega/2, omega/2]`.
pub fn fold_quasienergy<T: Real>(e: Complex<T>, omega: T) -> Complex<T> {
    let half = omega / T::lit(2.0);
    let mut re = e.re - omega * ((e.re + half) / omega).floor();
    // `re` now lies in [-half, half); move the lower edge to the upper one.
    if re <= -half {
        re = re + omega;
    }
    if re > half {
        re = re - omega;
    }
    Complex::new(re, e.im)
}

/// Distance between two quasienergies with real parts compared modulo `omega`.
pub fn zone_distance<T: Real>(a: Complex<T>, b: Complex<T>, omega: T) -> T {
    let d = fold_quasienergy(a - b, omega);
    d.norm()
}

/// Multiset distance between two spectra, real parts compared modulo `omega`.
pub fn zone_spectrum_distance<T: Real>(a: &CVec4<T>, b: &CVec4<T>, omega: T) -> T {
    let dist = |x, y| zone_distance(x, y, omega);
    let perm = crate::model::best_matching_by(a, b, dist);
    (0..DIM)
        .map(|k| zone_distance(a[k], b[perm[k]], omega))
        .fold(T::zero(), T::max)
}

/// Closed-form quasienergies shifted into the frame of the exact propagator.
///
/// The lab-frame envelope acquires `(-1)^n` per period, so exact Floquet
/// exponents equal the effective ones plus `n omega / 2` (mod `omega`).
pub fn lab_frame_quasienergies<T: Real>(effective: &CVec4<T>, n: i64, omega: T) -> CVec4<T> {
    let shift = T::from_i64(n).unwrap() * omega / T::lit(2.0);
    effective.map(|e| fold_quasienergy(e + Complex::from(shift), omega))
}

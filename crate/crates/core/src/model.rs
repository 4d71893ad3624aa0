//! Model definition and the high-frequency effective description.
//!
//! Basis ordering used everywhere: `a1 = |0,up>` (right well, spin up),
//! `a2 = |down,0>` (left, down), `a3 = |up,0>` (left, up),
//! `a4 = |0,down>` (right, down). Time is in units of the reference
//! frequency's inverse and all rates are in units of that frequency.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_jn;
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::linalg::{self, CMat4, CVec4, DIM};
use crate::scalar::Real;

/// Tolerance on `Omega/omega` being an integer.
pub const RESONANCE_TOL: f64 = 1e-9;

/// Eigenvector matrices above this condition number are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

const CLOSED_FORM_GUARD: f64 = 1e-12;

/// The seven model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams<T> {
    /// Bare tunneling rate.
    pub nu: T,
    /// Spin-orbit coupling strength.
    pub lambda: T,
    /// Zeeman field.
    pub zeeman: T,
    /// Driving frequency.
    pub omega: T,
    /// Driving amplitude.
    pub epsilon: T,
    /// Gain in the left well.
    pub beta_l: T,
    /// Loss in the right well.
    pub beta_r: T,
}

impl<T: Real> SystemParams<T> {
    /// Balanced gain and loss (`beta_l = beta_r = beta`).
    pub fn balanced(nu: T, lambda: T, zeeman: T, omega: T, epsilon: T, beta: T) -> Self {
        Self {
            nu,
            lambda,
            zeeman,
            omega,
            epsilon,
            beta_l: beta,
            beta_r: beta,
        }
    }

    /// Sets the driving amplitude through the Bessel argument `2 epsilon / omega`.
    pub fn with_two_eps_over_omega(mut self, x: T) -> Self {
        self.epsilon = x * self.omega / T::lit(2.0);
        self
    }

    pub fn two_eps_over_omega(&self) -> T {
        T::lit(2.0) * self.epsilon / self.omega
    }

    /// Driving period `2 pi / omega`.
    pub fn period(&self) -> T {
        T::TAU() / self.omega
    }

    pub fn is_balanced(&self) -> bool {
        self.beta_l == self.beta_r
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("nu", self.nu),
            ("lambda", self.lambda),
            ("Omega", self.zeeman),
            ("omega", self.omega),
            ("epsilon", self.epsilon),
            ("beta_l", self.beta_l),
            ("beta_r", self.beta_r),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} is not finite")));
        }
        if self.omega <= T::zero() {
            return Err(Error::InvalidParams("omega must be positive".into()));
        }
        for (name, v) in [
            ("nu", self.nu),
            ("beta_l", self.beta_l),
            ("beta_r", self.beta_r),
        ] {
            if v < T::zero() {
                return Err(Error::InvalidParams(format!("{name} must be non-negative")));
            }
        }
        Ok(())
    }

    /// Integer resonance order `n = Omega/omega`.
    pub fn resonance_order(&self) -> Result<i64> {
        self.validate()?;
        let ratio = self.zeeman / self.omega;
        let n = ratio.round();
        let tol = T::lit(RESONANCE_TOL).max(T::lit(16.0) * T::epsilon() * ratio.abs());
        if (ratio - n).abs() > tol {
            return Err(Error::ResonanceViolation {
                ratio: ratio.to_f64_lossy(),
            });
        }
        Ok(n.to_i64().unwrap_or(i64::MAX))
    }
}

impl Default for SystemParams<f64> {
    fn default() -> Self {
        Self {
            nu: 1.0,
            lambda: 0.0,
            zeeman: 100.0,
            omega: 50.0,
            epsilon: 0.0,
            beta_l: 0.0,
            beta_r: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: i64) -> Self {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// Bessel-renormalized couplings of the resonant effective model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveCouplings<T> {
    /// Spin-conserving coupling.
    pub j0: T,
    /// Spin-flipping coupling between `|down,0>` and `|0,up>`.
    pub j_plus: T,
    /// Spin-flipping coupling between `|up,0>` and `|0,down>`.
    pub j_minus: T,
    /// Resonance order `Omega/omega`.
    pub n: i64,
}

impl<T: Real> EffectiveCouplings<T> {
    pub fn parity(&self) -> Parity {
        Parity::of(self.n)
    }
}

pub fn effective_couplings<T: Real>(p: &SystemParams<T>) -> Result<EffectiveCouplings<T>> {
    let n = p.resonance_order()?;
    let x = p.two_eps_over_omega();
    let (s, c) = (T::PI() * p.lambda).sin_cos();
    Ok(EffectiveCouplings {
        j0: p.nu * c * bessel_jn(0, x)?,
        j_plus: p.nu * s * bessel_jn(n, x)?,
        j_minus: p.nu * s * bessel_jn(-n, x)?,
        n,
    })
}

/// Generator `M` of the effective model, `i db/dt = M b`.
pub fn effective_matrix<T: Real>(c: &EffectiveCouplings<T>, beta_l: T, beta_r: T) -> CMat4<T> {
    let re = |x: T| Complex::new(x, T::zero());
    let im = |x: T| Complex::new(T::zero(), x);
    let mut m = linalg::zeros();
    m[0][0] = im(-beta_r);
    m[0][1] = re(-c.j_plus);
    m[0][2] = re(-c.j0);
    m[1][0] = re(-c.j_plus);
    m[1][1] = im(beta_l);
    m[1][3] = re(-c.j0);
    m[2][0] = re(-c.j0);
    m[2][2] = im(beta_l);
    m[2][3] = re(c.j_minus);
    m[3][1] = re(-c.j0);
    m[3][2] = re(c.j_minus);
    m[3][3] = im(-beta_r);
    m
}

/// Square root of a real radicand on the principal branch.
pub(crate) fn sqrt_real<T: Real>(x: T) -> Complex<T> {
    if x >= T::zero() {
        Complex::new(x.sqrt(), T::zero())
    } else {
        Complex::new(T::zero(), (-x).sqrt())
    }
}

/// The two discriminants `zeta_+` and `zeta_-` of the closed-form spectrum.
pub fn zetas<T: Real>(c: &EffectiveCouplings<T>, beta_l: T, beta_r: T) -> (Complex<T>, Complex<T>) {
    let four = T::lit(4.0);
    let sum = beta_r + beta_l;
    let base = sum * sum - four * c.j0 * c.j0 - four * c.j_plus * c.j_plus;
    let cross = four * (c.j0 * (c.j_plus - c.j_minus)).abs();
    (sqrt_real(base + cross), sqrt_real(base - cross))
}

/// Closed-form quasienergies in label order `p = 1..4`.
pub fn closed_form_spectrum<T: Real>(
    c: &EffectiveCouplings<T>,
    beta_l: T,
    beta_r: T,
) -> [Complex<T>; DIM] {
    let (zp, zm) = zetas(c, beta_l, beta_r);
    let i_half = Complex::new(T::zero(), T::lit(0.5));
    let d = Complex::from(beta_l - beta_r);
    [
        i_half * (d + zp),
        i_half * (d - zp),
        i_half * (d - zm),
        i_half * (d + zm),
    ]
}

/// One Floquet mode: quasienergy with its (unnormalized) eigenvector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasienergyMode<T> {
    pub energy: Complex<T>,
    /// Components `(A, B, C, D)`; the largest one is scaled to one.
    pub vector: CVec4<T>,
    /// Label `p` of the closed-form branch this mode came from.
    pub index: usize,
}

/// Four Floquet modes, sorted by descending imaginary part then ascending
/// real part.
pub fn quasienergies<T: Real>(
    c: &EffectiveCouplings<T>,
    beta_l: T,
    beta_r: T,
) -> [QuasienergyMode<T>; DIM] {
    let energies = closed_form_spectrum(c, beta_l, beta_r);
    let m = effective_matrix(c, beta_l, beta_r);
    let vectors = closed_form_vectors(c, beta_l, beta_r)
        .filter(|vs| residuals_ok(&m, &energies, vs))
        .unwrap_or_else(|| numerical_vectors(&m, &energies));
    let mut modes: [QuasienergyMode<T>; DIM] = std::array::from_fn(|k| QuasienergyMode {
        energy: energies[k],
        vector: vectors[k],
        index: k + 1,
    });
    modes.sort_by(|a, b| {
        b.energy
            .im
            .partial_cmp(&a.energy.im)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                a.energy
                    .re
                    .partial_cmp(&b.energy.re)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
            .then(a.index.cmp(&b.index))
    });
    modes
}

/// Eigenvectors from the closed forms; only defined when `j0 != 0` and
/// `j_plus != j_minus` (odd resonance order).
fn closed_form_vectors<T: Real>(
    c: &EffectiveCouplings<T>,
    beta_l: T,
    beta_r: T,
) -> Option<[CVec4<T>; DIM]> {
    let guard = T::lit(CLOSED_FORM_GUARD);
    let dj = c.j_plus - c.j_minus;
    let pair = c.j0 * c.j0 + c.j_plus * c.j_minus;
    if dj.abs() <= guard || c.j0.abs() <= guard || pair.abs() <= guard {
        return None;
    }
    let (zp, zm) = zetas(c, beta_l, beta_r);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let cross = (c.j0 * dj).abs();
    let alpha_p = (dj * dj + two * cross) / (four * dj * pair);
    let alpha_m = (dj * dj - two * cross) / (four * dj * pair);
    let kappa_den = two * c.j0 * dj * pair;
    let kappa_p = (c.j0 * c.j0 * dj + c.j_plus * cross) / kappa_den;
    let kappa_m = (c.j0 * c.j0 * dj - c.j_plus * cross) / kappa_den;
    let eta = cross / (c.j0 * dj);
    let i = Complex::new(T::zero(), T::one());
    let sum = Complex::from(beta_r + beta_l);
    let one = Complex::from(T::one());

    let mut out = [[Complex::zero(); DIM]; DIM];
    for (k, sign) in [T::one(), -T::one()].into_iter().enumerate() {
        let s = Complex::from(sign);
        let w = sum * s + zp;
        out[k] = [
            one,
            s * i * w * alpha_p,
            -s * i * w * kappa_p,
            Complex::from(-eta),
        ];
        let w = -sum * s + zm;
        out[k + 2] = [
            one,
            -s * i * w * alpha_m,
            s * i * w * kappa_m,
            Complex::from(eta),
        ];
    }
    if out
        .iter()
        .flatten()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return None;
    }
    Some(out.map(|v| linalg::normalize_max(&v)))
}

fn residuals_ok<T: Real>(m: &CMat4<T>, energies: &CVec4<T>, vectors: &[CVec4<T>; DIM]) -> bool {
    let tol = T::lit(1e-9) * linalg::frobenius_norm(m).max(T::one());
    energies
        .iter()
        .zip(vectors)
        .all(|(e, v)| eigen_residual(m, *e, v) <= tol * linalg::vec_norm(v))
}

/// `|| (M - e I) v ||`.
pub fn eigen_residual<T: Real>(m: &CMat4<T>, e: Complex<T>, v: &CVec4<T>) -> T {
    let mv = linalg::matvec(m, v);
    mv.iter()
        .zip(v)
        .fold(T::zero(), |acc, (x, y)| acc + (x - e * y).norm_sqr())
        .sqrt()
}

/// Numerical eigenvectors, paired with the closed-form energies by the
/// permutation minimizing the worst eigenvalue mismatch.
fn numerical_vectors<T: Real>(m: &CMat4<T>, energies: &CVec4<T>) -> [CVec4<T>; DIM] {
    let Ok((values, vectors)) = linalg::eigen(m) else {
        return [[Complex::zero(); DIM]; DIM];
    };
    let perm = best_matching(energies, &values);
    std::array::from_fn(|k| vectors[perm[k]])
}

/// All 24 permutations of four indices.
pub fn permutations4() -> Vec<[usize; DIM]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    let p = [a, b, c, d];
                    let mut seen = [false; DIM];
                    if p.iter().all(|&i| !std::mem::replace(&mut seen[i], true)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Permutation `perm` minimizing `max_k |a[k] - b[perm[k]]|`.
pub fn best_matching<T: Real>(a: &CVec4<T>, b: &CVec4<T>) -> [usize; DIM] {
    best_matching_by(a, b, |x, y| (x - y).norm())
}

pub(crate) fn best_matching_by<T: Real>(
    a: &CVec4<T>,
    b: &CVec4<T>,
    dist: impl Fn(Complex<T>, Complex<T>) -> T,
) -> [usize; DIM] {
    let mut best = [0, 1, 2, 3];
    let mut best_cost = T::infinity();
    for p in permutations4() {
        let cost = (0..DIM)
            .map(|k| dist(a[k], b[p[k]]))
            .fold(T::zero(), T::max);
        if cost < best_cost {
            best_cost = cost;
            best = p;
        }
    }
    best
}

/// Multiset distance: worst mismatch under the best pairing.
pub fn spectrum_distance<T: Real>(a: &CVec4<T>, b: &CVec4<T>) -> T {
    let p = best_matching(a, b);
    (0..DIM)
        .map(|k| (a[k] - b[p[k]]).norm())
        .fold(T::zero(), T::max)
}

/// Amplitudes at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector<T> {
    pub amps: CVec4<T>,
    pub t: T,
}

impl<T: Real> StateVector<T> {
    pub fn new(amps: CVec4<T>, t: T) -> Self {
        Self { amps, t }
    }

    /// Unit amplitude on basis state `k` (1-based) at `t = 0`.
    pub fn basis(k: usize) -> Result<Self> {
        if !(1..=DIM).contains(&k) {
            return Err(Error::InvalidParams(format!(
                "basis index {k} not in 1..=4"
            )));
        }
        let mut amps = [Complex::zero(); DIM];
        amps[k - 1] = Complex::new(T::one(), T::zero());
        Ok(Self { amps, t: T::zero() })
    }

    pub fn probabilities(&self) -> [T; DIM] {
        self.amps.map(|a| a.norm_sqr())
    }

    pub fn total_probability(&self) -> T {
        self.probabilities()
            .iter()
            .fold(T::zero(), |acc, &p| acc + p)
    }
}

/// Phase factors `exp(-i theta_k(t))` linking slowly varying amplitudes to
/// the lab-frame ones, with the driving integral taken as
/// `(epsilon/omega) sin(omega t)` (zero at `t = 0`).
pub fn frame_phases<T: Real>(p: &SystemParams<T>, t: T) -> CVec4<T> {
    let zeeman = p.zeeman * t / T::lit(2.0);
    let drive = p.epsilon / p.omega * (p.omega * t).sin();
    let thetas = [
        zeeman - drive,
        -zeeman + drive,
        zeeman + drive,
        -zeeman - drive,
    ];
    thetas.map(|theta| Complex::new(T::zero(), -theta).exp())
}

/// Periodic envelope of a Floquet state (the `exp(-iEt)` factor excluded).
pub fn floquet_state_amplitudes<T: Real>(
    mode: &QuasienergyMode<T>,
    p: &SystemParams<T>,
    t: T,
) -> StateVector<T> {
    let phases = frame_phases(p, t);
    let mut amps = mode.vector;
    for (a, ph) in amps.iter_mut().zip(phases) {
        *a = *a * ph;
    }
    StateVector { amps, t }
}

/// Floquet modes with superposition weights fixed by an initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetSolutionSet<T> {
    pub modes: [QuasienergyMode<T>; DIM],
    pub coefficients: CVec4<T>,
}

impl<T: Real> FloquetSolutionSet<T> {
    /// Slowly varying amplitudes `d_k(t) = sum_p L_p v_pk exp(-i E_p t)`.
    pub fn slow_amplitudes(&self, t: T) -> CVec4<T> {
        let mut d = [Complex::zero(); DIM];
        for (mode, &lam) in self.modes.iter().zip(&self.coefficients) {
            let w = lam * (Complex::new(T::zero(), -t) * mode.energy).exp();
            for (dk, vk) in d.iter_mut().zip(&mode.vector) {
                *dk = *dk + w * vk;
            }
        }
        d
    }

    /// Lab-frame state at time `t`.
    pub fn state_at(&self, p: &SystemParams<T>, t: T) -> StateVector<T> {
        let mut amps = self.slow_amplitudes(t);
        for (a, ph) in amps.iter_mut().zip(frame_phases(p, t)) {
            *a = *a * ph;
        }
        StateVector { amps, t }
    }
}

pub fn non_floquet_solution<T: Real>(
    modes: &[QuasienergyMode<T>; DIM],
    initial: &StateVector<T>,
) -> Result<FloquetSolutionSet<T>> {
    let v = linalg::from_columns(&modes.map(|m| m.vector));
    let condition = linalg::condition_number(&v);
    if !(condition < T::lit(MAX_CONDITION)) {
        return Err(Error::Degenerate {
            condition: condition.to_f64_lossy(),
        });
    }
    let coefficients = linalg::Lu::new(&v)
        .map_err(|_| Error::Degenerate {
            condition: f64::INFINITY,
        })?
        .solve(&initial.amps);
    Ok(FloquetSolutionSet {
        modes: *modes,
        coefficients,
    })
}

/// Effective-model evolution sampled at `times`, mapped back to the lab frame.
pub fn analytic_evolution<T: Real>(
    p: &SystemParams<T>,
    initial: &StateVector<T>,
    times: &[T],
) -> Result<Trajectory<T>> {
    let c = effective_couplings(p)?;
    let modes = quasienergies(&c, p.beta_l, p.beta_r);
    let solution = non_floquet_solution(&modes, initial)?;
    let states = times.iter().map(|&t| solution.state_at(p, t)).collect();
    Trajectory::new(times.to_vec(), states)
}

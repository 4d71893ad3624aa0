//! Stability taxonomy of the effective spectrum and the balanced/unbalanced
//! gain-loss criteria built on it.

mod scan;

pub use scan::{
    boundary_curve, scan, verify_cells_dynamics, AxisParam, CellDynamics, Polyline, Quantity,
    ScanAxis, ScanGrid,
};

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::CVec4;
use crate::model::{effective_couplings, sqrt_real, EffectiveCouplings, Parity, SystemParams};
use crate::scalar::Real;

/// Default absolute tolerance on `Im E`.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Stability class by the signs of the quasienergies' imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StabilityCase {
    /// All quasienergies real: periodic, bounded dynamics.
    StableReal,
    /// Some zero, the rest negative: total probability settles to a constant.
    StableMixed,
    /// All negative: everything decays.
    AllDecay,
    /// At least one positive: exponential growth.
    Unstable,
}

impl StabilityCase {
    pub fn label(self) -> &'static str {
        match self {
            StabilityCase::StableReal => "A",
            StabilityCase::StableMixed => "B",
            StabilityCase::AllDecay => "C",
            StabilityCase::Unstable => "D",
        }
    }

    pub fn is_stable(self) -> bool {
        matches!(self, StabilityCase::StableReal | StabilityCase::StableMixed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityVerdict<T> {
    pub case: StabilityCase,
    pub max_im: T,
    pub spectrum: CVec4<T>,
}

pub fn classify<T: Real>(spectrum: &CVec4<T>, tol: T) -> StabilityVerdict<T> {
    let ims = spectrum.map(|e| e.im);
    let max_im = ims.iter().copied().fold(T::neg_infinity(), T::max);
    let case = if ims.iter().any(|&s| s > tol) {
        StabilityCase::Unstable
    } else if ims.iter().all(|&s| s.abs() <= tol) {
        StabilityCase::StableReal
    } else if ims.iter().all(|&s| s < -tol) {
        StabilityCase::AllDecay
    } else {
        StabilityCase::StableMixed
    };
    StabilityVerdict {
        case,
        max_im,
        spectrum: *spectrum,
    }
}

fn require(c: &EffectiveCouplings<impl Real>, parity: Parity) -> Result<()> {
    if c.parity() != parity {
        return Err(Error::WrongParity {
            expected: parity.name(),
            n: c.n,
        });
    }
    Ok(())
}

/// `rho = 2 sqrt(beta^2 - j0^2 - j_plus^2)` for balanced gain-loss, even order.
pub fn rho_even<T: Real>(c: &EffectiveCouplings<T>, beta: T) -> Result<Complex<T>> {
    require(c, Parity::Even)?;
    Ok(sqrt_real(beta * beta - c.j0 * c.j0 - c.j_plus * c.j_plus) * T::lit(2.0))
}

/// `(rho_+, rho_-)` with `rho_pm = 2 sqrt(beta^2 - (|j0| pm |j_plus|)^2)`, odd order.
pub fn rho_odd<T: Real>(c: &EffectiveCouplings<T>, beta: T) -> Result<(Complex<T>, Complex<T>)> {
    require(c, Parity::Odd)?;
    let two = T::lit(2.0);
    let s = c.j0.abs() + c.j_plus.abs();
    let d = c.j0.abs() - c.j_plus.abs();
    Ok((
        sqrt_real(beta * beta - s * s) * two,
        sqrt_real(beta * beta - d * d) * two,
    ))
}

/// `rho' = sqrt((beta_l + beta_r)^2 - 4 j0^2 - 4 j_plus^2)`, even order.
pub fn rho_prime_even<T: Real>(
    c: &EffectiveCouplings<T>,
    beta_l: T,
    beta_r: T,
) -> Result<Complex<T>> {
    require(c, Parity::Even)?;
    let sum = beta_l + beta_r;
    let four = T::lit(4.0);
    Ok(sqrt_real(
        sum * sum - four * (c.j0 * c.j0 + c.j_plus * c.j_plus),
    ))
}

/// `(rho'_+, rho'_-)` with `rho'_pm = sqrt((beta_l + beta_r)^2 - 4 (|j0| pm |j_plus|)^2)`.
pub fn rho_prime_odd<T: Real>(
    c: &EffectiveCouplings<T>,
    beta_l: T,
    beta_r: T,
) -> Result<(Complex<T>, Complex<T>)> {
    require(c, Parity::Odd)?;
    let sum = beta_l + beta_r;
    let four = T::lit(4.0);
    let s = c.j0.abs() + c.j_plus.abs();
    let d = c.j0.abs() - c.j_plus.abs();
    Ok((
        sqrt_real(sum * sum - four * s * s),
        sqrt_real(sum * sum - four * d * d),
    ))
}

/// Largest balanced `beta` on the stable side of the exceptional-point curve.
pub fn boundary_beta<T: Real>(c: &EffectiveCouplings<T>) -> T {
    match c.parity() {
        Parity::Even => (c.j0 * c.j0 + c.j_plus * c.j_plus).sqrt(),
        Parity::Odd => (c.j0.abs() - c.j_plus.abs()).abs(),
    }
}

/// Signed distance from the balanced boundary: negative inside the stable
/// region, positive outside.
pub fn balanced_discriminant<T: Real>(c: &EffectiveCouplings<T>, beta: T) -> T {
    let b = boundary_beta(c);
    beta * beta - b * b
}

/// Product relations `beta_r beta_l = target(couplings)` that balance gain,
/// loss and the effective couplings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EquilibriumRelation {
    /// Even order: `j0^2 + j_plus^2`.
    EvenBalance,
    /// Odd order with `j_plus = 0`: `j0^2`.
    SpinConserving,
    /// Odd order with `j0 = 0`: `j_plus^2`.
    SpinFlipping,
    /// Odd order: `(|j0| - |j_plus|)^2`.
    OddDifference,
}

impl EquilibriumRelation {
    pub fn target<T: Real>(self, c: &EffectiveCouplings<T>) -> T {
        match self {
            EquilibriumRelation::EvenBalance => c.j0 * c.j0 + c.j_plus * c.j_plus,
            EquilibriumRelation::SpinConserving => c.j0 * c.j0,
            EquilibriumRelation::SpinFlipping => c.j_plus * c.j_plus,
            EquilibriumRelation::OddDifference => {
                let d = c.j0.abs() - c.j_plus.abs();
                d * d
            }
        }
    }

    /// Loss rate satisfying the relation for a given gain.
    pub fn beta_r<T: Real>(self, c: &EffectiveCouplings<T>, beta_l: T) -> T {
        self.target(c) / beta_l
    }

    /// Gain rate satisfying the relation when `beta_r = ratio * beta_l`.
    pub fn beta_l_for_ratio<T: Real>(self, c: &EffectiveCouplings<T>, ratio: T) -> T {
        (self.target(c) / ratio).sqrt()
    }
}

/// Named stable condition families for unbalanced gain-loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EquilibriumCondition {
    /// Even order, `beta_r beta_l = j0^2 + j_plus^2`.
    Even,
    /// `j_plus = 0` and `beta_r beta_l = j0^2`.
    Category1i,
    /// `j0 = 0` and `beta_r beta_l = j_plus^2`.
    Category1ii,
    /// `j0 = j_plus = 0` and `beta_l = 0`.
    Category1iii,
    /// `(|j0| - |j_plus|)^2 = beta_r beta_l` and `(beta_l + beta_r)^2 < 4 (|j0| + |j_plus|)^2`.
    Category2i,
    /// `(|j0| - |j_plus|)^2 = beta_r beta_l` and `0 <= rho'_+ < beta_r - beta_l`.
    Category2ii,
}

impl EquilibriumCondition {
    pub fn label(self) -> &'static str {
        match self {
            EquilibriumCondition::Even => "even",
            EquilibriumCondition::Category1i => "1(i)",
            EquilibriumCondition::Category1ii => "1(ii)",
            EquilibriumCondition::Category1iii => "1(iii)",
            EquilibriumCondition::Category2i => "2(i)",
            EquilibriumCondition::Category2ii => "2(ii)",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck<T> {
    pub condition: EquilibriumCondition,
    pub satisfied: bool,
    /// Largest absolute residual among the equalities of the condition.
    pub residual: T,
    /// Spectrum the condition reduces the quasienergies to.
    pub spectrum: CVec4<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport<T> {
    pub couplings: EffectiveCouplings<T>,
    pub checks: Vec<ConditionCheck<T>>,
    pub stable: bool,
    /// First satisfied condition whose reduced spectrum is stable.
    pub matched: Option<EquilibriumCondition>,
    pub verdict: Option<StabilityCase>,
}

pub fn equilibrium_check<T: Real>(p: &SystemParams<T>, tol: T) -> Result<EquilibriumReport<T>> {
    let c = effective_couplings(p)?;
    let (bl, br) = (p.beta_l, p.beta_r);
    if br < bl {
        return Err(Error::Prerequisite {
            beta_l: bl.to_f64_lossy(),
            beta_r: br.to_f64_lossy(),
        });
    }
    let zero = Complex::new(T::zero(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    let diff = i * (bl - br);
    let pair_zero = [zero, diff, diff, zero];
    let product = br * bl;

    let mut checks = Vec::new();
    match c.parity() {
        Parity::Even => {
            let r = (product - EquilibriumRelation::EvenBalance.target(&c)).abs();
            checks.push(ConditionCheck {
                condition: EquilibriumCondition::Even,
                satisfied: r <= tol,
                residual: r,
                spectrum: pair_zero,
            });
        }
        Parity::Odd => {
            let j0 = c.j0.abs();
            let jp = c.j_plus.abs();

            // Most specific family first, so it is the one reported.
            let r = j0.max(jp).max(bl);
            let loss = -i * br;
            checks.push(ConditionCheck {
                condition: EquilibriumCondition::Category1iii,
                satisfied: r <= tol,
                residual: r,
                spectrum: [zero, loss, loss, zero],
            });

            let r = jp.max((product - EquilibriumRelation::SpinConserving.target(&c)).abs());
            checks.push(ConditionCheck {
                condition: EquilibriumCondition::Category1i,
                satisfied: r <= tol,
                residual: r,
                spectrum: pair_zero,
            });

            let r = j0.max((product - EquilibriumRelation::SpinFlipping.target(&c)).abs());
            checks.push(ConditionCheck {
                condition: EquilibriumCondition::Category1ii,
                satisfied: r <= tol,
                residual: r,
                spectrum: pair_zero,
            });

            let r = (product - EquilibriumRelation::OddDifference.target(&c)).abs();
            let (rho_plus, _) = rho_prime_odd(&c, bl, br)?;
            let half_i = i * T::lit(0.5);
            let reduced = [
                zero,
                diff,
                half_i * (Complex::from(bl - br) - rho_plus),
                half_i * (Complex::from(bl - br) + rho_plus),
            ];
            let sum = bl + br;
            let s = j0 + jp;
            let window = sum * sum < T::lit(4.0) * s * s;
            checks.push(ConditionCheck {
                condition: EquilibriumCondition::Category2i,
                satisfied: r <= tol && window,
                residual: r,
                spectrum: reduced,
            });
            let real_rho =
                rho_plus.im == T::zero() && rho_plus.re >= T::zero() && rho_plus.re < br - bl;
            checks.push(ConditionCheck {
                condition: EquilibriumCondition::Category2ii,
                satisfied: r <= tol && real_rho,
                residual: r,
                spectrum: reduced,
            });
        }
    }

    let class_tol = T::lit(DEFAULT_TOL);
    let hit = checks
        .iter()
        .filter(|ch| ch.satisfied)
        .map(|ch| (ch.condition, classify(&ch.spectrum, class_tol).case))
        .find(|(_, case)| case.is_stable());
    Ok(EquilibriumReport {
        couplings: c,
        checks,
        stable: hit.is_some(),
        matched: hit.map(|(cond, _)| cond),
        verdict: hit.map(|(_, case)| case),
    })
}

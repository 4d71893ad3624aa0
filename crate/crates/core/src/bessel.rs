//! Bessel functions of the first kind for integer order and real argument.
//!
//! Small arguments (`|x| < 12`) use the ascending power series; larger
//! arguments use Miller's backward recurrence normalized with
//! `J0 + 2 (J2 + J4 + ...) = 1`. Negative orders and arguments are reduced
//! to the non-negative case by parity.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest supported `|n|`.
pub const MAX_ORDER: i64 = 64;

/// Largest supported `|x|`.
pub const MAX_ARGUMENT: f64 = 1e4;

const SERIES_LIMIT: f64 = 12.0;

/// Integer Bessel order, restricted to `|n| <= 64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BesselOrder(i64);

impl BesselOrder {
    pub fn new(n: i64) -> Result<Self> {
        if n.abs() > MAX_ORDER {
            return Err(Error::UnsupportedOrder(n));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> i64 {
        self.0
    }
}

impl TryFrom<i64> for BesselOrder {
    type Error = Error;

    fn try_from(n: i64) -> Result<Self> {
        Self::new(n)
    }
}

/// `J_n(x)`.
pub fn bessel_j<T: Real>(order: BesselOrder, x: T) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("non-finite Bessel argument {x}")));
    }
    if x.abs() > T::lit(MAX_ARGUMENT) {
        return Err(Error::Domain(format!(
            "Bessel argument {x} outside |x| <= {MAX_ARGUMENT}"
        )));
    }
    let n = order.get();
    // J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x).
    let mut flip = n < 0 && n % 2 != 0;
    let m = n.unsigned_abs() as usize;
    if x < T::zero() && m % 2 == 1 {
        flip = !flip;
    }
    let value = bessel_j_nonneg(m, x.abs());
    Ok(if flip { -value } else { value })
}

/// Convenience wrapper taking a raw order.
pub fn bessel_jn<T: Real>(n: i64, x: T) -> Result<T> {
    bessel_j(BesselOrder::new(n)?, x)
}

fn bessel_j_nonneg<T: Real>(n: usize, x: T) -> T {
    if x == T::zero() {
        return if n == 0 { T::one() } else { T::zero() };
    }
    if x < T::lit(SERIES_LIMIT) {
        power_series(n, x)
    } else {
        miller(n, x)
    }
}

fn power_series<T: Real>(n: usize, x: T) -> T {
    let half = x * T::lit(0.5);
    // (x/2)^n / n!
    let mut term = T::one();
    for i in 1..=n {
        term = term * half / T::from_usize(i).unwrap();
    }
    let q = -(half * half);
    let mut sum = term;
    let mut k = 0usize;
    loop {
        k += 1;
        let denom = T::from_usize(k * (k + n)).unwrap();
        term = term * q / denom;
        sum = sum + term;
        // Terms grow until k ~ x/2; only stop once they are shrinking.
        if T::from_usize(k).unwrap() > half && term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
        if term == T::zero() || k > 500 {
            break;
        }
    }
    sum
}

fn miller<T: Real>(n: usize, x: T) -> T {
    let xf = x.to_f64_lossy();
    let top = (n as f64).max(xf.ceil());
    let mut start = (top + 10.0 * xf.cbrt() + 30.0) as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let two_over_x = T::lit(2.0) / x;
    let big = T::max_value().sqrt();
    let rescale = T::one() / big;

    let mut next = T::zero(); // J_{k+1}
    let mut cur = T::min_positive_value().sqrt(); // J_k, arbitrary seed at k = start
    let mut norm = T::zero();
    let mut target = T::zero();
    let mut k = start;
    loop {
        if k == n {
            target = cur;
        }
        if k % 2 == 0 {
            norm = norm + if k == 0 { cur } else { cur + cur };
        }
        if k == 0 {
            break;
        }
        let prev = T::from_usize(k).unwrap() * two_over_x * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        if cur.abs() > big {
            cur = cur * rescale;
            next = next * rescale;
            norm = norm * rescale;
            target = target * rescale;
        }
    }
    target / norm
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from a 30-digit arbitrary-precision evaluation.
    const REFERENCE: &[(i64, f64, f64)] = &[
        (0, 0.0, 1.0),
        (0, 1.5, 0.51182767173591812875),
        (1, 1.5, 0.55793650791009964199),
        (2, 1.5, 0.23208767214421472724),
        (0, 3.8317, -0.40275939569537511573),
        (1, 2.4048, 0.5191530145075532409),
        (2, 5.1356, 7.575254633674421359e-6),
        (0, 3.0, -0.26005195490193343762),
        (2, 3.0, 0.48609126058589107691),
        (1, 4.0, -0.066043328023549136143),
        (0, 4.0, -0.39714980986384737229),
        (5, 0.3, 6.3044326337710711158e-7),
        (3, 11.9, 0.20762727605698189417),
        (0, 12.0, 0.047689310796833536624),
        (7, 12.5, -0.22517790045972311055),
        (1, 20.0, 0.066833124175850045579),
        (10, 37.0, -0.13256690286695294934),
        (0, 99.5, -0.019543066407440783557),
        (2, 100.0, -0.021528757344505365585),
        (64, 50.0, 0.000063583833006752058569),
        (20, 80.0, 0.090565405489918360332),
        (1, 2.001, 0.57666013599295424417),
        (3, -7.25, 0.21924533340150819107),
        (30, 5.0, 2.6711772782507988106e-21),
    ];

    #[test]
    fn matches_reference_table() {
        for &(n, x, want) in REFERENCE {
            let got = bessel_jn(n, x).unwrap();
            assert!(
                (got - want).abs() < 1e-12,
                "J_{n}({x}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn large_arguments_stay_accurate() {
        let got = bessel_jn(0, 1000.0_f64).unwrap();
        assert!((got - 0.024786686152420174561).abs() < 1e-10);
        let got = bessel_jn(4, 9999.0_f64).unwrap();
        assert!((got - -0.00077094192935071319816).abs() < 1e-10);
    }

    #[test]
    fn reference_values() {
        assert_eq!(bessel_jn(0, 0.0_f64).unwrap(), 1.0);
        assert!((bessel_jn(2, 1.5_f64).unwrap() - 0.232088).abs() < 1e-6);
        assert!((bessel_jn(0, 1.5_f64).unwrap() - 0.5118).abs() < 1e-4);
        assert!((bessel_jn(0, 3.8317_f64).unwrap().abs() - 0.40276).abs() < 1e-5);
        assert!((bessel_jn(1, 2.4048_f64).unwrap().abs() - 0.51915).abs() < 1e-5);
        assert!(bessel_jn(2, 5.1356_f64).unwrap().abs() < 1e-4);
    }

    #[test]
    fn negative_order_is_parity_reduction() {
        for n in 0..=12i64 {
            for &x in &[0.3, 2.0, 7.7, 15.0, 42.0] {
                let pos: f64 = bessel_jn(n, x).unwrap();
                let neg: f64 = bessel_jn(-n, x).unwrap();
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(neg, sign * pos);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(bessel_jn(65, 1.0f64), Err(Error::UnsupportedOrder(65)));
        assert_eq!(bessel_jn(-65, 1.0f64), Err(Error::UnsupportedOrder(-65)));
        assert!(matches!(bessel_jn(0, f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(bessel_jn(0, f64::INFINITY), Err(Error::Domain(_))));
        assert!(matches!(bessel_jn(0, 2e4f64), Err(Error::Domain(_))));
    }

    #[test]
    fn single_precision() {
        let got: f32 = bessel_jn(2, 1.5f32).unwrap();
        assert!((got - 0.232_087_67).abs() < 1e-6);
        let got: f32 = bessel_jn(1, 20.0f32).unwrap();
        assert!((got - 0.066_833_12).abs() < 1e-5);
    }
}

//! Bracketing root finders and the stable-window search built on them.

use crate::error::{Error, Result};
use crate::model::{effective_couplings, SystemParams};
use crate::scalar::Real;
use crate::stability::boundary_beta;

/// Bisection on a sign-changing bracket, to absolute width `tol`.
pub fn bisect<T: Real>(mut f: impl FnMut(T) -> T, mut a: T, mut b: T, tol: T) -> Result<T> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if !(fa * fb < T::zero()) {
        return Err(Error::InvalidParams(format!(
            "no sign change on [{a}, {b}]"
        )));
    }
    let two = T::lit(2.0);
    while (b - a).abs() > tol {
        let m = (a + b) / two;
        let fm = f(m);
        if fm == T::zero() {
            return Ok(m);
        }
        if (fm < T::zero()) == (fa < T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok((a + b) / two)
}

/// All sign changes of `f` on `[a, b]` found on a uniform grid of
/// `samples` intervals, each refined by bisection.
pub fn find_roots<T: Real>(
    mut f: impl FnMut(T) -> T,
    a: T,
    b: T,
    samples: usize,
    tol: T,
) -> Result<Vec<T>> {
    if !(a < b) || samples == 0 {
        return Err(Error::InvalidParams(
            "root search needs a < b and samples > 0".into(),
        ));
    }
    let step = (b - a) / T::from_usize(samples).unwrap();
    let mut roots = Vec::new();
    let mut x0 = a;
    let mut f0 = f(x0);
    for k in 1..=samples {
        let x1 = if k == samples {
            b
        } else {
            a + step * T::from_usize(k).unwrap()
        };
        let f1 = f(x1);
        if f0 == T::zero() {
            roots.push(x0);
        } else if f0 * f1 < T::zero() {
            roots.push(bisect(&mut f, x0, x1, tol)?);
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == T::zero() {
        roots.push(x0);
    }
    Ok(roots)
}

/// Golden-section minimum of a unimodal `f` on `[a, b]`.
pub fn golden_min<T: Real>(mut f: impl FnMut(T) -> T, mut a: T, mut b: T, tol: T) -> (T, T) {
    let g = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / T::lit(2.0);
    (x, f(x))
}

/// Minimum over `[a, b]` of `f`, located on a uniform grid then polished
/// by golden section around the best sample.
pub fn grid_min<T: Real>(mut f: impl FnMut(T) -> T, a: T, b: T, samples: usize, tol: T) -> (T, T) {
    let step = (b - a) / T::from_usize(samples).unwrap();
    let mut best = (a, f(a));
    for k in 1..=samples {
        let x = a + step * T::from_usize(k).unwrap();
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    let lo = (best.0 - step).max(a);
    let hi = (best.0 + step).min(b);
    let polished = golden_min(&mut f, lo, hi, tol);
    if polished.1 < best.1 {
        polished
    } else {
        best
    }
}

/// Intervals of `2 eps / omega` in `[lo, hi]` where a balanced gain-loss
/// `beta` stays below the boundary, i.e. the stable windows at fixed lambda.
pub fn stable_windows<T: Real>(
    template: &SystemParams<T>,
    beta: T,
    lo: T,
    hi: T,
    tol: T,
) -> Result<Vec<(T, T)>> {
    template.resonance_order()?;
    let margin = |x: T| -> T {
        effective_couplings(&template.with_two_eps_over_omega(x))
            .map(|c| boundary_beta(&c) - beta)
            .unwrap_or_else(|_| T::nan())
    };
    let roots = find_roots(margin, lo, hi, 4000, tol)?;
    let mut edges = vec![lo];
    edges.extend(roots.iter().copied().filter(|&r| r > lo && r < hi));
    edges.push(hi);
    let mut windows = Vec::new();
    for w in edges.windows(2) {
        let mid = (w[0] + w[1]) / T::lit(2.0);
        if margin(mid) > T::zero() {
            windows.push((w[0], w[1]));
        }
    }
    Ok(windows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x: f64| x * x + 1.0, 0.0, 2.0, 1e-10).is_err());
    }

    #[test]
    fn find_roots_of_sine() {
        let roots = find_roots(|x: f64| x.sin(), 0.5, 10.0, 100, 1e-12).unwrap();
        assert_eq!(roots.len(), 3);
        for (k, r) in roots.iter().enumerate() {
            assert!((r - (k + 1) as f64 * std::f64::consts::PI).abs() < 1e-11);
        }
    }

    #[test]
    fn golden_parabola() {
        let (x, v) = golden_min(|x: f64| (x - 0.3).powi(4), -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(v < 1e-30);
        let (x, _) = grid_min(|x: f64| (3.0 * x).cos(), 0.0, 4.0, 50, 1e-10);
        assert!((x - std::f64::consts::PI / 3.0).abs() < 1e-6);
    }

    #[test]
    fn spin_flipping_window() {
        let p = SystemParams::<f64>::balanced(1.0, 0.5, 50.0, 50.0, 0.0, 0.0);
        let w = stable_windows(&p, 0.45, 0.0, 4.0, 1e-12).unwrap();
        assert_eq!(w.len(), 1);
        let j1 = |x: f64| crate::bessel::bessel_jn(1, x).unwrap();
        assert!((j1(w[0].0) - 0.45).abs() < 1e-10);
        assert!((j1(w[0].1) - 0.45).abs() < 1e-10);
    }
}

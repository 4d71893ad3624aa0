//! Deviation metrics between trajectories and steady-state estimates of the
//! total probability.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationReport<T> {
    pub max_abs_amplitude_dev: T,
    pub max_abs_probability_dev: T,
    /// Sample time where the amplitude deviation peaks.
    pub time_of_max: T,
}

/// Component-wise maximum deviations between two trajectories sampled on
/// the same grid.
pub fn compare_trajectories<T: Real>(
    a: &Trajectory<T>,
    b: &Trajectory<T>,
) -> Result<DeviationReport<T>> {
    if a.len() != b.len() {
        return Err(Error::Alignment(format!(
            "{} samples against {}",
            a.len(),
            b.len()
        )));
    }
    let grid_tol = T::lit(1e-9);
    let mut report = DeviationReport {
        max_abs_amplitude_dev: T::zero(),
        max_abs_probability_dev: T::zero(),
        time_of_max: a.times.first().copied().unwrap_or_else(T::zero),
    };
    for k in 0..a.len() {
        let (ta, tb) = (a.times[k], b.times[k]);
        if (ta - tb).abs() > grid_tol * (T::one() + ta.abs()) {
            return Err(Error::Alignment(format!(
                "sample {k}: t = {ta} against t = {tb}"
            )));
        }
        let amp = a.states[k]
            .amps
            .iter()
            .zip(&b.states[k].amps)
            .map(|(x, y)| (x - y).norm())
            .fold(T::zero(), T::max);
        if amp > report.max_abs_amplitude_dev {
            report.max_abs_amplitude_dev = amp;
            report.time_of_max = ta;
        }
        let prob = a.probabilities[k][..4]
            .iter()
            .zip(&b.probabilities[k][..4])
            .map(|(x, y)| (*x - *y).abs())
            .fold(T::zero(), T::max);
        report.max_abs_probability_dev = report.max_abs_probability_dev.max(prob);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticEstimate<T> {
    pub mean: T,
    /// Spread over the same window; small values indicate convergence.
    pub std: T,
    pub samples: usize,
}

/// Mean and standard deviation of `P_total` over the trailing
/// `window_fraction` of the trajectory's time span.
pub fn asymptotic_total_probability<T: Real>(
    traj: &Trajectory<T>,
    window_fraction: T,
) -> Result<AsymptoticEstimate<T>> {
    if !(window_fraction > T::zero() && window_fraction <= T::lit(0.5)) {
        return Err(Error::InvalidConfig(format!(
            "window fraction {window_fraction} outside (0, 0.5]"
        )));
    }
    let (Some(&t0), Some(&t1)) = (traj.times.first(), traj.times.last()) else {
        return Err(Error::InvalidConfig("empty trajectory".into()));
    };
    let start = t1 - (t1 - t0) * window_fraction;
    let window: Vec<(T, T)> = traj
        .times
        .iter()
        .zip(traj.total_probability())
        .filter(|(&t, _)| t >= start)
        .map(|(&t, p)| (t, p))
        .collect();
    if let Some(&(t, _)) = window.iter().find(|(_, p)| !p.is_finite()) {
        return Err(Error::Divergence {
            time: t.to_f64_lossy(),
        });
    }
    let n = T::from_usize(window.len()).unwrap();
    let mean = window.iter().fold(T::zero(), |acc, (_, p)| acc + *p) / n;
    let var = window
        .iter()
        .fold(T::zero(), |acc, (_, p)| acc + (*p - mean) * (*p - mean))
        / n;
    Ok(AsymptoticEstimate {
        mean,
        std: var.sqrt(),
        samples: window.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StateVector;
    use num_complex::Complex;

    fn traj(values: &[f64]) -> Trajectory<f64> {
        let times: Vec<f64> = (0..values.len()).map(|k| k as f64 * 0.5).collect();
        let states = values
            .iter()
            .zip(&times)
            .map(|(&v, &t)| {
                let z = Complex::new(0.0, 0.0);
                StateVector::new([Complex::new(v, 0.0), z, z, z], t)
            })
            .collect();
        Trajectory::new(times, states).unwrap()
    }

    #[test]
    fn identical_trajectories_have_zero_deviation() {
        let a = traj(&[1.0, 0.8, 0.6]);
        let r = compare_trajectories(&a, &a).unwrap();
        assert_eq!(r.max_abs_amplitude_dev, 0.0);
        assert_eq!(r.max_abs_probability_dev, 0.0);
    }

    #[test]
    fn single_differing_sample() {
        let a = traj(&[1.0, 0.8, 0.6, 0.5]);
        let b = traj(&[1.0, 0.8, 0.3, 0.5]);
        let r = compare_trajectories(&a, &b).unwrap();
        assert!((r.max_abs_amplitude_dev - 0.3).abs() < 1e-15);
        assert!((r.max_abs_probability_dev - (0.36 - 0.09)).abs() < 1e-15);
        assert_eq!(r.time_of_max, 1.0);
    }

    #[test]
    fn misaligned_grids_rejected() {
        let a = traj(&[1.0, 0.8, 0.6]);
        let b = traj(&[1.0, 0.8]);
        assert!(matches!(
            compare_trajectories(&a, &b),
            Err(Error::Alignment(_))
        ));
        let mut c = traj(&[1.0, 0.8, 0.6]);
        c.times[2] = 1.2;
        assert!(matches!(
            compare_trajectories(&a, &c),
            Err(Error::Alignment(_))
        ));
    }

    #[test]
    fn trailing_window_mean() {
        let t = traj(&[3.0, 2.0, 1.0, 1.0, 1.0]);
        let est = asymptotic_total_probability(&t, 0.5).unwrap();
        assert_eq!(est.samples, 3);
        assert!((est.mean - 1.0).abs() < 1e-15);
        assert!(est.std < 1e-15);
    }

    #[test]
    fn window_bounds_enforced() {
        let t = traj(&[1.0, 1.0]);
        assert!(asymptotic_total_probability(&t, 0.0).is_err());
        assert!(asymptotic_total_probability(&t, 0.6).is_err());
    }

    #[test]
    fn non_finite_window_is_divergence() {
        let t = traj(&[1.0, 1.0, f64::INFINITY]);
        assert!(matches!(
            asymptotic_total_probability(&t, 0.5),
            Err(Error::Divergence { .. })
        ));
    }
}

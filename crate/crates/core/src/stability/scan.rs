//! Two-dimensional parameter scans of the closed-form spectrum, with
//! boundary curves traced by marching squares on a signed indicator whose
//! zero set separates stable from unstable cells.

use std::collections::HashMap;

use num_complex::Complex;
use rand::seq::index::sample;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{balanced_discriminant, classify, rho_even, rho_odd, StabilityCase};
use crate::error::{Error, Result};
use crate::integrator::{propagate, IntegrationConfig};
use crate::model::{closed_form_spectrum, effective_couplings, Parity, StateVector, SystemParams};
use crate::scalar::Real;

/// Bisection stops once the bracket is narrower than this (axis units).
pub const BISECTION_WIDTH: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisParam {
    Lambda,
    TwoEpsOverOmega,
    /// Balanced gain and loss, sets both rates.
    Beta,
    BetaL,
    BetaR,
}

impl AxisParam {
    pub fn name(self) -> &'static str {
        match self {
            AxisParam::Lambda => "lambda",
            AxisParam::TwoEpsOverOmega => "two_eps_over_omega",
            AxisParam::Beta => "beta",
            AxisParam::BetaL => "beta_l",
            AxisParam::BetaR => "beta_r",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            AxisParam::Lambda,
            AxisParam::TwoEpsOverOmega,
            AxisParam::Beta,
            AxisParam::BetaL,
            AxisParam::BetaR,
        ]
        .into_iter()
        .find(|a| a.name() == s)
    }

    pub fn apply<T: Real>(self, p: &mut SystemParams<T>, v: T) {
        match self {
            AxisParam::Lambda => p.lambda = v,
            AxisParam::TwoEpsOverOmega => *p = p.with_two_eps_over_omega(v),
            AxisParam::Beta => {
                p.beta_l = v;
                p.beta_r = v;
            }
            AxisParam::BetaL => p.beta_l = v,
            AxisParam::BetaR => p.beta_r = v,
        }
    }

    fn touches(self, other: Self) -> bool {
        use AxisParam::*;
        self == other || matches!((self, other), (Beta, BetaL | BetaR) | (BetaL | BetaR, Beta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanAxis<T> {
    pub param: AxisParam,
    pub min: T,
    pub max: T,
    pub count: usize,
}

impl<T: Real> ScanAxis<T> {
    pub fn new(param: AxisParam, min: T, max: T, count: usize) -> Self {
        Self {
            param,
            min,
            max,
            count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || !(self.min < self.max) {
            return Err(Error::InvalidGrid(format!(
                "axis {} needs finite min < max",
                self.param.name()
            )));
        }
        if self.count < 2 {
            return Err(Error::InvalidGrid(format!(
                "axis {} needs at least two points",
                self.param.name()
            )));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> T {
        let f = T::from_usize(i).unwrap() / T::from_usize(self.count - 1).unwrap();
        self.min + (self.max - self.min) * f
    }

    pub fn values(&self) -> Vec<T> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// Scalar plotted on a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `Re rho`, balanced gain-loss, even order.
    ReRhoEven,
    /// `Re(rho_+ + rho_-)`, balanced gain-loss, odd order.
    ReRhoSumOdd,
    /// `max_p Im E_p`, any configuration.
    MaxImSpectrum,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::ReRhoEven => "re_rho_even",
            Quantity::ReRhoSumOdd => "re_rho_sum_odd",
            Quantity::MaxImSpectrum => "max_im_spectrum",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Quantity::ReRhoEven,
            Quantity::ReRhoSumOdd,
            Quantity::MaxImSpectrum,
        ]
        .into_iter()
        .find(|q| q.name() == s)
    }

    fn balanced(self) -> bool {
        !matches!(self, Quantity::MaxImSpectrum)
    }
}

/// Ordered `(axis1, axis2)` points of one boundary curve.
pub type Polyline<T> = Vec<(T, T)>;

/// Result of a scan; matrices are row-major with `axis1` as the row index.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid<T> {
    pub axis1: ScanAxis<T>,
    pub axis2: ScanAxis<T>,
    pub quantity: Quantity,
    pub template: SystemParams<T>,
    pub tol: T,
    pub values: Vec<T>,
    pub verdicts: Vec<StabilityCase>,
    pub max_im: Vec<T>,
    /// Grid nodes adjacent to a boundary crossing.
    pub boundary_cells: Vec<(usize, usize)>,
    pub boundary: Vec<Polyline<T>>,
}

impl<T: Real> ScanGrid<T> {
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.axis2.count + j
    }

    pub fn value(&self, i: usize, j: usize) -> T {
        self.values[self.idx(i, j)]
    }

    pub fn verdict(&self, i: usize, j: usize) -> StabilityCase {
        self.verdicts[self.idx(i, j)]
    }

    pub fn params_at(&self, i: usize, j: usize) -> SystemParams<T> {
        point_params(
            &self.template,
            &self.axis1,
            &self.axis2,
            self.axis1.value(i),
            self.axis2.value(j),
        )
    }

    /// 4-connected components of stable cells.
    pub fn stable_components(&self) -> Vec<Vec<(usize, usize)>> {
        let (n1, n2) = (self.axis1.count, self.axis2.count);
        let mut seen = vec![false; n1 * n2];
        let mut out = Vec::new();
        for start in 0..n1 * n2 {
            if seen[start] || !self.verdicts[start].is_stable() {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(k) = stack.pop() {
                let (i, j) = (k / n2, k % n2);
                comp.push((i, j));
                let mut push = |ii: usize, jj: usize| {
                    let kk = ii * n2 + jj;
                    if !seen[kk] && self.verdicts[kk].is_stable() {
                        seen[kk] = true;
                        stack.push(kk);
                    }
                };
                if i > 0 {
                    push(i - 1, j);
                }
                if i + 1 < n1 {
                    push(i + 1, j);
                }
                if j > 0 {
                    push(i, j - 1);
                }
                if j + 1 < n2 {
                    push(i, j + 1);
                }
            }
            out.push(comp);
        }
        out
    }
}

fn point_params<T: Real>(
    template: &SystemParams<T>,
    axis1: &ScanAxis<T>,
    axis2: &ScanAxis<T>,
    v1: T,
    v2: T,
) -> SystemParams<T> {
    let mut p = *template;
    axis1.param.apply(&mut p, v1);
    axis2.param.apply(&mut p, v2);
    p
}

struct Node<T> {
    value: T,
    indicator: T,
    case: StabilityCase,
    max_im: T,
}

fn evaluate<T: Real>(p: &SystemParams<T>, quantity: Quantity, tol: T) -> Result<Node<T>> {
    let c = effective_couplings(p)?;
    let spectrum = closed_form_spectrum(&c, p.beta_l, p.beta_r);
    let verdict = classify(&spectrum, tol);
    let (value, indicator) = match quantity {
        Quantity::ReRhoEven => (
            rho_even(&c, p.beta_l)?.re,
            balanced_discriminant(&c, p.beta_l),
        ),
        Quantity::ReRhoSumOdd => {
            let (a, b) = rho_odd(&c, p.beta_l)?;
            ((a + b).re, balanced_discriminant(&c, p.beta_l))
        }
        Quantity::MaxImSpectrum => (verdict.max_im, verdict.max_im - tol),
    };
    Ok(Node {
        value,
        indicator,
        case: verdict.case,
        max_im: verdict.max_im,
    })
}

fn check_request<T: Real>(
    template: &SystemParams<T>,
    axis1: &ScanAxis<T>,
    axis2: &ScanAxis<T>,
    quantity: Quantity,
) -> Result<()> {
    axis1.validate()?;
    axis2.validate()?;
    if axis1.param.touches(axis2.param) {
        return Err(Error::InvalidGrid(format!(
            "axes {} and {} refer to the same parameter",
            axis1.param.name(),
            axis2.param.name()
        )));
    }
    let n = template.resonance_order()?;
    let parity = Parity::of(n);
    match (quantity, parity) {
        (Quantity::ReRhoEven, Parity::Odd) => {
            return Err(Error::WrongParity {
                expected: "even",
                n,
            })
        }
        (Quantity::ReRhoSumOdd, Parity::Even) => {
            return Err(Error::WrongParity { expected: "odd", n })
        }
        _ => {}
    }
    if quantity.balanced() {
        let axes = [axis1.param, axis2.param];
        if axes
            .iter()
            .any(|a| matches!(a, AxisParam::BetaL | AxisParam::BetaR))
        {
            return Err(Error::InvalidGrid(
                "balanced quantities sweep gain-loss through the `beta` axis only".into(),
            ));
        }
        if !axes.contains(&AxisParam::Beta) && !template.is_balanced() {
            return Err(Error::InvalidGrid(
                "balanced quantity needs beta_l = beta_r in the template".into(),
            ));
        }
    }
    Ok(())
}

/// Evaluates `quantity` and the stability verdict on every grid node, then
/// traces the stable/unstable boundary.
pub fn scan<T: Real>(
    template: &SystemParams<T>,
    axis1: ScanAxis<T>,
    axis2: ScanAxis<T>,
    quantity: Quantity,
    tol: T,
) -> Result<ScanGrid<T>> {
    check_request(template, &axis1, &axis2, quantity)?;
    let (n1, n2) = (axis1.count, axis2.count);
    let nodes: Vec<Node<T>> = (0..n1 * n2)
        .into_par_iter()
        .map(|k| {
            let p = point_params(
                template,
                &axis1,
                &axis2,
                axis1.value(k / n2),
                axis2.value(k % n2),
            );
            evaluate(&p, quantity, tol)
        })
        .collect::<Result<_>>()?;

    let indicator: Vec<T> = nodes.iter().map(|n| n.indicator).collect();
    let tracer = Tracer {
        template,
        axis1: &axis1,
        axis2: &axis2,
        quantity,
        tol,
        indicator: &indicator,
    };
    let (boundary_cells, boundary) = tracer.trace();

    Ok(ScanGrid {
        axis1,
        axis2,
        quantity,
        template: *template,
        tol,
        values: nodes.iter().map(|n| n.value).collect(),
        verdicts: nodes.iter().map(|n| n.case).collect(),
        max_im: nodes.iter().map(|n| n.max_im).collect(),
        boundary_cells,
        boundary,
    })
}

/// Grid edge: horizontal edges join `(i, j)`-`(i+1, j)`, vertical ones
/// join `(i, j)`-`(i, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

struct Tracer<'a, T: Real> {
    template: &'a SystemParams<T>,
    axis1: &'a ScanAxis<T>,
    axis2: &'a ScanAxis<T>,
    quantity: Quantity,
    tol: T,
    indicator: &'a [T],
}

impl<T: Real> Tracer<'_, T> {
    fn inside(&self, i: usize, j: usize) -> bool {
        self.indicator[i * self.axis2.count + j] <= T::zero()
    }

    fn indicator_at(&self, v1: T, v2: T) -> T {
        let p = point_params(self.template, self.axis1, self.axis2, v1, v2);
        evaluate(&p, self.quantity, self.tol)
            .map(|n| n.indicator)
            .unwrap_or_else(|_| T::nan())
    }

    /// Bisection along an edge whose endpoints straddle the boundary.
    fn crossing(&self, edge: Edge) -> (T, T) {
        let (i, j, along_first) = match edge {
            Edge::H(i, j) => (i, j, true),
            Edge::V(i, j) => (i, j, false),
        };
        let (v1, v2) = (self.axis1.value(i), self.axis2.value(j));
        let (mut lo, mut hi) = if along_first {
            (v1, self.axis1.value(i + 1))
        } else {
            (v2, self.axis2.value(j + 1))
        };
        let eval = |x: T| {
            if along_first {
                self.indicator_at(x, v2)
            } else {
                self.indicator_at(v1, x)
            }
        };
        let lo_inside = self.inside(i, j);
        let width = T::lit(BISECTION_WIDTH);
        while (hi - lo).abs() > width {
            let mid = (lo + hi) / T::lit(2.0);
            let f = eval(mid);
            if (f <= T::zero()) == lo_inside {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = (lo + hi) / T::lit(2.0);
        if along_first {
            (x, v2)
        } else {
            (v1, x)
        }
    }

    fn trace(&self) -> (Vec<(usize, usize)>, Vec<Polyline<T>>) {
        let (n1, n2) = (self.axis1.count, self.axis2.count);
        let mut crossings: HashMap<Edge, (T, T)> = HashMap::new();
        let mut flagged = vec![false; n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                let here = self.inside(i, j);
                if i + 1 < n1 && self.inside(i + 1, j) != here {
                    crossings.insert(Edge::H(i, j), self.crossing(Edge::H(i, j)));
                    flagged[i * n2 + j] = true;
                    flagged[(i + 1) * n2 + j] = true;
                }
                if j + 1 < n2 && self.inside(i, j + 1) != here {
                    crossings.insert(Edge::V(i, j), self.crossing(Edge::V(i, j)));
                    flagged[i * n2 + j] = true;
                    flagged[i * n2 + j + 1] = true;
                }
            }
        }

        let mut segments: Vec<(Edge, Edge)> = Vec::new();
        for i in 0..n1.saturating_sub(1) {
            for j in 0..n2.saturating_sub(1) {
                let bottom = Edge::H(i, j);
                let top = Edge::H(i, j + 1);
                let left = Edge::V(i, j);
                let right = Edge::V(i + 1, j);
                let hits: Vec<Edge> = [bottom, right, top, left]
                    .into_iter()
                    .filter(|e| crossings.contains_key(e))
                    .collect();
                match hits.len() {
                    2 => segments.push((hits[0], hits[1])),
                    4 => {
                        let (c1, c2) = (self.axis1.value(i), self.axis1.value(i + 1));
                        let (d1, d2) = (self.axis2.value(j), self.axis2.value(j + 1));
                        let two = T::lit(2.0);
                        let center =
                            self.indicator_at((c1 + c2) / two, (d1 + d2) / two) <= T::zero();
                        if center == self.inside(i, j) {
                            // Corners (i, j) and (i+1, j+1) connect through the center.
                            segments.push((bottom, right));
                            segments.push((top, left));
                        } else {
                            segments.push((bottom, left));
                            segments.push((right, top));
                        }
                    }
                    _ => {}
                }
            }
        }

        let boundary = chain(&segments)
            .into_iter()
            .map(|edges| edges.iter().map(|e| crossings[e]).collect())
            .collect();
        let cells = flagged
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(k, _)| (k / n2, k % n2))
            .collect();
        (cells, boundary)
    }
}

/// Joins segments sharing an edge point into ordered chains; open chains
/// first, then closed loops.
fn chain(segments: &[(Edge, Edge)]) -> Vec<Vec<Edge>> {
    let mut adjacency: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(*a).or_default().push(k);
        adjacency.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut starts: Vec<Edge> = adjacency
        .iter()
        .filter(|(_, segs)| segs.len() == 1)
        .map(|(e, _)| *e)
        .collect();
    starts.sort();
    let mut rest: Vec<Edge> = adjacency.keys().copied().collect();
    rest.sort();
    starts.extend(rest);

    let mut out = Vec::new();
    for start in starts {
        let Some(&first) = adjacency[&start].iter().find(|&&k| !used[k]) else {
            continue;
        };
        let mut line = vec![start];
        let mut at = start;
        let mut seg = Some(first);
        while let Some(k) = seg {
            used[k] = true;
            let (a, b) = segments[k];
            let next = if a == at { b } else { a };
            line.push(next);
            at = next;
            seg = adjacency[&at].iter().copied().find(|&s| !used[s]);
        }
        out.push(line);
    }
    out
}

/// `(swept value, boundary beta)` along one axis.
pub fn boundary_curve<T: Real>(
    template: &SystemParams<T>,
    axis: &ScanAxis<T>,
) -> Result<Vec<(T, T)>> {
    axis.validate()?;
    if matches!(
        axis.param,
        AxisParam::Beta | AxisParam::BetaL | AxisParam::BetaR
    ) {
        return Err(Error::InvalidGrid(
            "boundary sweep needs lambda or two_eps_over_omega".into(),
        ));
    }
    axis.values()
        .into_iter()
        .map(|v| {
            let mut p = *template;
            axis.param.apply(&mut p, v);
            Ok((v, super::boundary_beta(&effective_couplings(&p)?)))
        })
        .collect()
}

/// Integration cross-check of one scan cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellDynamics<T> {
    pub i: usize,
    pub j: usize,
    pub case: StabilityCase,
    pub max_im: T,
    /// Largest total probability reached (infinite on divergence).
    pub max_total: T,
    /// Stable cells stayed below the bound; unstable cells exceeded it.
    pub consistent: bool,
}

/// Normalized superposition with unequal weights and phases, so no Floquet
/// mode is missed by symmetry.
fn probe_state<T: Real>() -> StateVector<T> {
    let amps = [(0.6, 0.0), (0.3, 0.45), (-0.2, 0.35), (0.1, -0.4)]
        .map(|(re, im)| Complex::new(T::lit(re), T::lit(im)));
    let norm = amps
        .iter()
        .fold(T::zero(), |acc, a| acc + a.norm_sqr())
        .sqrt();
    StateVector::new(amps.map(|a| a / norm), T::zero())
}

/// Integrates `k` randomly chosen cells from a generic superposition for
/// `periods` driving periods and compares the peak total probability with
/// `bound`.
pub fn verify_cells_dynamics<T: Real>(
    grid: &ScanGrid<T>,
    k: usize,
    seed: u64,
    periods: usize,
    bound: T,
) -> Result<Vec<CellDynamics<T>>> {
    let total = grid.verdicts.len();
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let picks = sample(&mut rng, total, k.min(total)).into_vec();
    picks
        .into_par_iter()
        .map(|cell| {
            let (i, j) = (cell / grid.axis2.count, cell % grid.axis2.count);
            let p = grid.params_at(i, j);
            let cfg = IntegrationConfig::periods(&p, periods).with_stride(8);
            let max_total = match propagate(&p, &probe_state(), &cfg) {
                Ok(traj) => traj.total_probability().fold(T::zero(), T::max),
                Err(Error::Divergence { .. }) => T::infinity(),
                Err(e) => return Err(e),
            };
            let case = grid.verdicts[cell];
            let consistent = case.is_stable() == (max_total <= bound);
            Ok(CellDynamics {
                i,
                j,
                case,
                max_im: grid.max_im[cell],
                max_total,
                consistent,
            })
        })
        .collect()
}

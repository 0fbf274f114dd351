//! The circle-town example: students and schools on a discretized circle,
//! cost `1 - cos(theta - phi)`, opposed peaked densities.
//!
//! The pipeline builds the cost and densities, checks the discrete
//! subtwist condition, solves, certifies extremality, and tests whether the
//! optimal support is the union of a graph and an antigraph.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::extremality::{is_acyclic, support_graph, SupportGraph};
use crate::limb::{decompose, two_limb_check, LimbKind, NumberedLimbSystem, TwoLimbMaps};
use crate::lp::{SolveReport, TransportSolver};
use crate::measure::{CostMatrix, DiscreteMarginal, ToleranceConfig};
use crate::registry::Registry;
use crate::scalar::{Rational, Scalar};

/// `n` equally spaced angles `2 pi i / n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircleGrid {
    n: usize,
}

impl CircleGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput(format!("circle grid needs at least 3 points, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn angle(&self, i: usize) -> f64 {
        TAU * i as f64 / self.n as f64
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.angle(i)).collect()
    }
}

/// A translation-invariant cost `h(theta - phi)` on the circle.
pub trait CostFamily: Send + Sync {
    fn name(&self) -> &'static str;
    fn eval(&self, delta: f64) -> f64;
}

/// `1 - cos(delta)`: a twisted cost on the circle.
pub struct OneMinusCos;

impl CostFamily for OneMinusCos {
    fn name(&self) -> &'static str {
        "one-minus-cos"
    }

    fn eval(&self, delta: f64) -> f64 {
        1.0 - delta.cos()
    }
}

/// `1 - cos(2 delta)`: two minima per period, so not subtwisted.
pub struct DoubleFrequency;

impl CostFamily for DoubleFrequency {
    fn name(&self) -> &'static str {
        "double-frequency"
    }

    fn eval(&self, delta: f64) -> f64 {
        1.0 - (2.0 * delta).cos()
    }
}

pub fn cost_families() -> Registry<dyn CostFamily> {
    let mut reg: Registry<dyn CostFamily> = Registry::new("cost family");
    reg.register("one-minus-cos", Box::new(OneMinusCos));
    reg.register("double-frequency", Box::new(DoubleFrequency));
    reg
}

/// `c[i][j] = h(theta_i - theta_j)`, evaluated through the grid offset
/// `(i - j) mod n` so that translation invariance holds bit for bit.
pub fn build_cost_with(grid: &CircleGrid, family: &dyn CostFamily) -> CostMatrix<f64> {
    let n = grid.len();
    let profile: Vec<f64> = (0..n).map(|k| family.eval(grid.angle(k))).collect();
    CostMatrix::from_fn(n, n, |i, j| profile[(i + n - j) % n].max(0.0)).expect("n >= 3")
}

/// The `1 - cos(theta_i - theta_j)` cost.
pub fn build_circle_cost(grid: &CircleGrid) -> CostMatrix<f64> {
    let n = grid.len();
    // cos is even, but the float angles 2 pi k / n and 2 pi (n - k) / n
    // are not exact negatives; symmetrize the profile explicitly
    let mut profile: Vec<f64> = (0..n).map(|k| 1.0 - grid.angle(k.min(n - k)).cos()).collect();
    profile[0] = 0.0;
    if n.is_multiple_of(2) {
        profile[n / 2] = 2.0;
    }
    CostMatrix::from_fn(n, n, |i, j| profile[(i + n - j) % n]).expect("n >= 3")
}

/// Von Mises shape: weights proportional to `exp(kappa cos(theta - center))`,
/// normalized to total one. `kappa = 0` gives the uniform density.
pub fn build_peaked_density(grid: &CircleGrid, center: f64, kappa: f64) -> Result<DiscreteMarginal<f64>> {
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(Error::InvalidInput(format!("concentration must be finite and nonnegative, got {kappa}")));
    }
    if !center.is_finite() {
        return Err(Error::InvalidInput(format!("peak center must be finite, got {center}")));
    }
    // subtract the peak value before exponentiating so large kappa cannot overflow
    let raw: Vec<f64> = grid.angles().iter().map(|t| (kappa * ((t - center).cos() - 1.0)).exp()).collect();
    let total: f64 = raw.iter().sum();
    DiscreteMarginal::new(raw.into_iter().map(|w| w / total).collect())
}

/// Rounds a probability vector to multiples of `1 / denominator` that sum
/// to exactly one, keeping every weight positive.
pub fn snap_to_rational(weights: &[f64], denominator: u64) -> Result<DiscreteMarginal<Rational>> {
    let len = weights.len() as u64;
    if denominator < len {
        return Err(Error::InvalidInput(format!(
            "denominator {denominator} too small for {len} positive weights"
        )));
    }
    let mut counts: Vec<i64> = weights
        .iter()
        .map(|w| ((w * denominator as f64).round() as i64).max(1))
        .collect();
    let excess: i64 = counts.iter().sum::<i64>() - denominator as i64;
    // settle the rounding error on the heaviest point
    let heaviest = (0..counts.len()).max_by_key(|&i| counts[i]).expect("weights are non-empty");
    counts[heaviest] -= excess;
    if counts[heaviest] < 1 {
        return Err(Error::InvalidInput("rational snapping failed to keep weights positive".into()));
    }
    DiscreteMarginal::new(
        counts
            .into_iter()
            .map(|k| Rational::from_ratio(k, denominator as i64))
            .collect(),
    )
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SubtwistReport {
    /// Column pairs `(j1, j2)`, `j1 < j2`, whose difference profile has the
    /// wrong number of turning points.
    pub violations: Vec<(usize, usize)>,
    /// Pairs whose difference `c[., j1] - c[., j2]` is constant.
    pub degenerate: Vec<(usize, usize)>,
}

impl SubtwistReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Differences below this are treated as plateaus.
const FLAT: f64 = 1e-12;

/// Discrete subtwist condition: for every column pair, the row profile
/// `d_i = c[i][j1] - c[i][j2]` may have only one maximum and one minimum.
///
/// Turning points are counted as sign changes of the nonzero first
/// differences `d_{i+1} - d_i`, read cyclically when `periodic`. A periodic
/// profile passes with exactly two changes; an open one with at most two.
/// Constant profiles are listed as degenerate; they become violations only
/// when some other pair already fails.
pub fn subtwist_check(c: &CostMatrix<f64>, periodic: bool) -> SubtwistReport {
    let (m, n) = c.shape();
    let mut report = SubtwistReport::default();
    for j1 in 0..n {
        for j2 in j1 + 1..n {
            let d: Vec<f64> = (0..m).map(|i| c.get(i, j1) - c.get(i, j2)).collect();
            let steps = if periodic { m } else { m - 1 };
            let scale = d.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
            let signs: Vec<bool> = (0..steps)
                .map(|i| d[(i + 1) % m] - d[i])
                .filter(|delta| delta.abs() > FLAT * scale)
                .map(|delta| delta > 0.0)
                .collect();
            if signs.is_empty() {
                report.degenerate.push((j1, j2));
                continue;
            }
            let mut changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
            if periodic && signs.first() != signs.last() {
                changes += 1;
            }
            let pass = if periodic { changes == 2 } else { changes <= 2 };
            if !pass {
                report.violations.push((j1, j2));
            }
        }
    }
    if !report.violations.is_empty() {
        report.violations.extend(report.degenerate.iter().copied());
        report.violations.sort_unstable();
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoConfig {
    pub n: usize,
    pub mu_center: f64,
    pub mu_kappa: f64,
    pub nu_center: f64,
    pub nu_kappa: f64,
    /// Common denominator of the snapped densities in exact mode.
    pub denominator: u64,
    pub tol: ToleranceConfig,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            n: 64,
            mu_center: std::f64::consts::FRAC_PI_2,
            mu_kappa: 4.0,
            nu_center: 3.0 * std::f64::consts::FRAC_PI_2,
            nu_kappa: 4.0,
            denominator: 1 << 20,
            tol: ToleranceConfig::default(),
        }
    }
}

impl DemoConfig {
    pub fn validate(&self) -> Result<()> {
        CircleGrid::new(self.n)?;
        for (name, center) in [("mu", self.mu_center), ("nu", self.nu_center)] {
            if !(0.0..TAU).contains(&center) {
                return Err(Error::InvalidInput(format!("{name} center {center} outside [0, 2 pi)")));
            }
        }
        for (name, kappa) in [("mu", self.mu_kappa), ("nu", self.nu_kappa)] {
            if !(kappa.is_finite() && kappa >= 0.0) {
                return Err(Error::InvalidInput(format!("{name} concentration {kappa} must be nonnegative")));
            }
        }
        Ok(())
    }
}

/// The discretized instance in backend `T`. Exact backends receive the
/// dyadic values of the float costs and densities snapped to
/// `cfg.denominator`.
#[derive(Debug, Clone)]
pub struct CircleInstance<T> {
    pub grid: CircleGrid,
    pub mu: DiscreteMarginal<T>,
    pub nu: DiscreteMarginal<T>,
    pub cost: CostMatrix<T>,
    pub cost_f64: CostMatrix<f64>,
}

pub fn demo_instance<T: Scalar>(cfg: &DemoConfig) -> Result<CircleInstance<T>> {
    cfg.validate()?;
    let grid = CircleGrid::new(cfg.n)?;
    let cost_f64 = build_circle_cost(&grid);
    let mu = build_peaked_density(&grid, cfg.mu_center, cfg.mu_kappa)?;
    let nu = build_peaked_density(&grid, cfg.nu_center, cfg.nu_kappa)?;
    let (mu, nu) = if T::EXACT {
        let convert = |m: &DiscreteMarginal<f64>| -> Result<DiscreteMarginal<T>> {
            let snapped = snap_to_rational(m.weights(), cfg.denominator)?;
            DiscreteMarginal::new(snapped.weights().iter().map(rational_into).collect())
        };
        (convert(&mu)?, convert(&nu)?)
    } else {
        (
            DiscreteMarginal::new(mu.weights().iter().map(|&w| T::from_f64(w)).collect())?,
            DiscreteMarginal::new(nu.weights().iter().map(|&w| T::from_f64(w)).collect())?,
        )
    };
    let cost = CostMatrix::from_fn(cfg.n, cfg.n, |i, j| T::from_f64(*cost_f64.get(i, j)))?;
    Ok(CircleInstance {
        grid,
        mu,
        nu,
        cost,
        cost_f64,
    })
}

/// Moves an exact rational into an exact backend.
fn rational_into<T: Scalar>(x: &Rational) -> T {
    let num = i64::try_from(x.numer()).expect("snapped numerators fit in i64");
    let den = i64::try_from(x.denom()).expect("snapped denominators fit in i64");
    T::from_ratio(num, den)
}

#[derive(Debug, Clone)]
pub struct DemoReport<T> {
    pub config: DemoConfig,
    pub subtwist: SubtwistReport,
    pub solve: SolveReport<T>,
    pub extremal: bool,
    /// `f1` rows to columns and `f2` columns to rows, when the support splits that way.
    pub two_limb: Option<TwoLimbMaps>,
    /// Mass on `Antigraph(f2)`; `None` when the two-limb split fails.
    pub cross_mass: Option<T>,
    /// Limb count of the breadth-first decomposition of the support.
    pub limb_count: usize,
    pub support: SupportGraph,
    system: NumberedLimbSystem,
}

/// One plot row: `(theta, phi, mass, limb kind)` per support cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPoint {
    pub theta: f64,
    pub phi: f64,
    pub mass: f64,
    pub limb_kind: LimbKind,
}

impl<T: Scalar> DemoReport<T> {
    /// Support cells labelled by the two-limb split when it exists, by the
    /// breadth-first decomposition otherwise.
    pub fn support_points(&self) -> Vec<SupportPoint> {
        let grid = CircleGrid::new(self.config.n).expect("validated");
        self.solve
            .coupling
            .entries()
            .iter()
            .map(|(i, j, mass)| {
                let limb_kind = match &self.two_limb {
                    Some(maps) if maps.f1.get(*i) == Some(*j) => LimbKind::Graph,
                    Some(_) => LimbKind::Antigraph,
                    None => self.system.limb_at(*i, *j).map_or(LimbKind::Graph, |l| l.kind),
                };
                SupportPoint {
                    theta: grid.angle(*i),
                    phi: grid.angle(*j),
                    mass: mass.to_f64(),
                    limb_kind,
                }
            })
            .collect()
    }
}

/// Runs the circle pipeline with `solver` in backend `T`.
pub fn run_demo<T: Scalar>(cfg: &DemoConfig, solver: &dyn TransportSolver<T>) -> Result<DemoReport<T>> {
    let inst = demo_instance::<T>(cfg)?;
    let subtwist = subtwist_check(&inst.cost_f64, true);
    if !subtwist.ok() {
        return Err(Error::InvalidInput(format!(
            "cost fails the subtwist check on {} column pairs",
            subtwist.violations.len()
        )));
    }
    let solve = solver.solve(&inst.mu, &inst.nu, &inst.cost, &cfg.tol)?;
    let support = support_graph(&solve.coupling, &cfg.tol);
    let (extremal, _) = is_acyclic(&support);
    let system = decompose(&support)?;
    let two_limb = two_limb_check(&support);
    let cross_mass = two_limb
        .as_ref()
        .map(|maps| maps.f2.pairs().map(|(y, x)| solve.coupling.mass(x, y)).sum());
    Ok(DemoReport {
        config: cfg.clone(),
        subtwist,
        limb_count: crate::limb::limb_count(&system),
        solve,
        extremal,
        two_limb,
        cross_mass,
        support,
        system,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::NetworkSimplex;

    #[test]
    fn cost_examples() {
        let c = build_circle_cost(&CircleGrid::new(4).unwrap());
        assert_eq!(*c.get(2, 2), 0.0);
        assert_eq!(*c.get(0, 2), 2.0);
        assert!((c.get(0, 1) - 1.0).abs() < 1e-15);
        let c = build_circle_cost(&CircleGrid::new(7).unwrap());
        for i in 0..7 {
            for j in 0..7 {
                assert_eq!(c.get(i, j), c.get(j, i));
                assert_eq!(c.get(i, j), c.get((i + 3) % 7, (j + 3) % 7));
                assert!((0.0..=2.0).contains(c.get(i, j)));
            }
        }
    }

    #[test]
    fn grid_needs_three_points() {
        assert!(CircleGrid::new(2).is_err());
        let g = CircleGrid::new(3).unwrap();
        assert_eq!(g.angles().len(), 3);
        assert!(g.angles().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn density_examples() {
        let g = CircleGrid::new(4).unwrap();
        let w = build_peaked_density(&g, 0.0, 1.0).unwrap();
        let e = std::f64::consts::E;
        let z = e + 2.0 + 1.0 / e;
        let expected = [e / z, 1.0 / z, 1.0 / (e * z), 1.0 / z];
        for (a, b) in w.weights().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let flat = build_peaked_density(&g, 1.0, 0.0).unwrap();
        assert!(flat.weights().iter().all(|&x| x == 0.25));
        let g = CircleGrid::new(16).unwrap();
        let w = build_peaked_density(&g, 1.2, 3.0).unwrap();
        let argmax = (0..16).max_by(|&a, &b| w.weight(a).total_cmp(w.weight(b))).unwrap();
        assert_eq!(argmax, 3); // 1.2 / (2 pi / 16) = 3.06
        assert!(build_peaked_density(&g, 0.0, -1.0).is_err());
    }

    #[test]
    fn snapping_is_exact_and_positive() {
        let g = CircleGrid::new(9).unwrap();
        let w = build_peaked_density(&g, 0.3, 12.0).unwrap();
        let s = snap_to_rational(w.weights(), 1000).unwrap();
        assert_eq!(s.total(), Rational::from_ratio(1, 1));
        assert!(s.weights().iter().all(|x| *x > Rational::from_ratio(0, 1)));
        assert!(snap_to_rational(w.weights(), 5).is_err());
    }

    #[test]
    fn subtwist_examples() {
        for n in [3, 5, 8, 13] {
            let g = CircleGrid::new(n).unwrap();
            assert!(subtwist_check(&build_circle_cost(&g), true).ok(), "n = {n}");
            let bad = subtwist_check(&build_cost_with(&g, &DoubleFrequency), true);
            if n >= 5 {
                assert!(!bad.ok(), "n = {n}");
            }
        }
    }

    #[test]
    fn constant_differences_are_degenerate() {
        // columns 0 and 1 differ by a constant; column 2 oscillates
        let c = CostMatrix::from_fn(6, 3, |i, j| match j {
            0 => 0.0,
            1 => 1.0,
            _ => (i % 2) as f64,
        })
        .unwrap();
        let report = subtwist_check(&c, true);
        assert_eq!(report.degenerate, [(0, 1)]);
        assert!(report.violations.contains(&(0, 1)));

        let c = CostMatrix::from_fn(4, 2, |i, j| (i + j) as f64).unwrap();
        let report = subtwist_check(&c, false);
        assert!(report.ok());
        assert_eq!(report.degenerate, [(0, 1)]);
    }

    #[test]
    fn identical_marginals_stay_home() {
        let cfg = DemoConfig {
            n: 12,
            nu_center: std::f64::consts::FRAC_PI_2,
            ..DemoConfig::default()
        };
        let rep = run_demo::<f64>(&cfg, &NetworkSimplex::default()).unwrap();
        assert!(rep.extremal);
        assert_eq!(rep.limb_count, 1);
        assert_eq!(rep.cross_mass, Some(0.0));
        assert!(rep.solve.coupling.entries().iter().all(|(i, j, _)| i == j));
    }

    #[test]
    fn uniform_demo_has_zero_value() {
        let cfg = DemoConfig {
            n: 10,
            mu_kappa: 0.0,
            nu_kappa: 0.0,
            ..DemoConfig::default()
        };
        let rep = run_demo::<Rational>(&cfg, &NetworkSimplex::default()).unwrap();
        assert_eq!(rep.solve.primal_value, Rational::from_ratio(0, 1));
        assert!(rep.two_limb.is_some());
    }
}

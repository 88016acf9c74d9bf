//! Method-of-steps integration of `u'(t) = -∫ u(t - s) dP(s)`.
//!
//! The solution is advanced on a uniform grid with classical RK4. The delay
//! integral is replaced by a fixed list of `(delay, weight)` pairs: the atoms
//! themselves for atomic measures, composite Gauss–Legendre nodes aligned
//! with the time grid for continuous ones (truncated at the `eps_tail` upper
//! quantile). Delayed values come from
//!
//! - the initial history for `t - s <= 0`,
//! - cubic Lagrange interpolation of accepted grid values inside `[0, t_n]`,
//! - a cubic through the last accepted values and the current stage value
//!   inside the step being taken (so a zero delay reduces to plain RK4).

mod analysis;

pub use analysis::{
    check_lemma1_envelope, classify, detect_sign_changes, estimate_decay_rate, verify,
    EnvelopeBound, EnvelopeReport, EnvelopeViolation, Regime, VerifyCheck, VerifyConfig,
    VerifyReport, CLASSIFY_MIN_HORIZON, ENVELOPE_SLACK,
};

use alloc::vec::Vec;

use crate::distributions::DelayDistribution;
use crate::error::Error;
use crate::math::floor;
use crate::quadrature::{composite_nodes, gauss_legendre};

/// `|u|` above this ends the integration with the blow-up flag set.
pub const BLOW_UP: f64 = 1e150;

/// Continuous kernels with more nodes than this switch to the precomputed
/// convolution once the whole kernel sees accepted history.
const CONVOLUTION_MIN_NODES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    pub t_end: f64,
    /// Step size; the horizon is snapped to `round(t_end / h)` steps.
    pub h: f64,
    /// Tail mass dropped when truncating an unbounded delay support.
    pub eps_tail: f64,
    /// Gauss–Legendre nodes per history step for continuous delays.
    pub quad_points_per_step: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { t_end: 60.0, h: 1e-3, eps_tail: 1e-10, quad_points_per_step: 4 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::Domain { what: "t_end", value: self.t_end });
        }
        if !(self.h > 0.0) || self.h > self.t_end / 10.0 {
            return Err(Error::Domain { what: "h (must satisfy 0 < h <= t_end/10)", value: self.h });
        }
        if !(self.eps_tail > 0.0 && self.eps_tail <= 1e-6) {
            return Err(Error::Domain { what: "eps_tail (must be in (0, 1e-6])", value: self.eps_tail });
        }
        if self.quad_points_per_step == 0 {
            return Err(Error::Domain { what: "quad_points_per_step", value: 0.0 });
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        crate::math::floor(self.t_end / self.h + 0.5) as usize
    }
}

/// Values of `u` on `(-∞, 0]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum InitialHistory {
    Constant(f64),
    /// `(s, u(s))` samples with `s <= 0`, ascending in `s`; linear in between,
    /// held constant before the first sample.
    Table(Vec<(f64, f64)>),
}

impl Default for InitialHistory {
    fn default() -> Self {
        InitialHistory::Constant(1.0)
    }
}

impl InitialHistory {
    pub fn validate(&self) -> Result<(), Error> {
        match self {
            InitialHistory::Constant(c) if c.is_finite() => Ok(()),
            InitialHistory::Constant(c) => Err(Error::Domain { what: "history value", value: *c }),
            InitialHistory::Table(rows) => {
                if rows.is_empty() {
                    return Err(Error::Precondition("history table is empty"));
                }
                let mut prev = f64::NEG_INFINITY;
                for &(s, u) in rows {
                    if !s.is_finite() || s > 0.0 {
                        return Err(Error::Domain { what: "history time (must be <= 0)", value: s });
                    }
                    if !u.is_finite() {
                        return Err(Error::Domain { what: "history value", value: u });
                    }
                    if s <= prev {
                        return Err(Error::Precondition("history times must be strictly increasing"));
                    }
                    prev = s;
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        match self {
            InitialHistory::Constant(c) => *c,
            InitialHistory::Table(rows) => {
                let i = rows.partition_point(|r| r.0 <= s);
                if i == 0 {
                    rows[0].1
                } else if i == rows.len() {
                    rows[i - 1].1
                } else {
                    let (s0, u0) = rows[i - 1];
                    let (s1, u1) = rows[i];
                    u0 + (u1 - u0) * (s - s0) / (s1 - s0)
                }
            }
        }
    }
}

/// Discretized solution on the grid `t_i = i h`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trajectory {
    pub h: f64,
    pub values: Vec<f64>,
    pub dist: DelayDistribution,
    pub config: SimConfig,
    pub history: InitialHistory,
    /// Integration stopped early because `|u|` exceeded [`BLOW_UP`].
    pub blow_up: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|i| self.time(i))
    }

    /// Last grid time reached.
    pub fn t_last(&self) -> f64 {
        self.time(self.values.len().saturating_sub(1))
    }

    /// `u(t)`: history for `t <= 0`, cubic interpolation on the grid after.
    /// `None` beyond the last grid time.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        if t <= 0.0 {
            return Some(self.history.value(t));
        }
        let x = t / self.h;
        let n = self.values.len() - 1;
        if x > n as f64 * (1.0 + 1e-14) {
            return None;
        }
        Some(interp_grid(&self.values, x.min(n as f64)))
    }
}

/// Cubic Lagrange interpolation of `values` (grid units) at `x ∈ [0, len-1]`,
/// with the 4-point stencil kept inside the array.
pub(crate) fn interp_grid(values: &[f64], x: f64) -> f64 {
    let n = values.len() - 1;
    if n == 0 {
        return values[0];
    }
    let i = (floor(x) as usize).min(n - 1);
    let start = i.saturating_sub(1).min(n.saturating_sub(3));
    let end = (start + 3).min(n);
    lagrange_on_grid(&values[start..=end], start as f64, x)
}

/// Evaluate the interpolant through `(base + k, ys[k])` at `x`.
fn lagrange_on_grid(ys: &[f64], base: f64, x: f64) -> f64 {
    let mut acc = 0.0;
    for (k, &yk) in ys.iter().enumerate() {
        let xk = base + k as f64;
        let mut w = 1.0;
        for j in 0..ys.len() {
            if j != k {
                let xj = base + j as f64;
                w *= (x - xj) / (xk - xj);
            }
        }
        acc += w * yk;
    }
    acc
}

/// Delay kernel in grid units: `(s / h, weight)` sorted by delay.
#[derive(Debug, Clone)]
pub(crate) struct Kernel {
    nodes: Vec<(f64, f64)>,
    /// Quadrature cells of a continuous kernel, empty for atoms.
    cells: Vec<Cell>,
    /// Reciprocal of the total retained mass.
    norm: f64,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    lo: f64,
    hi: f64,
    start: usize,
    end: usize,
}

/// `points` Gauss–Legendre nodes on `[lo, hi]` weighted by the density and
/// rescaled to the exact mass of the interval.
fn cell_rule(
    dist: &DelayDistribution,
    rule: &(Vec<f64>, Vec<f64>),
    lo: f64,
    hi: f64,
    out: &mut Vec<(f64, f64)>,
) {
    let mass = dist.survival(lo) - dist.survival(hi);
    if !(mass > 0.0) {
        return;
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let first = out.len();
    let mut raw_sum = 0.0;
    for (x, w) in rule.0.iter().zip(&rule.1) {
        let s = mid + half * x;
        let r = w * dist.density(s).unwrap_or(0.0);
        raw_sum += r;
        out.push((s, r));
    }
    let q = (out.len() - first) as f64;
    for p in &mut out[first..] {
        p.1 = if raw_sum > 0.0 && raw_sum.is_finite() { p.1 * mass / raw_sum } else { mass / q };
    }
    let mut i = first;
    while i < out.len() {
        if out[i].1 > 0.0 {
            i += 1;
        } else {
            out.remove(i);
        }
    }
}

impl Kernel {
    pub(crate) fn build(dist: &DelayDistribution, config: &SimConfig) -> Result<Self, Error> {
        let h = config.h;
        if let Some(atoms) = dist.atom_list() {
            let nodes = atoms.into_iter().map(|(s, w)| (s / h, w)).collect();
            return Ok(Kernel { nodes, cells: Vec::new(), norm: 1.0 });
        }
        let rule = gauss_legendre(config.quad_points_per_step);
        let lo = dist.support_inf();
        let hi = dist.tail_cutoff(config.eps_tail)?;
        let mut nodes = Vec::new();
        let mut cells = Vec::new();
        let mut buf = Vec::new();
        for piece in composite_nodes(lo, hi, h, 1) {
            buf.clear();
            cell_rule(dist, &rule, piece.lo, piece.hi, &mut buf);
            if buf.is_empty() {
                continue;
            }
            let start = nodes.len();
            nodes.extend(buf.iter().map(|&(s, w)| (s / h, w)));
            cells.push(Cell { lo: piece.lo / h, hi: piece.hi / h, start, end: nodes.len() });
        }
        let total: f64 = nodes.iter().map(|n| n.1).sum();
        for n in &mut nodes {
            n.1 /= total;
        }
        Ok(Kernel { nodes, cells, norm: 1.0 / total })
    }

    pub(crate) fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    /// Index of the first node with delay `>= c` (grid units).
    fn split(&self, c: f64) -> usize {
        self.nodes.partition_point(|n| n.0 < c)
    }

    /// The cell with `x` strictly inside it.
    fn cell_containing(&self, x: f64) -> Option<Cell> {
        let i = self.cells.partition_point(|c| c.hi <= x);
        self.cells.get(i).copied().filter(|c| c.lo < x)
    }
}

/// Precomputed weights on `u_{n-m}` for the settled part of the delay sum at
/// stage offset `c`, valid once every stencil lies inside `[0, n]`.
#[derive(Debug, Clone)]
struct Convolution {
    weights: Vec<f64>,
    min_step: usize,
}

impl Convolution {
    fn build(nodes: &[(f64, f64)], c: f64) -> Self {
        let mut weights: Vec<f64> = Vec::new();
        let mut min_step = 3usize;
        for &(d, w) in nodes {
            let r = c - d;
            let fl = floor(r) as i64;
            // Same stencil choice as `interp_grid` far from the lower end.
            let base = (fl - 1).min(-3);
            min_step = min_step.max((-base) as usize);
            for k in 0..4i64 {
                let mut lk = 1.0;
                for j in 0..4i64 {
                    if j != k {
                        lk *= (r - (base + j) as f64) / (k - j) as f64;
                    }
                }
                let m = (-(base + k)) as usize;
                if weights.len() <= m {
                    weights.resize(m + 1, 0.0);
                }
                weights[m] += w * lk;
            }
        }
        Convolution { weights, min_step }
    }

    fn apply(&self, values: &[f64]) -> f64 {
        let n = values.len() - 1;
        self.weights.iter().enumerate().map(|(m, w)| w * values[n - m]).sum()
    }
}

/// Cubic (lower degree in the first steps) through the last accepted values
/// and the stage value at `t_n + c h`, in grid units relative to `t_n`.
struct StepPoly {
    xs: [f64; 4],
    ys: [f64; 4],
    len: usize,
}

impl StepPoly {
    fn new(values: &[f64], c: f64, stage: f64) -> Self {
        let n = values.len() - 1;
        let mut p = StepPoly { xs: [0.0; 4], ys: [0.0; 4], len: 0 };
        for i in (n - n.min(2))..=n {
            p.xs[p.len] = i as f64 - n as f64;
            p.ys[p.len] = values[i];
            p.len += 1;
        }
        p.xs[p.len] = c;
        p.ys[p.len] = stage;
        p.len += 1;
        p
    }

    fn eval(&self, x: f64) -> f64 {
        lagrange(&self.xs[..self.len], &self.ys[..self.len], x)
    }
}

struct Engine<'a> {
    kernel: &'a Kernel,
    dist: &'a DelayDistribution,
    history: &'a InitialHistory,
    rule: (Vec<f64>, Vec<f64>),
    h: f64,
    split_half: usize,
    split_one: usize,
    conv: Option<([Convolution; 3], usize)>,
}

impl<'a> Engine<'a> {
    fn new(
        kernel: &'a Kernel,
        dist: &'a DelayDistribution,
        history: &'a InitialHistory,
        config: &SimConfig,
        use_convolution: bool,
    ) -> Self {
        let split_half = kernel.split(0.5);
        let split_one = kernel.split(1.0);
        let conv = (use_convolution && kernel.nodes.len() > CONVOLUTION_MIN_NODES).then(|| {
            let c = [
                Convolution::build(kernel.nodes(), 0.0),
                Convolution::build(&kernel.nodes()[split_half..], 0.5),
                Convolution::build(&kernel.nodes()[split_one..], 1.0),
            ];
            let from = c.iter().map(|c| c.min_step).max().unwrap_or(0);
            (c, from)
        });
        let rule = gauss_legendre(config.quad_points_per_step);
        Engine { kernel, dist, history, rule, h: config.h, split_half, split_one, conv }
    }

    /// `u` at grid-unit time `x` during the stage at `t_n + c h`.
    fn u_at(&self, values: &[f64], x: f64, poly: &StepPoly) -> f64 {
        let n = (values.len() - 1) as f64;
        if x <= 0.0 {
            self.history.value(x * self.h)
        } else if x <= n {
            interp_grid(values, x)
        } else {
            poly.eval(x - n)
        }
    }

    /// Delay sum node by node. The cell holding `s = t` (where `u` has its
    /// kink at time 0) is re-integrated on either side of the kink.
    fn direct_sum(&self, values: &[f64], c: f64, stage: f64) -> f64 {
        let poly = StepPoly::new(values, c, stage);
        let x = (values.len() - 1) as f64 + c;
        let straddle = self.kernel.cell_containing(x);
        let (skip_lo, skip_hi) = straddle.map_or((0, 0), |cell| (cell.start, cell.end));
        let mut acc = 0.0;
        for (j, &(d, w)) in self.kernel.nodes.iter().enumerate() {
            if j < skip_lo || j >= skip_hi {
                acc += w * self.u_at(values, x - d, &poly);
            }
        }
        if let Some(cell) = straddle {
            let mut pts = Vec::with_capacity(2 * self.rule.0.len());
            cell_rule(self.dist, &self.rule, cell.lo * self.h, x * self.h, &mut pts);
            cell_rule(self.dist, &self.rule, x * self.h, cell.hi * self.h, &mut pts);
            for (s, w) in pts {
                acc += w * self.kernel.norm * self.u_at(values, x - s / self.h, &poly);
            }
        }
        acc
    }

    /// Delay sum from the precomputed convolution plus the nodes that land
    /// inside the current step.
    fn fast_sum(&self, conv: &Convolution, values: &[f64], c: f64, stage: f64, count: usize) -> f64 {
        let mut acc = conv.apply(values);
        if count > 0 {
            let poly = StepPoly::new(values, c, stage);
            acc += self.kernel.nodes[..count].iter().map(|&(d, w)| w * poly.eval(c - d)).sum::<f64>();
        }
        acc
    }

    fn step(&self, values: &[f64]) -> f64 {
        let h = self.h;
        let un = values[values.len() - 1];
        let n = values.len() - 1;
        match &self.conv {
            Some((conv, from)) if n >= *from => {
                let k1 = -self.fast_sum(&conv[0], values, 0.0, un, 0);
                let y2 = un + 0.5 * h * k1;
                let k2 = -self.fast_sum(&conv[1], values, 0.5, y2, self.split_half);
                let y3 = un + 0.5 * h * k2;
                let k3 = -self.fast_sum(&conv[1], values, 0.5, y3, self.split_half);
                let y4 = un + h * k3;
                let k4 = -self.fast_sum(&conv[2], values, 1.0, y4, self.split_one);
                un + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            }
            _ => {
                let k1 = -self.direct_sum(values, 0.0, un);
                let y2 = un + 0.5 * h * k1;
                let k2 = -self.direct_sum(values, 0.5, y2);
                let y3 = un + 0.5 * h * k2;
                let k3 = -self.direct_sum(values, 0.5, y3);
                let y4 = un + h * k3;
                let k4 = -self.direct_sum(values, 1.0, y4);
                un + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            }
        }
    }
}

fn lagrange(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..xs.len() {
        let mut w = 1.0;
        for j in 0..xs.len() {
            if j != k {
                w *= (x - xs[j]) / (xs[k] - xs[j]);
            }
        }
        acc += w * ys[k];
    }
    acc
}

/// Integrate with the constant unit initial datum.
pub fn simulate(dist: &DelayDistribution, config: &SimConfig) -> Result<Trajectory, Error> {
    simulate_with_history(dist, config, InitialHistory::default())
}

pub fn simulate_with_history(
    dist: &DelayDistribution,
    config: &SimConfig,
    history: InitialHistory,
) -> Result<Trajectory, Error> {
    run(dist, config, history, true)
}

pub(crate) fn run(
    dist: &DelayDistribution,
    config: &SimConfig,
    history: InitialHistory,
    use_convolution: bool,
) -> Result<Trajectory, Error> {
    config.validate()?;
    history.validate()?;
    let kernel = Kernel::build(dist, config)?;
    let steps = config.steps();
    let engine = Engine::new(&kernel, dist, &history, config, use_convolution);

    let mut values = Vec::with_capacity(steps + 1);
    values.push(history.value(0.0));
    let mut blow_up = false;

    for _ in 0..steps {
        let next = engine.step(&values);
        if !next.is_finite() || next.abs() > BLOW_UP {
            blow_up = true;
            break;
        }
        values.push(next);
    }

    Ok(Trajectory { h: config.h, values, dist: dist.clone(), config: *config, history, blow_up })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cfg(t_end: f64, h: f64) -> SimConfig {
        SimConfig { t_end, h, ..Default::default() }
    }

    #[test]
    fn no_delay_is_the_exponential() {
        let d = DelayDistribution::dirac(0.0).unwrap();
        let tr = simulate(&d, &cfg(5.0, 1e-3)).unwrap();
        assert_eq!(tr.values[0], 1.0);
        assert_eq!(tr.len(), 5001);
        let err = tr.times().zip(&tr.values).map(|(t, u)| (u - (-t).exp()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "sup error {err}");
    }

    #[test]
    fn first_interval_is_linear_for_constant_delay() {
        // u(t) = 1 - t on [0, τ] exactly
        let d = DelayDistribution::dirac(0.5).unwrap();
        let tr = simulate(&d, &cfg(5.0, 0.01)).unwrap();
        for i in 0..=50 {
            assert!((tr.values[i] - (1.0 - tr.time(i))).abs() < 1e-13);
        }
        // and u(t) = 1 - t + (t - τ)²/2 on [τ, 2τ]
        for i in 50..=100 {
            let t = tr.time(i);
            let expect = 1.0 - t + (t - 0.5) * (t - 0.5) / 2.0;
            assert!((tr.values[i] - expect).abs() < 1e-7, "t = {t}");
        }
    }

    #[test]
    fn interpolation_reproduces_cubics() {
        let f = |x: f64| 0.5 - x + 0.25 * x * x - 0.01 * x * x * x;
        let v: Vec<f64> = (0..10).map(|i| f(i as f64)).collect();
        for &x in &[0.0, 0.3, 1.7, 8.2, 9.0] {
            assert!((interp_grid(&v, x) - f(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_weights_sum_to_one() {
        let c = SimConfig::default();
        for d in [
            DelayDistribution::gamma(1.0, 6.0).unwrap(),
            DelayDistribution::gamma(0.5, 3.0).unwrap(),
            DelayDistribution::uniform(0.0123, 0.3).unwrap(),
            DelayDistribution::truncated_normal(0.1, 0.05).unwrap(),
        ] {
            let k = Kernel::build(&d, &c).unwrap();
            let total: f64 = k.nodes().iter().map(|n| n.1).sum();
            assert!((total - 1.0).abs() < 1e-14);
            assert!(k.nodes().windows(2).all(|p| p[0].0 <= p[1].0));
        }
        let u = Kernel::build(&DelayDistribution::uniform(0.0123, 0.3).unwrap(), &c).unwrap();
        assert!((u.nodes()[0].0 * c.h) > 0.0123);
    }

    #[test]
    fn convolution_fast_path_matches_direct_sum() {
        let d = DelayDistribution::gamma(2.0, 8.0).unwrap();
        let c = cfg(4.0, 0.01);
        let fast = run(&d, &c, InitialHistory::default(), true).unwrap();
        let slow = run(&d, &c, InitialHistory::default(), false).unwrap();
        let diff = fast.values.iter().zip(&slow.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn tabulated_history_is_used() {
        let d = DelayDistribution::dirac(1.0).unwrap();
        // u(s) = 1 + s on [-1, 0]; then u' = -(t) on [0, 1], so u = 1 - t²/2
        let hist = InitialHistory::Table(vec![(-1.0, 0.0), (0.0, 1.0)]);
        let tr = simulate_with_history(&d, &cfg(2.0, 0.01), hist).unwrap();
        for i in 0..=100 {
            let t = tr.time(i);
            assert!((tr.values[i] - (1.0 - t * t / 2.0)).abs() < 1e-12);
        }
        assert_eq!(tr.value_at(-0.5), Some(0.5));
        assert!(InitialHistory::Table(vec![(0.5, 1.0)]).validate().is_err());
    }

    #[test]
    fn blow_up_truncates() {
        let d = DelayDistribution::dirac(3.0).unwrap();
        let tr = simulate(&d, &SimConfig { t_end: 4000.0, h: 0.05, ..Default::default() }).unwrap();
        assert!(tr.blow_up);
        assert!(tr.len() < 80_001);
        assert!(tr.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn config_validation() {
        let d = DelayDistribution::dirac(0.0).unwrap();
        assert!(simulate(&d, &cfg(1.0, 0.2)).is_err());
        assert!(simulate(&d, &SimConfig { eps_tail: 1e-3, ..cfg(1.0, 0.01) }).is_err());
        assert!(simulate(&d, &SimConfig { quad_points_per_step: 0, ..cfg(1.0, 0.01) }).is_err());
    }
}

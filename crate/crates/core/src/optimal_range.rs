//! The optimal range space `F` of the Calderón operator over a domain `E`:
//! `‖x‖_F = inf{‖y‖_E : μ(x) ≤ Sμ(y)}`.
//!
//! The infimum is not computed exactly. What is computed: exact feasibility
//! verdicts for a candidate `y`, LP upper bounds for `E = L_1`, the explicit
//! dyadic majorant for `x ∈ (L_{1,∞})⁰`, and the closed-form membership
//! tests for `E = L_1`, `ℓ_1` and `ℓ_{1,∞}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::calderon;
use crate::rearrangement::{dilate, mu_seq, mu_step, DecreasingStep, Seq, StepFunction};
use crate::simplex::{LinearProgram, Relation, MAX_VARIABLES};
use crate::spaces::{Normed, SpaceKind, SpaceSpec};

/// Default number of dyadic levels below 1.
pub const DEFAULT_DYADIC_DEPTH: u32 = 20;

/// Absolute floor for `t·μ(t)` at the finest dyadic level.
const DECAY_FLOOR: f64 = 1e-8;
/// Below this ratio between the finest and the coarsest dyadic level,
/// `t·μ(t)` is considered to decay at `0⁺`.
const DECAY_RATIO: f64 = 0.5;

/// Witness that `μ(x) ≤ Sμ(y)` holds (or fails) everywhere.
#[derive(Debug, Clone, Serialize)]
pub struct MajorizationCertificate {
    pub x: DecreasingStep,
    pub y: StepFunction,
    /// Right endpoints of the pieces of `μ(x)`.
    pub probes: Vec<f64>,
    /// `min_probes Sμ(y)(t) − μ(x)(t)`; `None` when `x = 0`.
    pub slack: Option<f64>,
    pub feasible: bool,
}

/// Exact verdict on `μ(x) ≤ Sμ(y)`.
///
/// `Sμ(y)` is continuous and nonincreasing and `μ(x)` is constant on each of
/// its pieces, so the slack on a piece is smallest at its right endpoint.
pub fn feasible(x: &StepFunction, y: &StepFunction) -> MajorizationCertificate {
    let mx = mu_step(x);
    let s = calderon(mu_step(y).as_step());
    let probes: Vec<f64> = mx.breakpoints().to_vec();
    let slack = mx
        .pieces()
        .map(|(_, r, v)| s.eval(r) - v)
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.min(d))));
    let scale = mx.values().first().copied().unwrap_or(0.0).max(1.0);
    let feasible = slack.map_or(true, |d| d >= -1e-12 * scale);
    MajorizationCertificate {
        x: mx,
        y: y.clone(),
        probes,
        slack,
        feasible,
    }
}

/// `(S χ_(0,g])(t)`.
fn calderon_of_indicator(g: f64, t: f64) -> f64 {
    if t <= g {
        1.0 + (g / t).ln()
    } else {
        g / t
    }
}

/// Refinement grid for the LP at `depth`: the breakpoints of `μ(x)`, each
/// piece split into `2^min(depth, 3)` equal parts, plus `depth` dyadic
/// points below the first breakpoint and above the last. Grids are nested
/// in `depth`.
pub fn refinement_grid(mu: &DecreasingStep, depth: u32) -> Vec<f64> {
    let mut grid = Vec::new();
    if mu.is_empty() {
        return grid;
    }
    let parts = 1usize << depth.min(3);
    for (l, r, _) in mu.pieces() {
        for k in 1..=parts {
            grid.push(l + (r - l) * k as f64 / parts as f64);
        }
    }
    let (first, last) = (mu.breakpoints()[0], mu.support_end());
    for k in 1..=depth as i32 {
        grid.push(first * 2f64.powi(-k));
        grid.push(last * 2f64.powi(k));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// The LP behind [`fnorm_upper`]: a decreasing `y = Σ_k z_k χ_(0, g_k]`,
/// `z ≥ 0`, with `Sy(g_j) ≥ μ(x)(g_j)` at every grid point carrying mass.
#[derive(Debug, Clone)]
pub struct FnormProgram {
    grid: Vec<f64>,
    lp: LinearProgram,
}

impl FnormProgram {
    pub fn build(x: &StepFunction, grid: Vec<f64>) -> Result<Self> {
        if grid.len() > MAX_VARIABLES {
            return Err(Error::InvalidInput(format!(
                "grid of {} points exceeds {MAX_VARIABLES} LP variables; lower the depth",
                grid.len()
            )));
        }
        let mu = mu_step(x);
        if let Some(b) = mu.breakpoints().iter().find(|b| !grid.contains(b)) {
            return Err(Error::InvalidInput(format!("grid misses breakpoint {b} of μ(x)")));
        }
        let mut lp = LinearProgram::minimize(grid.clone())?;
        for &t in &grid {
            let target = mu.eval(t);
            if target > 0.0 {
                let row = grid.iter().map(|&g| calderon_of_indicator(g, t)).collect();
                lp.add(row, Relation::Ge, target)?;
            }
        }
        Ok(Self { grid, lp })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn program(&self) -> &LinearProgram {
        &self.lp
    }

    /// Solves and returns `(‖y‖_1, y)`.
    pub fn solve(&self) -> Result<(f64, StepFunction)> {
        if self.lp.constraints().is_empty() {
            return Ok((0.0, StepFunction::zero()));
        }
        let sol = self.lp.solve()?;
        // y = Σ z_k χ_(0, g_k]: value on (g_{k-1}, g_k] is Σ_{i ≥ k} z_i
        let mut vals = vec![0.0; self.grid.len()];
        let mut acc = 0.0;
        for k in (0..self.grid.len()).rev() {
            acc += sol.x[k];
            vals[k] = acc;
        }
        let y = StepFunction::new(self.grid.clone(), vals)?;
        Ok((sol.objective, y))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FnormBound {
    /// Certified upper bound for `‖x‖_F`.
    pub value: f64,
    pub witness: StepFunction,
    pub certificate: MajorizationCertificate,
    pub grid_points: usize,
}

/// Upper bound for `‖x‖_F` with `E = L_1`, by linear programming on the
/// refinement grid of the given depth. Nonincreasing in `depth`.
pub fn fnorm_upper(x: &StepFunction, space: &SpaceSpec, depth: u32) -> Result<FnormBound> {
    match space.kind {
        SpaceKind::Lp(p) if p == 1.0 && !space.discrete => {}
        _ => {
            return Err(Error::Unsupported(format!(
                "optimal-range LP is implemented for E = L1 only, got {space}"
            )))
        }
    }
    let grid = refinement_grid(&mu_step(x), depth);
    let program = FnormProgram::build(x, grid)?;
    let (_, witness) = program.solve()?;
    // pivoting roundoff can leave constraints violated by ~1e−10; dilating
    // the values by the worst ratio restores feasibility exactly
    let s = calderon(mu_step(&witness).as_step());
    let lift = mu_step(x)
        .pieces()
        .map(|(_, r, v)| v / s.eval(r))
        .fold(1.0, f64::max);
    let witness = witness.scale(lift);
    let certificate = feasible(x, &witness);
    if !certificate.feasible {
        return Err(Error::Numeric(format!(
            "LP witness fails the feasibility check (slack {:?})",
            certificate.slack
        )));
    }
    let value = witness.integral();
    Ok(FnormBound {
        value,
        witness,
        certificate,
        grid_points: program.grid.len(),
    })
}

/// `f(t) = sup_{0<s<t} s·μ(s)` for a decreasing step `μ`.
fn running_weak_sup(mu: &DecreasingStep, t: f64) -> f64 {
    let mut best: f64 = 0.0;
    for (l, r, v) in mu.pieces() {
        if l >= t {
            break;
        }
        best = best.max(r.min(t) * v);
    }
    best
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub member: bool,
    /// `sup_t t·μ(t)`.
    pub weak_norm: f64,
    /// Support dilation applied before testing (1 if already in `(0, 1]`).
    pub dilation: f64,
    /// `sup_{s < 2^{-1}} s·μ(s)` after normalization.
    pub coarse: f64,
    /// `sup_{s < 2^{-depth}} s·μ(s)` after normalization.
    pub finest: f64,
    pub depth: u32,
}

fn normalized(x: &StepFunction) -> (DecreasingStep, f64, f64) {
    let mu = mu_step(x);
    let end = mu.support_end();
    let dilation = if end > 1.0 { end } else { 1.0 };
    let mu = mu.dilate(1.0 / dilation).expect("positive");
    let weak = mu.norm(&SpaceSpec::function(SpaceKind::WeakL1)).expect("function norm");
    let scale = if weak > 0.0 { 1.0 / weak } else { 1.0 };
    (mu.scale(scale), dilation, weak)
}

/// Tests `t·μ(t) → 0` as `t → 0⁺` on the dyadic grid `2^{-1}, …, 2^{-depth}`
/// after moving the support into `(0, 1]` and normalizing `‖x‖_{L_{1,∞}} = 1`.
///
/// The profile decays when its finest-level supremum is below `1e−8` or at
/// most half of its coarsest-level supremum.
pub fn weak_l1_zero_membership(x: &StepFunction, depth: u32) -> DecayReport {
    let (mu, dilation, weak) = normalized(x);
    let coarse = running_weak_sup(&mu, 0.5);
    let finest = running_weak_sup(&mu, 2f64.powi(-(depth as i32)));
    let member = weak == 0.0 || finest <= DECAY_FLOOR || finest <= DECAY_RATIO * coarse;
    DecayReport {
        member,
        weak_norm: weak * dilation,
        dilation,
        coarse,
        finest,
        depth,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KolmogorovCertificate {
    /// Full-line check of `μ(x) ≤ Sμ(y)` for the original input.
    pub full: MajorizationCertificate,
    /// `min_{t ≤ 1} Sμ(y′)(t) − μ(t, x′)` for the normalized input.
    pub inner_slack: f64,
    /// `min_{t ≥ 1} Sμ(y′)(t)/h(1) − μ(t, x′)` on dyadic probes `1, 2, …, 2^depth`.
    pub outer_slack: f64,
    pub h_at_one: f64,
    pub dilation: f64,
    pub value_scale: f64,
    pub depth: u32,
}

impl KolmogorovCertificate {
    pub fn both_branches_hold(&self) -> bool {
        self.full.feasible && self.inner_slack >= -1e-12 && self.outer_slack >= -1e-12
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KolmogorovConstruction {
    pub y: StepFunction,
    pub l1_norm: f64,
    pub certificate: KolmogorovCertificate,
}

/// Builds `y ∈ L_1` with `μ(x) ≤ Sμ(y)` for `x ∈ (L_{1,∞})⁰`.
///
/// With `f(t) = sup_{s<t} s·μ(s)` and `h` the piecewise-linear interpolant
/// taking `f(2^{n+1})` at `2^n`, `y = h′` on `(0, 1)` and 0 afterwards, so
/// `μ(t,x) ≤ h(t)/t = (1/t)∫_0^t y ≤ Sμ(y)(t)`. Below the finest dyadic
/// level `h` is continued linearly to 0. The depth is raised if needed so
/// that the finest level lies below half the first breakpoint of `μ(x)`.
pub fn kolmogorov_construct(x: &StepFunction, depth: u32) -> Result<KolmogorovConstruction> {
    let report = weak_l1_zero_membership(x, depth);
    if !report.member {
        return Err(Error::Domain(format!(
            "t·μ(t) does not decay at 0+ (finest {:.3e} vs coarse {:.3e}); x is not in (L_1,∞)^0",
            report.finest, report.coarse
        )));
    }
    let (mu, dilation, weak) = normalized(x);
    if weak == 0.0 {
        let y = StepFunction::zero();
        let full = feasible(x, &y);
        return Ok(KolmogorovConstruction {
            y,
            l1_norm: 0.0,
            certificate: KolmogorovCertificate {
                full,
                inner_slack: 0.0,
                outer_slack: 0.0,
                h_at_one: 0.0,
                dilation,
                value_scale: 1.0,
                depth,
            },
        });
    }
    let t1 = mu.breakpoints()[0];
    let needed = (1.0 / t1).log2().ceil() as i64 + 1;
    let depth = depth.max(needed.max(1) as u32);
    // nodes τ_k = 2^{-k}, h(τ_k) = f(2τ_k)
    let tau = |k: u32| 2f64.powi(-(k as i32));
    let h = |k: u32| running_weak_sup(&mu, 2.0 * tau(k));
    let mut bps = Vec::with_capacity(depth as usize + 1);
    let mut vals = Vec::with_capacity(depth as usize + 1);
    bps.push(tau(depth));
    vals.push(h(depth) / tau(depth));
    for k in (0..depth).rev() {
        bps.push(tau(k));
        vals.push((h(k) - h(k + 1)) / (tau(k) - tau(k + 1)));
    }
    let y_norm = StepFunction::new(bps, vals)?;
    let h1 = h(0);

    let s = calderon(mu_step(&y_norm).as_step());
    let inner_slack = mu
        .pieces()
        .filter(|&(_, r, _)| r <= 1.0)
        .map(|(_, r, v)| s.eval(r) - v)
        .fold(f64::INFINITY, f64::min);
    let outer_slack = (0..=depth)
        .map(|k| {
            let t = 2f64.powi(k as i32);
            s.eval(t) / h1 - mu.eval_right(t)
        })
        .fold(f64::INFINITY, f64::min);

    let value_scale = 1.0 / weak;
    // undo normalization: y = (1/c) σ_d y′
    let y = dilate(&y_norm, dilation)?.scale(1.0 / value_scale);
    let full = feasible(x, &y);
    Ok(KolmogorovConstruction {
        l1_norm: y.norm(&SpaceSpec::function(SpaceKind::Lp(1.0)))?,
        y,
        certificate: KolmogorovCertificate {
            full,
            inner_slack,
            outer_slack,
            h_at_one: h1,
            dilation,
            value_scale,
            depth,
        },
    })
}

/// Which closed-form optimal range to test against.
#[derive(Debug, Clone)]
pub enum RangeCase {
    /// `E = L_1(0,∞)`: range `(L_{1,∞})⁰`.
    L1(StepFunction),
    /// `E = ℓ_1`: range `ℓ_{1,∞}`.
    Ell1(Seq),
    /// `E = ℓ_{1,∞}`: `μ(n) ≤ c·log(n+2)/(n+1)`.
    Ell1Inf(Seq),
}

#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub member: bool,
    /// Scale of the majorant witness (`‖x‖_{L_{1,∞}}`, `sup (n+1)μ(n)`, or the minimal `c`).
    pub witness_scale: f64,
    pub detail: String,
}

/// Ratio above which `(n+1)μ(n)` is judged to keep growing over the
/// second half of the window.
const SEQ_GROWTH_RATIO: f64 = 1.5;

pub fn optimal_range_membership(case: &RangeCase) -> MembershipReport {
    match case {
        RangeCase::L1(x) => {
            let r = weak_l1_zero_membership(x, DEFAULT_DYADIC_DEPTH);
            MembershipReport {
                member: r.member,
                witness_scale: r.weak_norm,
                detail: format!(
                    "t·μ(t): coarse {:.6e}, finest {:.6e} at depth {}",
                    r.coarse, r.finest, r.depth
                ),
            }
        }
        RangeCase::Ell1(a) => {
            let mu = mu_seq(a);
            let weights: Vec<f64> = mu
                .entries()
                .iter()
                .enumerate()
                .map(|(n, v)| (n + 1) as f64 * v)
                .collect();
            let all = weights.iter().copied().fold(0.0, f64::max);
            let half = weights[..weights.len().div_ceil(2)].iter().copied().fold(0.0, f64::max);
            let growth = if half > 0.0 { all / half } else { 1.0 };
            MembershipReport {
                member: growth <= SEQ_GROWTH_RATIO,
                witness_scale: all,
                detail: format!("sup (n+1)μ(n) = {all:.6e}; second-half growth {growth:.4}"),
            }
        }
        RangeCase::Ell1Inf(a) => {
            let c = mu_seq(a)
                .entries()
                .iter()
                .enumerate()
                .map(|(n, v)| v * (n + 1) as f64 / (n as f64 + 2.0).ln())
                .fold(0.0, f64::max);
            MembershipReport {
                member: true,
                witness_scale: c,
                detail: format!("μ(n) ≤ {c:.6e}·log(n+2)/(n+1)"),
            }
        }
    }
}

/// Dyadic step approximation of `t^{-α}` on `(0, 1]`: value `2^{kα}` on
/// `(2^{-k}, 2^{-k+1}]` for `k = 1..pieces-1`, and `2^{pieces·α}` on the
/// innermost piece.
pub fn dyadic_power(alpha: f64, pieces: u32) -> StepFunction {
    let mut bps = Vec::with_capacity(pieces as usize);
    let mut vals = Vec::with_capacity(pieces as usize);
    for k in (1..=pieces as i32).rev() {
        bps.push(2f64.powi(-k + 1));
        vals.push(2f64.powf(k as f64 * alpha));
    }
    StepFunction::new(bps, vals).expect("valid dyadic grid")
}

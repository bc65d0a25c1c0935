//! Exact (quasi-)norms of the concrete symmetric spaces on step functions
//! and finite sequences.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rearrangement::{mu_seq, mu_step, Seq, StepFunction};

/// Concave (or, for `PsiZygmund`, piecewise-concave) increasing function
/// generating a Lorentz space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PhiSpec {
    /// `log(1 + t)`.
    Log1p,
    /// `t log(e/t)` on `(0, 1]`, constant 1 afterwards.
    TLogE,
    /// `t log(e²/t)` on `(0, 1]`, `2 log(e t)` on `[1, ∞)`.
    PsiZygmund,
    /// `φ(0) = 0`, slope `slopes[i]` up to `breakpoints[i]`, and the last
    /// slope beyond the final breakpoint.
    PiecewiseLinearConcave { breakpoints: Vec<f64>, slopes: Vec<f64> },
}

impl PhiSpec {
    pub fn piecewise_linear(breakpoints: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if slopes.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidInput(
                "piecewise-linear φ needs one more slope than breakpoints".into(),
            ));
        }
        let mut prev = 0.0;
        for &b in &breakpoints {
            if !(b > prev) || !b.is_finite() {
                return Err(Error::InvalidInput("φ breakpoints must increase from 0".into()));
            }
            prev = b;
        }
        if slopes.iter().any(|s| !(*s >= 0.0) || !s.is_finite())
            || slopes.windows(2).any(|w| w[1] > w[0])
        {
            return Err(Error::InvalidInput(
                "φ slopes must be nonnegative and nonincreasing".into(),
            ));
        }
        Ok(Self::PiecewiseLinearConcave { breakpoints, slopes })
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            PhiSpec::Log1p => t.ln_1p(),
            PhiSpec::TLogE => {
                if t >= 1.0 {
                    1.0
                } else {
                    t * (1.0 - t.ln())
                }
            }
            PhiSpec::PsiZygmund => {
                if t <= 1.0 {
                    t * (2.0 - t.ln())
                } else {
                    2.0 * (1.0 + t.ln())
                }
            }
            PhiSpec::PiecewiseLinearConcave { breakpoints, slopes } => {
                let mut acc = 0.0;
                let mut left = 0.0;
                for (&b, &s) in breakpoints.iter().zip(slopes) {
                    if t <= b {
                        return acc + s * (t - left);
                    }
                    acc += s * (b - left);
                    left = b;
                }
                acc + slopes[slopes.len() - 1] * (t - left)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpaceKind {
    Lp(f64),
    WeakL1,
    M1Inf,
    Lorentz(PhiSpec),
    L1CapLInf,
    L1PlusLInf,
}

/// A concrete symmetric (quasi-)norm, in its function (`discrete = false`)
/// or sequence realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub kind: SpaceKind,
    pub discrete: bool,
}

impl SpaceSpec {
    pub fn function(kind: SpaceKind) -> Self {
        Self { kind, discrete: false }
    }

    pub fn sequence(kind: SpaceKind) -> Self {
        Self { kind, discrete: true }
    }

    pub fn lp(p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Self::function(SpaceKind::Lp(p)))
    }

    pub fn as_discrete(&self) -> Self {
        Self { kind: self.kind.clone(), discrete: true }
    }

    pub fn as_function(&self) -> Self {
        Self { kind: self.kind.clone(), discrete: false }
    }

    /// Whether the norm is a genuine (Banach) norm rather than a quasi-norm.
    /// `ψ` has a convex corner at 1, so its Lorentz functional is only
    /// treated as a quasi-norm.
    pub fn is_banach(&self) -> bool {
        !matches!(self.kind, SpaceKind::WeakL1 | SpaceKind::Lorentz(PhiSpec::PsiZygmund))
    }
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(Error::Domain(format!("p must lie in [1, ∞], got {p}")))
    } else {
        Ok(())
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.discrete {
            f.write_str("d:")?;
        }
        match &self.kind {
            SpaceKind::Lp(p) if p.is_infinite() => f.write_str("lp:inf"),
            SpaceKind::Lp(p) => write!(f, "lp:{p}"),
            SpaceKind::WeakL1 => f.write_str("weak-l1"),
            SpaceKind::M1Inf => f.write_str("m1inf"),
            SpaceKind::Lorentz(PhiSpec::Log1p) => f.write_str("lorentz:log1p"),
            SpaceKind::Lorentz(PhiSpec::TLogE) => f.write_str("lorentz:tloge"),
            SpaceKind::Lorentz(PhiSpec::PsiZygmund) => f.write_str("lorentz:psi"),
            SpaceKind::Lorentz(PhiSpec::PiecewiseLinearConcave { breakpoints, slopes }) => {
                let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
                write!(f, "lorentz:pl:{}/{}", join(breakpoints), join(slopes))
            }
            SpaceKind::L1CapLInf => f.write_str("l1^linf"),
            SpaceKind::L1PlusLInf => f.write_str("l1+linf"),
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
        .collect()
}

impl FromStr for SpaceSpec {
    type Err = Error;

    /// Grammar: `[d:]` followed by one of `lp:<p>` (`lp:inf` allowed), `l1`,
    /// `l2`, `linf`, `weak-l1`, `m1inf`, `lorentz:log1p`, `lorentz:tloge`,
    /// `lorentz:psi`, `lorentz:pl:<b1,..>/<s1,..>`, `l1+linf`, `l1^linf`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (discrete, body) = match s.strip_prefix("d:") {
            Some(rest) => (true, rest),
            None => (false, s.as_str()),
        };
        let kind = match body {
            "weak-l1" | "l1inf" | "l1,inf" => SpaceKind::WeakL1,
            "m1inf" => SpaceKind::M1Inf,
            "l1+linf" => SpaceKind::L1PlusLInf,
            "l1^linf" => SpaceKind::L1CapLInf,
            "l1" => SpaceKind::Lp(1.0),
            "l2" => SpaceKind::Lp(2.0),
            "linf" => SpaceKind::Lp(f64::INFINITY),
            "lorentz:log1p" | "lorentz:log" => SpaceKind::Lorentz(PhiSpec::Log1p),
            "lorentz:tloge" => SpaceKind::Lorentz(PhiSpec::TLogE),
            "lorentz:psi" => SpaceKind::Lorentz(PhiSpec::PsiZygmund),
            other => {
                if let Some(p) = other.strip_prefix("lp:") {
                    let p = match p {
                        "inf" => f64::INFINITY,
                        _ => p.parse::<f64>().map_err(|e| Error::Parse(format!("{p:?}: {e}")))?,
                    };
                    check_p(p)?;
                    SpaceKind::Lp(p)
                } else if let Some(pl) = other.strip_prefix("lorentz:pl:") {
                    let (b, sl) = pl
                        .split_once('/')
                        .ok_or_else(|| Error::Parse("expected lorentz:pl:<breakpoints>/<slopes>".into()))?;
                    SpaceKind::Lorentz(PhiSpec::piecewise_linear(parse_list(b)?, parse_list(sl)?)?)
                } else {
                    return Err(Error::Parse(format!("unknown space {other:?}")));
                }
            }
        };
        Ok(Self { kind, discrete })
    }
}

/// Elements whose symmetric norm can be evaluated exactly.
pub trait Normed {
    fn norm(&self, spec: &SpaceSpec) -> Result<f64>;
}

impl Normed for StepFunction {
    fn norm(&self, spec: &SpaceSpec) -> Result<f64> {
        if spec.discrete {
            return Err(Error::Unsupported(format!(
                "step function with sequence space {spec}"
            )));
        }
        step_norm(self, &spec.kind)
    }
}

impl Normed for Seq {
    fn norm(&self, spec: &SpaceSpec) -> Result<f64> {
        if !spec.discrete {
            return Err(Error::Unsupported(format!(
                "sequence with function space {spec}; use the d: prefix"
            )));
        }
        seq_norm(self, &spec.kind)
    }
}

pub fn norm<T: Normed + ?Sized>(x: &T, spec: &SpaceSpec) -> Result<f64> {
    x.norm(spec)
}

fn lp_of(pieces: impl Iterator<Item = (f64, f64)>, p: f64) -> f64 {
    if p.is_infinite() {
        pieces.fold(0.0, |m, (_, v)| m.max(v.abs()))
    } else if p == 1.0 {
        pieces.map(|(w, v)| w * v.abs()).sum()
    } else {
        pieces.map(|(w, v)| w * v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

fn step_norm(x: &StepFunction, kind: &SpaceKind) -> Result<f64> {
    match kind {
        SpaceKind::Lp(p) => {
            check_p(*p)?;
            Ok(lp_of(x.pieces().map(|(l, r, v)| (r - l, v)), *p))
        }
        SpaceKind::WeakL1 => Ok(mu_step(x).pieces().fold(0.0, |m, (_, r, v)| m.max(r * v))),
        SpaceKind::M1Inf => Ok(marcinkiewicz_step(x)),
        SpaceKind::Lorentz(phi) => Ok(mu_step(x)
            .pieces()
            .map(|(l, r, v)| v * (phi.eval(r) - phi.eval(l)))
            .sum()),
        SpaceKind::L1CapLInf => {
            let pieces = || x.pieces().map(|(l, r, v)| (r - l, v));
            Ok(lp_of(pieces(), 1.0).max(lp_of(pieces(), f64::INFINITY)))
        }
        SpaceKind::L1PlusLInf => Ok(mu_step(x).integral_to(1.0)),
    }
}

const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of `g` on `[a, b]`.
fn golden_max(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_GOLDEN * (b - a);
    let mut d = a + INV_GOLDEN * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..200 {
        if b - a <= tol * (1.0 + b.abs()) {
            break;
        }
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_GOLDEN * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_GOLDEN * (b - a);
            gd = g(d);
        }
    }
    gc.max(gd)
}

/// `sup_t (1/log(1+t)) ∫_0^t μ(s) ds`, maximized piece by piece over the
/// endpoints and a golden-section interior candidate.
fn marcinkiewicz_step(x: &StepFunction) -> f64 {
    let mu = mu_step(x);
    let mut best: f64 = mu.values().first().copied().unwrap_or(0.0);
    let mut acc = 0.0;
    for (l, r, v) in mu.pieces() {
        let g = |t: f64| (acc + v * (t - l)) / t.ln_1p();
        let interior = golden_max(&g, l.max(f64::MIN_POSITIVE), r, 1e-10);
        best = best.max(g(r)).max(interior);
        acc += v * (r - l);
    }
    best
}

fn seq_norm(a: &Seq, kind: &SpaceKind) -> Result<f64> {
    let mu = mu_seq(a);
    let m = mu.entries();
    match kind {
        SpaceKind::Lp(p) => {
            check_p(*p)?;
            Ok(lp_of(m.iter().map(|&v| (1.0, v)), *p))
        }
        SpaceKind::WeakL1 => Ok(m
            .iter()
            .enumerate()
            .fold(0.0, |best, (n, &v)| best.max((n + 1) as f64 * v))),
        SpaceKind::M1Inf => {
            let mut acc = 0.0;
            let mut best: f64 = 0.0;
            for (n, &v) in m.iter().enumerate() {
                acc += v;
                best = best.max(acc / (n as f64 + 2.0).ln());
            }
            Ok(best)
        }
        SpaceKind::Lorentz(PhiSpec::Log1p) => {
            Ok(m.iter().enumerate().map(|(n, &v)| v / (n + 1) as f64).sum())
        }
        SpaceKind::Lorentz(phi @ PhiSpec::PiecewiseLinearConcave { .. }) => Ok(m
            .iter()
            .enumerate()
            .map(|(n, &v)| v * (phi.eval(n as f64 + 1.0) - phi.eval(n as f64)))
            .sum()),
        SpaceKind::Lorentz(phi) => Err(Error::Unsupported(format!(
            "{phi:?} is only realized on functions"
        ))),
        SpaceKind::L1CapLInf => Ok(lp_of(m.iter().map(|&v| (1.0, v)), 1.0)),
        SpaceKind::L1PlusLInf => Ok(m[0]),
    }
}

/// `max_{p ∈ grid} (p − 1)‖a‖_{ℓ_p}`, a lower bound for the supremum over `(1, 2]`.
pub fn sup_p_blowup(a: &Seq, p_grid: &[f64]) -> Result<f64> {
    if p_grid.is_empty() {
        return Err(Error::InvalidInput("empty p grid".into()));
    }
    if let Some(p) = p_grid.iter().find(|&&p| !(p > 1.0 && p <= 2.0)) {
        return Err(Error::Domain(format!("p = {p} outside (1, 2]")));
    }
    let mu = mu_seq(a);
    Ok(p_grid
        .iter()
        .map(|&p| (p - 1.0) * lp_of(mu.entries().iter().map(|&v| (1.0, v)), p))
        .fold(0.0, f64::max))
}

/// `∫_0^1 μ(t) log₊ μ(t) dt`.
pub fn llogl_functional(x: &StepFunction) -> f64 {
    mu_step(x)
        .pieces()
        .take_while(|&(l, _, _)| l < 1.0)
        .map(|(l, r, v)| v * v.ln().max(0.0) * (r.min(1.0) - l))
        .sum()
}

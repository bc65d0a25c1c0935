//! Step functions, sequences, decreasing rearrangements and the
//! Hardy–Littlewood–Pólya order.
//!
//! A [`StepFunction`] takes the value `v_i` on `(t_{i-1}, t_i]` (with
//! `t_0 = 0`) and vanishes beyond its last breakpoint. Construction merges
//! adjacent equal pieces and drops trailing zero pieces, so structural
//! equality coincides with equality as functions.

use std::cmp::Ordering;
use std::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leq_rel;

#[derive(Serialize, Deserialize)]
struct RawStep {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStep", into = "RawStep")]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawStep> for StepFunction {
    type Error = Error;

    fn try_from(raw: RawStep) -> Result<Self> {
        StepFunction::new(raw.breakpoints, raw.values)
    }
}

impl From<StepFunction> for RawStep {
    fn from(x: StepFunction) -> Self {
        RawStep {
            breakpoints: x.breakpoints,
            values: x.values,
        }
    }
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        let mut prev = 0.0;
        for &t in &breakpoints {
            if !t.is_finite() || t <= prev {
                return Err(Error::InvalidInput(format!(
                    "breakpoints must be finite, positive and strictly increasing (got {t} after {prev})"
                )));
            }
            prev = t;
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value {v}")));
        }
        Ok(Self::canonical(breakpoints, values))
    }

    /// Builds from already-validated data, merging equal neighbours and
    /// dropping the zero tail.
    fn canonical(breakpoints: Vec<f64>, values: Vec<f64>) -> Self {
        let mut bps: Vec<f64> = Vec::with_capacity(breakpoints.len());
        let mut vals: Vec<f64> = Vec::with_capacity(values.len());
        for (t, v) in breakpoints.into_iter().zip(values) {
            match vals.last() {
                Some(&last) if last == v => *bps.last_mut().unwrap() = t,
                _ => {
                    bps.push(t);
                    vals.push(v);
                }
            }
        }
        while vals.last() == Some(&0.0) {
            vals.pop();
            bps.pop();
        }
        Self {
            breakpoints: bps,
            values: vals,
        }
    }

    pub fn zero() -> Self {
        Self {
            breakpoints: Vec::new(),
            values: Vec::new(),
        }
    }

    /// `value` on `(0, end]`.
    pub fn constant(end: f64, value: f64) -> Result<Self> {
        Self::new(vec![end], vec![value])
    }

    /// Builds from consecutive `(length, value)` pieces starting at 0.
    pub fn from_pieces(pieces: &[(f64, f64)]) -> Result<Self> {
        let mut t = 0.0;
        let mut bps = Vec::with_capacity(pieces.len());
        let mut vals = Vec::with_capacity(pieces.len());
        for &(len, v) in pieces {
            if !(len > 0.0) {
                return Err(Error::InvalidInput(format!("piece length {len} must be positive")));
            }
            t += len;
            bps.push(t);
            vals.push(v);
        }
        Self::new(bps, vals)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Right end of the support, 0 for the zero function.
    pub fn support_end(&self) -> f64 {
        self.breakpoints.last().copied().unwrap_or(0.0)
    }

    /// Iterates `(left, right, value)` over the pieces.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .iter()
            .zip(&self.values)
            .scan(0.0, |left, (&right, &v)| {
                let l = *left;
                *left = right;
                Some((l, right, v))
            })
    }

    /// Value on the piece `(t_{i-1}, t_i]` containing `t`; 0 outside `(0, t_n]`.
    pub fn eval(&self, t: f64) -> f64 {
        if !(t > 0.0) {
            return 0.0;
        }
        let i = self.breakpoints.partition_point(|&b| b < t);
        self.values.get(i).copied().unwrap_or(0.0)
    }

    /// Right-continuous value `lim_{s↓t} x(s)`.
    pub fn eval_right(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let i = self.breakpoints.partition_point(|&b| b <= t);
        self.values.get(i).copied().unwrap_or(0.0)
    }

    /// `∫_0^t x(s) ds`.
    pub fn integral_to(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (l, r, v) in self.pieces() {
            if t <= l {
                break;
            }
            acc += v * (r.min(t) - l);
        }
        acc
    }

    pub fn integral(&self) -> f64 {
        self.pieces().map(|(l, r, v)| v * (r - l)).sum()
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::canonical(
            self.breakpoints.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn abs(&self) -> Self {
        self.map_values(f64::abs)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        self.map_values(|v| alpha * v)
    }

    /// Values on the common refinement of `self` and `other`, combined by `op`.
    pub fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        let bps = union_breakpoints(&[self, other]);
        let vals = bps.iter().map(|&t| op(self.eval(t), other.eval(t))).collect();
        Self::canonical(bps, vals)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    /// Restriction to `(0, end]`.
    pub fn truncate(&self, end: f64) -> Self {
        let mut bps = Vec::new();
        let mut vals = Vec::new();
        for (l, r, v) in self.pieces() {
            if l >= end {
                break;
            }
            bps.push(r.min(end));
            vals.push(v);
        }
        Self::canonical(bps, vals)
    }
}

/// Sorted union of the breakpoints of every function in `fs`.
pub fn union_breakpoints(fs: &[&StepFunction]) -> Vec<f64> {
    let mut all: Vec<f64> = fs.iter().flat_map(|f| f.breakpoints.iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

/// A nonnegative, nonincreasing step function, such as `μ(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DecreasingStep(StepFunction);

impl DecreasingStep {
    pub fn try_new(x: StepFunction) -> Result<Self> {
        let ok = x.values.iter().all(|&v| v >= 0.0) && x.values.windows(2).all(|w| w[0] >= w[1]);
        if ok {
            Ok(Self(x))
        } else {
            Err(Error::InvalidInput(
                "values must be nonnegative and nonincreasing".into(),
            ))
        }
    }

    pub fn zero() -> Self {
        Self(StepFunction::zero())
    }

    pub fn as_step(&self) -> &StepFunction {
        &self.0
    }

    pub fn into_step(self) -> StepFunction {
        self.0
    }

    pub fn scale(&self, alpha: f64) -> Self {
        assert!(alpha >= 0.0, "decreasing steps scale by nonnegative factors");
        Self(self.0.scale(alpha))
    }

    pub fn dilate(&self, s: f64) -> Result<Self> {
        dilate(&self.0, s).map(Self)
    }
}

impl Deref for DecreasingStep {
    type Target = StepFunction;

    fn deref(&self) -> &StepFunction {
        &self.0
    }
}

impl<'de> Deserialize<'de> for DecreasingStep {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let x = StepFunction::deserialize(d)?;
        DecreasingStep::try_new(x).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct RawSeq {
    offset: i64,
    entries: Vec<f64>,
}

/// Finitely supported real sequence on a window `offset .. offset + len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSeq", into = "RawSeq")]
pub struct Seq {
    offset: i64,
    entries: Vec<f64>,
}

impl TryFrom<RawSeq> for Seq {
    type Error = Error;

    fn try_from(raw: RawSeq) -> Result<Self> {
        Seq::new(raw.offset, raw.entries)
    }
}

impl From<Seq> for RawSeq {
    fn from(a: Seq) -> Self {
        RawSeq {
            offset: a.offset,
            entries: a.entries,
        }
    }
}

impl Seq {
    pub fn new(offset: i64, entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("sequence window must be nonempty".into()));
        }
        if let Some(v) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite entry {v}")));
        }
        Ok(Self { offset, entries })
    }

    /// Sequence on `ℤ₊` starting at index 0.
    pub fn from_vec(entries: Vec<f64>) -> Result<Self> {
        Self::new(0, entries)
    }

    /// `δ_0` on a window of length `len`.
    pub fn delta(len: usize) -> Self {
        let mut entries = vec![0.0; len.max(1)];
        entries[0] = 1.0;
        Self { offset: 0, entries }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Last index of the window (inclusive).
    pub fn end(&self) -> i64 {
        self.offset + self.entries.len() as i64 - 1
    }

    /// `a(k)`, zero outside the window.
    pub fn get(&self, k: i64) -> f64 {
        let i = k - self.offset;
        if i < 0 {
            return 0.0;
        }
        self.entries.get(i as usize).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.offset + i as i64, v))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self {
            offset: self.offset,
            entries: self.entries.iter().map(|v| alpha * v).collect(),
        }
    }

    /// The sequence as a step function with `a(n)` on `(n, n+1]`.
    pub fn to_step(&self) -> StepFunction {
        assert!(self.offset >= 0, "only sequences on ℤ₊ embed into (0, ∞)");
        let start = self.offset as f64;
        let mut bps = Vec::with_capacity(self.entries.len() + 1);
        let mut vals = Vec::with_capacity(self.entries.len() + 1);
        if start > 0.0 {
            bps.push(start);
            vals.push(0.0);
        }
        for (i, &v) in self.entries.iter().enumerate() {
            bps.push(start + i as f64 + 1.0);
            vals.push(v);
        }
        StepFunction::canonical(bps, vals)
    }
}

#[derive(Serialize, Deserialize)]
struct RawComplexSeq {
    offset: i64,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// Complex-valued finite sequence; serialized with split real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawComplexSeq", into = "RawComplexSeq")]
pub struct ComplexSeq {
    offset: i64,
    entries: Vec<Complex64>,
}

impl TryFrom<RawComplexSeq> for ComplexSeq {
    type Error = Error;

    fn try_from(raw: RawComplexSeq) -> Result<Self> {
        if raw.re.len() != raw.im.len() {
            return Err(Error::InvalidInput("re and im lengths differ".into()));
        }
        ComplexSeq::new(
            raw.offset,
            raw.re.into_iter().zip(raw.im).map(|(r, i)| Complex64::new(r, i)).collect(),
        )
    }
}

impl From<ComplexSeq> for RawComplexSeq {
    fn from(a: ComplexSeq) -> Self {
        RawComplexSeq {
            offset: a.offset,
            re: a.entries.iter().map(|z| z.re).collect(),
            im: a.entries.iter().map(|z| z.im).collect(),
        }
    }
}

impl ComplexSeq {
    pub fn new(offset: i64, entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("sequence window must be nonempty".into()));
        }
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidInput("non-finite entry".into()));
        }
        Ok(Self { offset, entries })
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, k: i64) -> Complex64 {
        let i = k - self.offset;
        if i < 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.entries.get(i as usize).copied().unwrap_or_default()
    }

    /// Elementwise modulus on the same window.
    pub fn moduli(&self) -> Seq {
        Seq {
            offset: self.offset,
            entries: self.entries.iter().map(|z| z.norm()).collect(),
        }
    }
}

fn desc(a: &f64, b: &f64) -> Ordering {
    b.partial_cmp(a).unwrap_or(Ordering::Equal)
}

/// Decreasing rearrangement of a step function: the pieces of `|x|` sorted
/// by value, largest first, laid end to end from 0. Ties keep their original
/// order, which does not affect the result.
pub fn mu_step(x: &StepFunction) -> DecreasingStep {
    let mut pieces: Vec<(f64, f64)> = x
        .pieces()
        .filter(|&(_, _, v)| v != 0.0)
        .map(|(l, r, v)| (r - l, v.abs()))
        .collect();
    pieces.sort_by(|a, b| desc(&a.1, &b.1));
    let mut t = 0.0;
    let mut bps = Vec::with_capacity(pieces.len());
    let mut vals = Vec::with_capacity(pieces.len());
    for (len, v) in pieces {
        t += len;
        bps.push(t);
        vals.push(v);
    }
    DecreasingStep(StepFunction::canonical(bps, vals))
}

/// `|a|` sorted descending, re-indexed from 0.
pub fn mu_seq(a: &Seq) -> Seq {
    let mut entries: Vec<f64> = a.entries.iter().map(|v| v.abs()).collect();
    entries.sort_by(desc);
    Seq { offset: 0, entries }
}

/// `σ_s x(t) = x(t/s)`.
pub fn dilate(x: &StepFunction, s: f64) -> Result<StepFunction> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("dilation factor must be positive, got {s}")));
    }
    StepFunction::new(
        x.breakpoints.iter().map(|t| t * s).collect(),
        x.values.clone(),
    )
}

/// `true` iff `y ≺≺ x`, i.e. `∫_0^t μ(y) ≤ ∫_0^t μ(x)` for all `t ≥ 0`.
///
/// Both primitives are piecewise linear, so comparing them at the union of
/// breakpoints (the last of which also fixes the `t → ∞` limit) is exact.
pub fn submajorizes(x: &DecreasingStep, y: &DecreasingStep) -> bool {
    union_breakpoints(&[&x.0, &y.0])
        .into_iter()
        .all(|t| leq_rel(y.integral_to(t), x.integral_to(t)))
}

/// Checks `μ(t+s, x+y) ≤ μ(t, x) + μ(s, y)` with right-continuous `μ`.
pub fn triangle_mu(x: &StepFunction, y: &StepFunction, t: f64, s: f64) -> Result<bool> {
    if !(t > 0.0 && s > 0.0) {
        return Err(Error::Domain(format!("t and s must be positive, got {t}, {s}")));
    }
    let lhs = mu_step(&x.add(y)).eval_right(t + s);
    let rhs = mu_step(x).eval_right(t) + mu_step(y).eval_right(s);
    Ok(leq_rel(lhs, rhs))
}

/// Checks `μ(Σ x_n) ≤ Σ_{n≥1} σ_{2^n} μ(x_n)` on every piece of the common refinement.
pub fn dilation_sum_bound(xs: &[StepFunction]) -> bool {
    let sum = xs.iter().fold(StepFunction::zero(), |acc, x| acc.add(x));
    let lhs = mu_step(&sum);
    let rhs = xs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let s = 2f64.powi(i as i32 + 1);
            dilate(&mu_step(x).0, s).expect("positive dilation")
        })
        .fold(StepFunction::zero(), |acc, y| acc.add(&y));
    union_breakpoints(&[&lhs.0, &rhs])
        .into_iter()
        .all(|t| leq_rel(lhs.eval(t), rhs.eval(t)))
}

//! Closed-form Cesàro, dual Cesàro and Calderón operators on step functions,
//! their discrete counterpart, and the continuous and discrete Hilbert
//! transforms.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rearrangement::{mu_seq, ComplexSeq, Seq, StepFunction};

/// Piecewise function `t ↦ a + b/t + c·log t` on `(s_{i-1}, s_i]`, `s_0 = 0`.
/// The last breakpoint is `+∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalderonProfile {
    breaks: Vec<f64>,
    coeffs: Vec<[f64; 3]>,
}

impl CalderonProfile {
    fn zero() -> Self {
        Self {
            breaks: vec![f64::INFINITY],
            coeffs: vec![[0.0; 3]],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn coefficients(&self) -> &[[f64; 3]] {
        &self.coeffs
    }

    /// Value at `t > 0`; at a breakpoint the right-hand piece is used.
    pub fn eval(&self, t: f64) -> f64 {
        debug_assert!(t > 0.0, "profiles live on (0, ∞)");
        let i = self.breaks.partition_point(|&s| s <= t).min(self.coeffs.len() - 1);
        let [a, b, c] = self.coeffs[i];
        let mut v = a;
        if b != 0.0 {
            v += b / t;
        }
        if c != 0.0 {
            v += c * t.ln();
        }
        v
    }

    /// `∫_lo^hi` of the profile, in closed form piece by piece.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        let mut acc = 0.0;
        let mut left: f64 = 0.0;
        for (&right, &[a, b, c]) in self.breaks.iter().zip(&self.coeffs) {
            let l = left.max(lo);
            let r = right.min(hi);
            left = right;
            if r <= l {
                continue;
            }
            acc += a * (r - l);
            if b != 0.0 {
                acc += b * (r / l).ln();
            }
            if c != 0.0 {
                let prim = |t: f64| if t == 0.0 { 0.0 } else { t * t.ln() - t };
                acc += c * (prim(r) - prim(l));
            }
        }
        acc
    }

    /// Whether the values at consecutive finite breakpoints never increase.
    pub fn is_nonincreasing_at_breakpoints(&self) -> bool {
        let pts: Vec<f64> = self.breaks.iter().copied().filter(|s| s.is_finite()).collect();
        pts.windows(2).all(|w| crate::leq_rel(self.eval(w[1]), self.eval(w[0])))
    }
}

fn build_profile(x: &StepFunction, with_mean: bool, with_tail: bool) -> CalderonProfile {
    if x.is_empty() {
        return CalderonProfile::zero();
    }
    let pieces: Vec<(f64, f64, f64)> = x.pieces().collect();
    // tail[i] = Σ_{j>i} v_j log(t_j / t_{j-1})
    let mut tail = vec![0.0; pieces.len()];
    for i in (0..pieces.len().saturating_sub(1)).rev() {
        let (l, r, v) = pieces[i + 1];
        tail[i] = tail[i + 1] + v * (r / l).ln();
    }
    let mut breaks = Vec::with_capacity(pieces.len() + 1);
    let mut coeffs = Vec::with_capacity(pieces.len() + 1);
    let mut cum = 0.0;
    for (i, &(l, r, v)) in pieces.iter().enumerate() {
        let mut c = [0.0; 3];
        if with_mean {
            c[0] += v;
            c[1] += cum - v * l;
        }
        if with_tail {
            c[0] += v * r.ln() + tail[i];
            c[2] -= v;
        }
        breaks.push(r);
        coeffs.push(c);
        cum += v * (r - l);
    }
    breaks.push(f64::INFINITY);
    coeffs.push(if with_mean { [0.0, cum, 0.0] } else { [0.0; 3] });
    CalderonProfile { breaks, coeffs }
}

/// `(Cx)(t) = (1/t) ∫_0^t x(s) ds`.
pub fn cesaro(x: &StepFunction) -> CalderonProfile {
    build_profile(x, true, false)
}

/// `(C′x)(t) = ∫_t^∞ x(s) ds / s`.
pub fn cesaro_dual(x: &StepFunction) -> CalderonProfile {
    build_profile(x, false, true)
}

/// `S = C + C′`.
pub fn calderon(x: &StepFunction) -> CalderonProfile {
    build_profile(x, true, true)
}

/// `(S^d a)(n) = (1/(n+1)) Σ_{k≤n} a(k) + Σ_{k>n} a(k)/k` for `n < len`.
///
/// The tail sums are exact because `a` has finite support.
pub fn calderon_discrete(a: &Seq, len: usize) -> Result<Seq> {
    if a.offset() < 0 {
        return Err(Error::Domain("discrete Calderón operator acts on ℤ₊ sequences".into()));
    }
    let end = a.end().max(len as i64 - 1).max(0) as usize;
    let vals: Vec<f64> = (0..=end).map(|k| a.get(k as i64)).collect();
    let mut suffix = vec![0.0; end + 2];
    for k in (1..=end).rev() {
        suffix[k] = suffix[k + 1] + vals[k] / k as f64;
    }
    let mut prefix = 0.0;
    let out = (0..len.max(1))
        .map(|n| {
            prefix += vals[n];
            prefix / (n + 1) as f64 + suffix[n + 1]
        })
        .collect();
    Seq::from_vec(out)
}

/// Signed finite union of intervals of ℝ: `Σ v_i χ_(l_i, r_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalStep {
    intervals: Vec<(f64, f64, f64)>,
}

impl IntervalStep {
    pub fn new(intervals: Vec<(f64, f64, f64)>) -> Result<Self> {
        for &(l, r, v) in &intervals {
            if !(l.is_finite() && r.is_finite() && v.is_finite() && l < r) {
                return Err(Error::InvalidInput(format!("bad interval ({l}, {r}] with value {v}")));
            }
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[(f64, f64, f64)] {
        &self.intervals
    }
}

impl From<&StepFunction> for IntervalStep {
    fn from(x: &StepFunction) -> Self {
        Self {
            intervals: x.pieces().collect(),
        }
    }
}

/// Principal-value Hilbert transform `(1/π) p.v. ∫ x(s)/(t−s) ds` of a step
/// function, evaluated in closed form. Breakpoints are rejected.
pub fn hilbert_step(x: &IntervalStep, t: f64) -> Result<f64> {
    let mut acc = 0.0;
    for &(l, r, v) in &x.intervals {
        let (dl, dr) = ((t - l).abs(), (t - r).abs());
        if dl <= 1e-15 * l.abs().max(1.0) || dr <= 1e-15 * r.abs().max(1.0) {
            return Err(Error::Singularity(t));
        }
        acc += v * (dl / dr).ln();
    }
    Ok(acc / PI)
}

/// `(2/(πi)) Σ_{k−n odd} a(k) / denom(k, n)` over the window `lo..=hi`.
fn odd_kernel_sum(a: &Seq, lo: i64, hi: i64, denom: impl Fn(i64, i64) -> f64) -> ComplexSeq {
    let factor = Complex64::new(0.0, -2.0 / PI);
    let support: Vec<(i64, f64)> = a.iter().filter(|&(_, v)| v != 0.0).collect();
    let entries = (lo..=hi)
        .map(|n| {
            let s: f64 = support
                .iter()
                .filter(|&&(k, _)| (k - n).rem_euclid(2) == 1)
                .map(|&(k, v)| v / denom(k, n))
                .sum();
            factor * s
        })
        .collect();
    ComplexSeq::new(lo, entries).expect("nonempty window")
}

/// Discrete Hilbert transform `(H_d a)(n) = (2/(πi)) Σ_{k ≡ n+1 (2)} a(k)/(k−n)`
/// on the output window `lo..=hi`.
pub fn hilbert_discrete(a: &Seq, lo: i64, hi: i64) -> Result<ComplexSeq> {
    if hi < lo {
        return Err(Error::InvalidInput(format!("empty output window {lo}..={hi}")));
    }
    Ok(odd_kernel_sum(a, lo, hi, |k, n| (k - n) as f64))
}

/// Fourier coefficients `b(n) = (2/(πi)) Σ_{k ≡ n+1 (2)} a(k)/(n−k)` of
/// `sgn(t)·Σ a(k) e^{ikt}`: the symbol of the truncated convolution operator.
/// Equal to `−H_d a`, so moduli agree with [`hilbert_discrete`].
pub fn fourier_truncation_symbol(a: &Seq, lo: i64, hi: i64) -> Result<ComplexSeq> {
    if hi < lo {
        return Err(Error::InvalidInput(format!("empty output window {lo}..={hi}")));
    }
    Ok(odd_kernel_sum(a, lo, hi, |k, n| (n - k) as f64))
}

/// Places `μ(j, a)` at the odd site `−(2j+1)`, zero elsewhere.
///
/// Every even `n ≥ 0` then sees all of `μ(a)` through the kernel:
/// `|(H_d c)(n)| = (2/π) Σ_j μ(j,a)/(n+2j+1) ≥ (1/2π)(S^d μ(a))(n)`.
pub fn extremal_reflection(a: &Seq) -> Seq {
    let mu = mu_seq(a);
    let len = mu.len();
    let mut entries = vec![0.0; 2 * len - 1];
    // window is −(2len−1) ..= −1; site −(2j+1) has index 2(len−1−j)
    for (j, &v) in mu.entries().iter().enumerate() {
        entries[2 * (len - 1 - j)] = v;
    }
    Seq::new(-(2 * len as i64 - 1), entries).expect("nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rearrangement::mu_step;
    use approx::assert_relative_eq;

    fn step(bps: &[f64], vals: &[f64]) -> StepFunction {
        StepFunction::new(bps.to_vec(), vals.to_vec()).unwrap()
    }

    #[test]
    fn cesaro_of_indicator() {
        let chi = step(&[1.0], &[1.0]);
        let c = cesaro(&chi);
        assert_relative_eq!(c.eval(0.3), 1.0);
        assert_relative_eq!(c.eval(1.0), 1.0);
        assert_relative_eq!(c.eval(2.0), 0.5);
        assert_eq!(cesaro(&StepFunction::zero()).eval(3.0), 0.0);
    }

    #[test]
    fn cesaro_is_order_preserving() {
        let x = step(&[1.0, 2.0, 4.0], &[1.0, -1.0, 0.5]);
        let y = step(&[1.0, 2.0, 5.0], &[1.5, -0.5, 0.5]);
        let (cx, cy) = (cesaro(&x), cesaro(&y));
        for i in 1..200 {
            let t = i as f64 * 0.037;
            assert!(cx.eval(t) <= cy.eval(t) + 1e-15);
        }
    }

    #[test]
    fn cesaro_dual_examples() {
        let chi = step(&[1.0], &[1.0]);
        let d = cesaro_dual(&chi);
        for t in [0.01, 0.25, 0.9] {
            assert_relative_eq!(d.eval(t), (1.0 / t).ln(), max_relative = 1e-14);
        }
        assert_eq!(d.eval(1.5), 0.0);
        let e = std::f64::consts::E;
        let shifted = step(&[1.0, e], &[0.0, 1.0]);
        assert_relative_eq!(cesaro_dual(&shifted).eval(1.0), 1.0, max_relative = 1e-15);
        assert_eq!(cesaro_dual(&StepFunction::zero()).eval(0.5), 0.0);
    }

    #[test]
    fn calderon_of_indicator() {
        let s = calderon(&step(&[1.0], &[1.0]));
        for t in [0.05, 0.5, 0.999] {
            assert_relative_eq!(s.eval(t), 1.0 + (1.0 / t).ln(), max_relative = 1e-14);
        }
        assert_relative_eq!(s.eval(1.0), 1.0);
        assert_relative_eq!(s.eval(4.0), 0.25);
        assert_relative_eq!(s.integral(0.0, 1.0), 2.0, max_relative = 1e-14);
        assert!(s.is_nonincreasing_at_breakpoints());
    }

    #[test]
    fn profile_integral_matches_quadrature() {
        let x = step(&[0.5, 1.5, 3.0], &[2.0, -1.0, 0.7]);
        let s = calderon(&x);
        let (lo, hi) = (0.2, 5.0);
        let n = 200_000;
        let h = (hi - lo) / n as f64;
        let mid: f64 = (0..n).map(|i| s.eval(lo + (i as f64 + 0.5) * h)).sum::<f64>() * h;
        assert_relative_eq!(s.integral(lo, hi), mid, max_relative = 1e-7);
    }

    #[test]
    fn calderon_kernel_bound() {
        let x = step(&[0.5, 1.0, 2.0, 3.5], &[-2.0, 3.0, -0.5, 1.0]);
        let s = calderon(&x);
        let smu = calderon(mu_step(&x).as_step());
        for i in 1..100 {
            let t = 0.05 * i as f64 + 0.0123;
            assert!(s.eval(t).abs() <= smu.eval(t) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn discrete_calderon_examples() {
        let d = calderon_discrete(&Seq::delta(1), 50).unwrap();
        for (n, v) in d.iter() {
            assert_eq!(v, 1.0 / (n + 1) as f64);
        }
        let z = calderon_discrete(&Seq::from_vec(vec![0.0; 3]).unwrap(), 5).unwrap();
        assert!(z.is_zero());
        assert!(calderon_discrete(&Seq::new(-1, vec![1.0]).unwrap(), 3).is_err());
    }

    #[test]
    fn discrete_calderon_direct_sum() {
        let a = Seq::from_vec(vec![3.0, 0.0, 1.5, -2.0, 0.25]).unwrap();
        let got = calderon_discrete(&a, 8).unwrap();
        for n in 0..8usize {
            let mut head = 0.0;
            for k in 0..=n {
                head += a.get(k as i64);
            }
            let mut tail = 0.0;
            for k in n + 1..5 {
                tail += a.get(k as i64) / k as f64;
            }
            assert_relative_eq!(got.get(n as i64), head / (n + 1) as f64 + tail, max_relative = 1e-15);
        }
    }

    #[test]
    fn hilbert_step_examples() {
        let chi = IntervalStep::from(&step(&[1.0], &[1.0]));
        assert_relative_eq!(hilbert_step(&chi, -1.0).unwrap(), -(2f64.ln()) / PI, max_relative = 1e-15);
        let odd = IntervalStep::new(vec![(-2.0, -1.0, 1.0), (1.0, 2.0, -1.0)]).unwrap();
        // an even input has a vanishing transform at its centre
        let sym = IntervalStep::new(vec![(-2.0, -1.0, 1.0), (1.0, 2.0, 1.0)]).unwrap();
        assert!(hilbert_step(&sym, 0.0).unwrap().abs() < 1e-16);
        assert!(hilbert_step(&odd, 0.0).unwrap().abs() > 0.1);
        assert_eq!(hilbert_step(&chi, 1.0), Err(Error::Singularity(1.0)));
        assert_eq!(hilbert_step(&chi, 0.0), Err(Error::Singularity(0.0)));
    }

    #[test]
    fn hilbert_discrete_delta() {
        let h = hilbert_discrete(&Seq::delta(1), -9, 9).unwrap();
        for n in -9..=9i64 {
            let m = h.get(n).norm();
            if n % 2 != 0 {
                assert_relative_eq!(m, 2.0 / (PI * n.abs() as f64), max_relative = 1e-15);
            } else {
                assert_eq!(m, 0.0);
            }
        }
        assert!(hilbert_discrete(&Seq::delta(1), 3, 2).is_err());
        let z = hilbert_discrete(&Seq::from_vec(vec![0.0; 4]).unwrap(), -3, 3).unwrap();
        assert!(z.moduli().is_zero());
    }

    #[test]
    fn symbol_at_one_for_delta() {
        let b = fourier_truncation_symbol(&Seq::delta(1), 1, 1).unwrap();
        let h = hilbert_discrete(&Seq::delta(1), 1, 1).unwrap();
        assert_relative_eq!(b.get(1).norm(), 2.0 / PI);
        assert_relative_eq!(h.get(1).norm(), 2.0 / PI);
        assert_relative_eq!((b.get(1) + h.get(1)).norm(), 0.0);
    }

    #[test]
    fn extremal_reflection_layout() {
        let c = extremal_reflection(&Seq::delta(1));
        assert_eq!((c.offset(), c.entries()), (-1, &[1.0][..]));
        let c = extremal_reflection(&Seq::from_vec(vec![1.0, 3.0]).unwrap());
        assert_eq!(c.get(-1), 3.0);
        assert_eq!(c.get(-3), 1.0);
        assert_eq!(c.get(-2), 0.0);
        assert_eq!(c.get(0), 0.0);
    }

    #[test]
    fn reflection_sum_formula() {
        let a = Seq::from_vec(vec![1.0, 0.5, 0.25, 0.125]).unwrap();
        let c = extremal_reflection(&a);
        let h = hilbert_discrete(&c, 0, 10).unwrap();
        for n in (0..=10i64).step_by(2) {
            let direct: f64 = (0..4).map(|j| a.get(j) / (n + 2 * j + 1) as f64).sum::<f64>() * 2.0 / PI;
            assert_relative_eq!(h.get(n).norm(), direct, max_relative = 1e-14);
        }
    }
}

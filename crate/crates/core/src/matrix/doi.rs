//! Double operator integrals `T_{f^{[1]}}^{A,A}` as Schur multipliers in
//! the eigenbasis of a hermitian matrix.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::{schatten_norm, MatrixOp};
use crate::error::{Error, Result};
use crate::spaces::{SpaceKind, SpaceSpec};

/// Real function with a caller-certified Lipschitz constant.
#[derive(Clone)]
pub struct LipschitzFn {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    lip: f64,
}

impl fmt::Debug for LipschitzFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LipschitzFn")
            .field("name", &self.name)
            .field("lip", &self.lip)
            .finish()
    }
}

impl LipschitzFn {
    pub fn new(name: impl Into<String>, lip: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            lip,
        }
    }

    pub fn identity() -> Self {
        Self::new("identity", 1.0, |x| x)
    }

    pub fn abs() -> Self {
        Self::new("abs", 1.0, f64::abs)
    }

    pub fn sin() -> Self {
        Self::new("sin", 1.0, f64::sin)
    }

    /// `x²` clamped outside `[−r, r]`, so that `Lip = 2r` holds on all of ℝ.
    pub fn square(radius: f64) -> Self {
        Self::new(format!("square:{radius}"), 2.0 * radius, move |x: f64| {
            let y = x.clamp(-radius, radius);
            y * y
        })
    }

    /// Linear interpolation through `(xs[i], ys[i])`, constant beyond the end knots.
    pub fn piecewise_linear(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(Error::InvalidInput("knot lists must be nonempty and of equal length".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("knots must be finite and strictly increasing".into()));
        }
        let lip = xs
            .windows(2)
            .zip(ys.windows(2))
            .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs())
            .fold(0.0, f64::max);
        let name = format!("pwl:{}", xs.len());
        Ok(Self::new(name, lip, move |t| {
            if t <= xs[0] {
                return ys[0];
            }
            let i = xs.partition_point(|&x| x < t);
            if i >= xs.len() {
                return ys[ys.len() - 1];
            }
            let w = (t - xs[i - 1]) / (xs[i] - xs[i - 1]);
            ys[i - 1] + w * (ys[i] - ys[i - 1])
        }))
    }

    /// Parses `identity`, `abs`, `sin`, `square:<r>` or `pwl:<x1,..>/<y1,..>`.
    pub fn parse(s: &str) -> Result<Self> {
        let list = |t: &str| -> Result<Vec<f64>> {
            t.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{v:?}: {e}"))))
                .collect()
        };
        match s.trim() {
            "identity" | "id" => Ok(Self::identity()),
            "abs" => Ok(Self::abs()),
            "sin" => Ok(Self::sin()),
            other => {
                if let Some(r) = other.strip_prefix("square:") {
                    let r: f64 = r.parse().map_err(|e| Error::Parse(format!("{r:?}: {e}")))?;
                    Ok(Self::square(r))
                } else if let Some(rest) = other.strip_prefix("pwl:") {
                    let (x, y) = rest
                        .split_once('/')
                        .ok_or_else(|| Error::Parse("expected pwl:<xs>/<ys>".into()))?;
                    Self::piecewise_linear(list(x)?, list(y)?)
                } else {
                    Err(Error::Parse(format!("unknown function {other:?}")))
                }
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lip(&self) -> f64 {
        self.lip
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

fn coincident(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// `M_ij = (f(λ_i) − f(λ_j))/(λ_i − λ_j)`, and 0 when the eigenvalues coincide.
pub fn divided_difference_matrix(eigs: &[f64], f: &LipschitzFn) -> Vec<Vec<f64>> {
    let fl: Vec<f64> = eigs.iter().map(|&l| f.eval(l)).collect();
    eigs.iter()
        .enumerate()
        .map(|(i, &li)| {
            eigs.iter()
                .enumerate()
                .map(|(j, &lj)| if coincident(li, lj) { 0.0 } else { (fl[i] - fl[j]) / (li - lj) })
                .collect()
        })
        .collect()
}

/// `U (M ∘ (U^* V U)) U^*` where `A = U Λ U^*` and `M` is the divided-difference
/// matrix of `f` on the spectrum of `A`.
pub fn doi_schur(a: &MatrixOp, f: &LipschitzFn, v: &MatrixOp) -> Result<MatrixOp> {
    if a.dim() != v.dim() {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    let (eigs, u) = a.hermitian_eigen()?;
    let m = divided_difference_matrix(&eigs, f);
    let inner = u.adjoint().mul(v).mul(&u);
    let weighted = inner.map(|i, j, z| z * m[i][j]);
    Ok(u.mul(&weighted).mul(&u.adjoint()))
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutatorReport {
    pub n: usize,
    pub function: String,
    pub lip: f64,
    /// `‖[f(A), B]‖_F-space`.
    pub lhs: f64,
    /// `‖[A, B]‖_E-space`.
    pub rhs: f64,
    pub ratio: f64,
    pub spectrum_a: Vec<f64>,
    pub spectrum_b: Vec<f64>,
    /// Frobenius contraction verdict; set only when both spaces are `L_2`.
    pub contraction_holds: Option<bool>,
}

fn is_l2(spec: &SpaceSpec) -> bool {
    matches!(spec.kind, SpaceKind::Lp(p) if p == 2.0)
}

/// `‖[f(A),B]‖_F / (Lip(f)·‖[A,B]‖_E)` for hermitian `A`, `B`.
pub fn lipschitz_commutator_check(
    a: &MatrixOp,
    b: &MatrixOp,
    f: &LipschitzFn,
    spec_e: &SpaceSpec,
    spec_f: &SpaceSpec,
) -> Result<CommutatorReport> {
    if !b.is_hermitian(1e-10) {
        return Err(Error::Domain("B is not hermitian".into()));
    }
    let (eigs_a, u) = a.hermitian_eigen()?;
    let (eigs_b, _) = b.hermitian_eigen()?;
    let fa = {
        let fl: Vec<f64> = eigs_a.iter().map(|&l| f.eval(l)).collect();
        u.mul(&MatrixOp::diag(&fl)).mul(&u.adjoint())
    };
    let ab = a.commutator(b);
    let rhs = schatten_norm(&ab, spec_e)?;
    if rhs <= 1e-14 * a.frobenius() * b.frobenius() {
        return Err(Error::Degenerate("[A, B] vanishes; no ratio".into()));
    }
    let lhs = schatten_norm(&fa.commutator(b), spec_f)?;
    let ratio = lhs / (f.lip() * rhs);
    let contraction_holds = (is_l2(spec_e) && is_l2(spec_f)).then_some(ratio <= 1.0 + 1e-10);
    Ok(CommutatorReport {
        n: a.dim(),
        function: f.name().to_string(),
        lip: f.lip(),
        lhs,
        rhs,
        ratio,
        spectrum_a: eigs_a,
        spectrum_b: eigs_b,
        contraction_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn builtin_lipschitz_bounds_hold_on_samples() {
        let fs = [
            LipschitzFn::abs(),
            LipschitzFn::sin(),
            LipschitzFn::square(3.0),
            LipschitzFn::parse("pwl:-1,0,2/0,2,1").unwrap(),
        ];
        for f in &fs {
            for i in 0..400 {
                let x = -5.0 + 0.025 * i as f64;
                let y = x + 0.37;
                assert!((f.eval(x) - f.eval(y)).abs() <= f.lip() * 0.37 + 1e-12, "{}", f.name());
            }
        }
        assert_eq!(fs[3].lip(), 2.0);
        assert_eq!(fs[3].eval(-0.5), 1.0);
        assert_eq!(fs[3].eval(9.0), 1.0);
        assert!(LipschitzFn::parse("cosh").is_err());
        assert!(LipschitzFn::piecewise_linear(vec![1.0, 0.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn doi_two_by_two() {
        let a = MatrixOp::diag(&[0.0, 1.0]);
        let v = MatrixOp::from_real(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let sq = LipschitzFn::new("x^2", 2.0, |x| x * x);
        let out = doi_schur(&a, &sq, &v).unwrap();
        assert!(out.sub(&v).frobenius() < 1e-14);
    }

    #[test]
    fn doi_identity_removes_eigen_diagonal() {
        let a = MatrixOp::diag(&[-1.0, 0.5, 2.0]);
        let v = MatrixOp::from_real(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]]).unwrap();
        let out = doi_schur(&a, &LipschitzFn::identity(), &v).unwrap();
        let expected = v.map(|i, j, z| if i == j { Complex64::default() } else { z });
        assert!(out.sub(&expected).frobenius() < 1e-13);
    }

    #[test]
    fn doi_commutator_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a = MatrixOp::gue(8, &mut rng);
        let b = MatrixOp::ginibre(8, &mut rng);
        let f = LipschitzFn::sin();
        let lhs = doi_schur(&a, &f, &a.commutator(&b)).unwrap();
        let rhs = a.apply_fn(f64::sin).unwrap().commutator(&b);
        assert!(lhs.sub(&rhs).frobenius() <= 1e-10 * rhs.frobenius().max(1.0));
    }

    #[test]
    fn doi_rejects_non_hermitian() {
        let a = MatrixOp::from_real(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            doi_schur(&a, &LipschitzFn::abs(), &MatrixOp::identity(2)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn commuting_pair_is_degenerate() {
        let a = MatrixOp::diag(&[1.0, 2.0]);
        let b = MatrixOp::diag(&[3.0, -1.0]);
        let l2: SpaceSpec = "l2".parse().unwrap();
        assert!(matches!(
            lipschitz_commutator_check(&a, &b, &LipschitzFn::abs(), &l2, &l2),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn identity_function_ratio_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = MatrixOp::gue(6, &mut rng);
        let b = MatrixOp::gue(6, &mut rng);
        let l2: SpaceSpec = "l2".parse().unwrap();
        let r = lipschitz_commutator_check(&a, &b, &LipschitzFn::identity(), &l2, &l2).unwrap();
        assert_relative_eq!(r.ratio, 1.0, max_relative = 1e-10);
        assert_eq!(r.contraction_holds, Some(true));
    }
}

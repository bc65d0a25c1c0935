//! Dense complex matrices as finite-dimensional trace-ideal elements.

mod doi;
mod jacobi;

use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rearrangement::Seq;
use crate::spaces::{Normed, SpaceSpec};

pub use doi::{
    divided_difference_matrix, doi_schur, lipschitz_commutator_check, CommutatorReport, LipschitzFn,
};

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    n: usize,
    re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<Vec<f64>>>,
}

/// Dense `n × n` complex matrix (row-major) with lazily cached singular values.
#[derive(Debug, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct MatrixOp {
    n: usize,
    data: Vec<Complex64>,
    #[serde(skip)]
    sv: OnceLock<Result<Vec<f64>>>,
}

impl Clone for MatrixOp {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            data: self.data.clone(),
            sv: self.sv.clone(),
        }
    }
}

impl PartialEq for MatrixOp {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.data == other.data
    }
}

impl TryFrom<RawMatrix> for MatrixOp {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        let n = raw.n;
        let im = raw.im.unwrap_or_else(|| vec![vec![0.0; n]; n]);
        if raw.re.len() != n || im.len() != n || raw.re.iter().chain(&im).any(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!("matrix rows must be {n} × {n}")));
        }
        let data = raw
            .re
            .iter()
            .zip(&im)
            .flat_map(|(r, i)| r.iter().zip(i).map(|(&a, &b)| Complex64::new(a, b)))
            .collect();
        MatrixOp::new(n, data)
    }
}

impl From<MatrixOp> for RawMatrix {
    fn from(m: MatrixOp) -> Self {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            m.data.chunks(m.n.max(1)).map(|r| r.iter().map(f).collect()).collect()
        };
        let re = rows(|z| z.re);
        let im = m.data.iter().any(|z| z.im != 0.0).then(|| rows(|z| z.im));
        RawMatrix { n: m.n, re, im }
    }
}

impl MatrixOp {
    pub fn new(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(Self {
            n,
            data,
            sv: OnceLock::new(),
        })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let data = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self::new(n, data).expect("generator produced non-finite entries")
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix must be square".into()));
        }
        Self::new(n, rows.iter().flatten().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_, _| Complex64::default())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
    }

    pub fn diag(d: &[f64]) -> Self {
        Self::from_fn(d.len(), |i, j| Complex64::new(if i == j { d[i] } else { 0.0 }, 0.0))
    }

    /// Matrix whose `j`-th column is `cols[j]`.
    pub fn from_columns(cols: &[Vec<Complex64>]) -> Self {
        let n = cols.len();
        Self::from_fn(n, |i, j| cols[j][i])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    fn columns(&self) -> Vec<Vec<Complex64>> {
        (0..self.n).map(|j| (0..self.n).map(|i| self.get(i, j)).collect()).collect()
    }

    pub fn map(&self, f: impl Fn(usize, usize, Complex64) -> Complex64) -> Self {
        Self::from_fn(self.n, |i, j| f(i, j, self.get(i, j)))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.map(|i, j, z| z + other.get(i, j))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.map(|i, j, z| z - other.get(i, j))
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        self.map(|_, _, z| z * alpha)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = vec![Complex64::default(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::default() {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Self::new(n, out).expect("finite product")
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Re tr(X^* Y)`.
    pub fn frobenius_inner(&self, other: &Self) -> Complex64 {
        self.data.iter().zip(&other.data).map(|(x, y)| x.conj() * y).sum()
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.sub(&self.adjoint()).frobenius() <= rel_tol * self.frobenius()
    }

    /// Descending singular values, computed once by one-sided Jacobi.
    pub fn singular_values(&self) -> Result<Seq> {
        let sv = self
            .sv
            .get_or_init(|| jacobi::svd(self.columns(), false).map(|s| s.sigma))
            .clone()?;
        if sv.is_empty() {
            return Seq::from_vec(vec![0.0]);
        }
        Seq::from_vec(sv)
    }

    /// Full decomposition `A = U Σ V^*`.
    pub fn svd(&self) -> Result<Svd> {
        let s = jacobi::svd(self.columns(), true)?;
        Ok(Svd {
            u: Self::from_columns(&s.u),
            sigma: s.sigma,
            v: Self::from_columns(&s.v),
        })
    }

    /// Eigenvalues (ascending) and unitary eigenvector matrix of a hermitian matrix.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, MatrixOp)> {
        if !self.is_hermitian(1e-10) {
            return Err(Error::Domain("matrix is not hermitian".into()));
        }
        let (vals, cols) = jacobi::hermitian_eigen(self.n, &self.data)?;
        Ok((vals, Self::from_columns(&cols)))
    }

    /// `f(A) = U f(Λ) U^*` for hermitian `A`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Result<MatrixOp> {
        let (vals, u) = self.hermitian_eigen()?;
        let fl: Vec<f64> = vals.iter().map(|&l| f(l)).collect();
        Ok(u.mul(&Self::diag(&fl)).mul(&u.adjoint()))
    }

    /// Complex Ginibre matrix, entries `(N(0,1) + i N(0,1))/√2`.
    pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let data = (0..n * n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            })
            .collect();
        Self::new(n, data).expect("finite samples")
    }

    /// Hermitian `(G + G^*)/2` for Ginibre `G`.
    pub fn gue<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let g = Self::ginibre(n, rng);
        g.add(&g.adjoint()).scale(Complex64::new(0.5, 0.0))
    }

    /// Unitary from Gram–Schmidt on a Ginibre matrix.
    pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut cols = Self::ginibre(n, rng).columns();
        for j in 0..n {
            for k in 0..j {
                let proj: Complex64 = cols[k].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
                let ck = cols[k].clone();
                for (x, y) in cols[j].iter_mut().zip(&ck) {
                    *x -= proj * y;
                }
            }
            let nrm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            cols[j].iter_mut().for_each(|z| *z /= nrm);
        }
        Self::from_columns(&cols)
    }
}

pub struct Svd {
    pub u: MatrixOp,
    pub sigma: Vec<f64>,
    pub v: MatrixOp,
}

impl Svd {
    pub fn reconstruct(&self) -> MatrixOp {
        let n = self.u.n;
        MatrixOp::from_fn(n, |i, j| {
            (0..n).map(|k| self.u.get(i, k) * self.sigma[k] * self.v.get(j, k).conj()).sum()
        })
    }
}

/// `(T V)_{jk} = sgn(j − k) V_{jk}`: strictly lower part kept, diagonal
/// zeroed, strictly upper part negated.
pub fn triangular_truncate(v: &MatrixOp) -> MatrixOp {
    v.map(|j, k, z| match j.cmp(&k) {
        std::cmp::Ordering::Greater => z,
        std::cmp::Ordering::Equal => Complex64::default(),
        std::cmp::Ordering::Less => -z,
    })
}

/// `‖μ(A)‖_E` with `E` realized on sequences.
pub fn schatten_norm(a: &MatrixOp, spec: &SpaceSpec) -> Result<f64> {
    a.singular_values()?.norm(&spec.as_discrete())
}

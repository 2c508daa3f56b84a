//! Metric Lie algebras in a fixed orthonormal basis.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::multilinear::{
    binomial, multi_index_rank, nullspace, theta_action, Endomorphism, LinearOperatorMatrix,
    MAX_DIM,
};

/// Antisymmetric bilinear map `R^n x R^n -> R^n` given by structure constants
/// `mu_ij^k = <mu(e_i, e_j), e_k>`.
///
/// Only `i < j` is stored. Jacobi is not enforced here; flows and derived
/// tensors (e.g. `theta(A) mu`) share this type.
#[derive(Debug, Clone, PartialEq)]
pub struct LieBracket {
    dim: usize,
    comps: Vec<f64>,
}

impl LieBracket {
    pub fn zero(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        Self {
            dim,
            comps: vec![0.0; binomial(dim, 2) * dim],
        }
    }

    /// Builds a bracket from 0-based `(i, j, k, value)` entries meaning
    /// `mu(e_i, e_j) += value e_k`.
    pub fn from_entries(dim: usize, entries: &[(usize, usize, usize, f64)]) -> Self {
        let mut mu = Self::zero(dim);
        for &(i, j, k, v) in entries {
            mu.add_at(i, j, k, v);
        }
        mu
    }

    pub fn from_components(dim: usize, comps: Vec<f64>) -> Result<Self> {
        if dim > MAX_DIM {
            return Err(Error::Domain(format!("dimension {dim} exceeds {MAX_DIM}")));
        }
        if comps.len() != binomial(dim, 2) * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} bracket components given, {} expected",
                comps.len(),
                binomial(dim, 2) * dim
            )));
        }
        Ok(Self { dim, comps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Components ordered by increasing pair `(i, j)`, then by `k`.
    pub fn components(&self) -> &[f64] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [f64] {
        &mut self.comps
    }

    fn slot(&self, i: usize, j: usize, k: usize) -> usize {
        multi_index_rank(self.dim, &[i, j]) * self.dim + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => self.comps[self.slot(i, j, k)],
            Greater => -self.comps[self.slot(j, i, k)],
            Equal => 0.0,
        }
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => {
                let s = self.slot(i, j, k);
                self.comps[s] = value;
            }
            Greater => {
                let s = self.slot(j, i, k);
                self.comps[s] = -value;
            }
            Equal => {}
        }
    }

    pub fn add_at(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let cur = self.get(i, j, k);
        self.set(i, j, k, cur + value);
    }

    /// `mu(x, y)`.
    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let c = x[i] * y[j];
                if c == 0.0 || i == j {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += c * self.get(i, j, k);
                }
            }
        }
        out
    }

    /// `mu(e_i, e_j)` as a vector.
    pub fn bracket_basis(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.dim).map(|k| self.get(i, j, k)).collect()
    }

    /// Matrix of `ad_x = mu(x, .)`.
    pub fn ad(&self, x: &[f64]) -> Endomorphism {
        let n = self.dim;
        let mut m = Endomorphism::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for (i, xi) in x.iter().enumerate() {
                    acc += xi * self.get(i, j, k);
                }
                m[(k, j)] = acc;
            }
        }
        m
    }

    pub fn ad_basis(&self, i: usize) -> Endomorphism {
        let mut e = vec![0.0; self.dim];
        e[i] = 1.0;
        self.ad(&e)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            comps: self.comps.iter().map(|x| c * x).collect(),
        }
    }

    /// `sum_{i,j,k} (mu_ij^k)^2` over all ordered pairs.
    pub fn norm2(&self) -> f64 {
        2.0 * self.comps.iter().map(|x| x * x).sum::<f64>()
    }

    /// Full-convention inner product `sum_{i,j,k} mu_ij^k nu_ij^k`.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        2.0 * self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a * b)
            .sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|x| x.is_finite())
    }

    /// `h . mu = h mu(h^{-1} ., h^{-1} .)` for invertible `h`.
    pub fn act(&self, h: &Endomorphism) -> Result<Self> {
        let n = self.dim;
        let h_inv = h
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Domain("non-invertible change of basis".into()))?;
        let mut out = Self::zero(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let x: Vec<f64> = h_inv.column(i).iter().copied().collect();
                let y: Vec<f64> = h_inv.column(j).iter().copied().collect();
                let b = DVector::from_vec(self.bracket(&x, &y));
                let hb = h * b;
                for k in 0..n {
                    out.set(i, j, k, hb[k]);
                }
            }
        }
        Ok(out)
    }
}

impl Add for &LieBracket {
    type Output = LieBracket;
    fn add(self, rhs: &LieBracket) -> LieBracket {
        assert_eq!(self.dim, rhs.dim);
        LieBracket {
            dim: self.dim,
            comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &LieBracket {
    type Output = LieBracket;
    fn sub(self, rhs: &LieBracket) -> LieBracket {
        assert_eq!(self.dim, rhs.dim);
        LieBracket {
            dim: self.dim,
            comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<&LieBracket> for f64 {
    type Output = LieBracket;
    fn mul(self, rhs: &LieBracket) -> LieBracket {
        rhs.scale(self)
    }
}

impl Neg for &LieBracket {
    type Output = LieBracket;
    fn neg(self) -> LieBracket {
        self.scale(-1.0)
    }
}

/// Values `J(e_a, e_b, e_c)` for `a < b < c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobiator {
    dim: usize,
    values: Vec<([usize; 3], Vec<f64>)>,
}

impl Jacobiator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> Option<&[f64]> {
        self.values
            .iter()
            .find(|(t, _)| *t == [a, b, c])
            .map(|(_, v)| v.as_slice())
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|(_, v)| v.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Triples whose value exceeds `tol`, 1-based for messages.
    pub fn offending(&self, tol: f64) -> Vec<[usize; 3]> {
        self.values
            .iter()
            .filter(|(_, v)| v.iter().any(|x| x.abs() > tol))
            .map(|(t, _)| [t[0] + 1, t[1] + 1, t[2] + 1])
            .collect()
    }
}

pub fn jacobiator(mu: &LieBracket) -> Jacobiator {
    let n = mu.dim();
    let mut values = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                let mut j = vec![0.0; n];
                for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
                    let xy = mu.bracket_basis(x, y);
                    for (l, coeff) in xy.iter().enumerate() {
                        if *coeff == 0.0 {
                            continue;
                        }
                        for (k, jk) in j.iter_mut().enumerate() {
                            *jk += coeff * mu.get(l, z, k);
                        }
                    }
                }
                values.push(([a, b, c], j));
            }
        }
    }
    Jacobiator { dim: n, values }
}

pub fn is_lie(mu: &LieBracket, tol: f64) -> bool {
    jacobiator(mu).max_abs() <= tol
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AlgebraReport {
    pub is_lie: bool,
    pub is_nilpotent: bool,
    pub is_solvable: bool,
    pub is_unimodular: bool,
    pub jacobi_residual: f64,
    /// Nilpotency class (`0` for the zero bracket); for non-nilpotent
    /// algebras, the index at which the lower central series stabilises.
    pub lower_central_length: usize,
}

/// Orthonormal basis (columns) of the span of `vectors`.
fn span_basis(vectors: &[Vec<f64>], n: usize, cut: f64) -> DMatrix<f64> {
    if vectors.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    let m = DMatrix::from_fn(n, vectors.len(), |r, c| vectors[c][r]);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > cut)
        .map(|(i, _)| i)
        .collect();
    DMatrix::from_fn(n, keep.len(), |r, c| u[(r, keep[c])])
}

fn bracket_span(mu: &LieBracket, a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = mu.dim();
    let mut vecs = Vec::new();
    for i in 0..a.ncols() {
        let x: Vec<f64> = a.column(i).iter().copied().collect();
        for j in 0..b.ncols() {
            let y: Vec<f64> = b.column(j).iter().copied().collect();
            vecs.push(mu.bracket(&x, &y));
        }
    }
    let sigma_max = if vecs.is_empty() {
        0.0
    } else {
        DMatrix::from_fn(n, vecs.len(), |r, c| vecs[c][r])
            .singular_values()
            .iter()
            .fold(0.0f64, |m, s| m.max(*s))
    };
    let cut = tol * sigma_max.max(mu.max_abs());
    span_basis(&vecs, n, cut)
}

/// Lower central and derived series with rank decisions at relative `tol`.
pub fn structure_report(mu: &LieBracket, tol: f64) -> AlgebraReport {
    let n = mu.dim();
    let full = DMatrix::<f64>::identity(n, n);
    let jac = jacobiator(mu).max_abs();
    let scale = mu.max_abs().max(f64::MIN_POSITIVE);

    // g^1 = g, g^{k+1} = [g, g^k]
    let mut lower = full.clone();
    let mut length = 0;
    let mut nilpotent = mu.max_abs() == 0.0;
    if !nilpotent {
        for k in 1..=n + 1 {
            let next = bracket_span(mu, &full, &lower, tol);
            length = k;
            if next.ncols() == 0 {
                nilpotent = true;
                break;
            }
            if next.ncols() == lower.ncols() {
                break;
            }
            lower = next;
        }
    }

    let mut derived = full.clone();
    let mut solvable = n == 0;
    for _ in 0..=n + 1 {
        let next = bracket_span(mu, &derived, &derived, tol);
        if next.ncols() == 0 {
            solvable = true;
            break;
        }
        if next.ncols() == derived.ncols() {
            break;
        }
        derived = next;
    }

    let u = mean_curvature(mu);
    let unimodular = u.iter().all(|x| x.abs() <= tol * scale);

    AlgebraReport {
        is_lie: jac <= tol * scale.max(1.0),
        is_nilpotent: nilpotent,
        is_solvable: solvable || nilpotent,
        is_unimodular: unimodular || nilpotent,
        jacobi_residual: jac,
        lower_central_length: length,
    }
}

/// Killing endomorphism: `<B e_i, e_j> = tr(ad_i ad_j)`.
pub fn killing_endo(mu: &LieBracket) -> Endomorphism {
    let n = mu.dim();
    let ads: Vec<Endomorphism> = (0..n).map(|i| mu.ad_basis(i)).collect();
    Endomorphism::from_fn(n, n, |i, j| (&ads[i] * &ads[j]).trace())
}

/// Mean curvature vector: `<U, X> = tr ad_X`.
pub fn mean_curvature(mu: &LieBracket) -> Vec<f64> {
    (0..mu.dim()).map(|i| mu.ad_basis(i).trace()).collect()
}

/// Moment map for the `GL(n)` action on brackets, normalised so that
/// `tr(M A^T) = 1/4 <theta(A) mu, mu>`.
pub fn moment_map_mu(mu: &LieBracket) -> Endomorphism {
    let n = mu.dim();
    let mut m = Endomorphism::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc -= 0.5 * mu.get(a, i, j) * mu.get(b, i, j);
                    acc += 0.25 * mu.get(i, j, a) * mu.get(i, j, b);
                }
            }
            m[(a, b)] = acc;
            m[(b, a)] = acc;
        }
    }
    m
}

/// Ricci endomorphism of the left-invariant metric,
/// `Ric = M - B/2 - Sym(ad_U)`.
pub fn ricci(mu: &LieBracket) -> Endomorphism {
    let m = moment_map_mu(mu);
    let b = killing_endo(mu);
    let ad_u = mu.ad(&mean_curvature(mu));
    let sym = (&ad_u + ad_u.transpose()) * 0.5;
    let r = m - b * 0.5 - sym;
    (&r + r.transpose()) * 0.5
}

pub fn scalar_curvature(mu: &LieBracket) -> f64 {
    ricci(mu).trace()
}

/// Matrix of `A -> theta(A) mu`; column `r * n + c` is the image of `E_rc`.
pub fn theta_operator(mu: &LieBracket) -> LinearOperatorMatrix {
    let n = mu.dim();
    let rows = binomial(n, 2) * n;
    let mut m = LinearOperatorMatrix::zeros(rows, n * n);
    for c in 0..n * n {
        let mut a = Endomorphism::zeros(n, n);
        a[(c / n, c % n)] = 1.0;
        let t = theta_action(&a, mu).expect("matching dimensions");
        for (r, v) in t.components().iter().enumerate() {
            m[(r, c)] = *v;
        }
    }
    m
}

/// Basis of `Der(mu) = ker(A -> theta(A) mu)`.
pub fn derivation_algebra(mu: &LieBracket, tol: f64) -> Vec<Endomorphism> {
    let n = mu.dim();
    nullspace(&theta_operator(mu), tol)
        .into_iter()
        .map(|v| Endomorphism::from_fn(n, n, |r, c| v[r * n + c]))
        .collect()
}

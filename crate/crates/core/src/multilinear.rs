//! Dense exterior algebra over `R^n` for small `n`.
//!
//! All bases are orthonormal. A `k`-form is stored by its components on the
//! increasing multi-indices `i_1 < ... < i_k`, ordered lexicographically; any
//! other index tuple is resolved by sorting with the permutation sign.
//!
//! Two pairings on forms are in use. [`Convention::Full`] sums over all
//! ordered index tuples (the tensor norm, used for bracket and 3-form norms),
//! [`Convention::Increasing`] sums over increasing tuples only (the standard
//! Riemannian pairing, used for codifferentials). They differ by `k!`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::liealg::LieBracket;

/// Largest supported dimension of the underlying vector space.
pub const MAX_DIM: usize = 8;

/// Default relative singular-value cut for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Endomorphism of `R^n`; entry `(i, j)` is the `e_i` coefficient of `A e_j`.
pub type Endomorphism = DMatrix<f64>;

/// Matrix of a linear map between coordinate spaces (forms, brackets, ...).
pub type LinearOperatorMatrix = DMatrix<f64>;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All increasing `k`-tuples in `{0, .., n-1}`, in lexicographic order.
pub fn multi_indices(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::with_capacity(binomial(n, k));
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Lexicographic position of an increasing tuple among [`multi_indices`].
pub fn multi_index_rank(n: usize, idx: &[usize]) -> usize {
    let k = idx.len();
    let mut rank = 0;
    let mut prev: isize = -1;
    for (pos, &c) in idx.iter().enumerate() {
        for j in (prev + 1) as usize..c {
            rank += binomial(n - 1 - j, k - 1 - pos);
        }
        prev = c as isize;
    }
    rank
}

/// Sorts an index tuple, returning the sign of the sorting permutation, or
/// `None` if an index repeats.
pub fn sort_with_sign(idx: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut v = idx.to_vec();
    let mut sign = 1.0;
    // insertion sort, counting transpositions
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((v, sign))
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Sum over all ordered index tuples.
    Full,
    /// Sum over increasing index tuples.
    Increasing,
}

/// Alternating `k`-form on `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct KForm {
    dim: usize,
    degree: usize,
    comps: Vec<f64>,
}

impl KForm {
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        // degree > dim is allowed and gives the zero space (no components)
        Self {
            dim,
            degree,
            comps: vec![0.0; binomial(dim, degree)],
        }
    }

    /// `e^{i_1 ... i_k}` for 0-based indices in any order (signed accordingly).
    pub fn basis(dim: usize, idx: &[usize]) -> Self {
        let mut f = Self::zero(dim, idx.len());
        f.set(idx, 1.0);
        f
    }

    pub fn from_components(dim: usize, degree: usize, comps: Vec<f64>) -> Result<Self> {
        if dim > MAX_DIM {
            return Err(Error::Domain(format!(
                "cannot build a {degree}-form on R^{dim}"
            )));
        }
        if comps.len() != binomial(dim, degree) {
            return Err(Error::DimensionMismatch(format!(
                "{} components given, {} expected",
                comps.len(),
                binomial(dim, degree)
            )));
        }
        Ok(Self { dim, degree, comps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Components on increasing multi-indices.
    pub fn components(&self) -> &[f64] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [f64] {
        &mut self.comps
    }

    pub fn index_set(&self) -> Vec<Vec<usize>> {
        multi_indices(self.dim, self.degree)
    }

    /// `omega(e_{i_1}, ..., e_{i_k})` for an arbitrary index tuple.
    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.degree);
        match sort_with_sign(idx) {
            Some((sorted, sign)) => sign * self.comps[multi_index_rank(self.dim, &sorted)],
            None => 0.0,
        }
    }

    /// Sets the value on `idx` (any order); repeated indices are ignored.
    pub fn set(&mut self, idx: &[usize], value: f64) {
        if let Some((sorted, sign)) = sort_with_sign(idx) {
            let r = multi_index_rank(self.dim, &sorted);
            self.comps[r] = sign * value;
        }
    }

    pub fn add_at(&mut self, idx: &[usize], value: f64) {
        if let Some((sorted, sign)) = sort_with_sign(idx) {
            let r = multi_index_rank(self.dim, &sorted);
            self.comps[r] += sign * value;
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            degree: self.degree,
            comps: self.comps.iter().map(|x| c * x).collect(),
        }
    }

    pub fn norm2(&self, convention: Convention) -> f64 {
        let s: f64 = self.comps.iter().map(|x| x * x).sum();
        match convention {
            Convention::Full => factorial(self.degree) * s,
            Convention::Increasing => s,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|x| x.is_finite())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.degree != other.degree {
            return Err(Error::DimensionMismatch(format!(
                "{}-form on R^{} vs {}-form on R^{}",
                self.degree, self.dim, other.degree, other.dim
            )));
        }
        Ok(())
    }
}

impl Add for &KForm {
    type Output = KForm;
    fn add(self, rhs: &KForm) -> KForm {
        assert_eq!((self.dim, self.degree), (rhs.dim, rhs.degree));
        KForm {
            dim: self.dim,
            degree: self.degree,
            comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &KForm {
    type Output = KForm;
    fn sub(self, rhs: &KForm) -> KForm {
        assert_eq!((self.dim, self.degree), (rhs.dim, rhs.degree));
        KForm {
            dim: self.dim,
            degree: self.degree,
            comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a - b).collect(),
        }
    }
}

impl AddAssign<&KForm> for KForm {
    fn add_assign(&mut self, rhs: &KForm) {
        assert_eq!((self.dim, self.degree), (rhs.dim, rhs.degree));
        for (a, b) in self.comps.iter_mut().zip(&rhs.comps) {
            *a += b;
        }
    }
}

impl Mul<&KForm> for f64 {
    type Output = KForm;
    fn mul(self, rhs: &KForm) -> KForm {
        rhs.scale(self)
    }
}

impl Neg for &KForm {
    type Output = KForm;
    fn neg(self) -> KForm {
        self.scale(-1.0)
    }
}

/// `iota_X omega`, i.e. `omega(X, ., ..., .)`.
pub fn interior_product(x: &[f64], omega: &KForm) -> Result<KForm> {
    if omega.degree == 0 {
        return Err(Error::Domain("interior product of a 0-form".into()));
    }
    if x.len() != omega.dim {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} on a form over R^{}",
            x.len(),
            omega.dim
        )));
    }
    let mut out = KForm::zero(omega.dim, omega.degree - 1);
    let mut full = Vec::with_capacity(omega.degree);
    for (r, idx) in multi_indices(omega.dim, omega.degree - 1).iter().enumerate() {
        let mut acc = 0.0;
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            full.clear();
            full.push(i);
            full.extend_from_slice(idx);
            acc += xi * omega.get(&full);
        }
        out.comps[r] = acc;
    }
    Ok(out)
}

pub fn form_inner(alpha: &KForm, beta: &KForm, convention: Convention) -> Result<f64> {
    alpha.check_same_shape(beta)?;
    let s: f64 = alpha.comps.iter().zip(&beta.comps).map(|(a, b)| a * b).sum();
    Ok(match convention {
        Convention::Full => factorial(alpha.degree) * s,
        Convention::Increasing => s,
    })
}

/// Derivation action `rho(A) omega = -sum_s omega(.., A ., ..)` on any degree.
pub fn rho_action(a: &Endomorphism, omega: &KForm) -> Result<KForm> {
    let n = omega.dim;
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} endomorphism on forms over R^{n}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut out = KForm::zero(n, omega.degree);
    let mut slot = Vec::with_capacity(omega.degree);
    for (r, idx) in multi_indices(n, omega.degree).iter().enumerate() {
        let mut acc = 0.0;
        for s in 0..idx.len() {
            slot.clear();
            slot.extend_from_slice(idx);
            for l in 0..n {
                let coeff = a[(l, idx[s])];
                if coeff == 0.0 {
                    continue;
                }
                slot[s] = l;
                acc -= coeff * omega.get(&slot);
            }
        }
        out.comps[r] = acc;
    }
    Ok(out)
}

/// `theta(A) mu = A mu(.,.) - mu(A.,.) - mu(.,A.)`; the result need not be a
/// Lie bracket.
pub fn theta_action(a: &Endomorphism, mu: &LieBracket) -> Result<LieBracket> {
    let n = mu.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} endomorphism on a bracket over R^{n}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut out = LieBracket::zero(n);
    for i in 0..n {
        for j in (i + 1)..n {
            for k in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += a[(k, l)] * mu.get(i, j, l);
                    acc -= a[(l, i)] * mu.get(l, j, k);
                    acc -= a[(l, j)] * mu.get(i, l, k);
                }
                out.set(i, j, k, acc);
            }
        }
    }
    Ok(out)
}

/// Orthonormal basis of the numerical kernel of `m`: right-singular
/// directions whose singular value is at most `tol` times the largest one
/// (or `tol` itself when `m` vanishes).
pub fn nullspace(m: &LinearOperatorMatrix, tol: f64) -> Vec<DVector<f64>> {
    let cols = m.ncols();
    if cols == 0 {
        return Vec::new();
    }
    // pad with zero rows so that the SVD returns a full right basis
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let scale = if sigma_max > 0.0 { sigma_max } else { 1.0 };
    let cut = tol * scale;
    let mut basis = Vec::new();
    for (r, &s) in svd.singular_values.iter().enumerate() {
        if s <= cut {
            basis.push(v_t.row(r).transpose());
        }
    }
    // singular values beyond the row count are implicitly zero
    for r in svd.singular_values.len()..cols {
        basis.push(v_t.row(r).transpose());
    }
    basis
}

/// Minimises `|v0 + lambda v1|` over `lambda`; returns `(lambda*, residual)`.
pub fn least_squares_scalar(v0: &[f64], v1: &[f64]) -> (f64, f64) {
    assert_eq!(v0.len(), v1.len());
    let d11: f64 = v1.iter().map(|x| x * x).sum();
    let lambda = if d11 > 0.0 {
        -v0.iter().zip(v1).map(|(a, b)| a * b).sum::<f64>() / d11
    } else {
        0.0
    };
    let res = v0
        .iter()
        .zip(v1)
        .map(|(a, b)| (a + lambda * b).powi(2))
        .sum::<f64>()
        .sqrt();
    (lambda, res)
}

//! Random valid Dorfman brackets for property tests and searches.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::courant::{d_matrix, DorfmanBracket};
use crate::liealg::{derivation_algebra, jacobiator, LieBracket};
use crate::multilinear::{binomial, multi_indices, nullspace, KForm};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(-1.0..1.0)
}

/// Random orthogonal matrix (Q factor of a random square matrix).
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    loop {
        let m = DMatrix::from_fn(n, n, |_, _| uniform(rng));
        if m.determinant().abs() > 1e-3 {
            return m.qr().q();
        }
    }
}

/// Gauss–Newton projection onto the Jacobi variety, moving only the listed
/// free components.
fn project_to_jacobi(mu: &mut LieBracket, free: &[usize]) -> bool {
    let n = mu.dim();
    for _ in 0..50 {
        let jac = jacobiator(mu);
        let res = jac.max_abs();
        if res < 1e-14 {
            return true;
        }
        let triples = multi_indices(n, 3);
        let rows = triples.len() * n;
        let residual_vec = |m: &LieBracket| -> DVector<f64> {
            let j = jacobiator(m);
            let mut v = DVector::zeros(rows);
            for (t, idx) in triples.iter().enumerate() {
                let vals = j.get(idx[0], idx[1], idx[2]).expect("triple present");
                for k in 0..n {
                    v[t * n + k] = vals[k];
                }
            }
            v
        };
        let r0 = residual_vec(mu);
        // Jacobian by exact differences of the quadratic map
        let mut jm = DMatrix::zeros(rows, free.len());
        let eps = 1e-6;
        for (c, &slot) in free.iter().enumerate() {
            let mut plus = mu.clone();
            plus.components_mut()[slot] += eps;
            let mut minus = mu.clone();
            minus.components_mut()[slot] -= eps;
            let col = (residual_vec(&plus) - residual_vec(&minus)) / (2.0 * eps);
            jm.set_column(c, &col);
        }
        let svd = jm.svd(true, true);
        let step = match svd.solve(&r0, 1e-12) {
            Ok(s) => s,
            Err(_) => return false,
        };
        for (c, &slot) in free.iter().enumerate() {
            mu.components_mut()[slot] -= step[c];
        }
        if !mu.is_finite() {
            return false;
        }
    }
    jacobiator(mu).max_abs() < 1e-13
}

/// Random nilpotent Lie bracket with `mu(e_i, e_j) in span{e_k : k > max(i, j)}`.
pub fn random_nilpotent<R: Rng>(rng: &mut R, n: usize) -> LieBracket {
    loop {
        let mut mu = LieBracket::zero(n);
        let mut free = Vec::new();
        for (p, idx) in multi_indices(n, 2).iter().enumerate() {
            for k in (idx[1] + 1)..n {
                mu.set(idx[0], idx[1], k, uniform(rng));
                free.push(p * n + k);
            }
        }
        if project_to_jacobi(&mut mu, &free) && mu.max_abs() > 0.05 && mu.max_abs() < 10.0 {
            return mu;
        }
    }
}

/// Random solvable bracket `R e_1 x|_D n` where `n` is a random nilpotent
/// algebra on `e_2..e_n` and `D` a random derivation of it (generically not
/// traceless, so the result is usually non-unimodular).
pub fn random_solvable<R: Rng>(rng: &mut R, n: usize) -> LieBracket {
    assert!(n >= 2);
    let m = n - 1;
    let nil = if m >= 3 {
        random_nilpotent(rng, m)
    } else {
        LieBracket::zero(m)
    };
    let ders = derivation_algebra(&nil, 1e-10);
    let mut d = DMatrix::<f64>::zeros(m, m);
    for b in &ders {
        d += b * uniform(rng);
    }
    let mut mu = LieBracket::zero(n);
    for i in 0..m {
        for j in (i + 1)..m {
            for k in 0..m {
                mu.set(i + 1, j + 1, k + 1, nil.get(i, j, k));
            }
        }
    }
    for j in 0..m {
        for k in 0..m {
            mu.set(0, j + 1, k + 1, d[(k, j)]);
        }
    }
    mu
}

/// Random element of `ker d_mu` in degree 3.
pub fn random_closed_h<R: Rng>(rng: &mut R, mu: &LieBracket) -> KForm {
    let n = mu.dim();
    if n < 3 {
        return KForm::zero(n, 3);
    }
    let basis = nullspace(&d_matrix(mu, 3), 1e-10);
    combine(rng, n, &basis)
}

/// Random element of `ker d_mu ∩ ker d*_mu` in degree 3.
pub fn random_harmonic_h<R: Rng>(rng: &mut R, mu: &LieBracket) -> KForm {
    let n = mu.dim();
    if n < 3 {
        return KForm::zero(n, 3);
    }
    let d3 = d_matrix(mu, 3);
    let d2t = d_matrix(mu, 2).transpose();
    let cols = binomial(n, 3);
    let mut stacked = DMatrix::zeros(d3.nrows() + d2t.nrows(), cols);
    stacked.view_mut((0, 0), (d3.nrows(), cols)).copy_from(&d3);
    stacked
        .view_mut((d3.nrows(), 0), (d2t.nrows(), cols))
        .copy_from(&d2t);
    combine(rng, n, &nullspace(&stacked, 1e-10))
}

fn combine<R: Rng>(rng: &mut R, n: usize, basis: &[DVector<f64>]) -> KForm {
    let mut c = vec![0.0; binomial(n, 3)];
    for b in basis {
        let w = uniform(rng);
        for (x, y) in c.iter_mut().zip(b.iter()) {
            *x += w * y;
        }
    }
    KForm::from_components(n, 3, c).expect("sizes agree")
}

/// Random valid nilpotent Dorfman bracket, optionally rotated.
pub fn random_nilpotent_dorfman<R: Rng>(rng: &mut R, n: usize, rotate: bool) -> DorfmanBracket {
    let mut mu = random_nilpotent(rng, n);
    if rotate {
        let q = random_orthogonal(rng, n);
        mu = mu.act(&q).expect("orthogonal is invertible");
    }
    let h = random_closed_h(rng, &mu);
    DorfmanBracket::new(mu, h).expect("valid by construction")
}

pub fn random_solvable_dorfman<R: Rng>(rng: &mut R, n: usize, rotate: bool) -> DorfmanBracket {
    let mut mu = random_solvable(rng, n);
    if rotate {
        let q = random_orthogonal(rng, n);
        mu = mu.act(&q).expect("orthogonal is invertible");
    }
    let h = random_closed_h(rng, &mu);
    DorfmanBracket::new(mu, h).expect("valid by construction")
}

/// Random nilpotent bracket with harmonic torsion.
pub fn random_harmonic_nilpotent<R: Rng>(rng: &mut R, n: usize) -> DorfmanBracket {
    let mu = random_nilpotent(rng, n);
    let h = random_harmonic_h(rng, &mu);
    DorfmanBracket::new(mu, h).expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::structure_report;

    #[test]
    fn sampled_brackets_are_valid() {
        let mut r = rng(7);
        for n in 3..=5 {
            for _ in 0..5 {
                let d = random_nilpotent_dorfman(&mut r, n, true);
                let rep = structure_report(d.mu(), 1e-8);
                assert!(rep.is_lie && rep.is_nilpotent, "{rep:?}");
                let d = random_solvable_dorfman(&mut r, n, true);
                let rep = structure_report(d.mu(), 1e-8);
                assert!(rep.is_lie && rep.is_solvable, "{rep:?}");
            }
        }
    }

    #[test]
    fn harmonic_h_is_coclosed() {
        let mut r = rng(3);
        let d = random_harmonic_nilpotent(&mut r, 5);
        assert!(crate::courant::dstar_h_norm(&d) < 1e-12);
    }
}

//! Reference computations written independently of the library's QR path:
//! normal equations by Gaussian elimination, explicit projection matrices and
//! a from-scratch posterior built on Gram–Schmidt.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rjsa::{CentreSet, Dataset};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = b.clone();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| m[[i, col]].abs().total_cmp(&m[[j, col]].abs()))
            .unwrap();
        for c in 0..n {
            m.swap([col, c], [p, c]);
        }
        v.swap(col, p);
        for r in col + 1..n {
            let f = m[[r, col]] / m[[col, col]];
            for c in col..n {
                m[[r, c]] -= f * m[[col, c]];
            }
            v[r] -= f * v[col];
        }
    }
    let mut x = Array1::zeros(n);
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[[r, c]] * x[c]).sum();
        x[r] = (v[r] - s) / m[[r, r]];
    }
    x
}

/// Inverse by solving against each unit vector.
pub fn invert(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let mut inv = Array2::zeros((n, n));
    for j in 0..n {
        let mut e = Array1::zeros(n);
        e[j] = 1.0;
        inv.column_mut(j).assign(&gauss_solve(a, &e));
    }
    inv
}

/// Least-squares coefficients from `DᵀD α = Dᵀy`.
pub fn normal_equations(d: &Array2<f64>, y: &Array1<f64>) -> Array1<f64> {
    let dt = d.t();
    gauss_solve(&dt.dot(d), &dt.dot(y))
}

/// `‖y − D α̂‖²` with `α̂` from the normal equations.
pub fn residual_by_normal_equations(d: &Array2<f64>, y: &Array1<f64>) -> f64 {
    let r = y - &d.dot(&normal_equations(d, y));
    r.dot(&r)
}

/// `yᵀ (I − D (DᵀD)⁻¹ Dᵀ) y` with the projection matrix built explicitly.
pub fn projection_quadratic(d: &Array2<f64>, y: &Array1<f64>) -> f64 {
    let n = d.nrows();
    let hat = d.dot(&invert(&d.t().dot(d))).dot(&d.t());
    let p = Array2::<f64>::eye(n) - hat;
    y.dot(&p.dot(y))
}

/// Design `[1 | x | |x − μ_j|³]` built by hand for Euclidean cubic bases.
pub fn cubic_design(x: &Array2<f64>, centres: &[Vec<f64>]) -> Array2<f64> {
    let (n, d) = x.dim();
    let mut m = Array2::zeros((n, 1 + d + centres.len()));
    for t in 0..n {
        m[[t, 0]] = 1.0;
        for j in 0..d {
            m[[t, 1 + j]] = x[[t, j]];
        }
        for (j, mu) in centres.iter().enumerate() {
            let r2: f64 = (0..d).map(|a| (x[[t, a]] - mu[a]).powi(2)).sum();
            m[[t, 1 + d + j]] = r2.sqrt().powi(3);
        }
    }
    m
}

/// `‖y − proj_D y‖²` by Gram–Schmidt with one reorthogonalization pass, which
/// stays accurate on the ill-conditioned designs close centres produce.
pub fn residual_by_gram_schmidt(d: &Array2<f64>, y: &Array1<f64>) -> f64 {
    let mut basis: Vec<Array1<f64>> = Vec::new();
    for col in d.columns() {
        let mut v = col.to_owned();
        for _ in 0..2 {
            for q in &basis {
                let p = q.dot(&v);
                v.scaled_add(-p, q);
            }
        }
        let norm = v.dot(&v).sqrt();
        assert!(norm > 1e-10 * col.dot(&col).sqrt(), "dependent column");
        basis.push(v / norm);
    }
    let mut r = y.clone();
    for _ in 0..2 {
        for q in &basis {
            let p = q.dot(&r);
            r.scaled_add(-p, q);
        }
    }
    r.dot(&r)
}

/// `−(N/2) Σ_i ln(y_iᵀ P y_i) − C k` for cubic bases.
pub fn oracle_log_posterior(data: &Dataset<f64>, centres: &[Vec<f64>], c: f64) -> f64 {
    let x = data.x().to_owned();
    let d = cubic_design(&x, centres);
    let n = data.len() as f64;
    let mut acc = 0.0;
    for col in data.y().columns() {
        acc += residual_by_gram_schmidt(&d, &col.to_owned()).ln();
    }
    -(n / 2.0) * acc - c * centres.len() as f64
}

/// Inputs uniform on `[-1, 1]^d`, outputs a smooth function plus noise.
pub fn synthetic(n: usize, d: usize, c: usize, seed: u64) -> Dataset<f64> {
    let mut r = rng(seed);
    let x = Array2::from_shape_fn((n, d), |_| r.random::<f64>() * 2.0 - 1.0);
    let y = Array2::from_shape_fn((n, c), |(t, i)| {
        let s: f64 = (0..d).map(|a| x[[t, a]] * (a + i + 1) as f64).sum();
        (1.5 * s).sin() + 0.3 * (s * s) + 0.1 * (r.random::<f64>() - 0.5)
    });
    Dataset::new(x, y).unwrap()
}

/// `k` centres drawn uniformly from `[lo, hi]^d`.
pub fn random_centres<R: Rng>(k: usize, d: usize, lo: f64, hi: f64, r: &mut R) -> Vec<Vec<f64>> {
    (0..k)
        .map(|_| (0..d).map(|_| lo + (hi - lo) * r.random::<f64>()).collect())
        .collect()
}

pub fn centre_set(d: usize, rows: &[Vec<f64>]) -> CentreSet<f64> {
    CentreSet::from_rows(d, rows).unwrap()
}

pub fn rows(c: &CentreSet<f64>) -> Vec<Vec<f64>> {
    c.iter().map(|r| r.to_vec()).collect()
}

/// Random `n × m` matrix with a leading column of ones.
pub fn random_design<R: Rng>(n: usize, m: usize, r: &mut R) -> Array2<f64> {
    Array2::from_shape_fn((n, m), |(_, j)| if j == 0 { 1.0 } else { r.random::<f64>() * 2.0 - 1.0 })
}

pub fn random_vector<R: Rng>(n: usize, r: &mut R) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| r.random::<f64>() * 2.0 - 1.0)
}

//! Column-pivoted Householder QR and the least-squares quantities read off it.
//!
//! For a tall matrix `A` (N×m) the factorization computes `A P = Q R` with
//! `Q` orthogonal and `R` upper triangular. Because columns are pivoted by
//! remaining norm, `|R_jj|` is non-increasing and the numerical rank is the
//! number of pivots above `tol · |R_00|`.
//!
//! The residual sum of squares of a least-squares fit is the squared norm of
//! the trailing `N − m` entries of `Qᵀy`, which is never negative.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct PivotedQr<F> {
    /// `R` on and above the diagonal, Householder vectors (with implicit
    /// leading 1) below it.
    packed: Array2<F>,
    tau: Vec<F>,
    /// `perm[j]` is the original column index of factored column `j`.
    perm: Vec<usize>,
    rank: usize,
}

impl<F: Real> PivotedQr<F> {
    pub fn new(a: ArrayView2<'_, F>) -> Result<Self> {
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix"));
        }
        let (rows, cols) = a.dim();
        let mut packed = a.to_owned();
        let steps = rows.min(cols);
        let mut tau = Vec::with_capacity(steps);
        let mut perm: Vec<usize> = (0..cols).collect();
        let mut diag = Vec::with_capacity(steps);

        for j in 0..steps {
            // Pivot on the largest remaining column norm, recomputed from
            // scratch: m is small enough that downdating buys nothing.
            let (pivot, pivot_norm) = (j..cols)
                .map(|c| (c, sq_norm(packed.column(c).slice(ndarray::s![j..]))))
                .fold((j, F::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot != j {
                swap_columns(&mut packed, j, pivot);
                perm.swap(j, pivot);
            }
            if pivot_norm <= F::zero() {
                tau.push(F::zero());
                diag.push(F::zero());
                continue;
            }

            let alpha = packed[[j, j]];
            let norm = pivot_norm.sqrt();
            let beta = if alpha >= F::zero() { -norm } else { norm };
            let t = (beta - alpha) / beta;
            let scale = F::one() / (alpha - beta);
            for i in j + 1..rows {
                packed[[i, j]] = packed[[i, j]] * scale;
            }
            packed[[j, j]] = beta;
            tau.push(t);
            diag.push(beta);

            for c in j + 1..cols {
                let mut w = packed[[j, c]];
                for i in j + 1..rows {
                    w = w + packed[[i, j]] * packed[[i, c]];
                }
                w = w * t;
                packed[[j, c]] = packed[[j, c]] - w;
                for i in j + 1..rows {
                    packed[[i, c]] = packed[[i, c]] - w * packed[[i, j]];
                }
            }
        }

        let largest = diag.first().map(|d| d.abs()).unwrap_or_else(F::zero);
        let threshold = F::rank_tolerance() * largest;
        let rank = if largest > F::zero() {
            diag.iter().take_while(|d| d.abs() >= threshold).count()
        } else {
            0
        };

        Ok(Self {
            packed,
            tau,
            perm,
            rank,
        })
    }

    pub fn rows(&self) -> usize {
        self.packed.nrows()
    }

    pub fn cols(&self) -> usize {
        self.packed.ncols()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.cols()
    }

    fn require_full_rank(&self) -> Result<()> {
        if self.is_full_rank() {
            Ok(())
        } else {
            Err(Error::RankDeficient {
                rank: self.rank,
                cols: self.cols(),
            })
        }
    }

    /// Overwrites `y` with `Qᵀ y`.
    fn apply_qt(&self, y: &mut Array1<F>) {
        let rows = self.rows();
        for (j, &t) in self.tau.iter().enumerate() {
            if t == F::zero() {
                continue;
            }
            let mut w = y[j];
            for i in j + 1..rows {
                w = w + self.packed[[i, j]] * y[i];
            }
            w = w * t;
            y[j] = y[j] - w;
            for i in j + 1..rows {
                y[i] = y[i] - w * self.packed[[i, j]];
            }
        }
    }

    fn check_len(&self, y: &ArrayView1<'_, F>) -> Result<()> {
        if y.len() != self.rows() {
            return Err(Error::Dimension(format!(
                "response has {} rows, design has {}",
                y.len(),
                self.rows()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response"));
        }
        Ok(())
    }

    /// `‖y − A x̂‖²` for the least-squares solution `x̂`.
    ///
    /// Values at round-off level relative to `‖y‖²` are returned as exactly 0.
    pub fn residual_sum_of_squares(&self, y: ArrayView1<'_, F>) -> Result<F> {
        self.require_full_rank()?;
        self.check_len(&y)?;
        let total = sq_norm(y.view());
        let mut qty = y.to_owned();
        self.apply_qt(&mut qty);
        let rss = qty.iter().skip(self.cols()).fold(F::zero(), |acc, &v| acc + v * v);
        if rss <= F::epsilon() * F::of_usize(self.rows()) * total {
            Ok(F::zero())
        } else {
            Ok(rss)
        }
    }

    /// Least-squares coefficients for one response column, in original
    /// column order.
    pub fn solve(&self, y: ArrayView1<'_, F>) -> Result<Array1<F>> {
        self.require_full_rank()?;
        self.check_len(&y)?;
        let n = self.cols();
        let mut qty = y.to_owned();
        self.apply_qt(&mut qty);
        let mut z = vec![F::zero(); n];
        for j in (0..n).rev() {
            let mut acc = qty[j];
            for l in j + 1..n {
                acc = acc - self.packed[[j, l]] * z[l];
            }
            z[j] = acc / self.packed[[j, j]];
        }
        let mut out = Array1::zeros(n);
        for (j, &orig) in self.perm.iter().enumerate() {
            out[orig] = z[j];
        }
        Ok(out)
    }

    /// Column-by-column least-squares solve of `A X ≈ Y`.
    pub fn solve_matrix(&self, y: ArrayView2<'_, F>) -> Result<Array2<F>> {
        let mut out = Array2::zeros((self.cols(), y.ncols()));
        for (i, col) in y.axis_iter(Axis(1)).enumerate() {
            out.column_mut(i).assign(&self.solve(col)?);
        }
        Ok(out)
    }
}

fn sq_norm<F: Real>(v: ArrayView1<'_, F>) -> F {
    v.iter().fold(F::zero(), |acc, &x| acc + x * x)
}

fn swap_columns<F: Real>(a: &mut Array2<F>, i: usize, j: usize) {
    for r in 0..a.nrows() {
        a.swap([r, i], [r, j]);
    }
}

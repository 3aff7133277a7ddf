//! RBF network model: design matrix, least squares, projection residuals and
//! the calibrated log marginal posterior over `(k, centres)`.
//!
//! Amplitudes and noise variances are integrated out, so a model state is
//! just the set of centres. For each output column `i` the only data-dependent
//! quantity is the residual quadratic `y_iᵀ P y_i`, where `P` projects onto the
//! orthogonal complement of the design's column space. The log posterior is
//!
//! ```text
//! log π(k, μ) = −(N/2) Σ_i ln(y_iᵀ P y_i) − C·k      (μ inside the region)
//! ```
//!
//! up to an additive constant, with `C` the criterion's calibration constant.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::criteria::Criterion;
use crate::error::{Error, Result};
use crate::linalg::PivotedQr;
use crate::scalar::Real;

/// Immutable paired inputs (N×d) and targets (N×c).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<F> {
    x: Array2<F>,
    y: Array2<F>,
}

impl<F: Real> Dataset<F> {
    pub fn new(x: Array2<F>, y: Array2<F>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 || y.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "dataset needs N, d, c >= 1 (got N={}, d={}, c={})",
                x.nrows(),
                x.ncols(),
                y.ncols()
            )));
        }
        if x.nrows() != y.nrows() {
            return Err(Error::Dimension(format!(
                "{} input rows but {} target rows",
                x.nrows(),
                y.nrows()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("inputs"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("targets"));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> ArrayView2<'_, F> {
        self.x.view()
    }

    pub fn y(&self) -> ArrayView2<'_, F> {
        self.y.view()
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.y.ncols()
    }

    /// Rows in the given order, as a new dataset.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        Self::new(self.x.select(Axis(0), rows), self.y.select(Axis(0), rows))
    }
}

/// Radial profile `φ(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisKind<F> {
    Linear,
    Cubic,
    /// `r² ln r`, with `φ(0) = 0`.
    ThinPlateSpline,
    /// Unit-peak Gaussian `exp(−r² / (2 w²))`.
    Gaussian { width: F },
}

impl<F: Real> BasisKind<F> {
    pub fn gaussian(width: F) -> Result<Self> {
        if !(width > F::zero()) || !width.is_finite() {
            return Err(Error::config("gaussian-width", "must be a positive finite number"));
        }
        Ok(BasisKind::Gaussian { width })
    }

    #[inline]
    pub fn eval(&self, r: F) -> F {
        match *self {
            BasisKind::Linear => r,
            BasisKind::Cubic => r * r * r,
            BasisKind::ThinPlateSpline => {
                if r > F::zero() {
                    r * r * r.ln()
                } else {
                    F::zero()
                }
            }
            BasisKind::Gaussian { width } => (-(r * r) / (F::of(2.0) * width * width)).exp(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BasisKind::Linear => "linear",
            BasisKind::Cubic => "cubic",
            BasisKind::ThinPlateSpline => "thin-plate-spline",
            BasisKind::Gaussian { .. } => "gaussian",
        }
    }
}

/// Distance used inside the radial profile.
#[derive(Debug, Clone, PartialEq)]
pub enum Metric<F> {
    Euclidean,
    /// `sqrt((a − b)ᵀ W (a − b))` with `W` symmetric positive definite.
    Mahalanobis(Array2<F>),
}

impl<F: Real> Metric<F> {
    pub fn mahalanobis(weights: Array2<F>) -> Result<Self> {
        let n = weights.nrows();
        if weights.ncols() != n || n == 0 {
            return Err(Error::config("metric-weights", "must be a non-empty square matrix"));
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (weights[[i, j]], weights[[j, i]]);
                if (a - b).abs() > F::epsilon() * F::of(16.0) * (a.abs() + b.abs() + F::one()) {
                    return Err(Error::config("metric-weights", "must be symmetric"));
                }
            }
        }
        // Cholesky succeeds iff the matrix is positive definite.
        let mut l = Array2::<F>::zeros((n, n));
        for j in 0..n {
            let mut d = weights[[j, j]];
            for p in 0..j {
                d = d - l[[j, p]] * l[[j, p]];
            }
            if !(d > F::zero()) {
                return Err(Error::config("metric-weights", "must be positive definite"));
            }
            l[[j, j]] = d.sqrt();
            for i in j + 1..n {
                let mut s = weights[[i, j]];
                for p in 0..j {
                    s = s - l[[i, p]] * l[[j, p]];
                }
                l[[i, j]] = s / l[[j, j]];
            }
        }
        Ok(Metric::Mahalanobis(weights))
    }

    pub fn dimension(&self) -> Option<usize> {
        match self {
            Metric::Euclidean => None,
            Metric::Mahalanobis(w) => Some(w.nrows()),
        }
    }

    #[inline]
    pub fn distance(&self, a: ArrayView1<'_, F>, b: &[F]) -> F {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .fold(F::zero(), |acc, (&u, &v)| acc + (u - v) * (u - v))
                .sqrt(),
            Metric::Mahalanobis(w) => {
                let n = b.len();
                let mut acc = F::zero();
                for i in 0..n {
                    let di = a[i] - b[i];
                    for j in 0..n {
                        acc = acc + di * w[[i, j]] * (a[j] - b[j]);
                    }
                }
                acc.max(F::zero()).sqrt()
            }
        }
    }
}

/// The `k` RBF centres of a model, each a point in `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentreSet<F> {
    dim: usize,
    coords: Vec<F>,
}

impl<F: Real> CentreSet<F> {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            coords: Vec::new(),
        }
    }

    pub fn from_rows(dim: usize, rows: &[Vec<F>]) -> Result<Self> {
        let mut set = Self::empty(dim);
        for r in rows {
            set.push(r)?;
        }
        Ok(set)
    }

    pub fn from_array(mu: ArrayView2<'_, F>) -> Self {
        Self {
            dim: mu.ncols(),
            coords: mu.iter().copied().collect(),
        }
    }

    pub fn k(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn centre(&self, j: usize) -> &[F] {
        &self.coords[j * self.dim..(j + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[F]> + '_ {
        self.coords.chunks_exact(self.dim.max(1))
    }

    pub fn push(&mut self, c: &[F]) -> Result<()> {
        if c.len() != self.dim {
            return Err(Error::Dimension(format!(
                "centre has {} coordinates, expected {}",
                c.len(),
                self.dim
            )));
        }
        self.coords.extend_from_slice(c);
        Ok(())
    }

    /// Removes centre `j`, keeping the order of the others.
    pub fn remove(&mut self, j: usize) {
        self.coords.drain(j * self.dim..(j + 1) * self.dim);
    }

    pub fn replace(&mut self, j: usize, c: &[F]) {
        self.coords[j * self.dim..(j + 1) * self.dim].copy_from_slice(c);
    }

    pub fn to_array(&self) -> Array2<F> {
        Array2::from_shape_vec((self.k(), self.dim), self.coords.clone())
            .expect("coords length is k·d")
    }
}

/// Axis-aligned box that both supports the uniform centre prior and serves as
/// the birth proposal's domain.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthRegion<F> {
    lower: Vec<F>,
    upper: Vec<F>,
}

impl<F: Real> BirthRegion<F> {
    pub fn new(lower: Vec<F>, upper: Vec<F>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Dimension("region bounds must have equal, non-zero length".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(u > l) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::Degenerate("region needs upper > lower in every dimension".into()));
        }
        Ok(Self { lower, upper })
    }

    /// Bounding box of the inputs, widened by `margin × width` on each side.
    ///
    /// A dimension where every input is equal gets unit width before the
    /// margin is applied.
    pub fn around(x: ArrayView2<'_, F>, margin: F) -> Result<Self> {
        if !(margin >= F::zero()) {
            return Err(Error::config("birth-margin", "must be nonnegative"));
        }
        let mut lower = Vec::with_capacity(x.ncols());
        let mut upper = Vec::with_capacity(x.ncols());
        for col in x.axis_iter(Axis(1)) {
            let lo = col.iter().copied().fold(F::infinity(), F::min);
            let hi = col.iter().copied().fold(F::neg_infinity(), F::max);
            let (lo, hi) = if hi > lo {
                (lo, hi)
            } else {
                (lo - F::of(0.5), hi + F::of(0.5))
            };
            let pad = margin * (hi - lo);
            lower.push(lo - pad);
            upper.push(hi + pad);
        }
        Self::new(lower, upper)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[F] {
        &self.lower
    }

    pub fn upper(&self) -> &[F] {
        &self.upper
    }

    pub fn width(&self, j: usize) -> F {
        self.upper[j] - self.lower[j]
    }

    pub fn max_width(&self) -> F {
        (0..self.dim()).map(|j| self.width(j)).fold(F::zero(), F::max)
    }

    pub fn hypervolume(&self) -> F {
        (0..self.dim()).map(|j| self.width(j)).fold(F::one(), |a, w| a * w)
    }

    pub fn contains(&self, p: &[F]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&l, &u))| v >= l && v <= u)
    }

    /// Index of the first centre lying outside the region, if any.
    pub fn first_outside(&self, centres: &CentreSet<F>) -> Option<usize> {
        centres.iter().position(|c| !self.contains(c))
    }
}

/// N×(1+d+k) regressor matrix `[1 | x | φ(‖x_t − μ_j‖)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix<F>(Array2<F>);

impl<F: Real> DesignMatrix<F> {
    /// Wraps an arbitrary matrix whose first column is all ones.
    pub fn from_matrix(m: Array2<F>) -> Result<Self> {
        if m.ncols() == 0 || m.column(0).iter().any(|&v| v != F::one()) {
            return Err(Error::Dimension("design column 0 must be all ones".into()));
        }
        Ok(Self(m))
    }

    pub fn view(&self) -> ArrayView2<'_, F> {
        self.0.view()
    }

    pub fn into_inner(self) -> Array2<F> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn factorize(&self) -> Result<PivotedQr<F>> {
        PivotedQr::new(self.0.view())
    }
}

/// Per-output residual quadratics `y_iᵀ P y_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualQuadratics<F>(Vec<F>);

impl<F: Real> ResidualQuadratics<F> {
    pub fn new(values: Vec<F>) -> Result<Self> {
        if values.iter().any(|v| !(*v >= F::zero()) || !v.is_finite()) {
            return Err(Error::NonFinite("residual quadratics"));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[F] {
        &self.0
    }

    /// Maximum-likelihood noise variances `σ̂²_i = y_iᵀ P y_i / N`.
    pub fn variances(&self, n: usize) -> Vec<F> {
        let n = F::of_usize(n);
        self.0.iter().map(|&r| r / n).collect()
    }

    /// `Σ_i ln(y_iᵀ P y_i)`, failing on an exact fit.
    pub fn log_sum(&self) -> Result<F> {
        let mut acc = F::zero();
        for (i, &r) in self.0.iter().enumerate() {
            if !(r > F::zero()) {
                return Err(Error::ZeroResidual { output: i });
            }
            acc = acc + r.ln();
        }
        Ok(acc)
    }
}

pub fn build_design_matrix<F: Real>(
    x: ArrayView2<'_, F>,
    centres: &CentreSet<F>,
    basis: &BasisKind<F>,
    metric: &Metric<F>,
) -> Result<DesignMatrix<F>> {
    let (n, d) = x.dim();
    if centres.dim() != d {
        return Err(Error::Dimension(format!(
            "centres have dimension {}, inputs have {}",
            centres.dim(),
            d
        )));
    }
    if let Some(md) = metric.dimension() {
        if md != d {
            return Err(Error::Dimension(format!("metric is {md}-dimensional, inputs are {d}")));
        }
    }
    let k = centres.k();
    let mut m = Array2::zeros((n, 1 + d + k));
    for (t, row) in x.axis_iter(Axis(0)).enumerate() {
        m[[t, 0]] = F::one();
        for j in 0..d {
            m[[t, 1 + j]] = row[j];
        }
        for (j, mu) in centres.iter().enumerate() {
            m[[t, 1 + d + j]] = basis.eval(metric.distance(row, mu));
        }
    }
    Ok(DesignMatrix(m))
}

/// Least-squares coefficients (m×c), one column per output.
pub fn fit_least_squares<F: Real>(design: &DesignMatrix<F>, y: ArrayView2<'_, F>) -> Result<Array2<F>> {
    design.factorize()?.solve_matrix(y)
}

/// `y_colᵀ P y_col`: squared norm of the least-squares residual.
pub fn residual_quadratic<F: Real>(design: &DesignMatrix<F>, y_col: ArrayView1<'_, F>) -> Result<F> {
    design.factorize()?.residual_sum_of_squares(y_col)
}

/// Residual quadratics for every output column from a single factorization.
pub fn residual_quadratics<F: Real>(
    design: &DesignMatrix<F>,
    y: ArrayView2<'_, F>,
) -> Result<ResidualQuadratics<F>> {
    let qr = design.factorize()?;
    y.axis_iter(Axis(1))
        .map(|col| qr.residual_sum_of_squares(col))
        .collect::<Result<Vec<_>>>()
        .map(ResidualQuadratics)
}

/// Noise-free network output `D(μ, x_new) · coefficients`.
pub fn predict<F: Real>(
    centres: &CentreSet<F>,
    coefficients: ArrayView2<'_, F>,
    basis: &BasisKind<F>,
    metric: &Metric<F>,
    x_new: ArrayView2<'_, F>,
) -> Result<Array2<F>> {
    let expected = 1 + x_new.ncols() + centres.k();
    if coefficients.nrows() != expected {
        return Err(Error::Dimension(format!(
            "coefficient matrix has {} rows, model needs {}",
            coefficients.nrows(),
            expected
        )));
    }
    let design = build_design_matrix(x_new, centres, basis, metric)?;
    Ok(design.view().dot(&coefficients))
}

/// Everything needed to score a set of centres against one training set.
#[derive(Debug, Clone)]
pub struct Posterior<'a, F> {
    data: &'a Dataset<F>,
    basis: BasisKind<F>,
    metric: Metric<F>,
    criterion: Criterion,
    region: BirthRegion<F>,
}

impl<'a, F: Real> Posterior<'a, F> {
    pub fn new(
        data: &'a Dataset<F>,
        basis: BasisKind<F>,
        metric: Metric<F>,
        criterion: Criterion,
        region: BirthRegion<F>,
    ) -> Result<Self> {
        let d = data.input_dim();
        if region.dim() != d {
            return Err(Error::Dimension(format!("region is {}-dimensional, inputs are {d}", region.dim())));
        }
        if criterion.samples() != data.len() || criterion.outputs() != data.output_dim() || criterion.inputs() != d {
            return Err(Error::Dimension("criterion shape does not match the dataset".into()));
        }
        if let Some(md) = metric.dimension() {
            if md != d {
                return Err(Error::Dimension(format!("metric is {md}-dimensional, inputs are {d}")));
            }
        }
        Ok(Self {
            data,
            basis,
            metric,
            criterion,
            region,
        })
    }

    pub fn data(&self) -> &'a Dataset<F> {
        self.data
    }

    pub fn basis(&self) -> &BasisKind<F> {
        &self.basis
    }

    pub fn metric(&self) -> &Metric<F> {
        &self.metric
    }

    pub fn criterion(&self) -> &Criterion {
        &self.criterion
    }

    pub fn region(&self) -> &BirthRegion<F> {
        &self.region
    }

    pub fn calibration_constant(&self) -> F {
        self.criterion.calibration_constant()
    }

    /// `N/2` as a scalar.
    pub fn half_n(&self) -> F {
        F::of_usize(self.data.len()) / F::of(2.0)
    }

    pub fn design(&self, centres: &CentreSet<F>) -> Result<DesignMatrix<F>> {
        build_design_matrix(self.data.x(), centres, &self.basis, &self.metric)
    }

    pub fn residuals(&self, centres: &CentreSet<F>) -> Result<ResidualQuadratics<F>> {
        residual_quadratics(&self.design(centres)?, self.data.y())
    }

    /// `−(N/2) Σ ln r_i − C·k` for already computed residuals.
    pub fn log_posterior_from_residuals(&self, k: usize, residuals: &ResidualQuadratics<F>) -> Result<F> {
        let log_sum = residuals.log_sum()?;
        Ok(-self.half_n() * log_sum - self.calibration_constant() * F::of_usize(k))
    }

    /// Residuals and log posterior, or the reason the state has zero
    /// posterior mass.
    pub fn score(&self, centres: &CentreSet<F>) -> Result<(ResidualQuadratics<F>, F)> {
        if let Some(index) = self.region.first_outside(centres) {
            return Err(Error::OutsideRegion { index });
        }
        let residuals = self.residuals(centres)?;
        let lp = self.log_posterior_from_residuals(centres.k(), &residuals)?;
        Ok((residuals, lp))
    }

    /// Log marginal posterior, with `−∞` for states of zero mass (outside the
    /// region, rank-deficient design or an exact fit).
    pub fn log_marginal_posterior(&self, centres: &CentreSet<F>) -> F {
        self.score(centres).map(|(_, lp)| lp).unwrap_or_else(|_| F::neg_infinity())
    }

    pub fn fit(&self, centres: &CentreSet<F>) -> Result<Array2<F>> {
        fit_least_squares(&self.design(centres)?, self.data.y())
    }
}

/// Free-function form of [`Posterior::log_marginal_posterior`].
pub fn log_marginal_posterior<F: Real>(
    data: &Dataset<F>,
    centres: &CentreSet<F>,
    basis: &BasisKind<F>,
    metric: &Metric<F>,
    region: &BirthRegion<F>,
    criterion: &Criterion,
) -> F {
    match Posterior::new(data, *basis, metric.clone(), *criterion, region.clone()) {
        Ok(p) => p.log_marginal_posterior(centres),
        Err(_) => F::neg_infinity(),
    }
}

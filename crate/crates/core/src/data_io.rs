//! Robot-arm benchmark generation, CSV datasets, train/test splits and MSE.
//!
//! CSV layout: a header `x1,…,xd,y1,…,yc` followed by one row per sample.
//! Values are written in scientific notation with 17 significant digits,
//! which round-trips every finite `f64` exactly.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::scalar::Real;

/// Joint-angle ranges of the benchmark: `x1` on `±[0.453, 1.932]`, `x2` on `[0.534, 3.142]`.
pub const X1_RANGE: (f64, f64) = (0.453, 1.932);
#[allow(clippy::approx_constant)] // the benchmark's stated bound, not π
pub const X2_RANGE: (f64, f64) = (0.534, 3.142);

/// End-effector position of the two-link arm with link lengths 2.0 and 1.3.
pub fn robot_arm_position(x1: f64, x2: f64) -> (f64, f64) {
    (
        2.0 * x1.cos() + 1.3 * (x1 + x2).cos(),
        2.0 * x1.sin() + 1.3 * (x1 + x2).sin(),
    )
}

/// `n` noisy samples of the two-link robot arm.
///
/// `x1` is uniform on `[−1.932, −0.453] ∪ [0.453, 1.932]`, `x2` uniform on
/// `[0.534, 3.142]`; each output gets independent `N(0, sigma²)` noise.
pub fn generate_robot_arm<F: Real, R: Rng + ?Sized>(n: usize, sigma: f64, rng: &mut R) -> Result<Dataset<F>> {
    if n == 0 {
        return Err(Error::config("n", "must be at least 1"));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::config("sigma", "must be a nonnegative finite number"));
    }
    let noise = Normal::new(0.0, sigma).expect("sigma validated");
    let mut x = Array2::zeros((n, 2));
    let mut y = Array2::zeros((n, 2));
    for t in 0..n {
        let magnitude = X1_RANGE.0 + rng.random::<f64>() * (X1_RANGE.1 - X1_RANGE.0);
        let x1 = if rng.random::<bool>() { magnitude } else { -magnitude };
        let x2 = X2_RANGE.0 + rng.random::<f64>() * (X2_RANGE.1 - X2_RANGE.0);
        let (p1, p2) = robot_arm_position(x1, x2);
        let (e1, e2) = (noise.sample(rng), noise.sample(rng));
        x[[t, 0]] = F::of(x1);
        x[[t, 1]] = F::of(x2);
        y[[t, 0]] = F::of(p1 + e1);
        y[[t, 1]] = F::of(p2 + e2);
    }
    Dataset::new(x, y)
}

fn header(d: usize, c: usize) -> Vec<String> {
    (1..=d).map(|j| format!("x{j}")).chain((1..=c).map(|j| format!("y{j}"))).collect()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            line,
            reason: format!("{other:?}"),
        },
    }
}

/// Counts the `x*` and `y*` columns of a dataset header: `(d, c)`.
pub fn csv_shape(path: impl AsRef<Path>) -> Result<(usize, usize)> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let head = reader.headers().map_err(|e| csv_error(path, e))?;
    let d = head.iter().filter(|h| h.trim().starts_with('x')).count();
    let c = head.iter().filter(|h| h.trim().starts_with('y')).count();
    if d == 0 || c == 0 || d + c != head.len() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            reason: "header must be x1..xd,y1..yc".into(),
        });
    }
    Ok((d, c))
}

/// Reads a dataset with `d` inputs and `c` outputs, rows in file order.
pub fn load_csv<F: Real>(path: impl AsRef<Path>, d: usize, c: usize) -> Result<Dataset<F>> {
    let path = path.as_ref();
    let parse_err = |line: u64, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let head = reader.headers().map_err(|e| csv_error(path, e))?;
    let expected = header(d, c);
    if head.iter().ne(expected.iter().map(String::as_str)) {
        return Err(parse_err(1, format!("expected header `{}`", expected.join(","))));
    }

    let mut values: Vec<F> = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != d + c {
            return Err(parse_err(line, format!("expected {} fields, found {}", d + c, record.len())));
        }
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, format!("`{field}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("`{field}` is not finite")));
            }
            values.push(F::of(v));
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(parse_err(1, "no data rows".into()));
    }
    let all = Array2::from_shape_vec((rows, d + c), values).expect("row lengths checked");
    let x = all.slice(ndarray::s![.., ..d]).to_owned();
    let y = all.slice(ndarray::s![.., d..]).to_owned();
    Dataset::new(x, y)
}

/// Writes a dataset in the layout [`load_csv`] reads.
pub fn write_csv<F: Real>(path: impl AsRef<Path>, data: &Dataset<F>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&header(data.input_dim(), data.output_dim()).join(","));
    out.push('\n');
    for (xr, yr) in data.x().rows().into_iter().zip(data.y().rows()) {
        let fields: Vec<String> = xr.iter().chain(yr.iter()).map(|v| format!("{:.16e}", v.as_f64())).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitPolicy {
    /// Train on rows `[0, n_train)`, test on the rest.
    FirstN,
    /// Permute rows with the given seed first.
    Shuffled(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub n_train: usize,
    pub policy: SplitPolicy,
}

impl SplitSpec {
    pub fn first_n(n_train: usize) -> Self {
        Self {
            n_train,
            policy: SplitPolicy::FirstN,
        }
    }
}

pub fn split<F: Real>(data: &Dataset<F>, spec: SplitSpec) -> Result<(Dataset<F>, Dataset<F>)> {
    let n = data.len();
    if spec.n_train == 0 || spec.n_train >= n {
        return Err(Error::config(
            "n-train",
            format!("must satisfy 1 <= n-train < N = {n}, got {}", spec.n_train),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    if let SplitPolicy::Shuffled(seed) = spec.policy {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let (train, test) = order.split_at(spec.n_train);
    Ok((data.select_rows(train)?, data.select_rows(test)?))
}

/// Grand mean of squared differences over all `M·c` entries.
pub fn mean_squared_error<F: Real>(predictions: ArrayView2<'_, F>, targets: ArrayView2<'_, F>) -> Result<F> {
    if predictions.dim() != targets.dim() {
        return Err(Error::Dimension(format!(
            "predictions are {:?}, targets are {:?}",
            predictions.dim(),
            targets.dim()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Dimension("mean squared error of an empty matrix".into()));
    }
    let total = predictions
        .iter()
        .zip(targets.iter())
        .fold(F::zero(), |acc, (&p, &t)| acc + (p - t) * (p - t));
    Ok(total / F::of_usize(predictions.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn arm_surface_points() {
        let (a, b) = robot_arm_position(0.0, 0.0);
        assert_eq!((a, b), (3.3, 0.0));
        let (a, b) = robot_arm_position(FRAC_PI_2, 0.0);
        assert!(a.abs() < 1e-15);
        assert_relative_eq!(b, 3.3, epsilon = 1e-15);
    }

    #[test]
    fn noise_free_samples_lie_on_surface() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data: Dataset<f64> = generate_robot_arm(500, 0.0, &mut rng).unwrap();
        for (x, y) in data.x().rows().into_iter().zip(data.y().rows()) {
            let (p1, p2) = robot_arm_position(x[0], x[1]);
            assert!((y[0] - p1).abs() < 1e-12 && (y[1] - p2).abs() < 1e-12);
            assert!(x[0].abs() >= X1_RANGE.0 && x[0].abs() <= X1_RANGE.1);
            assert!(x[1] >= X2_RANGE.0 && x[1] <= X2_RANGE.1);
        }
    }

    #[test]
    fn noise_variance_matches_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let data: Dataset<f64> = generate_robot_arm(100_000, 0.05, &mut rng).unwrap();
        let resid: Vec<f64> = data
            .x()
            .rows()
            .into_iter()
            .zip(data.y().rows())
            .map(|(x, y)| y[0] - robot_arm_position(x[0], x[1]).0)
            .collect();
        let mean = resid.iter().sum::<f64>() / resid.len() as f64;
        let var = resid.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (resid.len() - 1) as f64;
        assert!((var / 0.0025 - 1.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn split_sizes_and_partition() {
        let x = Array2::from_shape_fn((400, 1), |(t, _)| t as f64);
        let data = Dataset::new(x.clone(), x).unwrap();
        let (train, test) = split(&data, SplitSpec::first_n(200)).unwrap();
        assert_eq!((train.len(), test.len()), (200, 200));
        assert_eq!(train.x()[[0, 0]], 0.0);
        assert_eq!(test.x()[[0, 0]], 200.0);
        let (_, test) = split(&data, SplitSpec::first_n(399)).unwrap();
        assert_eq!(test.len(), 1);
        assert!(split(&data, SplitSpec::first_n(400)).is_err());

        let spec = SplitSpec {
            n_train: 100,
            policy: SplitPolicy::Shuffled(7),
        };
        let (a, _) = split(&data, spec).unwrap();
        let (b, _) = split(&data, spec).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.x()[[0, 0]], 0.0);
    }

    #[test]
    fn mse_definition() {
        let p = array![[1.0, 2.0], [3.0, 4.0]];
        assert_eq!(mean_squared_error(p.view(), p.view()).unwrap(), 0.0);
        assert_relative_eq!(
            mean_squared_error(array![[0.1]].view(), array![[0.0]].view()).unwrap(),
            0.01,
            epsilon = 1e-17
        );
        let t = array![[1.5, 2.0], [3.0, 3.0]];
        let per_output = [0.125, 0.5];
        assert_relative_eq!(
            mean_squared_error(p.view(), t.view()).unwrap(),
            (per_output[0] + per_output[1]) / 2.0
        );
        assert!(mean_squared_error(p.view(), array![[1.0, 2.0]].view()).is_err());
    }

    #[test]
    fn csv_well_formed_and_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.csv");
        std::fs::write(&good, "x1,y1,y2\n0.5,1,2\n-1.0,3,4\n").unwrap();
        assert_eq!(csv_shape(&good).unwrap(), (1, 2));
        let data: Dataset<f64> = load_csv(&good, 1, 2).unwrap();
        assert_eq!(data.len(), 2);
        assert_eq!(data.x()[[1, 0]], -1.0);
        assert_eq!(data.y()[[1, 1]], 4.0);

        let short = dir.path().join("short.csv");
        std::fs::write(&short, "x1,y1,y2\n0.5,1,2\n-1.0,3\n").unwrap();
        let err = load_csv::<f64>(&short, 1, 2).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");

        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "x1,y1\n0.5,abc\n").unwrap();
        assert!(matches!(load_csv::<f64>(&bad, 1, 1), Err(Error::Parse { line: 2, .. })));

        let inf = dir.path().join("inf.csv");
        std::fs::write(&inf, "x1,y1\n0.5,inf\n").unwrap();
        assert!(load_csv::<f64>(&inf, 1, 1).is_err());

        assert!(matches!(load_csv::<f64>(dir.path().join("missing.csv"), 1, 1), Err(Error::Io { .. })));
        assert!(load_csv::<f64>(&good, 2, 1).is_err());
    }
}

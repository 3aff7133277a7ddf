//! Simulated annealing driven by the reversible-jump kernel.
//!
//! Each iteration draws `z*` from the kernel (which is reversible with respect
//! to the posterior `π`) and then accepts it with probability
//! `min{1, (π(z*)/π(z))^(1/T − 1)}`: the proposal terms of the annealed
//! Metropolis–Hastings ratio cancel against the kernel's reversibility, so
//! only the tempered posterior ratio remains.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::criteria::{Criterion, CriterionKind};
use crate::data_io::mean_squared_error;
use crate::error::{Error, Result};
use crate::model::{predict, BasisKind, BirthRegion, CentreSet, Dataset, Metric, Posterior};
use crate::moves::{
    rjmcmc_step, MoveConfig, MoveContext, MoveKind, MoveProbabilities, RatioMode, SamplerState, UpdateParams,
};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind<F> {
    /// `T0 · γ^i`
    Geometric { t0: F, gamma: F },
    /// `T0 / ln(i + e)`
    Logarithmic { t0: F },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoolingSchedule<F> {
    pub kind: ScheduleKind<F>,
    pub floor: F,
}

impl<F: Real> CoolingSchedule<F> {
    pub fn geometric(t0: F, gamma: F, floor: F) -> Result<Self> {
        let s = Self {
            kind: ScheduleKind::Geometric { t0, gamma },
            floor,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn logarithmic(t0: F, floor: F) -> Result<Self> {
        let s = Self {
            kind: ScheduleKind::Logarithmic { t0 },
            floor,
        };
        s.validate()?;
        Ok(s)
    }

    /// Geometric cooling from `t0` that reaches `floor` at 80% of `iterations`.
    pub fn reaching_floor(t0: F, floor: F, iterations: usize) -> Result<Self> {
        let steps = ((iterations as f64) * 0.8).round().max(1.0);
        let ratio = (floor / t0).as_f64();
        let gamma = if ratio < 1.0 {
            F::of(ratio.powf(1.0 / steps))
        } else {
            F::of(0.5)
        };
        Self::geometric(t0, gamma, floor)
    }

    /// Constant temperature `t`.
    pub fn constant(t: F) -> Result<Self> {
        Self::geometric(t, F::of(0.5), t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.floor > F::zero()) || !self.floor.is_finite() {
            return Err(Error::config("floor", "must be a positive finite number"));
        }
        let t0 = match self.kind {
            ScheduleKind::Geometric { t0, gamma } => {
                if !(gamma > F::zero() && gamma < F::one()) {
                    return Err(Error::config("gamma", "must lie strictly between 0 and 1"));
                }
                t0
            }
            ScheduleKind::Logarithmic { t0 } => t0,
        };
        if !(t0 > F::zero()) || !t0.is_finite() {
            return Err(Error::config("t0", "must be a positive finite number"));
        }
        Ok(())
    }

    pub fn temperature(&self, i: usize) -> F {
        let raw = match self.kind {
            ScheduleKind::Geometric { t0, gamma } => t0 * gamma.powf(F::of_usize(i)),
            ScheduleKind::Logarithmic { t0 } => t0 / (F::of_usize(i) + F::of(std::f64::consts::E)).ln(),
        };
        raw.max(self.floor)
    }
}

/// Annealed acceptance of `z*` over `z` at temperature `t`.
///
/// A `−∞` candidate is always rejected; a non-negative exponent is accepted
/// without consuming randomness.
pub fn annealed_accept<F: Real, R: Rng + ?Sized>(candidate: F, current: F, t: F, rng: &mut R) -> bool {
    if candidate == F::neg_infinity() {
        return false;
    }
    let exponent = (F::one() / t - F::one()) * (candidate - current);
    if exponent >= F::zero() {
        return true;
    }
    let u: f64 = rng.random();
    u < exponent.as_f64().exp()
}

/// One row of the iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord<F> {
    pub iteration: usize,
    pub temperature: F,
    pub k: usize,
    pub log_post: F,
    pub best_log_post: F,
    pub move_kind: MoveKind,
    pub inner_accepted: bool,
    pub outer_accepted: bool,
    pub train_mse: F,
    pub test_mse: Option<F>,
}

#[derive(Debug, Clone)]
pub struct FitResult<F> {
    /// Highest-posterior state visited.
    pub map_state: SamplerState<F>,
    /// Iteration at which the MAP state was first reached (0 = initial state).
    pub map_iteration: usize,
    /// Least-squares coefficients at the MAP state, `(1+d+k) × c`.
    pub coefficients: Array2<F>,
    pub train_mse: F,
    pub test_mse: Option<F>,
    pub trace: Vec<TraceRecord<F>>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealConfig<F> {
    pub iterations: usize,
    pub schedule: CoolingSchedule<F>,
    pub criterion: CriterionKind,
    pub basis: BasisKind<F>,
    pub metric: Metric<F>,
    /// Birth region margin as a fraction of the input range per side.
    pub birth_margin: F,
    /// Split displacement scale; `None` uses 5% of the region's longest side.
    pub zeta: Option<F>,
    pub kmax: usize,
    pub ratio_mode: RatioMode,
    pub probs: MoveProbabilities,
    pub update: UpdateParams,
    /// Number of centres in the initial state, placed at distinct random
    /// training inputs.
    pub init_k: usize,
    pub record_test_mse: bool,
}

impl<F: Real> AnnealConfig<F> {
    /// Cubic bases, MDL, geometric cooling to 0.01 at 80% of the run.
    pub fn new(iterations: usize) -> Self {
        Self {
            iterations,
            schedule: CoolingSchedule::reaching_floor(F::one(), F::of(0.01), iterations)
                .expect("default schedule is valid"),
            criterion: CriterionKind::Mdl,
            basis: BasisKind::Cubic,
            metric: Metric::Euclidean,
            birth_margin: F::of(0.1),
            zeta: None,
            kmax: 50,
            ratio_mode: RatioMode::default(),
            probs: MoveProbabilities::default(),
            update: UpdateParams::default(),
            init_k: 1,
            record_test_mse: true,
        }
    }

    pub fn region(&self, train: &Dataset<F>) -> Result<BirthRegion<F>> {
        BirthRegion::around(train.x(), self.birth_margin)
    }

    /// Move configuration with ζ resolved against the region.
    pub fn resolved_moves(&self, region: &BirthRegion<F>) -> MoveConfig<F> {
        MoveConfig {
            zeta: self.zeta.unwrap_or_else(|| F::of(0.05) * region.max_width()),
            kmax: self.kmax,
            ratio_mode: self.ratio_mode,
            probs: self.probs,
            update: self.update,
        }
    }

    pub fn posterior<'a>(&self, train: &'a Dataset<F>) -> Result<Posterior<'a, F>> {
        Posterior::new(
            train,
            self.basis,
            self.metric.clone(),
            Criterion::for_dataset(self.criterion, train),
            self.region(train)?,
        )
    }
}

fn train_mse_from_residuals<F: Real>(state: &SamplerState<F>, n: usize) -> F {
    let total = state.residuals.values().iter().fold(F::zero(), |a, &r| a + r);
    total / F::of_usize(n * state.residuals.values().len())
}

fn initial_state<F: Real, R: Rng + ?Sized>(
    posterior: &Posterior<'_, F>,
    init_k: usize,
    rng: &mut R,
) -> Result<SamplerState<F>> {
    let data = posterior.data();
    let empty = CentreSet::empty(data.input_dim());
    SamplerState::new(posterior, empty.clone())
        .map_err(|e| Error::Degenerate(format!("linear-regression (k = 0) model is unusable: {e}")))?;
    let picks = rand::seq::index::sample(rng, data.len(), init_k.min(data.len()));
    let mut centres = empty;
    for t in picks.iter() {
        let row: Vec<F> = data.x().row(t).to_vec();
        centres.push(&row)?;
    }
    SamplerState::new(posterior, centres)
        .map_err(|e| Error::Degenerate(format!("initial state with {init_k} centres is unusable: {e}")))
}

/// Runs one annealing chain from `seed`.
pub fn run_annealing<F: Real>(
    train: &Dataset<F>,
    test: Option<&Dataset<F>>,
    config: &AnnealConfig<F>,
    seed: u64,
) -> Result<FitResult<F>> {
    config.schedule.validate()?;
    let posterior = config.posterior(train)?;
    let moves = config.resolved_moves(posterior.region());
    moves.validate()?;
    if config.init_k > moves.kmax {
        return Err(Error::config("init-k", "must not exceed kmax"));
    }
    if config.init_k > train.len() {
        return Err(Error::config("init-k", "must not exceed the number of training rows"));
    }
    if let Some(t) = test {
        if t.input_dim() != train.input_dim() || t.output_dim() != train.output_dim() {
            return Err(Error::Dimension("test set shape differs from training set".into()));
        }
    }
    let ctx = MoveContext::new(&posterior, &moves);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut state = initial_state(&posterior, config.init_k, &mut rng)?;
    let mut best = state.clone();
    let mut map_iteration = 0;
    let mut trace = Vec::with_capacity(config.iterations);

    for i in 1..=config.iterations {
        let t = config.schedule.temperature(i);
        let outcome = rjmcmc_step(&state, &ctx, &mut rng);
        let outer = annealed_accept(outcome.proposed.log_post, state.log_post, t, &mut rng);
        if outer {
            state = outcome.proposed;
        }
        if state.log_post > best.log_post {
            best = state.clone();
            map_iteration = i;
        }
        let test_mse = match test {
            Some(test) if config.record_test_mse => {
                let coef = posterior.fit(&state.centres)?;
                let pred = predict(&state.centres, coef.view(), posterior.basis(), posterior.metric(), test.x())?;
                Some(mean_squared_error(pred.view(), test.y())?)
            }
            _ => None,
        };
        trace.push(TraceRecord {
            iteration: i,
            temperature: t,
            k: state.k(),
            log_post: state.log_post,
            best_log_post: best.log_post,
            move_kind: outcome.kind,
            inner_accepted: outcome.inner_accepted,
            outer_accepted: outer,
            train_mse: train_mse_from_residuals(&state, train.len()),
            test_mse,
        });
    }

    let coefficients = posterior.fit(&best.centres)?;
    let evaluate = |data: &Dataset<F>| -> Result<F> {
        let pred = predict(&best.centres, coefficients.view(), posterior.basis(), posterior.metric(), data.x())?;
        mean_squared_error(pred.view(), data.y())
    };
    let train_mse = evaluate(train)?;
    let test_mse = test.map(evaluate).transpose()?;
    Ok(FitResult {
        map_state: best,
        map_iteration,
        coefficients,
        train_mse,
        test_mse,
        trace,
        seed,
    })
}

/// Runs `chains` independent chains on seeds `seed, seed+1, …` concurrently.
///
/// Results come back in chain order; use [`best_chain`] to pick the MAP.
pub fn run_multistart<F: Real>(
    train: &Dataset<F>,
    test: Option<&Dataset<F>>,
    config: &AnnealConfig<F>,
    seed: u64,
    chains: usize,
) -> Result<Vec<FitResult<F>>> {
    if chains == 0 {
        return Err(Error::config("chains", "must be at least 1"));
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..chains as u64)
            .map(|s| scope.spawn(move || run_annealing(train, test, config, seed.wrapping_add(s))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("annealing chain panicked"))
            .collect()
    })
}

/// Index of the chain with the highest MAP log posterior, lowest index on ties.
pub fn best_chain<F: Real>(results: &[FitResult<F>]) -> Option<usize> {
    results
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, F)>, (i, r)| match best {
            Some((_, lp)) if lp >= r.map_state.log_post => best,
            _ => Some((i, r.map_state.log_post)),
        })
        .map(|(i, _)| i)
}

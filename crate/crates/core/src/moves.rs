//! Reversible-jump proposals over `(k, centres)`.
//!
//! Five moves make up the kernel: birth, death, split, merge and update. Each
//! move proposes a candidate, computes its log acceptance ratio and accepts
//! or rejects it, so one call to [`rjmcmc_step`] is one draw from a kernel
//! that leaves the calibrated posterior invariant. All ratios are handled in
//! the log domain; `(yᵀPy)^{N/2}` overflows long before N = 200.
//!
//! Centre bookkeeping is order-preserving: birth appends, death removes in
//! place, split overwrites the chosen centre with `μ − uζ` and appends
//! `μ + uζ`, and merge writes the midpoint at the lower of the two indices and
//! removes the higher one. Birth followed by death of the appended centre
//! (or split followed by merge of the produced pair) therefore restores the
//! original ordering.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CentreSet, Posterior, ResidualQuadratics};
use crate::scalar::Real;

pub use crate::model::BirthRegion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    Birth,
    Death,
    Split,
    Merge,
    Update,
}

impl MoveKind {
    pub const ALL: [MoveKind; 5] = [
        MoveKind::Birth,
        MoveKind::Death,
        MoveKind::Split,
        MoveKind::Merge,
        MoveKind::Update,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MoveKind::Birth => "birth",
            MoveKind::Death => "death",
            MoveKind::Split => "split",
            MoveKind::Merge => "merge",
            MoveKind::Update => "update",
        }
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How split/merge ratios treat the displacement scale in `d` dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioMode {
    /// Includes the full Jacobian `(2ζ)^d` of `(μ, u) ↦ (μ − uζ, μ + uζ)`.
    #[default]
    Derived,
    /// Uses `ζ^d` alone, without the factor `2^d`.
    AsPrinted,
}

impl FromStr for RatioMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "derived" => Ok(RatioMode::Derived),
            "as-printed" => Ok(RatioMode::AsPrinted),
            other => Err(Error::config("ratio-mode", format!("expected derived or as-printed, got `{other}`"))),
        }
    }
}

impl fmt::Display for RatioMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RatioMode::Derived => "derived",
            RatioMode::AsPrinted => "as-printed",
        })
    }
}

/// Base move-selection probabilities, before boundary adjustment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveProbabilities {
    pub birth: f64,
    pub death: f64,
    pub split: f64,
    pub merge: f64,
    pub update: f64,
}

impl Default for MoveProbabilities {
    fn default() -> Self {
        Self {
            birth: 0.2,
            death: 0.2,
            split: 0.2,
            merge: 0.2,
            update: 0.2,
        }
    }
}

impl MoveProbabilities {
    /// Order: birth, death, split, merge, update.
    pub fn new(p: [f64; 5]) -> Result<Self> {
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::config("move-probs", "entries must be finite and nonnegative"));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config("move-probs", format!("entries must sum to 1, got {total}")));
        }
        Ok(Self {
            birth: p[0],
            death: p[1],
            split: p[2],
            merge: p[3],
            update: p[4],
        })
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.birth, self.death, self.split, self.merge, self.update]
    }

    /// Probabilities at order `k`: impossible moves are zeroed and the rest
    /// rescaled to sum to one.
    pub fn at(&self, k: usize, kmax: usize) -> [f64; 5] {
        let mut p = self.as_array();
        if k == 0 {
            p[1] = 0.0;
            p[2] = 0.0;
            p[3] = 0.0;
        }
        if k <= 1 {
            p[3] = 0.0;
        }
        if k >= kmax {
            p[0] = 0.0;
            p[2] = 0.0;
        }
        let total: f64 = p.iter().sum();
        if total > 0.0 {
            p.iter_mut().for_each(|v| *v /= total);
        } else {
            p = [0.0, 0.0, 0.0, 0.0, 1.0];
        }
        p
    }

    /// Move chosen by a uniform draw `u` against cumulative thresholds
    /// `b, b+d, b+d+s, b+d+s+m`, falling through to update.
    pub fn select(&self, u: f64, k: usize, kmax: usize) -> MoveKind {
        let p = self.at(k, kmax);
        let mut acc = 0.0;
        for (kind, prob) in MoveKind::ALL.iter().take(4).zip(p) {
            acc += prob;
            if prob > 0.0 && u <= acc {
                return *kind;
            }
        }
        MoveKind::Update
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateParams {
    /// Random-walk standard deviation per dimension, as a fraction of the
    /// region's width in that dimension.
    pub rw_step_frac: f64,
    /// Probability of redrawing the centre uniformly over the region instead
    /// of taking a random-walk step.
    pub global_prop_prob: f64,
}

impl Default for UpdateParams {
    fn default() -> Self {
        Self {
            rw_step_frac: 0.1,
            global_prop_prob: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoveConfig<F> {
    /// Split displacement scale ζ; merges require `‖μ₁ − μ₂‖ < 2ζ`.
    pub zeta: F,
    pub kmax: usize,
    pub ratio_mode: RatioMode,
    pub probs: MoveProbabilities,
    pub update: UpdateParams,
}

impl<F: Real> MoveConfig<F> {
    /// Defaults for a region: ζ is 5% of its longest side, `kmax = 50`.
    pub fn for_region(region: &BirthRegion<F>) -> Self {
        Self {
            zeta: F::of(0.05) * region.max_width(),
            kmax: 50,
            ratio_mode: RatioMode::Derived,
            probs: MoveProbabilities::default(),
            update: UpdateParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.zeta > F::zero()) || !self.zeta.is_finite() {
            return Err(Error::config("zeta", "must be a positive finite number"));
        }
        if self.kmax == 0 {
            return Err(Error::config("kmax", "must be at least 1"));
        }
        MoveProbabilities::new(self.probs.as_array())?;
        let u = self.update;
        if !(u.rw_step_frac > 0.0) || !u.rw_step_frac.is_finite() {
            return Err(Error::config("rw-step-frac", "must be a positive finite number"));
        }
        if !(0.0..=1.0).contains(&u.global_prop_prob) {
            return Err(Error::config("global-prop-prob", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Chain state `(k, μ)` with its cached residuals and log posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerState<F> {
    pub centres: CentreSet<F>,
    pub residuals: ResidualQuadratics<F>,
    pub log_post: F,
}

impl<F: Real> SamplerState<F> {
    /// Scores `centres`; fails if the state has zero posterior mass.
    pub fn new(posterior: &Posterior<'_, F>, centres: CentreSet<F>) -> Result<Self> {
        let (residuals, log_post) = posterior.score(&centres)?;
        Ok(Self {
            centres,
            residuals,
            log_post,
        })
    }

    pub fn k(&self) -> usize {
        self.centres.k()
    }
}

/// Why a proposal was rejected without an acceptance draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AutoReject {
    /// The move is not available at the current `k`.
    NotAllowed,
    /// Candidate centre outside the region.
    OutsideRegion,
    /// Candidate design is rank deficient or fits a column exactly.
    ZeroMass,
    /// Split pair would not be each other's nearest neighbours.
    SplitConstraint,
    /// Merge pair further apart than `2ζ`.
    MergeGate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoveOutcome<F> {
    pub kind: MoveKind,
    /// Kernel output: the candidate if accepted, else the input state.
    pub proposed: SamplerState<F>,
    /// Log acceptance ratio; `−∞` for automatic rejections.
    pub log_inner_ratio: F,
    pub inner_accepted: bool,
    pub auto_rejected: Option<AutoReject>,
}

impl<F: Real> MoveOutcome<F> {
    fn rejected(kind: MoveKind, state: &SamplerState<F>, why: AutoReject) -> Self {
        Self {
            kind,
            proposed: state.clone(),
            log_inner_ratio: F::neg_infinity(),
            inner_accepted: false,
            auto_rejected: Some(why),
        }
    }
}

/// Shared, read-only inputs for every move.
#[derive(Debug, Clone, Copy)]
pub struct MoveContext<'p, 'a, F> {
    pub posterior: &'p Posterior<'a, F>,
    pub config: &'p MoveConfig<F>,
}

impl<'p, 'a, F: Real> MoveContext<'p, 'a, F> {
    pub fn new(posterior: &'p Posterior<'a, F>, config: &'p MoveConfig<F>) -> Self {
        Self { posterior, config }
    }

    fn region(&self) -> &BirthRegion<F> {
        self.posterior.region()
    }

    /// `ln 𝔉`: log hypervolume of the birth region.
    fn log_volume(&self) -> F {
        self.region().hypervolume().ln()
    }

    /// `d ln ζ`, plus `d ln 2` in derived mode.
    fn log_split_scale(&self) -> F {
        let d = F::of_usize(self.region().dim());
        let base = d * self.config.zeta.ln();
        match self.config.ratio_mode {
            RatioMode::Derived => base + d * F::of(2.0).ln(),
            RatioMode::AsPrinted => base,
        }
    }

    /// `(N/2) Σ_i ln(r_i(from) / r_i(to))`.
    pub fn log_residual_ratio(&self, from: &ResidualQuadratics<F>, to: &ResidualQuadratics<F>) -> F {
        let half_n = self.posterior.half_n();
        from.values()
            .iter()
            .zip(to.values())
            .fold(F::zero(), |acc, (&a, &b)| acc + half_n * (a.ln() - b.ln()))
    }

    /// Log of the non-likelihood factor of a move's ratio when leaving order `k`.
    pub fn log_dimension_factor(&self, kind: MoveKind, k: usize) -> F {
        let c = self.posterior.calibration_constant();
        let ln = |n: usize| F::of_usize(n).ln();
        match kind {
            // 𝔉 e^{−C} / (k+1)
            MoveKind::Birth => self.log_volume() - c - ln(k + 1),
            // k e^{C} / 𝔉
            MoveKind::Death => ln(k) + c - self.log_volume(),
            // k ζ^d [2^d] e^{−C} / (k+1)
            MoveKind::Split => ln(k) + self.log_split_scale() - c - ln(k + 1),
            // k e^{C} / (ζ^d [2^d] (k−1))
            MoveKind::Merge => ln(k) + c - self.log_split_scale() - ln(k - 1),
            MoveKind::Update => F::zero(),
        }
    }

    /// Full log acceptance ratio for a move from a state of order `k`.
    pub fn log_acceptance_ratio(
        &self,
        kind: MoveKind,
        k: usize,
        from: &ResidualQuadratics<F>,
        to: &ResidualQuadratics<F>,
    ) -> F {
        self.log_residual_ratio(from, to) + self.log_dimension_factor(kind, k)
    }

    /// Scores a candidate and runs the Metropolis–Hastings accept step.
    fn finish<R: Rng + ?Sized>(
        &self,
        kind: MoveKind,
        state: &SamplerState<F>,
        candidate: CentreSet<F>,
        rng: &mut R,
    ) -> MoveOutcome<F> {
        let (residuals, log_post) = match self.posterior.score(&candidate) {
            Ok(scored) => scored,
            Err(Error::OutsideRegion { .. }) => {
                return MoveOutcome::rejected(kind, state, AutoReject::OutsideRegion)
            }
            Err(_) => return MoveOutcome::rejected(kind, state, AutoReject::ZeroMass),
        };
        let log_ratio = self.log_acceptance_ratio(kind, state.k(), &state.residuals, &residuals);
        let u: f64 = rng.random();
        let accepted = u < log_ratio.as_f64().exp();
        MoveOutcome {
            kind,
            proposed: if accepted {
                SamplerState {
                    centres: candidate,
                    residuals,
                    log_post,
                }
            } else {
                state.clone()
            },
            log_inner_ratio: log_ratio,
            inner_accepted: accepted,
            auto_rejected: None,
        }
    }
}

fn sq_dist<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&u, &v)| acc + (u - v) * (u - v))
}

/// Index of the Euclidean nearest neighbour of centre `i`, lowest index on ties.
pub fn nearest_neighbour<F: Real>(centres: &CentreSet<F>, i: usize) -> Option<usize> {
    let target = centres.centre(i);
    let mut best: Option<(usize, F)> = None;
    for (j, c) in centres.iter().enumerate() {
        if j == i {
            continue;
        }
        let d = sq_dist(target, c);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((j, d));
        }
    }
    best.map(|(j, _)| j)
}

/// `centres` plus `new` appended.
pub fn birth_candidate<F: Real>(centres: &CentreSet<F>, new: &[F]) -> Result<CentreSet<F>> {
    let mut out = centres.clone();
    out.push(new)?;
    Ok(out)
}

/// `centres` without centre `j`.
pub fn death_candidate<F: Real>(centres: &CentreSet<F>, j: usize) -> CentreSet<F> {
    let mut out = centres.clone();
    out.remove(j);
    out
}

/// Splits centre `j` into `μ − u∘ζ` (in place) and `μ + u∘ζ` (appended).
///
/// Returns `None` unless the two new centres are closer to each other than
/// either is to any remaining centre and lie within the merge gate `2ζ`,
/// which is what makes the split reachable from the reverse merge.
pub fn split_candidate<F: Real>(centres: &CentreSet<F>, j: usize, u: &[F], zeta: F) -> Option<CentreSet<F>> {
    let mu = centres.centre(j);
    let left: Vec<F> = mu.iter().zip(u).map(|(&m, &v)| m - v * zeta).collect();
    let right: Vec<F> = mu.iter().zip(u).map(|(&m, &v)| m + v * zeta).collect();
    let pair = sq_dist(&left, &right);
    if !(pair.sqrt() < F::of(2.0) * zeta) {
        return None;
    }
    for (l, other) in centres.iter().enumerate() {
        if l == j {
            continue;
        }
        if !(pair < sq_dist(&left, other)) || !(pair < sq_dist(&right, other)) {
            return None;
        }
    }
    let mut out = centres.clone();
    out.replace(j, &left);
    out.push(&right).ok()?;
    Some(out)
}

/// Merges centre `i` with its nearest neighbour at their midpoint, if they
/// are closer than `2ζ`. The midpoint takes the lower index.
pub fn merge_candidate<F: Real>(centres: &CentreSet<F>, i: usize, zeta: F) -> Option<CentreSet<F>> {
    let j = nearest_neighbour(centres, i)?;
    let (a, b) = (centres.centre(i), centres.centre(j));
    if !(sq_dist(a, b).sqrt() < F::of(2.0) * zeta) {
        return None;
    }
    let mid: Vec<F> = a.iter().zip(b).map(|(&p, &q)| (p + q) / F::of(2.0)).collect();
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let mut out = centres.clone();
    out.replace(lo, &mid);
    out.remove(hi);
    Some(out)
}

fn uniform_in_region<F: Real, R: Rng + ?Sized>(region: &BirthRegion<F>, rng: &mut R) -> Vec<F> {
    (0..region.dim())
        .map(|j| {
            let u: f64 = rng.random();
            region.lower()[j] + F::of(u) * region.width(j)
        })
        .collect()
}

pub fn propose_birth<F: Real, R: Rng + ?Sized>(
    state: &SamplerState<F>,
    ctx: &MoveContext<'_, '_, F>,
    rng: &mut R,
) -> MoveOutcome<F> {
    if state.k() >= ctx.config.kmax {
        return MoveOutcome::rejected(MoveKind::Birth, state, AutoReject::NotAllowed);
    }
    let new = uniform_in_region(ctx.region(), rng);
    let candidate = birth_candidate(&state.centres, &new).expect("region and centres share dimension");
    ctx.finish(MoveKind::Birth, state, candidate, rng)
}

pub fn propose_death<F: Real, R: Rng + ?Sized>(
    state: &SamplerState<F>,
    ctx: &MoveContext<'_, '_, F>,
    rng: &mut R,
) -> MoveOutcome<F> {
    if state.k() == 0 {
        return MoveOutcome::rejected(MoveKind::Death, state, AutoReject::NotAllowed);
    }
    let j = rng.random_range(0..state.k());
    ctx.finish(MoveKind::Death, state, death_candidate(&state.centres, j), rng)
}

pub fn propose_split<F: Real, R: Rng + ?Sized>(
    state: &SamplerState<F>,
    ctx: &MoveContext<'_, '_, F>,
    rng: &mut R,
) -> MoveOutcome<F> {
    let k = state.k();
    if k == 0 || k >= ctx.config.kmax {
        return MoveOutcome::rejected(MoveKind::Split, state, AutoReject::NotAllowed);
    }
    let j = rng.random_range(0..k);
    let u: Vec<F> = (0..state.centres.dim()).map(|_| F::of(rng.random::<f64>())).collect();
    match split_candidate(&state.centres, j, &u, ctx.config.zeta) {
        Some(candidate) => ctx.finish(MoveKind::Split, state, candidate, rng),
        None => MoveOutcome::rejected(MoveKind::Split, state, AutoReject::SplitConstraint),
    }
}

pub fn propose_merge<F: Real, R: Rng + ?Sized>(
    state: &SamplerState<F>,
    ctx: &MoveContext<'_, '_, F>,
    rng: &mut R,
) -> MoveOutcome<F> {
    let k = state.k();
    if k < 2 {
        return MoveOutcome::rejected(MoveKind::Merge, state, AutoReject::NotAllowed);
    }
    let i = rng.random_range(0..k);
    match merge_candidate(&state.centres, i, ctx.config.zeta) {
        Some(candidate) => ctx.finish(MoveKind::Merge, state, candidate, rng),
        None => MoveOutcome::rejected(MoveKind::Merge, state, AutoReject::MergeGate),
    }
}

/// Moves one uniformly chosen centre, by a Gaussian random walk or, with
/// probability `global_prop_prob`, by a uniform redraw over the region.
///
/// Both branches leave the ratio as the plain posterior ratio: the walk is
/// symmetric, and the uniform redraw has the same density as the uniform
/// prior on the region, so the proposal terms cancel.
pub fn propose_update<F: Real, R: Rng + ?Sized>(
    state: &SamplerState<F>,
    ctx: &MoveContext<'_, '_, F>,
    rng: &mut R,
) -> MoveOutcome<F> {
    let k = state.k();
    if k == 0 {
        return MoveOutcome {
            kind: MoveKind::Update,
            proposed: state.clone(),
            log_inner_ratio: F::zero(),
            inner_accepted: true,
            auto_rejected: None,
        };
    }
    let j = rng.random_range(0..k);
    let region = ctx.region();
    let params = ctx.config.update;
    let global: f64 = rng.random();
    let moved: Vec<F> = if global < params.global_prop_prob {
        uniform_in_region(region, rng)
    } else {
        state
            .centres
            .centre(j)
            .iter()
            .enumerate()
            .map(|(dim, &c)| {
                let sd = params.rw_step_frac * region.width(dim).as_f64();
                let step = Normal::new(0.0, sd).expect("positive step").sample(rng);
                c + F::of(step)
            })
            .collect()
    };
    if !region.contains(&moved) {
        return MoveOutcome::rejected(MoveKind::Update, state, AutoReject::OutsideRegion);
    }
    let mut candidate = state.centres.clone();
    candidate.replace(j, &moved);
    ctx.finish(MoveKind::Update, state, candidate, rng)
}

/// One application of the reversible-jump kernel.
pub fn rjmcmc_step<F: Real, R: Rng + ?Sized>(
    state: &SamplerState<F>,
    ctx: &MoveContext<'_, '_, F>,
    rng: &mut R,
) -> MoveOutcome<F> {
    let u: f64 = rng.random();
    match ctx.config.probs.select(u, state.k(), ctx.config.kmax) {
        MoveKind::Birth => propose_birth(state, ctx, rng),
        MoveKind::Death => propose_death(state, ctx, rng),
        MoveKind::Split => propose_split(state, ctx, rng),
        MoveKind::Merge => propose_merge(state, ctx, rng),
        MoveKind::Update => propose_update(state, ctx, rng),
    }
}

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::MetricKind;
use crate::causal::{generate_sequence, sample_nonzero_influence, AdjacencySpec, CausalModel, ModelPrior};
use crate::distance::{directed_distance, mean_distance, DEFAULT_ITERS};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, derived_rng};

/// Errors of one estimated model on true and on distorted data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub d_star_0: f64,
    pub d_star_dagger: f64,
    /// `d_star_dagger - d_star_0`
    pub delta: f64,
    /// Distance between the true and distorted models, when both are known.
    pub d_bar: Option<f64>,
    pub metric: MetricKind,
}

impl GapRecord {
    pub fn with_distance(mut self, d_bar: f64) -> Self {
        self.d_bar = Some(d_bar);
        self
    }
}

pub fn performance_gap(d_star_0: f64, d_star_dagger: f64, metric: MetricKind) -> Result<GapRecord> {
    if !(0.0..=1.0).contains(&d_star_0) {
        return Err(Error::param("d_star_0", format!("error must lie in [0, 1], got {d_star_0}")));
    }
    if !(0.0..=1.0).contains(&d_star_dagger) {
        return Err(Error::param(
            "d_star_dagger",
            format!("error must lie in [0, 1], got {d_star_dagger}"),
        ));
    }
    Ok(GapRecord {
        d_star_0,
        d_star_dagger,
        delta: d_star_dagger - d_star_0,
        d_bar: None,
        metric,
    })
}

/// Empirical frequency of a positive gap among the surviving records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityEstimate {
    pub probability: f64,
    pub positive: usize,
    pub count: usize,
}

/// `P(delta > 0 | d_star_0 < delta_star [, d_bar > beta])`.
///
/// With `beta` given, records without a model distance are excluded.
pub fn gap_probability(records: &[GapRecord], delta_star: f64, beta: Option<f64>) -> Result<ProbabilityEstimate> {
    let surviving: Vec<&GapRecord> = records
        .iter()
        .filter(|r| r.d_star_0 < delta_star)
        .filter(|r| match beta {
            Some(b) => r.d_bar.is_some_and(|d| d > b),
            None => true,
        })
        .collect();
    if surviving.is_empty() {
        return Err(Error::UndefinedProbability { delta_star, beta });
    }
    let positive = surviving.iter().filter(|r| r.delta > 0.0).count();
    Ok(ProbabilityEstimate {
        probability: positive as f64 / surviving.len() as f64,
        positive,
        count: surviving.len(),
    })
}

/// One cell of a probability sweep; `estimate` is `None` when no record
/// survives the filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapCell {
    pub beta: Option<f64>,
    pub delta_star: f64,
    pub estimate: Option<ProbabilityEstimate>,
}

fn cell(records: &[GapRecord], delta_star: f64, beta: Option<f64>) -> Result<GapCell> {
    let estimate = match gap_probability(records, delta_star, beta) {
        Ok(e) => Some(e),
        Err(Error::UndefinedProbability { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(GapCell {
        beta,
        delta_star,
        estimate,
    })
}

/// Probability of a positive gap as the distance threshold grows.
pub fn beta_curve(records: &[GapRecord], delta_star: f64, betas: &[f64]) -> Result<Vec<GapCell>> {
    betas.iter().map(|&b| cell(records, delta_star, Some(b))).collect()
}

/// Probability of a positive gap as the accuracy constraint is relaxed.
pub fn delta_star_curve(records: &[GapRecord], delta_stars: &[f64]) -> Result<Vec<GapCell>> {
    delta_stars.iter().map(|&d| cell(records, d, None)).collect()
}

/// Probability over the full `(beta, delta_star)` grid.
pub fn gap_grid(records: &[GapRecord], betas: &[f64], delta_stars: &[f64]) -> Result<Vec<GapCell>> {
    let mut out = Vec::with_capacity(betas.len() * delta_stars.len());
    for &d in delta_stars {
        for &b in betas {
            out.push(cell(records, d, Some(b))?);
        }
    }
    Ok(out)
}

/// Re-draws each influence entry from the prior with probability `strength`.
///
/// Intensities and window are kept. `strength = 0` returns an identical
/// model; `strength = 1` an independent draw of the influence matrix.
pub fn perturb_model(model: &CausalModel, adjacency: &AdjacencySpec, strength: f64, seed: u64) -> Result<CausalModel> {
    if !(0.0..=1.0).contains(&strength) {
        return Err(Error::param("strength", format!("must lie in [0, 1], got {strength}")));
    }
    adjacency.validate(model.n())?;
    let mut rng = derived_rng(seed, "perturb", 0);
    let mut theta = model.theta().clone();
    for ((i, j), v) in theta.indexed_iter_mut() {
        if !rng.random_bool(strength) {
            continue;
        }
        let edge = match adjacency {
            AdjacencySpec::ErdosRenyi { p } => rng.random_bool(*p),
            AdjacencySpec::Identity => i == j,
            AdjacencySpec::Explicit { matrix } => matrix[[i, j]] == 1,
        };
        *v = if edge { sample_nonzero_influence(&mut rng) } else { 0.0 };
    }
    model.with_theta(theta)
}

fn check_range(name: &'static str, (lo, hi): (f64, f64)) -> Result<(f64, f64)> {
    if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
        return Err(Error::param(name, format!("need 0 <= lo <= hi <= 1, got ({lo}, {hi})")));
    }
    Ok((lo, hi))
}

/// Settings of the true / estimated / distorted model study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisConfig {
    pub prior: ModelPrior,
    pub horizon: f64,
    pub pairs: usize,
    pub distance_iters: usize,
    /// Perturbation strengths of the estimated model are drawn uniformly
    /// from this range.
    pub strength_range: (f64, f64),
    /// Perturbation strengths of the distorted model, also derived from the
    /// true one, are drawn log-uniformly from this range so that distances
    /// near zero are as well covered as large ones.
    pub distortion_range: (f64, f64),
}

impl Default for HypothesisConfig {
    fn default() -> Self {
        Self {
            prior: ModelPrior::default(),
            horizon: 1000.0,
            pairs: 1000,
            distance_iters: DEFAULT_ITERS,
            strength_range: (0.2, 1.0),
            distortion_range: (1e-3, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisRecord {
    pub strength: f64,
    pub distortion: f64,
    pub gap: GapRecord,
    /// Both realisations rejected at least one trigger.
    pub non_degenerate: bool,
}

/// For each pair: a true model, and a distorted model and an estimate both
/// obtained by perturbing the true one. The estimate's errors
/// are its trigger-level cross-prediction errors on realisations of the
/// true and of the distorted model.
pub fn hypothesis_study(config: &HypothesisConfig, seed: u64) -> Result<Vec<HypothesisRecord>> {
    let (lo, hi) = check_range("strength_range", config.strength_range)?;
    let (dlo, dhi) = check_range("distortion_range", config.distortion_range)?;
    if dlo <= 0.0 {
        return Err(Error::param("distortion_range", "lower end must be positive for log-uniform draws"));
    }
    (0..config.pairs as u64)
        .into_par_iter()
        .map(|k| {
            let prior = &config.prior;
            let model_0 = prior.sample_mixed_sign(derive_seed(seed, "true-model", k))?;
            let strength = lo + (hi - lo) * derived_rng(seed, "strength", k).random::<f64>();
            let distortion = dlo * (dhi / dlo).powf(derived_rng(seed, "distortion", k).random::<f64>());
            let model_dagger =
                perturb_model(&model_0, &prior.adjacency, distortion, derive_seed(seed, "distorted-model", k))?;
            let estimate = perturb_model(&model_0, &prior.adjacency, strength, derive_seed(seed, "estimate", k))?;
            let real_0 = generate_sequence(&model_0, config.horizon, derive_seed(seed, "s0", k))?;
            let real_dagger = generate_sequence(&model_dagger, config.horizon, derive_seed(seed, "s-dagger", k))?;
            let d0 = directed_distance(&estimate, &model_0, &real_0.accepted, &real_0.triggers)?.value;
            let dd = directed_distance(&estimate, &model_dagger, &real_dagger.accepted, &real_dagger.triggers)?.value;
            let d_bar = mean_distance(
                &model_0,
                &model_dagger,
                config.horizon,
                config.distance_iters,
                derive_seed(seed, "d-bar", k),
            )?
            .mean;
            Ok(HypothesisRecord {
                strength,
                distortion,
                gap: performance_gap(d0, dd, MetricKind::Accuracy)?.with_distance(d_bar),
                non_degenerate: crate::causal::degeneracy_check(&real_0.triggers, &real_0.accepted)
                    && crate::causal::degeneracy_check(&real_dagger.triggers, &real_dagger.accepted),
            })
        })
        .collect()
}

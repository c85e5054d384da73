//! Acceptance gate: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ctig::causal::{AdjacencySpec, ModelPrior};
use ctig::counterfactual::{
    beta_curve, delta_star_curve, metric, negative_sample, oracle_predict, prepare_experiment_a, restrict,
    run_experiment_b, EvaluationSet, ExperimentAConfig, ExperimentBConfig, HypothesisConfig, MetricKind, OracleScorer,
    SamplingMode,
};
use ctig::ctig::{build_ctig_model, thresholded_influences, CtigSpec};
use ctig::distance::{mean_distance, variance_decay_study, StudyCell};
use ctig::properties::{
    estimate_pns, interventional_pns_oracle, is_monotonic_bruteforce, is_monotonic_closed_form, sample_monotone_pair_model,
};
use ctig::seed::{derive_seed, derived_rng};
use ctig::stats::{binomial_upper_tail, normal_ci, ols_slope, quantile, spearman};
use ctig::{
    degeneracy_check, directed_distance, generate_sequence, sample_random_model, symmetric_distance, CausalModel,
};
use rand::Rng;

const SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// Uniform draw of `n` in `[2, 10]` and a random sparse model over it.
fn small_model(k: u64, tag: &str) -> CausalModel {
    let mut rng = derived_rng(SEED, tag, k);
    let n = rng.random_range(2..=10);
    let prior = ModelPrior { n, ..ModelPrior::default() };
    prior.sample(derive_seed(SEED, tag, k)).unwrap()
}

fn self_prediction() -> Verdict {
    let mut worst_d = 0.0f64;
    let mut worst_err = 0.0f64;
    for k in 0..100 {
        let m = small_model(k, "self-prediction");
        let g = generate_sequence(&m, 1000.0, k).unwrap();
        let d = directed_distance(&m, &m, &g.accepted, &g.triggers).unwrap();
        worst_d = worst_d.max(d.value);
        let eval = EvaluationSet::from_triggers(&g.triggers, &g.accepted, (0.0, 1000.0));
        let acc = metric(&oracle_predict(&m, &eval, &g.accepted), &eval.labels(), MetricKind::Accuracy).unwrap();
        worst_err = worst_err.max(1.0 - acc);
    }
    verdict(
        worst_d == 0.0 && worst_err == 0.0,
        format!("max self distance {worst_d}, max oracle error {worst_err} over 100 models"),
    )
}

fn distance_axioms() -> Verdict {
    let mut out_of_range = 0;
    let mut asymmetric = 0;
    let mut nonzero_self = 0;
    for k in 0..100 {
        let a = small_model(k, "axioms-a");
        let prior = ModelPrior { n: a.n(), ..ModelPrior::default() };
        let b = prior.sample(derive_seed(SEED, "axioms-b", k)).unwrap();
        let ra = generate_sequence(&a, 1000.0, derive_seed(SEED, "ra", k)).unwrap();
        let rb = generate_sequence(&b, 1000.0, derive_seed(SEED, "rb", k)).unwrap();
        let ab = symmetric_distance(&a, &b, &ra, &rb).unwrap();
        let ba = symmetric_distance(&b, &a, &rb, &ra).unwrap();
        for v in [ab.symmetric, ab.b_on_a.value, ab.a_on_b.value] {
            if !(0.0..=1.0).contains(&v) {
                out_of_range += 1;
            }
        }
        if ab.symmetric != ba.symmetric {
            asymmetric += 1;
        }
        if mean_distance(&a, &a, 200.0, 4, k).unwrap().mean != 0.0 {
            nonzero_self += 1;
        }
    }
    verdict(
        out_of_range == 0 && asymmetric == 0 && nonzero_self == 0,
        format!("{out_of_range} out of [0,1], {asymmetric} asymmetric, {nonzero_self} nonzero self-distances over 100 pairs"),
    )
}

fn variance_decay() -> Verdict {
    let prior = ModelPrior::default();
    let a = prior.sample_mixed_sign(derive_seed(SEED, "vd-a", 0)).unwrap();
    let b = prior.sample_mixed_sign(derive_seed(SEED, "vd-b", 0)).unwrap();
    let grid: Vec<StudyCell> = [10, 40, 160].iter().map(|&iters| StudyCell { horizon: 250.0, iters }).collect();
    let rows = variance_decay_study(&a, &b, &grid, 100, SEED).unwrap();
    let x: Vec<f64> = rows.iter().map(|r| r.effective_size.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.variance.ln()).collect();
    let slope = ols_slope(&x, &y);
    let decreasing = rows.windows(2).all(|w| w[1].variance < w[0].variance);
    let vars: Vec<String> = rows.iter().map(|r| format!("{:.0}:{:.3e}", r.effective_size, r.variance)).collect();
    verdict(
        decreasing && (-1.4..=-0.6).contains(&slope),
        format!("variances [{}], log-log slope {slope:.3}", vars.join(", ")),
    )
}

fn hypothesis(records_out: &mut Vec<bool>) -> Verdict {
    let cfg = HypothesisConfig::default();
    let records = ctig::counterfactual::hypothesis_study(&cfg, SEED).unwrap();
    records_out.extend(records.iter().map(|r| r.non_degenerate));
    let gaps: Vec<_> = records.iter().map(|r| r.gap).collect();
    let d0: Vec<f64> = gaps.iter().map(|g| g.d_star_0).collect();
    let d_bar: Vec<f64> = gaps.iter().map(|g| g.d_bar.unwrap()).collect();
    // deciles of the positive distances; pairs left unchanged by the
    // perturbation sit at exactly zero and would collapse the grid
    let positive: Vec<f64> = d_bar.iter().copied().filter(|&d| d > 0.0).collect();
    let betas: Vec<f64> = (0..10).map(|k| quantile(&positive, k as f64 / 10.0)).collect();
    let curve = beta_curve(&gaps, 0.2, &betas).unwrap();
    let probs: Vec<f64> = curve.iter().map(|c| c.estimate.map_or(f64::NAN, |e| e.probability)).collect();
    let rho = spearman(&betas, &probs);
    let top = probs[9];
    let deltas: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let dcurve = delta_star_curve(&gaps, &deltas).unwrap();
    let first = dcurve.iter().find_map(|c| c.estimate).unwrap().probability;
    let last = dcurve[9].estimate.unwrap().probability;
    let spans = quantile(&d0, 0.0) < 0.05 && quantile(&d0, 1.0) > 0.4;
    verdict(
        records.len() >= 100 && spans && rho >= 0.8 && top >= 0.9 && last <= 0.7 && last < first,
        format!(
            "{} pairs, d*0 in [{:.3}, {:.3}]; spearman {rho:.3}, top-decile P {top:.3} (n={}), P(delta*) {first:.3} -> {last:.3}",
            records.len(),
            quantile(&d0, 0.0),
            quantile(&d0, 1.0),
            curve[9].estimate.map_or(0, |e| e.count),
        ),
    )
}

fn monotonicity_equivalence() -> Verdict {
    let mut pairs = 0;
    let mut disagreements = 0;
    let mut false_verdicts = 0;
    for k in 0..500u64 {
        let mut rng = derived_rng(SEED, "monotonicity", k);
        let n = rng.random_range(2..=11);
        let p = rng.random_range(0.2..0.9);
        let m = sample_random_model(n, &AdjacencySpec::ErdosRenyi { p }, (0.5, 2.0), 1.0, k).unwrap();
        for i in 0..n {
            for &j in m.parents(i) {
                let brute = is_monotonic_bruteforce(&m, i, j).unwrap();
                pairs += 1;
                false_verdicts += usize::from(!brute.verdict);
                if brute.verdict != is_monotonic_closed_form(&m, i, j).unwrap() {
                    disagreements += 1;
                }
            }
        }
    }
    verdict(
        disagreements == 0,
        format!("{disagreements} disagreements over {pairs} pairs ({false_verdicts} non-monotone)"),
    )
}

fn pns_identification() -> Verdict {
    let mut within = 0;
    let mut min_cell = usize::MAX;
    let mut worst = 0.0f64;
    for c in 0..20 {
        let m = sample_monotone_pair_model(derive_seed(SEED, "pns-model", c)).unwrap();
        let g = generate_sequence(&m, 1e4, derive_seed(SEED, "pns-run", c)).unwrap();
        let est = estimate_pns(&g.accepted, &g.triggers[0], 0, 1, m.tau_bar()).unwrap();
        let oracle = interventional_pns_oracle(&m, 0, 1, 1e4, derive_seed(SEED, "pns-oracle", c)).unwrap();
        min_cell = min_cell.min(est.active_count.min(est.inactive_count));
        let err = (est.value - oracle).abs();
        worst = worst.max(err);
        within += usize::from(err <= 0.05);
    }
    verdict(
        within >= 19 && min_cell >= 500,
        format!("{within}/20 within 0.05 (worst {worst:.4}), smallest cell {min_cell}"),
    )
}

fn ctig_invariants() -> Verdict {
    let nu_grid = [0.1, 0.3, 0.5, 0.7, 0.9];
    let mut failures = Vec::new();
    for s in 0..100u64 {
        let spec = CtigSpec::reference(s);
        let c = build_ctig_model(&spec).unwrap();
        let tt = &c.matrices.theta_tilde;
        let e = tt.nrows();
        let antisym = (0..e).all(|i| tt[[i, i]] == 0.0 && (0..e).all(|j| tt[[i, j]] == -tt[[j, i]]));
        let mask = &c.matrices.mask;
        let zero_lines: Vec<usize> =
            (0..e).filter(|&k| mask.row(k).iter().all(|&v| v == 0) && mask.column(k).iter().all(|&v| v == 0)).collect();
        let rest_ones = mask.indexed_iter().all(|((i, j), &v)| v == 1 || zero_lines.contains(&i) || zero_lines.contains(&j));
        let masked_ok = zero_lines.len() == 2 && rest_ones && zero_lines == c.matrices.masked_edges;
        let nnz: Vec<usize> = nu_grid
            .iter()
            .map(|&nu1| {
                let (_, t) = thresholded_influences(&c.edge_features, &c.b, spec.nu0, nu1).unwrap();
                t.iter().filter(|v| **v != 0.0).count()
            })
            .collect();
        let monotone = nnz.windows(2).all(|w| w[1] <= w[0]);
        if !(antisym && masked_ok && monotone) {
            failures.push(s);
        }
    }
    verdict(failures.is_empty(), format!("{} of 100 seeds violate an invariant {failures:?}", failures.len()))
}

fn experiment_b(degeneracy: &mut Vec<bool>) -> Verdict {
    let prior = ModelPrior::default();
    let cfg = ExperimentBConfig { horizon: 1000.0, n_shuffles: 10, ..ExperimentBConfig::default() };
    let mut acc_sep = 0;
    let mut dist_sep = 0;
    let mut run_means = Vec::new();
    for r in 0..100u64 {
        let m = prior.sample_mixed_sign(derive_seed(SEED, "exp-b-model", r)).unwrap();
        let res = run_experiment_b(&m, &cfg, &OracleScorer(&m), derive_seed(SEED, "exp-b", r)).unwrap();
        degeneracy.push(res.degeneracy_passed);
        acc_sep += usize::from(res.outcomes.iter().all(|o| o.y_x_u > o.y_xprime_u));
        dist_sep += usize::from(res.shuffle_distances.iter().all(|&d| d > res.original_distance));
        run_means.push(res.shuffle_distance_ci.mean);
    }
    let widths: Vec<f64> = [25, 50, 100].iter().map(|&k| normal_ci(&run_means[..k], 0.95).width()).collect();
    let shrinking = widths.windows(2).all(|w| w[1] < w[0]);
    let ci = normal_ci(&run_means, 0.95);
    verdict(
        acc_sep >= 95 && dist_sep >= 95 && shrinking,
        format!(
            "accuracy separated in {acc_sep}/100, distance in {dist_sep}/100; shuffle distance {:.4} [{:.4}, {:.4}], CI widths {:.4}/{:.4}/{:.4} at 25/50/100 runs",
            ci.mean, ci.lower, ci.upper, widths[0], widths[1], widths[2]
        ),
    )
}

fn oracle_sanity(degeneracy: &mut Vec<bool>) -> Verdict {
    let prior = ModelPrior::default();
    let cfg = ExperimentAConfig { distance_iters: None, ..ExperimentAConfig::default() };
    let (mut correct, mut total) = (0u64, 0u64);
    let mut accs = Vec::new();
    for r in 0..100u64 {
        let m = prior.sample_mixed_sign(derive_seed(SEED, "sanity-model", r)).unwrap();
        let data = prepare_experiment_a(&m, &m, &cfg, derive_seed(SEED, "sanity", r)).unwrap();
        degeneracy.push(data.degeneracy_passed);
        let scores = oracle_predict(&m, &data.eval_test, &data.history_test);
        let labels = data.eval_test.labels();
        let c = scores.iter().zip(&labels).filter(|(s, l)| (**s >= 0.5) == **l).count() as u64;
        correct += c;
        total += labels.len() as u64;
        accs.push(c as f64 / labels.len() as f64);
    }
    let mean_acc = ctig::stats::mean(&accs);
    let p = binomial_upper_tail(correct, total, 0.5);
    // models judged one by one
    let models_above = accs.iter().filter(|&&a| a > 0.5).count() as u64;
    let p_models = binomial_upper_tail(models_above, 100, 0.5);
    verdict(
        mean_acc > 0.55 && p < 0.01 && p_models < 0.01,
        format!("mean accuracy {mean_acc:.4} over 100 models; pooled p {p:.2e}, {models_above}/100 models above 0.5 (p {p_models:.2e})"),
    )
}

fn degeneracy_gate(experiment_flags: &[bool]) -> Verdict {
    let passed = experiment_flags.iter().filter(|&&f| f).count();
    let mut undetected = 0;
    for k in 0..100u64 {
        let m = small_model(k, "nonneg");
        let theta = m.theta().mapv(f64::abs);
        let nonneg = m.with_theta(theta).unwrap();
        let g = generate_sequence(&nonneg, 1000.0, k).unwrap();
        if degeneracy_check(&g.triggers, &g.accepted) {
            undetected += 1;
        }
    }
    // a mixed-sign model replayed on the experiment split also counts
    let extra = {
        let m = ModelPrior::default().sample_mixed_sign(SEED).unwrap();
        let g = generate_sequence(&m, 1000.0, SEED).unwrap();
        let test = restrict(&g.accepted, 500.0, 1000.0).unwrap();
        negative_sample(&test, (500.0, 1000.0), m.n(), SamplingMode::Transductive, 1, 1).is_ok()
            && degeneracy_check(&g.triggers, &g.accepted)
    };
    verdict(
        passed == experiment_flags.len() && undetected == 0 && extra,
        format!(
            "{passed}/{} mixed-sign experiment datasets non-degenerate; {undetected}/100 non-negative models missed",
            experiment_flags.len()
        ),
    )
}

fn main() -> ExitCode {
    let mut degeneracy = Vec::new();
    let mut results: Vec<(&str, Verdict, Duration)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut() -> Verdict| {
        let t = Instant::now();
        let v = f();
        let el = t.elapsed();
        println!("{} {name}: {} ({:.1} s)", if v.pass { "PASS" } else { "FAIL" }, v.detail, el.as_secs_f64());
        results.push((name, v, el));
    };
    run("self-prediction identity", &mut self_prediction);
    run("distance axioms", &mut distance_axioms);
    run("variance decay", &mut variance_decay);
    run("hypothesis support", &mut || hypothesis(&mut degeneracy));
    run("monotonicity equivalence", &mut monotonicity_equivalence);
    run("pns identification", &mut pns_identification);
    run("ctig structural invariants", &mut ctig_invariants);
    run("shuffle separation", &mut || experiment_b(&mut degeneracy));
    run("oracle sanity", &mut || oracle_sanity(&mut degeneracy));
    let flags = degeneracy.clone();
    run("degeneracy gate", &mut || degeneracy_gate(&flags));
    let failed = results.iter().filter(|r| !r.1.pass).count();
    println!("acceptance: {}/{} criteria passed", results.len() - failed, results.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}

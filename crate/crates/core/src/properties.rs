//! Checkable structural properties of causal event models and the
//! probability-of-necessity-and-sufficiency estimators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::causal::{simulate, CausalModel, EventSequence, FlagIntervention};
use crate::error::{Error, Result};
use crate::point_process::TriggerStream;
use crate::seed::derive_seed;

pub const DEFAULT_PARENT_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subject {
    pub i: Option<usize>,
    pub j: Option<usize>,
}

impl Subject {
    pub fn model() -> Self {
        Self { i: None, j: None }
    }

    pub fn pair(i: usize, j: usize) -> Self {
        Self { i: Some(i), j: Some(j) }
    }
}

/// Outcome of one property check.
///
/// A failed decidable check carries the violating parent subset as witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyVerdict {
    pub property: String,
    pub subject: Subject,
    pub verdict: bool,
    pub witness: Option<Vec<usize>>,
    pub evidence: Option<String>,
}

fn check_pair(model: &CausalModel, i: usize, j: usize) -> Result<()> {
    if i >= model.n() || j >= model.n() {
        return Err(Error::param("i/j", format!("({i}, {j}) outside model with {} types", model.n())));
    }
    if !model.parents(i).contains(&j) {
        return Err(Error::param("j", format!("{j} is not a structural parent of {i}")));
    }
    Ok(())
}

/// `theta[[i, j]]` lies in `[0, 1]`.
pub fn is_monotonic_closed_form(model: &CausalModel, i: usize, j: usize) -> Result<bool> {
    check_pair(model, i, j)?;
    Ok((0.0..=1.0).contains(&model.theta()[[i, j]]))
}

/// Whether switching parent `j` on, with the other active parents `subset`,
/// flips the structural equation from firing to not firing.
pub fn violates_monotonicity(model: &CausalModel, i: usize, j: usize, subset: &[usize]) -> bool {
    let row = model.theta().row(i);
    let base: f64 = subset.iter().map(|&k| row[k]).sum();
    base >= 0.0 && row[j] + base < 0.0
}

/// Exhaustive monotonicity check over every subset of the other parents.
pub fn is_monotonic_bruteforce(model: &CausalModel, i: usize, j: usize) -> Result<PropertyVerdict> {
    is_monotonic_bruteforce_capped(model, i, j, DEFAULT_PARENT_CAP)
}

pub fn is_monotonic_bruteforce_capped(model: &CausalModel, i: usize, j: usize, cap: usize) -> Result<PropertyVerdict> {
    check_pair(model, i, j)?;
    let parents = model.parents(i);
    if parents.len() > cap {
        return Err(Error::Capacity { parents: parents.len(), cap });
    }
    let others: Vec<usize> = parents.iter().copied().filter(|&k| k != j).collect();
    let row = model.theta().row(i);
    let theta_ij = row[j];
    let mut witness = None;
    for mask in 0u64..(1u64 << others.len()) {
        let base: f64 = others
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &k)| row[k])
            .sum();
        if base >= 0.0 && theta_ij + base < 0.0 {
            witness = Some(
                others
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, &k)| k)
                    .collect(),
            );
            break;
        }
    }
    Ok(PropertyVerdict {
        property: "monotonic".into(),
        subject: Subject::pair(i, j),
        verdict: witness.is_none(),
        witness,
        evidence: Some(format!("{} subsets enumerated", 1u64 << others.len())),
    })
}

/// Brute-force monotonicity verdicts for every structural edge, in
/// row-major order.
pub fn monotonicity_table(model: &CausalModel) -> Result<Vec<PropertyVerdict>> {
    let pairs: Vec<(usize, usize)> = (0..model.n())
        .flat_map(|i| model.parents(i).iter().map(move |&j| (i, j)))
        .collect();
    pairs
        .par_iter()
        .map(|&(i, j)| is_monotonic_bruteforce(model, i, j))
        .collect()
}

/// Whether every non-zero influence is a self-influence.
///
/// This is a sufficient condition only.
pub fn is_markovian(model: &CausalModel) -> bool {
    model
        .theta()
        .indexed_iter()
        .all(|((i, j), &v)| v == 0.0 || i == j)
}

/// Invariants of the unrolled graph: edges run from the exogenous trigger
/// and history nodes into the current events, and history nodes have no
/// incoming edges.
pub fn structural_checks(model: &CausalModel) -> Vec<PropertyVerdict> {
    let n = model.n();
    let edges: usize = (0..n).map(|i| model.parents(i).len()).sum();
    // the unrolled graph stores incoming edges of X_i only
    let into_history = 0;
    vec![
        PropertyVerdict {
            property: "acyclic".into(),
            subject: Subject::model(),
            verdict: true,
            witness: None,
            evidence: Some(format!("{n} trigger edges and {edges} history edges, all into current events")),
        },
        PropertyVerdict {
            property: "exogenous_history".into(),
            subject: Subject::model(),
            verdict: into_history == 0,
            witness: None,
            evidence: Some(format!("{into_history} edges into history nodes")),
        },
    ]
}

/// Difference of conditional acceptance rates of `i` given the history
/// flag of `j`, with the sizes of both conditioning cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PnsEstimate {
    pub value: f64,
    pub p_given_active: f64,
    pub p_given_inactive: f64,
    pub active_count: usize,
    pub inactive_count: usize,
}

/// Estimates the PNS over the trigger times of type `i`.
pub fn estimate_pns(
    sequence: &EventSequence,
    triggers: &TriggerStream,
    i: usize,
    j: usize,
    tau_bar: f64,
) -> Result<PnsEstimate> {
    if triggers.event_type != i {
        return Err(Error::param("triggers", format!("stream of type {} given for {i}", triggers.event_type)));
    }
    if triggers.is_empty() {
        return Err(Error::param("triggers", "no triggers of the target type"));
    }
    let (mut on, mut on_hit, mut off, mut off_hit) = (0usize, 0usize, 0usize, 0usize);
    for &t in triggers.times() {
        let hit = sequence.contains(i, t);
        if sequence.history_indicator(j, t, tau_bar) {
            on += 1;
            on_hit += hit as usize;
        } else {
            off += 1;
            off_hit += hit as usize;
        }
    }
    if on == 0 {
        return Err(Error::Estimation { cell: "parent_active" });
    }
    if off == 0 {
        return Err(Error::Estimation { cell: "parent_inactive" });
    }
    let p1 = on_hit as f64 / on as f64;
    let p0 = off_hit as f64 / off as f64;
    Ok(PnsEstimate {
        value: p1 - p0,
        p_given_active: p1,
        p_given_inactive: p0,
        active_count: on,
        inactive_count: off,
    })
}

/// Acceptance-rate difference of `i` between two paired simulations that
/// force the history flag of `j` on and off at each trigger of `i`.
pub fn interventional_pns_oracle(model: &CausalModel, i: usize, j: usize, horizon: f64, seed: u64) -> Result<f64> {
    if i >= model.n() || j >= model.n() {
        return Err(Error::param("i/j", format!("({i}, {j}) outside model with {} types", model.n())));
    }
    let triggers = crate::causal::sample_triggers(model, horizon, derive_seed(seed, "pns-oracle", 0))?;
    let count = triggers[i].len();
    if count == 0 {
        return Err(Error::param("horizon", format!("no triggers of type {i}")));
    }
    let rate = |value| {
        let s = simulate(model, &triggers, horizon, Some(FlagIntervention { target: i, parent: j, value }));
        s.times_of(i).len() as f64 / count as f64
    };
    Ok(rate(true) - rate(false))
}

/// Three types where `1` and `2` are parentless and type `0` has parents
/// `{1, 2}`, with a monotone influence from `1` and a random-sign one from
/// `2`. Rates keep both conditioning cells of `(0, 1)` well populated.
pub fn sample_monotone_pair_model(seed: u64) -> Result<CausalModel> {
    use rand::Rng;
    let mut rng = crate::seed::rng_from_seed(seed);
    let mut theta = ndarray::Array2::zeros((3, 3));
    theta[[0, 1]] = rng.random_range(0.05..=1.0);
    let s: f64 = rng.random_range(0.05..1.0);
    theta[[0, 2]] = if rng.random_bool(0.5) { s } else { -s };
    let lambdas = vec![rng.random_range(0.5..2.0), rng.random_range(0.4..1.2), rng.random_range(0.4..1.2)];
    CausalModel::new(lambdas, theta, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::{generate_sequence, sample_random_model, AdjacencySpec, DEFAULT_LAMBDA_RANGE};
    use ndarray::{array, Array2};
    use proptest::prelude::*;

    fn single_parent(theta_ij: f64) -> CausalModel {
        CausalModel::new(vec![1.0, 1.0], array![[0.0, theta_ij], [0.0, 0.0]], 1.0).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert!(is_monotonic_closed_form(&single_parent(0.7), 0, 1).unwrap());
        assert!(!is_monotonic_closed_form(&single_parent(-0.1), 0, 1).unwrap());
        assert!(is_monotonic_closed_form(&single_parent(0.0), 0, 1).is_err());
    }

    #[test]
    fn bruteforce_witness_for_negative_influence() {
        let m = CausalModel::new(
            vec![1.0; 3],
            array![[0.0, -0.1, 0.9], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
            1.0,
        )
        .unwrap();
        let v = is_monotonic_bruteforce(&m, 0, 1).unwrap();
        assert!(!v.verdict);
        assert_eq!(v.witness, Some(vec![]));
        assert!(is_monotonic_bruteforce(&m, 0, 2).unwrap().verdict);
    }

    #[test]
    fn capacity_is_enforced() {
        let n = 22;
        let mut theta = Array2::zeros((n, n));
        theta.row_mut(0).fill(0.5);
        let m = CausalModel::new(vec![1.0; n], theta, 1.0).unwrap();
        assert!(matches!(
            is_monotonic_bruteforce(&m, 0, 1),
            Err(Error::Capacity { parents: 22, cap: 20 })
        ));
        assert!(is_monotonic_bruteforce_capped(&m, 0, 1, 22).unwrap().verdict);
    }

    #[test]
    fn markovian_examples() {
        assert!(is_markovian(&CausalModel::new(vec![1.0; 2], array![[-0.4, 0.0], [0.0, 0.3]], 1.0).unwrap()));
        assert!(!is_markovian(&single_parent(0.2)));
        assert!(is_markovian(&CausalModel::new(vec![1.0; 2], Array2::zeros((2, 2)), 1.0).unwrap()));
    }

    #[test]
    fn structural_checks_hold() {
        let m = CausalModel::new(vec![1.0; 2], Array2::zeros((2, 2)), 1.0).unwrap();
        assert!(structural_checks(&m).iter().all(|v| v.verdict));
        let r = sample_random_model(6, &AdjacencySpec::ErdosRenyi { p: 0.5 }, DEFAULT_LAMBDA_RANGE, 1.0, 3).unwrap();
        assert!(structural_checks(&r).iter().all(|v| v.verdict));
    }

    #[test]
    fn single_parent_pns() {
        // enumerating the equation: a non-negative sole parent never blocks,
        // a negative one blocks exactly when active
        for (theta, expected) in [(0.6, 0.0), (-0.6, -1.0)] {
            let m = CausalModel::new(vec![1.0, 2.0], array![[0.0, theta], [0.0, 0.0]], 1.0).unwrap();
            let g = generate_sequence(&m, 2000.0, 4).unwrap();
            let est = estimate_pns(&g.accepted, &g.triggers[0], 0, 1, 1.0).unwrap();
            assert_eq!(est.value, expected);
            assert!(est.active_count > 0 && est.inactive_count > 0);
            assert_eq!(interventional_pns_oracle(&m, 0, 1, 2000.0, 4).unwrap(), expected);
        }
        assert!(!is_monotonic_closed_form(&single_parent(-0.6), 0, 1).unwrap());
    }

    #[test]
    fn forcing_a_non_parent_is_a_no_op() {
        let m = CausalModel::new(vec![1.0; 3], array![[0.0, 0.0, -0.5], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]], 1.0).unwrap();
        assert_eq!(interventional_pns_oracle(&m, 0, 1, 500.0, 1).unwrap(), 0.0);
    }

    #[test]
    fn empty_cell_is_named() {
        // the parent never fires, so its flag is never active
        let m = CausalModel::new(vec![1.0, 1.0], array![[0.0, 0.5], [0.0, -1.0]], 1.0).unwrap();
        let g = generate_sequence(&m, 100.0, 1).unwrap();
        let s = EventSequence::empty(100.0);
        assert!(matches!(
            estimate_pns(&s, &g.triggers[0], 0, 1, 1.0),
            Err(Error::Estimation { cell: "parent_active" })
        ));
    }

    #[test]
    fn two_parent_estimate_matches_oracle() {
        let m = CausalModel::new(
            vec![1.0, 0.7, 0.7],
            array![[0.0, 0.5, -0.8], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
            1.0,
        )
        .unwrap();
        let g = generate_sequence(&m, 1e4, 11).unwrap();
        let est = estimate_pns(&g.accepted, &g.triggers[0], 0, 1, 1.0).unwrap();
        let oracle = interventional_pns_oracle(&m, 0, 1, 1e4, 11).unwrap();
        assert!((-1.0..=1.0).contains(&est.value));
        assert!((est.value - oracle).abs() <= 0.05, "{est:?} vs {oracle}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn witnesses_violate(seed in any::<u64>(), n in 2usize..9) {
            let m = sample_random_model(n, &AdjacencySpec::ErdosRenyi { p: 0.6 }, DEFAULT_LAMBDA_RANGE, 1.0, seed).unwrap();
            for v in monotonicity_table(&m).unwrap() {
                let (i, j) = (v.subject.i.unwrap(), v.subject.j.unwrap());
                prop_assert_eq!(v.verdict, is_monotonic_closed_form(&m, i, j).unwrap());
                if let Some(w) = &v.witness {
                    prop_assert!(violates_monotonicity(&m, i, j, w));
                } else {
                    prop_assert!(v.verdict);
                }
            }
        }
    }
}

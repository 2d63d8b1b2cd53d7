//! Differentially private prediction serving and its accounting.
//!
//! Query answers are drawn with the exponential mechanism over the ensemble
//! vote counts, so each answer is eps'-DP in the model ensemble (moving one
//! model moves one vote: sensitivity 1). Advanced composition turns a total
//! (eps, delta) budget into a query capacity; once the spent counter passes
//! it, the engine is fully retrained with a fresh seed, which resets the
//! budget. A brute-force max-information oracle over finite joints backs
//! the theory tests.

use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::data::Update;
use crate::ensemble::EnsembleState;
use crate::error::{Error, Result};
use crate::rng::{SeedVector, Stream};

/// Exact exponential-mechanism distribution over a count vector: entry `y`
/// gets probability proportional to `exp(eps * counts[y] / 2)`.
pub fn exp_mech_probabilities(counts: &[u64], eps: f64) -> Result<Vec<f64>> {
    if eps < 0.0 || !eps.is_finite() {
        return Err(Error::NegativeEpsilon(eps));
    }
    if counts.is_empty() || counts.iter().sum::<u64>() == 0 {
        return Err(Error::InvalidRange(
            "exponential mechanism needs at least one vote".into(),
        ));
    }
    let max = *counts.iter().max().expect("nonempty counts") as f64;
    let weights: Vec<f64> = counts
        .iter()
        .map(|&c| (eps * (c as f64 - max) / 2.0).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Samples one outcome index from the exponential mechanism over `counts`.
pub fn exp_mech_vote(counts: &[u64], eps: f64, stream: &mut Stream) -> Result<usize> {
    let probabilities = exp_mech_probabilities(counts, eps)?;
    let draw = stream.random::<f64>();
    let mut cumulative = 0.0;
    for (index, p) in probabilities.iter().enumerate() {
        cumulative += p;
        if draw < cumulative {
            return Ok(index);
        }
    }
    Ok(probabilities.len() - 1)
}

/// Query capacity from advanced composition:
/// `floor(eps^2 / (8 eps'^2 ln(1/delta)))`, valid for `0 < eps <= 1/2` and
/// `0 < delta < eps`.
pub fn budget_capacity(eps: f64, delta: f64, eps_prime: f64) -> Result<u64> {
    check_dp_range(eps, delta)?;
    if !eps_prime.is_finite() || eps_prime <= 0.0 {
        return Err(Error::ParameterRange(format!(
            "per-query epsilon must be positive, got {eps_prime}"
        )));
    }
    let capacity = eps * eps / (8.0 * eps_prime * eps_prime * (1.0 / delta).ln());
    Ok(capacity.floor() as u64)
}

pub(crate) fn check_dp_range(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::ParameterRange(format!(
            "epsilon must lie in (0, 1/2], got {eps}"
        )));
    }
    if !(delta > 0.0 && delta < eps) {
        return Err(Error::ParameterRange(format!(
            "delta must lie in (0, epsilon), got {delta}"
        )));
    }
    Ok(())
}

/// Privacy budget state: total (eps, delta), the per-query eps', the spent
/// query counter since the last reset, and the precomputed capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrivacyBudget {
    pub eps: f64,
    pub delta: f64,
    pub eps_prime: f64,
    pub spent: u64,
    pub capacity: u64,
}

impl PrivacyBudget {
    pub fn new(eps: f64, delta: f64, eps_prime: f64) -> Result<Self> {
        Ok(PrivacyBudget {
            eps,
            delta,
            eps_prime,
            spent: 0,
            capacity: budget_capacity(eps, delta, eps_prime)?,
        })
    }

    /// The budget is exhausted once strictly more than `capacity` queries
    /// have been served; capacity + 1 answers fit between resets.
    pub fn exhausted(&self) -> bool {
        self.spent > self.capacity
    }
}

/// Serves one prediction with the exponential mechanism over the ensemble
/// votes (abstention is a valid outcome) and charges the budget one query.
pub fn serve_prediction(
    state: &EnsembleState,
    budget: &mut PrivacyBudget,
    x: &[f64],
    mech_stream: &mut Stream,
) -> Result<Option<usize>> {
    let votes = state.vote_counts(x)?;
    let label_count = votes.per_class.len();
    let index = exp_mech_vote(&votes.to_alphabet_vec(), budget.eps_prime, mech_stream)?;
    budget.spent += 1;
    Ok((index < label_count).then_some(index))
}

/// What one private interaction round did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Privately served answers for the round's pending queries, in order.
    pub published: Vec<Option<usize>>,
    pub did_full_retrain: bool,
    /// Single-shard training calls consumed this round.
    pub retrained: usize,
}

/// One round of the private interaction loop: if the budget is exhausted,
/// apply the update to the dataset, fully retrain with `fresh_seed`, and
/// reset the spent counter; otherwise run a normal unlearning update. Then
/// serve every pending query.
pub fn interaction_step(
    state: &mut EnsembleState,
    budget: &mut PrivacyBudget,
    update: &Update,
    pending_queries: &[Vec<f64>],
    fresh_seed: SeedVector,
    mech_stream: &mut Stream,
) -> Result<StepOutcome> {
    let did_full_retrain = budget.exhausted();
    let retrained = if did_full_retrain {
        state.apply_global_only(update)?;
        state.full_retrain(fresh_seed, None)?;
        budget.spent = 0;
        state.k()
    } else {
        state.update_distributed(update)?
    };
    let mut published = Vec::with_capacity(pending_queries.len());
    for query in pending_queries {
        published.push(serve_prediction(state, budget, query, mech_stream)?);
    }
    Ok(StepOutcome {
        published,
        did_full_retrain,
        retrained,
    })
}

/// One row of the per-round budget trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetTraceRow {
    pub round: usize,
    pub spent: u64,
    pub capacity: u64,
    pub did_full_retrain: bool,
}

/// Pure accounting simulation of the interaction loop's budget guard: one
/// row per round for the given per-round query loads.
pub fn simulate_budget_trace(
    eps: f64,
    delta: f64,
    eps_prime: f64,
    query_loads: &[u64],
) -> Result<Vec<BudgetTraceRow>> {
    let mut budget = PrivacyBudget::new(eps, delta, eps_prime)?;
    let mut rows = Vec::with_capacity(query_loads.len());
    for (i, &load) in query_loads.iter().enumerate() {
        let did_full_retrain = budget.exhausted();
        if did_full_retrain {
            budget.spent = 0;
        }
        budget.spent += load;
        rows.push(BudgetTraceRow {
            round: i + 1,
            spent: budget.spent,
            capacity: budget.capacity,
            did_full_retrain,
        });
    }
    Ok(rows)
}

/// Renders a budget trace as CSV.
pub fn render_budget_trace(rows: &[BudgetTraceRow]) -> String {
    let mut out = String::from("round,spent,capacity,did_full_retrain\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.round, row.spent, row.capacity, row.did_full_retrain
        ));
    }
    out
}

/// A finite joint distribution over pairs of outcomes, stored as atoms
/// `(x, y, probability)` with positive mass.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    atoms: Vec<(u32, u32, f64)>,
}

impl JointDistribution {
    /// Validates probabilities (nonnegative, summing to 1 within 1e-9) and
    /// merges duplicate outcome pairs.
    pub fn new(atoms: Vec<(u32, u32, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        let mut total = 0.0;
        for (x, y, p) in atoms {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidRange(format!(
                    "atom probability must be a nonnegative real, got {p}"
                )));
            }
            total += p;
            *merged.entry((x, y)).or_insert(0.0) += p;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidRange(format!(
                "atom probabilities sum to {total}, expected 1"
            )));
        }
        Ok(JointDistribution {
            atoms: merged
                .into_iter()
                .filter(|&(_, p)| p > 0.0)
                .map(|((x, y), p)| (x, y, p))
                .collect(),
        })
    }

    pub fn atoms(&self) -> &[(u32, u32, f64)] {
        &self.atoms
    }

    fn marginals(&self) -> (BTreeMap<u32, f64>, BTreeMap<u32, f64>) {
        let mut px = BTreeMap::new();
        let mut py = BTreeMap::new();
        for &(x, y, p) in &self.atoms {
            *px.entry(x).or_insert(0.0) += p;
            *py.entry(y).or_insert(0.0) += p;
        }
        (px, py)
    }

    /// Product-of-marginals mass of each atom, in atom order.
    fn product_masses(&self) -> Result<Vec<f64>> {
        let (px, py) = self.marginals();
        self.atoms
            .iter()
            .map(|&(x, y, p)| {
                let q = px[&x] * py[&y];
                if q <= 0.0 && p > 0.0 {
                    return Err(Error::DegenerateDistribution);
                }
                Ok(q)
            })
            .collect()
    }
}

/// Point-wise max-information: `ln` of the largest joint/product ratio over
/// single atoms, where the unapproximated supremum over events is attained.
pub fn maxinfo_pointwise(joint: &JointDistribution) -> Result<f64> {
    let products = joint.product_masses()?;
    let best = joint
        .atoms
        .iter()
        .zip(&products)
        .map(|(&(_, _, p), &q)| p / q)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(best.ln())
}

/// Beta-approximate max-information by exhaustive enumeration of all atom
/// subsets: `ln sup_E (P[E] - beta) / Q[E]` over events with `P[E] > beta`.
/// A test oracle only; capped at 20 atoms.
pub fn maxinfo_beta(joint: &JointDistribution, beta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidRange(format!(
            "beta must lie in [0, 1), got {beta}"
        )));
    }
    let n = joint.atoms.len();
    if n > 20 {
        return Err(Error::TooManyAtoms(n));
    }
    let products = joint.product_masses()?;
    let joints: Vec<f64> = joint.atoms.iter().map(|&(_, _, p)| p).collect();
    // Subset sums by peeling the lowest set bit.
    let size = 1usize << n;
    let mut joint_mass = vec![0.0; size];
    let mut product_mass = vec![0.0; size];
    let mut best = f64::NEG_INFINITY;
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        joint_mass[mask] = joint_mass[rest] + joints[low];
        product_mass[mask] = product_mass[rest] + products[low];
        if joint_mass[mask] > beta {
            best = best.max((joint_mass[mask] - beta) / product_mass[mask]);
        }
    }
    Ok(best.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DataPoint, Dataset};
    use crate::learners::LearnerSpec;

    fn stream(tag: u64) -> Stream {
        Stream::from_words(&[0xFEED, tag])
    }

    #[test]
    fn zero_epsilon_is_uniform() {
        let probs = exp_mech_probabilities(&[5, 1], 0.0).unwrap();
        assert_eq!(probs, vec![0.5, 0.5]);
    }

    #[test]
    fn tied_counts_split_evenly() {
        let probs = exp_mech_probabilities(&[2, 2], 3.0).unwrap();
        assert_eq!(probs, vec![0.5, 0.5]);
    }

    #[test]
    fn majority_probability_matches_closed_form() {
        // Scores 3*eps/2 and 0 with eps = 2: P(majority) = e^3 / (e^3 + 1).
        let expected = 3.0f64.exp() / (3.0f64.exp() + 1.0);
        let probs = exp_mech_probabilities(&[3, 0], 2.0).unwrap();
        assert!((probs[0] - expected).abs() < 1e-12);

        let mut s = stream(0);
        let trials = 100_000;
        let mut hits = 0usize;
        for _ in 0..trials {
            if exp_mech_vote(&[3, 0], 2.0, &mut s).unwrap() == 0 {
                hits += 1;
            }
        }
        let freq = hits as f64 / trials as f64;
        assert!((freq - expected).abs() < 0.005, "empirical {freq} vs {expected}");
    }

    #[test]
    fn negative_epsilon_is_rejected() {
        assert_eq!(
            exp_mech_probabilities(&[1, 0], -0.1).unwrap_err(),
            Error::NegativeEpsilon(-0.1)
        );
    }

    #[test]
    fn empty_vote_vectors_are_rejected() {
        assert!(matches!(
            exp_mech_probabilities(&[0, 0], 1.0),
            Err(Error::InvalidRange(_))
        ));
    }

    #[test]
    fn dp_ratio_holds_for_neighboring_counts() {
        // Spot check; the acceptance suite runs the exhaustive version.
        let eps = 1.0;
        let a = exp_mech_probabilities(&[3, 1, 0], eps).unwrap();
        let b = exp_mech_probabilities(&[2, 2, 0], eps).unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            assert!(pa / pb <= eps.exp() + 1e-12);
            assert!(pb / pa <= eps.exp() + 1e-12);
        }
    }

    #[test]
    fn capacity_matches_the_floor_formula() {
        assert_eq!(budget_capacity(0.5, 0.01, 0.05).unwrap(), 2);
        // Per-query cost at or above the whole budget: zero capacity.
        assert_eq!(budget_capacity(0.5, 0.1, 0.5).unwrap(), 0);
    }

    #[test]
    fn capacity_range_checks() {
        assert!(matches!(
            budget_capacity(0.5, 0.6, 0.05),
            Err(Error::ParameterRange(_))
        ));
        assert!(matches!(
            budget_capacity(0.7, 0.01, 0.05),
            Err(Error::ParameterRange(_))
        ));
        assert!(matches!(
            budget_capacity(0.5, 0.01, 0.0),
            Err(Error::ParameterRange(_))
        ));
    }

    #[test]
    fn capacity_is_monotone() {
        let mut last = u64::MAX;
        for eps_prime in [0.01, 0.02, 0.05, 0.1, 0.2] {
            let c = budget_capacity(0.5, 0.01, eps_prime).unwrap();
            assert!(c <= last, "capacity must be non-increasing in eps'");
            last = c;
        }
        let mut last = 0u64;
        for eps in [0.1, 0.2, 0.3, 0.4, 0.5] {
            let c = budget_capacity(eps, 0.01, 0.01).unwrap();
            assert!(c >= last, "capacity must be non-decreasing in eps");
            last = c;
        }
    }

    fn tiny_state(seed: u64) -> (EnsembleState, Dataset) {
        let data = Dataset::from_points(
            2,
            (0..3).map(|i| DataPoint::new(i, vec![i as f64], (i % 2) as usize)),
        )
        .unwrap();
        let state = EnsembleState::train_distributed(
            &data,
            3,
            0.5,
            SeedVector::new(seed, 3),
            LearnerSpec::Lookup,
        )
        .unwrap();
        (state, data)
    }

    #[test]
    fn serving_increments_the_spent_counter() {
        let (state, _) = tiny_state(4);
        let mut budget = PrivacyBudget::new(0.5, 0.01, 0.05).unwrap();
        assert_eq!(budget.spent, 0);
        serve_prediction(&state, &mut budget, &[0.0], &mut stream(1)).unwrap();
        assert_eq!(budget.spent, 1);
    }

    #[test]
    fn huge_epsilon_returns_the_majority_almost_surely() {
        // Votes (A, A, B): score gap eps'/2 makes the softmax ratio explode.
        let mut s = stream(2);
        let trials = 10_000;
        let mut hits = 0;
        for _ in 0..trials {
            if exp_mech_vote(&[2, 1], 1e6, &mut s).unwrap() == 0 {
                hits += 1;
            }
        }
        assert!(hits as f64 / trials as f64 > 0.999);
    }

    #[test]
    fn single_model_vote_is_the_exponential_mechanism_over_its_ballot() {
        // k = 1: one vote for the model's label, all other symbols at 0.
        let probs = exp_mech_probabilities(&[1, 0, 0], 2.0).unwrap();
        let e = 1.0f64.exp();
        let expected = e / (e + 2.0);
        assert!((probs[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn exhausted_budget_triggers_a_reset_with_fresh_seed() {
        let (mut state, data) = tiny_state(7);
        let mut budget = PrivacyBudget::new(0.5, 0.01, 0.05).unwrap();
        assert_eq!(budget.capacity, 2);
        budget.spent = 3;
        let u = Update::delete(data.get(crate::data::PointId(0)).unwrap().clone());
        let outcome = interaction_step(
            &mut state,
            &mut budget,
            &u,
            &[],
            SeedVector::new(555, 3),
            &mut stream(3),
        )
        .unwrap();
        assert!(outcome.did_full_retrain);
        assert_eq!(outcome.retrained, 3);
        assert_eq!(budget.spent, 0);
        assert!(!state.global().contains(crate::data::PointId(0)));
    }

    #[test]
    fn budget_at_capacity_does_not_reset() {
        // Guard is strictly greater-than: spent == capacity keeps updating.
        let (mut state, data) = tiny_state(8);
        let mut budget = PrivacyBudget::new(0.5, 0.01, 0.05).unwrap();
        budget.spent = 2;
        let u = Update::delete(data.get(crate::data::PointId(1)).unwrap().clone());
        let outcome = interaction_step(
            &mut state,
            &mut budget,
            &u,
            &[],
            SeedVector::new(556, 3),
            &mut stream(4),
        )
        .unwrap();
        assert!(!outcome.did_full_retrain);
        assert_eq!(budget.spent, 2, "no queries served, spent unchanged");
    }

    #[test]
    fn budget_trace_follows_the_guard_schedule() {
        let rows = simulate_budget_trace(0.5, 0.01, 0.05, &[1, 1, 1, 1, 1]).unwrap();
        let flags: Vec<bool> = rows.iter().map(|r| r.did_full_retrain).collect();
        // Capacity 2: spent hits 3 after round 3, so round 4 resets.
        assert_eq!(flags, vec![false, false, false, true, false]);
        let csv = render_budget_trace(&rows);
        assert!(csv.starts_with("round,spent,capacity,did_full_retrain\n1,1,2,false\n"));
    }

    #[test]
    fn reset_reshards_independently_of_history() {
        // After a forced reset, shard contents should be indistinguishable
        // from a fresh Bernoulli draw over the current dataset: compare the
        // two empirical distributions over shard-0 subsets by TV distance.
        use std::collections::BTreeMap;
        let data = Dataset::from_points(
            2,
            (0..3).map(|i| DataPoint::new(i, vec![i as f64], (i % 2) as usize)),
        )
        .unwrap();
        let trials = 100_000;
        let mut reset_counts: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        let mut fresh_counts: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        let mut s = stream(9);
        for t in 0..trials {
            let mut state = EnsembleState::train_distributed(
                &data,
                2,
                0.5,
                SeedVector::new(t as u64, 2),
                LearnerSpec::Lookup,
            )
            .unwrap();
            // History: one delete and one add before the reset.
            state
                .update_distributed(&Update::delete(data.get(crate::data::PointId(1)).unwrap().clone()))
                .unwrap();
            state
                .update_distributed(&Update::add(DataPoint::new(7, vec![7.0], 1)))
                .unwrap();
            let mut budget = PrivacyBudget::new(0.5, 0.01, 0.05).unwrap();
            budget.spent = budget.capacity + 1;
            interaction_step(
                &mut state,
                &mut budget,
                &Update::add(DataPoint::new(8, vec![8.0], 0)),
                &[],
                SeedVector::new(1_000_000 + t as u64, 2),
                &mut s,
            )
            .unwrap();
            let ids: Vec<u64> = state.shards()[0].ids().map(|i| i.0).collect();
            *reset_counts.entry(ids).or_insert(0) += 1;

            let mut fresh = Stream::from_words(&[31337, t as u64]);
            let draw = crate::ensemble::sampler(state.global(), 0.5, &mut fresh).unwrap();
            let ids: Vec<u64> = draw.ids().map(|i| i.0).collect();
            *fresh_counts.entry(ids).or_insert(0) += 1;
        }
        let keys: std::collections::BTreeSet<_> = reset_counts
            .keys()
            .chain(fresh_counts.keys())
            .cloned()
            .collect();
        let tv: f64 = keys
            .iter()
            .map(|k| {
                let a = *reset_counts.get(k).unwrap_or(&0) as f64 / trials as f64;
                let b = *fresh_counts.get(k).unwrap_or(&0) as f64 / trials as f64;
                (a - b).abs()
            })
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.02, "TV distance {tv} too large");
    }

    fn identity_joint(n: u32) -> JointDistribution {
        JointDistribution::new((0..n).map(|i| (i, i, 1.0 / n as f64)).collect()).unwrap()
    }

    #[test]
    fn independent_joint_has_zero_maxinfo() {
        let joint = JointDistribution::new(vec![
            (0, 0, 0.25),
            (0, 1, 0.25),
            (1, 0, 0.25),
            (1, 1, 0.25),
        ])
        .unwrap();
        assert!(maxinfo_pointwise(&joint).unwrap().abs() < 1e-12);
    }

    #[test]
    fn identity_channel_gives_log_support_size() {
        let joint = identity_joint(4);
        assert!((maxinfo_pointwise(&joint).unwrap() - 4.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn noisy_channel_ratio_by_hand() {
        // X uniform on 2, Y = X with probability 3/4: diagonal atoms have
        // ratio (3/8) / (1/4) = 1.5.
        let joint = JointDistribution::new(vec![
            (0, 0, 0.375),
            (0, 1, 0.125),
            (1, 0, 0.125),
            (1, 1, 0.375),
        ])
        .unwrap();
        assert!((maxinfo_pointwise(&joint).unwrap() - 1.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn beta_zero_coincides_with_pointwise() {
        for joint in [
            identity_joint(3),
            JointDistribution::new(vec![(0, 0, 0.375), (0, 1, 0.125), (1, 0, 0.125), (1, 1, 0.375)])
                .unwrap(),
        ] {
            let a = maxinfo_pointwise(&joint).unwrap();
            let b = maxinfo_beta(&joint, 0.0).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn large_beta_discounts_the_full_diagonal() {
        // Y = X uniform on 2, beta = 0.6: only the full diagonal qualifies,
        // value ln((1 - 0.6) / 0.5). Raw (negative) supremum is reported.
        let joint = identity_joint(2);
        let expected = (0.4f64 / 0.5).ln();
        assert!((maxinfo_beta(&joint, 0.6).unwrap() - expected).abs() < 1e-12);
        assert!(maxinfo_beta(&joint, 0.6).unwrap() < 0.0);
    }

    #[test]
    fn near_one_beta_reports_raw_supremum() {
        // Full-support joint: only the whole space has mass above 0.99, so
        // the supremum is ln((1 - 0.99) / 1), negative and unclamped.
        let joint = JointDistribution::new(vec![
            (0, 0, 0.375),
            (0, 1, 0.125),
            (1, 0, 0.125),
            (1, 1, 0.375),
        ])
        .unwrap();
        let expected = (0.01f64 / 1.0).ln();
        assert!((maxinfo_beta(&joint, 0.99).unwrap() - expected).abs() < 1e-9);
        assert!(maxinfo_beta(&joint, 0.99).unwrap() < 0.0);
    }

    #[test]
    fn atom_cap_is_enforced() {
        let n = 21;
        let joint =
            JointDistribution::new((0..n).map(|i| (i, i, 1.0 / n as f64)).collect()).unwrap();
        assert_eq!(maxinfo_beta(&joint, 0.1).unwrap_err(), Error::TooManyAtoms(21));
    }

    #[test]
    fn invalid_joints_are_rejected() {
        assert!(matches!(
            JointDistribution::new(vec![(0, 0, 0.7)]),
            Err(Error::InvalidRange(_))
        ));
        assert!(matches!(
            JointDistribution::new(vec![(0, 0, 1.2), (1, 1, -0.2)]),
            Err(Error::InvalidRange(_))
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arbitrary_joint() -> impl Strategy<Value = JointDistribution> {
            proptest::collection::vec((0u32..4, 0u32..4, 1u32..100), 1..10).prop_map(|raw| {
                let total: u32 = raw.iter().map(|&(_, _, w)| w).sum();
                JointDistribution::new(
                    raw.into_iter()
                        .map(|(x, y, w)| (x, y, w as f64 / total as f64))
                        .collect(),
                )
                .unwrap()
            })
        }

        proptest! {
            #[test]
            fn maxinfo_beta_is_non_increasing(joint in arbitrary_joint(), steps in 1usize..6) {
                let betas: Vec<f64> = (0..=steps).map(|i| 0.9 * i as f64 / steps as f64).collect();
                let mut last = f64::INFINITY;
                for beta in betas {
                    let value = maxinfo_beta(&joint, beta).unwrap();
                    prop_assert!(value <= last + 1e-12);
                    last = value;
                }
            }

            #[test]
            fn exp_mech_ratio_bounded_on_random_neighbors(
                counts in proptest::collection::vec(0u64..5, 2..5),
                from in 0usize..5,
                to in 0usize..5,
                eps in 0.0f64..3.0,
            ) {
                let mut counts = counts;
                if counts.iter().sum::<u64>() == 0 {
                    counts[0] = 1;
                }
                let from = from % counts.len();
                let to = to % counts.len();
                prop_assume!(counts[from] > 0 && from != to);
                let mut moved = counts.clone();
                moved[from] -= 1;
                moved[to] += 1;
                let a = exp_mech_probabilities(&counts, eps).unwrap();
                let b = exp_mech_probabilities(&moved, eps).unwrap();
                for (pa, pb) in a.iter().zip(&b) {
                    prop_assert!(pa / pb <= eps.exp() * (1.0 + 1e-9));
                    prop_assert!(pb / pa <= eps.exp() * (1.0 + 1e-9));
                }
            }
        }
    }
}

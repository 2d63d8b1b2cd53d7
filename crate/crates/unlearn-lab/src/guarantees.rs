//! Closed-form guarantee calculators.
//!
//! Everything here is pure arithmetic: the max-information bound for DP
//! algorithms, the adaptive-to-nonadaptive unlearning parameter reduction,
//! binomial tail bounds on per-round retrain counts, and the minimum
//! dataset size that makes the duplicate-pair attack decisive. All
//! logarithms are natural. The big-O constants the bounds inherit are not
//! pinned by theory; they enter as configurable multipliers defaulting to 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::privacy::check_dp_range;

/// An (alpha, beta, gamma) unlearning guarantee triple. `beta` and `gamma`
/// are probabilities and are capped at 1 (anything larger is vacuous).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnlearningParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl UnlearningParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if alpha.is_nan() || alpha < 0.0 {
            return Err(Error::InvalidRange(format!(
                "alpha must be nonnegative, got {alpha}"
            )));
        }
        for (name, v) in [("beta", beta), ("gamma", gamma)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidRange(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(UnlearningParams { alpha, beta, gamma })
    }

    /// The perfect guarantee (0, 0, 0).
    pub fn zero() -> Self {
        UnlearningParams {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
        }
    }
}

/// Multipliers standing in for the unspecified big-O constants of the
/// max-information bound: `c1` scales eps', `c2` scales the m*sqrt(delta/eps)
/// slack terms. Defaults are 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub c1: f64,
    pub c2: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        BoundConstants { c1: 1.0, c2: 1.0 }
    }
}

impl BoundConstants {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if !(c1 > 0.0 && c2 > 0.0) {
            return Err(Error::InvalidRange(format!(
                "bound constants must be positive, got c1 = {c1}, c2 = {c2}"
            )));
        }
        Ok(BoundConstants { c1, c2 })
    }
}

fn check_m(m: u32) -> Result<()> {
    if m < 1 {
        return Err(Error::ParameterRange("m must be >= 1".into()));
    }
    Ok(())
}

/// Max-information parameters of an (eps, delta)-DP algorithm over m seeds:
///
///   eps' = c1 * (eps^2 m + m sqrt(delta/eps))
///   delta' = exp(-eps^2 m) + c2 * m sqrt(delta/eps)
///
/// valid for 0 < eps <= 1/2 and 0 < delta < eps.
pub fn maxinfo_bound(eps: f64, delta: f64, m: u32, constants: BoundConstants) -> Result<(f64, f64)> {
    check_dp_range(eps, delta)?;
    check_m(m)?;
    let m = f64::from(m);
    let slack = m * (delta / eps).sqrt();
    let eps_prime = constants.c1 * (eps * eps * m + slack);
    let delta_prime = (-eps * eps * m).exp() + constants.c2 * slack;
    Ok((eps_prime, delta_prime))
}

/// Lifts a nonadaptive (alpha, beta, gamma) guarantee to an adaptive one
/// when outputs are published through an (eps, delta)-DP channel over the
/// m seed draws:
///
///   alpha' = alpha + eps'
///   beta'  = beta e^{eps'} + sqrt(delta')
///   gamma' = gamma + sqrt(delta')
pub fn adaptive_params(
    nonadaptive: UnlearningParams,
    eps: f64,
    delta: f64,
    m: u32,
    constants: BoundConstants,
) -> Result<UnlearningParams> {
    let (eps_prime, delta_prime) = maxinfo_bound(eps, delta, m, constants)?;
    let root = delta_prime.sqrt();
    UnlearningParams::new(
        nonadaptive.alpha + eps_prime,
        (nonadaptive.beta * eps_prime.exp() + root).min(1.0),
        (nonadaptive.gamma + root).min(1.0),
    )
}

/// Adaptive guarantee of the k-shard distributed engine with DP publishing:
/// the nonadaptive base is the perfect (0, 0, 0) guarantee.
pub fn distributed_params(
    eps: f64,
    delta: f64,
    k: u32,
    constants: BoundConstants,
) -> Result<UnlearningParams> {
    adaptive_params(UnlearningParams::zero(), eps, delta, k, constants)
}

/// High-probability binomial upper bound: with probability at least 1 - xi,
/// `Bin(k, p) <= kp + sqrt(2 kp ln(1/xi))`.
pub fn binomial_tail_bound(k: u32, p: f64, xi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::InvalidConfidence(xi));
    }
    let mu = f64::from(k) * p;
    Ok(mu + (2.0 * mu * (1.0 / xi).ln()).sqrt())
}

/// Which per-round retrain-count bound to evaluate (all with p = 1/k, so
/// the mean count is 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrainBoundMode {
    /// Fixed update sequences: 1 + sqrt(2 ln(1/xi)).
    NonAdaptive,
    /// Adaptive, union bound over all n + t live points:
    /// 1 + sqrt(2 ln((n+t)/xi)).
    AdaptiveUnion,
    /// Adaptive, the minimum of the union branch and the max-information
    /// branch at confidence xi - delta'.
    AdaptiveMaxInfo,
}

/// High-probability bound on the round-t retrain count N^t.
pub fn retrain_bound(
    mode: RetrainBoundMode,
    n: u64,
    t: u64,
    xi: f64,
    eps_prime: f64,
    delta_prime: f64,
) -> Result<f64> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::InvalidConfidence(xi));
    }
    let live = (n + t) as f64;
    Ok(match mode {
        RetrainBoundMode::NonAdaptive => 1.0 + (2.0 * (1.0 / xi).ln()).sqrt(),
        RetrainBoundMode::AdaptiveUnion => 1.0 + (2.0 * (live / xi).ln()).sqrt(),
        RetrainBoundMode::AdaptiveMaxInfo => {
            if xi <= delta_prime {
                return Err(Error::ConfidenceBelowDeltaPrime {
                    xi,
                    delta_prime,
                });
            }
            let slack = xi - delta_prime;
            let union_branch = (2.0 * (2.0 * live / slack).ln()).sqrt();
            let maxinfo_branch = (2.0 * eps_prime + 2.0 * (2.0 / slack).ln()).sqrt();
            1.0 + union_branch.min(maxinfo_branch)
        }
    })
}

/// Minimum number of duplicate pairs for the lookup attack to refute an
/// (alpha, beta, gamma) guarantee with retrain-event probability below
/// `c = (1 - beta) / e^alpha`: `ceil(max(13 ln(1/gamma), 100 ln(1/c) / ln 3))`,
/// clamped to at least 1.
pub fn min_n_for_attack(gamma: f64, c: f64) -> Result<u64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidRange(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidRange(format!(
            "c must lie in (0, 1), got {c}"
        )));
    }
    let first = 13.0 * (1.0 / gamma).ln();
    let second = 100.0 * (1.0 / c).ln() / 3.0f64.ln();
    Ok((first.max(second).ceil() as u64).max(1))
}

/// Probability, under full retraining into k = 3 partitions, that every one
/// of the `n_pairs - t` surviving duplicate pairs lands inside a single
/// shard: `3^{-(n_pairs - t)}`.
pub fn retrain_event_probability(n_pairs: u64, t: u64, k: u32) -> Result<f64> {
    if k != 3 {
        return Err(Error::UnsupportedK(k as usize));
    }
    if n_pairs == 0 || t > n_pairs - 1 {
        return Err(Error::InvalidRange(format!(
            "need 0 <= t <= n_pairs - 1, got t = {t}, n_pairs = {n_pairs}"
        )));
    }
    Ok(3.0f64.powi(-((n_pairs - t) as i32)))
}

/// Renders the guarantee-calculator table: inputs, the max-information pair
/// (eps', delta'), then (alpha, beta, gamma). Column order is fixed.
pub fn format_params_table(
    base: UnlearningParams,
    eps: f64,
    delta: f64,
    m: u32,
    constants: BoundConstants,
) -> Result<String> {
    let (eps_prime, delta_prime) = maxinfo_bound(eps, delta, m, constants)?;
    let lifted = adaptive_params(base, eps, delta, m, constants)?;
    let mut out = String::new();
    out.push_str(&format!(
        "{:<10} {:<12} {:<5} {:<6} {:<6} {:<10} {:<10} {:<10}\n",
        "epsilon", "delta", "m", "c1", "c2", "alpha0", "beta0", "gamma0"
    ));
    out.push_str(&format!(
        "{:<10} {:<12} {:<5} {:<6} {:<6} {:<10} {:<10} {:<10}\n",
        eps, delta, m, constants.c1, constants.c2, base.alpha, base.beta, base.gamma
    ));
    out.push_str(&format!(
        "{:<12} {:<12}\n",
        "eps_prime", "delta_prime"
    ));
    out.push_str(&format!("{:<12.6} {:<12.6}\n", eps_prime, delta_prime));
    out.push_str(&format!(
        "{:<12} {:<12} {:<12}\n",
        "alpha", "beta", "gamma"
    ));
    out.push_str(&format!(
        "{:<12.6} {:<12.6} {:<12.6}\n",
        lifted.alpha, lifted.beta, lifted.gamma
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const C1: BoundConstants = BoundConstants { c1: 1.0, c2: 1.0 };

    #[test]
    fn maxinfo_bound_matches_hand_evaluation() {
        // eps^2 m = 1; m sqrt(delta/eps) = 4 sqrt(2e-8).
        let (eps_prime, delta_prime) = maxinfo_bound(0.5, 1e-8, 4, C1).unwrap();
        assert!((eps_prime - 1.000_565_685).abs() < 1e-6);
        assert!((delta_prime - 0.368_445_2).abs() < 1e-6);
    }

    #[test]
    fn vanishing_slack_recovers_the_leading_terms() {
        let (eps_prime, delta_prime) = maxinfo_bound(0.5, 1e-300, 4, C1).unwrap();
        assert!((eps_prime - 1.0).abs() < 1e-9);
        assert!((delta_prime - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn doubling_m_doubles_eps_and_squares_delta() {
        let (e1, d1) = maxinfo_bound(0.5, 1e-300, 4, C1).unwrap();
        let (e2, d2) = maxinfo_bound(0.5, 1e-300, 8, C1).unwrap();
        assert!((e2 - 2.0 * e1).abs() < 1e-9);
        assert!((d2 - d1 * d1).abs() < 1e-9);
    }

    #[test]
    fn zero_base_params_become_the_bound_roots() {
        let lifted = adaptive_params(UnlearningParams::zero(), 0.5, 1e-8, 4, C1).unwrap();
        let (eps_prime, delta_prime) = maxinfo_bound(0.5, 1e-8, 4, C1).unwrap();
        assert_eq!(lifted.alpha, eps_prime);
        assert_eq!(lifted.beta, delta_prime.sqrt());
        assert_eq!(lifted.gamma, delta_prime.sqrt());
    }

    #[test]
    fn adaptive_params_match_hand_evaluation() {
        let lifted = adaptive_params(UnlearningParams::zero(), 0.5, 1e-8, 4, C1).unwrap();
        assert!((lifted.alpha - 1.000_566).abs() < 1e-4);
        assert!((lifted.beta - 0.607_00).abs() < 1e-4);
        assert!((lifted.gamma - 0.607_00).abs() < 1e-4);
    }

    #[test]
    fn beta_and_gamma_dominate_the_delta_root() {
        for (b, g) in [(0.0, 0.0), (0.1, 0.2), (0.5, 0.9)] {
            let base = UnlearningParams::new(0.0, b, g).unwrap();
            let lifted = adaptive_params(base, 0.4, 1e-6, 3, C1).unwrap();
            let (_, delta_prime) = maxinfo_bound(0.4, 1e-6, 3, C1).unwrap();
            assert!(lifted.beta >= delta_prime.sqrt());
            assert!(lifted.gamma >= delta_prime.sqrt());
        }
    }

    #[test]
    fn distributed_params_equal_adaptive_of_zero() {
        for (eps, delta, k) in [(0.5, 1e-8, 4), (0.2, 1e-12, 25), (0.3, 1e-4, 7)] {
            assert_eq!(
                distributed_params(eps, delta, k, C1).unwrap(),
                adaptive_params(UnlearningParams::zero(), eps, delta, k, C1).unwrap()
            );
        }
    }

    #[test]
    fn distributed_params_match_hand_evaluation() {
        let params = distributed_params(0.2, 1e-12, 25, C1).unwrap();
        assert!((params.alpha - 1.000_055_9).abs() < 1e-5);
        assert!((params.beta - 0.606_58).abs() < 1e-4);
    }

    #[test]
    fn alpha_is_monotone_in_k() {
        let mut last = 0.0;
        for k in [1, 2, 4, 8, 16, 32] {
            let alpha = distributed_params(0.3, 1e-6, k, C1).unwrap().alpha;
            assert!(alpha >= last);
            last = alpha;
        }
    }

    #[test]
    fn monotone_where_the_formulas_are_monotone() {
        // The formulas are genuinely monotone in delta (every term grows),
        // in m for alpha (both alpha terms are linear in m), and in eps for
        // alpha whenever delta <= 16 eps^5 (the slack derivative is then
        // dominated). beta and gamma are NOT monotone in eps or m: their
        // leading failure term exp(-eps^2 m) shrinks as either grows.
        let epss: Vec<f64> = (1..=5).map(|i| 0.1 * i as f64).collect();
        let deltas: Vec<f64> = (2..=6).map(|i| 10f64.powi(-i)).rev().collect();
        let ms = [1u32, 2, 4, 8];
        let value = |e: f64, d: f64, m: u32| {
            if d >= e {
                return None;
            }
            distributed_params(e, d, m, C1).ok()
        };
        for (i, &e) in epss.iter().enumerate() {
            for (j, &d) in deltas.iter().enumerate() {
                for (l, &m) in ms.iter().enumerate() {
                    let Some(here) = value(e, d, m) else { continue };
                    if j + 1 < deltas.len() {
                        if let Some(next) = value(e, deltas[j + 1], m) {
                            assert!(here.alpha <= next.alpha + 1e-12, "alpha not monotone in delta");
                            assert!(here.beta <= next.beta + 1e-12, "beta not monotone in delta");
                            assert!(here.gamma <= next.gamma + 1e-12, "gamma not monotone in delta");
                        }
                    }
                    if l + 1 < ms.len() {
                        if let Some(next) = value(e, d, ms[l + 1]) {
                            assert!(here.alpha <= next.alpha + 1e-12, "alpha not monotone in m");
                        }
                    }
                    if i + 1 < epss.len() && d <= 16.0 * e.powi(5) {
                        if let Some(next) = value(epss[i + 1], d, m) {
                            assert!(here.alpha <= next.alpha + 1e-12, "alpha not monotone in eps");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn beta_is_not_monotone_in_eps() {
        // Documents the non-monotonicity: with tiny delta the failure mass
        // exp(-eps^2 m) dominates, so better privacy (smaller eps) gives a
        // WEAKER beta. Guarantee quality peaks at interior eps.
        let weak = distributed_params(0.1, 1e-10, 4, C1).unwrap();
        let strong = distributed_params(0.5, 1e-10, 4, C1).unwrap();
        assert!(strong.beta < weak.beta);
    }

    #[test]
    fn binomial_bound_at_unit_mean() {
        // mu = 1, xi = e^-2: 1 + sqrt(2 * 2) = 3.
        let bound = binomial_tail_bound(10, 0.1, (-2.0f64).exp()).unwrap();
        assert!((bound - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bound_approaches_the_mean_as_xi_approaches_one() {
        let bound = binomial_tail_bound(10, 0.1, 1.0 - 1e-12).unwrap();
        assert!((bound - 1.0).abs() < 1e-4);
    }

    #[test]
    fn binomial_bound_is_valid_by_monte_carlo() {
        // Bin(10, 0.1) should exceed the xi = 0.05 bound in at most ~5% of
        // draws; allow +1% of estimator slack at 1e5 samples.
        use crate::rng::Stream;
        use rand::Rng;
        let xi = 0.05;
        let bound = binomial_tail_bound(10, 0.1, xi).unwrap();
        let mut stream = Stream::from_words(&[404]);
        let trials = 100_000;
        let mut exceed = 0usize;
        for _ in 0..trials {
            let x = (0..10).filter(|_| stream.random::<f64>() < 0.1).count();
            if x as f64 > bound {
                exceed += 1;
            }
        }
        assert!(exceed as f64 / trials as f64 <= xi + 0.01);
    }

    #[test]
    fn fact_a1_validity_on_a_parameter_grid() {
        use crate::rng::Stream;
        use rand::Rng;
        let xi = 0.05;
        let trials = 100_000;
        for (k, p) in [(10u32, 0.1), (10, 0.3), (50, 0.02), (20, 0.25), (5, 0.5)] {
            let bound = binomial_tail_bound(k, p, xi).unwrap();
            let mut stream = Stream::from_words(&[405, k as u64, p.to_bits()]);
            let mut exceed = 0usize;
            for _ in 0..trials {
                let x = (0..k).filter(|_| stream.random::<f64>() < p).count();
                if x as f64 > bound {
                    exceed += 1;
                }
            }
            let rate = exceed as f64 / trials as f64;
            let sigma = (xi * (1.0 - xi) / trials as f64).sqrt();
            assert!(rate <= xi + 3.0 * sigma, "k={k} p={p}: exceedance {rate}");
        }
    }

    #[test]
    fn retrain_bounds_match_hand_evaluation() {
        let non = retrain_bound(RetrainBoundMode::NonAdaptive, 0, 0, (-2.0f64).exp(), 0.0, 0.0)
            .unwrap();
        assert!((non - 3.0).abs() < 1e-12);
        let union =
            retrain_bound(RetrainBoundMode::AdaptiveUnion, 99, 1, 0.01, 0.0, 0.0).unwrap();
        assert!((union - 5.2919).abs() < 1e-3);
    }

    #[test]
    fn maxinfo_mode_needs_headroom_over_delta_prime() {
        assert_eq!(
            retrain_bound(RetrainBoundMode::AdaptiveMaxInfo, 10, 1, 0.01, 1.0, 0.05).unwrap_err(),
            Error::ConfidenceBelowDeltaPrime {
                xi: 0.01,
                delta_prime: 0.05
            }
        );
    }

    #[test]
    fn combined_bound_is_the_minimum_of_its_branches() {
        for (n, t, xi, eps_prime, delta_prime) in [
            (100u64, 5u64, 0.1, 0.5, 0.01),
            (1000, 50, 0.2, 4.0, 0.05),
            (10, 1, 0.5, 0.01, 0.001),
        ] {
            let combined =
                retrain_bound(RetrainBoundMode::AdaptiveMaxInfo, n, t, xi, eps_prime, delta_prime)
                    .unwrap();
            let slack = xi - delta_prime;
            let union = 1.0 + (2.0 * (2.0 * (n + t) as f64 / slack).ln()).sqrt();
            let maxinfo = 1.0 + (2.0 * eps_prime + 2.0 * (2.0 / slack).ln()).sqrt();
            assert!((combined - union.min(maxinfo)).abs() < 1e-12);
        }
    }

    #[test]
    fn maxinfo_branch_wins_when_eps_prime_is_small() {
        // For eps' < ln(n+t), the combined bound is no worse than the union
        // branch at the halved confidence.
        let (n, t, xi, delta_prime) = (200u64, 10u64, 0.1, 0.01);
        for eps_prime in [0.0, 0.5, 1.0, 3.0] {
            assert!(eps_prime < ((n + t) as f64).ln());
            let combined =
                retrain_bound(RetrainBoundMode::AdaptiveMaxInfo, n, t, xi, eps_prime, delta_prime)
                    .unwrap();
            let slack = xi - delta_prime;
            let union_halved = 1.0 + (2.0 * (2.0 * (n + t) as f64 / slack).ln()).sqrt();
            assert!(combined <= union_halved + 1e-12);
        }
    }

    #[test]
    fn attack_size_matches_hand_evaluation() {
        // max(13 ln 20, 100 ln 10 / ln 3) = max(38.94, 209.59) -> 210.
        assert_eq!(min_n_for_attack(0.05, 0.1).unwrap(), 210);
    }

    #[test]
    fn attack_size_clamps_to_one_in_the_permissive_limit() {
        assert_eq!(min_n_for_attack(0.999_999, 0.999_999).unwrap(), 1);
    }

    #[test]
    fn attack_size_grows_as_c_shrinks() {
        let mut last = 0;
        for c in [0.5, 0.1, 0.01, 0.001] {
            let n = min_n_for_attack(0.05, c).unwrap();
            assert!(n >= last);
            last = n;
        }
    }

    #[test]
    fn event_probability_formula() {
        assert!((retrain_event_probability(1, 0, 3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((retrain_event_probability(3, 1, 3).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(
            retrain_event_probability(2, 0, 4).unwrap_err(),
            Error::UnsupportedK(4)
        );
        assert!(matches!(
            retrain_event_probability(2, 2, 3),
            Err(Error::InvalidRange(_))
        ));
    }

    #[test]
    fn event_probability_matches_partition_monte_carlo() {
        // Simulate the full-retraining partition of 2 surviving pairs and
        // count the all-pairs-co-sharded event; oracle value 1/9.
        use crate::data::{DataPoint, Dataset};
        use crate::ensemble::EnsembleState;
        use crate::learners::LearnerSpec;
        use crate::rng::{SeedVector, Stream};
        let data = Dataset::from_points(
            2,
            [
                DataPoint::new(0, vec![0.0], 0),
                DataPoint::new(1, vec![0.0], 0),
                DataPoint::new(2, vec![1.0], 1),
                DataPoint::new(3, vec![1.0], 1),
            ],
        )
        .unwrap();
        let mut assign = Stream::from_words(&[406]);
        let trials = 100_000;
        let mut hits = 0usize;
        for _ in 0..trials {
            let state = EnsembleState::train_partition(
                &data,
                3,
                SeedVector::new(0, 3),
                LearnerSpec::Lookup,
                &mut assign,
            )
            .unwrap();
            let co_sharded = |a: u64, b: u64| {
                state
                    .shards()
                    .iter()
                    .any(|s| s.contains(crate::data::PointId(a)) && s.contains(crate::data::PointId(b)))
            };
            if co_sharded(0, 1) && co_sharded(2, 3) {
                hits += 1;
            }
        }
        let freq = hits as f64 / trials as f64;
        let expected = retrain_event_probability(2, 0, 3).unwrap();
        assert!((freq - expected).abs() < 0.01, "frequency {freq}");
    }

    #[test]
    fn params_table_is_stable() {
        let table =
            format_params_table(UnlearningParams::zero(), 0.5, 0.00000001, 4, C1).unwrap();
        let expected = concat!(
            "epsilon    delta        m     c1     c2     alpha0     beta0      gamma0    \n",
            "0.5        0.00000001   4     1      1      0          0          0         \n",
            "eps_prime    delta_prime \n",
            "1.000566     0.368445    \n",
            "alpha        beta         gamma       \n",
            "1.000566     0.606997     0.606997    \n",
        );
        assert_eq!(table, expected);
    }
}

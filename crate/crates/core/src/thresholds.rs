//! Conductor thresholds from the explicit formula: the existence threshold
//! Q0 (below it no cuspidal L-function with the given Gamma factors and
//! central-zero order exists) and the forced-sign threshold Q1 (below it
//! any such L-function must have a(2) < 0).

use std::f64::consts::PI;

use crate::engine::{prime_coefficient, EllCache, EngineError};
use crate::feq::ramanujan_c_bound;
use crate::fejer::FejerTestFunction;
use crate::special::QuadratureSpec;

/// Where a conductor value falls relative to the two thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Classification {
    /// q <= Q0: the explicit formula is violated even with the most
    /// favorable coefficients, so no such L-function exists.
    Impossible,
    /// Q0 < q <= Q1: the L-function may exist, but only with a(2) < 0
    /// (strictly, a(2) <= the non-positive upper bound).
    ForcedNegativeA2,
    /// q > Q1: the sign of a(2) is not constrained by this test function.
    Unconstrained,
}

/// Hypotheses the thresholds rely on: the Ramanujan bound |a(p)| <= d on
/// the prime side and RH (zeros on the critical line) on the zero side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assumptions {
    pub ramanujan: bool,
    pub riemann_hypothesis: bool,
}

impl Default for Assumptions {
    fn default() -> Self {
        Self { ramanujan: true, riemann_hypothesis: true }
    }
}

/// Thresholds for a fixed Gamma-factor signature, degree, and rank.
#[derive(Debug, Clone)]
pub struct ThresholdResult {
    pub log_q0: f64,
    pub log_q1: f64,
    pub degree: usize,
    pub rank: usize,
    /// sum of the archimedean ell(mu_j, f) terms
    pub ell_sum: f64,
    /// the coefficient kappa_2 = (1/pi) fhat(log 2 / 2pi) / sqrt(2)
    pub kappa2: f64,
    pub assumptions: Assumptions,
}

/// Classification of a concrete conductor scale, with the a(2) bound when
/// existence is not already ruled out.
#[derive(Debug, Clone)]
pub struct PredictionOutcome {
    pub classification: Classification,
    pub a2_upper_bound: Option<f64>,
    pub thresholds: ThresholdResult,
}

impl ThresholdResult {
    pub fn q0(&self) -> f64 {
        self.log_q0.exp()
    }

    pub fn q1(&self) -> f64 {
        self.log_q1.exp()
    }

    /// q1/q0 = exp(sum over the a(2)-controlled part of the prime side).
    pub fn ratio(&self) -> f64 {
        (self.log_q1 - self.log_q0).exp()
    }

    /// Largest a(2) compatible with existence at conductor scale q:
    /// log(q / q1) / (pi kappa_2 log 2). Zero at q1, -degree at q0.
    pub fn a2_upper_bound(&self, q_scale: f64) -> f64 {
        (q_scale.ln() - self.log_q1) / (PI * self.kappa2 * 2.0_f64.ln())
    }

    /// Boundary convention: q = q0 is Impossible, q = q1 is
    /// ForcedNegativeA2 (measure-zero boundaries go to the more
    /// conservative class).
    pub fn classify(&self, q_scale: f64) -> Classification {
        let lq = q_scale.ln();
        if lq <= self.log_q0 {
            Classification::Impossible
        } else if lq <= self.log_q1 {
            Classification::ForcedNegativeA2
        } else {
            Classification::Unconstrained
        }
    }

    /// Classification together with the a(2) upper bound (absent when the
    /// conductor is already below the existence threshold).
    pub fn predict(&self, q_scale: f64) -> PredictionOutcome {
        let classification = self.classify(q_scale);
        let a2_upper_bound = (classification != Classification::Impossible)
            .then(|| self.a2_upper_bound(q_scale));
        PredictionOutcome {
            classification,
            a2_upper_bound,
            thresholds: self.clone(),
        }
    }
}

/// Computes both thresholds for Gamma factors `mu` (degree = mu.len()),
/// requiring a central zero of order >= `rank`.
///
/// log Q0 solves rank * f(0) = (1/pi) log Q + (1/2pi) sum_j ell(mu_j, f)
///   + sum_{n in window} d Lambda(n) (1/pi) fhat(log n / 2pi) / sqrt(n),
/// i.e. with every visible prime term at its Ramanujan maximum. log Q1 is
/// the same with the n = 2 term removed: past it, existence no longer
/// forces c(2) > 0.
pub fn compute_thresholds(
    mu: &[f64],
    rank: usize,
    tf: &FejerTestFunction,
    spec: &QuadratureSpec,
    cache: &EllCache,
) -> Result<ThresholdResult, EngineError> {
    let degree = mu.len();
    let mut ell_sum = 0.0;
    for &m in mu {
        ell_sum += cache.ell_term(m, tf, spec)?;
    }
    let (n_min, n_max) = tf.support_window()?;
    let mut prime_side_max = 0.0;
    let mut prime_side_without_two = 0.0;
    for n in n_min..=n_max {
        let term = prime_coefficient(n, tf) * ramanujan_c_bound(n, degree);
        prime_side_max += term;
        if n != 2 {
            prime_side_without_two += term;
        }
    }
    let base = PI * (rank as f64 * tf.f_at_zero()) - 0.5 * ell_sum;
    Ok(ThresholdResult {
        log_q0: base - PI * prime_side_max,
        log_q1: base - PI * prime_side_without_two,
        degree,
        rank,
        ell_sum,
        kappa2: prime_coefficient(2, tf),
        assumptions: Assumptions::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_oracles::ell_series_oracle;
    use std::f64::consts::E;

    fn setup() -> (FejerTestFunction, QuadratureSpec, EllCache) {
        (FejerTestFunction::paper(), QuadratureSpec::default(), EllCache::new())
    }

    #[test]
    fn ratio_closed_form_degree_two() {
        let (tf, spec, cache) = setup();
        let t = compute_thresholds(&[0.25, 0.75], 0, &tf, &spec, &cache).unwrap();
        // log(q1/q0) = 2 log2 (1 - log2)/sqrt 2
        let closed = 2.0 * 2.0_f64.ln() * (1.0 - 2.0_f64.ln()) / 2.0_f64.sqrt();
        assert!((t.log_q1 - t.log_q0 - closed).abs() < 1e-14);
        assert!((closed - 0.300_794_975_102_397).abs() < 1e-14);
        assert!((t.ratio() - 1.350_932_338_378_37).abs() < 1e-12);
    }

    #[test]
    fn rank_increment_multiplies_q_by_sqrt_e() {
        let (tf, spec, cache) = setup();
        let t0 = compute_thresholds(&[0.25, 0.75], 0, &tf, &spec, &cache).unwrap();
        let t1 = compute_thresholds(&[0.25, 0.75], 1, &tf, &spec, &cache).unwrap();
        // pi * f(0) = 1/2 at delta = 1/(2 pi)
        assert!((t1.log_q0 - t0.log_q0 - 0.5).abs() < 1e-14);
        assert!((t1.log_q1 - t0.log_q1 - 0.5).abs() < 1e-14);
        // the ell integrals were computed once, not twice
        assert_eq!(cache.evaluation_count(), 2);
    }

    #[test]
    fn weight_two_thresholds_match_series_oracle() {
        let (tf, spec, cache) = setup();
        let t = compute_thresholds(&[0.25, 0.75], 0, &tf, &spec, &cache).unwrap();
        let d = tf.delta();
        let ell_sum = ell_series_oracle(0.25, d) + ell_series_oracle(0.75, d);
        let expect_q1 = -0.5 * ell_sum;
        assert!((t.log_q1 - expect_q1).abs() < 2e-7);
        // frozen from the exact series: N0 = q0^2 for weight 2
        assert!((t.q0() * t.q0() - 5.790_9).abs() < 1e-3);
        assert!((t.q1() * t.q1() - 10.567_4).abs() < 2e-3);
    }

    #[test]
    fn a2_bound_anchors() {
        let (tf, spec, cache) = setup();
        let t = compute_thresholds(&[0.25, 0.75], 0, &tf, &spec, &cache).unwrap();
        assert!(t.a2_upper_bound(t.q1()).abs() < 1e-12);
        assert!((t.a2_upper_bound(t.q0()) + 2.0).abs() < 1e-12);
        // strictly increasing in q
        assert!(t.a2_upper_bound(3.0) < t.a2_upper_bound(4.0));
    }

    #[test]
    fn classification_bands() {
        let (tf, spec, cache) = setup();
        let t = compute_thresholds(&[0.25, 0.75], 0, &tf, &spec, &cache).unwrap();
        assert_eq!(t.classify(t.q0() * 0.9), Classification::Impossible);
        // exact boundary, modulo the exp/ln roundtrip of q0()
        assert_eq!(
            t.classify(t.q0() * (1.0 - 1e-13)),
            Classification::Impossible
        );
        assert_eq!(
            t.classify(0.5 * (t.q0() + t.q1())),
            Classification::ForcedNegativeA2
        );
        assert_eq!(
            t.classify(t.q1() * (1.0 - 1e-13)),
            Classification::ForcedNegativeA2
        );
        assert_eq!(t.classify(t.q1() * 1.01), Classification::Unconstrained);
        assert!(Classification::Impossible < Classification::ForcedNegativeA2);
        assert!(Classification::ForcedNegativeA2 < Classification::Unconstrained);
    }

    #[test]
    fn predict_attaches_bound_and_assumptions() {
        let (tf, spec, cache) = setup();
        let t = compute_thresholds(&[0.25, 0.75], 0, &tf, &spec, &cache).unwrap();
        let below = t.predict(t.q0() * 0.5);
        assert_eq!(below.classification, Classification::Impossible);
        assert!(below.a2_upper_bound.is_none());
        let mid = t.predict((t.q0() * t.q1()).sqrt());
        assert_eq!(mid.classification, Classification::ForcedNegativeA2);
        assert!(mid.a2_upper_bound.unwrap() < 0.0);
        assert!(mid.thresholds.assumptions.ramanujan);
        assert!(mid.thresholds.assumptions.riemann_hypothesis);
        let above = t.predict(t.q1() * 2.0);
        assert!(above.a2_upper_bound.unwrap() > 0.0);
    }

    #[test]
    fn a2_bound_slope_in_log_q() {
        let (tf, spec, cache) = setup();
        let t = compute_thresholds(&[0.25, 0.75], 0, &tf, &spec, &cache).unwrap();
        // slope d(a2_ub)/d(log q) = 1/(pi kappa2 log 2) = sqrt2/(log2(1-log2))
        let slope = (t.a2_upper_bound(E) - t.a2_upper_bound(1.0)) / 1.0;
        let closed = 2.0_f64.sqrt() / (2.0_f64.ln() * (1.0 - 2.0_f64.ln()));
        assert!((slope - closed).abs() < 1e-10);
        assert!((closed - 6.649_06).abs() < 1e-4);
    }

    #[test]
    fn classification_monotone_over_q_ladder() {
        let (tf, spec, cache) = setup();
        let t = compute_thresholds(&[0.25, 0.75], 1, &tf, &spec, &cache).unwrap();
        let lo = t.q0() / 4.0;
        let hi = t.q1() * 4.0;
        let mut prev = Classification::Impossible;
        for i in 0..100 {
            let q = lo * (hi / lo).powf(i as f64 / 99.0);
            let c = t.classify(q);
            assert!(c >= prev, "classification regressed at q = {q}");
            prev = c;
        }
    }

    #[test]
    fn higher_weight_lowers_thresholds() {
        let (tf, spec, cache) = setup();
        let mut prev = f64::INFINITY;
        for k in [2.0f64, 4.0, 6.0, 8.0, 10.0, 12.0] {
            let mu = [(k - 1.0) / 4.0, (k + 1.0) / 4.0];
            let t = compute_thresholds(&mu, 0, &tf, &spec, &cache).unwrap();
            assert!(t.log_q0 < prev, "weight {k}");
            prev = t.log_q0;
        }
    }
}

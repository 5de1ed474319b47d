//! Term-by-term evaluation of the explicit formula: the archimedean
//! ell(mu, f) integrals, the log Q term, the prime side, and a two-sided
//! residual check against known zeros.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::feq::{ramanujan_c_bound, CoefficientData, FunctionalEquationParams};
use crate::fejer::{FejerTestFunction, TestFnError};
use crate::special::{digamma_re, integrate_even_decaying, ComplexPoint, QuadratureSpec, SpecialFnError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Quadrature(#[from] SpecialFnError),
    #[error(transparent)]
    TestFn(#[from] TestFnError),
    #[error("coefficient c({0}) required by the support window is missing")]
    IncompleteData(u64),
    #[error("zero list is not sorted ascending")]
    UnsortedZeros,
    #[error("central multiplicity {0} disagrees with {1} zero ordinates at the origin")]
    CentralMultiplicityMismatch(usize, usize),
}

/// Non-trivial zeros 1/2 + i*gamma, listing gamma >= 0 only.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroList {
    ordinates: Vec<f64>,
    central_multiplicity: usize,
}

impl ZeroList {
    pub fn new(ordinates: Vec<f64>, central_multiplicity: usize) -> Result<Self, EngineError> {
        if ordinates.windows(2).any(|w| w[0] > w[1]) {
            return Err(EngineError::UnsortedZeros);
        }
        let at_origin = ordinates.iter().filter(|&&g| g == 0.0).count();
        if at_origin != central_multiplicity {
            return Err(EngineError::CentralMultiplicityMismatch(
                central_multiplicity,
                at_origin,
            ));
        }
        Ok(Self { ordinates, central_multiplicity })
    }

    /// Rank-style constructor: r central zeros plus positive ordinates.
    pub fn with_rank(rank: usize, mut positive: Vec<f64>) -> Result<Self, EngineError> {
        let mut ords = vec![0.0; rank];
        ords.append(&mut positive);
        Self::new(ords, rank)
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn central_multiplicity(&self) -> usize {
        self.central_multiplicity
    }
}

/// Itemized right-hand side of the explicit formula.
#[derive(Debug, Clone)]
pub struct ExplicitFormulaBreakdown {
    /// (fhat(0)/pi) log Q_eff
    pub logq_term: f64,
    /// one ell(mu_j, f) per Gamma factor
    pub ell_terms: Vec<f64>,
    /// n -> (1/pi) c(n)/sqrt(n) fhat(log n / 2pi)
    pub prime_terms: BTreeMap<u64, f64>,
    pub rhs_total: f64,
    /// rank * f(0), the least the zero side can be
    pub zero_lower_bound: f64,
}

impl ExplicitFormulaBreakdown {
    /// Recomputes rhs_total from the parts; used by self-consistency checks.
    pub fn recompute_total(&self) -> f64 {
        self.logq_term
            + self.ell_terms.iter().sum::<f64>() / (2.0 * PI)
            + self.prime_terms.values().sum::<f64>()
    }
}

/// Memo cache for ell(mu, f) keyed by (mu, delta, tolerance); safe for
/// concurrent use. Distinct mu values are only ever integrated once.
#[derive(Debug, Default)]
pub struct EllCache {
    map: Mutex<BTreeMap<(u64, u64, u64), f64>>,
    evaluations: AtomicUsize,
}

impl EllCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of actual quadrature evaluations performed (cache misses).
    pub fn evaluation_count(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub fn ell_term(
        &self,
        mu: f64,
        tf: &FejerTestFunction,
        spec: &QuadratureSpec,
    ) -> Result<f64, EngineError> {
        let key = (mu.to_bits(), tf.delta().to_bits(), spec.tolerance.to_bits());
        if let Some(&v) = self.map.lock().unwrap().get(&key) {
            return Ok(v);
        }
        let v = ell_term(mu, tf, spec)?;
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        self.map.lock().unwrap().insert(key, v);
        Ok(v)
    }
}

/// ell(mu, f) = Re int psi(1/2(1/2 + it) + mu) f(t) dt - fhat(0) log pi.
pub fn ell_term(
    mu: f64,
    tf: &FejerTestFunction,
    spec: &QuadratureSpec,
) -> Result<f64, EngineError> {
    let a = 0.25 + mu;
    let integral = integrate_even_decaying(
        |t| {
            let psi = digamma_re(ComplexPoint::new(a, 0.5 * t))
                .expect("argument has positive real part");
            psi * tf.eval_f(t)
        },
        spec,
    )?;
    Ok(integral - tf.f_hat_at_zero() * PI.ln())
}

/// The prime-side coefficient (1/pi) fhat(log n / 2pi) / sqrt(n); at n = 2
/// and delta = 1/(2pi) this is the paper-visible constant 0.069066.
pub fn prime_coefficient(n: u64, tf: &FejerTestFunction) -> f64 {
    let x = (n as f64).ln() / (2.0 * PI);
    tf.eval_f_hat(x) / (PI * (n as f64).sqrt())
}

/// Largest possible right-hand side of the explicit formula under the
/// Ramanujan bound, together with the zero-side lower bound rank * f(0).
pub fn rhs_max(
    feq: &FunctionalEquationParams,
    tf: &FejerTestFunction,
    rank: usize,
    spec: &QuadratureSpec,
    cache: &EllCache,
) -> Result<ExplicitFormulaBreakdown, EngineError> {
    let (n_min, n_max) = tf.support_window()?;
    let logq_term = tf.f_hat_at_zero() / PI * feq.q_scale().ln();
    let mut ell_terms = Vec::with_capacity(feq.degree());
    for &mu in feq.mu() {
        ell_terms.push(cache.ell_term(mu, tf, spec)?);
    }
    let mut prime_terms = BTreeMap::new();
    for n in n_min..=n_max {
        let bound = ramanujan_c_bound(n, feq.degree());
        if bound > 0.0 {
            prime_terms.insert(n, prime_coefficient(n, tf) * bound);
        }
    }
    let mut breakdown = ExplicitFormulaBreakdown {
        logq_term,
        ell_terms,
        prime_terms,
        rhs_total: 0.0,
        zero_lower_bound: rank as f64 * tf.f_at_zero(),
    };
    breakdown.rhs_total = breakdown.recompute_total();
    Ok(breakdown)
}

/// Result of evaluating both sides of the explicit formula for a concrete
/// L-function with known zeros.
#[derive(Debug, Clone, Copy)]
pub struct ResidualCheck {
    /// central zeros + 2 * sum of f over positive ordinates up to the cutoff
    pub lhs_truncated: f64,
    /// right-hand side from actual coefficients
    pub rhs: f64,
    /// analytic bound on the zero-sum tail above the cutoff
    pub tail_bound: f64,
}

impl ResidualCheck {
    pub fn residual(&self) -> f64 {
        (self.lhs_truncated - self.rhs).abs()
    }
}

/// Evaluates both sides of the explicit formula, truncating the zero sum at
/// `height_cutoff`, with the tail bounded via the envelope
/// f(gamma) <= 1/(pi^2 delta gamma^2) and the zero-counting density
/// (1/pi)(log Q + (d/2) log(t/2pi)).
pub fn explicit_formula_residual(
    feq: &FunctionalEquationParams,
    coeffs: &CoefficientData,
    zeros: &ZeroList,
    tf: &FejerTestFunction,
    height_cutoff: f64,
    spec: &QuadratureSpec,
    cache: &EllCache,
) -> Result<ResidualCheck, EngineError> {
    let mut lhs = zeros.central_multiplicity() as f64 * tf.f_at_zero();
    for &g in zeros.ordinates() {
        if g > 0.0 && g <= height_cutoff {
            lhs += 2.0 * tf.eval_f(g);
        }
    }

    let mut rhs = tf.f_hat_at_zero() / PI * feq.q_scale().ln();
    for &mu in feq.mu() {
        rhs += cache.ell_term(mu, tf, spec)? / (2.0 * PI);
    }
    let (n_min, n_max) = tf.support_window()?;
    for n in n_min..=n_max {
        if ramanujan_c_bound(n, feq.degree().max(1)) == 0.0 {
            continue; // c(n) vanishes off prime powers
        }
        let c_n = coeffs.c(n).ok_or(EngineError::IncompleteData(n))?;
        rhs += prime_coefficient(n, tf) * c_n;
    }

    let t = height_cutoff;
    let a = feq.q_scale().ln() - feq.degree() as f64 / 2.0 * (2.0 * PI).ln();
    let b = feq.degree() as f64 / 2.0;
    let density_integral = ((a + b + b * t.ln()) / t).max(0.0);
    let tail_bound = 1.5 * (2.0 / (PI.powi(3) * tf.delta())) * density_integral;

    Ok(ResidualCheck {
        lhs_truncated: lhs,
        rhs,
        tail_bound,
    })
}

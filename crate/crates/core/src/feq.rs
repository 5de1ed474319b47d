//! Functional-equation data model and Ramanujan-bound coefficient arithmetic.

use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeqError {
    #[error("mu list length {0} does not match degree {1}")]
    MuLengthMismatch(usize, usize),
    #[error("spectral parameters must be non-negative, got {0}")]
    NegativeMu(f64),
    #[error("conductor scale Q must be positive, got {0}")]
    InvalidQ(f64),
    #[error("sign must be +1 or -1, got {0}")]
    InvalidSign(i8),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("a(1) must equal 1, got {0}")]
    BadLeadingCoefficient(f64),
    #[error("|a({p})| = {val} exceeds the Ramanujan bound d = {d}")]
    RamanujanViolation { p: u64, val: f64, d: usize },
}

/// Parameters of the functional equation
/// Lambda(s) = Q^s prod_j Gamma(s/2 + mu_j) L(s) = sign * Lambda(1-s).
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalEquationParams {
    degree: usize,
    mu: Vec<f64>,
    q_scale: f64,
    sign: i8,
}

impl FunctionalEquationParams {
    /// `degree` zero is admitted as the empty functional equation (no
    /// Gamma factors); it makes the explicit formula degenerate to 0 = 0
    /// and is useful as an edge case.
    pub fn new(mu: Vec<f64>, q_scale: f64, sign: i8) -> Result<Self, FeqError> {
        if let Some(&m) = mu.iter().find(|m| !(**m >= 0.0)) {
            return Err(FeqError::NegativeMu(m));
        }
        if !(q_scale > 0.0) || !q_scale.is_finite() {
            return Err(FeqError::InvalidQ(q_scale));
        }
        if sign != 1 && sign != -1 {
            return Err(FeqError::InvalidSign(sign));
        }
        Ok(Self { degree: mu.len(), mu, q_scale, sign })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn q_scale(&self) -> f64 {
        self.q_scale
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut p = 3;
    while p * p <= n {
        if n % p == 0 {
            return false;
        }
        p += 2;
    }
    true
}

/// Von Mangoldt function: log p if n = p^k, zero otherwise.
pub fn von_mangoldt(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let mut m = n;
    let mut p = 2u64;
    while p * p <= n {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            return if m == 1 { (p as f64).ln() } else { 0.0 };
        }
        p += 1;
    }
    // n itself is prime
    (n as f64).ln()
}

/// c(p) = -a(p) log p, the prime coefficient of -L'/L.
pub fn c_from_a_prime(a_p: f64, p: u64) -> Result<f64, FeqError> {
    if !is_prime(p) {
        return Err(FeqError::NotPrime(p));
    }
    Ok(-a_p * (p as f64).ln())
}

/// d * Lambda_vM(n): the largest |c(n)| compatible with |a(p)| <= d.
pub fn ramanujan_c_bound(n: u64, d: usize) -> f64 {
    d as f64 * von_mangoldt(n)
}

/// Absolute bound on |c(n)| for a degree-d L-function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientBound {
    pub n: u64,
    pub bound: f64,
}

impl CoefficientBound {
    pub fn new(n: u64, d: usize) -> Self {
        Self { n, bound: ramanujan_c_bound(n, d) }
    }
}

/// Dirichlet coefficients a(n) together with the log-derivative
/// coefficients c(n) they determine at primes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoefficientData {
    dirichlet: BTreeMap<u64, f64>,
    log_derivative: BTreeMap<u64, f64>,
}

impl CoefficientData {
    /// Builds from Dirichlet coefficients in the analytic normalization.
    /// c(p) is filled in for every prime p present. If `ramanujan_degree`
    /// is given, |a(p)| <= d is enforced.
    pub fn from_dirichlet(
        a: BTreeMap<u64, f64>,
        ramanujan_degree: Option<usize>,
    ) -> Result<Self, FeqError> {
        match a.get(&1) {
            Some(&v) if v == 1.0 => {}
            Some(&v) => return Err(FeqError::BadLeadingCoefficient(v)),
            None => return Err(FeqError::BadLeadingCoefficient(f64::NAN)),
        }
        let mut c = BTreeMap::new();
        for (&n, &an) in &a {
            if is_prime(n) {
                if let Some(d) = ramanujan_degree {
                    if an.abs() > d as f64 + 1e-9 {
                        return Err(FeqError::RamanujanViolation { p: n, val: an, d });
                    }
                }
                c.insert(n, c_from_a_prime(an, n)?);
            }
        }
        Ok(Self { dirichlet: a, log_derivative: c })
    }

    /// Supplies a log-derivative coefficient directly (e.g. at prime powers,
    /// where it is not determined by a(n) alone).
    pub fn set_c(&mut self, n: u64, c_n: f64) {
        self.log_derivative.insert(n, c_n);
    }

    /// Fills c(p^k) for all prime powers up to `n_max` for a degree-2
    /// Euler product with unitary Satake parameters away from the level:
    /// alpha + beta = a(p), alpha*beta = 1 for p not dividing `level`
    /// (so alpha^k + beta^k follows the recurrence s_k = a(p) s_{k-1} -
    /// s_{k-2}), and alpha = a(p), beta = 0 for p | level.
    pub fn fill_gl2_prime_powers(&mut self, level: u64, n_max: u64) {
        let primes: Vec<u64> = (2..=n_max).filter(|&p| is_prime(p)).collect();
        for p in primes {
            let Some(a_p) = self.a(p) else { continue };
            let log_p = (p as f64).ln();
            let ramified = level % p == 0;
            let (mut s_prev, mut s) = (2.0, a_p);
            let mut n = p;
            loop {
                let s_here = if ramified {
                    a_p.powi((n.ilog(p)) as i32)
                } else {
                    s
                };
                self.log_derivative.insert(n, -s_here * log_p);
                let Some(next) = n.checked_mul(p) else { break };
                if next > n_max {
                    break;
                }
                n = next;
                let s_next = a_p * s - s_prev;
                s_prev = s;
                s = s_next;
            }
        }
    }

    pub fn a(&self, n: u64) -> Option<f64> {
        self.dirichlet.get(&n).copied()
    }

    pub fn c(&self, n: u64) -> Option<f64> {
        self.log_derivative.get(&n).copied()
    }
}

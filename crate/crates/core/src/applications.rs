//! Modular-form and elliptic-curve applications: mapping weight/level to
//! functional-equation data, prediction grids over the (k, N) table,
//! rank-conductor lower bounds, and verification against observed data.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{EllCache, EngineError};
use crate::fejer::FejerTestFunction;
use crate::lmfdb::{A2Sign, IsogenyClassRecord, NewformRecord};
use crate::special::QuadratureSpec;
use crate::thresholds::{compute_thresholds, Classification, PredictionOutcome};

#[derive(Debug, Error)]
pub enum ApplicationError {
    #[error("weight must be an even integer >= 2, got {0}")]
    InvalidWeight(u32),
    #[error("level must be >= 1")]
    InvalidLevel,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Mapping between the integer level N and the conductor scale Q_eff fed
/// to the explicit formula. CalibratedSqrtN is the choice that makes the
/// formula an exact identity and is the default everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
pub enum QConvention {
    /// Q_eff = sqrt(N)
    CalibratedSqrtN,
    /// Q = N/pi, one of the paper's two literal statements
    PaperNOverPi,
    /// Q = pi N, the paper's other literal statement
    PaperPiN,
}

impl Default for QConvention {
    fn default() -> Self {
        QConvention::CalibratedSqrtN
    }
}

/// Gamma-factor parameters of a weight-k holomorphic newform:
/// {(k-1)/4, (k+1)/4}.
pub fn mu_of_weight(k: u32) -> Result<[f64; 2], ApplicationError> {
    if k < 2 || k % 2 != 0 {
        return Err(ApplicationError::InvalidWeight(k));
    }
    let k = k as f64;
    Ok([(k - 1.0) / 4.0, (k + 1.0) / 4.0])
}

pub fn q_of_level(n: u64, convention: QConvention) -> f64 {
    let n = n as f64;
    match convention {
        QConvention::CalibratedSqrtN => n.sqrt(),
        QConvention::PaperNOverPi => n / std::f64::consts::PI,
        QConvention::PaperPiN => std::f64::consts::PI * n,
    }
}

/// Inverse of `q_of_level` on the reals: the conductor at which q_eff
/// reaches `q`.
pub fn level_of_q(q: f64, convention: QConvention) -> f64 {
    match convention {
        QConvention::CalibratedSqrtN => q * q,
        QConvention::PaperNOverPi => q * std::f64::consts::PI,
        QConvention::PaperPiN => q / std::f64::consts::PI,
    }
}

/// Weight/level context of one cell of the prediction grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModularFormContext {
    pub weight: u32,
    pub level: u64,
    pub q_convention: QConvention,
}

impl ModularFormContext {
    pub fn new(weight: u32, level: u64, q_convention: QConvention) -> Result<Self, ApplicationError> {
        mu_of_weight(weight)?;
        if level == 0 {
            return Err(ApplicationError::InvalidLevel);
        }
        Ok(Self { weight, level, q_convention })
    }

    pub fn q_eff(&self) -> f64 {
        q_of_level(self.level, self.q_convention)
    }
}

/// One PredictionOutcome per (weight, level) cell.
#[derive(Debug)]
pub struct GridPrediction {
    pub cells: BTreeMap<(u32, u64), PredictionOutcome>,
    pub convention: QConvention,
}

/// Classifies every cell of the (weights x levels) grid, computing the
/// two ell terms of each weight only once; cells of distinct weights are
/// evaluated in parallel against the shared cache.
pub fn predict_grid(
    weights: &[u32],
    levels: RangeInclusive<u64>,
    rank: usize,
    convention: QConvention,
    tf: &FejerTestFunction,
    spec: &QuadratureSpec,
    cache: &EllCache,
) -> Result<GridPrediction, ApplicationError> {
    for &k in weights {
        mu_of_weight(k)?;
    }
    let mut cells = BTreeMap::new();
    let results: Vec<Result<Vec<((u32, u64), PredictionOutcome)>, ApplicationError>> =
        std::thread::scope(|scope| {
            let handles: Vec<_> = weights
                .iter()
                .map(|&k| {
                    let levels = levels.clone();
                    scope.spawn(move || {
                        let mu = mu_of_weight(k)?;
                        let thresholds = compute_thresholds(&mu, rank, tf, spec, cache)?;
                        Ok(levels
                            .map(|n| {
                                let q = q_of_level(n, convention);
                                ((k, n), thresholds.predict(q))
                            })
                            .collect())
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
    for result in results {
        cells.extend(result?);
    }
    Ok(GridPrediction { cells, convention })
}

/// Lower bound on the conductor of a rank-r elliptic curve (degree 2,
/// mu = {1/4, 3/4}), mapped back to conductor space.
#[derive(Debug, Clone, Serialize)]
pub struct RankBound {
    pub rank: usize,
    pub min_q: f64,
    pub min_conductor: f64,
    pub min_conductor_int: u64,
}

pub fn rank_conductor_bound(
    rank: usize,
    tf: &FejerTestFunction,
    spec: &QuadratureSpec,
    convention: QConvention,
    cache: &EllCache,
) -> Result<RankBound, ApplicationError> {
    let thresholds = compute_thresholds(&[0.25, 0.75], rank, tf, spec, cache)?;
    let min_q = thresholds.q0();
    let min_conductor = level_of_q(min_q, convention);
    Ok(RankBound {
        rank,
        min_q,
        min_conductor,
        min_conductor_int: min_conductor.ceil() as u64,
    })
}

/// SOUND means the observation is compatible with the prediction; a
/// sufficient condition may under-predict, never contradict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Flag {
    Sound,
    Violation,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationEntry {
    pub key: String,
    pub prediction: String,
    pub observation: String,
    pub flag: Flag,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct VerificationReport {
    pub entries: Vec<VerificationEntry>,
}

impl VerificationReport {
    pub fn violations(&self) -> usize {
        self.entries.iter().filter(|e| e.flag == Flag::Violation).count()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    pub fn merge(&mut self, mut other: VerificationReport) {
        self.entries.append(&mut other.entries);
    }

    /// Fixed-width text rendering, one line per entry plus a summary line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "{:10} {:24} | {:40} | {:?}\n",
                e.key, e.prediction, e.observation, e.flag
            ));
        }
        out.push_str(&format!(
            "{}: {} entries, {} violations\n",
            if self.passed() { "PASS" } else { "FAIL" },
            self.entries.len(),
            self.violations()
        ));
        out
    }
}

fn sign_text(s: A2Sign) -> &'static str {
    match s {
        A2Sign::Negative => "a(2)<0",
        A2Sign::Zero => "a(2)=0",
        A2Sign::Positive => "a(2)>0",
        A2Sign::NonRational => "a(2) irrational",
    }
}

/// Checks the prediction grid against observed newform cells: a nonempty
/// cell must not be classified Impossible, and a cell containing a form
/// with a(2) >= 0 (sign Zero or Positive) must not be ForcedNegativeA2.
/// NonRational orbits are excluded from the sign check.
pub fn verify_table1(
    grid: &GridPrediction,
    data: &BTreeMap<(u32, u64), Vec<NewformRecord>>,
) -> VerificationReport {
    let mut report = VerificationReport::default();
    for ((k, n), forms) in data {
        let Some(outcome) = grid.cells.get(&(*k, *n)) else {
            continue;
        };
        let classification = outcome.classification;
        let total_dim: u32 = forms.iter().map(|f| f.dim).sum();
        let signs: Vec<&str> = forms.iter().map(|f| sign_text(f.a2_sign)).collect();
        let observation = if forms.is_empty() {
            "empty space".to_string()
        } else {
            format!("dim {total_dim}: {}", signs.join(", "))
        };
        let nonempty_but_impossible =
            !forms.is_empty() && classification == Classification::Impossible;
        let nonnegative_but_forced = classification == Classification::ForcedNegativeA2
            && forms
                .iter()
                .any(|f| matches!(f.a2_sign, A2Sign::Zero | A2Sign::Positive));
        let flag = if nonempty_but_impossible || nonnegative_but_forced {
            Flag::Violation
        } else {
            Flag::Sound
        };
        report.entries.push(VerificationEntry {
            key: format!("k={k},N={n}"),
            prediction: format!("{classification:?}"),
            observation,
            flag,
        });
    }
    report
}

/// Checks observed rank-r isogeny classes against the rank bound: every
/// observed conductor must be at or above min_conductor_int.
pub fn verify_rank_classes(
    bound: &RankBound,
    classes: &[IsogenyClassRecord],
) -> VerificationReport {
    let mut report = VerificationReport::default();
    for class in classes {
        let flag = if class.rank as usize == bound.rank
            && class.conductor >= bound.min_conductor_int
        {
            Flag::Sound
        } else {
            Flag::Violation
        };
        report.entries.push(VerificationEntry {
            key: class.class_label.clone(),
            prediction: format!(
                "rank {} needs N >= {}",
                bound.rank, bound.min_conductor_int
            ),
            observation: format!(
                "rank {} at conductor {} (#N = {})",
                class.rank, class.conductor, class.classes_at_conductor
            ),
            flag,
        });
    }
    report
}

/// Observed label phenomena from the tables: which classes are not
/// labeled "a". Returned as report entries flagged Sound when the
/// exception set matches `expected_exceptions` exactly.
pub fn verify_label_phenomenon(
    classes: &[IsogenyClassRecord],
    expected_exceptions: &[&str],
) -> VerificationReport {
    let mut report = VerificationReport::default();
    let actual: Vec<&str> = classes
        .iter()
        .filter(|c| !c.class_label.ends_with(".a"))
        .map(|c| c.class_label.as_str())
        .collect();
    let flag = if actual == expected_exceptions {
        Flag::Sound
    } else {
        Flag::Violation
    };
    report.entries.push(VerificationEntry {
        key: "labels".into(),
        prediction: format!("non-'a' labels exactly {expected_exceptions:?}"),
        observation: format!("non-'a' labels {actual:?}"),
        flag,
    });
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmfdb::LmfdbClient;

    fn setup() -> (FejerTestFunction, QuadratureSpec, EllCache) {
        (FejerTestFunction::paper(), QuadratureSpec::default(), EllCache::new())
    }

    #[test]
    fn mu_of_weight_values() {
        assert_eq!(mu_of_weight(2).unwrap(), [0.25, 0.75]);
        assert_eq!(mu_of_weight(12).unwrap(), [2.75, 3.25]);
        assert_eq!(mu_of_weight(4).unwrap(), [0.75, 1.25]);
        assert!(mu_of_weight(3).is_err());
        assert!(mu_of_weight(0).is_err());
    }

    #[test]
    fn q_of_level_conventions() {
        assert!((q_of_level(11, QConvention::CalibratedSqrtN) - 3.316_624_8).abs() < 1e-6);
        assert!((q_of_level(11, QConvention::PaperNOverPi) - 3.501_408_7).abs() < 1e-6);
        assert!((q_of_level(1, QConvention::PaperPiN) - std::f64::consts::PI).abs() < 1e-12);
        for convention in [
            QConvention::CalibratedSqrtN,
            QConvention::PaperNOverPi,
            QConvention::PaperPiN,
        ] {
            for n in [1u64, 11, 389] {
                let q = q_of_level(n, convention);
                assert!((level_of_q(q, convention) - n as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn grid_monotone_and_cache_bounded() {
        let (tf, spec, cache) = setup();
        let grid = predict_grid(
            &[2, 4, 6, 8, 10, 12],
            1..=15,
            0,
            QConvention::CalibratedSqrtN,
            &tf,
            &spec,
            &cache,
        )
        .unwrap();
        assert_eq!(grid.cells.len(), 90);
        // at most 2 ell evaluations per weight
        assert!(cache.evaluation_count() <= 12);
        for k in [2u32, 4, 6, 8, 10, 12] {
            let mut prev = Classification::Impossible;
            for n in 1..=15u64 {
                let c = grid.cells[&(k, n)].classification;
                assert!(c >= prev, "k={k}, N={n}");
                prev = c;
            }
        }
    }

    #[test]
    fn grid_known_cells() {
        let (tf, spec, cache) = setup();
        let grid = predict_grid(
            &[2, 4],
            1..=15,
            0,
            QConvention::CalibratedSqrtN,
            &tf,
            &spec,
            &cache,
        )
        .unwrap();
        // weight 4, level 10 hosts a positive-a(2) form: must be neither
        // Impossible nor ForcedNegativeA2
        assert_eq!(
            grid.cells[&(4, 10)].classification,
            Classification::Unconstrained
        );
        // weight 4, level 8 hosts an a(2)=0 form
        assert_eq!(
            grid.cells[&(4, 8)].classification,
            Classification::Unconstrained
        );
        // weight 2, small level is below the existence threshold
        assert_eq!(grid.cells[&(2, 1)].classification, Classification::Impossible);
    }

    #[test]
    fn rank_bound_values_and_ratio() {
        let (tf, spec, cache) = setup();
        let convention = QConvention::CalibratedSqrtN;
        let b1 = rank_conductor_bound(1, &tf, &spec, convention, &cache).unwrap();
        let b2 = rank_conductor_bound(2, &tf, &spec, convention, &cache).unwrap();
        assert!(b1.min_conductor_int <= 37);
        assert!(b2.min_conductor_int <= 389);
        assert!(b2.min_conductor > b1.min_conductor);
        // ratio e: log q0 increments by 1/2, N = q0^2
        let ratio = b2.min_conductor / b1.min_conductor;
        assert!((ratio - std::f64::consts::E).abs() < 1e-9);
        // frozen values from the series oracle
        assert!((b1.min_conductor - 15.741).abs() < 5e-3);
        assert!((b2.min_conductor - 42.79).abs() < 2e-2);
    }

    #[test]
    fn table1_verification_is_sound() {
        let (tf, spec, cache) = setup();
        let grid = predict_grid(
            &[2, 4, 6, 8, 10, 12],
            1..=21,
            0,
            QConvention::CalibratedSqrtN,
            &tf,
            &spec,
            &cache,
        )
        .unwrap();
        let data = LmfdbClient::fixture_only().fixture_table1().unwrap();
        let report = verify_table1(&grid, &data);
        assert!(report.passed(), "{}", report.to_text());
        assert_eq!(report.entries.len(), 96);
    }

    #[test]
    fn rank_class_verification_is_sound() {
        let (tf, spec, cache) = setup();
        let client = LmfdbClient::fixture_only();
        for rank in [1usize, 2] {
            let bound =
                rank_conductor_bound(rank, &tf, &spec, QConvention::CalibratedSqrtN, &cache)
                    .unwrap();
            let classes = client.fixture_rank_classes(rank as u32).unwrap();
            let report = verify_rank_classes(&bound, &classes);
            assert!(report.passed(), "{}", report.to_text());
        }
    }

    #[test]
    fn label_phenomena() {
        let client = LmfdbClient::fixture_only();
        let r1 = client.fixture_rank_classes(1).unwrap();
        let report = verify_label_phenomenon(&r1, &["91.b", "121.b"]);
        assert!(report.passed(), "{}", report.to_text());
        let r2 = client.fixture_rank_classes(2).unwrap();
        assert!(verify_label_phenomenon(&r2, &[]).passed());
    }

    #[test]
    fn report_rendering() {
        let report = VerificationReport {
            entries: vec![VerificationEntry {
                key: "k=2,N=11".into(),
                prediction: "ForcedNegativeA2".into(),
                observation: "dim 1: a(2)<0".into(),
                flag: Flag::Sound,
            }],
        };
        let text = report.to_text();
        assert!(text.contains("PASS"));
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("ForcedNegativeA2"));
        assert!(report.passed());
    }

    #[test]
    fn context_validation() {
        assert!(ModularFormContext::new(2, 11, QConvention::CalibratedSqrtN).is_ok());
        assert!(ModularFormContext::new(5, 11, QConvention::CalibratedSqrtN).is_err());
        assert!(ModularFormContext::new(2, 0, QConvention::CalibratedSqrtN).is_err());
        let ctx = ModularFormContext::new(2, 11, QConvention::CalibratedSqrtN).unwrap();
        assert!((ctx.q_eff() - 11.0_f64.sqrt()).abs() < 1e-12);
    }
}

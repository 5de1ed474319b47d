//! LMFDB data access: live HTTP fetches with a polite on-disk cache, and
//! committed fixtures carrying the newform sign table, the rank-1/rank-2
//! isogeny-class tables, and one zeros record.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LmfdbError {
    #[error("data unavailable: {0}")]
    DataUnavailable(String),
    #[error("schema drift in {path}: {detail}")]
    SchemaDrift { path: String, detail: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> LmfdbError {
    LmfdbError::Io { path: path.display().to_string(), source }
}

fn parse_err(path: &Path, source: serde_json::Error) -> LmfdbError {
    LmfdbError::Parse { path: path.display().to_string(), source }
}

/// Where records may come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// network allowed; responses are cached before being returned
    Live,
    /// cache hits only, no network
    CacheOnly,
    /// committed fixtures only, no cache, no network
    FixtureOnly,
}

/// Sign of the second Dirichlet coefficient of a Galois orbit. NonRational
/// marks orbits whose a(2) is irrational (the source table prints only the
/// orbit dimension there); such records are excluded from sign checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum A2Sign {
    Negative,
    Zero,
    Positive,
    NonRational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewformRecord {
    pub label: String,
    pub weight: u32,
    pub level: u64,
    /// total dimension of the orbit (or of the aggregated cell, for
    /// NonRational fixture rows covering a whole newform space)
    pub dim: u32,
    pub a2_sign: A2Sign,
    #[serde(default)]
    pub a2_normalized: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsogenyClassRecord {
    pub conductor: u64,
    pub class_label: String,
    pub rank: u32,
    /// #N: how many isogeny classes share this conductor
    pub classes_at_conductor: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZerosRecord {
    pub lfunction_label: String,
    #[serde(default)]
    pub weight: u32,
    #[serde(default)]
    pub level: u64,
    /// ordinates of zeros 1/2 + i gamma with gamma > 0, ascending
    pub positive_ordinates: Vec<f64>,
    pub completeness_height: f64,
    /// integer Dirichlet coefficients a(1), a(2), ... in the arithmetic
    /// normalization, when the record carries them
    #[serde(default)]
    pub dirichlet_integer_an: Vec<i64>,
}

impl ZerosRecord {
    pub fn validate(&self) -> Result<(), LmfdbError> {
        let sorted = self
            .positive_ordinates
            .windows(2)
            .all(|w| w[0] < w[1]);
        let bounded = self
            .positive_ordinates
            .iter()
            .all(|&g| g > 0.0 && g <= self.completeness_height);
        if sorted && bounded {
            Ok(())
        } else {
            Err(LmfdbError::SchemaDrift {
                path: self.lfunction_label.clone(),
                detail: "ordinates not sorted-positive or exceed completeness height".into(),
            })
        }
    }
}

/// Level coverage of the newform fixture per weight, so that empty cells
/// are distinguishable from uncovered ones.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureCoverage {
    pub weight: u32,
    pub min_level: u64,
    pub max_level: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NewformTableFixture {
    pub coverage: Vec<FixtureCoverage>,
    pub forms: Vec<NewformRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsogenyTableFixture {
    pub classes: Vec<IsogenyClassRecord>,
}

/// Endpoint paths and response field names, all overridable from a JSON
/// config file so upstream schema drift is a config edit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ClientConfig {
    pub base_url: String,
    pub newforms_path: String,
    pub isogeny_path: String,
    pub zeros_path: String,
    /// key of the record array in API responses
    pub data_key: String,
    pub cache_dir: PathBuf,
    pub fixture_dir: PathBuf,
    pub rate_limit_ms: u64,
    pub max_retries: u32,
    pub backoff_ms: u64,
}

impl Default for ClientConfig {
    fn default() -> Self {
        let cache_dir = std::env::var_os("LMFDB_CACHE_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("lmfdb_cache"));
        let fixture_dir = std::env::var_os("WEIL_FIXTURE_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
        Self {
            base_url: "https://www.lmfdb.org/api".into(),
            newforms_path: "/mf_newforms/?weight={k}&level={N}&_format=json".into(),
            isogeny_path: "/ec_classdata/?conductor={N}&_format=json".into(),
            zeros_path: "/lfunc_zeros/?label={label}&_format=json".into(),
            data_key: "data".into(),
            cache_dir,
            fixture_dir,
            rate_limit_ms: 500,
            max_retries: 3,
            backoff_ms: 250,
        }
    }
}

impl ClientConfig {
    pub fn from_file(path: &Path) -> Result<Self, LmfdbError> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        serde_json::from_str(&text).map_err(|e| parse_err(path, e))
    }
}

/// Data client. Cache reads are lock-free file reads; the politeness
/// limiter serializes live requests.
pub struct LmfdbClient {
    config: ClientConfig,
    mode: Mode,
    last_request: Mutex<Option<Instant>>,
}

impl LmfdbClient {
    pub fn new(config: ClientConfig, mode: Mode) -> Self {
        Self { config, mode, last_request: Mutex::new(None) }
    }

    pub fn fixture_only() -> Self {
        Self::new(ClientConfig::default(), Mode::FixtureOnly)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    fn fixture_path(&self, name: &str) -> PathBuf {
        self.config.fixture_dir.join(name)
    }

    fn read_fixture<T: serde::de::DeserializeOwned>(&self, name: &str) -> Result<T, LmfdbError> {
        let path = self.fixture_path(name);
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        serde_json::from_str(&text).map_err(|e| parse_err(&path, e))
    }

    fn cache_path(&self, key: &str) -> PathBuf {
        self.config.cache_dir.join(format!("{key}.json"))
    }

    fn read_cache<T: serde::de::DeserializeOwned>(&self, key: &str) -> Option<T> {
        let path = self.cache_path(key);
        let text = fs::read_to_string(&path).ok()?;
        serde_json::from_str(&text).ok()
    }

    /// Atomic write: temp file in the same directory, then rename, so a
    /// concurrent reader never sees a torn document.
    fn write_cache<T: Serialize>(&self, key: &str, value: &T) -> Result<(), LmfdbError> {
        let dir = &self.config.cache_dir;
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let path = self.cache_path(key);
        let tmp = dir.join(format!("{key}.tmp-{}", std::process::id()));
        {
            let mut file = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
            let text = serde_json::to_string_pretty(value)
                .map_err(|e| parse_err(&tmp, e))?;
            file.write_all(text.as_bytes()).map_err(|e| io_err(&tmp, e))?;
        }
        fs::rename(&tmp, &path).map_err(|e| io_err(&path, e))
    }

    fn polite_pause(&self) {
        let mut last = self.last_request.lock().unwrap();
        if let Some(prev) = *last {
            let min_gap = Duration::from_millis(self.config.rate_limit_ms);
            let elapsed = prev.elapsed();
            if elapsed < min_gap {
                std::thread::sleep(min_gap - elapsed);
            }
        }
        *last = Some(Instant::now());
    }

    fn http_get_json(&self, url: &str) -> Result<serde_json::Value, LmfdbError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| LmfdbError::DataUnavailable(e.to_string()))?;
        let mut delay = Duration::from_millis(self.config.backoff_ms);
        let mut last_err = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                std::thread::sleep(delay);
                delay *= 2;
            }
            self.polite_pause();
            match client.get(url).send().and_then(|r| r.error_for_status()) {
                Ok(resp) => {
                    return resp
                        .json()
                        .map_err(|e| LmfdbError::DataUnavailable(e.to_string()))
                }
                Err(e) => last_err = e.to_string(),
            }
        }
        Err(LmfdbError::DataUnavailable(format!("{url}: {last_err}")))
    }

    fn response_rows<'v>(
        &self,
        url: &str,
        value: &'v serde_json::Value,
    ) -> Result<&'v Vec<serde_json::Value>, LmfdbError> {
        value
            .get(&self.config.data_key)
            .and_then(|d| d.as_array())
            .ok_or_else(|| LmfdbError::SchemaDrift {
                path: url.to_string(),
                detail: format!("missing array field '{}'", self.config.data_key),
            })
    }

    /// All Galois orbits of the newform space S_k^new(N).
    pub fn fetch_newforms(&self, k: u32, n: u64) -> Result<Vec<NewformRecord>, LmfdbError> {
        let key = format!("newforms_k{k}_N{n}");
        match self.mode {
            Mode::FixtureOnly => self.newforms_from_fixture(k, n),
            Mode::CacheOnly => self.read_cache(&key).ok_or_else(|| {
                LmfdbError::DataUnavailable(format!("cold cache for {key}"))
            }),
            Mode::Live => {
                if let Some(hit) = self.read_cache(&key) {
                    return Ok(hit);
                }
                let url = format!(
                    "{}{}",
                    self.config.base_url,
                    self.config
                        .newforms_path
                        .replace("{k}", &k.to_string())
                        .replace("{N}", &n.to_string())
                );
                let value = self.http_get_json(&url)?;
                let rows = self.response_rows(&url, &value)?;
                let records = rows
                    .iter()
                    .map(|row| parse_newform_row(&url, row, k, n))
                    .collect::<Result<Vec<_>, _>>()?;
                self.write_cache(&key, &records)?;
                Ok(records)
            }
        }
    }

    fn newforms_from_fixture(&self, k: u32, n: u64) -> Result<Vec<NewformRecord>, LmfdbError> {
        let table: NewformTableFixture = self.read_fixture("table1.json")?;
        let covered = table
            .coverage
            .iter()
            .any(|c| c.weight == k && (c.min_level..=c.max_level).contains(&n));
        if !covered {
            return Err(LmfdbError::DataUnavailable(format!(
                "fixture does not cover weight {k}, level {n}"
            )));
        }
        Ok(table
            .forms
            .into_iter()
            .filter(|f| f.weight == k && f.level == n)
            .collect())
    }

    /// Isogeny classes of elliptic curves at conductor N that the data
    /// source knows about (fixtures carry the tabulated rank-1/2 classes).
    pub fn fetch_isogeny_classes(&self, n: u64) -> Result<Vec<IsogenyClassRecord>, LmfdbError> {
        let key = format!("isogeny_N{n}");
        match self.mode {
            Mode::FixtureOnly => {
                let mut out = Vec::new();
                for name in ["rank1_classes.json", "rank2_classes.json"] {
                    let table: IsogenyTableFixture = self.read_fixture(name)?;
                    out.extend(table.classes.into_iter().filter(|c| c.conductor == n));
                }
                Ok(out)
            }
            Mode::CacheOnly => self.read_cache(&key).ok_or_else(|| {
                LmfdbError::DataUnavailable(format!("cold cache for {key}"))
            }),
            Mode::Live => {
                if let Some(hit) = self.read_cache(&key) {
                    return Ok(hit);
                }
                let url = format!(
                    "{}{}",
                    self.config.base_url,
                    self.config.isogeny_path.replace("{N}", &n.to_string())
                );
                let value = self.http_get_json(&url)?;
                let rows = self.response_rows(&url, &value)?;
                let count = rows.len() as u32;
                let records = rows
                    .iter()
                    .map(|row| parse_isogeny_row(&url, row, n, count))
                    .collect::<Result<Vec<_>, _>>()?;
                self.write_cache(&key, &records)?;
                Ok(records)
            }
        }
    }

    /// Zeros of one L-function, complete up to the record's stated height.
    pub fn fetch_zeros(&self, label: &str) -> Result<ZerosRecord, LmfdbError> {
        let key = format!("zeros_{}", label.replace('.', "_"));
        let record: ZerosRecord = match self.mode {
            Mode::FixtureOnly => {
                if label != "11.2.a.a" {
                    return Err(LmfdbError::DataUnavailable(format!(
                        "no zeros fixture for {label}"
                    )));
                }
                self.read_fixture("zeros_11a.json")?
            }
            Mode::CacheOnly => self.read_cache(&key).ok_or_else(|| {
                LmfdbError::DataUnavailable(format!("cold cache for {key}"))
            })?,
            Mode::Live => {
                if let Some(hit) = self.read_cache::<ZerosRecord>(&key) {
                    hit
                } else {
                    let url = format!(
                        "{}{}",
                        self.config.base_url,
                        self.config.zeros_path.replace("{label}", label)
                    );
                    let value = self.http_get_json(&url)?;
                    let record = parse_zeros_payload(&url, &value, label)?;
                    self.write_cache(&key, &record)?;
                    record
                }
            }
        };
        record.validate()?;
        Ok(record)
    }

    /// The complete fixture table, keyed by (weight, level).
    pub fn fixture_table1(&self) -> Result<BTreeMap<(u32, u64), Vec<NewformRecord>>, LmfdbError> {
        let table: NewformTableFixture = self.read_fixture("table1.json")?;
        let mut map: BTreeMap<(u32, u64), Vec<NewformRecord>> = BTreeMap::new();
        for c in &table.coverage {
            for n in c.min_level..=c.max_level {
                map.entry((c.weight, n)).or_default();
            }
        }
        for f in table.forms {
            let cell = map.entry((f.weight, f.level)).or_default();
            cell.push(f);
        }
        Ok(map)
    }

    pub fn fixture_rank_classes(&self, rank: u32) -> Result<Vec<IsogenyClassRecord>, LmfdbError> {
        let name = match rank {
            1 => "rank1_classes.json",
            2 => "rank2_classes.json",
            _ => {
                return Err(LmfdbError::DataUnavailable(format!(
                    "no fixture table for rank {rank}"
                )))
            }
        };
        let table: IsogenyTableFixture = self.read_fixture(name)?;
        Ok(table.classes)
    }
}

fn field_err(url: &str, field: &str) -> LmfdbError {
    LmfdbError::SchemaDrift { path: url.to_string(), detail: format!("missing field '{field}'") }
}

fn parse_newform_row(
    url: &str,
    row: &serde_json::Value,
    k: u32,
    n: u64,
) -> Result<NewformRecord, LmfdbError> {
    let label = row
        .get("label")
        .and_then(|v| v.as_str())
        .ok_or_else(|| field_err(url, "label"))?
        .to_string();
    let dim = row
        .get("dim")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| field_err(url, "dim"))? as u32;
    // trace of a(2) over the orbit; equals a(2) itself when dim = 1
    let a2_trace = row.get("trace_an").and_then(|v| v.as_array()).and_then(|arr| {
        // trace_an is 1-indexed via position: [a1, a2, ...]
        arr.get(1).and_then(|v| v.as_f64())
    });
    let (a2_sign, a2_normalized) = match (dim, a2_trace) {
        (1, Some(t)) => {
            let normalized = t / 2.0_f64.powf((k as f64 - 1.0) / 2.0);
            let sign = if t < 0.0 {
                A2Sign::Negative
            } else if t > 0.0 {
                A2Sign::Positive
            } else {
                A2Sign::Zero
            };
            (sign, Some(normalized))
        }
        _ => (A2Sign::NonRational, None),
    };
    Ok(NewformRecord { label, weight: k, level: n, dim, a2_sign, a2_normalized })
}

fn parse_isogeny_row(
    url: &str,
    row: &serde_json::Value,
    n: u64,
    classes_at_conductor: u32,
) -> Result<IsogenyClassRecord, LmfdbError> {
    let class_label = row
        .get("lmfdb_iso")
        .and_then(|v| v.as_str())
        .ok_or_else(|| field_err(url, "lmfdb_iso"))?
        .to_string();
    let rank = row
        .get("rank")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| field_err(url, "rank"))? as u32;
    Ok(IsogenyClassRecord { conductor: n, class_label, rank, classes_at_conductor })
}

fn parse_zeros_payload(
    url: &str,
    value: &serde_json::Value,
    label: &str,
) -> Result<ZerosRecord, LmfdbError> {
    let zeros = value
        .get("zeros")
        .and_then(|v| v.as_array())
        .ok_or_else(|| field_err(url, "zeros"))?;
    let positive_ordinates = zeros
        .iter()
        .map(|z| z.as_f64().ok_or_else(|| field_err(url, "zeros[]")))
        .collect::<Result<Vec<_>, _>>()?;
    let completeness_height = positive_ordinates.last().copied().unwrap_or(0.0);
    Ok(ZerosRecord {
        lfunction_label: label.to_string(),
        weight: 0,
        level: 0,
        positive_ordinates,
        completeness_height,
        dirichlet_integer_an: Vec::new(),
    })
}

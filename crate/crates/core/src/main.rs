//! `weil`: thresholds, grid classification, table verification, the
//! explicit-formula residual check, and digamma plot emission.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use weil_explicit::applications::{
    level_of_q, mu_of_weight, predict_grid, q_of_level, rank_conductor_bound, verify_label_phenomenon,
    verify_rank_classes, verify_table1, QConvention, VerificationReport,
};
use weil_explicit::engine::{explicit_formula_residual, EllCache, ZeroList};
use weil_explicit::fejer::FejerTestFunction;
use weil_explicit::feq::{CoefficientData, FunctionalEquationParams};
use weil_explicit::lmfdb::{ClientConfig, LmfdbClient, Mode};
use weil_explicit::plot::{digamma_rows, to_csv, to_svg, PlotSpec};
use weil_explicit::special::QuadratureSpec;
use weil_explicit::thresholds::compute_thresholds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Live,
    CacheOnly,
    FixtureOnly,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Live => Mode::Live,
            ModeArg::CacheOnly => Mode::CacheOnly,
            ModeArg::FixtureOnly => Mode::FixtureOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Svg,
}

#[derive(Parser)]
#[command(name = "weil", version, about = "Explicit-formula thresholds for the Fejer test function")]
struct Cli {
    /// Half-width of the support of the Fourier transform
    #[arg(long, global = true, default_value_t = 1.0 / (2.0 * PI))]
    delta: f64,
    /// Quadrature tolerance for the archimedean integrals
    #[arg(long, global = true, default_value_t = 1e-8)]
    tolerance: f64,
    /// Mapping between integer level N and the conductor scale Q_eff
    #[arg(long, global = true, value_enum, default_value_t = QConvention::CalibratedSqrtN)]
    convention: QConvention,
    /// Data source mode
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Live)]
    mode: ModeArg,
    /// Cache directory override (also settable via LMFDB_CACHE_DIR)
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// JSON client-config file (endpoints, field names, politeness)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the existence threshold Q0 and the forced-negative-a(2)
    /// threshold Q1
    Threshold {
        /// Even weight k >= 2 (sets mu = {(k-1)/4, (k+1)/4})
        #[arg(long, conflicts_with = "mu")]
        weight: Option<u32>,
        /// Explicit Gamma-factor parameters (comma-separated)
        #[arg(long, value_delimiter = ',')]
        mu: Vec<f64>,
        /// Required order of the central zero
        #[arg(long, default_value_t = 0)]
        rank: usize,
    },
    /// Classify one (weight, level) cell
    Classify {
        #[arg(long)]
        weight: u32,
        #[arg(long)]
        level: u64,
        #[arg(long, default_value_t = 0)]
        rank: usize,
    },
    /// Verify predictions against a data table (1: newform signs,
    /// 2: rank-1 classes, 3: rank-2 classes)
    VerifyTables { which: u8 },
    /// Evaluate both sides of the explicit formula for an L-function with
    /// known zeros
    EfResidual {
        #[arg(long, default_value = "11.2.a.a")]
        label: String,
        #[arg(long, default_value_t = 200.0)]
        height: f64,
    },
    /// Emit samples of Re psi(1/4 + mu + it/2) as CSV or SVG
    PlotDigamma {
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0, 4.0, 8.0])]
        mu: Vec<f64>,
        #[arg(long, default_value_t = -30.0)]
        t_min: f64,
        #[arg(long, default_value_t = 30.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        /// Write to this file instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn client_from(cli: &Cli) -> Result<LmfdbClient, String> {
    let mut config = match &cli.config {
        Some(path) => ClientConfig::from_file(path).map_err(|e| e.to_string())?,
        None => ClientConfig::default(),
    };
    if let Some(dir) = &cli.cache_dir {
        config.cache_dir = dir.clone();
    }
    Ok(LmfdbClient::new(config, cli.mode.into()))
}

fn render_report(report: &VerificationReport, format: Format, extra: &str) -> (String, bool) {
    let ok = report.passed();
    let text = match format {
        Format::Json => serde_json::to_string_pretty(report).unwrap(),
        _ => format!("{}{}", report.to_text(), extra),
    };
    (text, ok)
}

fn run(cli: &Cli) -> Result<(String, bool), String> {
    let tf = FejerTestFunction::new(cli.delta).map_err(|e| e.to_string())?;
    let spec = QuadratureSpec { tolerance: cli.tolerance, ..Default::default() };
    let cache = EllCache::new();

    match &cli.command {
        Command::Threshold { weight, mu, rank } => {
            let mu: Vec<f64> = match (weight, mu.is_empty()) {
                (Some(k), true) => mu_of_weight(*k).map_err(|e| e.to_string())?.to_vec(),
                (None, false) => mu.clone(),
                _ => return Err("provide exactly one of --weight or --mu".into()),
            };
            let t = compute_thresholds(&mu, *rank, &tf, &spec, &cache)
                .map_err(|e| e.to_string())?;
            let n0 = level_of_q(t.q0(), cli.convention);
            let n1 = level_of_q(t.q1(), cli.convention);
            let out = match cli.format {
                Format::Json => serde_json::to_string_pretty(&serde_json::json!({
                    "mu": mu,
                    "rank": rank,
                    "ell_sum": t.ell_sum,
                    "q0": t.q0(),
                    "q1": t.q1(),
                    "ratio": t.ratio(),
                    "conductor_q0": n0,
                    "conductor_q1": n1,
                    "convention": format!("{:?}", cli.convention),
                }))
                .unwrap(),
                _ => format!(
                    "mu = {mu:?}, rank = {rank}\n\
                     ell_sum = {:.9}\n\
                     q0 = {:.9}   q1 = {:.9}   q1/q0 = {:.9}\n\
                     conductor thresholds ({:?}): N0 = {:.6}, N1 = {:.6}\n",
                    t.ell_sum,
                    t.q0(),
                    t.q1(),
                    t.ratio(),
                    cli.convention,
                    n0,
                    n1
                ),
            };
            Ok((out, true))
        }
        Command::Classify { weight, level, rank } => {
            let mu = mu_of_weight(*weight).map_err(|e| e.to_string())?;
            let t = compute_thresholds(&mu, *rank, &tf, &spec, &cache)
                .map_err(|e| e.to_string())?;
            let q = q_of_level(*level, cli.convention);
            let outcome = t.predict(q);
            let out = match cli.format {
                Format::Json => serde_json::to_string_pretty(&serde_json::json!({
                    "weight": weight,
                    "level": level,
                    "rank": rank,
                    "q_eff": q,
                    "classification": format!("{:?}", outcome.classification),
                    "a2_upper_bound": outcome.a2_upper_bound,
                    "q0": t.q0(),
                    "q1": t.q1(),
                }))
                .unwrap(),
                _ => format!(
                    "weight {weight}, level {level}, rank {rank}: q_eff = {q:.6}\n\
                     classification: {:?}\n\
                     a2 upper bound: {}\n",
                    outcome.classification,
                    outcome
                        .a2_upper_bound
                        .map(|b| format!("{b:.6}"))
                        .unwrap_or_else(|| "n/a".into())
                ),
            };
            Ok((out, true))
        }
        Command::VerifyTables { which } => {
            let client = client_from(cli)?;
            match which {
                1 => {
                    let data: BTreeMap<_, _> = if client.mode() == Mode::FixtureOnly {
                        client.fixture_table1().map_err(|e| e.to_string())?
                    } else {
                        let mut map = BTreeMap::new();
                        for k in [2u32, 4, 6, 8, 10, 12] {
                            let n_max = if k == 2 { 21 } else { 15 };
                            for n in 1..=n_max {
                                let forms =
                                    client.fetch_newforms(k, n).map_err(|e| e.to_string())?;
                                map.insert((k, n), forms);
                            }
                        }
                        map
                    };
                    let grid = predict_grid(
                        &[2, 4, 6, 8, 10, 12],
                        1..=21,
                        0,
                        cli.convention,
                        &tf,
                        &spec,
                        &cache,
                    )
                    .map_err(|e| e.to_string())?;
                    let report = verify_table1(&grid, &data);
                    let extra = format!("{} cells checked\n", data.len());
                    Ok(render_report(&report, cli.format, &extra))
                }
                2 | 3 => {
                    let rank = *which as usize - 1;
                    let classes = client
                        .fixture_rank_classes(rank as u32)
                        .map_err(|e| e.to_string())?;
                    let bound =
                        rank_conductor_bound(rank, &tf, &spec, cli.convention, &cache)
                            .map_err(|e| e.to_string())?;
                    let mut report = verify_rank_classes(&bound, &classes);
                    let exceptions: &[&str] = if rank == 1 { &["91.b", "121.b"] } else { &[] };
                    report.merge(verify_label_phenomenon(&classes, exceptions));
                    let extra = format!(
                        "{} rank-{rank} classes checked; min conductor bound {:.4}\n",
                        classes.len(),
                        bound.min_conductor
                    );
                    Ok(render_report(&report, cli.format, &extra))
                }
                _ => Err(format!("unknown table {which}; expected 1, 2, or 3")),
            }
        }
        Command::EfResidual { label, height } => {
            let client = client_from(cli)?;
            let record = client.fetch_zeros(label).map_err(|e| e.to_string())?;
            let (weight, level) = if record.weight >= 2 && record.level >= 1 {
                (record.weight, record.level)
            } else {
                parse_label(label)?
            };
            let mu = mu_of_weight(weight).map_err(|e| e.to_string())?;
            let q = q_of_level(level, cli.convention);
            let feq = FunctionalEquationParams::new(mu.to_vec(), q, 1)
                .map_err(|e| e.to_string())?;
            if record.dirichlet_integer_an.is_empty() {
                return Err(format!("record for {label} carries no coefficients"));
            }
            let mut a = BTreeMap::new();
            for (i, &an) in record.dirichlet_integer_an.iter().enumerate() {
                let n = (i + 1) as u64;
                a.insert(n, an as f64 / (n as f64).powf((weight as f64 - 1.0) / 2.0));
            }
            let mut coeffs =
                CoefficientData::from_dirichlet(a, Some(2)).map_err(|e| e.to_string())?;
            let (_, n_max) = tf.support_window().map_err(|e| e.to_string())?;
            coeffs.fill_gl2_prime_powers(level, n_max);
            let zeros = ZeroList::with_rank(0, record.positive_ordinates.clone())
                .map_err(|e| e.to_string())?;
            let check = explicit_formula_residual(
                &feq, &coeffs, &zeros, &tf, *height, &spec, &cache,
            )
            .map_err(|e| e.to_string())?;
            let budget = check.tail_bound + 0.02;
            let ok = check.residual() <= budget;
            let out = match cli.format {
                Format::Json => serde_json::to_string_pretty(&serde_json::json!({
                    "label": label,
                    "height": height,
                    "lhs_truncated": check.lhs_truncated,
                    "rhs": check.rhs,
                    "residual": check.residual(),
                    "tail_bound": check.tail_bound,
                    "pass": ok,
                }))
                .unwrap(),
                _ => format!(
                    "{label} at height {height}\n\
                     zero side (truncated) = {:.8}\n\
                     prime/archimedean side = {:.8}\n\
                     residual = {:.8} (tail bound {:.8})\n\
                     {}\n",
                    check.lhs_truncated,
                    check.rhs,
                    check.residual(),
                    check.tail_bound,
                    if ok { "PASS" } else { "FAIL" }
                ),
            };
            Ok((out, ok))
        }
        Command::PlotDigamma { mu, t_min, t_max, step, output } => {
            let plot = PlotSpec {
                mu: mu.clone(),
                t_min: *t_min,
                t_max: *t_max,
                step: *step,
            };
            let rows = digamma_rows(&plot).map_err(|e| e.to_string())?;
            let rendered = match cli.format {
                Format::Svg => to_svg(&plot, &rows),
                Format::Json => serde_json::to_string(
                    &rows
                        .iter()
                        .map(|(t, v)| serde_json::json!({ "t": t, "values": v }))
                        .collect::<Vec<_>>(),
                )
                .unwrap(),
                _ => to_csv(&plot, &rows),
            };
            if let Some(path) = output {
                std::fs::write(path, &rendered)
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                Ok((format!("wrote {}\n", path.display()), true))
            } else {
                Ok((rendered, true))
            }
        }
    }
}

/// Parses "level.weight.char.orbit" newform labels.
fn parse_label(label: &str) -> Result<(u32, u64), String> {
    let mut parts = label.split('.');
    let level: u64 = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format!("cannot parse level from label {label}"))?;
    let weight: u32 = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format!("cannot parse weight from label {label}"))?;
    Ok((weight, level))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((out, ok)) => {
            print!("{out}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

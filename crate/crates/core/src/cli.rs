//! Command-line front end. Every run produces one JSON report whose header holds the
//! full configuration, so re-running the header reproduces the body byte for byte.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::bounds::{check, Ambient, BoundStatus};
use crate::census::{
    cubic_census_f4, irreducibility_threshold_check, k_curve_check, random_surface_probe, reconstruct_hermitian,
    CensusError, Shard,
};
use crate::gf::{Field, FieldSpec, GfError};
use crate::hermitian::detect_hermitian;
use crate::poly::{HomPoly, PolyError};
use crate::sections::{section_survey, SectionError};
use crate::zeta::{blowups, cross_check, hermitian_surface_zeta, point_counts_from_zeta, zeta_p2, ZetaRational};

pub const SCHEMA: u32 = 1;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Count,
    Bounds,
    Detect,
    Sections,
    Census,
    Probe,
    Zeta,
    Reconstruct,
}

/// Counting, bounds and structure checks for Hermitian varieties over small finite fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Parser)]
#[command(name = "hermitian", version)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub subcommand: Subcommand,
    /// Field order; must be in the built-in registry.
    #[arg(long)]
    pub q: u64,
    /// Input polynomial, e.g. "w^2*X0^2*X1 + X2^3".
    #[arg(long = "poly", visible_alias = "surface")]
    #[serde(default)]
    pub polys: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Part of the run, as i/n with 0 <= i < n.
    #[arg(long)]
    pub shard: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub check_m: Option<u32>,
    #[arg(long)]
    pub blowups: Option<u32>,
}

impl RunConfig {
    pub fn new(subcommand: Subcommand, q: u64) -> RunConfig {
        RunConfig {
            subcommand,
            q,
            polys: Vec::new(),
            seed: None,
            trials: None,
            shard: None,
            out: None,
            check_m: None,
            blowups: None,
        }
    }

    pub fn with_poly(mut self, text: &str) -> RunConfig {
        self.polys.push(text.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    StructuralFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub config: RunConfig,
    pub field: FieldSpec,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub header: Header,
    pub body: Value,
    pub status: Status,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            Status::StructuralFailure => 2,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).unwrap();
        s.push('\n');
        s
    }
}

/// Bad input or an unsupported request; maps to exit code 1.
#[derive(Debug, Error)]
pub enum UsageError {
    #[error("{0}")]
    Field(#[from] GfError),
    #[error("polynomial {index}: {source}")]
    Parse { index: usize, source: PolyError },
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

fn invalid(msg: impl Into<String>) -> UsageError {
    UsageError::Invalid(msg.into())
}

fn failure_body(mut body: Value, failure: Value) -> (Value, Status) {
    body["failure"] = failure;
    (body, Status::StructuralFailure)
}

fn census_failure(e: CensusError) -> Result<(Value, Status), UsageError> {
    if e.is_structural() {
        return Ok(failure_body(json!({}), json!({ "error": e.to_string(), "detail": census_detail(&e) })));
    }
    Err(invalid(e.to_string()))
}

fn census_detail(e: &CensusError) -> Value {
    match e {
        CensusError::Counterexample { kind, detail } => json!({ "kind": kind, "record": detail }),
        _ => Value::Null,
    }
}

fn parse_polys(field: &Arc<Field>, config: &RunConfig, nvars: Option<usize>) -> Result<Vec<HomPoly>, UsageError> {
    config
        .polys
        .iter()
        .enumerate()
        .map(|(index, text)| HomPoly::parse(field, text, nvars).map_err(|source| UsageError::Parse { index, source }))
        .collect()
}

fn one_poly(field: &Arc<Field>, config: &RunConfig, nvars: Option<usize>) -> Result<HomPoly, UsageError> {
    let mut polys = parse_polys(field, config, nvars)?;
    match polys.len() {
        1 => Ok(polys.pop().unwrap()),
        n => Err(invalid(format!("{:?} takes exactly one --poly, got {n}", config.subcommand))),
    }
}

fn shard(config: &RunConfig) -> Result<Shard, UsageError> {
    config.shard.as_deref().map_or(Ok(Shard::ALL), |s| s.parse().map_err(|e: CensusError| invalid(e.to_string())))
}

fn zeta_counts(z: &ZetaRational, m_max: u32) -> Result<Vec<Value>, UsageError> {
    (1..=m_max)
        .map(|m| {
            let n = point_counts_from_zeta(z, m).map_err(|e| invalid(e.to_string()))?;
            Ok(json!({ "m": m, "N": n.to_string() }))
        })
        .collect()
}

/// Executes one configuration. Structural findings are reported in the body with
/// status `structural_failure`; everything else that goes wrong is a usage error.
pub fn run(config: &RunConfig) -> Result<Report, UsageError> {
    let field = Field::registry(config.q)?;
    let (body, status) = match config.subcommand {
        Subcommand::Count => {
            let p = one_poly(&field, config, None)?;
            let n = p.count_points(&field).map_err(|e| invalid(e.to_string()))?;
            (json!({ "N": n, "nvars": p.nvars(), "degree": p.degree() }), Status::Ok)
        }
        Subcommand::Bounds => {
            let p = one_poly(&field, config, None)?;
            let ambient = match p.nvars() {
                3 => Ambient::Curve,
                4 => Ambient::Surface,
                n => return Err(invalid(format!("bounds takes a plane curve or a surface, got {n} variables"))),
            };
            let rows = check(&p, ambient).map_err(|e| invalid(e.to_string()))?;
            let body = json!({ "rows": rows });
            let violations: Vec<_> = rows.iter().filter(|r| r.status == BoundStatus::Violation).collect();
            if violations.is_empty() {
                (body, Status::Ok)
            } else {
                let failure = json!({ "violations": violations });
                failure_body(body, failure)
            }
        }
        Subcommand::Detect => {
            let p = one_poly(&field, config, None)?;
            let body = match detect_hermitian(&p).map_err(|e| invalid(e.to_string()))? {
                Some((rho, a)) => json!({
                    "hermitian": true,
                    "rho": rho,
                    "matrix": a,
                    "nonsingular": a.is_nonsingular(),
                }),
                None => json!({ "hermitian": false }),
            };
            (body, Status::Ok)
        }
        Subcommand::Sections => {
            let p = one_poly(&field, config, Some(4))?;
            match section_survey(&p) {
                Ok(r) => {
                    let tallies = json!({ "nu1": r.nu1, "nu2": r.nu2, "other": r.other });
                    (json!({ "entries": r.entries, "tallies": tallies }), Status::Ok)
                }
                Err(SectionError::Structural(msg)) => failure_body(json!({}), json!({ "error": msg })),
                Err(e) => return Err(invalid(e.to_string())),
            }
        }
        Subcommand::Census => {
            if config.q != 4 {
                return Err(invalid(format!("census runs over F_4 only, got q = {}", config.q)));
            }
            let shard = shard(config)?;
            let mut nine = Vec::new();
            let result = cubic_census_f4(shard, |r| {
                if r.n == 9 && !r.has_linear_component {
                    nine.push(json!({
                        "index": r.index,
                        "id": r.id,
                        "all_flexes": r.all_flexes,
                        "equivalence": r.equivalence,
                    }));
                }
            });
            match (result, k_curve_check()) {
                (Ok(summary), Ok(k)) => {
                    let threshold = irreducibility_threshold_check(&summary);
                    (json!({ "summary": summary, "k_curve": k, "threshold": threshold, "records": nine }), Status::Ok)
                }
                (Err(e), _) | (_, Err(e)) => census_failure(e)?,
            }
        }
        Subcommand::Probe => {
            let trials = config.trials.unwrap_or(DEFAULT_TRIALS);
            let seed = config.seed.unwrap_or(DEFAULT_SEED);
            match random_surface_probe(config.q, trials, seed, shard(config)?) {
                Ok(s) => (serde_json::to_value(s).unwrap(), Status::Ok),
                Err(e) => census_failure(e)?,
            }
        }
        Subcommand::Zeta => {
            let q = config.q;
            let m_max = config.check_m.unwrap_or(if config.polys.is_empty() { 0 } else { 1 });
            match (config.blowups, config.polys.is_empty()) {
                (Some(k), true) => {
                    let z = blowups(&zeta_p2(q), q, k);
                    (json!({ "zeta": z, "counts": zeta_counts(&z, m_max)? }), Status::Ok)
                }
                (None, true) => {
                    let z = hermitian_surface_zeta(q).map_err(|e| invalid(e.to_string()))?;
                    (json!({ "zeta": z, "counts": zeta_counts(&z, m_max)? }), Status::Ok)
                }
                (None, false) => {
                    let p = one_poly(&field, config, Some(4))?;
                    let z = hermitian_surface_zeta(q).map_err(|e| invalid(e.to_string()))?;
                    let cc = cross_check(&p, &z, m_max).map_err(|e| invalid(e.to_string()))?;
                    let body = json!({ "zeta": z, "cross_check": cc });
                    if cc.all_agree {
                        (body, Status::Ok)
                    } else {
                        let bad: Vec<_> = cc.rows.iter().filter(|r| r.agree == Some(false)).collect();
                        let failure = json!({ "disagreements": bad });
                        failure_body(body, failure)
                    }
                }
                (Some(_), false) => return Err(invalid("--blowups and --poly are exclusive")),
            }
        }
        Subcommand::Reconstruct => {
            let p = one_poly(&field, config, Some(4))?;
            match reconstruct_hermitian(&p) {
                Ok(Some((t, a))) => (json!({ "applicable": true, "transform": t, "matrix": a }), Status::Ok),
                Ok(None) => (json!({ "applicable": false }), Status::Ok),
                Err(e) => census_failure(e)?,
            }
        }
    };
    Ok(Report {
        schema: SCHEMA,
        header: Header { config: config.clone(), field: field.spec().clone(), version: VERSION.into() },
        body,
        status,
    })
}

/// Parses arguments, runs, writes the report; returns the process exit code.
pub fn main_with_args(args: impl IntoIterator<Item = String>) -> i32 {
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&config).and_then(|r| write_report(&config, &r).map(|_| r)) {
        Ok(report) => {
            eprintln!("{:?}: {:?}", config.subcommand, report.status);
            report.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn write_report(config: &RunConfig, report: &Report) -> Result<(), UsageError> {
    let text = report.to_json();
    match &config.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

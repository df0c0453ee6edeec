//! `catmaj` command-line tool.
//!
//! Exit codes: 0 success / condition true / certificate found or verified,
//! 1 condition false / inconclusive / verification failed, 2 usage, parse or
//! hypothesis error, 3 internal disagreement between independent methods.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use catmaj::catalysis::{converse_audit, CertificateDoc, ConversionCertificate};
use catmaj::divergence::{renyi_entropy, Order};
use catmaj::json::{ChannelDoc, InstanceDoc};
use catmaj::{
    blackwell_criterion, check_conditions, relatively_majorizes, renyi_divergence, search_catalyst,
    verify_certificate, Backend, Rational, Scalar, SearchOptions, SearchOutcome,
};
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};

#[derive(Parser, Debug)]
#[command(name = "catmaj", version, about = "Catalytic relative majorization with exact certificates")]
struct Cli {
    /// Seed echoed in reports for reproducibility.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Include wall-clock timing in the report (makes output run-dependent).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Table of Rényi divergences and entropies for both pairs.
    Divergence {
        file: PathBuf,
        /// Comma-separated orders; `inf` and `-inf` allowed.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha: Option<Vec<Order>>,
    },
    /// Evaluate the conversion conditions for the instance mode.
    Check { file: PathBuf },
    /// Decide (p, q) ≻ (p′, q′) by exact LP and by the Blackwell criterion.
    Relmaj {
        file: PathBuf,
        #[arg(long)]
        emit_witness: bool,
    },
    /// Search for a catalyst and write a certificate.
    Catalyze {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_dim: usize,
        #[arg(long, default_value_t = SearchOptions::default().budget)]
        budget: u64,
        #[arg(long, default_value_t = 200)]
        fw_iterations: usize,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a certificate (or a report containing one).
    Verify { file: PathBuf },
}

/// Failure that ends the run with exit code 2 (or 3 for `internal`).
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<catmaj::Error> for Failure {
    fn from(e: catmaj::Error) -> Self {
        Failure::input(e.to_string())
    }
}

type Outcome = Result<(u8, Map<String, Value>), Failure>;

fn read_source(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::input(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }
}

fn parse_doc<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, Failure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        Failure::input(format!("{what}: at `{}`: {}", e.path(), e.inner()))
    })
}

fn number(x: f64) -> Value {
    if x == 0.0 {
        json!(0.0)
    } else if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn divergence<S: Scalar>(doc: &InstanceDoc, alphas: &[Order]) -> Outcome {
    let inst = doc.to_instance::<S>()?;
    let (s, t) = (&inst.source, &inst.target);
    let mut rows = Vec::new();
    for &a in alphas {
        rows.push(json!({
            "alpha": a.to_string(),
            "D_source": number(renyi_divergence(a, &s.p, &s.q)?),
            "D_target": number(renyi_divergence(a, &t.p, &t.q)?),
            "H_p": number(renyi_entropy(a, &s.p)),
            "H_p_prime": number(renyi_entropy(a, &t.p)),
        }));
    }
    let mut out = Map::new();
    out.insert("table".into(), Value::Array(rows));
    Ok((0, out))
}

fn check<S: Scalar>(doc: &InstanceDoc) -> Outcome {
    let inst = doc.to_instance::<S>()?;
    let report = check_conditions(&inst)?;
    let mut out = Map::new();
    out.insert("verdict".into(), json!(report.verdict));
    out.insert(
        "report".into(),
        json!({
            "mode": report.mode,
            "source_value": number(report.source_value),
            "target_value": number(report.target_value),
            "source_min": number(report.source_min),
            "target_min": number(report.target_min),
            "exact_comparison": report.exact_comparison,
            "relative_spectra_differ": report.relative_spectra_differ,
        }),
    );
    Ok((if report.verdict { 0 } else { 1 }, out))
}

fn relmaj<S: Scalar>(doc: &InstanceDoc, emit_witness: bool) -> Outcome {
    let inst = doc.to_instance::<S>()?;
    let lp = relatively_majorizes(&inst.source, &inst.target)?;
    let blackwell = blackwell_criterion(&inst.source, &inst.target);
    if lp.verdict != blackwell {
        return Err(Failure {
            code: 3,
            message: format!("internal error: LP says {} but the Blackwell criterion says {blackwell}", lp.verdict),
        });
    }
    let mut out = Map::new();
    out.insert("verdict".into(), json!(lp.verdict));
    out.insert("lp_verdict".into(), json!(lp.verdict));
    out.insert("blackwell_verdict".into(), json!(blackwell));
    out.insert("pivots".into(), json!(lp.pivots));
    if let Some(r) = &lp.rationalization {
        out.insert(
            "rationalization".into(),
            json!({"max_denominator": r.max_denominator, "max_abs_change": r.max_abs_change}),
        );
    }
    if emit_witness {
        out.insert(
            "witness".into(),
            lp.witness
                .as_ref()
                .map_or(Value::Null, |w| serde_json::to_value(ChannelDoc::from_channel(w)).expect("serializable")),
        );
    }
    Ok((if lp.verdict { 0 } else { 1 }, out))
}

fn certificate_report(cert: &ConversionCertificate) -> Map<String, Value> {
    let verification = verify_certificate(&cert.instance, cert);
    // The audit presumes a well-shaped certificate; a malformed one is a failed check, not an error.
    let audit = converse_audit(&cert.instance, cert).ok();
    let mut out = Map::new();
    out.insert("verification".into(), serde_json::to_value(&verification).expect("serializable"));
    out.insert("audit".into(), audit.as_ref().map_or(Value::Null, audit_value));
    let audit_ok = audit.is_some_and(|a| a.passed);
    out.insert("passed".into(), json!(verification.passed && audit_ok));
    out
}

fn audit_value(audit: &catmaj::catalysis::AuditReport) -> Value {
    json!({
        "passed": audit.passed,
        "links": audit.links.iter().map(|l| json!({
            "alpha": l.alpha,
            "name": l.name,
            "lhs": number(l.lhs),
            "rhs": number(l.rhs),
            "slack": number(l.slack),
        })).collect::<Vec<_>>(),
        "total_slack": number(audit.total_slack),
        "chain_sum": number(audit.chain_sum),
        "correlation": number(audit.correlation),
        "substitution": number(audit.substitution),
    })
}

fn catalyze<S: Scalar>(doc: &InstanceDoc, opts: &SearchOptions, out_path: Option<&Path>) -> Outcome {
    let inst = doc.to_instance::<S>()?;
    let mut out = Map::new();
    match search_catalyst(&inst, opts)? {
        SearchOutcome::Found(cert) => {
            let cert_doc = cert.to_doc();
            let text = serde_json::to_string_pretty(&cert_doc).expect("serializable");
            if let Some(path) = out_path {
                fs::write(path, format!("{text}\n"))
                    .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            }
            let checks = certificate_report(&cert);
            let passed = checks["passed"] == json!(true);
            out.insert("result".into(), json!("found"));
            out.insert("catalyst_dim".into(), json!(cert.catalyst_dim()));
            out.extend(checks);
            out.insert("certificate".into(), serde_json::to_value(&cert_doc).expect("serializable"));
            if !passed {
                return Err(Failure {
                    code: 3,
                    message: "internal error: search returned a certificate that fails verification".into(),
                });
            }
            Ok((0, out))
        }
        SearchOutcome::Inconclusive(log) => {
            out.insert("result".into(), json!("inconclusive"));
            out.insert("search_log".into(), serde_json::to_value(&log).expect("serializable"));
            Ok((1, out))
        }
    }
}

fn verify(text: &str) -> Outcome {
    let value: Value = parse_doc(text, "certificate")?;
    // A catalyze report carries the certificate under "certificate".
    let value = match value.get("certificate") {
        Some(inner) if value.get("format").is_none() => inner.clone(),
        _ => value,
    };
    let doc: CertificateDoc = serde_path_to_error::deserialize(value)
        .map_err(|e| Failure::input(format!("certificate: at `{}`: {}", e.path(), e.inner())))?;
    let cert = ConversionCertificate::from_doc(&doc)?;
    let report = certificate_report(&cert);
    let passed = report["passed"] == json!(true);
    let mut out = report;
    if !passed {
        let failed: Vec<String> = verify_certificate(&cert.instance, &cert)
            .failed_checks()
            .into_iter()
            .map(String::from)
            .collect();
        out.insert("failed_checks".into(), json!(failed));
    }
    Ok((if passed { 0 } else { 1 }, out))
}

fn run(cli: &Cli) -> Outcome {
    let name;
    let result = match &cli.command {
        Command::Divergence { file, alpha } => {
            name = "divergence";
            let doc: InstanceDoc = parse_doc(&read_source(file)?, "instance")?;
            let alphas = alpha.clone().unwrap_or_else(Order::standard_grid);
            match doc.backend() {
                Backend::Rational => divergence::<Rational>(&doc, &alphas),
                Backend::Float => divergence::<f64>(&doc, &alphas),
            }
        }
        Command::Check { file } => {
            name = "check";
            let doc: InstanceDoc = parse_doc(&read_source(file)?, "instance")?;
            match doc.backend() {
                Backend::Rational => check::<Rational>(&doc),
                Backend::Float => check::<f64>(&doc),
            }
        }
        Command::Relmaj { file, emit_witness } => {
            name = "relmaj";
            let doc: InstanceDoc = parse_doc(&read_source(file)?, "instance")?;
            match doc.backend() {
                Backend::Rational => relmaj::<Rational>(&doc, *emit_witness),
                Backend::Float => relmaj::<f64>(&doc, *emit_witness),
            }
        }
        Command::Catalyze { file, max_dim, budget, fw_iterations, threads, out } => {
            name = "catalyze";
            let doc: InstanceDoc = parse_doc(&read_source(file)?, "instance")?;
            let opts = SearchOptions {
                max_catalyst_dim: *max_dim,
                budget: *budget,
                fw_iterations: *fw_iterations,
                threads: *threads,
            };
            match doc.backend() {
                Backend::Rational => catalyze::<Rational>(&doc, &opts, out.as_deref()),
                Backend::Float => catalyze::<f64>(&doc, &opts, out.as_deref()),
            }
        }
        Command::Verify { file } => {
            name = "verify";
            verify(&read_source(file)?)
        }
    };
    result.map(|(code, mut body)| {
        body.insert("command".into(), json!(name));
        (code, body)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok((code, mut body)) => {
            body.insert("tool".into(), json!("catmaj"));
            body.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
            body.insert("seed".into(), json!(cli.seed));
            body.insert("exit_code".into(), json!(code));
            if cli.timing {
                body.insert("timing_ms".into(), json!(start.elapsed().as_secs_f64() * 1e3));
            }
            let text = serde_json::to_string_pretty(&Value::Object(body)).expect("serializable");
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("catmaj: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

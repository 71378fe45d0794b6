//! Command-line analyzer for vector addition systems with states.
//!
//! Subcommands: `analyze` decides termination and writes a certificate or
//! witness, `check` re-verifies a certificate against a system, `complexity`
//! classifies asymptotic complexity, `simulate` replays transition sequences
//! or pumps a witness, and `generate` produces random systems.
//!
//! Exit codes: 0 success/terminating/verified, 10 non-terminating,
//! 1 rejected certificate or blocked simulation, 2 malformed input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use vass::cert::Verdict;
use vass::complexity::{classify, LinearVerdict};
use vass::generate::{generate_random, GeneratorConfig};
use vass::json::{
    parse_certificate, parse_vass, report_to_json, vass_to_json, verdict_to_json, CertParseError,
    ParsedCertificate,
};
use vass::oracle::{self, csv_report, longest_trace, OracleBudget, TraceOutcome};
use vass::ranking::{analyze, AnalyzeOptions, SolveMode};
use vass::verify::{pump_witness, verify_ranking, verify_witness};
use vass::{Int, Valuation, Vass, VassState};

const EXIT_OK: u8 = 0;
const EXIT_REJECTED: u8 = 1;
const EXIT_MALFORMED: u8 = 2;
const EXIT_NON_TERMINATING: u8 = 10;

#[derive(Parser)]
#[command(name = "vass", about = "Termination and complexity analysis for VASS", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the main artifact (certificate, report, generated system) here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Constraint solving mode of the analysis engine.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::PrimalDual)]
    mode: ModeArg,

    /// Seed for random generation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Disable in-process parallelism.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// One constraint-system pair per transition.
    Loop,
    /// A single aggregated primal/dual solve per level.
    PrimalDual,
}

#[derive(Subcommand)]
enum Command {
    /// Decide termination; emit a ranking certificate or a cycle witness.
    Analyze {
        input: PathBuf,
        /// Greedily shorten the witness cycle.
        #[arg(long)]
        reduce_witness: bool,
        /// Search for small ranking coefficients (loop mode only).
        #[arg(long)]
        small_coefficients: bool,
    },
    /// Verify a certificate or witness document against a system.
    Check { input: PathBuf, certificate: PathBuf },
    /// Classify asymptotic complexity; optionally measure concrete traces.
    Complexity {
        input: PathBuf,
        /// Solve the exact linear-complexity program.
        #[arg(long)]
        linear: bool,
        /// Comma-separated bounds for empirical longest-trace runs.
        #[arg(long, value_delimiter = ',')]
        empirical: Vec<u64>,
        /// Write the empirical CSV here (defaults to stdout).
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = OracleBudget::default().max_steps)]
        max_steps: u64,
        #[arg(long, default_value_t = OracleBudget::default().value_ceiling)]
        value_ceiling: i64,
    },
    /// Replay a transition sequence, or pump a non-termination witness.
    Simulate {
        input: PathBuf,
        /// Witness document to pump.
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Full cycle traversals when pumping.
        #[arg(long, default_value_t = 3)]
        repetitions: usize,
        /// Start location for replay.
        #[arg(long)]
        from: Option<String>,
        /// Comma-separated start valuation for replay.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        valuation: Vec<i64>,
        /// Comma-separated transition ids to replay.
        #[arg(long, value_delimiter = ',')]
        steps: Vec<usize>,
    },
    /// Generate a random system.
    Generate {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 3)]
        locations: usize,
        #[arg(long, default_value_t = 4)]
        transitions: usize,
        #[arg(long, default_value_t = 2)]
        max_update: i64,
        /// Strongly connected by construction.
        #[arg(long)]
        connected: bool,
        /// Every update sums to zero.
        #[arg(long)]
        conservative: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let options = AnalyzeOptions {
        mode: match cli.mode {
            ModeArg::Loop => SolveMode::Loop,
            ModeArg::PrimalDual => SolveMode::PrimalDual,
        },
        parallel: !cli.sequential,
        ..AnalyzeOptions::default()
    };
    let code = match run(&cli, options) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    };
    ExitCode::from(code)
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn load_vass(path: &Path) -> Result<Vass, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| fail(EXIT_MALFORMED, format!("{}: {e}", path.display())))?;
    parse_vass(&text).map_err(|e| fail(EXIT_MALFORMED, format!("{}: {e}", path.display())))
}

fn write_artifact(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    if let Some(path) = out {
        fs::write(path, content)
            .map_err(|e| fail(EXIT_MALFORMED, format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn run(cli: &Cli, options: AnalyzeOptions) -> Result<u8, Failure> {
    match &cli.command {
        Command::Analyze {
            input,
            reduce_witness,
            small_coefficients,
        } => {
            let vass = load_vass(input)?;
            let options = AnalyzeOptions {
                reduce_witness: *reduce_witness,
                small_coefficients: *small_coefficients,
                ..options
            };
            let result = analyze(&vass, &options)
                .map_err(|e| fail(EXIT_REJECTED, format!("analysis failed: {e}")))?;
            let doc = verdict_to_json(&vass, &result.verdict);
            write_artifact(&cli.out, &doc)?;
            match cli.format {
                Format::Text => println!("{}", result.summary(&vass)),
                Format::Json => println!("{doc}"),
            }
            Ok(match result.verdict {
                Verdict::Terminating(_) => EXIT_OK,
                Verdict::NonTerminating(_) => EXIT_NON_TERMINATING,
            })
        }
        Command::Check { input, certificate } => {
            let vass = load_vass(input)?;
            let text = fs::read_to_string(certificate)
                .map_err(|e| fail(EXIT_MALFORMED, format!("{}: {e}", certificate.display())))?;
            let parsed = parse_certificate(&vass, &text).map_err(|e| match e {
                CertParseError::Malformed(inner) => {
                    fail(EXIT_MALFORMED, format!("{}: {inner}", certificate.display()))
                }
                CertParseError::Binding(msg) => fail(EXIT_REJECTED, format!("rejected: {msg}")),
            })?;
            match parsed {
                ParsedCertificate::Ranking(cert) => verify_ranking(&vass, &cert)
                    .map_err(|reason| fail(EXIT_REJECTED, format!("rejected: {reason}")))?,
                ParsedCertificate::Witness(witness) => {
                    verify_witness(&vass, &witness)
                        .map(|_| ())
                        .map_err(|reason| fail(EXIT_REJECTED, format!("rejected: {reason}")))?
                }
            }
            println!("verified");
            Ok(EXIT_OK)
        }
        Command::Complexity {
            input,
            linear,
            empirical,
            csv,
            max_steps,
            value_ceiling,
        } => {
            let vass = load_vass(input)?;
            let result = analyze(&vass, &options)
                .map_err(|e| fail(EXIT_REJECTED, format!("analysis failed: {e}")))?;
            if let Verdict::NonTerminating(w) = &result.verdict {
                let doc = verdict_to_json(&vass, &result.verdict);
                write_artifact(&cli.out, &doc)?;
                match cli.format {
                    Format::Text => println!("{}", result.summary(&vass)),
                    Format::Json => println!("{doc}"),
                }
                drop(w);
                return Ok(EXIT_NON_TERMINATING);
            }
            let report = classify(&vass, &result, *linear, options.parallel);
            let doc = report_to_json(&report);
            write_artifact(&cli.out, &doc)?;
            match cli.format {
                Format::Text => {
                    println!("terminating, order {}", report.order.unwrap_or(0));
                    if let Some(k) = report.theta() {
                        println!("complexity: Theta(N^{k})");
                    } else if let Some(k) = report.lower {
                        println!("complexity: Omega(N^{k}), upper bound open");
                    }
                    match &report.linear {
                        Some(LinearVerdict::ExactLinear(c)) => {
                            println!("linear coefficient: {}", vass::rat::rat_display(c))
                        }
                        Some(LinearVerdict::AtLeastQuadratic) => {
                            println!("linear coefficient: none (at least quadratic)")
                        }
                        _ => {}
                    }
                }
                Format::Json => println!("{doc}"),
            }
            if !empirical.is_empty() {
                let budget = OracleBudget {
                    max_steps: *max_steps,
                    value_ceiling: *value_ceiling,
                };
                let rows: Vec<(u64, _)> = empirical
                    .iter()
                    .map(|&n| (n, longest_trace(&vass, n, &budget)))
                    .collect();
                let table = csv_report(&rows);
                match csv {
                    Some(path) => fs::write(path, table)
                        .map_err(|e| fail(EXIT_MALFORMED, format!("{}: {e}", path.display())))?,
                    None => print!("{table}"),
                }
                if rows
                    .iter()
                    .any(|(_, r)| r.outcome == TraceOutcome::NonTerminationDetected)
                {
                    return Ok(EXIT_NON_TERMINATING);
                }
            }
            Ok(EXIT_OK)
        }
        Command::Simulate {
            input,
            witness,
            repetitions,
            from,
            valuation,
            steps,
        } => {
            let vass = load_vass(input)?;
            let trace = match witness {
                Some(cert_path) => {
                    let text = fs::read_to_string(cert_path).map_err(|e| {
                        fail(EXIT_MALFORMED, format!("{}: {e}", cert_path.display()))
                    })?;
                    let parsed = parse_certificate(&vass, &text).map_err(|e| match e {
                        CertParseError::Malformed(inner) => {
                            fail(EXIT_MALFORMED, format!("{}: {inner}", cert_path.display()))
                        }
                        CertParseError::Binding(msg) => {
                            fail(EXIT_REJECTED, format!("rejected: {msg}"))
                        }
                    })?;
                    let ParsedCertificate::Witness(w) = parsed else {
                        return Err(fail(
                            EXIT_REJECTED,
                            "the document is a ranking certificate, nothing to pump",
                        ));
                    };
                    pump_witness(&vass, &w, *repetitions)
                        .map_err(|reason| fail(EXIT_REJECTED, format!("rejected: {reason}")))?
                }
                None => {
                    let from = from
                        .as_deref()
                        .ok_or_else(|| fail(EXIT_MALFORMED, "--from is required for replay"))?;
                    let entries: Vec<Int> = valuation.iter().map(|&x| Int::from(x)).collect();
                    let start = build_state(&vass, from, entries)?;
                    oracle::replay(&vass, &start, steps).map_err(|position| {
                        fail(
                            EXIT_REJECTED,
                            format!("step {position} is blocked or invalid"),
                        )
                    })?
                }
            };
            for state in &trace {
                println!(
                    "{} {}",
                    vass.location_name(state.location),
                    state.valuation
                );
            }
            Ok(EXIT_OK)
        }
        Command::Generate {
            dim,
            locations,
            transitions,
            max_update,
            connected,
            conservative,
        } => {
            let cfg = GeneratorConfig {
                dim: *dim,
                locations: *locations,
                transitions: *transitions,
                max_update: *max_update,
                connected: *connected,
                conservative: *conservative,
            };
            let vass = generate_random(cli.seed, &cfg);
            let doc = vass_to_json(&vass);
            write_artifact(&cli.out, &doc)?;
            println!("{doc}");
            Ok(EXIT_OK)
        }
    }
}

fn build_state(vass: &Vass, location: &str, entries: Vec<Int>) -> Result<VassState, Failure> {
    let location_id = vass
        .location_id(location)
        .ok_or_else(|| fail(EXIT_MALFORMED, format!("unknown location {location:?}")))?;
    if entries.len() != vass.dim() {
        return Err(fail(
            EXIT_MALFORMED,
            format!("valuation needs {} entries", vass.dim()),
        ));
    }
    let valuation = Valuation::new(entries)
        .map_err(|e| fail(EXIT_MALFORMED, format!("invalid valuation: {e}")))?;
    Ok(VassState {
        location: location_id,
        valuation,
    })
}

//! Command-line front end: evaluates the entanglement-assisted chains, the
//! polyhedral qubit protocols, and the classical baselines, emitting
//! deterministic JSON or CSV reports.

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mqrac::task::{Error, Rational};
use mqrac::{classical, earac, qrac, TOL_EXACT, TOL_SIM};

#[derive(Parser)]
#[command(name = "mqrac", version, about = "Multiparty random access code simulator")]
struct Cli {
    /// Worker threads for parallel evaluation (default: all cores)
    #[arg(long, global = true, env = "MQRAC_THREADS")]
    threads: Option<usize>,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Entanglement-assisted chains: exact branch-by-branch simulation
    /// against the closed forms
    Earac {
        #[arg(value_enum)]
        protocol: EaracProtocol,
        /// Input length (required for bell/ghz; ignored by grid9)
        #[arg(long)]
        n: Option<u8>,
        /// Include the per-(x,y) success table
        #[arg(long)]
        per_pair: bool,
    },
    /// Classical baselines: exhaustive strategy search and the zigzag
    /// strategy/formula
    Classical {
        #[arg(value_enum)]
        mode: ClassicalMode,
        /// Input length (required for enumerate/zigzag)
        #[arg(long)]
        n: Option<u8>,
        /// Maximum number of encoding-side strategies to enumerate
        #[arg(long, default_value_t = 1 << 21)]
        cap: u128,
    },
    /// Single-qubit channel protocols on polyhedral encodings
    Qrac {
        #[arg(value_enum)]
        construction: QracConstruction,
        /// Include the input relabelling table
        #[arg(long)]
        emit_remap: bool,
        /// Include the full encoding (unitaries, initial states, remap)
        #[arg(long)]
        emit_encoding: bool,
    },
    /// Quantum-minus-classical difference curve over n
    Diff {
        #[arg(long, default_value_t = 12)]
        max_n: u8,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EaracProtocol {
    Bell,
    Ghz,
    Grid9,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassicalMode {
    Enumerate,
    Zigzag,
    Appendix,
}

#[derive(Clone, Copy, ValueEnum)]
enum QracConstruction {
    Tetrakis,
    Pentakis,
}

enum CmdError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Lib(e)
    }
}

type CmdResult = Result<Output, CmdError>;

/// JSON tree plus its CSV rendering; both carry identical values.
struct Output {
    json: Value,
    csv: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let started = Instant::now();
    let result = match &cli.cmd {
        Cmd::Earac {
            protocol,
            n,
            per_pair,
        } => cmd_earac(*protocol, *n, *per_pair),
        Cmd::Classical { mode, n, cap } => cmd_classical(*mode, *n, *cap),
        Cmd::Qrac {
            construction,
            emit_remap,
            emit_encoding,
        } => cmd_qrac(*construction, *emit_remap, *emit_encoding),
        Cmd::Diff { max_n } => cmd_diff(*max_n),
    };
    match result {
        Ok(out) => {
            match cli.format {
                Format::Json => {
                    let rounded = round_floats(out.json);
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&rounded).expect("serializable")
                    );
                }
                Format::Csv => print!("{}", out.csv),
            }
            eprintln!("completed in {} ms", started.elapsed().as_millis());
            ExitCode::SUCCESS
        }
        Err(CmdError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CmdError::Lib(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::CapExceeded { .. } => ExitCode::from(3),
                Error::VerificationMismatch(_) => ExitCode::from(4),
                _ => ExitCode::from(1),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// deterministic float formatting: 12 significant digits
// ---------------------------------------------------------------------------

fn sig12(v: f64) -> f64 {
    format!("{v:.11e}").parse().expect("parses back")
}

fn fmt12(v: f64) -> String {
    let r = sig12(v);
    let mut s = format!("{r}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                let r = sig12(n.as_f64().expect("f64"));
                json!(r)
            } else {
                Value::Number(n)
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => {
            Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect())
        }
        other => other,
    }
}

fn bundle(command: &str, parameters: Value, body: Value) -> Value {
    json!({
        "artifact": { "name": "mqrac", "version": env!("CARGO_PKG_VERSION") },
        "command": command,
        "parameters": parameters,
        "report": body,
    })
}

fn rational_json(r: &Rational) -> Value {
    json!({
        "num": r.numer().to_string(),
        "den": r.denom().to_string(),
        "value": r.to_f64(),
    })
}

// ---------------------------------------------------------------------------
// earac
// ---------------------------------------------------------------------------

fn cmd_earac(protocol: EaracProtocol, n: Option<u8>, per_pair: bool) -> CmdResult {
    let (label, report, closed, exact): (_, _, f64, Option<Rational>) = match protocol {
        EaracProtocol::Bell => {
            let n = n.ok_or_else(|| CmdError::Usage("earac bell requires --n".into()))?;
            if !(2..=10).contains(&n) {
                return Err(CmdError::Usage(format!(
                    "bell chain needs 2 <= n <= 10, got {n} \
                     (the branch enumeration grows as 4^n per input)"
                )));
            }
            (
                "bell",
                earac::bell_chain_report(n, per_pair)?,
                earac::closed_form_bell(n),
                None,
            )
        }
        EaracProtocol::Ghz => {
            let n = n.ok_or_else(|| CmdError::Usage("earac ghz requires --n".into()))?;
            if n < 3 || n % 2 == 0 || n > 11 {
                return Err(CmdError::Usage(format!(
                    "ghz chain is defined for odd 3 <= n <= 11, got {n} \
                     (each primitive consumes two relay bits)"
                )));
            }
            (
                "ghz",
                earac::ghz_chain_report(n, per_pair)?,
                earac::closed_form_ghz(n)?,
                None,
            )
        }
        EaracProtocol::Grid9 => (
            "grid9",
            earac::grid9_report(per_pair)?,
            2.0 / 3.0,
            Some(Rational::new(2, 3)),
        ),
    };

    let diff = (report.value_float - closed).abs();
    let tol = if exact.is_some() { TOL_EXACT } else { TOL_SIM };
    if diff > tol {
        return Err(CmdError::Lib(Error::VerificationMismatch(format!(
            "simulated value {} differs from closed form {closed} by {diff:e}",
            report.value_float
        ))));
    }

    let mut body = json!({
        "protocol": label,
        "n": report.n,
        "k": report.k,
        "method": report.method.as_str(),
        "simulated": report.value_float,
        "closed_form": closed,
        "difference": diff,
    });
    if let Some(e) = &exact {
        body["closed_form_exact"] = rational_json(e);
    }
    if let Some(pairs) = &report.per_pair {
        body["per_pair"] = json!(pairs
            .iter()
            .map(|p| json!({"x": p.x, "y": p.y, "p": p.p}))
            .collect::<Vec<_>>());
    }

    let mut csv = String::from("protocol,n,k,simulated,closed_form,difference\n");
    csv.push_str(&format!(
        "{label},{},{},{},{},{}\n",
        report.n,
        report.k,
        fmt12(report.value_float),
        fmt12(closed),
        fmt12(diff)
    ));
    if let Some(pairs) = &report.per_pair {
        csv.push_str("\nx,y,p\n");
        for p in pairs {
            csv.push_str(&format!("{},{},{}\n", p.x, p.y, fmt12(p.p)));
        }
    }

    let params = json!({"protocol": label, "n": n, "per_pair": per_pair});
    Ok(Output {
        json: bundle("earac", params, body),
        csv,
    })
}

// ---------------------------------------------------------------------------
// classical
// ---------------------------------------------------------------------------

fn cmd_classical(mode: ClassicalMode, n: Option<u8>, cap: u128) -> CmdResult {
    match mode {
        ClassicalMode::Enumerate => {
            let n = n.ok_or_else(|| CmdError::Usage("classical enumerate requires --n".into()))?;
            let task = mqrac::task::RacTask::standard(n, 2.min(n))
                .map_err(|e| CmdError::Usage(e.to_string()))?;
            let best = classical::enumerate_optimal(&task, cap)?;
            let body = json!({
                "mode": "enumerate",
                "n": n,
                "k": task.scenario().k,
                "cap": cap.to_string(),
                "optimum": rational_json(&best.score),
                "message_decoder_attains_optimum": best.message_decoder_attains_optimum,
                "strategy": serde_json::to_value(&best.strategy).expect("serializable"),
            });
            let strategy = serde_json::to_value(&best.strategy).expect("serializable");
            let mut csv = String::from(
                "mode,n,k,num,den,value,message_decoder_optimal,first_party,relays,decoder\n",
            );
            let relays: Vec<String> = strategy["relays"]
                .as_array()
                .expect("array")
                .iter()
                .map(|r| r.as_str().expect("string").to_string())
                .collect();
            csv.push_str(&format!(
                "enumerate,{n},{},{},{},{},{},{},{},{}\n",
                task.scenario().k,
                best.score.numer(),
                best.score.denom(),
                fmt12(best.score.to_f64()),
                best.message_decoder_attains_optimum,
                strategy["first_party"].as_str().expect("string"),
                relays.join("|"),
                strategy["decoder"].as_str().expect("string"),
            ));
            Ok(Output {
                json: bundle(
                    "classical",
                    json!({"mode": "enumerate", "n": n, "cap": cap.to_string()}),
                    body,
                ),
                csv,
            })
        }
        ClassicalMode::Zigzag => {
            let n = n.ok_or_else(|| CmdError::Usage("classical zigzag requires --n".into()))?;
            if n < 2 {
                return Err(CmdError::Usage(format!("zigzag needs n >= 2, got {n}")));
            }
            let formula = classical::zigzag_formula(n);
            let strategy = classical::ClassicalStrategy::zigzag(n)?;
            let task = mqrac::task::RacTask::standard(n, 2)?;
            let evaluated = classical::evaluate_strategy(&strategy, &task)?;
            if formula != evaluated {
                return Err(CmdError::Lib(Error::VerificationMismatch(format!(
                    "zigzag formula {formula} differs from strategy evaluation {evaluated}"
                ))));
            }
            let body = json!({
                "mode": "zigzag",
                "n": n,
                "formula": rational_json(&formula),
                "evaluated": rational_json(&evaluated),
                "strategy": serde_json::to_value(&strategy).expect("serializable"),
            });
            let mut csv = String::from("mode,n,num,den,value\n");
            csv.push_str(&format!(
                "zigzag,{n},{},{},{}\n",
                formula.numer(),
                formula.denom(),
                fmt12(formula.to_f64())
            ));
            Ok(Output {
                json: bundle("classical", json!({"mode": "zigzag", "n": n}), body),
                csv,
            })
        }
        ClassicalMode::Appendix => {
            let mut rows = Vec::new();
            let mut csv = String::from("row,task,num,den,value\n");
            for (i, (label, task, expect)) in classical::appendix_tasks().iter().enumerate() {
                let best = classical::enumerate_optimal(task, cap)?;
                if best.score != *expect {
                    return Err(CmdError::Lib(Error::VerificationMismatch(format!(
                        "task `{label}` optimum {} differs from expected {expect}",
                        best.score
                    ))));
                }
                rows.push(json!({
                    "row": i + 1,
                    "task": label,
                    "optimum": rational_json(&best.score),
                }));
                csv.push_str(&format!(
                    "{},\"{label}\",{},{},{}\n",
                    i + 1,
                    best.score.numer(),
                    best.score.denom(),
                    fmt12(best.score.to_f64())
                ));
            }
            Ok(Output {
                json: bundle(
                    "classical",
                    json!({"mode": "appendix"}),
                    json!({"mode": "appendix", "tasks": rows}),
                ),
                csv,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// qrac
// ---------------------------------------------------------------------------

fn cmd_qrac(which: QracConstruction, emit_remap: bool, emit_encoding: bool) -> CmdResult {
    let construction = match which {
        QracConstruction::Tetrakis => qrac::tetrakis_construction()?,
        QracConstruction::Pentakis => qrac::pentakis_construction()?,
    };
    let cap = 1u128 << 21;
    let report = qrac::construction_report(&construction, cap)?;

    let mut body = json!({
        "construction": report.name.as_str(),
        "n": report.n,
        "k": report.k,
        "quantum_value": report.quantum_value,
        "classical": rational_json(&report.classical_value),
        "classical_forward": rational_json(&report.classical_forward),
        "standard_classical": rational_json(&report.standard_classical),
        "gap_multiparty": report.gap_multiparty(),
        "gap_standard": report.gap_standard(),
        "composite_set_size": report.composite_set_size,
        "su2_group_order": report.su2_group_order,
    });
    if emit_remap {
        body["remap"] = serde_json::to_value(&construction.remap).expect("serializable");
    }
    if emit_encoding {
        body["encoding"] = qrac::encoding_json(&construction);
    }

    let mut csv = String::from(
        "construction,n,k,quantum_value,classical_num,classical_den,classical_value,\
         forward_num,forward_den,standard_num,standard_den,gap_multiparty,gap_standard,\
         composite_set_size,su2_group_order\n",
    );
    csv.push_str(&format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        report.name.as_str(),
        report.n,
        report.k,
        fmt12(report.quantum_value),
        report.classical_value.numer(),
        report.classical_value.denom(),
        fmt12(report.classical_value.to_f64()),
        report.classical_forward.numer(),
        report.classical_forward.denom(),
        report.standard_classical.numer(),
        report.standard_classical.denom(),
        fmt12(report.gap_multiparty()),
        fmt12(report.gap_standard()),
        report.composite_set_size,
        report.su2_group_order,
    ));
    if emit_remap {
        csv.push_str("\nfrom,to\n");
        let rows = serde_json::to_value(&construction.remap).expect("serializable");
        for row in rows.as_array().expect("array") {
            csv.push_str(&format!(
                "{},{}\n",
                row["from"].as_str().expect("string"),
                row["to"].as_str().expect("string")
            ));
        }
    }

    let params = json!({
        "construction": report.name.as_str(),
        "emit_remap": emit_remap,
        "emit_encoding": emit_encoding,
    });
    Ok(Output {
        json: bundle("qrac", params, body),
        csv,
    })
}

// ---------------------------------------------------------------------------
// diff
// ---------------------------------------------------------------------------

fn cmd_diff(max_n: u8) -> CmdResult {
    if !(3..=64).contains(&max_n) {
        return Err(CmdError::Usage(format!(
            "diff needs 3 <= max-n <= 64, got {max_n}"
        )));
    }
    let mut rows = Vec::new();
    let mut csv = String::from("n,p_q_ghz,p_c,diff,extrapolated\n");
    let mut argmax = (3u8, f64::MIN);
    for n in 3..=max_n {
        let p_q = earac::closed_form_ghz_curve(n);
        let p_c = classical::zigzag_formula(n).to_f64();
        let diff = p_q - p_c;
        let extrapolated = n % 2 == 0;
        if diff > argmax.1 {
            argmax = (n, diff);
        }
        rows.push(json!({
            "n": n,
            "p_q_ghz": p_q,
            "p_c": p_c,
            "diff": diff,
            "extrapolated": extrapolated,
        }));
        csv.push_str(&format!(
            "{n},{},{},{},{extrapolated}\n",
            fmt12(p_q),
            fmt12(p_c),
            fmt12(diff)
        ));
    }
    let body = json!({
        "rows": rows,
        "argmax": { "n": argmax.0, "diff": argmax.1 },
    });
    eprintln!("max diff {} at n = {}", fmt12(argmax.1), argmax.0);
    Ok(Output {
        json: bundle("diff", json!({"max_n": max_n}), body),
        csv,
    })
}

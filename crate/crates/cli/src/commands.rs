//! Command implementations. Each returns the report as a JSON value and
//! leaves file handling and exit codes to the binary.

use bisimlab::engine::{
    run_to_stable, trace_costs, verify_trace, BoundCheck, CostReport, Strategy,
};
use bisimlab::families::Family;
use bisimlab::oracle::min_irc_bruteforce;
use bisimlab::oracle_es::{oracle_costs, run_with_oracle};
use bisimlab::parallel::{pirc_run, round_bound_checks};
use bisimlab::roberts::roberts_partition;
use bisimlab::{Lts, Partition, RefinementTrace};
use serde_json::{json, Value};
use thiserror::Error;

pub const MAX_BRUTE_ENV: &str = "BISIMLAB_MAX_BRUTE";

/// Partition lists are left out of parallel reports beyond this many
/// numbers.
const MAX_LISTED_IDS: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or input files.
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl From<bisimlab::Error> for CliError {
    fn from(e: bisimlab::Error) -> CliError {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyName {
    Bisplitter,
    Layered,
    Seqsplit,
    Fanin,
    RobertsExample,
}

pub fn gen(family: FamilyName, k: Option<usize>, n: Option<usize>) -> Result<Lts, CliError> {
    let need = |value: Option<usize>, flag: &str, name: &str| {
        value.ok_or_else(|| CliError::Input(format!("{name} requires --{flag}")))
    };
    let family = match family {
        FamilyName::Bisplitter => Family::Bisplitter {
            k: need(k, "k", "bisplitter")?,
        },
        FamilyName::Layered => Family::Layered {
            k: need(k, "k", "layered")?,
        },
        FamilyName::Seqsplit => Family::SequentialSplitter {
            n: need(n, "n", "seqsplit")?,
        },
        FamilyName::Fanin => Family::FanIn {
            k: need(k, "k", "fanin")?,
        },
        FamilyName::RobertsExample => Family::RobertsExample,
    };
    Ok(family.generate()?)
}

fn family_json(family: Option<Family>) -> Value {
    match family {
        None => Value::Null,
        Some(f) => {
            let mut obj = json!({ "name": f.name() });
            if let Some((key, value)) = f.parameter() {
                obj[key] = json!(value);
            }
            obj
        }
    }
}

fn checks_json(checks: &[BoundCheck]) -> Value {
    checks
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "relation": c.relation.symbol(),
                "theoretical": c.theoretical,
                "measured": c.measured,
                "pass": c.pass,
            })
        })
        .collect()
}

/// Report plus whether every check passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub ok: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub strategy: Strategy,
    pub oracle: bool,
    /// State bound for the exhaustive minimum, when requested.
    pub brute: Option<usize>,
}

pub struct RunOutput {
    pub outcome: Outcome,
    pub trace: RefinementTrace,
}

pub fn run(lts: &Lts, options: RunOptions) -> Result<RunOutput, CliError> {
    let min_irc = options
        .brute
        .map(|bound| min_irc_bruteforce(lts, bound))
        .transpose()?;
    let (trace, costs, oracle_blocks): (RefinementTrace, CostReport, Option<usize>) =
        if options.oracle {
            let run = run_with_oracle(lts, options.strategy);
            let costs = oracle_costs(&run);
            (run.trace, costs, Some(run.updated_partition.block_count()))
        } else {
            let trace = run_to_stable(lts, options.strategy);
            let costs = trace_costs(lts, &trace)?;
            (trace, costs, None)
        };
    let verification = verify_trace(lts, &trace);
    let ok = verification.is_ok() && costs.bound_checks.iter().all(|c| c.pass);
    let mut report = json!({
        "command": "run",
        "family": family_json(Family::identify(lts)),
        "strategy": options.strategy.name(),
        "oracle": if options.oracle { "es" } else { "none" },
        "n": costs.n,
        "m": costs.m,
        "steps": costs.steps,
        "rounds": costs.steps,
        "partition_count": trace.partition_count(),
        "total_irc": costs.total_irc,
        "final_blocks": costs.final_blocks,
        "step_costs": costs.step_costs,
        "bound_checks": checks_json(&costs.bound_checks),
        "verified": verification.is_ok(),
        "failure": verification.err().map(|f| f.to_string()),
        "final_partition": trace.last().canonical_assignment(),
    });
    if let Some(blocks) = oracle_blocks {
        report["oracle_blocks"] = json!(blocks);
    }
    if let Some(min) = min_irc {
        report["min_irc"] = json!(min);
    }
    Ok(RunOutput {
        outcome: Outcome { report, ok },
        trace,
    })
}

/// Per-step rows `step,splitter_block,cost`, steps counted from 1.
pub fn steps_csv(trace: &RefinementTrace) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["step", "splitter_block", "cost"])
        .map_err(|e| CliError::Input(e.to_string()))?;
    for (i, (cost, splitter)) in trace.step_costs().iter().zip(trace.splitters()).enumerate() {
        let block = splitter.map(|s| s.block.to_string()).unwrap_or_default();
        writer
            .write_record([(i + 1).to_string(), block, cost.to_string()])
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Input(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

fn default_symbols(lts: &Lts) -> Vec<String> {
    if Family::identify(lts) == Some(Family::RobertsExample) {
        return vec!["A".into(), "N".into()];
    }
    (0..lts.initial_partition().block_count())
        .map(|b| match u8::try_from(b) {
            Ok(b) if b < 26 => char::from(b'A' + b).to_string(),
            _ => format!("[{b}]"),
        })
        .collect()
}

pub fn roberts(lts: &Lts, symbols: Option<&str>) -> Result<Value, CliError> {
    let blocks = lts.initial_partition().block_count();
    let symbols: Vec<String> = match symbols {
        Some(s) => {
            let chars: Vec<String> = s.chars().map(String::from).collect();
            if chars.len() < blocks {
                return Err(CliError::Input(format!(
                    "--symbols needs one character per initial block ({blocks})"
                )));
            }
            chars
        }
        None => default_symbols(lts),
    };
    let result = roberts_partition(lts)?;
    let render = |word: &[usize]| {
        word.iter()
            .map(|&b| symbols[b].as_str())
            .collect::<String>()
    };
    let canonical = result.partition.canonical_assignment();
    let states: Vec<Value> = (0..lts.state_count())
        .map(|s| {
            let key = result.key(s);
            json!({
                "state": s,
                "block": canonical[s],
                "prefix": render(&key.prefix),
                "rotation": render(&key.rotation),
                "word": render(&key.word()),
            })
        })
        .collect();
    Ok(json!({
        "command": "roberts",
        "n": lts.state_count(),
        "classes": result.partition.block_count(),
        "end_structures": result.end_structures.len(),
        "comparisons": result.comparisons,
        "symbols": symbols[..blocks].concat(),
        "partition": canonical,
        "states": states,
    }))
}

pub fn parallel(lts: &Lts) -> Outcome {
    let run = pirc_run(lts);
    let family = Family::identify(lts);
    let checks = family
        .map(|f| round_bound_checks(f, &run))
        .unwrap_or_default();
    let verification = verify_trace(lts, &run.trace);
    let ok = verification.is_ok() && checks.iter().all(|c| c.pass);
    let mut report = json!({
        "command": "parallel",
        "family": family_json(family),
        "n": lts.state_count(),
        "m": lts.transition_count(),
        "rounds": run.rounds,
        "partition_count": run.partition_count(),
        "block_counts": run.block_counts(),
        "total_irc": run.trace.total_irc(),
        "bound_checks": checks_json(&checks),
        "verified": verification.is_ok(),
        "failure": verification.err().map(|f| f.to_string()),
    });
    if run.partition_count().saturating_mul(lts.state_count()) <= MAX_LISTED_IDS {
        report["partitions"] = run
            .partitions()
            .iter()
            .map(Partition::sorted_blocks)
            .collect::<Vec<_>>()
            .into();
    }
    Outcome { report, ok }
}

/// Reads the brute-force state bound from the environment.
pub fn brute_bound() -> Result<usize, CliError> {
    match std::env::var(MAX_BRUTE_ENV) {
        Ok(value) => value.trim().parse().map_err(|_| {
            CliError::Input(format!(
                "{MAX_BRUTE_ENV} must be a natural number, found {value:?}"
            ))
        }),
        Err(_) => Ok(bisimlab::oracle::DEFAULT_BRUTE_FORCE_BOUND),
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn render(report: &Value) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("JSON values serialize");
    text.push('\n');
    text
}

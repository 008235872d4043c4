//! One function per subcommand.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use regplan_core::plan::{build_plan, plan_to_json, PlanOptions, Policy};
use regplan_core::report::{self, OutputFormat};
use regplan_core::risk::{score_suite_with, select_top, BinningPopulation, ScoreOptions};
use regplan_core::sim::{compare, generate_scenario, load_scenario_file, reference_scenario, scenario_to_json, GeneratorParams};
use regplan_core::suite::{ingest_defects, suite_to_json, TaggedDefect};
use regplan_core::tree::{classify_suite, validate_tree};
use serde_json::{json, Value};

use crate::failure::Failure;
use crate::io::{self, Sink};
use crate::{Cli, Command, SelectionArgs};

pub fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    let g = &cli.global;
    let format: OutputFormat = g.format.into();
    let sink = Sink {
        out: g.out.as_deref(),
        quiet: g.quiet,
    };
    match &cli.command {
        Command::Validate { tree, suite } => validate(tree.as_deref(), suite.as_deref(), g.lenient, format, &sink),
        Command::Classify { suite, tree, explain } => {
            let suite = io::load_suite(suite, g.lenient)?;
            let tree = io::load_tree(tree)?;
            let results = classify_suite(&tree, &suite);
            sink.emit(&report::render_classifications(&results, *explain, format))?;
            let unclassified = results.values().filter(|r| r.is_err()).count();
            if unclassified > 0 {
                return Err(Failure::domain(format!("{unclassified} test(s) could not be classified")));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Score {
            suite,
            fraction,
            exclude_zero_risk,
            probabilities,
            restrict,
            bin_over_suite,
        } => {
            let suite = io::load_suite(suite, g.lenient)?;
            let overrides = match probabilities {
                Some(path) => serde_json::from_str::<BTreeMap<String, u8>>(&io::read(path)?)
                    .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?,
                None => BTreeMap::new(),
            };
            let options = ScoreOptions {
                restrict: restrict.as_ref().map(|ids| ids.iter().cloned().collect()),
                binning: binning(*bin_over_suite),
                probability_overrides: overrides,
            };
            let rows = score_suite_with(&suite, &options)?;
            let selection = match fraction {
                Some(f) => Some(select_top(&rows, *f, *exclude_zero_risk)?),
                None => None,
            };
            sink.emit(&report::render_risk(&rows, selection.as_ref(), format))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Plan {
            suite,
            tree,
            policy,
            selection,
        } => plan(suite, tree, *policy, selection, g.lenient, format, &sink),
        Command::Simulate { scenario, policies, seed } => {
            let mut scenario = if scenario == "reference" {
                reference_scenario()
            } else {
                load_scenario_file(Path::new(scenario))?
            };
            if let Some(seed) = seed {
                scenario.params.seed = *seed;
            }
            let policies: BTreeSet<Policy> = match policies {
                Some(list) => list.iter().copied().collect(),
                None => Policy::ALL.into_iter().collect(),
            };
            let report = compare(&scenario, &policies)?;
            sink.emit(&report::render_comparison(&report, format))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Ingest { suite, version, records } => ingest(suite, version, records, g.lenient, &sink),
        Command::GenerateScenario {
            tests,
            versions,
            fault_rate,
            seed,
        } => {
            let scenario = generate_scenario(&GeneratorParams {
                n_tests: *tests,
                n_versions: *versions,
                fault_rate: *fault_rate,
                seed: *seed,
                ..GeneratorParams::default()
            })?;
            sink.emit(&scenario_to_json(&scenario))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn binning(over_suite: bool) -> BinningPopulation {
    if over_suite {
        BinningPopulation::Suite
    } else {
        BinningPopulation::Scored
    }
}

fn validate(
    tree: Option<&str>,
    suite: Option<&Path>,
    lenient: bool,
    format: OutputFormat,
    sink: &Sink,
) -> Result<ExitCode, Failure> {
    if tree.is_none() && suite.is_none() {
        return Err(Failure::invalid("validate needs --tree and/or --suite"));
    }
    let mut valid = true;
    let mut lines = Vec::new();
    let mut doc = serde_json::Map::new();

    if let Some(source) = tree {
        let t = io::load_tree_unchecked(source)?;
        let report = validate_tree(&t);
        valid &= report.is_valid();
        let violations: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        let unreachable: Vec<u8> = report.unreachable().iter().map(|q| q.get()).collect();
        lines.push(format!("tree {source}: {}", if report.is_valid() { "valid" } else { "invalid" }));
        lines.extend(violations.iter().map(|v| format!("  violation: {v}")));
        if !unreachable.is_empty() {
            let list: Vec<String> = unreachable.iter().map(u8::to_string).collect();
            lines.push(format!("  note: questions never asked: {}", list.join(", ")));
        }
        doc.insert(
            "tree".into(),
            json!({"source": source, "valid": report.is_valid(), "violations": violations, "unreachable": unreachable}),
        );
    }

    if let Some(path) = suite {
        let s = io::load_suite(path, lenient)?;
        let active = s.tests.iter().filter(|t| t.is_active()).count();
        let warnings: Vec<String> = s.warnings().iter().map(|w| w.to_string()).collect();
        for w in &warnings {
            sink.warn(w);
        }
        lines.push(format!(
            "suite {}: valid, {} tests ({active} active)",
            path.display(),
            s.tests.len()
        ));
        doc.insert(
            "suite".into(),
            json!({"source": path.display().to_string(), "valid": true, "tests": s.tests.len(), "active": active, "warnings": warnings}),
        );
    }

    let text = match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable");
            s.push('\n');
            s
        }
        _ => lines.iter().map(|l| format!("{l}\n")).collect(),
    };
    sink.emit(&text)?;
    Ok(if valid { ExitCode::SUCCESS } else { ExitCode::from(crate::failure::INVALID) })
}

fn plan(
    suite: &Path,
    tree: &str,
    policy: Policy,
    args: &SelectionArgs,
    lenient: bool,
    format: OutputFormat,
    sink: &Sink,
) -> Result<ExitCode, Failure> {
    let suite = io::load_suite(suite, lenient)?;
    let tree = if policy.uses_tree() { Some(io::load_tree(tree)?) } else { None };
    let options = PlanOptions {
        fraction: args.fraction,
        fraction_basis: args.fraction_basis,
        exclude_zero_risk: args.exclude_zero_risk,
        binning: binning(args.bin_over_suite),
    };
    let plan = build_plan(policy, &suite, tree.as_ref(), &options)?;
    match sink.out {
        // the plan file is always the JSON document; the summary follows --format
        Some(path) => {
            io::write_atomic(path, &plan_to_json(&plan))?;
            sink.print(&report::render_plan_summary(&plan, format));
        }
        None => sink.print(&report::render_plan(&plan, format)),
    }
    Ok(ExitCode::SUCCESS)
}

fn ingest(suite_path: &Path, version: &str, records: &Path, lenient: bool, sink: &Sink) -> Result<ExitCode, Failure> {
    let out: PathBuf = sink
        .out
        .ok_or_else(|| Failure::invalid("ingest writes a new suite document and needs --out"))?
        .to_path_buf();
    if let (Ok(a), Ok(b)) = (suite_path.canonicalize(), out.canonicalize()) {
        if a == b {
            return Err(Failure::invalid("--out must differ from --suite; input files are never modified"));
        }
    }
    let suite = io::load_suite(suite_path, lenient)?;
    let parsed = parse_records(&io::read(records)?, lenient)
        .map_err(|m| Failure::invalid(format!("{}: {m}", records.display())))?;
    let updated = ingest_defects(&suite, version, &parsed)?;
    let before: usize = suite.tests.iter().map(|t| t.defects.len()).sum();
    let after: usize = updated.tests.iter().map(|t| t.defects.len()).sum();
    io::write_atomic(&out, &suite_to_json(&updated))?;
    sink.print(&format!(
        "ingested {} new defect record(s) for version {version} into {}\n",
        after - before,
        out.display()
    ));
    Ok(ExitCode::SUCCESS)
}

fn parse_records(text: &str, lenient: bool) -> Result<Vec<TaggedDefect>, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let items = value.as_array().ok_or("expected a JSON list of records")?;
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let obj = item.as_object().ok_or(format!("records[{i}]: expected an object"))?;
            if !lenient {
                if let Some(k) = obj.keys().find(|k| !matches!(k.as_str(), "test" | "id" | "severity")) {
                    return Err(format!("records[{i}].{k}: unknown key"));
                }
            }
            let text_field = |key: &str| {
                obj.get(key)
                    .and_then(Value::as_str)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .ok_or(format!("records[{i}].{key}: expected a non-empty string"))
            };
            Ok(TaggedDefect {
                test_id: text_field("test")?,
                defect_id: text_field("id")?,
                severity: obj
                    .get("severity")
                    .and_then(Value::as_i64)
                    .ok_or(format!("records[{i}].severity: expected an integer"))?,
            })
        })
        .collect()
}

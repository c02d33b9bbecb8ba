//! Implementations of the CLI subcommands.

use crate::report::{csv_opt, Report};
use crate::space::parse_space;
use crate::{Cli, Cmd, Metric, SampleMode, SweepMode};
use anyhow::{bail, Context, Result};
use precis_core::costmodel::{default_tables, load_cost_table, CostTables};
use precis_core::inference::{accumulation_trace, evaluate_accuracy, Dataset, NetworkDef};
use precis_core::model_io::{load_dataset, load_network};
use precis_core::numeric::NumericFormat;
use precis_core::search::{
    enumerate_design_space, fast_search_space, fit_accuracy_model, measure_design_space,
    sample_indices, score_design_space, AccuracyModel, SampleSelection,
};
use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// CSV header shared by sweep output and fit-model input.
pub const SWEEP_HEADER: &str = "format,mode,accuracy,normalized_accuracy,r2,speedup,energy_savings";
/// CSV header of trace output.
pub const TRACE_HEADER: &str = "step,running_sum,exact_running_sum";

pub fn run(cli: Cli) -> Result<ExitCode> {
    let tables = load_tables(cli.cost_table.as_deref())?;
    let cost_echo = cost_table_echo(cli.cost_table.as_deref());
    let json_mode = cli.json;
    match cli.command {
        Cmd::Eval {
            net,
            data,
            format,
            metric,
            limit,
        } => cmd_eval(&net, &data, &format, metric, limit, &tables, cost_echo, json_mode),
        Cmd::Sweep {
            net,
            data,
            space,
            mode,
            samples,
            model,
            metric,
            limit,
            out,
        } => cmd_sweep(
            &net, &data, &space, mode, samples, model.as_deref(), metric, limit, &out, &tables,
            cost_echo, json_mode,
        ),
        Cmd::Search {
            net,
            data,
            space,
            samples,
            target,
            refine,
            model,
            fit_from,
            metric,
            limit,
            sample_mode,
            seed,
        } => cmd_search(
            &net,
            &data,
            &space,
            samples,
            target,
            refine,
            model.as_deref(),
            &fit_from,
            metric,
            limit,
            sample_mode,
            seed,
            &tables,
            cost_echo,
            json_mode,
        ),
        Cmd::Trace {
            net,
            data,
            data_index,
            layer,
            neuron,
            format,
            out,
        } => cmd_trace(&net, &data, data_index, layer, neuron, &format, &out, json_mode),
        Cmd::FitModel { sweeps, out } => cmd_fit_model(&sweeps, &out, json_mode),
    }
}

fn load_tables(path: Option<&Path>) -> Result<CostTables> {
    let mut tables = default_tables();
    if let Some(path) = path {
        let table = load_cost_table(path)
            .with_context(|| format!("loading cost table {}", path.display()))?;
        tables.replace(table);
    }
    Ok(tables)
}

fn load_inputs(net: &Path, data: &str, limit: Option<usize>) -> Result<(NetworkDef, Dataset)> {
    let network = load_network(net).with_context(|| format!("loading network {}", net.display()))?;
    let mut dataset = load_dataset(data).with_context(|| format!("loading dataset {data}"))?;
    if let Some(limit) = limit {
        dataset = dataset.truncated(limit);
    }
    if dataset.is_empty() {
        bail!("dataset {data} has no inputs");
    }
    Ok((network, dataset))
}

fn parse_format(literal: &str) -> Result<NumericFormat> {
    literal
        .parse()
        .with_context(|| format!("parsing format literal {literal:?}"))
}

fn cost_table_echo(path: Option<&Path>) -> Value {
    match path {
        Some(p) => Value::String(p.display().to_string()),
        None => Value::String("default".into()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    net: &Path,
    data: &str,
    format: &str,
    metric: Metric,
    limit: Option<usize>,
    tables: &CostTables,
    cost_echo: Value,
    json: bool,
) -> Result<ExitCode> {
    let fmt = parse_format(format)?;
    let (network, dataset) = load_inputs(net, data, limit)?;
    let config = json!({
        "net": net.display().to_string(),
        "data": data,
        "format": fmt.to_string(),
        "metric": metric.name(),
        "limit": limit,
        "inputs": dataset.len(),
        "cost_table": cost_echo,
    });
    let mut report = Report::new("eval", config);

    let baseline = evaluate_accuracy(&network, NumericFormat::Baseline, &dataset, metric.k())?;
    let accuracy = if fmt == NumericFormat::Baseline {
        baseline
    } else {
        evaluate_accuracy(&network, fmt, &dataset, metric.k())?
    };
    report.push_row(json!({
        "format": fmt.to_string(),
        "metric": metric.name(),
        "accuracy": accuracy,
        "baseline_accuracy": baseline,
        "normalized_accuracy": accuracy / baseline,
        "speedup": tables.speedup(&fmt),
        "energy_savings": tables.energy_savings(&fmt),
    }));
    report.emit(json);
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn sweep_rows(
    network: &NetworkDef,
    dataset: &Dataset,
    space_literal: &str,
    mode: SweepMode,
    samples: usize,
    model: Option<&Path>,
    metric: Metric,
    tables: &CostTables,
) -> Result<Vec<Value>> {
    let cfg = parse_space(space_literal)?;
    let space = enumerate_design_space(&cfg)?;
    let sample_inputs =
        precis_core::search::select_samples(dataset, SampleSelection::FirstN(samples));
    let mut rows = Vec::with_capacity(space.len() + 1);
    match mode {
        SweepMode::Measured => {
            let baseline =
                evaluate_accuracy(network, NumericFormat::Baseline, dataset, metric.k())?;
            rows.push(json!({
                "format": "baseline",
                "mode": "measured",
                "accuracy": baseline,
                "normalized_accuracy": 1.0,
                "r2": 1.0,
                "speedup": 1.0,
                "energy_savings": 1.0,
            }));
            let measured = measure_design_space(
                network,
                &sample_inputs,
                dataset,
                &space,
                tables,
                metric.k(),
            )?;
            for m in measured {
                rows.push(json!({
                    "format": m.format.to_string(),
                    "mode": "measured",
                    "accuracy": m.accuracy,
                    "normalized_accuracy": m.normalized_accuracy,
                    "r2": m.r2,
                    "speedup": m.speedup,
                    "energy_savings": m.energy_savings,
                }));
            }
        }
        SweepMode::Predicted => {
            let model_path =
                model.ok_or_else(|| anyhow::anyhow!("--mode predicted requires --model"))?;
            let model = read_model(model_path)?;
            rows.push(json!({
                "format": "baseline",
                "mode": "predicted",
                "accuracy": Value::Null,
                "normalized_accuracy": 1.0,
                "r2": 1.0,
                "speedup": 1.0,
                "energy_savings": 1.0,
            }));
            let scored = score_design_space(network, &sample_inputs, &model, &space, tables)?;
            for s in scored {
                rows.push(json!({
                    "format": s.format.to_string(),
                    "mode": "predicted",
                    "accuracy": Value::Null,
                    "normalized_accuracy": s.predicted_norm_accuracy,
                    "r2": s.r2,
                    "speedup": s.speedup,
                    "energy_savings": s.energy_savings,
                }));
            }
        }
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    net: &Path,
    data: &str,
    space_literal: &str,
    mode: SweepMode,
    samples: usize,
    model: Option<&Path>,
    metric: Metric,
    limit: Option<usize>,
    out: &Path,
    tables: &CostTables,
    cost_echo: Value,
    json: bool,
) -> Result<ExitCode> {
    let (network, dataset) = load_inputs(net, data, limit)?;
    let config = json!({
        "net": net.display().to_string(),
        "data": data,
        "space": space_literal,
        "cost_table": cost_echo,
        "mode": match mode { SweepMode::Measured => "measured", SweepMode::Predicted => "predicted" },
        "samples": samples,
        "sample_indices": sample_indices(dataset.len(), SampleSelection::FirstN(samples)),
        "model": model.map(|p| p.display().to_string()),
        "metric": metric.name(),
        "limit": limit,
        "inputs": dataset.len(),
        "out": out.display().to_string(),
    });
    let mut report = Report::new("sweep", config);
    let rows = sweep_rows(
        &network,
        &dataset,
        space_literal,
        mode,
        samples,
        model,
        metric,
        tables,
    )?;
    write_sweep_file(out, &rows)?;
    for row in rows {
        report.push_row(row);
    }
    report.emit(json);
    Ok(ExitCode::SUCCESS)
}

fn write_sweep_file(out: &Path, rows: &[Value]) -> Result<()> {
    let is_json = out.extension().is_some_and(|e| e == "json");
    let text = if is_json {
        serde_json::to_string_pretty(rows)?
    } else {
        let mut lines = vec![SWEEP_HEADER.to_string()];
        for row in rows {
            lines.push(format!(
                "{},{},{},{},{},{},{}",
                row["format"].as_str().unwrap(),
                row["mode"].as_str().unwrap(),
                csv_opt(row["accuracy"].as_f64()),
                row["normalized_accuracy"].as_f64().unwrap(),
                row["r2"].as_f64().unwrap(),
                row["speedup"].as_f64().unwrap(),
                row["energy_savings"].as_f64().unwrap(),
            ));
        }
        lines.join("\n") + "\n"
    };
    fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn read_model(path: &Path) -> Result<AccuracyModel> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading model {}", path.display()))?;
    let model: AccuracyModel =
        serde_json::from_str(&text).with_context(|| format!("parsing model {}", path.display()))?;
    Ok(model)
}

/// Extracts (r2, normalized_accuracy) pairs from measured sweep CSV/JSON
/// files written by `sweep`.
fn read_sweep_pairs(paths: &[PathBuf]) -> Result<Vec<(f64, f64)>> {
    let mut pairs = Vec::new();
    for path in paths {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading sweep {}", path.display()))?;
        if path.extension().is_some_and(|e| e == "json") {
            let rows: Vec<Value> = serde_json::from_str(&text)
                .with_context(|| format!("parsing sweep {}", path.display()))?;
            for row in rows {
                if row["mode"].as_str() == Some("measured") {
                    if let (Some(r2), Some(norm)) =
                        (row["r2"].as_f64(), row["normalized_accuracy"].as_f64())
                    {
                        pairs.push((r2, norm));
                    }
                }
            }
        } else {
            let mut lines = text.lines();
            let header = lines.next().unwrap_or_default();
            if header != SWEEP_HEADER {
                bail!(
                    "{} does not look like a sweep file (header {header:?})",
                    path.display()
                );
            }
            for line in lines {
                if line.trim().is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != 7 {
                    bail!("{}: malformed row {line:?}", path.display());
                }
                if fields[1] != "measured" {
                    continue;
                }
                let norm: f64 = fields[3]
                    .parse()
                    .with_context(|| format!("normalized_accuracy in {line:?}"))?;
                let r2: f64 = fields[4].parse().with_context(|| format!("r2 in {line:?}"))?;
                pairs.push((r2, norm));
            }
        }
    }
    if pairs.is_empty() {
        bail!("no measured rows found in the sweep file(s)");
    }
    Ok(pairs)
}

fn point_row(point: &precis_core::search::DesignPoint) -> Value {
    json!({
        "format": point.format.to_string(),
        "r2": point.r2,
        "predicted_norm_accuracy": point.predicted_norm_accuracy,
        "measured_norm_accuracy": point.measured_norm_accuracy,
        "speedup": point.speedup,
        "energy_savings": point.energy_savings,
        "evaluated": point.evaluated,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    net: &Path,
    data: &str,
    space_literal: &str,
    samples: usize,
    target: f64,
    refine: usize,
    model_path: Option<&Path>,
    fit_from: &[PathBuf],
    metric: Metric,
    limit: Option<usize>,
    sample_mode: SampleMode,
    seed: u64,
    tables: &CostTables,
    cost_echo: Value,
    json: bool,
) -> Result<ExitCode> {
    if !(0.0..=1.0).contains(&target) || target == 0.0 {
        bail!("--target must be in (0, 1], got {target}");
    }
    let model = match (model_path, fit_from.is_empty()) {
        (Some(path), _) => read_model(path)?,
        (None, false) => fit_accuracy_model(&read_sweep_pairs(fit_from)?)?,
        (None, true) => bail!("search needs --model FILE or --fit-from SWEEP..."),
    };
    let (network, dataset) = load_inputs(net, data, limit)?;
    let selection = match sample_mode {
        SampleMode::First => SampleSelection::FirstN(samples),
        SampleMode::Random => SampleSelection::Random {
            count: samples,
            seed,
        },
    };
    let indices = sample_indices(dataset.len(), selection);
    let cfg = parse_space(space_literal)?;
    let space = enumerate_design_space(&cfg)?;

    let config = json!({
        "net": net.display().to_string(),
        "data": data,
        "space": space_literal,
        "space_size": space.len(),
        "cost_table": cost_echo,
        "samples": samples,
        "sample_mode": match sample_mode { SampleMode::First => "first", SampleMode::Random => "random" },
        "seed": seed,
        "sample_indices": indices,
        "target": target,
        "refine": refine,
        "model": json!({
            "slope": model.slope,
            "intercept": model.intercept,
            "fit_correlation": model.fit_correlation,
        }),
        "metric": metric.name(),
        "limit": limit,
        "inputs": dataset.len(),
    });
    let mut report = Report::new("search", config);

    let sample_inputs = precis_core::search::select_samples(&dataset, selection);
    let outcome = fast_search_space(
        &network,
        &sample_inputs,
        &dataset,
        &model,
        &space,
        tables,
        target,
        refine,
        metric.k(),
    )?;

    let mut chosen = point_row(&outcome.point);
    chosen["fallback"] = Value::Bool(outcome.fallback);
    chosen["validation_passes"] = Value::from(outcome.validation_passes);
    chosen["sample_passes"] = Value::from(outcome.sample_passes);
    report.push_row(chosen);
    report.push_row(json!({
        "format": "baseline",
        "r2": 1.0,
        "predicted_norm_accuracy": Value::Null,
        "measured_norm_accuracy": 1.0,
        "speedup": 1.0,
        "energy_savings": 1.0,
        "evaluated": true,
    }));
    report.emit(json);
    if outcome.fallback {
        // Distinct exit code so scripts can tell fallback from success.
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_trace(
    net: &Path,
    data: &str,
    data_index: usize,
    layer: usize,
    neuron: usize,
    format: &str,
    out: &Path,
    json: bool,
) -> Result<ExitCode> {
    let fmt = parse_format(format)?;
    let (network, dataset) = load_inputs(net, data, None)?;
    let input = dataset
        .inputs
        .get(data_index)
        .ok_or_else(|| anyhow::anyhow!("data index {data_index} out of range for {} inputs", dataset.len()))?;
    let records = accumulation_trace(&network, input, layer, neuron, fmt)?;

    let mut lines = vec![TRACE_HEADER.to_string()];
    for r in &records {
        lines.push(format!("{},{},{}", r.step, r.running_sum, r.exact_running_sum));
    }
    fs::write(out, lines.join("\n") + "\n")
        .with_context(|| format!("writing {}", out.display()))?;

    let config = json!({
        "net": net.display().to_string(),
        "data": data,
        "data_index": data_index,
        "layer": layer,
        "neuron": neuron,
        "format": fmt.to_string(),
        "out": out.display().to_string(),
    });
    let mut report = Report::new("trace", config);
    let last = records.last().expect("nonempty trace");
    report.push_row(json!({
        "steps": records.len(),
        "final_running_sum": last.running_sum,
        "final_exact_running_sum": last.exact_running_sum,
        "out": out.display().to_string(),
        "records": records
            .iter()
            .map(|r| json!({
                "step": r.step,
                "running_sum": r.running_sum,
                "exact_running_sum": r.exact_running_sum,
            }))
            .collect::<Vec<_>>(),
    }));
    report.emit(json);
    Ok(ExitCode::SUCCESS)
}

fn cmd_fit_model(sweeps: &[PathBuf], out: &Path, json: bool) -> Result<ExitCode> {
    let pairs = read_sweep_pairs(sweeps)?;
    let model = fit_accuracy_model(&pairs)?;
    fs::write(out, serde_json::to_string_pretty(&model)? + "\n")
        .with_context(|| format!("writing {}", out.display()))?;

    let config = json!({
        "sweeps": sweeps.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "out": out.display().to_string(),
    });
    let mut report = Report::new("fit-model", config);
    report.push_row(json!({
        "pairs": pairs.len(),
        "slope": model.slope,
        "intercept": model.intercept,
        "fit_correlation": model.fit_correlation,
        "out": out.display().to_string(),
    }));
    report.emit(json);
    Ok(ExitCode::SUCCESS)
}

//! Experiment runners that write CSV series and a JSON summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use bayesproj::experiments::slam::{self, GviDemoOutput, SlamConfig, VariableReport};
use bayesproj::experiments::stereo::{self, DensityTable, IterationSeries, StereoConfig};
use bayesproj::gvi::format::serialize_graph;
use bayesproj::gvi::solver::{GviTermination, GviTrace};
use bayesproj::variational::Termination;

/// Failure while running an experiment or writing its output.
#[derive(Debug)]
pub enum RunError {
    Numerical(bayesproj::Error),
    Io(std::io::Error),
}

impl From<bayesproj::Error> for RunError {
    fn from(e: bayesproj::Error) -> Self {
        Self::Numerical(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

type RunResult = Result<Vec<PathBuf>, RunError>;

struct Csv {
    text: String,
}

impl Csv {
    fn new(headers: &[&str]) -> Self {
        Self { text: format!("{}\n", headers.join(",")) }
    }

    fn row(&mut self, cells: &[String]) {
        writeln!(self.text, "{}", cells.join(",")).expect("write to string");
    }

    fn save(&self, dir: &Path, name: &str, written: &mut Vec<PathBuf>) -> std::io::Result<()> {
        let path = dir.join(name);
        fs::write(&path, &self.text)?;
        written.push(path);
        Ok(())
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn save_json(dir: &Path, value: &Value, written: &mut Vec<PathBuf>) -> std::io::Result<()> {
    let path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(value).expect("serializable summary");
    text.push('\n');
    fs::write(&path, text)?;
    written.push(path);
    Ok(())
}

fn density_csv(table: &DensityTable) -> Csv {
    let mut headers = vec!["x"];
    headers.extend(table.columns.iter().map(|(n, _)| n.as_str()));
    let mut csv = Csv::new(&headers);
    for (i, x) in table.x.iter().enumerate() {
        let mut cells = vec![num(*x)];
        cells.extend(table.columns.iter().map(|(_, c)| num(c[i])));
        csv.row(&cells);
    }
    csv
}

fn stereo_echo(cfg: &StereoConfig) -> Value {
    json!({
        "prior_mean": cfg.prior_mean,
        "prior_var": cfg.prior_var,
        "focal": cfg.focal,
        "baseline": cfg.baseline,
        "meas_var": cfg.meas_var,
        "true_depth": cfg.true_depth,
        "seed": cfg.seed,
        "z": cfg.z,
        "nodes": cfg.nodes,
        "max_iters": cfg.max_iters,
        "tol": cfg.tol,
        "basis": cfg.basis,
        "grid_points": cfg.grid_points,
    })
}

fn termination_name(t: &Termination) -> String {
    match t {
        Termination::Converged => "converged".into(),
        Termination::MaxIterations => "max_iterations".into(),
        Termination::Failed(e) => format!("failed: {e}"),
    }
}

fn series_json(s: &IterationSeries) -> Value {
    json!({
        "order": s.order,
        "initial_kl": s.initial_kl,
        "final_kl": s.final_kl(),
        "kl": s.kl_series(),
        "plateau_iteration_1pct": s.plateau_iteration(0.01),
        "termination": termination_name(&s.termination),
    })
}

fn series_rows(csv: &mut Csv, s: &IterationSeries, with_order: bool) {
    for r in &s.rows {
        let mut cells = Vec::new();
        if with_order {
            cells.push(s.order.to_string());
        }
        cells.extend([r.iteration.to_string(), num(r.mean), num(r.var), num(r.kl), num(r.divergence), num(r.step_norm)]);
        csv.row(&cells);
    }
}

const SERIES_HEADERS: [&str; 6] = ["iteration", "mean", "var", "kl", "divergence", "step_norm"];

pub fn stereo_project(cfg: &StereoConfig, out: &Path) -> RunResult {
    let res = stereo::run_stereo_project(cfg)?;
    let mut written = Vec::new();
    density_csv(&res.densities).save(out, "densities.csv", &mut written)?;
    let mut panels = Csv::new(&["panel", "measure_mean", "measure_var", "mean", "var", "positive_definite", "kl", "divergence"]);
    for (k, p) in res.panels.iter().enumerate() {
        panels.row(&[
            (k + 1).to_string(),
            num(p.measure_mean),
            num(p.measure_var),
            num(p.mean),
            num(p.var),
            p.positive_definite.to_string(),
            num(p.kl),
            num(p.divergence),
        ]);
    }
    panels.save(out, "panels.csv", &mut written)?;
    let summary = json!({
        "experiment": "stereo-project",
        "config": stereo_echo(cfg),
        "z": res.z,
        "panels": res.panels.iter().map(|p| json!({
            "measure_mean": p.measure_mean,
            "measure_var": p.measure_var,
            "mean": p.mean,
            "var": p.var,
            "positive_definite": p.positive_definite,
            "kl": p.kl,
            "divergence": p.divergence,
        })).collect::<Vec<_>>(),
        "second_measure_closer": res.panels[1].kl < res.panels[0].kl,
    });
    save_json(out, &summary, &mut written)?;
    Ok(written)
}

pub fn stereo_iterate(cfg: &StereoConfig, out: &Path) -> RunResult {
    let res = stereo::run_stereo_iterate(cfg)?;
    let mut written = Vec::new();
    density_csv(&res.densities).save(out, "densities.csv", &mut written)?;
    let mut csv = Csv::new(&SERIES_HEADERS);
    series_rows(&mut csv, &res.series, false);
    csv.save(out, "kl_series.csv", &mut written)?;
    let summary = json!({
        "experiment": "stereo-iterate",
        "config": stereo_echo(cfg),
        "z": res.z,
        "series": series_json(&res.series),
    });
    save_json(out, &summary, &mut written)?;
    Ok(written)
}

pub fn hermite_sweep(cfg: &StereoConfig, out: &Path) -> RunResult {
    let res = stereo::run_hermite_sweep(cfg)?;
    let mut written = Vec::new();
    density_csv(&res.densities).save(out, "densities.csv", &mut written)?;
    let mut csv = Csv::new(&["order", "divergence", "kl"]);
    for r in &res.rows {
        csv.row(&[r.order.to_string(), num(r.divergence), r.kl.map(num).unwrap_or_default()]);
    }
    csv.save(out, "sweep.csv", &mut written)?;
    let div: Vec<f64> = res.rows.iter().map(|r| r.divergence).collect();
    let summary = json!({
        "experiment": "hermite-sweep",
        "config": stereo_echo(cfg),
        "z": res.z,
        "divergence": div,
        "strictly_decreasing": div.windows(2).all(|w| w[1] < w[0]),
        "last_to_first_ratio": div[div.len() - 1] / div[0],
        "gaussian_route_gap": res.gaussian_route_gap,
        "normalizable_orders": res.rows.iter().filter(|r| r.kl.is_some()).map(|r| r.order).collect::<Vec<_>>(),
    });
    save_json(out, &summary, &mut written)?;
    Ok(written)
}

pub fn hermite_iterate(cfg: &StereoConfig, out: &Path) -> RunResult {
    let orders = if cfg.basis == 2 { vec![2] } else { vec![2, cfg.basis] };
    let res = stereo::run_hermite_iterate(cfg, &orders)?;
    let mut written = Vec::new();
    let mut headers = vec!["order"];
    headers.extend(SERIES_HEADERS);
    let mut csv = Csv::new(&headers);
    for s in &res.series {
        series_rows(&mut csv, s, true);
    }
    csv.save(out, "kl_series.csv", &mut written)?;
    let summary = json!({
        "experiment": "hermite-iterate",
        "config": stereo_echo(cfg),
        "z": res.z,
        "series": res.series.iter().map(series_json).collect::<Vec<_>>(),
    });
    save_json(out, &summary, &mut written)?;
    Ok(written)
}

fn slam_echo(cfg: &SlamConfig) -> Value {
    json!({
        "poses": cfg.poses,
        "landmarks": cfg.landmarks,
        "step": cfg.step,
        "prior_var": cfg.prior_var,
        "odom_var": cfg.odom_var,
        "range_var": cfg.range_var,
        "offset": cfg.offset,
        "visibility": cfg.visibility,
        "linear": cfg.linear,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "max_iters": cfg.max_iters,
        "tol": cfg.tol,
        "nodes": cfg.nodes,
        "init_inflation": cfg.init_inflation,
    })
}

fn gvi_termination_name(t: &GviTermination) -> String {
    match t {
        GviTermination::Converged => "converged".into(),
        GviTermination::MaxIterations => "max_iterations".into(),
        GviTermination::Failed(e) => format!("failed: {e}"),
    }
}

fn trace_csv(trace: &GviTrace) -> Csv {
    let mut csv = Csv::new(&["iteration", "step_norm", "mean_norm", "info_trace"]);
    for r in &trace.records {
        let info = r.state.info.to_dense();
        csv.row(&[r.iteration.to_string(), num(r.step_norm), num(r.state.mean.norm()), num(info.trace())]);
    }
    csv
}

fn trace_json(trace: &GviTrace) -> Value {
    json!({
        "iterations": trace.iterations(),
        "converged": trace.converged(),
        "termination": gvi_termination_name(&trace.termination),
        "step_norms": trace.records.iter().map(|r| r.step_norm).collect::<Vec<_>>(),
    })
}

fn containment(report: &[VariableReport]) -> f64 {
    report.iter().filter(|r| r.within(3.0)).count() as f64 / report.len() as f64
}

pub fn gvi_demo(cfg: &SlamConfig, out: &Path) -> RunResult {
    let res: GviDemoOutput = slam::run_gvi_demo(cfg)?;
    let mut written = Vec::new();
    let graph_path = out.join("graph.txt");
    fs::write(&graph_path, serialize_graph(&res.problem.graph))?;
    written.push(graph_path);
    let mut vars = Csv::new(&[
        "index", "kind", "truth", "esgvi_mean", "esgvi_sd", "esgvi_error", "map_mean", "map_sd", "map_error",
    ]);
    for (e, m) in res.esgvi_report.iter().zip(&res.map_report) {
        vars.row(&[
            e.index.to_string(),
            if e.is_landmark { "landmark" } else { "pose" }.to_string(),
            num(e.truth),
            num(e.mean),
            num(e.sd),
            num(e.error()),
            num(m.mean),
            num(m.sd),
            num(m.error()),
        ]);
    }
    vars.save(out, "variables.csv", &mut written)?;
    trace_csv(&res.esgvi).save(out, "esgvi_trace.csv", &mut written)?;
    trace_csv(&res.map).save(out, "map_trace.csv", &mut written)?;
    let monte_carlo = res.monte_carlo.as_ref().map(|m| {
        json!({
            "trials": m.trials,
            "containment_3sd": m.containment,
            "converged_trials": m.converged_trials,
            "max_iterations": m.max_iterations,
            "mean_iterations": m.mean_iterations,
        })
    });
    let summary = json!({
        "experiment": "gvi-demo",
        "config": slam_echo(cfg),
        "esgvi": trace_json(&res.esgvi),
        "esgvi_dense_route": trace_json(&res.esgvi_dense),
        "map": trace_json(&res.map),
        "route_gap": res.route_gap,
        "containment_3sd_trial0": {
            "esgvi": containment(&res.esgvi_report),
            "map": containment(&res.map_report),
        },
        "monte_carlo": monte_carlo,
    });
    save_json(out, &summary, &mut written)?;
    Ok(written)
}

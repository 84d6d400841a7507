//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 physics-validity failure (regime
//! check, leakage, integration failure), 3 inconclusive (orbit cap reached).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dispersive_core::gates::{bitstring, Model};
use dispersive_core::graphs::{recipe, recipe_names, run_plan, FusionPlan, LcOutcome, DEFAULT_ORBIT_CAP};
use dispersive_core::model::{regime_check, RegimeReport, DEFAULT_REGIME_THRESHOLD};
use serde_json::{json, Value};

use crate::budget::{budget, BudgetReport, CavityBudget};
use crate::config::Config;
use crate::engine::Engine;
use crate::error::{LabError, LabResult};
use crate::experiments::{parse_range, run_cz, run_sweep, CzRun, Metric, SweepParam, SweepReport};
use crate::preset::{Preset, PresetName};
use crate::report::{cell, envelope, matrix_json, num, opt_cell, to_json_text, OutDir, Table};

#[derive(Debug, Parser)]
#[command(
    name = "dispersive-lab",
    version,
    about = "Dispersive cavity/ion phase gates and graph-state fusion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dispersive-regime ratios of a parameter set.
    Regime(RegimeArgs),
    /// Controlled-Z gate from a simulated evolution.
    Cz(CzArgs),
    /// Effective lifetimes and gate headroom.
    Budget(BudgetArgs),
    /// Runs a graph-state fusion plan and checks LC equivalence to its target.
    Fuse(FuseArgs),
    /// One metric over a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Tsv,
    Dot,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Parameter preset: squid, ion or custom (with --config).
    #[arg(long, default_value = "squid")]
    pub preset: String,
    /// Key-value config file for the custom preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for report.json and companion files.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Standard output format.
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Hamiltonian: full, eff_cavity or eff_diag.
    #[arg(long, default_value = "full")]
    pub model: String,
    /// Number of atoms (uniform presets only).
    #[arg(long)]
    pub n_atoms: Option<usize>,
    /// Fock truncation.
    #[arg(long, default_value_t = 4)]
    pub n_max: usize,
    /// rk4 or spectral (full model).
    #[arg(long, default_value = "rk4")]
    pub engine: String,
}

#[derive(Debug, Args)]
pub struct RegimeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Smallest acceptable ratio.
    #[arg(long, default_value_t = DEFAULT_REGIME_THRESHOLD)]
    pub min_ratio: f64,
}

#[derive(Debug, Args)]
pub struct CzArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Evolution time in units of 1/g (default π/λ').
    #[arg(long)]
    pub t: Option<f64>,
    /// Uniform sample points for the time series.
    #[arg(long, default_value_t = 16)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 4)]
    pub n_max: usize,
    #[arg(long, default_value = "rk4")]
    pub engine: String,
    /// Uniform sample points used for the population maxima.
    #[arg(long, default_value_t = 128)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Named recipe (see --list).
    #[arg(long, conflicts_with = "plan")]
    pub recipe: Option<String>,
    /// Config file with a [plan] section.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Lists the recipe names.
    #[arg(long)]
    pub list: bool,
    /// Largest number of graphs visited by the LC search.
    #[arg(long, default_value_t = DEFAULT_ORBIT_CAP)]
    pub orbit_cap: usize,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub sim: SimArgs,
    /// delta-scale, omega, n-max or t.
    #[arg(long)]
    pub param: Option<String>,
    /// Grid as start:stop:count; `gate` stands for π/λ'.
    #[arg(long, conflicts_with = "values", allow_hyphen_values = true)]
    pub range: Option<String>,
    /// Grid as a comma-separated list.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Option<Vec<f64>>,
    /// fidelity, leakage, phase-deviation or phase.
    #[arg(long)]
    pub metric: Option<String>,
}

/// What a command produced, written out by [`run`].
#[derive(Debug)]
pub struct Output {
    pub json: Value,
    pub text: String,
    pub tsv: Option<String>,
    pub dot: Option<String>,
    /// Extra files for `--out-dir`.
    pub files: Vec<(String, String)>,
    /// Failure to report after the output has been written.
    pub verdict: Option<LabError>,
}

impl Output {
    fn new(command: &str, body: Value, text: String) -> Self {
        Self {
            json: envelope(command, body),
            text,
            tsv: None,
            dot: None,
            files: Vec::new(),
            verdict: None,
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Reports go to `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(None) => 0,
        Ok(Some(verdict)) | Err(verdict) => {
            let _ = writeln!(stderr, "error: {verdict}");
            verdict.exit_code()
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> LabResult<Option<LabError>> {
    let (output, format, out_dir) = match &cli.command {
        Command::Regime(a) => (cmd_regime(a)?, a.common.format, &a.common.out_dir),
        Command::Cz(a) => (cmd_cz(a)?, a.common.format, &a.common.out_dir),
        Command::Budget(a) => (cmd_budget(a)?, a.common.format, &a.common.out_dir),
        Command::Fuse(a) => (cmd_fuse(a)?, a.format, &a.out_dir),
        Command::Sweep(a) => (cmd_sweep(a)?, a.common.format, &a.common.out_dir),
    };
    let body = match format {
        Format::Text => output.text.clone(),
        Format::Json => to_json_text(&output.json),
        Format::Tsv => output
            .tsv
            .clone()
            .ok_or_else(|| LabError::Usage("this command has no tsv output".into()))?,
        Format::Dot => output
            .dot
            .clone()
            .ok_or_else(|| LabError::Usage("this command has no dot output".into()))?,
    };
    if let Some(dir) = out_dir {
        let out = OutDir::create(dir)?;
        out.write("report.json", &to_json_text(&output.json))?;
        for (name, contents) in &output.files {
            out.write(name, contents)?;
        }
    }
    stdout.write_all(body.as_bytes())?;
    Ok(output.verdict)
}

fn load_preset(common: &Common, n_atoms: Option<usize>) -> LabResult<Preset> {
    let name: PresetName = common.preset.parse()?;
    let config = common.config.as_deref().map(Config::load).transpose()?;
    let preset = Preset::load(name, config.as_ref())?;
    match n_atoms {
        Some(n) if n != preset.params.n_atoms() => preset.with_atoms(n),
        _ => Ok(preset),
    }
}

fn parse_model(s: &str) -> LabResult<Model> {
    s.parse()
        .map_err(|_| LabError::Usage(format!("unknown model '{s}' (expected full, eff_cavity or eff_diag)")))
}

pub fn regime_json(r: &RegimeReport) -> Value {
    json!({
        "threshold": num(r.threshold),
        "pass": r.pass,
        "ratios": r.ratios.iter().map(|x| json!({
            "name": x.name,
            "value": num(x.value),
            "pass": x.value >= r.threshold,
        })).collect::<Vec<_>>(),
    })
}

fn regime_table(r: &RegimeReport) -> Table {
    let mut t = Table::new(["ratio", "value", "status"]);
    for x in &r.ratios {
        let status = if x.value >= r.threshold { "pass" } else { "FAIL" };
        t.push(vec![x.name.into(), cell(x.value), status.into()]);
    }
    t
}

fn cmd_regime(a: &RegimeArgs) -> LabResult<Output> {
    if !(a.min_ratio.is_finite() && a.min_ratio > 0.0) {
        return Err(LabError::Usage("--min-ratio must be positive".into()));
    }
    let preset = load_preset(&a.common, None)?;
    let r = regime_check(&preset.params, a.min_ratio);
    let mut text = format!("preset {}  threshold {}\n", preset.name, cell(r.threshold));
    for x in &r.ratios {
        let mark = if x.value >= r.threshold { "pass" } else { "FAIL  <--" };
        text.push_str(&format!("  {:<26} {:>14}  {mark}\n", x.name, cell(x.value)));
    }
    text.push_str(if r.pass { "regime: pass\n" } else { "regime: FAIL\n" });
    let body = json!({ "preset": preset.name.as_str(), "regime": regime_json(&r) });
    let mut out = Output::new("regime", body, text);
    let table = regime_table(&r).to_tsv();
    out.files.push(("regime.tsv".into(), table.clone()));
    out.tsv = Some(table);
    if !r.pass {
        let failing: Vec<&str> = r.failing().map(|x| x.name).collect();
        out.verdict = Some(LabError::Physics(format!(
            "dispersive regime check failed at threshold {}: {}",
            r.threshold,
            failing.join(", ")
        )));
    }
    Ok(out)
}

fn cz_timeseries(run: &CzRun, preset: &Preset) -> LabResult<Table> {
    let sim = &run.sim;
    let n = sim.n_qubits;
    let mut header = vec!["t".to_string(), "t_seconds".into(), "phi".into()];
    for c in &sim.columns {
        let b = bitstring(c.bits, n);
        for q in ["phase", "survival", "leakage", "excited", "photons"] {
            header.push(format!("{q}_{b}"));
        }
    }
    let mut table = Table::new(header);
    let phi = sim.phi_series()?;
    for (i, t) in sim.sample_times().into_iter().enumerate() {
        let mut row = vec![cell(t), cell(preset.to_seconds(t)), opt_cell(phi[i])];
        for c in &sim.columns {
            let s = &c.samples[i];
            row.extend([
                cell(s.survival.arg()),
                cell(s.survival.norm()),
                cell(s.leakage),
                cell(s.excited),
                cell(s.photons),
            ]);
        }
        table.push(row);
    }
    Ok(table)
}

fn cmd_cz(a: &CzArgs) -> LabResult<Output> {
    let preset = load_preset(&a.common, a.sim.n_atoms)?;
    let model = parse_model(&a.sim.model)?;
    let engine: Engine = a.sim.engine.parse()?;
    let run = run_cz(&preset, model, engine, a.sim.n_max, a.t, a.samples)?;
    let g = &run.gate;
    let n = run.sim.n_qubits;
    let phases = &g.phases;
    let basis: Vec<Value> = (0..1usize << n)
        .map(|b| {
            json!({
                "bits": bitstring(b, n),
                "phase": num(phases.phases[b]),
                "survival": num(phases.survival[b]),
                "leakage": num(phases.leakage[b]),
            })
        })
        .collect();
    let body = json!({
        "preset": preset.name.as_str(),
        "model": model.name(),
        "engine": engine.as_str(),
        "n_atoms": n,
        "n_max": run.n_max,
        "lambda_prime": num(run.lambda_prime),
        "t": num(run.t),
        "t_seconds": num(run.t_seconds),
        "g_physical": num(preset.g_physical),
        "fidelity": num(g.fidelity),
        "max_leakage": num(g.max_leakage),
        "leakage": g.leakage.iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "xi_i": num(g.xi_i),
        "phi": num(phases.phi),
        "phase_deviation": run.phase_deviation.map(num),
        "max_excited": num(run.sim.max_excited()),
        "max_photons": num(run.sim.max_photons()),
        "max_norm_drift": num(run.sim.max_norm_drift()),
        "basis": basis,
        "unitary": matrix_json(&g.unitary),
        "ideal": matrix_json(&g.ideal),
        "regime": regime_json(&run.regime),
    });
    let mut text = format!(
        "cz  preset {}  model {}  engine {}  atoms {}  n_max {}\n",
        preset.name,
        model,
        engine,
        n,
        run.n_max
    );
    text.push_str(&format!(
        "  lambda'          {}\n  t                {}  (1/g)\n  t physical       {} s\n",
        cell(run.lambda_prime),
        cell(run.t),
        cell(run.t_seconds)
    ));
    text.push_str(&format!(
        "  fidelity         {}\n  max leakage      {}\n  xi_I             {}\n  phi              {}\n",
        cell(g.fidelity),
        cell(g.max_leakage),
        cell(g.xi_i),
        cell(phases.phi)
    ));
    text.push_str(&format!(
        "  phase deviation  {}\n  max P(e)         {}\n  max P(photon)    {}\n",
        opt_cell(run.phase_deviation),
        cell(run.sim.max_excited()),
        cell(run.sim.max_photons())
    ));
    for b in 0..1usize << n {
        text.push_str(&format!(
            "  |{}>  phase {:>16}  leakage {}\n",
            bitstring(b, n),
            cell(phases.phases[b]),
            cell(phases.leakage[b])
        ));
    }
    let mut out = Output::new("cz", body, text);
    let series = cz_timeseries(&run, &preset)?.to_tsv();
    out.files.push(("timeseries.tsv".into(), series.clone()));
    out.tsv = Some(series);
    if model == Model::Full && !run.regime.pass {
        out.verdict = Some(LabError::Physics(
            "full-model run outside the dispersive regime".into(),
        ));
    }
    Ok(out)
}

fn cavity_json(b: &Option<CavityBudget>) -> Value {
    match b {
        None => Value::Null,
        Some(b) => json!({
            "p_r": num(b.p_r),
            "p_c": num(b.p_c),
            "t_r_eff": num(b.t_r_eff),
            "t_c_eff": num(b.t_c_eff),
            "headroom": num(b.headroom),
        }),
    }
}

pub fn budget_json(r: &BudgetReport) -> Value {
    json!({
        "preset": r.preset,
        "t_gate_units": num(r.t_gate_units),
        "t_gate": num(r.t_gate),
        "nominal": cavity_json(&r.nominal),
        "measured": cavity_json(&r.measured),
        "simulation": r.simulation.map(|(e, n)| json!({ "engine": e.as_str(), "n_max": n })),
        "motional": r.motional.map(|m| json!({
            "t_d": num(m.t_d),
            "lambda_prime_physical": num(m.lambda_prime_physical),
            "t_gate_angular": num(m.t_gate_angular),
            "t_gate_cyclic": num(m.t_gate_cyclic),
            "headroom": num(m.headroom),
            "headroom_cyclic": num(m.headroom_cyclic),
        })),
    })
}

fn cmd_budget(a: &BudgetArgs) -> LabResult<Output> {
    let preset = load_preset(&a.common, None)?;
    let engine: Engine = a.engine.parse()?;
    let r = budget(&preset, engine, a.n_max, a.samples)?;
    let mut text = format!(
        "budget  preset {}\n  t_gate  {} (1/g) = {} s\n",
        r.preset,
        cell(r.t_gate_units),
        cell(r.t_gate)
    );
    let mut table = Table::new(["budget", "p_r", "p_c", "t_r_eff", "t_c_eff", "headroom"]);
    for (label, b) in [("nominal", &r.nominal), ("measured", &r.measured)] {
        if let Some(b) = b {
            text.push_str(&format!(
                "  {label:<9} P_r {:<14} P_c {:<14} t_r' {:<14} t_c' {:<14} headroom {}\n",
                cell(b.p_r),
                cell(b.p_c),
                cell(b.t_r_eff),
                cell(b.t_c_eff),
                cell(b.headroom)
            ));
            table.push(vec![
                label.into(),
                cell(b.p_r),
                cell(b.p_c),
                cell(b.t_r_eff),
                cell(b.t_c_eff),
                cell(b.headroom),
            ]);
        }
    }
    if let Some(m) = &r.motional {
        text.push_str(&format!(
            "  lambda' {} read as angular: t_gate {} s, headroom t_d/t_gate {}\n",
            cell(m.lambda_prime_physical),
            cell(m.t_gate_angular),
            cell(m.headroom)
        ));
        text.push_str(&format!(
            "  lambda' read as cyclic (Hz): t_gate {} s, headroom {}\n",
            cell(m.t_gate_cyclic),
            cell(m.headroom_cyclic)
        ));
        table = Table::new(["reading", "t_gate", "t_d", "headroom"]);
        table.push(vec!["angular".into(), cell(m.t_gate_angular), cell(m.t_d), cell(m.headroom)]);
        table.push(vec!["cyclic".into(), cell(m.t_gate_cyclic), cell(m.t_d), cell(m.headroom_cyclic)]);
    }
    let mut out = Output::new("budget", budget_json(&r), text);
    let tsv = table.to_tsv();
    out.files.push(("budget.tsv".into(), tsv.clone()));
    out.tsv = Some(tsv);
    Ok(out)
}

fn load_plan(a: &FuseArgs) -> LabResult<FusionPlan> {
    match (&a.recipe, &a.plan) {
        (Some(name), None) => recipe(name).ok_or_else(|| {
            LabError::Usage(format!(
                "unknown recipe '{name}'; known: {}",
                recipe_names().join(", ")
            ))
        }),
        (None, Some(path)) => Config::load(path)?
            .plan
            .ok_or_else(|| LabError::Usage(format!("{} has no [plan] section", path.display())))?
            .to_plan(),
        _ => Err(LabError::Usage("fuse needs --recipe NAME or --plan FILE".into())),
    }
}

fn cmd_fuse(a: &FuseArgs) -> LabResult<Output> {
    if a.list {
        let names = recipe_names();
        let text = names.iter().map(|n| format!("{n}\n")).collect::<String>();
        return Ok(Output::new("fuse", json!({ "recipes": names }), text));
    }
    let plan = load_plan(a)?;
    let run = run_plan(&plan, a.orbit_cap)?;
    let outcome = &run.search.outcome;
    let witness = run.witness().map(|w| w.vertices.clone());
    let steps: Vec<String> = plan.steps.iter().map(|s| format!("{s:?}")).collect();
    let body = json!({
        "recipe": plan.name,
        "description": plan.description,
        "reconstructed": plan.reconstructed,
        "n_qubits": plan.n_qubits,
        "steps": steps,
        "status": outcome.label(),
        "witness": witness,
        "explored": run.search.explored,
        "statevector_verified": run.statevector_verified,
        "final_edges": run.final_graph.edges(),
        "target_edges": plan.target.edges(),
    });
    let mut text = format!(
        "fuse  {}{}\n  {}\n  status      {}\n",
        plan.name,
        if plan.reconstructed { "  (reconstructed)" } else { "" },
        plan.description,
        outcome.label()
    );
    text.push_str(&format!(
        "  witness     {}\n  explored    {}\n  statevector {}\n  final graph\n",
        witness.as_ref().map(|w| format!("{w:?}")).unwrap_or_else(|| "none".into()),
        run.search.explored,
        match run.statevector_verified {
            Some(true) => "verified",
            Some(false) => "MISMATCH",
            None => "skipped (too many qubits)",
        }
    ));
    for line in run.final_graph.to_adjacency_list().lines() {
        text.push_str(&format!("    {line}\n"));
    }
    let dot = run.final_graph.to_dot(&plan.name);
    let mut out = Output::new("fuse", body, text);
    out.files.push(("final.dot".into(), dot.clone()));
    out.files.push(("target.dot".into(), plan.target.to_dot("target")));
    out.files.push(("final.adj".into(), run.final_graph.to_adjacency_list()));
    out.dot = Some(dot);
    out.tsv = Some(run.final_graph.to_adjacency_list());
    out.verdict = match (outcome, run.statevector_verified) {
        (_, Some(false)) => Some(LabError::Physics(
            "statevector replay disagrees with the graph rules".into(),
        )),
        (LcOutcome::CapReached, _) => Some(LabError::Inconclusive(format!(
            "orbit cap of {} graphs reached before deciding equivalence",
            a.orbit_cap
        ))),
        _ => None,
    };
    Ok(out)
}

pub fn sweep_table(r: &SweepReport) -> Table {
    let mut t = Table::new([r.param.as_str(), r.metric.as_str(), "status"]);
    for p in &r.points {
        t.push(vec![cell(p.value), opt_cell(p.metric), p.status.as_str().into()]);
    }
    t
}

fn cmd_sweep(a: &SweepArgs) -> LabResult<Output> {
    let preset = load_preset(&a.common, a.sim.n_atoms)?;
    let section = match &a.common.config {
        Some(path) => Config::load(path)?.sweep.unwrap_or_default(),
        None => Default::default(),
    };
    let param: SweepParam = a
        .param
        .clone()
        .or(section.param)
        .ok_or_else(|| LabError::Usage("sweep needs --param".into()))?
        .parse()?;
    let metric: Metric = a
        .metric
        .clone()
        .or(section.metric)
        .ok_or_else(|| LabError::Usage("sweep needs --metric".into()))?
        .parse()?;
    let gate = dispersive_core::model::derive(&preset.params)?.gate_time()?;
    let values = match (&a.range, &a.values, &section.range, &section.values) {
        (Some(r), _, _, _) => parse_range(r, gate)?,
        (None, Some(v), _, _) => v.clone(),
        (None, None, Some(r), _) => parse_range(r, gate)?,
        (None, None, None, Some(v)) => v.clone(),
        _ => return Err(LabError::Usage("sweep needs --range or --values".into())),
    };
    let model = parse_model(&a.sim.model)?;
    let engine: Engine = a.sim.engine.parse()?;
    let r = run_sweep(&preset, model, engine, a.sim.n_max, param, &values, metric)?;
    let table = sweep_table(&r).to_tsv();
    let body = json!({
        "preset": preset.name.as_str(),
        "model": model.name(),
        "engine": engine.as_str(),
        "n_max": r.n_max,
        "param": param.as_str(),
        "metric": metric.as_str(),
        "points": r.points.iter().map(|p| json!({
            "value": num(p.value),
            "metric": p.metric.map(num),
            "status": p.status.as_str(),
        })).collect::<Vec<_>>(),
        "fit": r.fit.map(|f| json!({
            "slope": num(f.slope),
            "intercept": num(f.intercept),
            "lambda_prime": num(f.lambda_prime),
            "relative_error": num(f.relative_error),
        })),
    });
    let mut text = table.clone();
    if let Some(f) = r.fit {
        text.push_str(&format!(
            "# fit slope {}  lambda' {}  relative error {}\n",
            cell(f.slope),
            cell(f.lambda_prime),
            cell(f.relative_error)
        ));
    }
    let mut out = Output::new("sweep", body, text);
    out.files.push(("sweep.tsv".into(), table.clone()));
    out.tsv = Some(table);
    Ok(out)
}

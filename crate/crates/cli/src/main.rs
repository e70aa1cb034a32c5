//! `wpvol`: command-line front end.
//!
//! Exit codes: 0 success, 1 acceptance failure, 2 usage error,
//! 3 series truncation too short for the request.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use config::Config;
use wpvol::acceptance::{run_suite, Golden, Suite, EMBEDDED_GOLDEN};
use wpvol::curves::{default_order, DensityParams, SpectralCurve};
use wpvol::gravity::{
    disc_partition, genus_partition_via_correlator, genus_partition_via_gluing, super_disc_density,
    trumpet, volume_from_correlator, Convention,
};
use wpvol::matrix_lab::{
    histogram_and_stats, sample, BinSpec, ChainConfig, EnsembleConfig, EnsembleKind,
    ReferenceDensity,
};
use wpvol::recursion::{required_curve_order, CorrelatorDump, Recursion};
use wpvol::{Error, Rational};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Truncation(String),
    CheckFailed(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Truncation { .. } => CliError::Truncation(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Truncation(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "wpvol",
    version,
    about = "Exact Weil-Petersson volumes, JT closed forms and a random-matrix lab"
)]
struct Cli {
    /// Config file (`key = value` lines) overriding the built-in defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the result here instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, value_parser = ["json", "csv"])]
    format: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weil-Petersson volume polynomial V_{g,n}
    Volumes(VolumesArgs),
    /// Correlator coefficients omega_{g,n}
    Correlators(CorrelatorArgs),
    /// Density of states on an energy grid
    Density(DensityArgs),
    /// Disc or genus-g partition function on a beta grid
    Partition(PartitionArgs),
    /// Trumpet Theta(b; beta) on a grid
    Trumpet(TrumpetArgs),
    /// Sample a random-matrix ensemble
    Mc(McArgs),
    /// Run the acceptance suite
    Check(CheckArgs),
    /// Exact series of a spectral curve
    DumpCurve(CurveArgs),
}

#[derive(Args)]
struct CurveArgs {
    /// bosonic | super | airy
    #[arg(long, value_parser = ["bosonic", "super", "airy"])]
    curve: Option<String>,
    /// Curve truncation (`auto` or an integer)
    #[arg(long)]
    order: Option<String>,
    /// Slope of the Airy curve
    #[arg(long)]
    airy_slope: Option<String>,
}

#[derive(Args)]
struct CorrelatorArgs {
    #[command(flatten)]
    curve: CurveArgs,
    #[arg(long)]
    g: u32,
    #[arg(long)]
    n: u32,
}

#[derive(Args)]
struct VolumesArgs {
    #[command(flatten)]
    target: CorrelatorArgs,
    /// Evaluate at boundary lengths b1,..,bn (repeatable)
    #[arg(long, value_delimiter = ',', num_args = 1, action = clap::ArgAction::Append)]
    eval: Vec<f64>,
    #[arg(long, value_parser = ["jt", "mirzakhani"])]
    convention: Option<String>,
    #[arg(long)]
    digits: Option<u32>,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long, value_parser = ["bosonic", "super", "airy"])]
    curve: Option<String>,
    /// Comma-separated energies
    #[arg(long)]
    energies: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    entropy: Option<f64>,
}

#[derive(Args)]
struct PartitionArgs {
    /// `disc` or a genus >= 1
    #[arg(long)]
    genus: Option<String>,
    #[arg(long)]
    betas: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    entropy: Option<f64>,
}

#[derive(Args)]
struct TrumpetArgs {
    /// Comma-separated geodesic lengths
    #[arg(long)]
    lengths: Option<String>,
    #[arg(long)]
    betas: Option<String>,
}

#[derive(Args)]
struct McArgs {
    /// gue | potential | susy
    #[arg(long, value_parser = ["gue", "potential", "susy"])]
    kind: Option<String>,
    /// Matrix size
    #[arg(long = "N")]
    size: Option<usize>,
    #[arg(long)]
    nu: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    draws: Option<usize>,
    /// Potential coefficients c0,c1,.. (rationals)
    #[arg(long, allow_hyphen_values = true)]
    potential: Option<String>,
    #[arg(long)]
    chains: Option<u32>,
    #[arg(long)]
    steps: Option<u32>,
    #[arg(long)]
    burn_in: Option<u32>,
    #[arg(long)]
    step_size: Option<f64>,
    /// Emit a histogram instead of the raw draws
    #[arg(long)]
    histogram: bool,
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, value_parser = ["fast", "full"])]
    suite: Option<String>,
    /// Golden reference JSON (default: embedded copy)
    #[arg(long)]
    golden: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Truncation(m) => eprintln!("error: {m} (raise --order)"),
                CliError::CheckFailed(m) => eprintln!("check failed: {m}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}

struct Output {
    command: &'static str,
    json: Value,
    csv: Option<String>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    cfg.set_opt("format", &cli.format)?;
    let out = match &cli.command {
        Command::Volumes(a) => cmd_volumes(&mut cfg, a)?,
        Command::Correlators(a) => cmd_correlators(&mut cfg, a)?,
        Command::Density(a) => cmd_density(&mut cfg, a)?,
        Command::Partition(a) => cmd_partition(&mut cfg, a)?,
        Command::Trumpet(a) => cmd_trumpet(&mut cfg, a)?,
        Command::Mc(a) => cmd_mc(&mut cfg, a)?,
        Command::DumpCurve(a) => cmd_dump_curve(&mut cfg, a)?,
        Command::Check(a) => return cmd_check(&mut cfg, a, cli.output.as_deref()),
    };
    emit(&cfg, out, cli.output.as_deref())
}

fn meta(cfg: &Config, command: &str) -> Value {
    json!({
        "tool": "wpvol",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": cfg.values(),
    })
}

fn render(cfg: &Config, out: &Output) -> Result<String, CliError> {
    let format: String = cfg.get("format")?;
    match (format.as_str(), &out.csv) {
        ("csv", Some(body)) => {
            let mut text = format!(
                "# tool = wpvol {}\n# command = {}\n",
                env!("CARGO_PKG_VERSION"),
                out.command
            );
            for (k, v) in cfg.values() {
                text.push_str(&format!("# {k} = {v}\n"));
            }
            text.push_str(body);
            Ok(text)
        }
        ("csv", None) => Err(CliError::Usage(format!("{} has no CSV form", out.command))),
        ("json", _) => {
            let mut doc = json!({ "meta": meta(cfg, out.command) });
            if let (Value::Object(d), Value::Object(body)) = (&mut doc, &out.json) {
                d.extend(body.clone());
            }
            let mut s =
                serde_json::to_string_pretty(&doc).map_err(|e| CliError::Usage(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        (f, _) => Err(CliError::Usage(format!("unknown format {f:?}"))),
    }
}

fn write_text(text: &str, path: Option<&std::path::Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Usage(format!("cannot write output: {e}")))
        }
    }
}

fn emit(cfg: &Config, out: Output, path: Option<&std::path::Path>) -> Result<(), CliError> {
    write_text(&render(cfg, &out)?, path)
}

fn apply_curve_args(cfg: &mut Config, a: &CurveArgs) -> Result<(), CliError> {
    cfg.set_opt("curve", &a.curve)?;
    cfg.set_opt("order", &a.order)?;
    cfg.set_opt("airy_slope", &a.airy_slope)
}

/// Builds the configured curve, sized for `omega_{g,n}` when order is `auto`.
fn build_curve(cfg: &Config, target: Option<(u32, u32)>) -> Result<SpectralCurve, CliError> {
    let name: String = cfg.get("curve")?;
    let order_raw: String = cfg.get("order")?;
    let explicit: Option<u32> = match order_raw.as_str() {
        "auto" => None,
        s => Some(
            s.parse()
                .map_err(|e| CliError::Usage(format!("order {s:?}: {e}")))?,
        ),
    };
    let base_order = explicit.unwrap_or(default_order(1));
    let curve = match name.as_str() {
        "bosonic" => SpectralCurve::jt(base_order)?,
        "super" => SpectralCurve::jt_super(base_order)?,
        "airy" => SpectralCurve::airy(cfg.get::<Rational>("airy_slope")?)?,
        other => return Err(CliError::Usage(format!("unknown curve {other:?}"))),
    };
    match (explicit, target) {
        (None, Some((g, n))) => {
            let need = required_curve_order(&curve, g, n)?;
            Ok(curve.with_order(need.max(base_order))?)
        }
        _ => Ok(curve),
    }
}

fn check_target(cfg: &Config, g: u32, n: u32) -> Result<(), CliError> {
    wpvol::recursion::CorrelatorKey::new(g, n)?;
    let max: i64 = cfg.get("max_euler")?;
    let e = 2 * g as i64 - 2 + n as i64;
    if e > max {
        return Err(CliError::Usage(format!(
            "2g-2+n = {e} exceeds max_euler = {max}"
        )));
    }
    Ok(())
}

fn cmd_correlators(cfg: &mut Config, a: &CorrelatorArgs) -> Result<Output, CliError> {
    apply_curve_args(cfg, &a.curve)?;
    check_target(cfg, a.g, a.n)?;
    let curve = build_curve(cfg, Some((a.g, a.n)))?;
    let mut rec = Recursion::new(curve);
    let w = rec.compute(a.g, a.n)?;
    let dump = CorrelatorDump::from(&*w);
    let mut csv = String::new();
    let header: Vec<String> = (1..=a.n).map(|i| format!("k{i}")).collect();
    csv.push_str(&format!("{},coeff\n", header.join(",")));
    for (k, v) in &dump.terms {
        let ks: Vec<String> = k.iter().map(u32::to_string).collect();
        csv.push_str(&format!("{},\"{}\"\n", ks.join(","), v));
    }
    Ok(Output {
        command: "correlators",
        json: json!({ "correlator": dump }),
        csv: Some(csv),
    })
}

fn cmd_volumes(cfg: &mut Config, a: &VolumesArgs) -> Result<Output, CliError> {
    let t = &a.target;
    apply_curve_args(cfg, &t.curve)?;
    cfg.set_opt("convention", &a.convention)?;
    cfg.set_opt("digits", &a.digits)?;
    check_target(cfg, t.g, t.n)?;
    let n = t.n as usize;
    if !a.eval.len().is_multiple_of(n) {
        return Err(CliError::Usage(format!(
            "--eval needs groups of {n} lengths"
        )));
    }
    let convention: Convention = cfg.get::<String>("convention")?.parse()?;
    let digits: u32 = cfg.get("digits")?;
    let curve = build_curve(cfg, Some((t.g, t.n)))?;
    let mut rec = Recursion::new(curve);
    let w = rec.compute(t.g, t.n)?;
    let v = volume_from_correlator(&w).with_convention(convention);
    let mut evals = Vec::new();
    for b in a.eval.chunks(n) {
        evals.push((b.to_vec(), v.evaluate(b, digits)?));
    }
    let mut csv = v.to_csv(digits);
    if !evals.is_empty() {
        let header: Vec<String> = (1..=n).map(|i| format!("b{i}")).collect();
        csv.push_str(&format!("# evaluations\n{},value\n", header.join(",")));
        for (b, val) in &evals {
            let bs: Vec<String> = b.iter().map(|x| x.to_string()).collect();
            csv.push_str(&format!("{},{val:e}\n", bs.join(",")));
        }
    }
    let evals_json: Vec<Value> = evals
        .iter()
        .map(|(b, val)| json!({ "b": b, "value": val }))
        .collect();
    let mut body = json!({ "volume": v.to_json(), "rendering": v.to_string() });
    if !evals_json.is_empty() {
        body["evaluations"] = Value::Array(evals_json);
    }
    Ok(Output {
        command: "volumes",
        json: body,
        csv: Some(csv),
    })
}

fn positive_grid(cfg: &Config, key: &str) -> Result<Vec<f64>, CliError> {
    let grid: Vec<f64> = cfg.list(key)?;
    if grid.is_empty() {
        return Err(CliError::Usage(format!("{key} grid is empty")));
    }
    if let Some(bad) = grid.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(CliError::Usage(format!(
            "{key} grid point {bad} is not positive"
        )));
    }
    Ok(grid)
}

fn two_column(header: &str, rows: &[(f64, f64)]) -> String {
    let mut s = format!("{header}\n");
    for (x, y) in rows {
        s.push_str(&format!("{x},{y:e}\n"));
    }
    s
}

fn cmd_density(cfg: &mut Config, a: &DensityArgs) -> Result<Output, CliError> {
    cfg.set_opt("curve", &a.curve)?;
    cfg.set_opt("energies", &a.energies)?;
    cfg.set_opt("entropy", &a.entropy)?;
    let grid = positive_grid(cfg, "energies")?;
    let s: f64 = cfg.get("entropy")?;
    let curve = build_curve(cfg, None)?;
    let is_super = cfg.get::<String>("curve")? == "super";
    let rows = grid
        .iter()
        .map(|&e| {
            let v = if is_super {
                super_disc_density(e, s)?
            } else {
                curve.density_of_states(e, DensityParams { entropy_s: s })?
            };
            Ok((e, v))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let json_rows: Vec<Value> = rows
        .iter()
        .map(|(e, v)| json!({ "energy": e, "density": v }))
        .collect();
    Ok(Output {
        command: "density",
        json: json!({ "curve": curve.id(), "rows": json_rows }),
        csv: Some(two_column("energy,density", &rows)),
    })
}

fn cmd_partition(cfg: &mut Config, a: &PartitionArgs) -> Result<Output, CliError> {
    cfg.set_opt("genus", &a.genus)?;
    cfg.set_opt("betas", &a.betas)?;
    cfg.set_opt("entropy", &a.entropy)?;
    let betas = positive_grid(cfg, "betas")?;
    let s: f64 = cfg.get("entropy")?;
    let genus: String = cfg.get("genus")?;
    if genus == "disc" {
        let rows = betas
            .iter()
            .map(|&b| Ok((b, disc_partition(b, s)?)))
            .collect::<Result<Vec<_>, Error>>()?;
        let json_rows: Vec<Value> = rows
            .iter()
            .map(|(b, v)| json!({ "beta": b, "value": v }))
            .collect();
        return Ok(Output {
            command: "partition",
            json: json!({ "genus": "disc", "rows": json_rows }),
            csv: Some(two_column("beta,value", &rows)),
        });
    }
    let g: u32 = genus.parse().map_err(|_| {
        CliError::Usage(format!(
            "genus must be `disc` or a positive integer, got {genus:?}"
        ))
    })?;
    check_target(cfg, g, 1)?;
    if g == 0 {
        return Err(CliError::Usage(
            "genus 0 with one boundary is `--genus disc`".into(),
        ));
    }
    let mut rec = Recursion::new(SpectralCurve::jt(default_order(g))?);
    let mut csv = String::from("beta,gluing,correlator\n");
    let mut json_rows = Vec::new();
    for &b in &betas {
        let glued = genus_partition_via_gluing(&mut rec, g, b, s)?;
        let direct = genus_partition_via_correlator(&mut rec, g, b, s)?;
        csv.push_str(&format!("{b},{glued:e},{direct:e}\n"));
        json_rows.push(json!({ "beta": b, "gluing": glued, "correlator": direct }));
    }
    Ok(Output {
        command: "partition",
        json: json!({ "genus": g, "rows": json_rows }),
        csv: Some(csv),
    })
}

fn cmd_trumpet(cfg: &mut Config, a: &TrumpetArgs) -> Result<Output, CliError> {
    cfg.set_opt("lengths", &a.lengths)?;
    cfg.set_opt("betas", &a.betas)?;
    let betas = positive_grid(cfg, "betas")?;
    let lengths: Vec<f64> = cfg.list("lengths")?;
    let mut csv = String::from("b,beta,value\n");
    let mut rows = Vec::new();
    for &beta in &betas {
        for &b in &lengths {
            let v = trumpet(b, beta)?;
            csv.push_str(&format!("{b},{beta},{v:e}\n"));
            rows.push(json!({ "b": b, "beta": beta, "value": v }));
        }
    }
    Ok(Output {
        command: "trumpet",
        json: json!({ "rows": rows }),
        csv: Some(csv),
    })
}

fn cmd_mc(cfg: &mut Config, a: &McArgs) -> Result<Output, CliError> {
    cfg.set_opt("kind", &a.kind)?;
    cfg.set_opt("N", &a.size)?;
    cfg.set_opt("nu", &a.nu)?;
    cfg.set_opt("seed", &a.seed)?;
    cfg.set_opt("draws", &a.draws)?;
    cfg.set_opt("potential", &a.potential)?;
    cfg.set_opt("chains", &a.chains)?;
    cfg.set_opt("steps", &a.steps)?;
    cfg.set_opt("burn_in", &a.burn_in)?;
    cfg.set_opt("step_size", &a.step_size)?;
    cfg.set_opt("bins", &a.bins)?;
    let kind: EnsembleKind = cfg.get::<String>("kind")?.parse()?;
    let config = EnsembleConfig {
        n: cfg.get("N")?,
        kind,
        potential: cfg.list::<Rational>("potential")?,
        nu: cfg.get("nu")?,
        seed: cfg.get("seed")?,
        draws: cfg.get("draws")?,
        chain: ChainConfig {
            chains: cfg.get("chains")?,
            steps: cfg.get("steps")?,
            burn_in: cfg.get("burn_in")?,
            step_size: cfg.get("step_size")?,
        },
    };
    config.validate()?;
    let started = Instant::now();
    let batch = sample(&config)?;
    eprintln!(
        "sampled {} draws in {:.2} s",
        batch.draws.len(),
        started.elapsed().as_secs_f64()
    );
    if a.histogram {
        let bins: usize = cfg.get("bins")?;
        let (reference, spec) = match (kind, config.uses_metropolis()) {
            (EnsembleKind::GaussianHermitian, _) => (
                Some(ReferenceDensity::Semicircle),
                BinSpec::Range {
                    lo: -1.1,
                    hi: 1.1,
                    bins,
                },
            ),
            (EnsembleKind::SusyBlock, false) => (
                Some(ReferenceDensity::HardEdge),
                BinSpec::Range {
                    lo: 0.0,
                    hi: 1.1,
                    bins,
                },
            ),
            _ => (None, BinSpec::Auto(bins)),
        };
        let stats = histogram_and_stats(&batch, reference, spec, None)?;
        return Ok(Output {
            command: "mc",
            json: json!({ "reference": reference, "histogram": stats }),
            csv: Some(stats.to_csv()),
        });
    }
    Ok(Output {
        command: "mc",
        json: json!({ "batch": batch }),
        csv: Some(batch.to_csv()),
    })
}

fn cmd_dump_curve(cfg: &mut Config, a: &CurveArgs) -> Result<Output, CliError> {
    apply_curve_args(cfg, a)?;
    let curve = build_curve(cfg, None)?;
    let dump = curve.dump();
    let mut csv = String::from("exp,coeff\n");
    for t in &dump.coefficients {
        csv.push_str(&format!("{},\"{}\"\n", t.exp, t.coeff));
    }
    Ok(Output {
        command: "dump-curve",
        json: json!({ "curve": dump }),
        csv: Some(csv),
    })
}

fn cmd_check(
    cfg: &mut Config,
    a: &CheckArgs,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    cfg.set_opt("suite", &a.suite)?;
    cfg.set_opt("golden", &a.golden)?;
    let suite: Suite = cfg.get::<String>("suite")?.parse()?;
    let golden_path: String = cfg.get("golden")?;
    let text = if golden_path == "embedded" {
        EMBEDDED_GOLDEN.to_string()
    } else {
        std::fs::read_to_string(&golden_path)
            .map_err(|e| CliError::Usage(format!("cannot read golden file {golden_path}: {e}")))?
    };
    let parsed = Golden::parse(&text).map_err(|e| e.to_string());
    let golden = match &parsed {
        Ok(g) => Ok(g),
        Err(e) => Err(e.as_str()),
    };
    let mut timing = |id: u32, t: std::time::Duration| {
        eprintln!("criterion {id:>2}: {:.2} s", t.as_secs_f64());
    };
    let report = run_suite(suite, golden, &mut timing);
    for c in &report.criteria {
        eprintln!(
            "[{}] {:>2} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            c.detail
        );
    }
    let out = Output {
        command: "check",
        json: json!({ "report": report }),
        csv: None,
    };
    let mut json_cfg = cfg.clone();
    json_cfg.set("format", "json".into())?;
    write_text(&render(&json_cfg, &out)?, output)?;
    if report.passed {
        Ok(())
    } else {
        let names: Vec<String> = report
            .failed()
            .iter()
            .map(|c| format!("{} ({})", c.id, c.name))
            .collect();
        Err(CliError::CheckFailed(names.join(", ")))
    }
}

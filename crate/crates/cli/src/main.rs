use clap::{Args, Parser, Subcommand, ValueEnum};
use mixpath::diagnostics::{forecast_analytic, forecast_bootstrap, forecast_monte_carlo, write_forecast_csv};
use mixpath::estimators::{
    mle_known_var, mle_unknown_equal_var, mle_unknown_unequal_var, mom_covariate_adjusted, mom_iv, mom_kappa3,
    mom_known_var, EstimateResult, MleConfig, Shape,
};
use mixpath::inference::{
    grid_bootstrap_1d, wald_invert_1d, wald_invert_2d, write_pvalue_curve, ConfidenceSet, Grid2d, GridSpec,
};
use mixpath::mixture::{MixtureSpec, Sample, VarianceKnowledge};
use mixpath::num::StreamRng;
use mixpath::prinstrat::{analyze, jobs2_synthetic, BergerBoosConfig, PSConfig, PSDataset, PSReport};
use mixpath::simlab::presets::{preset_ids, run_preset, PresetOptions, PRESETS};
use mixpath::simlab::{run_study, StudyConfig};
use mixpath::Error;
use serde_json::{json, Value};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_INPUT: u8 = 1;
const EXIT_PATHOLOGY: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "mixpath", version, about = "Pathologies and test-inversion inference for two-component normal mixtures")]
struct Cli {
    /// Master seed for every random stream [default: 1, or the study config's seed].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (directory for `study` and `replicate`); stdout if omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "MIXPATH_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a sample from a two-component normal mixture.
    Simulate(SimulateArgs),
    /// Estimate the separation from a `y[,x]` file.
    Estimate(EstimateArgs),
    /// Forecast pile-up and sign-error probabilities.
    Diagnose(DiagnoseArgs),
    /// Confidence sets by test inversion.
    Invert(InvertArgs),
    /// Principal-stratification analysis of a `z,d,y` file.
    Prinstrat(PrinstratArgs),
    /// Run a Monte Carlo study from a JSON or TOML config.
    Study(StudyArgs),
    /// Rerun a named figure or table preset.
    Replicate(ReplicateArgs),
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    #[arg(long)]
    pi: f64,
    /// Separation of a mean-zero mixture; conflicts with --mu0/--mu1.
    #[arg(long, conflicts_with_all = ["mu0", "mu1"])]
    delta: Option<f64>,
    #[arg(long, requires = "mu1")]
    mu0: Option<f64>,
    #[arg(long, requires = "mu0")]
    mu1: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// SD of the second component, if different.
    #[arg(long)]
    sigma1: Option<f64>,
    #[arg(long)]
    n: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum VarianceMode {
    KnownEqual,
    UnknownEqual,
    UnknownUnequal,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum EstimatorArg {
    Mle,
    Mom,
    MomAdjusted,
    MomIv,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct EstimateArgs {
    input: PathBuf,
    #[arg(long)]
    pi: Option<f64>,
    /// Known component SD; required with --variance known-equal.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, value_enum, default_value = "known-equal")]
    variance: VarianceMode,
    #[arg(long, value_enum, default_value = "mle")]
    estimator: EstimatorArg,
    /// Weight in the `x = 0` cell (covariate estimators).
    #[arg(long)]
    pi0: Option<f64>,
    /// Weight in the `x = 1` cell (covariate estimators).
    #[arg(long)]
    pi1: Option<f64>,
    /// Share of `x = 1` for the adjusted estimator; observed share if omitted.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ForecastArg {
    Analytic,
    MonteCarlo,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct DiagnoseArgs {
    /// Dataset for the bootstrap forecast; conflicts with --delta.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Comma-separated separations for the hypothetical forecast.
    #[arg(long, value_name = "D1,D2,...", allow_hyphen_values = true, value_parser = parse_list::<f64>, default_value = "")]
    delta: List<f64>,
    /// Comma-separated sample sizes for the hypothetical forecast.
    #[arg(long, value_name = "N1,N2,...", value_parser = parse_list::<usize>, default_value = "")]
    n: List<usize>,
    #[arg(long)]
    pi: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, value_enum, default_value = "analytic")]
    method: ForecastArg,
    /// Monte Carlo replicates.
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Bootstrap resamples in dataset mode.
    #[arg(long, default_value_t = mixpath::diagnostics::DEFAULT_BOOTSTRAP)]
    b: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum InvertMethod {
    Gridboot,
    Wald,
    Wald2d,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct InvertArgs {
    input: PathBuf,
    #[arg(long)]
    pi: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, value_enum, default_value = "gridboot")]
    method: InvertMethod,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = mixpath::inference::DEFAULT_B)]
    b: usize,
    /// Grid as `lo,hi,points`; the default depends on the data.
    #[arg(long, value_name = "LO,HI,POINTS", allow_hyphen_values = true, value_parser = parse_list::<f64>)]
    grid: Option<List<f64>>,
}

#[derive(Args, Debug)]
struct PrinstratArgs {
    /// `z,d,y` file; the bundled synthetic dataset if omitted.
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = mixpath::diagnostics::DEFAULT_BOOTSTRAP)]
    b: usize,
    /// Add a Berger-Boos set that propagates uncertainty in pi and sigma.
    #[arg(long)]
    berger_boos: bool,
}

#[derive(Args, Debug)]
struct StudyArgs {
    config: PathBuf,
}

#[derive(Args, Debug)]
struct ReplicateArgs {
    id: String,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
}

/// A comma-separated list argument.
#[derive(Clone, Debug, Default)]
struct List<T>(Vec<T>);

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<List<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(List)
}

/// Failure categories mapped to exit codes.
enum Failure {
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_INPUT);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(EXIT_PATHOLOGY),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

const DEFAULT_SEED: u64 = 1;

impl Cli {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Simulate(a) => simulate(cli, a),
        Command::Estimate(a) => estimate(cli, a),
        Command::Diagnose(a) => diagnose(cli, a),
        Command::Invert(a) => invert(cli, a),
        Command::Prinstrat(a) => prinstrat(cli, a),
        Command::Study(a) => study(cli, a),
        Command::Replicate(a) => replicate(cli, a),
    }
}

fn provenance(command: &str, seed: u64, config: Value) -> Value {
    json!({
        "tool": "mixpath",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": seed,
        "config": config,
    })
}

/// `#` comment lines carrying the provenance object.
fn csv_header(p: &Value) -> String {
    format!("# mixpath {}\n# provenance: {}\n", env!("CARGO_PKG_VERSION"), p)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            let mut so = io::stdout().lock();
            so.write_all(bytes)?;
            so.flush()?;
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, prov: Value, body: Value) -> Result<(), Failure> {
    let mut v = json!({ "provenance": prov });
    if let (Value::Object(m), Value::Object(b)) = (&mut v, body) {
        m.extend(b);
    }
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    emit(out, s.as_bytes())
}

fn emit_csv(out: Option<&Path>, prov: &Value, write: impl FnOnce(&mut Vec<u8>) -> mixpath::Result<()>) -> Result<(), Failure> {
    let mut buf = csv_header(prov).into_bytes();
    write(&mut buf)?;
    emit(out, &buf)
}

fn read_sample(path: &Path) -> Result<Sample<f64>, Failure> {
    let f = fs::File::open(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Sample::read_csv(io::BufReader::new(f)).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Outcome {
    let (mu0, mu1) = match (a.delta, a.mu0, a.mu1) {
        (Some(d), None, None) => ((1.0 - a.pi) * d, -a.pi * d),
        (None, Some(m0), Some(m1)) => (m0, m1),
        _ => return Err(Failure::Input("give either --delta or both --mu0 and --mu1".into())),
    };
    let s1 = a.sigma1.unwrap_or(a.sigma);
    let variance = if s1 == a.sigma { VarianceKnowledge::KnownEqual } else { VarianceKnowledge::UnknownUnequal };
    let spec = MixtureSpec::new(a.pi, mu0, mu1, a.sigma, s1, variance)?;
    let y = spec.sample(a.n, &mut StreamRng::keyed(cli.seed(), &[0]))?;
    let prov = provenance("simulate", cli.seed(), json!({ "spec": spec, "n": a.n }));
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => emit_csv(cli.out.as_deref(), &prov, |w| y.write_csv(w))?,
        Format::Json => emit_json(cli.out.as_deref(), prov, json!({ "y": y.y }))?,
    }
    Ok(false)
}

fn flagged(r: &EstimateResult) -> bool {
    r.delta.is_none() || r.shape != Shape::BimodalPrimary
}

fn estimate(cli: &Cli, a: &EstimateArgs) -> Outcome {
    let y = read_sample(&a.input)?;
    let cfg = MleConfig::default();
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Failure::Input(format!("--{name} is required for this estimator")));
    if a.variance == VarianceMode::KnownEqual && a.sigma.is_none() {
        return Err(Failure::Input("--sigma is required with --variance known-equal".into()));
    }
    if a.variance != VarianceMode::KnownEqual && a.sigma.is_some() {
        return Err(Failure::Input("--sigma applies only to --variance known-equal".into()));
    }
    let r = match (a.estimator, a.variance) {
        (EstimatorArg::Mle, VarianceMode::KnownEqual) => mle_known_var(&y, need(a.pi, "pi")?, a.sigma.unwrap_or(1.0), &cfg)?,
        (EstimatorArg::Mle, VarianceMode::UnknownEqual) => mle_unknown_equal_var(&y, need(a.pi, "pi")?, &cfg)?,
        (EstimatorArg::Mle, VarianceMode::UnknownUnequal) => mle_unknown_unequal_var(&y, need(a.pi, "pi")?, &cfg)?,
        (EstimatorArg::Mom, VarianceMode::KnownEqual) => mom_known_var(&y, need(a.pi, "pi")?, a.sigma.unwrap_or(1.0))?,
        (EstimatorArg::Mom, VarianceMode::UnknownEqual) => mom_kappa3(&y, need(a.pi, "pi")?)?,
        (EstimatorArg::Mom, VarianceMode::UnknownUnequal) => {
            return Err(Failure::Input("moment estimators assume equal variances".into()))
        }
        (EstimatorArg::MomAdjusted, VarianceMode::KnownEqual) => {
            let x = y.x.as_ref().ok_or_else(|| Failure::Input("--estimator mom-adjusted needs a y,x file".into()))?;
            let p = a.p.unwrap_or(x.iter().filter(|&&v| v == 1).count() as f64 / x.len() as f64);
            mom_covariate_adjusted(&y, need(a.pi0, "pi0")?, need(a.pi1, "pi1")?, a.sigma.unwrap_or(1.0), p)?
        }
        (EstimatorArg::MomIv, _) => mom_iv(&y, need(a.pi0, "pi0")?, need(a.pi1, "pi1")?)?,
        (EstimatorArg::MomAdjusted, _) => {
            return Err(Failure::Input("--estimator mom-adjusted needs --variance known-equal".into()))
        }
    };
    let prov = provenance(
        "estimate",
        cli.seed(),
        json!({
            "input": a.input, "pi": a.pi, "sigma": a.sigma, "variance": format!("{:?}", a.variance),
            "estimator": format!("{:?}", a.estimator), "pi0": a.pi0, "pi1": a.pi1, "p": a.p, "mle": cfg,
        }),
    );
    let flag = flagged(&r);
    emit_json(cli.out.as_deref(), prov, json!({ "estimate": r, "pathology_flag": flag }))?;
    Ok(flag)
}

fn diagnose(cli: &Cli, a: &DiagnoseArgs) -> Outcome {
    let (deltas, ns) = (&a.delta.0, &a.n.0);
    let hypothetical = !deltas.is_empty() || !ns.is_empty();
    let rows = match (&a.input, hypothetical) {
        (Some(_), true) | (None, false) => {
            return Err(Failure::Input(
                "give either --input (bootstrap mode) or --delta and --n (hypothetical mode), not both".into(),
            ))
        }
        (Some(path), false) => {
            let y = read_sample(path)?;
            vec![forecast_bootstrap(&y, a.pi, a.sigma, a.b, &StreamRng::keyed(cli.seed(), &[0]))?]
        }
        (None, true) => {
            if deltas.is_empty() || ns.is_empty() {
                return Err(Failure::Input("hypothetical mode needs both --delta and --n".into()));
            }
            let mut rows = Vec::new();
            for (i, &n) in ns.iter().enumerate() {
                for (j, &d) in deltas.iter().enumerate() {
                    rows.push(match a.method {
                        ForecastArg::Analytic => forecast_analytic(d, a.pi, a.sigma, n)?,
                        ForecastArg::MonteCarlo => {
                            if d == 0.0 {
                                return Err(Failure::Input("Monte Carlo forecasts need a nonzero separation".into()));
                            }
                            let spec = MixtureSpec::zero_mean(a.pi, d, a.sigma)?;
                            forecast_monte_carlo(&spec, n, a.reps, &StreamRng::keyed(cli.seed(), &[i as u64, j as u64]))?
                        }
                    });
                }
            }
            rows
        }
    };
    let prov = provenance(
        "diagnose",
        cli.seed(),
        json!({
            "input": a.input, "delta": deltas, "n": ns, "pi": a.pi, "sigma": a.sigma,
            "method": format!("{:?}", a.method), "reps": a.reps, "b": a.b,
        }),
    );
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => emit_csv(cli.out.as_deref(), &prov, |w| write_forecast_csv(&rows, w))?,
        Format::Json => emit_json(cli.out.as_deref(), prov, json!({ "forecasts": rows }))?,
    }
    Ok(false)
}

fn grid_arg(g: &Option<List<f64>>) -> Result<Option<GridSpec>, Failure> {
    match g {
        None => Ok(None),
        Some(List(v)) => {
            if v.len() != 3 {
                return Err(Failure::Input("--grid takes lo,hi,points".into()));
            }
            if v[2].fract() != 0.0 || v[2] < 3.0 {
                return Err(Failure::Input("--grid points must be an integer of at least 3".into()));
            }
            Ok(Some(GridSpec::new(v[0], v[1], v[2] as usize)?))
        }
    }
}

fn set_body(set: &ConfidenceSet) -> Value {
    json!({ "set": set })
}

fn invert(cli: &Cli, a: &InvertArgs) -> Outcome {
    let y = read_sample(&a.input)?;
    let k = y.cumulants()?;
    let grid = grid_arg(&a.grid)?;
    let format = cli.format.unwrap_or(Format::Csv);
    match a.method {
        InvertMethod::Wald2d => {
            let axis = grid.unwrap_or_else(|| GridSpec::default_mean_axis(&k, a.sigma));
            let g = Grid2d { mu0: axis, mu1: axis };
            let set = wald_invert_2d(&y, a.pi, a.sigma, &g, a.alpha)?;
            let prov = provenance(
                "invert",
                cli.seed(),
                json!({ "input": a.input, "pi": a.pi, "sigma": a.sigma, "method": "wald2d", "alpha": a.alpha, "grid": g }),
            );
            match format {
                Format::Csv => emit_csv(cli.out.as_deref(), &prov, |w| set.write_csv(w))?,
                Format::Json => emit_json(cli.out.as_deref(), prov, json!({ "set": set }))?,
            }
            Ok(set.warning.is_some())
        }
        m => {
            let g = grid.unwrap_or_else(|| GridSpec::default_delta(&k, a.pi, a.sigma));
            let wald = wald_invert_1d(&y, a.pi, a.sigma, &g, a.alpha)?;
            let boot = match m {
                InvertMethod::Gridboot => {
                    Some(grid_bootstrap_1d(&y, a.pi, a.sigma, &g, a.b, a.alpha, &StreamRng::keyed(cli.seed(), &[0]))?)
                }
                _ => None,
            };
            let prov = provenance(
                "invert",
                cli.seed(),
                json!({
                    "input": a.input, "pi": a.pi, "sigma": a.sigma, "method": format!("{m:?}").to_lowercase(),
                    "alpha": a.alpha, "b": a.b, "grid": g,
                }),
            );
            let main = boot.as_ref().unwrap_or(&wald);
            let warn = main.warning.is_some();
            match format {
                Format::Csv => emit_csv(cli.out.as_deref(), &prov, |w| write_pvalue_curve(boot.as_ref(), &wald, w))?,
                Format::Json => emit_json(cli.out.as_deref(), prov, set_body(main))?,
            }
            Ok(warn)
        }
    }
}

fn ps_csv(r: &PSReport, w: &mut Vec<u8>) -> mixpath::Result<()> {
    writeln!(w, "quantity,scale,lo,hi")?;
    let e = &r.estimates;
    let mut rows: Vec<(&str, &str, f64, f64)> = Vec::new();
    if let Some(itt) = &e.itt {
        rows.extend(itt.itt_c.iter().map(|i| ("itt_c", "standardized", i.lo, i.hi)));
        rows.extend(itt.itt_n.iter().map(|i| ("itt_n", "standardized", i.lo, i.hi)));
    }
    rows.extend(r.raw_itt_c.iter().map(|i| ("itt_c", "raw", i.lo, i.hi)));
    rows.extend(r.raw_itt_n.iter().map(|i| ("itt_n", "raw", i.lo, i.hi)));
    if let Some(m) = &e.itt_mle {
        rows.extend(m.itt_c.iter().map(|i| ("itt_c_mle", "standardized", i.lo, i.hi)));
        rows.extend(m.itt_n.iter().map(|i| ("itt_n_mle", "standardized", i.lo, i.hi)));
    }
    if let Some(c) = &e.control {
        if let Some(s) = &c.delta_gridboot {
            rows.extend(s.accepted.iter().map(|i| ("delta_gridboot", "standardized", i.lo, i.hi)));
        }
        if let Some(s) = &c.delta_wald {
            rows.extend(s.accepted.iter().map(|i| ("delta_wald", "standardized", i.lo, i.hi)));
        }
        if let Some(ci) = c.mle.wald_ci {
            rows.push(("delta_mle_wald", "standardized", ci.lo, ci.hi));
        }
    }
    for (q, s, lo, hi) in rows {
        writeln!(w, "{q},{s},{lo},{hi}")?;
    }
    Ok(())
}

fn prinstrat(cli: &Cli, a: &PrinstratArgs) -> Outcome {
    let data = match &a.input {
        Some(p) => {
            let f = fs::File::open(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            PSDataset::read_csv(io::BufReader::new(f)).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?
        }
        None => jobs2_synthetic(),
    };
    let cfg = PSConfig {
        alpha: a.alpha,
        seed: cli.seed(),
        b: a.b,
        forecast_b: a.b,
        berger_boos: a.berger_boos.then(BergerBoosConfig::default),
        ..PSConfig::default()
    };
    let report = analyze(&data, &cfg)?;
    let prov = provenance(
        "prinstrat",
        cli.seed(),
        json!({ "input": a.input.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "bundled synthetic JOBS II".into()), "config": cfg }),
    );
    let flag = report.estimates.control.as_ref().is_some_and(|c| flagged(&c.mle));
    match cli.format.unwrap_or(Format::Json) {
        Format::Json => emit_json(cli.out.as_deref(), prov, json!({ "report": report }))?,
        Format::Csv => emit_csv(cli.out.as_deref(), &prov, |w| ps_csv(&report, w))?,
    }
    Ok(flag)
}

fn write_bundle(dir: &Path, prov: &Value, files: &[(String, String)], summary: Value) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let header = csv_header(prov);
    for (name, contents) in files {
        fs::write(dir.join(name), format!("{header}{contents}"))?;
    }
    let mut s = serde_json::to_string_pretty(&json!({ "provenance": prov, "summary": summary }))?;
    s.push('\n');
    fs::write(dir.join("summary.json"), s)?;
    Ok(())
}

fn study(cli: &Cli, a: &StudyArgs) -> Outcome {
    let text = fs::read_to_string(&a.config).map_err(|e| Failure::Input(format!("{}: {e}", a.config.display())))?;
    let is_toml = a.config.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    let mut cfg = if is_toml { StudyConfig::from_toml(&text)? } else { StudyConfig::from_json(&text)? };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let r = run_study(&cfg)?;
    let prov = provenance("study", cfg.seed, serde_json::to_value(&cfg)?);
    let mut est = Vec::new();
    r.write_estimator_csv(&mut est)?;
    let est = String::from_utf8(est).expect("UTF-8 CSV");
    match &cli.out {
        Some(dir) => {
            let mut files = vec![("estimators.csv".to_string(), est)];
            if !cfg.inference.is_empty() {
                let mut cov = Vec::new();
                r.write_coverage_csv(&mut cov)?;
                files.push(("coverage.csv".into(), String::from_utf8(cov).expect("UTF-8 CSV")));
            }
            if cfg.keep_replicates {
                let mut rep = Vec::new();
                r.write_replicates_csv(&mut rep)?;
                files.push(("replicates.csv".into(), String::from_utf8(rep).expect("UTF-8 CSV")));
            }
            write_bundle(dir, &prov, &files, serde_json::to_value(&r.cells)?)?;
        }
        None => match cli.format.unwrap_or(Format::Csv) {
            Format::Csv => emit(None, format!("{}{est}", csv_header(&prov)).as_bytes())?,
            Format::Json => emit_json(None, prov, json!({ "cells": r.cells }))?,
        },
    }
    Ok(r.cells.iter().any(|c| c.aborted.is_some()))
}

fn replicate(cli: &Cli, a: &ReplicateArgs) -> Outcome {
    if !preset_ids().contains(&a.id.as_str()) {
        let list: Vec<String> = PRESETS.iter().map(|(id, d)| format!("  {id:<15} {d}")).collect();
        return Err(Failure::Input(format!("unknown figure id {:?}; available:\n{}", a.id, list.join("\n"))));
    }
    let opts = PresetOptions { seed: cli.seed(), reps: a.reps, b: a.b };
    let bundle = run_preset(&a.id, &opts)?;
    let prov = provenance(
        "replicate",
        cli.seed(),
        json!({ "id": bundle.id, "description": bundle.description, "options": opts, "preset": bundle.config }),
    );
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(format!("replicate-{}", a.id)));
    let files: Vec<(String, String)> = bundle.files.into_iter().map(|f| (f.name, f.contents)).collect();
    write_bundle(&dir, &prov, &files, bundle.summary)?;
    eprintln!("wrote {} file(s) to {}", files.len() + 1, dir.display());
    Ok(false)
}

//! Command-line harness: newsvendor disappointment curves, frontiers, the
//! Sanov check, conjugacy checks and one-off rate evaluations.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ldp_dro::dro::AmbiguitySpec;
use ldp_dro::harness::{
    estimate_decay_rate, frontier, run_curve, sanov_check, write_csv, write_curve_records, write_frontier_csv,
    write_frontier_records, ConfigFile, CurvePoint, HalfSpace,
};
use ldp_dro::processes::{Family, FiniteIidModel};
use ldp_dro::rates::{cramer_rate, limit_log_mgf, numerical_conjugate, MgfFamily, RateSpec};
use ldp_dro::{Error, ExtendedReal, Result};

#[derive(Parser)]
#[command(name = "ldp-dro", version, about = "Distributionally robust predictors from large-deviation rate functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Disappointment curve of one predictor on the newsvendor scenario.
    Newsvendor(NewsvendorArgs),
    /// Decay-rate / in-sample-cost frontier over a radius grid.
    Frontier(FrontierArgs),
    /// Monte-Carlo check of the Sanov rate of a half-space event.
    SanovCheck(SanovArgs),
    /// Compares closed-form Cramer functions with the numerical conjugate.
    ConjugateCheck(ConjugateArgs),
    /// Evaluates a single rate function.
    RateEval(RateArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Predictor {
    Empirical,
    Penalized,
    Entropy,
    Wasserstein,
    Moment,
}

impl Predictor {
    fn spec(self, radius: f64, moments: usize) -> AmbiguitySpec {
        match self {
            Predictor::Empirical => AmbiguitySpec::Empirical,
            Predictor::Penalized => AmbiguitySpec::Penalized { radius },
            Predictor::Entropy => AmbiguitySpec::Entropy { radius },
            Predictor::Wasserstein => AmbiguitySpec::Wasserstein { radius },
            Predictor::Moment => AmbiguitySpec::Moment { radius, moments },
        }
    }
}

#[derive(Args)]
struct Sampling {
    /// Comma-separated horizons, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    tgrid: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON experiment file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Sampling {
    fn load(&self) -> Result<ConfigFile> {
        let mut file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        if file.process.is_none() && file.scenario.is_none() {
            file.scenario = Some("newsvendor".into());
        }
        if let Some(t) = &self.tgrid {
            file.tgrid = Some(t.clone());
        }
        file.trials = self.trials.or(file.trials);
        file.seed = self.seed.or(file.seed);
        file.out = self.out.clone().or(file.out);
        Ok(file)
    }
}

#[derive(Args)]
struct NewsvendorArgs {
    #[arg(long, value_enum, default_value = "empirical")]
    predictor: Predictor,
    #[arg(long, default_value_t = 0.0)]
    radius: f64,
    #[arg(long, default_value_t = 4)]
    moments: usize,
    #[command(flatten)]
    sampling: Sampling,
}

#[derive(Args)]
struct FrontierArgs {
    /// Comma-separated radii swept for every predictor.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Comma-separated predictors.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "entropy,wasserstein")]
    predictors: Vec<Predictor>,
    #[arg(long, default_value_t = 4)]
    moments: usize,
    #[command(flatten)]
    sampling: Sampling,
}

#[derive(Args)]
struct SanovArgs {
    /// Comma-separated pmf of the i.i.d. process.
    #[arg(long, value_delimiter = ',', default_value = "0.7,0.3")]
    theta: Vec<f64>,
    /// 1-based state whose frequency defines the event.
    #[arg(long, default_value_t = 1)]
    state: usize,
    /// Event is `frequency of state >= threshold`.
    #[arg(long, default_value_t = 0.85)]
    threshold: f64,
    #[arg(long, value_delimiter = ',', default_value = "20,40,60,80,100,120")]
    tgrid: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyName {
    Normal,
    Exponential,
    Gamma,
    Poisson,
    Bernoulli,
    Geometric,
    Binomial,
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: FamilyName,
    /// Gamma shape.
    #[arg(long, default_value_t = 2.0)]
    shape: f64,
    /// Binomial number of trials.
    #[arg(long, default_value_t = 10)]
    trials: u32,
    /// Normal covariance, row-major and comma-separated.
    #[arg(long, value_delimiter = ',')]
    cov: Option<Vec<f64>>,
}

impl FamilyArgs {
    fn family(&self, dim: usize) -> Family {
        match self.family {
            FamilyName::Normal => {
                let cov = self.cov.clone().unwrap_or_else(|| {
                    (0..dim * dim).map(|k| if k / dim == k % dim { 1.0 } else { 0.0 }).collect()
                });
                Family::Normal { cov }
            }
            FamilyName::Exponential => Family::Exponential,
            FamilyName::Gamma => Family::Gamma { shape: self.shape },
            FamilyName::Poisson => Family::Poisson,
            FamilyName::Bernoulli => Family::Bernoulli,
            FamilyName::Geometric => Family::Geometric,
            FamilyName::Binomial => Family::Binomial { trials: self.trials },
        }
    }
}

#[derive(Args)]
struct ConjugateArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Parameter (comma-separated for the normal family).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Vec<f64>,
    /// Grid size per coordinate.
    #[arg(long, default_value_t = 20)]
    points: usize,
    /// Largest tolerated absolute discrepancy.
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RateKind {
    RelativeEntropy,
    ConditionalRelativeEntropy,
    GaussianQuadratic,
    ArLeastSquares,
    ArYuleWalker,
    Cramer,
}

#[derive(Args)]
struct RateArgs {
    #[arg(long, value_enum)]
    kind: RateKind,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    s: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Vec<f64>,
    /// Covariance for the quadratic rate, row-major.
    #[arg(long, value_delimiter = ',')]
    cov: Option<Vec<f64>>,
    /// Family for the Cramer rate.
    #[arg(long, value_enum)]
    family: Option<FamilyName>,
    #[arg(long, default_value_t = 2.0)]
    shape: f64,
    #[arg(long, default_value_t = 10)]
    trials: u32,
}

fn emit_config(value: &serde_json::Value) {
    eprintln!("{}", serde_json::to_string_pretty(value).expect("config serializes"));
}

fn write_curve(points: &[CurvePoint], out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => write_csv(points, path),
        None => write_curve_records(points, std::io::stdout().lock())
            .map_err(|e| Error::Csv { path: PathBuf::from("<stdout>"), source: e }),
    }
}

fn newsvendor(args: NewsvendorArgs) -> Result<()> {
    let file = args.sampling.load()?;
    let spec = match (&file.spec, args.predictor) {
        (Some(spec), Predictor::Empirical) if args.radius == 0.0 => spec.clone(),
        _ => args.predictor.spec(args.radius, args.moments),
    };
    let config = file.resolve(spec)?;
    emit_config(&serde_json::to_value(&config).expect("config serializes"));
    let curve = run_curve(&config)?;
    match estimate_decay_rate(&curve) {
        Ok(d) => eprintln!("decay rate {} (r^2 {}, {} points)", d.rate, d.r_squared, d.points_used),
        Err(e) => eprintln!("decay rate unavailable: {e}"),
    }
    write_curve(&curve.points, config.output.as_ref())
}

fn run_frontier(args: FrontierArgs) -> Result<()> {
    let file = args.sampling.load()?;
    let radii = args.radii.clone().or(file.radii.clone()).unwrap_or_else(|| vec![0.0, 0.01, 0.05, 0.1]);
    let specs: Vec<AmbiguitySpec> = match &file.specs {
        Some(specs) if args.predictors.is_empty() => specs.clone(),
        _ => args.predictors.iter().map(|p| p.spec(0.0, args.moments)).collect(),
    };
    let base = file.resolve(specs[0].clone())?;
    emit_config(&json!({ "base": base, "specs": specs, "radii": radii }));
    let points = frontier(&base, &specs, &radii)?;
    match &base.output {
        Some(path) => write_frontier_csv(&points, path),
        None => write_frontier_records(&points, std::io::stdout().lock())
            .map_err(|e| Error::Csv { path: PathBuf::from("<stdout>"), source: e }),
    }
}

fn sanov(args: SanovArgs) -> Result<()> {
    let model = FiniteIidModel::new(args.theta.clone())?;
    if args.state == 0 || args.state > model.num_states() {
        return Err(Error::Usage(format!("state {} outside 1..={}", args.state, model.num_states())));
    }
    let event = HalfSpace::component(model.num_states(), args.state, args.threshold);
    emit_config(&json!({
        "theta": args.theta, "state": args.state, "threshold": args.threshold,
        "tgrid": args.tgrid, "trials": args.trials, "seed": args.seed,
    }));
    let report = sanov_check(&model, &event, &args.tgrid, args.trials, args.seed)?;
    let out = json!({
        "predicted_rate": report.predicted,
        "measured_rate": report.measured.rate,
        "r_squared": report.measured.r_squared,
        "points_used": report.measured.points_used,
        "hits": report.hits,
        "trials": report.trials,
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("report serializes"));
    Ok(())
}

/// Grid of `points` values strictly inside the mean range of the family.
fn s_grid(family: &Family, theta: &[f64], points: usize) -> Vec<f64> {
    let (lo, hi) = match family {
        Family::Normal { .. } => (theta[0] - 3.0, theta[0] + 3.0),
        Family::Exponential | Family::Gamma { .. } | Family::Poisson => {
            let mean = family.mean(theta)[0];
            (0.1 * mean, 4.0 * mean)
        }
        Family::Bernoulli => (0.02, 0.98),
        Family::Geometric => {
            let mean = family.mean(theta)[0];
            (1.05, 1.0 + 4.0 * (mean - 1.0).max(0.25))
        }
        Family::Binomial { trials } => (0.02 * *trials as f64, 0.98 * *trials as f64),
    };
    (0..points).map(|k| lo + (hi - lo) * k as f64 / (points.max(2) - 1) as f64).collect()
}

fn conjugate_check(args: ConjugateArgs) -> Result<bool> {
    let family = args.family.family(args.theta.len());
    family.validate_nuisance()?;
    family.validate_theta(&args.theta)?;
    emit_config(&json!({ "family": family, "theta": args.theta, "points": args.points, "tolerance": args.tolerance }));
    let dim = family.dim();
    let mut worst: f64 = 0.0;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "s,closed_form,numerical,abs_diff").ok();
    for x in s_grid(&family, &args.theta, args.points) {
        // Multivariate normals are probed along the first coordinate.
        let mut s = args.theta.clone();
        s[0] = x;
        let closed = cramer_rate(&family, &s, &args.theta)?;
        let numeric = numerical_conjugate(
            |l| limit_log_mgf(MgfFamily::Parametric(&family), l, &args.theta).unwrap_or(ExtendedReal::PosInfinity),
            &s[..dim],
        );
        let diff = match (closed, numeric) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => (a - b).abs(),
            (ExtendedReal::PosInfinity, ExtendedReal::PosInfinity) => 0.0,
            _ => f64::INFINITY,
        };
        worst = worst.max(diff);
        writeln!(out, "{x},{closed},{numeric},{diff}").ok();
    }
    eprintln!("largest discrepancy {worst}");
    Ok(worst <= args.tolerance)
}

fn rate_eval(args: RateArgs) -> Result<()> {
    let spec = match args.kind {
        RateKind::RelativeEntropy => RateSpec::RelativeEntropy,
        RateKind::ConditionalRelativeEntropy => {
            let m = (args.s.len() as f64).sqrt().round() as usize;
            RateSpec::ConditionalRelativeEntropy { m }
        }
        RateKind::GaussianQuadratic => {
            let d = args.s.len();
            let cov = args
                .cov
                .clone()
                .unwrap_or_else(|| (0..d * d).map(|k| if k / d == k % d { 1.0 } else { 0.0 }).collect());
            RateSpec::GaussianQuadratic { cov }
        }
        RateKind::ArLeastSquares => RateSpec::ArLeastSquares,
        RateKind::ArYuleWalker => RateSpec::ArYuleWalker,
        RateKind::Cramer => {
            let name = args.family.ok_or_else(|| Error::Usage("--family is required for the cramer rate".into()))?;
            let fa = FamilyArgs { family: name, shape: args.shape, trials: args.trials, cov: args.cov.clone() };
            RateSpec::Cramer { family: fa.family(args.theta.len()) }
        }
    };
    spec.validate()?;
    emit_config(&json!({ "rate": spec, "s": args.s, "theta": args.theta }));
    println!("{}", spec.eval(&args.s, &args.theta)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Newsvendor(a) => newsvendor(a).map(|_| true),
        Command::Frontier(a) => run_frontier(a).map(|_| true),
        Command::SanovCheck(a) => sanov(a).map(|_| true),
        Command::ConjugateCheck(a) => conjugate_check(a),
        Command::RateEval(a) => rate_eval(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

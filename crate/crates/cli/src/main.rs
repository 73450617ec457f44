use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use fermi_equilibria::collision::{
    dissipation_estimate, equilibrium_residual, probe_velocities, CollisionError,
};
use fermi_equilibria::density::{
    AnnulusDensity, BallDensity, Density, FermiDiracDensity, Moments, RadialGridDensity,
    DEFAULT_EQUALITY_TOL,
};
use fermi_equilibria::equilibrium::{
    assess, invert_parameters, verify_classification, Regime, VerifyOptions,
};
use fermi_equilibria::fermi::{
    fermi_dirac_moment, fermi_i, fermi_j, fermi_p, sphere_area, threshold, Dimension,
    FermiIntegralOrder,
};
use fermi_equilibria::geometry::{
    annulus_lambda_bound, check_condition_41, lambda_estimate, AnnulusShape, BallShape,
    ReuleauxTriangle, ShapeOracle, DEFAULT_SLACK,
};
use fermi_equilibria::numerics::{McConfig, QuadratureSpec};

const SCHEMA: &str = "fermi-equilibria/1";

/// Fermi-Dirac Boltzmann equilibria: Fermi integrals, moment classification,
/// collision functionals and the ball-characterization checker.
#[derive(Parser, Debug)]
#[command(name = "fermi-eq", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct Global {
    /// Emit the versioned JSON schema instead of a table.
    #[arg(long, global = true)]
    #[serde(skip)]
    json: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    #[serde(skip)]
    format: Format,
    /// Leave the timestamp out of the manifest.
    #[arg(long, global = true)]
    #[serde(skip)]
    no_timestamp: bool,
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1e-12)]
    abs_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    rel_tol: f64,
    #[arg(long, global = true, default_value_t = 2000)]
    max_subdivisions: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(untagged)]
enum Command {
    /// Fermi integrals I_s, J_s and the ratio P(t), or a P(t) curve.
    FermiInt(FermiIntArgs),
    /// Classify a moment pair (M0, M2) as Fermi-Dirac, ball or infeasible.
    Classify(ClassifyArgs),
    /// Recover the Fermi-Dirac coefficients (a, b) from (M0, M2).
    Invert(InvertArgs),
    /// Moments, entropy and classification of a radial density from CSV.
    Moments(MomentsArgs),
    /// Normalized collision residual of a density.
    Residual(ResidualArgs),
    /// Monte Carlo entropy dissipation of a density.
    Dissipation(DissipationArgs),
    /// Ball-characterization checks on a compact shape.
    Geometry {
        #[command(subcommand)]
        #[serde(flatten)]
        action: GeometryAction,
    },
    /// Classify a density and verify entropy, ratio and functional form.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Serialize)]
struct FermiIntArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    /// Number of points of a log-spaced P(t) curve.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, default_value_t = 1e-2)]
    t_min: f64,
    #[arg(long, default_value_t = 1e2)]
    t_max: f64,
}

#[derive(Args, Debug, Serialize)]
struct ClassifyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m0: f64,
    #[arg(long)]
    m2: f64,
    #[arg(long, default_value_t = DEFAULT_EQUALITY_TOL)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct InvertArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m0: f64,
    #[arg(long)]
    m2: f64,
}

#[derive(Args, Debug, Serialize)]
struct MomentsArgs {
    /// CSV with columns r,value.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_EQUALITY_TOL)]
    tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Fd,
    Ball,
    Annulus,
    Grid,
}

#[derive(Args, Debug, Serialize)]
struct DensityArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Ball radius.
    #[arg(long = "R", visible_alias = "radius", default_value_t = 1.0)]
    radius: f64,
    /// Annulus inner radius.
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// CSV with columns r,value, for `--kind grid`.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ResidualArgs {
    #[command(flatten)]
    #[serde(flatten)]
    density: DensityArgs,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Number of probe velocities.
    #[arg(long, default_value_t = 4)]
    probes: usize,
    /// Pass if the residual is within this many combined errors.
    #[arg(long, default_value_t = 5.0)]
    sigmas: f64,
}

#[derive(Args, Debug, Serialize)]
struct DissipationArgs {
    #[command(flatten)]
    #[serde(flatten)]
    density: DensityArgs,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 3.0)]
    sigmas: f64,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(untagged)]
enum GeometryAction {
    /// Sample boundary pairs and mid-sphere directions looking for a witness.
    Check(GeometryCheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Shape {
    Ball,
    Reuleaux,
    Annulus,
}

#[derive(Args, Debug, Serialize)]
struct GeometryCheckArgs {
    #[arg(long, value_enum)]
    shape: Shape,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Reuleaux triangle width.
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    #[arg(long, default_value_t = 10_000)]
    pairs: u64,
    #[arg(long, default_value_t = DEFAULT_SLACK)]
    slack: f64,
    #[arg(long, default_value_t = 10)]
    max_witnesses: usize,
    /// Annulus only: pairs for the sphere-fraction minimum.
    #[arg(long, default_value_t = 500)]
    lambda_pairs: u64,
    #[arg(long, default_value_t = 2000)]
    directions: u64,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    density: DensityArgs,
    #[arg(long, default_value_t = DEFAULT_EQUALITY_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    form_tol: f64,
    #[arg(long, default_value_t = 1e-9)]
    entropy_tol: f64,
    #[arg(long, default_value_t = 256)]
    grid_nodes: usize,
}

enum Failure {
    Usage(String),
    Numeric(String),
}

type Run<T> = Result<T, Failure>;

fn usage(e: impl Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn numeric(e: impl Display) -> Failure {
    Failure::Numeric(e.to_string())
}

struct Series {
    headers: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

struct Outcome {
    result: Value,
    series: Option<Series>,
    pass: bool,
}

impl Outcome {
    fn new(result: Value, pass: bool) -> Self {
        Outcome {
            result,
            series: None,
            pass,
        }
    }
}

struct Ctx {
    spec: QuadratureSpec,
    seed: u64,
    workers: usize,
}

impl Ctx {
    fn mc(&self, samples: u64) -> Run<McConfig> {
        McConfig::new(self.seed, samples, self.workers).map_err(usage)
    }
}

fn dim(n: usize) -> Run<Dimension> {
    Dimension::new(n).map_err(usage)
}

fn leg(name: &str, value: f64, pass: bool) -> Value {
    json!({ "name": name, "value": value, "pass": pass })
}

fn build_density(d: &DensityArgs) -> Run<Density> {
    let n = dim(d.n)?;
    Ok(match d.kind {
        Kind::Fd => FermiDiracDensity::centered(d.a, d.b, n)
            .map_err(usage)?
            .into(),
        Kind::Ball => BallDensity::centered(d.radius, n).map_err(usage)?.into(),
        Kind::Annulus => AnnulusDensity::new(d.eps, n).map_err(usage)?.into(),
        Kind::Grid => {
            let path = d
                .input
                .as_ref()
                .ok_or_else(|| usage("--kind grid needs --input"))?;
            RadialGridDensity::from_csv_path(path, vec![0.0; n.get()], n)
                .map_err(usage)?
                .into()
        }
    })
}

fn moments_value(m: &Moments) -> Value {
    json!({ "m0": m.m0, "m2": m.m2, "ratio": m.ratio(), "v0": m.v0 })
}

fn fermi_int(a: &FermiIntArgs, ctx: &Ctx) -> Run<Outcome> {
    let n = dim(a.n)?;
    let norm = sphere_area(n).powf(2.0 / n.as_f64());
    if let Some(points) = a.points {
        if points < 2 || !(a.t_min > 0.0 && a.t_max > a.t_min) {
            return Err(usage(
                "a curve needs --points >= 2 and 0 < --t-min < --t-max",
            ));
        }
        let (lo, hi) = (a.t_min.ln(), a.t_max.ln());
        let mut rows = Vec::with_capacity(points);
        for i in 0..points {
            let t = (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp();
            let p = fermi_p(t, n, &ctx.spec).map_err(numeric)?;
            rows.push(vec![t, p, p / norm]);
        }
        let result = json!({
            "n": a.n,
            "threshold": threshold(n),
            "curve": rows.iter().map(|r| json!({ "t": r[0], "p": r[1], "p_normalized": r[2] })).collect::<Vec<_>>(),
        });
        return Ok(Outcome {
            result,
            series: Some(Series {
                headers: vec!["t", "p", "p_normalized"],
                rows,
            }),
            pass: true,
        });
    }
    let s =
        a.s.ok_or_else(|| usage("--s is required unless --points is given"))?;
    let t =
        a.t.ok_or_else(|| usage("--t is required unless --points is given"))?;
    let order = FermiIntegralOrder::new(s).map_err(usage)?;
    let order2 = FermiIntegralOrder::new(s + 2.0).map_err(usage)?;
    let i = fermi_i(order, t, &ctx.spec).map_err(numeric)?;
    let j = fermi_j(order, t, &ctx.spec).map_err(numeric)?;
    let j2 = fermi_j(order2, t, &ctx.spec).map_err(numeric)?;
    let p = fermi_p(t, n, &ctx.spec).map_err(numeric)?;
    let parts = (i - 2.0 * t / (s + 1.0) * j2).abs() / i;
    let m0 = fermi_dirac_moment(0.0, 1.0 / t, 1.0, n, &ctx.spec).map_err(numeric)?;
    let m2 = fermi_dirac_moment(2.0, 1.0 / t, 1.0, n, &ctx.spec).map_err(numeric)?;
    let moment_ratio = (m2 / m0.powf(n.ratio_exponent()) - p / norm).abs() / (p / norm);
    let tol = 100.0 * ctx.spec.rel_tol;
    let result = json!({
        "n": a.n,
        "s": s,
        "t": t,
        "i_s": i,
        "j_s": j,
        "j_s_plus_2": j2,
        "p": p,
        "p_normalized": p / norm,
        "threshold": threshold(n),
        "residuals": [
            leg("integration_by_parts", parts, parts <= tol),
            leg("moment_ratio", moment_ratio, moment_ratio <= tol),
        ],
    });
    Ok(Outcome::new(result, parts <= tol && moment_ratio <= tol))
}

fn classification_outcome(
    m: &Moments,
    tol: f64,
    ctx: &Ctx,
    extra: Map<String, Value>,
) -> Run<Outcome> {
    let c = assess(m, tol, &ctx.spec).map_err(numeric)?;
    let mut result = Map::new();
    result.insert("moments".into(), moments_value(m));
    result.insert(
        "classification".into(),
        serde_json::to_value(c).map_err(numeric)?,
    );
    result.extend(extra);
    Ok(Outcome::new(
        Value::Object(result),
        c.regime != Regime::Infeasible,
    ))
}

fn classify_cmd(a: &ClassifyArgs, ctx: &Ctx) -> Run<Outcome> {
    let m = Moments::centered(a.m0, a.m2, dim(a.n)?).map_err(usage)?;
    classification_outcome(&m, a.tol, ctx, Map::new())
}

fn invert_cmd(a: &InvertArgs, ctx: &Ctx) -> Run<Outcome> {
    let n = dim(a.n)?;
    let m = Moments::centered(a.m0, a.m2, n).map_err(usage)?;
    let (fa, fb) = invert_parameters(&m, &ctx.spec).map_err(numeric)?;
    let m0 = fermi_dirac_moment(0.0, fa, fb, n, &ctx.spec).map_err(numeric)?;
    let m2 = fermi_dirac_moment(2.0, fa, fb, n, &ctx.spec).map_err(numeric)?;
    let result = json!({
        "a": fa,
        "b": fb,
        "residuals": { "m0": (m0 - a.m0).abs() / a.m0, "m2": (m2 - a.m2).abs() / a.m2 },
    });
    Ok(Outcome::new(result, true))
}

fn moments_cmd(a: &MomentsArgs, ctx: &Ctx) -> Run<Outcome> {
    let n = dim(a.n)?;
    let f: Density = RadialGridDensity::from_csv_path(&a.input, vec![0.0; n.get()], n)
        .map_err(usage)?
        .into();
    let m = f.compute_moments(&ctx.spec).map_err(numeric)?;
    let entropy = f.entropy(&ctx.spec).map_err(numeric)?;
    let mut extra = Map::new();
    extra.insert("entropy".into(), json!(entropy));
    extra.insert("threshold".into(), json!(threshold(n)));
    classification_outcome(&m, a.tol, ctx, extra)
}

fn residual_cmd(a: &ResidualArgs, ctx: &Ctx) -> Run<Outcome> {
    let f = build_density(&a.density)?;
    let mc = ctx.mc(a.samples)?;
    let vs = probe_velocities(&f, a.probes.max(1), &ctx.spec).map_err(numeric)?;
    let rep = equilibrium_residual(&f, &vs, &ctx.spec, &mc).map_err(numeric)?;
    let bound = a.sigmas * rep.combined_error();
    let pass = rep.residual <= bound;
    let result = json!({
        "density": f,
        "value": rep.residual,
        "std_error": rep.mc_error,
        "quadrature_error": rep.quadrature_error,
        "combined_error": rep.combined_error(),
        "legs": [leg("equilibrium", rep.residual, pass)],
        "points": rep.points,
    });
    Ok(Outcome::new(result, pass))
}

fn dissipation_cmd(a: &DissipationArgs, ctx: &Ctx) -> Run<Outcome> {
    let f = build_density(&a.density)?;
    let mc = ctx.mc(a.samples)?;
    Ok(match dissipation_estimate(&f, &ctx.spec, &mc) {
        Ok(d) => {
            let pass = d.mean.abs() <= a.sigmas * d.std_error;
            Outcome::new(
                json!({
                    "density": f,
                    "value": d.mean,
                    "std_error": d.std_error,
                    "infinite_terms": 0,
                    "legs": [leg("vanishes", d.mean, pass)],
                }),
                pass,
            )
        }
        Err(CollisionError::InfiniteDissipation { count }) => Outcome::new(
            json!({
                "density": f,
                "value": "inf",
                "std_error": null,
                "infinite_terms": count,
                "legs": [{ "name": "vanishes", "value": "inf", "pass": false }],
            }),
            false,
        ),
        Err(e) => return Err(numeric(e)),
    })
}

fn geometry_cmd(a: &GeometryCheckArgs, ctx: &Ctx) -> Run<Outcome> {
    let n = dim(a.n)?;
    let mc = ctx.mc(a.pairs)?;
    let (shape, mut lambda): (Box<dyn ShapeOracle>, Option<Value>) = match a.shape {
        Shape::Ball => (Box::new(BallShape::unit(n)), None),
        Shape::Reuleaux => {
            if a.n != 2 {
                return Err(usage("the Reuleaux triangle is planar; use --n 2"));
            }
            (
                Box::new(ReuleauxTriangle::new(a.width).map_err(usage)?),
                None,
            )
        }
        Shape::Annulus => (
            Box::new(AnnulusShape::new(a.eps, n).map_err(usage)?),
            Some(Value::Null),
        ),
    };
    let rep = check_condition_41(shape.as_ref(), &mc, a.slack).map_err(numeric)?;
    if lambda.is_some() {
        let annulus = AnnulusShape::new(a.eps, n).map_err(usage)?;
        let est =
            lambda_estimate(&annulus, a.directions, &ctx.mc(a.lambda_pairs)?).map_err(numeric)?;
        let bound = annulus_lambda_bound(a.eps, n, &ctx.spec).map_err(numeric)?;
        let pass = est.lambda_hat >= bound - 3.0 * est.std_error;
        lambda = Some(json!({
            "lambda_hat": est.lambda_hat,
            "std_error": est.std_error,
            "bound": bound,
            "pairs": est.pairs,
            "directions_per_pair": est.directions_per_pair,
            "worst_pair": est.worst_pair,
            "bias": "minimum over sampled pairs, biased low",
            "legs": [leg("lambda_above_bound", est.lambda_hat - bound, pass)],
        }));
    }
    let result = json!({
        "shape": a.shape,
        "pairs_tested": rep.pairs_tested,
        "failures_found": rep.failures.len(),
        "pass": rep.pass,
        "witnesses": rep.failures.iter().take(a.max_witnesses).collect::<Vec<_>>(),
        "lambda": lambda,
    });
    Ok(Outcome::new(result, rep.pass))
}

fn verify_cmd(a: &VerifyArgs, ctx: &Ctx) -> Run<Outcome> {
    let f = build_density(&a.density)?;
    let m = f.compute_moments(&ctx.spec).map_err(numeric)?;
    let c = assess(&m, a.tol, &ctx.spec).map_err(numeric)?;
    let opts = VerifyOptions {
        form_tol: a.form_tol,
        entropy_tol: a.entropy_tol,
        grid_nodes: a.grid_nodes,
        ..VerifyOptions::default()
    };
    let rep = verify_classification(&f, &c, &opts, &ctx.spec).map_err(numeric)?;
    let pass = rep.pass;
    let result = json!({ "density": f, "moments": moments_value(&m), "report": rep });
    Ok(Outcome::new(result, pass))
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::FermiInt(_) => "fermi-int",
        Command::Classify(_) => "classify",
        Command::Invert(_) => "invert",
        Command::Moments(_) => "moments",
        Command::Residual(_) => "residual",
        Command::Dissipation(_) => "dissipation",
        Command::Geometry {
            action: GeometryAction::Check(_),
        } => "geometry check",
        Command::Verify(_) => "verify",
    }
}

fn manifest(cli: &Cli) -> Value {
    let mut flags = match serde_json::to_value(&cli.command) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    };
    if let Ok(Value::Object(g)) = serde_json::to_value(&cli.global) {
        flags.extend(g);
    }
    let timestamp = if cli.global.no_timestamp {
        Value::Null
    } else {
        json!(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true))
    };
    json!({
        "subcommand": subcommand_name(&cli.command),
        "flags": flags,
        "seed": cli.global.seed,
        "versions": format!("fermi-eq {}", env!("CARGO_PKG_VERSION")),
        "timestamp": timestamp,
    })
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&key(k), x, out);
            }
        }
        Value::Array(xs) if xs.iter().all(|x| !x.is_object() && !x.is_array()) => {
            out.push((
                prefix.to_string(),
                xs.iter().map(scalar).collect::<Vec<_>>().join(" "),
            ));
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&key(&i.to_string()), x, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn write_table(out: &mut impl Write, o: &Outcome) -> std::io::Result<()> {
    if let Some(s) = &o.series {
        writeln!(
            out,
            "{}",
            s.headers
                .iter()
                .map(|h| format!("{h:>24}"))
                .collect::<String>()
        )?;
        for r in &s.rows {
            writeln!(
                out,
                "{}",
                r.iter().map(|x| format!("{x:>24.15e}")).collect::<String>()
            )?;
        }
        return Ok(());
    }
    let mut rows = Vec::new();
    flatten("", &o.result, &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        writeln!(out, "{k:<width$}  {v}")?;
    }
    writeln!(
        out,
        "{:<width$}  {}",
        "status",
        if o.pass { "PASS" } else { "FAIL" }
    )
}

fn write_csv(out: impl Write, o: &Outcome) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    match &o.series {
        Some(s) => {
            w.write_record(&s.headers)?;
            for r in &s.rows {
                w.write_record(r.iter().map(|x| format!("{x:e}")))?;
            }
        }
        None => {
            let mut rows = Vec::new();
            flatten("", &o.result, &mut rows);
            w.write_record(["key", "value"])?;
            for (k, v) in rows {
                w.write_record([k, v])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn run(cli: &Cli) -> Run<Outcome> {
    let g = &cli.global;
    let ctx = Ctx {
        spec: QuadratureSpec::new(g.abs_tol, g.rel_tol, g.max_subdivisions).map_err(usage)?,
        seed: g.seed,
        workers: g.workers,
    };
    match &cli.command {
        Command::FermiInt(a) => fermi_int(a, &ctx),
        Command::Classify(a) => classify_cmd(a, &ctx),
        Command::Invert(a) => invert_cmd(a, &ctx),
        Command::Moments(a) => moments_cmd(a, &ctx),
        Command::Residual(a) => residual_cmd(a, &ctx),
        Command::Dissipation(a) => dissipation_cmd(a, &ctx),
        Command::Geometry {
            action: GeometryAction::Check(a),
        } => geometry_cmd(a, &ctx),
        Command::Verify(a) => verify_cmd(a, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let manifest = manifest(&cli);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(&cli) {
        Ok(o) => {
            let written = if cli.global.json {
                let doc = json!({ "schema": SCHEMA, "manifest": manifest, "pass": o.pass, "result": o.result });
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&doc).expect("JSON values serialize")
                )
            } else if cli.global.format == Format::Csv {
                write_csv(&mut out, &o).map_err(std::io::Error::other)
            } else {
                write_table(&mut out, &o)
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
            if o.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n");
            eprintln!("{}", Cli::command().render_usage());
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            if cli.global.json {
                let doc =
                    json!({ "schema": SCHEMA, "manifest": manifest, "pass": false, "error": msg });
                let _ = writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&doc).expect("JSON values serialize")
                );
            }
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cortexgeo::geometry::{curvature_weight, mean_curvature, sample_surface, write_curvature_csv, DEFAULT_KAPPA_MAX};
use cortexgeo::losses::{ChamferMode, LossWeights};
use cortexgeo::mesh::{load_mesh_file, save_mesh_file, subdivide_midpoint, topology_report};
use cortexgeo::metrics::{cortical_thickness, icp_rigid, metrics_report, write_thickness_csv, DEFAULT_METRIC_SAMPLES};
use cortexgeo::optimizer::{fit, write_trace_csv, DeformConfig, FitStatus};
use cortexgeo::spatial::{self_intersections, SurfaceIndex};
use cortexgeo::template::{laplacian_smooth, SmoothConfig, SmoothMethod};
use cortexgeo::{GeoError, Mesh};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or inputs detected by the front end.
    Invalid(String),
    Geo(GeoError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => f.write_str(m),
            CliError::Geo(e) => write!(f, "{e}"),
        }
    }
}

impl From<GeoError> for CliError {
    fn from(e: GeoError) -> Self {
        CliError::Geo(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Geo(GeoError::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Geo(GeoError::Json(e))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Mesh deformation losses, template fitting and surface metrics.
#[derive(Debug, Parser)]
#[command(name = "cortexgeo", version)]
pub struct Cli {
    /// Worker threads for parallel sections; results do not depend on it.
    #[arg(long, global = true, env = "CORTEXGEO_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Deform a template mesh onto a target surface.
    Fit(FitArgs),
    /// Surface distances between a prediction and a reference mesh.
    Metrics(MetricsArgs),
    /// Per-vertex distance from a white-matter surface to a pial surface.
    Thickness(ThicknessArgs),
    /// Counts, Euler characteristic, genus, components and self-intersections.
    Topo(TopoArgs),
    /// Iterated Laplacian or HC smoothing.
    Smooth(SmoothArgs),
    /// Midpoint subdivision.
    Subdivide(SubdivideArgs),
    /// Per-vertex absolute mean curvature and curvature weight.
    Curvature(CurvatureArgs),
    /// Area-weighted random surface samples with face normals.
    Sample(SampleArgs),
    /// Rigidly align a source mesh to a target surface.
    Icp(IcpArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ChamferArg {
    Curvature,
    Classic,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    template: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// Loss weights JSON; defaults to the built-in white matter and pial rows.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Full optimizer settings JSON; flags given explicitly override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Surface class to fit; defaults to "wm" when present, else the only class.
    #[arg(long)]
    class: Option<String>,
    #[arg(long)]
    stages: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    kappa_max: Option<f64>,
    #[arg(long, value_enum)]
    chamfer: Option<ChamferArg>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output mesh of the last stage.
    #[arg(long)]
    out: PathBuf,
    /// Per-iteration loss trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, default_value_t = DEFAULT_METRIC_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hausdorff percentile in (0, 100]; the maximum when omitted.
    #[arg(long)]
    percentile: Option<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0])]
    thresholds: Vec<f64>,
    /// JSON report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ThicknessArgs {
    #[arg(long)]
    white: PathBuf,
    #[arg(long)]
    pial: PathBuf,
    /// Per-vertex CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary JSON path.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TopoArgs {
    #[arg(long)]
    mesh: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Uniform,
    Hc,
}

#[derive(Debug, Args)]
struct SmoothArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "hc")]
    method: MethodArg,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Convergence threshold on the largest vertex move.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
}

#[derive(Debug, Args)]
struct SubdivideArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    levels: u32,
}

#[derive(Debug, Args)]
struct CurvatureArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long, default_value_t = DEFAULT_KAPPA_MAX)]
    kappa_max: f64,
    /// CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct IcpArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Aligned copy of the source mesh.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Invalid("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Invalid(format!("cannot configure thread pool: {e}")))?;
    }
    match cli.command {
        Command::Fit(a) => run_fit(a),
        Command::Metrics(a) => run_metrics(a),
        Command::Thickness(a) => run_thickness(a),
        Command::Topo(a) => run_topo(a),
        Command::Smooth(a) => run_smooth(a),
        Command::Subdivide(a) => run_subdivide(a),
        Command::Curvature(a) => run_curvature(a),
        Command::Sample(a) => run_sample(a),
        Command::Icp(a) => run_icp(a),
    }
}

fn load(path: &Path) -> CliResult<Mesh> {
    load_mesh_file(path).map_err(|e| match e {
        GeoError::Io(io) => CliError::Invalid(format!("{}: {io}", path.display())),
        other => CliError::Geo(other),
    })
}

/// Writes to `path`, or to stdout when there is none.
fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn json_line<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn print_seed(seed: u64) {
    eprintln!("seed: {seed}");
}

fn pick_class(weights: &LossWeights, requested: Option<String>) -> CliResult<String> {
    if let Some(c) = requested {
        weights.get(&c)?;
        return Ok(c);
    }
    if weights.classes.contains_key("wm") {
        return Ok("wm".into());
    }
    let mut names = weights.classes.keys();
    match (names.next(), names.next()) {
        (Some(only), None) => Ok(only.clone()),
        _ => Err(CliError::Invalid("several weight classes defined; choose one with --class".into())),
    }
}

#[derive(Serialize)]
struct FitSummary {
    class: String,
    seed: u64,
    status: String,
    iterations: usize,
    final_total: Option<f64>,
    genus: Option<i64>,
    cc: usize,
    self_intersections: usize,
}

fn run_fit(a: FitArgs) -> CliResult<()> {
    let mut config = match &a.config {
        Some(p) => DeformConfig::from_json_file(p)?,
        None => DeformConfig::default(),
    };
    if let Some(p) = &a.weights {
        config.weights = LossWeights::from_json_file(p)?;
    }
    if let Some(s) = a.stages {
        config.stages = s;
    }
    if let Some(i) = a.iters {
        config.iterations = i;
    }
    if let Some(k) = a.kappa_max {
        config.kappa_max = k;
    }
    if let Some(c) = a.chamfer {
        config.losses.chamfer = match c {
            ChamferArg::Curvature => ChamferMode::Curvature,
            ChamferArg::Classic => ChamferMode::Classic,
        };
    }
    config.validate()?;
    let class = pick_class(&config.weights, a.class)?;
    let template = load(&a.template)?;
    let target = load(&a.target)?;
    let result = fit(
        &BTreeMap::from([(class.clone(), template)]),
        &BTreeMap::from([(class.clone(), target)]),
        &config,
        a.seed,
    )?;
    let mesh = result
        .final_mesh(&class)
        .ok_or_else(|| GeoError::Numerical("fit produced no stages".into()))?;
    save_mesh_file(mesh, &a.out)?;
    print_seed(a.seed);
    if let Some(p) = &a.trace {
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &result.trace)?;
        std::fs::write(p, buf)?;
    }
    let topo = &result.topology[&class];
    let summary = FitSummary {
        class: class.clone(),
        seed: a.seed,
        status: match &result.status {
            FitStatus::Completed => "completed".into(),
            FitStatus::Aborted { reason } => format!("aborted: {reason}"),
        },
        iterations: result.trace.len(),
        final_total: result.trace.iter().rev().find(|r| r.accepted).map(|r| r.breakdown.total),
        genus: topo.genus,
        cc: topo.connected_components,
        self_intersections: result.self_intersections[&class],
    };
    emit(None, &json_line(&summary)?)?;
    if let FitStatus::Aborted { reason } = result.status {
        return Err(GeoError::Numerical(format!("fit aborted: {reason}")).into());
    }
    Ok(())
}

fn run_metrics(a: MetricsArgs) -> CliResult<()> {
    let pred = load(&a.pred)?;
    let gt = load(&a.gt)?;
    let report = metrics_report(&pred, &gt, a.samples, a.seed, a.percentile, &a.thresholds)?;
    print_seed(a.seed);
    emit(a.out.as_deref(), &json_line(&report)?)
}

fn run_thickness(a: ThicknessArgs) -> CliResult<()> {
    let white = load(&a.white)?;
    let pial = load(&a.pial)?;
    let map = cortical_thickness(&white, &pial)?;
    let mut buf = Vec::new();
    write_thickness_csv(&mut buf, &map)?;
    emit(a.out.as_deref(), &buf)?;
    if let Some(p) = &a.summary {
        std::fs::write(p, json_line(&map.summary)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TopoOutput {
    #[serde(rename = "V")]
    v: usize,
    #[serde(rename = "E")]
    e: usize,
    #[serde(rename = "F")]
    f: usize,
    chi: i64,
    genus: Option<i64>,
    cc: usize,
    self_intersections: usize,
}

fn run_topo(a: TopoArgs) -> CliResult<()> {
    let mesh = load(&a.mesh)?;
    let t = topology_report(&mesh);
    let out = TopoOutput {
        v: t.vertex_count,
        e: t.edge_count,
        f: t.face_count,
        chi: t.euler_characteristic,
        genus: t.genus,
        cc: t.connected_components,
        self_intersections: self_intersections(&mesh).len(),
    };
    let mut bytes = serde_json::to_vec(&out)?;
    bytes.push(b'\n');
    emit(None, &bytes)
}

fn run_smooth(a: SmoothArgs) -> CliResult<()> {
    let mesh = load(&a.mesh)?;
    let config = SmoothConfig {
        method: match a.method {
            MethodArg::Uniform => SmoothMethod::Uniform,
            MethodArg::Hc => SmoothMethod::Hc,
        },
        lambda: a.lambda,
        eps: a.eps,
        max_iters: a.max_iters,
        alpha: a.alpha,
        beta: a.beta,
    };
    let (smoothed, iterations) = laplacian_smooth(&mesh, &config)?;
    save_mesh_file(&smoothed, &a.out)?;
    emit(None, &json_line(&serde_json::json!({ "iterations": iterations }))?)
}

fn run_subdivide(a: SubdivideArgs) -> CliResult<()> {
    let mesh = load(&a.mesh)?;
    let fine = subdivide_midpoint(&mesh, a.levels)?;
    save_mesh_file(&fine, &a.out)?;
    Ok(())
}

fn run_curvature(a: CurvatureArgs) -> CliResult<()> {
    let mesh = load(&a.mesh)?;
    let curv = mean_curvature(&mesh)?;
    let kappa = curvature_weight(&curv, a.kappa_max)?;
    let mut buf = Vec::new();
    write_curvature_csv(&mut buf, &curv, &kappa)?;
    emit(a.out.as_deref(), &buf)
}

fn run_sample(a: SampleArgs) -> CliResult<()> {
    let mesh = load(&a.mesh)?;
    let cloud = sample_surface(&mesh, a.n, a.seed, None)?;
    print_seed(a.seed);
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Geo(GeoError::Csv(e));
    w.write_record(["x", "y", "z", "nx", "ny", "nz", "face_id"]).map_err(csv_err)?;
    for ((p, n), f) in cloud.points.iter().zip(&cloud.normals).zip(&cloud.face_id) {
        w.write_record([
            p.x.to_string(),
            p.y.to_string(),
            p.z.to_string(),
            n.x.to_string(),
            n.y.to_string(),
            n.z.to_string(),
            f.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let buf = w.into_inner().map_err(|e| CliError::Geo(GeoError::Io(e.into_error())))?;
    emit(a.out.as_deref(), &buf)
}

#[derive(Serialize)]
struct IcpOutput {
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
    angle_degrees: f64,
    mse: f64,
    iterations: usize,
    converged: bool,
}

fn run_icp(a: IcpArgs) -> CliResult<()> {
    let source = load(&a.source)?;
    let target = load(&a.target)?;
    let index = SurfaceIndex::build(&target)?;
    let r = icp_rigid(source.vertices(), &index, a.max_iters, a.tol)?;
    let t = r.transform;
    let out = IcpOutput {
        rotation: std::array::from_fn(|i| std::array::from_fn(|j| t.rotation[(i, j)])),
        translation: [t.translation.x, t.translation.y, t.translation.z],
        angle_degrees: t.angle().to_degrees(),
        mse: r.mse,
        iterations: r.iterations,
        converged: r.converged,
    };
    if let Some(p) = &a.out {
        save_mesh_file(&source.map_vertices(|v| t.apply(v))?, p)?;
    }
    emit(None, &json_line(&out)?)
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mms_core::curvature::{
    bishop_gromov_test, bounds_report, conjugate_radius, s_profile, volume_profile, BgReport, BoundsReport,
    CurvatureParams,
};
use mms_core::discretize::{covering_mesh_report, discretization_sequence, nerve_complex};
use mms_core::distances::{
    default_tolerance, ghp_common, gromov_hausdorff_bruteforce, hausdorff, prokhorov, wasserstein2, DiscreteMeasure,
    DistanceResult,
};
use mms_core::embed::{embed_snowflake, EmbedOptions};
use mms_core::io::{self, write_atomic};
use mms_core::nets::{covering_order, minimal_epsilon_net};
use mms_core::regularity::{regularity_report, RadiiPolicy, RegularityReport};
use mms_core::snowflake::{chain_bound, chain_metric, max_chain_exponent, quasimetric_q, QuasimetricVariant};
use mms_core::space::{validate, ValidationReport, DEFAULT_TRIANGLE_TOLERANCE};
use mms_core::{Error, FiniteMetricMeasureSpace, SquareMatrix};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "mms", version, about = "Sampling, comparison and embedding of finite metric measure spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Auto,
    Points,
    Graph,
    Matrix,
}

#[derive(Args, Clone)]
struct Input {
    /// Points CSV, graph JSON or raw matrix CSV.
    input: Option<PathBuf>,
    /// Same as the positional input.
    #[arg(long, conflicts_with = "input")]
    space: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    format: Format,
    /// Companion mass CSV for matrix input.
    #[arg(long)]
    masses: Option<PathBuf>,
    /// Exponent of the l_p metric for point input.
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Triangle tolerance for matrix input (default 1e-9 times the largest entry).
    #[arg(long)]
    tol: Option<f64>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Hausdorff,
    Prokhorov,
    W2,
    Ghp,
    Gh,
}

#[derive(Subcommand)]
enum Command {
    /// Check the input against the metric measure space axioms.
    #[command(allow_negative_numbers = true)]
    Validate(Input),
    /// Greedy minimal epsilon-net.
    #[command(allow_negative_numbers = true)]
    Net {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        eps: f64,
        /// Index of the first center.
        #[arg(long, default_value_t = 0)]
        seed: usize,
    },
    /// Measure-driven quasimetric: CSV matrix plus JSON sidecar.
    #[command(allow_negative_numbers = true)]
    Snowflake {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value = "general")]
        variant: QuasimetricVariant,
        /// Where to write the quasimetric matrix as CSV.
        #[arg(long)]
        matrix_out: Option<PathBuf>,
    },
    /// Doubling, Ahlfors and uniform perfectness constants.
    #[command(allow_negative_numbers = true)]
    Regularity {
        #[command(flatten)]
        input: Input,
        /// Number of log-spaced probe radii.
        #[arg(long, default_value_t = 16)]
        radii: usize,
    },
    /// Bishop-Gromov bounds, optionally tested against a space.
    #[command(allow_negative_numbers = true)]
    Curvature {
        /// Optional space for the Bishop-Gromov monotonicity test.
        input: Option<PathBuf>,
        #[arg(long = "K")]
        k: f64,
        #[arg(long = "N")]
        n: f64,
        #[arg(long = "D")]
        d: f64,
        #[arg(long)]
        eps: Option<f64>,
        /// Pattern constant for the same-pattern bound.
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
        /// Relative tolerance of the Bishop-Gromov test.
        #[arg(long = "bg-tol", default_value_t = 0.15)]
        bg_tol: f64,
        /// Write the profile table (t, S, integral of S) as CSV.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        table_points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance between two measures, two subsets or two spaces.
    #[command(allow_negative_numbers = true)]
    Distance {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Weights of the first measure (mass CSV); the space's own measure by default.
        #[arg(long)]
        mu: Option<PathBuf>,
        /// Weights of the second measure (mass CSV).
        #[arg(long)]
        nu: Option<PathBuf>,
        /// Second space for `--kind gh` (same format rules as the input).
        #[arg(long)]
        other: Option<PathBuf>,
        /// Search tolerance for Prokhorov.
        #[arg(long = "search-tol")]
        search_tol: Option<f64>,
        /// Dump the certificate coupling as CSV (x, y, mass).
        #[arg(long)]
        coupling_out: Option<PathBuf>,
    },
    /// Voronoi discretization, nerve complex and covering mesh at one scale.
    #[command(allow_negative_numbers = true)]
    Discretize {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: usize,
        #[arg(long, default_value_t = 3)]
        max_dim: usize,
        /// Write the nerve as an OFF-like text listing.
        #[arg(long)]
        nerve_out: Option<PathBuf>,
    },
    /// Low-distortion embedding of the eps-snowflake into R^dim.
    #[command(allow_negative_numbers = true)]
    Embed {
        #[command(flatten)]
        input: Input,
        /// Snowflake exponent in (0, 1]; 1 embeds the metric itself.
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        /// Write the coordinates as a points CSV.
        #[arg(long)]
        coords_out: Option<PathBuf>,
    },
    /// Consolidated diagnostics for one space.
    #[command(allow_negative_numbers = true)]
    Report {
        #[command(flatten)]
        input: Input,
        #[arg(long = "K", default_value_t = 0.0)]
        k: f64,
        #[arg(long = "N", default_value_t = 2.0)]
        n: f64,
        /// Net scale; a tenth of the diameter by default.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: usize,
    },
}

/// A failure with its process exit status.
enum Failure {
    /// The input is not a valid metric measure space (exit 2).
    Invalid(String),
    /// A precondition of the requested operation fails (exit 3).
    Precondition(String),
    /// An enumeration guard rejected the input size (exit 4).
    TooLarge(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let text = e.to_string();
        match e {
            Error::SizeGuard { .. } => Failure::TooLarge(text),
            Error::DimensionMismatch { .. }
            | Error::DuplicatePoint { .. }
            | Error::NonPositiveTotalMass(_)
            | Error::NegativeMass { .. }
            | Error::MassCount { .. }
            | Error::Disconnected(_)
            | Error::NonPositiveWeight { .. }
            | Error::DuplicateVertex(_)
            | Error::UnknownVertex(_)
            | Error::NotSquare { .. }
            | Error::InvalidMetric(_)
            | Error::Io(_)
            | Error::Parse(_) => Failure::Invalid(text),
            _ => Failure::Precondition(text),
        }
    }
}

impl Failure {
    fn report(&self) -> ExitCode {
        let (code, kind, text) = match self {
            Failure::Invalid(t) => (2, "invalid input", t),
            Failure::Precondition(t) => (3, "precondition violated", t),
            Failure::TooLarge(t) => (4, "size guard", t),
        };
        eprintln!("mms: {kind}: {text}");
        ExitCode::from(code)
    }
}

type CliResult<T> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn detect(path: &Path, text: &str, format: Format) -> Format {
    if format != Format::Auto {
        return format;
    }
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        return Format::Graph;
    }
    if text.trim_start().starts_with("x0") {
        Format::Points
    } else {
        Format::Matrix
    }
}

type RawMatrix = (Vec<Vec<f64>>, Option<Vec<f64>>);

/// Matrix rows and masses exactly as given, before any validation.
fn raw_matrix(input: &Input, text: &str) -> CliResult<RawMatrix> {
    let rows = io::parse_matrix_csv(text)?;
    let masses = match &input.masses {
        Some(p) => Some(io::parse_masses_csv(&read(p)?)?),
        None => None,
    };
    Ok((rows, masses))
}

fn matrix_tolerance(rows: &[Vec<f64>], tol: Option<f64>) -> f64 {
    tol.unwrap_or_else(|| {
        let max = rows.iter().flatten().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
        DEFAULT_TRIANGLE_TOLERANCE * max
    })
}

fn load_path(input: &Input, path: &Path) -> CliResult<FiniteMetricMeasureSpace> {
    let text = read(path)?;
    match detect(path, &text, input.format) {
        Format::Points => {
            let table = io::parse_points_csv(&text)?;
            Ok(FiniteMetricMeasureSpace::from_points(table.coords, table.masses, input.p)?)
        }
        Format::Graph => Ok(io::parse_graph_json(&text)?.build()?),
        Format::Matrix | Format::Auto => {
            let (rows, masses) = raw_matrix(input, &text)?;
            let tol = matrix_tolerance(&rows, input.tol);
            let matrix = SquareMatrix::from_rows(&rows).ok_or_else(|| Failure::Invalid("matrix is not square".into()))?;
            let n = matrix.len();
            let report = validate(&rows, masses.as_deref().unwrap_or(&vec![1.0; n]), tol)?;
            if !report.is_valid() {
                return Err(Failure::Invalid(report.summary()));
            }
            Ok(FiniteMetricMeasureSpace::from_matrix(None, matrix, masses, Some(tol))?)
        }
    }
}

impl Input {
    fn path(&self) -> CliResult<&Path> {
        self.input
            .as_deref()
            .or(self.space.as_deref())
            .ok_or_else(|| Failure::Invalid("an input space is required (positional path or --space)".into()))
    }
}

fn load(input: &Input) -> CliResult<FiniteMetricMeasureSpace> {
    load_path(input, input.path()?)
}

fn emit_text(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => Ok(write_atomic(path, text.as_bytes())?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> CliResult<()> {
    emit_text(out, &io::to_json_string(value)?)
}

fn run_validate(input: &Input) -> CliResult<()> {
    let path = input.path()?;
    let text = read(path)?;
    let report: ValidationReport = match detect(path, &text, input.format) {
        Format::Matrix | Format::Auto => {
            let (rows, masses) = raw_matrix(input, &text)?;
            let n = rows.len();
            let masses = masses.unwrap_or_else(|| vec![1.0; n]);
            if masses.len() != n {
                return Err(Error::MassCount {
                    expected: n,
                    found: masses.len(),
                }
                .into());
            }
            validate(&rows, &masses, matrix_tolerance(&rows, input.tol))?
        }
        _ => {
            let space = load(input)?;
            validate(&space.dist().to_rows(), space.masses(), 0.0)?
        }
    };
    emit(input.out.as_deref(), &report)?;
    if report.is_valid() {
        Ok(())
    } else {
        Err(Failure::Invalid(report.summary()))
    }
}

fn run_net(input: &Input, eps: f64, seed: usize) -> CliResult<()> {
    let space = load(input)?;
    let net = minimal_epsilon_net(&space, eps, seed)?;
    emit(input.out.as_deref(), &net.to_record(&space))
}

fn run_snowflake(input: &Input, s: f64, variant: QuasimetricVariant, matrix_out: Option<&Path>) -> CliResult<()> {
    let space = load(input)?;
    let q = quasimetric_q(&space, s, variant)?;
    if let Some(path) = matrix_out {
        write_atomic(path, io::matrix_to_csv(&q.values).as_bytes())?;
    }
    let sidecar = q.sidecar();
    let chain = if space.len() > 1 {
        let c = chain_metric(&q)?;
        Some(json!({
            "max_ratio": c.max_ratio,
            "min_ratio": c.min_ratio,
            "bound": chain_bound(q.quasi_constant_k, 1.0),
            "max_admissible_s": max_chain_exponent(q.quasi_constant_k),
        }))
    } else {
        None
    };
    emit(
        input.out.as_deref(),
        &json!({"s": sidecar.s, "K": sidecar.k, "variant": sidecar.variant, "chain": chain}),
    )
}

fn run_regularity(input: &Input, radii: usize) -> CliResult<()> {
    let space = load(input)?;
    let policy = RadiiPolicy {
        count: radii,
        ..RadiiPolicy::default()
    };
    emit(input.out.as_deref(), &regularity_report(&space, &policy)?)
}

#[allow(clippy::too_many_arguments)]
fn run_curvature(
    input: Option<&Path>,
    params: (f64, f64, f64),
    eps: Option<f64>,
    c: f64,
    bg_tol: f64,
    table: Option<&Path>,
    table_points: usize,
    out: Option<&Path>,
) -> CliResult<()> {
    let (k, n, d) = params;
    let params = CurvatureParams::new(k, n, d)?;
    let bounds: Option<BoundsReport> = eps.map(|e| bounds_report(params, e, c)).transpose()?;
    let bg: Option<BgReport> = match input {
        Some(path) => {
            let opts = Input {
                input: Some(path.to_path_buf()),
                space: None,
                format: Format::Auto,
                masses: None,
                p: 2.0,
                tol: None,
                out: None,
            };
            let space = load(&opts)?;
            Some(bishop_gromov_test(&space, k, n, bg_tol, &RadiiPolicy::default())?)
        }
        None => None,
    };
    if let Some(path) = table {
        let top = d.min(conjugate_radius(k, n));
        let mut csv = String::from("t,S,V\n");
        for i in 0..=table_points.max(1) {
            let t = top * i as f64 / table_points.max(1) as f64;
            csv.push_str(&format!(
                "{},{},{}\n",
                io::format_float(t),
                io::format_float(s_profile(k, n, t)?),
                io::format_float(volume_profile(k, n, t)?)
            ));
        }
        write_atomic(path, csv.as_bytes())?;
    }
    emit(out, &json!({"params": params, "bounds": bounds, "bishop_gromov": bg}))
}

fn measure(space: &FiniteMetricMeasureSpace, path: Option<&Path>) -> CliResult<DiscreteMeasure> {
    match path {
        Some(p) => Ok(DiscreteMeasure::new(space, io::parse_masses_csv(&read(p)?)?)?.normalize()),
        None => Ok(DiscreteMeasure::from_space(space)),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_distance(
    input: &Input,
    kind: Kind,
    mu: Option<&Path>,
    nu: Option<&Path>,
    other: Option<&Path>,
    search_tol: Option<f64>,
    coupling_out: Option<&Path>,
) -> CliResult<()> {
    let space = load(input)?;
    let result: DistanceResult = match kind {
        Kind::Gh => {
            let other = other.ok_or_else(|| Failure::Precondition("--kind gh needs --other".into()))?;
            let y = load_path(input, other)?;
            gromov_hausdorff_bruteforce(&space, &y)?
        }
        _ => {
            let a = measure(&space, mu)?;
            let b = measure(&space, nu)?;
            match kind {
                Kind::Hausdorff => hausdorff(&space, &a.support(), &b.support())?,
                Kind::Prokhorov => prokhorov(&space, &a, &b, search_tol.unwrap_or_else(|| default_tolerance(&space)))?,
                Kind::W2 => wasserstein2(&space, &a, &b)?,
                Kind::Ghp => ghp_common(&space, &a, &b)?,
                Kind::Gh => unreachable!(),
            }
        }
    };
    if let (Some(path), Some(coupling)) = (coupling_out, result.coupling()) {
        let mut csv = String::from("x,y,mass\n");
        for &(x, y, m) in coupling {
            csv.push_str(&format!("{},{},{}\n", space.ids()[x], space.ids()[y], io::format_float(m)));
        }
        write_atomic(path, csv.as_bytes())?;
    }
    emit(
        input.out.as_deref(),
        &json!({"value": result.value, "method": result.method, "tolerance": result.tolerance}),
    )
}

fn run_discretize(input: &Input, eps: f64, seed: usize, max_dim: usize, nerve_out: Option<&Path>) -> CliResult<()> {
    let space = load(input)?;
    let step = discretization_sequence(&space, &[eps], seed)?.remove(0);
    let net = &step.discretization.net;
    let nerve = nerve_complex(&space, net, max_dim)?;
    if let Some(path) = nerve_out {
        write_atomic(path, nerve.to_off(&space).as_bytes())?;
    }
    emit(
        input.out.as_deref(),
        &json!({
            "discretization": step.discretization.to_record(&space),
            "w2_to_original": step.w2_to_original,
            "nerve": nerve,
            "mesh": covering_mesh_report(&space, net)?,
        }),
    )
}

#[allow(clippy::too_many_arguments)]
fn run_embed(
    input: &Input,
    eps: f64,
    dim: usize,
    seed: u64,
    max_iters: usize,
    restarts: usize,
    coords_out: Option<&Path>,
) -> CliResult<()> {
    let space = load(input)?;
    let options = EmbedOptions {
        max_iters,
        restarts,
        ..EmbedOptions::new(dim, seed)
    };
    let result = embed_snowflake(&space, eps, &options)?;
    if let Some(path) = coords_out {
        write_atomic(path, io::points_to_csv(&result.coords, None)?.as_bytes())?;
    }
    emit(input.out.as_deref(), &result)
}

#[derive(Serialize)]
struct Regime {
    degenerate: bool,
    ahlfors_regular: bool,
    bishop_gromov_consistent: bool,
    recommended_sampling: &'static str,
}

const REPORT_BG_TOLERANCE: f64 = 0.15;
/// Report probes start where a typical closed ball holds this many atoms, so
/// lattice shells and sampling noise move its mass by less than the tolerance.
const REPORT_MIN_BALL_ATOMS: usize = 64;
const REPORT_FIT_RADII: usize = 12;
/// Finer, so a mass jump across a gap is not averaged over one wide step.
const REPORT_BG_RADII: usize = 32;

/// Median over centers of the distance to the `k`-th nearest other point.
fn typical_radius_for(space: &FiniteMetricMeasureSpace, k: usize) -> f64 {
    let k = k.min(space.len() - 1).max(1);
    let mut radii: Vec<f64> = (0..space.len())
        .map(|i| {
            let mut row = space.dist().row(i).to_vec();
            row.sort_by(f64::total_cmp);
            row[k]
        })
        .collect();
    radii.sort_by(f64::total_cmp);
    radii[radii.len() / 2]
}

/// Probe radii from a well-populated ball up to `hi`.
fn report_policy(space: &FiniteMetricMeasureSpace, hi: f64, count: usize) -> RadiiPolicy {
    let atoms = REPORT_MIN_BALL_ATOMS.min(space.len() / 8);
    let lo = typical_radius_for(space, atoms).min(hi / 2.0);
    RadiiPolicy::log_spaced(count, lo, hi)
}

fn run_report(input: &Input, k: f64, n: f64, eps: Option<f64>, seed: usize) -> CliResult<()> {
    let space = load(input)?;
    let validation = validate(&space.dist().to_rows(), space.masses(), 0.0)?;
    if space.len() < 2 {
        return emit(
            input.out.as_deref(),
            &json!({
                "points": space.len(),
                "validation": validation,
                "regime": Regime {
                    degenerate: true,
                    ahlfors_regular: false,
                    bishop_gromov_consistent: true,
                    recommended_sampling: "none: single point",
                },
            }),
        );
    }
    // The power-law fit stops at a quarter of the diameter, past which balls
    // saturate to the whole space. Saturation only lowers the Bishop-Gromov
    // ratio, so that test runs up to the diameter and sees gaps between clusters.
    let regularity: Option<RegularityReport> =
        regularity_report(&space, &report_policy(&space, space.diameter() / 4.0, REPORT_FIT_RADII)).ok();
    let eps = eps.unwrap_or(space.diameter() / 10.0);
    let net = minimal_epsilon_net(&space, eps, seed)?;
    let params = CurvatureParams::new(k, n, space.diameter())?;
    let bounds = bounds_report(params, eps.min(2.0 * space.diameter()), 1.0).ok();
    let order = covering_order(&space, &net)?;
    let bg = bishop_gromov_test(&space, k, n, REPORT_BG_TOLERANCE, &report_policy(&space, space.diameter(), REPORT_BG_RADII))?;
    // A ball centred on the boundary of a regular domain keeps about 2^-alpha of
    // a full ball, and the least-squares line tracks the interior balls, so
    // boundary probes alone sit a factor 2^alpha below it. The band allows that
    // factor once more for the bend near saturation.
    let ahlfors_regular = regularity
        .as_ref()
        .is_some_and(|r| r.ahlfors_alpha > 0.0 && r.ahlfors_residual <= 2.0 * r.ahlfors_alpha * std::f64::consts::LN_2);
    let bg_ok = bg.violations.is_empty();
    let recommended = if bg_ok {
        "epsilon-nets with curvature-dimension bounds"
    } else if ahlfors_regular {
        "nets of the measure quasimetric q_{mu,s} (Ahlfors regular)"
    } else {
        "doubling-measure construction with nets of q_{mu,s}"
    };
    let net_json = json!({
        "record": net.to_record(&space),
        "size": net.len(),
        "covering_order": order,
        "within_n1": bounds.as_ref().map(|b| net.len() as u64 <= b.n1),
        "within_n2": bounds.as_ref().map(|b| order as u64 <= b.n2),
    });
    emit(
        input.out.as_deref(),
        &json!({
            "points": space.len(),
            "validation": validation,
            "regularity": regularity,
            "net": net_json,
            "bounds": bounds,
            "bishop_gromov": bg,
            "regime": Regime {
                degenerate: false,
                ahlfors_regular,
                bishop_gromov_consistent: bg_ok,
                recommended_sampling: recommended,
            },
        }),
    )
}

fn configure_threads() -> CliResult<()> {
    if let Ok(value) = std::env::var("MMS_THREADS") {
        let threads: usize = value
            .trim()
            .parse()
            .map_err(|_| Failure::Precondition(format!("MMS_THREADS must be a positive integer, got {value:?}")))?;
        if threads == 0 {
            return Err(Failure::Precondition("MMS_THREADS must be a positive integer, got 0".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Precondition(e.to_string()))?;
    }
    Ok(())
}

fn dispatch(command: Command) -> CliResult<()> {
    configure_threads()?;
    match command {
        Command::Validate(input) => run_validate(&input),
        Command::Net { input, eps, seed } => run_net(&input, eps, seed),
        Command::Snowflake {
            input,
            s,
            variant,
            matrix_out,
        } => run_snowflake(&input, s, variant, matrix_out.as_deref()),
        Command::Regularity { input, radii } => run_regularity(&input, radii),
        Command::Curvature {
            input,
            k,
            n,
            d,
            eps,
            c,
            bg_tol,
            table,
            table_points,
            out,
        } => run_curvature(
            input.as_deref(),
            (k, n, d),
            eps,
            c,
            bg_tol,
            table.as_deref(),
            table_points,
            out.as_deref(),
        ),
        Command::Distance {
            input,
            kind,
            mu,
            nu,
            other,
            search_tol,
            coupling_out,
        } => run_distance(
            &input,
            kind,
            mu.as_deref(),
            nu.as_deref(),
            other.as_deref(),
            search_tol,
            coupling_out.as_deref(),
        ),
        Command::Discretize {
            input,
            eps,
            seed,
            max_dim,
            nerve_out,
        } => run_discretize(&input, eps, seed, max_dim, nerve_out.as_deref()),
        Command::Embed {
            input,
            eps,
            dim,
            seed,
            max_iters,
            restarts,
            coords_out,
        } => run_embed(&input, eps, dim, seed, max_iters, restarts, coords_out.as_deref()),
        Command::Report { input, k, n, eps, seed } => run_report(&input, k, n, eps, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                // Malformed or missing parameters are precondition failures.
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}

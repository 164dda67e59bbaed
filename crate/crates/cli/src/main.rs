use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multipole::approx::{corollary20_stat, multipole_series, HarmonicBasis, QUADRATURE_MARGIN};
use multipole::conic::ProjPoint2;
use multipole::deconstruct::{full_decompose, representation_bound, Strategy};
use multipole::harmonic::harmonic_decompose;
use multipole::maxwell::{maxwell_decompose, maxwell_poly};
use multipole::planar::{fiber_enumerate, project_divisor, PencilCenter};
use multipole::sylvester::{
    all_factorizations, canonical_factor, conic_roots, count_parcellings, discriminant_report, real_factor,
};
use multipole::{CVec3, Poly, QuadForm, QuadratureRule, Tolerances, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use multipole_cli::json::{
    complex, conic_divisor, conic_divisor_json, pencil_divisor, pencil_divisor_json, to_cvec3, vector,
    ConicPointJson, FactorizationJson, MultipoleJson, Number, PolyJson, QuadJson, RootJson, SequenceJson,
};
use multipole_cli::CliError;

fn parse_err(e: impl std::fmt::Display) -> CliError {
    CliError::Parse(e.to_string())
}

#[derive(Parser)]
#[command(name = "multipole", version, about = "Multipole decompositions of polynomials on quadratic surfaces")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// `sphere`, `hyperboloid` or a quadric JSON file.
    #[arg(long, global = true)]
    quadric: Option<String>,
    /// JSON file with `quadric`, `tolerances`, `seed` and `output`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    tol_div: Option<f64>,
    #[arg(long, global = true)]
    tol_det: Option<f64>,
    #[arg(long, global = true)]
    tol_harm: Option<f64>,
    #[arg(long, global = true)]
    tol_fact: Option<f64>,
    #[arg(long, global = true)]
    tol_disc: Option<f64>,
    #[arg(long, global = true)]
    eps_cluster: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Canonical,
    Enumerate,
    RealUnique,
}

#[derive(Subcommand)]
enum Command {
    /// Multipole sequence on `{Q = 1}` (default) or factorization on the cone.
    Decompose {
        poly: PathBuf,
        #[arg(long, conflicts_with = "cone")]
        surface: bool,
        #[arg(long)]
        cone: bool,
        #[arg(long, value_enum, default_value = "canonical")]
        strategy: StrategyArg,
        /// Every representation (same as `--strategy enumerate`).
        #[arg(long)]
        all: bool,
    },
    /// Components `P_k` of `P = Σ Qᵏ·P_k` with each `P_k` harmonic.
    Harmonic { poly: PathBuf },
    /// Maxwell polynomial of vectors, or the vectors of a harmonic polynomial with `--invert`.
    Maxwell {
        /// Comma separated vectors, e.g. `[0,0,1],[1,0,0]`; entries are numbers or `[re,im]`.
        #[arg(long, conflicts_with = "invert", required_unless_present = "invert")]
        vectors: Option<String>,
        #[arg(long)]
        invert: Option<PathBuf>,
    },
    /// All factorizations `P = λ·∏L + Q·R` of a homogeneous polynomial.
    Fibers { poly: PathBuf },
    /// Whether the intersection divisor with the conic has a multiple point.
    Discriminant { poly: PathBuf },
    /// Conic divisors over a divisor on the pencil of lines through `--center`.
    PlanarFiber {
        #[arg(long)]
        center: String,
        /// Pencil divisor `[{"u": [[re,im],[re,im]], "mult": m}, ...]`, inline or as a file.
        #[arg(long, required_unless_present = "conic_divisor")]
        divisor: Option<String>,
        /// Conic divisor `[{"point": [3 complex], "mult": m}, ...]` projected first.
        #[arg(long, conflicts_with = "divisor")]
        conic_divisor: Option<String>,
    },
    /// Harmonic bands, Parseval gap and band multipoles of a function on the ellipsoid.
    Approx {
        /// `exp_x`, `gauss` or a polynomial JSON file.
        #[arg(long, default_value = "exp_x")]
        function: String,
        #[arg(long, default_value_t = 8)]
        d_max: usize,
    },
    /// `(2d−1)!!` and the bound `∏_{k≤d} (2k−1)!!`.
    Counts {
        #[arg(long)]
        d: usize,
    },
    /// A random polynomial from the seed.
    Random {
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        real: bool,
        #[arg(long)]
        homogeneous: bool,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TolConfig {
    tol_div: Option<f64>,
    tol_det: Option<f64>,
    tol_harm: Option<f64>,
    tol_fact: Option<f64>,
    tol_disc: Option<f64>,
    eps_cluster: Option<f64>,
    coeff_noise: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CliConfig {
    quadric: Option<String>,
    #[serde(default)]
    tolerances: TolConfig,
    seed: Option<u64>,
    output: Option<PathBuf>,
}

struct Context {
    quadric: QuadForm,
    tol: Tolerances,
    seed: u64,
    output: Option<PathBuf>,
}

fn read_input(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(parse_err)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    }
}

/// Inline JSON when the argument starts with `[` or `{`, a file otherwise.
fn inline_or_file(arg: &str) -> Result<String, CliError> {
    match arg.trim_start().chars().next() {
        Some('[') | Some('{') => Ok(arg.to_string()),
        _ => read_input(Path::new(arg)),
    }
}

fn read_poly(path: &Path) -> Result<PolyJson, CliError> {
    serde_json::from_str(&read_input(path)?).map_err(parse_err)
}

fn load_quadric(spec: &str) -> Result<QuadForm, CliError> {
    match spec {
        "sphere" => Ok(QuadForm::sphere()),
        "hyperboloid" => Ok(QuadForm::hyperboloid()),
        path => {
            let q: QuadJson = serde_json::from_str(&read_input(Path::new(path))?).map_err(parse_err)?;
            q.to_quadform()
        }
    }
}

fn context(g: &GlobalArgs) -> Result<Context, CliError> {
    let config: CliConfig = match &g.config {
        Some(p) => serde_json::from_str(&read_input(p)?).map_err(parse_err)?,
        None => CliConfig::default(),
    };
    let quadric = load_quadric(g.quadric.as_deref().or(config.quadric.as_deref()).unwrap_or("sphere"))?;
    let mut tol = Tolerances::default();
    let t = &config.tolerances;
    let pick = |cli: Option<f64>, cfg: Option<f64>, default: f64| cli.or(cfg).unwrap_or(default);
    tol.tol_div = pick(g.tol_div, t.tol_div, tol.tol_div);
    tol.tol_det = pick(g.tol_det, t.tol_det, tol.tol_det);
    tol.tol_harm = pick(g.tol_harm, t.tol_harm, tol.tol_harm);
    tol.tol_fact = pick(g.tol_fact, t.tol_fact, tol.tol_fact);
    tol.tol_disc = pick(g.tol_disc, t.tol_disc, tol.tol_disc);
    tol.eps_cluster = pick(g.eps_cluster, t.eps_cluster, tol.eps_cluster);
    tol.coeff_noise = t.coeff_noise.unwrap_or(tol.coeff_noise);
    let values = [tol.tol_div, tol.tol_det, tol.tol_harm, tol.tol_fact, tol.tol_disc, tol.eps_cluster, tol.coeff_noise];
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(CliError::Parse("tolerances must be positive and finite".into()));
    }
    Ok(Context { quadric, tol, seed: g.seed.or(config.seed).unwrap_or(0), output: g.output.clone().or(config.output) })
}

#[derive(Serialize)]
struct Listing<T> {
    count: usize,
    items: Vec<T>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable output")
}

fn cmd_decompose(
    ctx: &Context,
    poly: &Path,
    cone: bool,
    strategy: StrategyArg,
    all: bool,
) -> Result<Value, CliError> {
    let p = read_poly(poly)?;
    let (q, tol) = (&ctx.quadric, &ctx.tol);
    let strategy = if all { StrategyArg::Enumerate } else { strategy };
    if cone {
        let h = p.to_homog()?;
        return Ok(match strategy {
            StrategyArg::Enumerate => {
                let items: Vec<_> = all_factorizations(&h, q, tol)?.iter().map(FactorizationJson::new).collect();
                to_value(&Listing { count: items.len(), items })
            }
            StrategyArg::Canonical => to_value(&FactorizationJson::new(&canonical_factor(&h, q, tol)?)),
            StrategyArg::RealUnique => to_value(&FactorizationJson::new(&real_factor(&h, q, tol)?)),
        });
    }
    let s = match strategy {
        StrategyArg::Canonical => Strategy::Canonical,
        StrategyArg::Enumerate => Strategy::Enumerate,
        StrategyArg::RealUnique => Strategy::RealUnique,
    };
    let seqs = full_decompose(&p.to_poly()?, q, s, tol)?;
    Ok(if s == Strategy::Enumerate {
        let items: Vec<_> = seqs.iter().map(SequenceJson::new).collect();
        to_value(&Listing { count: items.len(), items })
    } else {
        to_value(&SequenceJson::new(&seqs[0]))
    })
}

fn cmd_harmonic(ctx: &Context, poly: &Path) -> Result<Value, CliError> {
    let h = read_poly(poly)?.to_homog()?;
    let dec = harmonic_decompose(&h, &ctx.quadric, ctx.tol.tol_harm)?;
    let components: Vec<PolyJson> = dec.components.iter().map(PolyJson::from_homog).collect();
    Ok(json!({ "components": components }))
}

fn parse_vectors(s: &str) -> Result<Vec<CVec3>, CliError> {
    let text = if s.trim_start().starts_with("[[") { s.to_string() } else { format!("[{s}]") };
    let vs: Vec<[Number; 3]> = serde_json::from_str(&text).map_err(parse_err)?;
    Ok(vs.iter().map(to_cvec3).collect())
}

fn cmd_maxwell(ctx: &Context, vectors: Option<&str>, invert: Option<&Path>) -> Result<Value, CliError> {
    if let Some(path) = invert {
        let h = read_poly(path)?.to_homog()?;
        let (vs, c) = maxwell_decompose(&h, &ctx.quadric, &ctx.tol)?;
        let vs: Vec<_> = vs.iter().map(vector).collect();
        return Ok(json!({ "vectors": vs, "scale": complex(c) }));
    }
    let vs = parse_vectors(vectors.unwrap_or_default())?;
    Ok(to_value(&PolyJson::from_homog(&maxwell_poly(&ctx.quadric, &vs)?)))
}

fn cmd_fibers(ctx: &Context, poly: &Path) -> Result<Value, CliError> {
    let h = read_poly(poly)?.to_homog()?;
    let roots = conic_roots(&h, &ctx.quadric, &ctx.tol)?;
    let items: Vec<_> = all_factorizations(&h, &ctx.quadric, &ctx.tol)?.iter().map(FactorizationJson::new).collect();
    let root_json: Vec<RootJson> = roots.clusters.iter().map(RootJson::new).collect();
    Ok(json!({ "roots": root_json, "count": items.len(), "items": items }))
}

fn cmd_discriminant(ctx: &Context, poly: &Path) -> Result<Value, CliError> {
    let h = read_poly(poly)?.to_homog()?;
    let r = discriminant_report(&h, &ctx.quadric, &ctx.tol)?;
    Ok(json!({
        "in_discriminant": r.in_discriminant,
        "relative_discriminant": r.relative_discriminant,
        "max_multiplicity": r.max_multiplicity,
        "min_separation": r.min_separation,
    }))
}

fn cmd_planar_fiber(
    ctx: &Context,
    center: &str,
    divisor: Option<&str>,
    conic: Option<&str>,
) -> Result<Value, CliError> {
    let c = parse_vectors(center)?;
    let [p] = c.as_slice() else {
        return Err(CliError::Parse("--center takes exactly one vector".into()));
    };
    let p = ProjPoint2::new(*p).ok_or_else(|| CliError::Parse("zero center".into()))?;
    let center = PencilCenter::new(p, &ctx.quadric)?;
    let e = match (divisor, conic) {
        (Some(d), _) => {
            let pts: Vec<RootJson> = serde_json::from_str(&inline_or_file(d)?).map_err(parse_err)?;
            pencil_divisor(&pts)?
        }
        (None, Some(d)) => {
            let pts: Vec<ConicPointJson> = serde_json::from_str(&inline_or_file(d)?).map_err(parse_err)?;
            project_divisor(&conic_divisor(&pts)?, &center, ctx.tol.eps_cluster)
        }
        (None, None) => return Err(CliError::Parse("a divisor is required".into())),
    };
    let fibers = fiber_enumerate(&e, &center, &ctx.quadric, ctx.tol.eps_cluster)?;
    let items: Vec<Vec<ConicPointJson>> = fibers.iter().map(conic_divisor_json).collect();
    Ok(json!({ "divisor": pencil_divisor_json(&e), "count": items.len(), "items": items }))
}

fn cmd_approx(ctx: &Context, function: &str, d_max: usize) -> Result<Value, CliError> {
    let rule = QuadratureRule::new(2 * d_max + QUADRATURE_MARGIN);
    let basis = HarmonicBasis::new(&ctx.quadric, d_max, &rule, &ctx.tol)?;
    let dec = match function {
        "exp_x" => basis.project(|v| v[0].exp()),
        "gauss" => basis.project(|v| {
            let d = v - CVec3::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            (-d.dot(&d)).exp()
        }),
        path => {
            let p: Poly = read_poly(Path::new(path))?.to_poly()?;
            basis.project(|v| p.eval(v))
        }
    };
    let series = multipole_series(&dec, &basis, &ctx.quadric, &ctx.tol)?;
    let stat = corollary20_stat(&series);
    let multipoles: Vec<Option<MultipoleJson>> =
        series.multipoles.iter().map(|m| m.as_ref().map(MultipoleJson::new)).collect();
    let bands: Vec<PolyJson> = dec.bands.iter().map(PolyJson::from_homog).collect();
    Ok(json!({
        "d_max": d_max,
        "norm": dec.norm,
        "band_norms": dec.band_norms,
        "residual_norm": dec.residual_norm,
        "parseval_gap": dec.parseval_gap(),
        "bands": bands,
        "multipoles": multipoles,
        "rho_sq": stat.rho_sq,
        "partial_sums": stat.partial_sums,
    }))
}

fn cmd_counts(d: usize) -> Result<Value, CliError> {
    let kappa = (1..=d).try_fold(1u128, |acc, k| acc.checked_mul((2 * k - 1) as u128));
    let bound = (1..=d).try_fold(1u128, |acc, k| {
        let f = (1..=k).try_fold(1u128, |a, j| a.checked_mul((2 * j - 1) as u128))?;
        acc.checked_mul(f)
    });
    match (kappa, bound) {
        (Some(_), Some(_)) => Ok(json!({ "d": d, "kappa": count_parcellings(d), "bound": representation_bound(d) })),
        _ => Err(CliError::Parse(format!("counts for d = {d} exceed 128 bits"))),
    }
}

fn cmd_random(ctx: &Context, degree: usize, real: bool, homogeneous: bool) -> Value {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut coeff = || {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = if real { 0.0 } else { StandardNormal.sample(&mut rng) };
        C64::new(re, im)
    };
    let parts: Vec<_> = (0..=degree)
        .map(|k| {
            let n = multipole::algebra::dim(k);
            if homogeneous && k < degree {
                multipole::HomogPoly::zero(k)
            } else {
                multipole::HomogPoly::from_coeffs(k, (0..n).map(|_| coeff()).collect())
            }
        })
        .collect();
    to_value(&PolyJson::from_poly(&Poly::from_parts(parts)))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let ctx = context(&cli.global)?;
    let value = match &cli.command {
        Command::Decompose { poly, surface: _, cone, strategy, all } => cmd_decompose(&ctx, poly, *cone, *strategy, *all)?,
        Command::Harmonic { poly } => cmd_harmonic(&ctx, poly)?,
        Command::Maxwell { vectors, invert } => cmd_maxwell(&ctx, vectors.as_deref(), invert.as_deref())?,
        Command::Fibers { poly } => cmd_fibers(&ctx, poly)?,
        Command::Discriminant { poly } => cmd_discriminant(&ctx, poly)?,
        Command::PlanarFiber { center, divisor, conic_divisor } => {
            cmd_planar_fiber(&ctx, center, divisor.as_deref(), conic_divisor.as_deref())?
        }
        Command::Approx { function, d_max } => cmd_approx(&ctx, function, *d_max)?,
        Command::Counts { d } => cmd_counts(*d)?,
        Command::Random { degree, real, homogeneous } => cmd_random(&ctx, *degree, *real, *homogeneous),
    };
    let text = serde_json::to_string_pretty(&value).expect("serializable output") + "\n";
    match &ctx.output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(parse_err),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

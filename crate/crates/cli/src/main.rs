use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fockspectra::finiteness::{
    estimate_exponents, finiteness_verdict, locate_t0, write_exponents_csv, VerdictParams,
};
use fockspectra::model::{check_assumption_a, BUILTIN_NAMES};
use fockspectra::operators::{assemble_blocks, write_matrix_csv};
use fockspectra::report::{self, TextReport};
use fockspectra::schur::write_delta_profile_csv;
use fockspectra::spectra::{
    counting_sweep, discrete_spectrum_above, discrete_spectrum_below, essential_spectrum,
    EssSpecReport, SearchParams,
};
use fockspectra::verify::{singular_sequence_norms, write_singular_seq_csv, SingularSeqConfig};
use fockspectra::{load_model, Grid, ModelSpec, PairGrid, QuadratureRule};

const MAX_N_1D: usize = 256;
const MAX_N_2D: usize = 48;

#[derive(Parser, Debug)]
#[command(name = "fockspectra", version, about = "Spectral analysis of two-boson truncated Fock space operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Essential spectrum: range of w2 and the zeros of Delta outside it.
    Essspec(CommonArgs),
    /// Eigenvalues of the discretized operator outside the essential spectrum.
    Discrete {
        #[command(flatten)]
        common: CommonArgs,
        /// Also report eigenvalues above the essential spectrum.
        #[arg(long)]
        above: bool,
        /// Write the assembled matrix as a_matrix.csv.
        #[arg(long)]
        dump_matrix: bool,
    },
    /// Three-way eigenvalue counts below z.
    BsCheck {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        z: Vec<f64>,
        /// lo:hi:count
        #[arg(long, allow_hyphen_values = true)]
        z_sweep: Option<String>,
    },
    /// Exponent estimates and the finiteness criterion.
    Finiteness {
        #[command(flatten)]
        common: CommonArgs,
        /// Refinement levels (nodes per axis).
        #[arg(long, value_delimiter = ',', default_values_t = [32usize, 64, 128])]
        levels: Vec<usize>,
        /// Shell radius; a/4 by default.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Norms of a singular sequence concentrating at (x0, y0).
    SingularSeq {
        #[arg(long)]
        model: String,
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        x0: Vec<f64>,
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        y0: Vec<f64>,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Validate a model and report its integrability norms.
    CheckModel(CommonArgs),
    /// List the built-in models.
    ListModels,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Built-in model name or path to a TOML config.
    #[arg(long)]
    model: String,
    /// Nodes per axis.
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value = "midpoint")]
    rule: QuadratureRule,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Analysis(String),
}

impl From<fockspectra::Error> for Failure {
    fn from(e: fockspectra::Error) -> Self {
        Failure::Analysis(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

struct Setup {
    spec: ModelSpec,
    grid: Grid,
    pair_grid: PairGrid,
    out: PathBuf,
}

fn check_cap(d: usize, n: usize) -> Outcome {
    let cap = if d == 1 { MAX_N_1D } else { MAX_N_2D };
    if n > cap {
        return Err(Failure::Usage(format!(
            "--n {n} exceeds the limit of {cap} nodes per axis for d = {d}"
        )));
    }
    Ok(())
}

fn load(source: &str) -> Result<ModelSpec, Failure> {
    load_model(source).map_err(|e| match e {
        fockspectra::Error::NonFinite { .. } => {
            Failure::Analysis(format!("Assumption A check failed for `{source}`: {e}"))
        }
        e => Failure::Analysis(format!("cannot load model `{source}`: {e}")),
    })
}

fn setup(args: &CommonArgs) -> Result<Setup, Failure> {
    let spec = load(&args.model)?;
    check_cap(spec.d, args.n)?;
    let grid = Grid::new(spec.d, spec.a, args.n, args.rule)?;
    check_assumption_a(&spec, &grid)
        .map_err(|e| Failure::Analysis(format!("Assumption A check failed: {e}")))?;
    std::fs::create_dir_all(&args.out).map_err(fockspectra::Error::from)?;
    Ok(Setup {
        pair_grid: PairGrid::new(&grid),
        spec,
        grid,
        out: args.out.clone(),
    })
}

fn header(s: &Setup) -> Vec<String> {
    report::model_lines(
        &s.spec.name,
        s.spec.d,
        s.spec.a,
        s.grid.n_per_dim(),
        s.grid.rule().name(),
    )
}

fn ess_sections(s: &Setup, rep: &mut TextReport) -> Result<EssSpecReport, Failure> {
    let ess = essential_spectrum(&s.spec, &s.grid, &s.pair_grid, &SearchParams::default())?;
    rep.section("model", header(s))
        .section("sigma1", report::sigma1_lines(&ess))
        .section("sigma2", report::sigma2_lines(&ess));
    report::write_sigma2_csv(&ess, s.spec.d, &s.out.join("sigma2.csv"))?;
    Ok(ess)
}

fn essspec(args: &CommonArgs) -> Outcome {
    let s = setup(args)?;
    let mut rep = TextReport::new();
    let ess = ess_sections(&s, &mut rep)?;
    let zs = [ess.lower_threshold() - 1.0, ess.upper_threshold() + 1.0];
    write_delta_profile_csv(&s.spec, &s.grid, &zs, &s.out.join("delta_profile.csv"))?;
    rep.write(&s.out.join("report.txt"))?;
    print!("{}", rep.render());
    Ok(())
}

fn discrete(args: &CommonArgs, above: bool, dump_matrix: bool) -> Outcome {
    let s = setup(args)?;
    let mut rep = TextReport::new();
    let ess = ess_sections(&s, &mut rep)?;
    let below = discrete_spectrum_below(&s.spec, &s.grid, &s.pair_grid, &ess)?;
    rep.section("discrete-below", report::discrete_lines(&below));
    if above {
        let up = discrete_spectrum_above(&s.spec, &s.grid, &s.pair_grid, &ess)?;
        rep.section("discrete-above", report::discrete_lines(&up));
    }
    if dump_matrix {
        let blocks = assemble_blocks(&s.spec, &s.grid, &s.pair_grid)?;
        write_matrix_csv(&blocks.assemble_a(), &s.out.join("a_matrix.csv"))?;
    }
    rep.write(&s.out.join("report.txt"))?;
    print!("{}", rep.render());
    Ok(())
}

fn parse_sweep(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("--z-sweep expects lo:hi:count, got `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if count == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .collect())
}

fn bs_check(args: &CommonArgs, z: &[f64], sweep: Option<&str>) -> Outcome {
    let mut zs = z.to_vec();
    if let Some(sw) = sweep {
        zs.extend(parse_sweep(sw)?);
    }
    if zs.is_empty() {
        return Err(Failure::Usage("bs-check needs --z or --z-sweep".into()));
    }
    let s = setup(args)?;
    let rows = counting_sweep(&s.spec, &s.grid, &s.pair_grid, &zs)?;
    report::write_counting_csv(&rows, &s.out.join("counting.csv"))?;
    let mut rep = TextReport::new();
    rep.section("model", header(&s))
        .section("counting-checks", report::counting_lines(&rows));
    rep.write(&s.out.join("report.txt"))?;
    print!("{}", rep.render());
    if let Some(bad) = rows.iter().find(|r| !r.agree) {
        return Err(Failure::Analysis(format!(
            "eigenvalue counts disagree at z = {}: {} / {} / {}",
            bad.z, bad.count_a, bad.count_s, bad.count_t
        )));
    }
    Ok(())
}

fn finiteness(args: &CommonArgs, levels: &[usize], delta: Option<f64>) -> Outcome {
    let s = setup(args)?;
    for &n in levels {
        check_cap(s.spec.d, n)?;
    }
    let mut rep = TextReport::new();
    let ess = ess_sections(&s, &mut rep)?;
    let t0 = locate_t0(&s.spec, &s.grid, &ess).ok_or_else(|| {
        Failure::Analysis("no isolated minimizer of w2 on the diagonal was found".into())
    })?;
    let est = estimate_exponents(
        &s.spec,
        &s.grid,
        &ess,
        &t0,
        delta.unwrap_or(s.spec.a / 4.0),
    )?;
    let grids = levels
        .iter()
        .map(|&n| Grid::new(s.spec.d, s.spec.a, n, args.rule))
        .collect::<fockspectra::Result<Vec<_>>>()?;
    let fin = finiteness_verdict(&s.spec, &grids, &est, &VerdictParams::default())?;
    write_exponents_csv(&est, &s.out.join("exponents.csv"))?;
    rep.section("finiteness", report::finiteness_lines(&fin));
    rep.write(&s.out.join("report.txt"))?;
    print!("{}", rep.render());
    Ok(())
}

fn singular_seq(model: &str, x0: &[f64], y0: &[f64], n_max: usize, out: &Path) -> Outcome {
    let spec = load(model)?;
    if x0.len() != spec.d || y0.len() != spec.d {
        return Err(Failure::Usage(format!(
            "--x0 and --y0 need {} comma-separated coordinates",
            spec.d
        )));
    }
    if n_max == 0 {
        return Err(Failure::Usage("--n-max must be positive".into()));
    }
    std::fs::create_dir_all(out).map_err(fockspectra::Error::from)?;
    let cfg = SingularSeqConfig::new(x0.to_vec(), y0.to_vec(), n_max);
    let seq = singular_sequence_norms(&spec, &cfg)?;
    write_singular_seq_csv(&seq, &out.join("singular_seq.csv"))?;
    let mut rep = TextReport::new();
    rep.section("model", vec![format!("model: {}", spec.name)])
        .section("singular-sequence", report::singular_lines(&seq));
    rep.write(&out.join("report.txt"))?;
    print!("{}", rep.render());
    Ok(())
}

fn check_model(args: &CommonArgs) -> Outcome {
    let spec = load(&args.model)?;
    check_cap(spec.d, args.n)?;
    let grid = Grid::new(spec.d, spec.a, args.n, args.rule)?;
    let a = check_assumption_a(&spec, &grid)
        .map_err(|e| Failure::Analysis(format!("Assumption A check failed: {e}")))?;
    std::fs::create_dir_all(&args.out).map_err(fockspectra::Error::from)?;
    let mut rep = TextReport::new();
    rep.section(
        "model",
        report::model_lines(&spec.name, spec.d, spec.a, args.n, args.rule.name()),
    )
    .section("assumption-a", report::assumption_lines(&a));
    rep.write(&args.out.join("report.txt"))?;
    print!("{}", rep.render());
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Essspec(c) => essspec(&c),
        Command::Discrete {
            common,
            above,
            dump_matrix,
        } => discrete(&common, above, dump_matrix),
        Command::BsCheck { common, z, z_sweep } => bs_check(&common, &z, z_sweep.as_deref()),
        Command::Finiteness {
            common,
            levels,
            delta,
        } => finiteness(&common, &levels, delta),
        Command::SingularSeq {
            model,
            x0,
            y0,
            n_max,
            out,
        } => singular_seq(&model, &x0, &y0, n_max, &out),
        Command::CheckModel(c) => check_model(&c),
        Command::ListModels => {
            for name in BUILTIN_NAMES {
                println!("{name}");
            }
            Ok(())
        }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("FOCKSPECTRA_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("FOCKSPECTRA_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match init_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Analysis(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

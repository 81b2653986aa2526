use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use witten_index::clifford::build_irreducible_rep;
use witten_index::geometry_examples::{
    pin_index_well_defined_check, pin_sphere_indices, poincare_hopf, submanifold_vanishing, DeRhamModule,
    PinSectionSpec, SubmanifoldSpec, VectorFieldSpec,
};
use witten_index::instances::{random_odd_instance, random_proper_instance, torus_configuration};
use witten_index::local_index::{
    default_cutoff, fredholm_index_oracle, global_index, hermite_kernel_oracle, local_index_eigenspace, GridConfig,
    LocalData, LocalIndexResult, ModelOperator,
};
use witten_index::perturbation::{check_proper, LinearPerturbation, DEFAULT_SAMPLES};
use witten_index::spectral_sim::{
    circle_counterexample, circle_morse_witten, cluster_report, geometric_range, torus_de_rham_index, write_csv,
    MorseFunction, SpectrumResult, TorusField,
};
use witten_index::Error;

/// Index computations for perturbed Dirac operators.
#[derive(Parser)]
#[command(name = "witten-index", version)]
struct Cli {
    /// Seed for every random choice made by the command.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the main output here instead of stdout.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the irreducible Clifford representation and check its identities.
    Clifford {
        #[arg(short = 'n', value_parser = clap::value_parser!(u64).range(1..=12))]
        n: u64,
        /// Print the representation and report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Local index of a linear perturbation given as JSON, or the global index
    /// of a JSON list of them.
    LocalIndex {
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Run every applicable method and fail if they disagree.
        #[arg(long)]
        cross_check: bool,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        cutoff: Option<usize>,
    },
    /// Emit a random proper perturbation spec (n = 1, 2, or 3 for the odd case).
    RandomInstance {
        #[arg(short = 'n', value_parser = clap::value_parser!(u64).range(1..=3))]
        n: u64,
        /// Emit the singular points of Σ sin(x_j)·Z_j on the torus instead.
        #[arg(long)]
        torus: bool,
    },
    /// Emit the de Rham perturbation spec for a linear vector field.
    DeRhamSpec {
        /// Jacobian entries, row-major, comma separated (n² values).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        linearization: Vec<f64>,
    },
    /// Spectra of global deformed operators over a sweep of s.
    Spectrum {
        #[arg(value_enum)]
        kind: SpectrumKind,
        /// A single value or a geometric range a:b:k.
        #[arg(long = "s", default_value = "10")]
        s: String,
        /// Fourier mode cutoff.
        #[arg(short = 'N', long = "modes", visible_alias = "N")]
        modes: Option<usize>,
        /// Vector field for torus-field: standard or constant.
        #[arg(long, default_value = "standard")]
        field: String,
        /// Write the JSON summary here (printed to stdout when --out is given).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Poincaré–Hopf from zero linearizations.
    PoincareHopf {
        #[arg(long, conflicts_with = "spec")]
        preset: Option<String>,
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Index of the pin section on the sphere of dimension 2m.
    PinSphere {
        #[arg(short = 'm', value_parser = clap::value_parser!(u64).range(1..=8))]
        m: u64,
    },
    /// Stability of a pin-section index under random refactorizations.
    PinCheck {
        spec: PathBuf,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Induced index on an odd-codimension submanifold.
    Submanifold {
        #[arg(long, default_value_t = 2)]
        n_m: usize,
        #[arg(long, default_value_t = 1)]
        normal_rank: usize,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        omega: f64,
    },
}

/// A single singular point or a whole configuration.
#[derive(Deserialize)]
#[serde(untagged)]
enum SpecFile {
    Single(LinearPerturbation),
    Configuration(Vec<LinearPerturbation>),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    Eigenspace,
    Hermite,
    Grid,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpectrumKind {
    CircleCounterexample,
    CircleMorse,
    TorusField,
}

/// A failed command with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_inconclusive() {
            4
        } else if matches!(e.root(), Error::Numerical(_)) {
            1
        } else {
            3
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self {
            code: 1,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> io::Result<()> {
    match out {
        Some(p) => fs::write(p, text),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn run(cli: &Cli) -> CmdResult {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Clifford { n, json } => {
            let rep = build_irreducible_rep(*n as usize)?;
            let report = rep.invariants();
            let ok = report.max() <= 1e-12;
            if *json {
                emit(
                    out,
                    &to_json(
                        &json!({ "seed": cli.seed, "n": rep.n, "dim": rep.dim, "representation": rep, "invariants": report, "ok": ok }),
                    ),
                )?;
            } else {
                let text = format!(
                    "n = {}, dim = {}\nclifford relation residual  {:.3e}\nskew-adjoint residual       {:.3e}\nchirality square residual   {:.3e}\nchirality grading residual  {:.3e}\n{}\n",
                    rep.n,
                    rep.dim,
                    report.clifford,
                    report.skew_adjoint,
                    report.chirality_square,
                    report.chirality_grading,
                    if ok { "ok" } else { "FAILED" }
                );
                emit(out, &text)?;
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::LocalIndex {
            spec,
            method,
            cross_check,
            radius,
            points,
            cutoff,
        } => {
            let p = match read_json(spec)? {
                SpecFile::Single(p) => p.validated()?,
                SpecFile::Configuration(points) => {
                    let points = points
                        .into_iter()
                        .map(LinearPerturbation::validated)
                        .collect::<Result<Vec<_>, _>>()?;
                    let report = global_index(&points, None)?;
                    let index = report.total;
                    emit(out, &to_json(&json!({ "index": index, "per_point": report.per_point })))?;
                    return Ok(0);
                }
            };
            let report = check_proper(&p, DEFAULT_SAMPLES);
            if let Some(why) = report.failure() {
                return Err(Error::Improper(why).into());
            }
            let mut grid = GridConfig::default_for(p.n);
            if let Some(r) = radius {
                grid.radius = *r;
            }
            if let Some(k) = points {
                grid.points = *k;
            }
            let cutoff = cutoff.unwrap_or(default_cutoff(p.n));
            local_index_cmd(cli.seed, out, &p, *method, *cross_check, grid, cutoff)
        }
        Command::RandomInstance { n, torus } => {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let p = match n {
                3 => random_odd_instance(&mut rng)?,
                n => random_proper_instance(*n as usize, &mut rng)?,
            };
            if *torus {
                emit(out, &to_json(&torus_configuration(&p)?))?;
            } else {
                emit(out, &to_json(&p))?;
            }
            Ok(0)
        }
        Command::DeRhamSpec { linearization } => {
            let n = (linearization.len() as f64).sqrt().round() as usize;
            if n * n != linearization.len() || n == 0 {
                return Err(Failure::usage(format!(
                    "linearization needs n² entries, got {}",
                    linearization.len()
                )));
            }
            let jac = nalgebra_from_rows(n, linearization);
            let p = DeRhamModule::new(n)?.perturbation(&jac)?;
            emit(out, &to_json(&p))?;
            Ok(0)
        }
        Command::Spectrum {
            kind,
            s,
            modes,
            field,
            summary,
        } => spectrum_cmd(cli.seed, out, *kind, s, *modes, field, summary.as_deref()),
        Command::PoincareHopf { preset, spec } => {
            let vf = match (preset, spec) {
                (Some(name), None) => VectorFieldSpec::preset(name)
                    .ok_or_else(|| Failure::usage(format!("unknown preset {name:?} (sphere, torus, saddle)")))?,
                (None, Some(path)) => read_json(path)?,
                _ => return Err(Failure::usage("give --preset or --spec")),
            };
            let report = poincare_hopf(&vf, None)?;
            emit(
                out,
                &to_json(&json!({ "seed": cli.seed, "per_zero": report.per_zero, "chi": report.chi })),
            )?;
            Ok(0)
        }
        Command::PinSphere { m } => {
            let report = pin_sphere_indices(*m as usize)?;
            emit(out, &to_json(&report))?;
            Ok(0)
        }
        Command::PinCheck { spec, trials } => {
            let spec: PinSectionSpec = read_json(spec)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let report = pin_index_well_defined_check(&spec, *trials, &mut rng)?;
            let stable = report.stable;
            emit(out, &to_json(&json!({ "seed": cli.seed, "report": report })))?;
            Ok(if stable { 0 } else { 1 })
        }
        Command::Submanifold {
            n_m,
            normal_rank,
            omega,
        } => {
            let report = submanifold_vanishing(&SubmanifoldSpec {
                n_m: *n_m,
                normal_rank: *normal_rank,
                omega: *omega,
            })?;
            emit(out, &to_json(&report))?;
            Ok(0)
        }
    }
}

fn nalgebra_from_rows(n: usize, v: &[f64]) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(n, n, v)
}

fn local_index_cmd(
    seed: u64,
    out: Option<&Path>,
    p: &LinearPerturbation,
    method: MethodArg,
    cross_check: bool,
    grid: GridConfig,
    cutoff: usize,
) -> CmdResult {
    let data = LocalData::from_perturbation(p);
    let eigenspace = || data.normalized().and_then(|d| local_index_eigenspace(&d));
    let hermite = || {
        data.normalized()
            .and_then(|d| hermite_kernel_oracle(&ModelOperator::from_data(&d), cutoff))
    };
    let grid_run = || fredholm_index_oracle(&data, grid);

    if cross_check {
        let mut results: Vec<LocalIndexResult> = vec![eigenspace()?, hermite()?];
        if p.n <= 2 {
            results.push(grid_run()?);
        }
        let agree = results.windows(2).all(|w| w[0].index == w[1].index);
        emit(
            out,
            &to_json(&json!({ "seed": seed, "results": results, "agree": agree })),
        )?;
        return Ok(if agree { 0 } else { 1 });
    }
    let result = match method {
        MethodArg::Eigenspace => eigenspace()?,
        MethodArg::Hermite => hermite()?,
        MethodArg::Grid => grid_run()?,
        MethodArg::Auto => match eigenspace() {
            Ok(r) => r,
            Err(Error::NonScalarSquare { .. }) if p.n <= 2 => grid_run()?,
            Err(e) => return Err(e.into()),
        },
    };
    emit(out, &to_json(&result))?;
    Ok(0)
}

fn parse_range(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::usage(format!("invalid s range {s:?}; use a value or a:b:k"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [one] => {
            let v: f64 = one.parse().map_err(|_| bad())?;
            if !(v >= 0.0) || !v.is_finite() {
                return Err(bad());
            }
            Ok(vec![v])
        }
        [a, b, k] => {
            let a: f64 = a.parse().map_err(|_| bad())?;
            let b: f64 = b.parse().map_err(|_| bad())?;
            let k: usize = k.parse().map_err(|_| bad())?;
            geometric_range(a, b, k).map_err(|e| Failure::usage(e.to_string()))
        }
        _ => Err(bad()),
    }
}

#[derive(Serialize)]
struct PointSummary {
    s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    dim_ker_plus: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dim_ker_minus: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    index: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    central_k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    integer_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    flatness: Option<f64>,
}

impl PointSummary {
    fn from_result(r: &SpectrumResult) -> Self {
        let g = r.graded_counts;
        Self {
            s: r.s,
            dim_ker_plus: g.map(|g| g.dim_ker_plus),
            dim_ker_minus: g.map(|g| g.dim_ker_minus),
            index: g.map(|g| g.index()),
            central_k: r.central_k,
            integer_deviation: r.integer_deviation,
            flatness: r.flatness,
        }
    }
}

fn spectrum_cmd(
    seed: u64,
    out: Option<&Path>,
    kind: SpectrumKind,
    s: &str,
    modes: Option<usize>,
    field: &str,
    summary_path: Option<&Path>,
) -> CmdResult {
    let values = parse_range(s)?;
    let mut summary = serde_json::Map::new();
    summary.insert("seed".into(), json!(seed));
    let mut results: Vec<SpectrumResult> = Vec::new();
    match kind {
        SpectrumKind::CircleCounterexample => {
            let modes = modes.unwrap_or(256);
            summary.insert("kind".into(), json!("circle-counterexample"));
            summary.insert("modes".into(), json!(modes));
            for &s in &values {
                results.push(circle_counterexample(s, modes)?);
            }
        }
        SpectrumKind::CircleMorse => {
            let modes = modes.unwrap_or(256);
            summary.insert("kind".into(), json!("circle-morse"));
            summary.insert("modes".into(), json!(modes));
            let f = MorseFunction::cos_theta();
            for &s in &values {
                results.push(circle_morse_witten(s, modes, &f)?);
            }
            if results.len() >= 3 && results.iter().all(|r| r.s > 0.0) {
                let model = results[0].model.clone();
                let fit = cluster_report(&mut results, &model)?;
                summary.insert("fit".into(), json!(fit));
            }
        }
        SpectrumKind::TorusField => {
            let modes = modes.unwrap_or(24);
            let v = match field {
                "standard" => TorusField::standard(),
                "constant" => TorusField::constant(1.0, 0.0),
                other => return Err(Failure::usage(format!("unknown field {other:?} (standard, constant)"))),
            };
            summary.insert("kind".into(), json!("torus-field"));
            summary.insert("modes".into(), json!(modes));
            let mut combinatorial = None;
            let mut degree_kernels = Vec::new();
            for &s in &values {
                let r = torus_de_rham_index(&v, s, modes)?;
                combinatorial = Some(r.combinatorial_index);
                if let Some(k) = r.degree_kernels {
                    degree_kernels.push(json!({ "s": s, "kernels": k }));
                }
                results.push(r.spectrum);
            }
            summary.insert("combinatorial_index".into(), json!(combinatorial));
            if !degree_kernels.is_empty() {
                summary.insert("degree_kernels".into(), json!(degree_kernels));
            }
        }
    }
    let points: Vec<PointSummary> = results.iter().map(PointSummary::from_result).collect();
    summary.insert("points".into(), json!(points));

    let mut csv = Vec::new();
    write_csv(&mut csv, &results)?;
    let csv = String::from_utf8(csv).expect("ascii csv");
    emit(out, &csv)?;
    let summary_text = to_json(&summary);
    match (summary_path, out) {
        (Some(p), _) => fs::write(p, summary_text)?,
        (None, Some(_)) => emit(None, &summary_text)?,
        (None, None) => {}
    }
    Ok(0)
}

//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or usage.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::analysis::bentcore::bentcore_minimize;
use crate::analysis::report::{analyze_field, FieldReport};
use crate::analysis::singular::field_threshold;
use crate::analysis::winding::{circle_loop, classify_node_loop, winding_index_2d};
use crate::error::{Error, Result};
use crate::field::{Target, TensorField};
use crate::frames::{random_rotation, tensor2_from_frame, Frame};
use crate::grid::build_domain;
use crate::io::checkpoint::{read_checkpoint, write_checkpoint};
use crate::io::export::{node_frame, write_csv, write_vtk};
use crate::quaternion::{rotation_of, tetra_tensor, UnitQuaternion};
use crate::seed::seed_field;
use crate::solver::{relax_with, RelaxReport};
use config::{load_config, Overrides, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "tetraframe", version, about = "Relax and analyse Mercedes-Benz and tetrahedral frame fields")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for initial noise and random frames.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write a checkpoint every K iterations.
    #[arg(long = "checkpoint-every", global = true)]
    pub checkpoint_every: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Relax a field on a planar domain.
    Relax2d,
    /// Relax a field on a spatial domain.
    Relax3d,
    /// Per-node frame vectors of a checkpoint.
    Recover {
        checkpoint: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Homotopy class (or Mercedes-Benz index) along a circle in a planar checkpoint.
    Classify {
        checkpoint: PathBuf,
        /// Circle centre `x,y`.
        #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
        center: String,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Singular set, indices and boundary bookkeeping of a checkpoint.
    Analyze {
        checkpoint: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Minimizer of the bent-core potential.
    Bentcore {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
    },
    /// Frame vectors and tensor of a rotation.
    GenFrame {
        /// Rotation quaternion `a,b,c,d` (normalized).
        #[arg(long, allow_hyphen_values = true)]
        quaternion: Option<String>,
        /// Haar-random rotation drawn from `--seed`.
        #[arg(long)]
        random: bool,
        /// Planar Mercedes-Benz frame with first vector at this angle.
        #[arg(long, allow_hyphen_values = true)]
        mb_angle: Option<f64>,
    },
}

/// Result of a configured relaxation.
pub struct RelaxOutcome {
    pub field: TensorField,
    pub relax: RelaxReport,
    pub analysis: FieldReport,
}

/// Initial field of a run.
pub fn initial_field(cfg: &RunConfig) -> Result<TensorField> {
    let domain = build_domain(&cfg.shape, cfg.h)?;
    seed_field(
        domain,
        cfg.target,
        cfg.field_params(),
        cfg.bc_mode,
        &cfg.init.to_seed()?,
        &cfg.boundary_spec().to_seed()?,
        cfg.noise,
        cfg.seed,
    )
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Relaxes the configured field and analyses the result; with `out`, writes
/// periodic checkpoints and the final artifacts there.
pub fn run_relax(cfg: &RunConfig, out: Option<&Path>) -> Result<RelaxOutcome> {
    let mut field = initial_field(cfg)?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
    }
    let solver = cfg.solver_config();
    let relax = with_threads(cfg.threads, || {
        relax_with(&mut field, &solver, |it, f| match out {
            Some(dir) => write_checkpoint(&dir.join("checkpoint.bin"), f, it as u64),
            None => Ok(()),
        })
    })??;
    let analysis = with_threads(cfg.threads, || analyze_field(&field, cfg.threshold))?;
    if let Some(dir) = out {
        write_checkpoint(&dir.join("checkpoint.bin"), &field, relax.iterations as u64)?;
        write_csv(&dir.join("field.csv"), &field)?;
        write_vtk(&dir.join("field.vtk"), &field)?;
        let mut hist = String::from("iteration,energy\n");
        for (i, e) in relax.energy_history.iter().enumerate() {
            writeln!(hist, "{i},{e}").unwrap();
        }
        std::fs::write(dir.join("energy.csv"), hist)?;
        std::fs::write(dir.join("report.txt"), relax_summary(&relax) + &analysis.to_key_values())?;
    }
    Ok(RelaxOutcome { field, relax, analysis })
}

fn relax_summary(r: &RelaxReport) -> String {
    let mut s = String::new();
    writeln!(s, "iterations={}", r.iterations).unwrap();
    writeln!(s, "converged={}", r.converged).unwrap();
    writeln!(s, "dt={}", r.dt).unwrap();
    writeln!(s, "energy={}", r.final_energy.total()).unwrap();
    writeln!(s, "energy.dirichlet={}", r.final_energy.dirichlet).unwrap();
    writeln!(s, "energy.bulk={}", r.final_energy.bulk).unwrap();
    writeln!(s, "energy.surface={}", r.final_energy.surface).unwrap();
    writeln!(s, "monotone={}", r.is_monotone()).unwrap();
    writeln!(s, "elapsed_secs={:.3}", r.elapsed_secs).unwrap();
    s
}

fn parse_floats(text: &str, n: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Config(format!("cannot parse {text:?}: {e}"))))
        .collect::<Result<_>>()?;
    if v.len() != n {
        return Err(Error::Config(format!("expected {n} comma-separated numbers, got {text:?}")));
    }
    Ok(v)
}

fn emit(out: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(name), text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn recover_csv(field: &TensorField, threshold: f64) -> String {
    let dim = field.domain.dim;
    let n_vec = match field.target {
        Target::Tetra => 4,
        Target::Mb => 3,
    };
    let mut cols: Vec<String> = ["x", "y", "z"][..dim].iter().map(|s| s.to_string()).collect();
    cols.push("singular".into());
    for l in 1..=n_vec {
        for c in ["x", "y", "z"] {
            cols.push(format!("v{l}{c}"));
        }
    }
    let mut s = cols.join(",") + "\n";
    for o in 0..field.n_nodes() {
        let p = field.domain.active_position(o);
        let mut row: Vec<String> = p[..dim].iter().map(|v| v.to_string()).collect();
        match node_frame(field, o, threshold) {
            Some(vs) => {
                row.push("0".into());
                row.extend(vs.iter().flat_map(|v| [v[0], v[1], v[2]]).map(|x| x.to_string()));
            }
            None => {
                row.push("1".into());
                row.extend(std::iter::repeat_n("nan".to_string(), 3 * n_vec));
            }
        }
        s += &row.join(",");
        s.push('\n');
    }
    s
}

fn gen_frame(quaternion: Option<&str>, random: bool, mb_angle: Option<f64>, seed: u64) -> Result<String> {
    let mut s = String::new();
    if let Some(theta) = mb_angle {
        let f = Frame::mercedes(theta);
        for (l, v) in f.vectors.iter().enumerate() {
            writeln!(s, "v{}={},{}", l + 1, v[0], v[1]).unwrap();
        }
        let q = tensor2_from_frame(&f)?;
        writeln!(s, "q={},{}", q.q[0], q.q[1]).unwrap();
        return Ok(s);
    }
    let q = match (quaternion, random) {
        (Some(text), false) => {
            let v = parse_floats(text, 4)?;
            if v.iter().all(|x| *x == 0.0) {
                return Err(Error::Config("quaternion must be non-zero".into()));
            }
            UnitQuaternion::normalized(v[0], v[1], v[2], v[3])
        }
        (None, true) => {
            let r = random_rotation(3, seed);
            UnitQuaternion::from_rotation(&nalgebra::Matrix3::from_fn(|i, j| r[(i, j)]))
        }
        (None, false) => UnitQuaternion::ONE,
        (Some(_), true) => return Err(Error::Config("--quaternion and --random are exclusive".into())),
    };
    let [a, b, c, d] = q.components();
    writeln!(s, "quaternion={a},{b},{c},{d}").unwrap();
    let r = rotation_of(&q);
    for (l, v) in Frame::standard_tetrahedron().vectors3().iter().enumerate() {
        let w = r * v;
        writeln!(s, "v{}={},{},{}", l + 1, w[0], w[1], w[2]).unwrap();
    }
    let t = tetra_tensor(&q);
    writeln!(s, "q={}", t.q.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")).unwrap();
    Ok(s)
}

fn execute(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Relax2d | Command::Relax3d => {
            let want = if matches!(cli.command, Command::Relax2d) { 2 } else { 3 };
            let path = cli.config.as_deref().ok_or_else(|| Error::Config("--config is required".into()))?;
            let overrides = Overrides { seed: cli.seed, threads: cli.threads, checkpoint_every: cli.checkpoint_every };
            let cfg = load_config(path, &overrides)?;
            if cfg.shape.dim() != want {
                return Err(Error::Config(format!("this subcommand needs a {want}-dimensional shape")));
            }
            let outcome = run_relax(&cfg, out)?;
            print!("{}{}", relax_summary(&outcome.relax), outcome.analysis.to_key_values());
        }
        Command::Recover { checkpoint, threshold } => {
            let (field, _) = read_checkpoint(checkpoint)?;
            let t = threshold.unwrap_or_else(|| field_threshold(&field));
            emit(out, "frames.csv", &recover_csv(&field, t))?;
        }
        Command::Classify { checkpoint, center, radius, samples } => {
            let (field, _) = read_checkpoint(checkpoint)?;
            if field.domain.dim != 2 {
                return Err(Error::InvalidArgument("loops are sampled on planar checkpoints".into()));
            }
            let c = parse_floats(center, 2)?;
            let n = samples.unwrap_or_else(|| ((std::f64::consts::TAU * radius / (0.5 * field.domain.h)).ceil() as usize).max(16));
            let nodes = circle_loop(&field.domain, [c[0], c[1]], *radius, n)
                .ok_or_else(|| Error::InvalidArgument("loop leaves the domain".into()))?;
            match field.target {
                Target::Mb => println!("winding={}", winding_index_2d(&field, &nodes)?),
                Target::Tetra => {
                    let r = classify_node_loop(&field, &nodes)?;
                    println!("class={}\nelement={}\nsnap_distance={}", r.class, r.element, r.snap_distance);
                }
            }
        }
        Command::Analyze { checkpoint, threshold } => {
            let (field, iteration) = read_checkpoint(checkpoint)?;
            let report = with_threads(cli.threads, || analyze_field(&field, *threshold))?;
            emit(out, "report.txt", &format!("iteration={iteration}\n{}", report.to_key_values()))?;
        }
        Command::Bentcore { alpha, beta } => {
            let r = bentcore_minimize(*alpha, *beta);
            let mut s = format!("kind={}\nomega={}\n", r.kind, r.omega);
            if let Some(l) = r.lambdas {
                writeln!(s, "lambdas={},{},{}", l[0], l[1], l[2]).unwrap();
            }
            if let Some(n) = r.numerical_omega {
                writeln!(s, "numerical_omega={n}").unwrap();
            }
            writeln!(s, "restr_ok={}", r.restr_ok).unwrap();
            print!("{s}");
        }
        Command::GenFrame { quaternion, random, mb_angle } => {
            print!("{}", gen_frame(quaternion.as_deref(), *random, *mb_angle, cli.seed.unwrap_or(0))?);
        }
    }
    Ok(())
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) => 2,
                _ => 1,
            }
        }
    }
}

//! Batch front-end: generate reference fields, run analyses and the
//! identity suite, export plain-text plot columns.
//!
//! Exit codes: 0 on success, 1 when the identity suite fails, 2 on
//! configuration or data errors.

mod config;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use eikonal_lab::besov::{besov_seminorm, IndexRect};
use eikonal_lab::energy::{minimize_aviles_giga, BoundaryMode};
use eikonal_lab::entropy::DiscEntropy;
use eikonal_lab::fields::{field_from_u, jump_field, vortex};
use eikonal_lab::grid::{
    read_field, write_scalar_field, write_vector_field, AnyField, GridSpec, ScalarField,
    VectorField,
};
use eikonal_lab::inclusion::singular_set_scan;
use eikonal_lab::mollify::p_eps;
use eikonal_lab::production::{bump_lattice, weak_entropy_production, weak_flux_pairings, BumpTest};
use eikonal_lab::vec2::Vec2;
use eikonal_lab::verify::run_suite;

use config::{Config, VerifySettings};

#[derive(Parser)]
#[command(name = "eikonal-lab", about = "Numerical laboratory for Eikonal entropies", version)]
struct Cli {
    /// Worker threads (0 = library default)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity suite from a config file
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Directory for the suite CSV
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Seed override for the randomized rows
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate, analyze, or scan sampled fields
    Field {
        #[command(subcommand)]
        command: FieldCommand,
    },
    /// Convert a report CSV into whitespace plot columns
    ExportPlot {
        #[arg(long)]
        report: PathBuf,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Full grid spec as nx,ny,h
    #[arg(long, value_name = "NX,NY,H")]
    grid: Option<String>,
    /// Nodes per side (square grid over the unit square)
    #[arg(long, default_value_t = 128)]
    nx: usize,
    #[arg(long)]
    ny: Option<usize>,
    /// Origin as x,y
    #[arg(long, default_value = "0,0")]
    origin: String,
}

impl GridArgs {
    fn build(&self) -> Result<GridSpec> {
        let origin = parse_pair(&self.origin).context("--origin")?;
        let (nx, ny, h) = match &self.grid {
            Some(raw) => {
                let parts: Vec<&str> = raw.split(',').collect();
                if parts.len() != 3 {
                    bail!("--grid expects nx,ny,h");
                }
                (
                    parts[0].trim().parse().context("--grid nx")?,
                    parts[1].trim().parse().context("--grid ny")?,
                    parts[2].trim().parse().context("--grid h")?,
                )
            }
            None => {
                let ny = self.ny.unwrap_or(self.nx);
                (self.nx, ny, 1.0 / (self.nx as f64 - 1.0))
            }
        };
        Ok(GridSpec::new(Vec2::new(origin.0, origin.1), h, nx, ny)?)
    }
}

#[derive(Subcommand)]
enum FieldCommand {
    /// Write a field file from one of the generators
    Gen {
        #[command(subcommand)]
        generator: Generator,
    },
    /// Weak productions plus increment/seminorm/divergence summaries
    Analyze {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, value_enum, default_value_t = EntropyChoice::Both)]
        entropy: EntropyChoice,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Locate plaquettes with nonzero winding
    Scan {
        #[arg(long)]
        field: PathBuf,
        /// Output CSV (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Generator {
    /// Tangential unit field around a center
    Vortex {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        alpha: i8,
        /// Center as x,y (grid center when omitted)
        #[arg(long)]
        zeta: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Divergence-compatible jump across the grid center line
    Jump {
        #[command(flatten)]
        grid: GridArgs,
        /// Half-angle in radians, in (0, pi/2]
        #[arg(long)]
        beta: f64,
        /// Interface normal as x,y
        #[arg(long, default_value = "1,0")]
        nu: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Perpendicular gradient of a scalar field file
    FromU {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Gradient descent on the phase-field energy from a scalar field file
    Minimize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        step_size: f64,
        #[arg(long, value_enum, default_value_t = BoundaryChoice::Fixed)]
        boundary: BoundaryChoice,
        #[arg(long)]
        out: PathBuf,
        /// Energy trace CSV (step, energy, step_size)
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EntropyChoice {
    Sigma1,
    Sigma2,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryChoice {
    Fixed,
    Free,
}

fn parse_pair(raw: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        bail!("expected x,y");
    }
    Ok((
        parts[0].trim().parse().context("bad x component")?,
        parts[1].trim().parse().context("bad y component")?,
    ))
}

fn load_vector_field(path: &Path) -> Result<VectorField> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    match read_field(BufReader::new(file), &path.display().to_string())? {
        AnyField::Vector(m) => Ok(m),
        other => bail!(
            "{} holds a {:?} field, need a vector field",
            path.display(),
            other.role()
        ),
    }
}

fn load_scalar_field(path: &Path) -> Result<ScalarField> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    match read_field(BufReader::new(file), &path.display().to_string())? {
        AnyField::Scalar(u) => Ok(u),
        other => bail!(
            "{} holds a {:?} field, need a scalar field",
            path.display(),
            other.role()
        ),
    }
}

fn write_out<F: FnOnce(&mut BufWriter<File>) -> Result<()>>(path: &Path, f: F) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_verify(config_path: &Path, out_dir: &Path, seed_override: Option<u64>) -> Result<i32> {
    let config = Config::load(config_path)?;
    let mut settings = VerifySettings::from_config(&config)?;
    if let Some(seed) = seed_override {
        settings.seed = seed;
    }
    let report = run_suite(&settings.grids, settings.identities.as_deref(), settings.seed)?;
    std::fs::create_dir_all(out_dir)?;
    let out = out_dir.join(&settings.out);
    write_out(&out, |w| {
        report.write_csv(w)?;
        Ok(())
    })?;
    let passed = report.rows.iter().filter(|r| r.pass).count();
    eprintln!(
        "suite: {passed}/{} rows pass, report at {}",
        report.rows.len(),
        out.display()
    );
    Ok(if report.all_pass() { 0 } else { 1 })
}

fn cmd_gen(generator: Generator) -> Result<i32> {
    match generator {
        Generator::Vortex {
            grid,
            alpha,
            zeta,
            out,
        } => {
            if alpha != 1 && alpha != -1 {
                bail!("--alpha must be 1 or -1");
            }
            let spec = grid.build()?;
            let zeta = match zeta {
                Some(raw) => {
                    let (x, y) = parse_pair(&raw).context("--zeta")?;
                    Vec2::new(x, y)
                }
                None => spec.center(),
            };
            let g = vortex(zeta, alpha, spec);
            write_out(&out, |w| {
                write_vector_field(w, &g.field)?;
                Ok(())
            })?;
            let block = g.singular_cells.first().copied();
            eprintln!(
                "vortex: unit defect {:.2e} off the singular block, center cell {:?}",
                g.field.unit_norm_defect(|i, j| {
                    block.is_some_and(|(ci, cj)| i.abs_diff(ci) <= 1 && j.abs_diff(cj) <= 1)
                }),
                block
            );
            Ok(0)
        }
        Generator::Jump { grid, beta, nu, out } => {
            let spec = grid.build()?;
            let (nu_x, nu_y) = parse_pair(&nu).context("--nu")?;
            let g = jump_field(beta, Vec2::new(nu_x, nu_y), spec)?;
            write_out(&out, |w| {
                write_vector_field(w, &g.field)?;
                Ok(())
            })?;
            eprintln!("jump: unit defect {:.2e}", g.field.unit_norm_defect(|_, _| false));
            Ok(0)
        }
        Generator::FromU { input, out } => {
            let u = load_scalar_field(&input)?;
            let m = field_from_u(&u)?;
            write_out(&out, |w| {
                write_vector_field(w, &m)?;
                Ok(())
            })?;
            eprintln!("from-u: unit defect {:.2e}", m.unit_norm_defect(|_, _| false));
            Ok(0)
        }
        Generator::Minimize {
            input,
            epsilon,
            steps,
            step_size,
            boundary,
            out,
            trace,
        } => {
            let u0 = load_scalar_field(&input)?;
            let mode = match boundary {
                BoundaryChoice::Fixed => BoundaryMode::FixedRing,
                BoundaryChoice::Free => BoundaryMode::Free,
            };
            let (u, energy_trace) = minimize_aviles_giga(&u0, epsilon, steps, step_size, mode)?;
            write_out(&out, |w| {
                write_scalar_field(w, &u)?;
                Ok(())
            })?;
            if let Some(path) = trace {
                write_out(&path, |w| {
                    energy_trace.write_csv(w)?;
                    Ok(())
                })?;
            }
            let first = energy_trace.rows.first().map(|r| r.energy).unwrap_or(f64::NAN);
            let last = energy_trace.rows.last().map(|r| r.energy).unwrap_or(f64::NAN);
            eprintln!(
                "minimize: energy {first:.6e} -> {last:.6e} over {} steps",
                energy_trace.rows.len().saturating_sub(1)
            );
            Ok(0)
        }
    }
}

/// Off-singularity bump family sized to the grid.
fn analysis_bumps(spec: &GridSpec, exclusions: &[Vec2]) -> Vec<BumpTest> {
    let extent = ((spec.nx - 1).min(spec.ny - 1)) as f64 * spec.h;
    let radii = [0.08 * extent, 0.12 * extent, 0.16 * extent];
    bump_lattice(spec, 5, &radii)
        .into_iter()
        .filter(|b| exclusions.iter().all(|&z| b.avoids(z, 0.05 * extent)))
        .collect()
}

fn cmd_analyze(field_path: &Path, entropy: EntropyChoice, out_dir: &Path) -> Result<i32> {
    let m = load_vector_field(field_path)?;
    std::fs::create_dir_all(out_dir)?;

    let singular = singular_set_scan(&m).unwrap_or_default();
    let exclusions: Vec<Vec2> = singular.iter().map(|s| s.position).collect();
    let bumps = analysis_bumps(&m.spec, &exclusions);
    if bumps.is_empty() {
        bail!("no admissible test bumps on this grid");
    }

    let entropies: Vec<(&str, DiscEntropy)> = match entropy {
        EntropyChoice::Sigma1 => vec![("sigma1", DiscEntropy::JinKohn1)],
        EntropyChoice::Sigma2 => vec![("sigma2", DiscEntropy::JinKohn2)],
        EntropyChoice::Both => vec![
            ("sigma1", DiscEntropy::JinKohn1),
            ("sigma2", DiscEntropy::JinKohn2),
        ],
    };

    let mut summary: Vec<(String, f64)> = Vec::new();
    for (name, phi) in &entropies {
        let report = weak_entropy_production(&m, phi, &bumps)?;
        let path = out_dir.join(format!("productions_{name}.csv"));
        write_out(&path, |w| {
            report.write_csv(w)?;
            Ok(())
        })?;
        summary.push((format!("max_production_{name}"), report.max_abs()));
        summary.push((format!("l2_production_{name}"), report.l2()));
    }

    let weak_div = weak_flux_pairings(&m, &bumps)?;
    summary.push(("max_weak_divergence".into(), weak_div.max_abs()));

    let div = m.divergence()?;
    let far_div = {
        let mut worst: f64 = 0.0;
        for j in 0..div.spec.ny {
            for i in 0..div.spec.nx {
                let p = div.spec.node(i, j);
                if exclusions.iter().all(|&z| (p - z).norm() > 4.0 * m.spec.h) {
                    worst = worst.max(div.at(i, j).abs());
                }
            }
        }
        worst
    };
    summary.push(("max_pointwise_divergence_off_singular".into(), far_div));

    let min_side = m.spec.nx.min(m.spec.ny);
    let t_cells = (min_side.saturating_sub(9) / 4).clamp(1, 16);
    let window = IndexRect::with_margin(m.spec.nx, m.spec.ny, t_cells + 1);
    summary.push((
        format!("besov_seminorm_t{t_cells}h"),
        besov_seminorm(&m, &window, t_cells)?,
    ));

    let eps_cells = (min_side.saturating_sub(9) / 2).clamp(2, 8);
    let eps = eps_cells as f64 * m.spec.h;
    let p = p_eps(&m, eps)?;
    summary.push((format!("p_eps_l43_eps{eps_cells}h"), p.lp_norm(4.0 / 3.0)));

    summary.push(("unit_norm_defect".into(), m.unit_norm_defect(|_, _| false)));
    summary.push(("singular_count".into(), singular.len() as f64));
    summary.push(("bump_count".into(), bumps.len() as f64));

    write_out(&out_dir.join("summary.csv"), |w| {
        writeln!(w, "key,value")?;
        for (k, v) in &summary {
            writeln!(w, "{k},{v:.12e}")?;
        }
        Ok(())
    })?;
    eprintln!("analyze: {} bumps, summaries at {}", bumps.len(), out_dir.display());
    Ok(0)
}

fn cmd_scan(field_path: &Path, out: Option<PathBuf>) -> Result<i32> {
    let m = load_vector_field(field_path)?;
    let points = singular_set_scan(&m)?;
    fn emit<W: Write>(w: &mut W, points: &[eikonal_lab::inclusion::SingularPoint]) -> Result<()> {
        writeln!(w, "x,y,winding")?;
        for p in points {
            writeln!(w, "{:.12e},{:.12e},{}", p.position.x, p.position.y, p.winding)?;
        }
        Ok(())
    }
    match out {
        Some(path) => write_out(&path, |w| emit(w, &points))?,
        None => {
            let stdout = std::io::stdout();
            emit(&mut stdout.lock(), &points)?;
        }
    }
    eprintln!("scan: {} singular plaquettes", points.len());
    Ok(0)
}

fn cmd_export_plot(report: &Path, out: Option<PathBuf>) -> Result<i32> {
    let text = std::fs::read_to_string(report)
        .with_context(|| format!("cannot read {}", report.display()))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    let rows: Vec<&str> = lines.filter(|l| !l.trim().is_empty()).collect();

    let mut output = String::new();
    if header.is_empty() && rows.is_empty() {
        // vacuous report: empty output
    } else if header.starts_with("identity_id,") {
        let mut current = "";
        for row in &rows {
            let cols: Vec<&str> = row.split(',').collect();
            if cols.len() < 3 {
                bail!("malformed suite row: {row}");
            }
            if cols[0] != current {
                if !current.is_empty() {
                    output.push('\n');
                }
                output.push_str(&format!("# {}\n", cols[0]));
                current = cols[0];
            }
            output.push_str(&format!("{} {}\n", cols[1], cols[2]));
        }
    } else if header.starts_with("step,energy") {
        for row in &rows {
            let cols: Vec<&str> = row.split(',').collect();
            if cols.len() < 2 {
                bail!("malformed trace row: {row}");
            }
            output.push_str(&format!("{} {}\n", cols[0], cols[1]));
        }
    } else if header.starts_with("test_id,") {
        for row in &rows {
            let cols: Vec<&str> = row.split(',').collect();
            if cols.len() < 5 {
                bail!("malformed production row: {row}");
            }
            output.push_str(&format!("{} {}\n", cols[0], cols[4]));
        }
    } else {
        bail!("unrecognized report header: {header}");
    }

    match out {
        Some(path) => std::fs::write(&path, output)?,
        None => print!("{output}"),
    }
    Ok(0)
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .map_err(|e| anyhow!("cannot configure {} worker threads: {e}", cli.jobs))?;
    }
    match cli.command {
        Command::Verify { config, out_dir, seed } => cmd_verify(&config, &out_dir, seed),
        Command::Field { command } => match command {
            FieldCommand::Gen { generator } => cmd_gen(generator),
            FieldCommand::Analyze { field, entropy, out_dir } => cmd_analyze(&field, entropy, &out_dir),
            FieldCommand::Scan { field, out } => cmd_scan(&field, out),
        },
        Command::ExportPlot { report, out } => cmd_export_plot(&report, out),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

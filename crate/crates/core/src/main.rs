use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use germlab::constructions::{
    attach_connected_sum, break_bridge, build_bridge, build_example1, build_example3, build_example4,
    build_family_xi, remove_holder_triangle,
};
use germlab::germ::GermModel;
use germlab::knots::{knot_table, KnotTable};
use germlab::report::{invariants, verify, InvariantOptions, Suite, VerifyOptions};
use germlab::section::{dyadic_ladder, nesting_tree, section_at, DEFAULT_RESOLUTION};
use germlab::{GermError, Rational};

#[derive(Parser)]
#[command(name = "germlab", version, about = "Build surface germs, compute their invariants, and verify the examples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Random seed (the GERMLAB_SEED environment variable takes precedence).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Grid cells per unit of t.
    #[arg(long, global = true, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
    /// Output file (or prefix, for builds producing two models).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Obj,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Surgery {
    BreakBridge,
}

#[derive(Subcommand)]
enum Command {
    /// Write the model file(s) of an example.
    Build {
        /// example1, example3, example4, family, family-knot, family-segment or bridge.
        id: String,
        #[arg(long, default_value = "5")]
        k: Rational,
        #[arg(long, default_value_t = 0)]
        i: usize,
        #[arg(long, default_value = "3")]
        q: Rational,
        #[arg(long, default_value = "2")]
        beta: Rational,
        /// Break the bridge with this exponent after building it.
        #[arg(long)]
        p: Option<Rational>,
    },
    /// Link summary, nesting, knot invariants, tangent cone and arc exponents of a model.
    Invariants {
        model: PathBuf,
        #[arg(long, default_value_t = 0.125)]
        t: f64,
        #[arg(long, value_enum)]
        surgery: Option<Surgery>,
        /// Dyadic exponents `FROM:TO:STEP` of the tangent-cone ladder 2^-FROM … 2^-TO.
        #[arg(long, default_value = "4:14:1")]
        ladder: String,
    },
    /// Export the section of a model at one scale.
    Section {
        model: PathBuf,
        #[arg(long, default_value_t = 0.125)]
        t: f64,
    },
    /// Run a verification suite; exits 1 if any check fails.
    Verify {
        /// example1, example3, example4, main-theorem, properties or all.
        suite: String,
        /// Knot table JSON replacing the built-in one.
        #[arg(long)]
        knot_table: Option<PathBuf>,
        #[arg(long, default_value_t = germlab::metrics::MIN_DISTORTION_SAMPLES)]
        samples: usize,
    },
}

/// Failure classes of the exit-code contract.
enum Failure {
    Usage(String),
    Check(String),
}

impl From<GermError> for Failure {
    fn from(e: GermError) -> Self {
        match e {
            GermError::InvalidInput(_) | GermError::Parse(_) | GermError::Io(_) | GermError::Json(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Check(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = match std::env::var("GERMLAB_SEED") {
        Ok(s) => match s.trim().parse() {
            Ok(v) => v,
            Err(_) => {
                eprintln!("error: GERMLAB_SEED must be an unsigned integer, got {s:?}");
                return ExitCode::from(2);
            }
        },
        Err(_) => cli.seed,
    };
    match run(&cli, seed) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check(m)) => {
            eprintln!("check failed: {m}");
            ExitCode::from(1)
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_model(path: &Path) -> Result<GermModel, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    GermModel::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = base.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_else(|| ".json".into());
    base.with_file_name(format!("{stem}-{suffix}{ext}"))
}

fn parse_ladder(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("--ladder expects FROM:TO:STEP with 0 ≤ FROM ≤ TO and STEP ≥ 1, got {s:?}"));
    let parts: Vec<i32> = s.split(':').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    match parts[..] {
        [from, to, step] if 0 <= from && from <= to && step >= 1 => Ok(dyadic_ladder(from, to, step)),
        _ => Err(bad()),
    }
}

fn run(cli: &Cli, seed: u64) -> Result<u8, Failure> {
    match &cli.command {
        Command::Build { id, k, i, q, beta, p } => {
            if cli.format != Format::Json {
                return Err(Failure::Usage("models are written as JSON".into()));
            }
            let table = knot_table();
            let trefoil = || table.entry("trefoil").map(|e| e.vertices.clone());
            let models: Vec<(&str, GermModel)> = match id.as_str() {
                "example1" => {
                    let (a, b) = build_example1(*k)?;
                    vec![("x1", a), ("x2", b)]
                }
                "example3" => {
                    let (a, b) = build_example3(&trefoil()?, &table.entry("figure-eight")?.vertices)?;
                    vec![("x1", a), ("x2", b)]
                }
                "example4" => {
                    let (a, b) = build_example4()?;
                    vec![("x0", a), ("x1", b)]
                }
                "family" => vec![("", build_family_xi(*i)?)],
                "family-knot" => vec![("", attach_connected_sum(&build_family_xi(*i)?, &trefoil()?)?)],
                "family-segment" => vec![("", remove_holder_triangle(&build_family_xi(*i)?, *beta)?)],
                "bridge" => {
                    let m = build_bridge(*q, *beta)?;
                    vec![("", match p {
                        Some(p) => break_bridge(&m, "A", *p)?,
                        None => m,
                    })]
                }
                other => {
                    return Err(Failure::Usage(format!(
                        "unknown example {other:?}; expected example1, example3, example4, family, family-knot, family-segment or bridge"
                    )))
                }
            };
            let base = cli.out.clone().unwrap_or_else(|| PathBuf::from(format!("{id}.json")));
            for (suffix, m) in &models {
                let path = if suffix.is_empty() { base.clone() } else { with_suffix(&base, suffix) };
                write_out(Some(&path), &(m.to_json()? + "\n"))?;
                println!(
                    "wrote {} ({} sheets, {} arcs, {} bridges)",
                    path.display(),
                    m.sheets.len(),
                    m.arcs.len(),
                    m.bridges.len()
                );
            }
            Ok(0)
        }
        Command::Invariants { model, t, surgery, ladder } => {
            let ladder = parse_ladder(ladder)?;
            let m = read_model(model)?;
            let opts = InvariantOptions {
                t: *t,
                resolution: cli.resolution,
                seed,
                surgery: surgery.is_some(),
                ladder,
            };
            match cli.format {
                Format::Json => {
                    let rep = invariants(&m, &opts)?;
                    write_out(cli.out.as_deref(), &(serde_json::to_string_pretty(&rep).map_err(GermError::from)? + "\n"))?;
                    if let Some(out) = &cli.out {
                        eprintln!("wrote {}", out.display());
                    }
                }
                Format::Obj | Format::Csv => {
                    let link = section_at(&m, *t, cli.resolution)?;
                    let text = if cli.format == Format::Obj { link.to_obj() } else { link.to_csv() };
                    write_out(cli.out.as_deref(), &text)?;
                }
            }
            Ok(0)
        }
        Command::Section { model, t } => {
            let m = read_model(model)?;
            let link = section_at(&m, *t, cli.resolution)?;
            let text = match cli.format {
                Format::Json => link.to_json()? + "\n",
                Format::Obj => link.to_obj(),
                Format::Csv => link.to_csv(),
            };
            write_out(cli.out.as_deref(), &text)?;
            if cli.out.is_some() {
                let nesting = nesting_tree(&link).map(|t| t.describe()).unwrap_or_else(|_| "n/a".into());
                println!(
                    "t = {t}: {} components ({} closed, {} open), nesting {nesting}",
                    link.components.len(),
                    link.closed_count(),
                    link.open_count()
                );
            }
            Ok(0)
        }
        Command::Verify { suite, knot_table: table_path, samples } => {
            let suite = Suite::parse(suite)?;
            let table = match table_path {
                Some(p) => {
                    let text = std::fs::read_to_string(p)
                        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", p.display())))?;
                    KnotTable::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
                }
                None => knot_table().clone(),
            };
            let opts = VerifyOptions { seed, resolution: cli.resolution, samples: *samples, table };
            let report = verify(suite, &opts);
            for c in &report.checks {
                eprintln!("[{}] {} — observed {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.observed);
            }
            write_out(cli.out.as_deref(), &(report.to_json()? + "\n"))?;
            eprintln!(
                "suite {}: {} of {} checks passed",
                report.suite,
                report.checks.iter().filter(|c| c.pass).count(),
                report.checks.len()
            );
            Ok(if report.pass { 0 } else { 1 })
        }
    }
}

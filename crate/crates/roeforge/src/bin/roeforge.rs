use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use roeforge::cylinder::{slice_family, verify_family_properties, CylinderDescription};
use roeforge::error::Error;
use roeforge::generate::SuiteConfig;
use roeforge::jsonio::{
    self, load_homotopy, load_involution, load_map, load_matrix, load_space, MapFile,
};
use roeforge::maps::{closeness_distance, expansion_modulus, fiber_profile};
use roeforge::matrix::schur_constant;
use roeforge::report::VerificationReport;
use roeforge::rotation::t_grid;
use roeforge::suite::{closeness_report, pushforward_report, run_suite};

#[derive(Parser)]
#[command(
    name = "roeforge",
    version,
    about = "Exact checks for finite metric spaces, coarse maps, and the block-matrix algebras they induce"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check every metric axiom of a space file, with witnesses
    ValidateSpace {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Expansion modulus and fiber profile of a map
    CheckMap {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// sup-distance between two maps with the same source and target
    CheckCloseness {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Build the p-cylinder over a space and print it as a space file
    BuildCylinder {
        #[arg(long)]
        space: PathBuf,
        /// Heights, one per base point, e.g. --p 1,0,2
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<i64>,
    },
    /// Print the sliced family of maps induced by a coarse homotopy
    SliceFamily {
        #[arg(long)]
        homotopy: PathBuf,
        /// Defaults to 1 + max p, the point where the family is stationary
        #[arg(long)]
        n_max: Option<u32>,
    },
    /// Verify the five sliced-family properties of a coarse homotopy
    VerifyFamily {
        #[arg(long)]
        homotopy: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Verify the pushforward is a propagation-controlled isometric
    /// *-homomorphism on the given matrices
    VerifyPushforward {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
        /// Second matrix for the multiplicativity check; defaults to the first
        #[arg(long)]
        matrix2: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Verify the rotation homotopy between the pushforwards of two close maps
    VerifyHomotopy {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
        /// Number of t samples on [0,1]
        #[arg(long, default_value_t = 21)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the rotation matrix of an involution at one time
    RotPath {
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long)]
        t: f64,
    },
    /// Propagation, operator norm, and Schur slack of a matrix file
    MatrixInfo {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run every verifier over seeded generated instances
    RunSuite {
        /// Config file; defaults to the built-in configuration
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config seed; falls back to ROEFORGE_SEED
        #[arg(long, env = "ROEFORGE_SEED")]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Also write the report to a file
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn report_output(report: &VerificationReport, format: Format) -> String {
    match format {
        Format::Text => report.render_text(),
        Format::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
    }
}

fn print_report(report: &VerificationReport, format: Format) -> u8 {
    print!("{}", report_output(report, format));
    if report.passed() {
        0
    } else {
        1
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::ValidateSpace { file, format } => {
            let space = load_space(&file)?;
            let v = space.validate();
            match format {
                Format::Json => {
                    let doc = json!({
                        "passed": v.passed(),
                        "min_gap": v.min_gap,
                        "violations": v.violations,
                    });
                    println!("{}", serde_json::to_string_pretty(&doc).expect("serializes"));
                }
                Format::Text => {
                    if v.passed() {
                        println!(
                            "PASS: {} points, min off-diagonal gap {:?}",
                            space.n(),
                            v.min_gap
                        );
                    } else {
                        println!("FAIL: {} violations", v.violations.len());
                        for w in &v.violations {
                            println!("  {w:?}");
                        }
                    }
                }
            }
            Ok(if v.passed() { 0 } else { 1 })
        }
        Command::CheckMap { file, format } => {
            let f = load_map(&file)?;
            let modulus = expansion_modulus(&f);
            let fibers = fiber_profile(&f);
            match format {
                Format::Json => {
                    let doc = json!({
                        "expansion_modulus": modulus.table,
                        "fiber_profile": fibers,
                    });
                    println!("{}", serde_json::to_string_pretty(&doc).expect("serializes"));
                }
                Format::Text => {
                    println!("expansion modulus (N -> M):");
                    for (n, m) in &modulus.table {
                        println!("  {n} -> {m}");
                    }
                    println!(
                        "fibers: max cardinality {}, max diameter {}",
                        fibers.max_cardinality, fibers.max_diameter
                    );
                }
            }
            Ok(0)
        }
        Command::CheckCloseness { f, g, format } => {
            let fm = load_map(&f)?;
            let gm = load_map(&g)?;
            let d = closeness_distance(&fm, &gm)?;
            match format {
                Format::Json => println!("{}", json!({ "closeness_distance": d })),
                Format::Text => println!("closeness distance: {d}"),
            }
            Ok(0)
        }
        Command::BuildCylinder { space, p } => {
            let base = load_space(&space)?;
            let cyl = roeforge::cylinder::build_cylinder(base, &p)?;
            let desc = CylinderDescription::from(&cyl);
            println!("{}", serde_json::to_string_pretty(&desc).expect("serializes"));
            Ok(0)
        }
        Command::SliceFamily { homotopy, n_max } => {
            let data = load_homotopy(&homotopy)?;
            let n_max = n_max.unwrap_or(data.cylinder.max_height() + 1);
            let family = slice_family(&data, n_max)?;
            let docs: Vec<MapFile> = family.iter().map(MapFile::from_map).collect();
            println!("{}", serde_json::to_string_pretty(&docs).expect("serializes"));
            Ok(0)
        }
        Command::VerifyFamily { homotopy, format } => {
            let data = load_homotopy(&homotopy)?;
            let family = slice_family(&data, data.cylinder.max_height() + 1)?;
            let report = verify_family_properties(&family, &data);
            Ok(print_report(&report, format))
        }
        Command::VerifyPushforward {
            map,
            matrix,
            matrix2,
            format,
        } => {
            let f = load_map(&map)?;
            let m1 = load_matrix(&matrix)?;
            let m2 = match matrix2 {
                Some(p) => load_matrix(&p)?,
                None => m1.clone(),
            };
            let tol = roeforge::generate::Tolerances::default();
            let alpha = Complex64::new(0.5, -1.5);
            let report = pushforward_report(&f, &m1, &m2, alpha, &tol)?;
            Ok(print_report(&report, format))
        }
        Command::VerifyHomotopy {
            f,
            g,
            matrix,
            samples,
            format,
        } => {
            let fm = load_map(&f)?;
            let gm = load_map(&g)?;
            let m = load_matrix(&matrix)?;
            let report = closeness_report(&fm, &gm, &m, &t_grid(samples))?;
            Ok(print_report(&report, format))
        }
        Command::RotPath { sigma, t } => {
            let inv = load_involution(&sigma)?;
            let r = inv.rotation_matrix(t)?;
            let rows: Vec<Vec<f64>> = (0..r.nrows())
                .map(|i| (0..r.ncols()).map(|j| r[(i, j)]).collect())
                .collect();
            println!("{}", serde_json::to_string_pretty(&rows).expect("serializes"));
            Ok(0)
        }
        Command::MatrixInfo { file, format } => {
            let m = load_matrix(&file)?;
            let space = m
                .index()
                .as_plain()
                .expect("file matrices have plain indices")
                .clone();
            let prop = m.propagation();
            let norm = m.operator_norm();
            let max_block = m.max_block_norm();
            let n = schur_constant(&space, prop);
            let bound = n as f64 * max_block;
            match format {
                Format::Json => {
                    let doc = json!({
                        "points": space.n(),
                        "block_dim": m.block_dim(),
                        "nonzero_blocks": m.n_blocks(),
                        "propagation": prop,
                        "operator_norm": norm,
                        "max_block_norm": max_block,
                        "schur_constant": n,
                        "schur_bound": bound,
                        "schur_slack": bound - norm,
                    });
                    println!("{}", serde_json::to_string_pretty(&doc).expect("serializes"));
                }
                Format::Text => {
                    println!("points: {}, block dim: {}", space.n(), m.block_dim());
                    println!("nonzero blocks: {}", m.n_blocks());
                    println!("propagation: {prop}");
                    println!("operator norm: {norm}");
                    println!("max block norm: {max_block}");
                    println!("schur constant N = {n}, bound {bound}, slack {}", bound - norm);
                }
            }
            Ok(0)
        }
        Command::RunSuite {
            config,
            seed,
            format,
            out,
        } => {
            let mut cfg: SuiteConfig = match config {
                Some(p) => jsonio::read_json(Path::new(&p))?,
                None => SuiteConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = run_suite(&cfg);
            let text = match format {
                Format::Json => report.to_json() + "\n",
                Format::Text => report.render_text(),
            };
            if let Some(path) = out {
                std::fs::write(&path, &text)?;
            }
            print!("{text}");
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

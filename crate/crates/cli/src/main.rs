use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dimfree_core::concentration::{
    distinct_distances, exact_profile, heuristic_profile, indicator_sweep, observable_diameter, random_deviation_checks,
    CandidateFamilies, ConcentrationProfile, EXACT_CAP, SWEEP_CAP,
};
use dimfree_core::harness::{verify_main_theorem, VerificationReport};
use dimfree_core::numeric::{format_ext, parse_radii};
use dimfree_core::poincare::{poincare_constant, PoincareOptions};
use dimfree_core::transport::{check_talagrand, check_theta_transport, write_records_csv, NuFamily};
use dimfree_core::{Error, FiniteMetricMeasureSpace, GradientKind, ProductSpace, Result};

#[derive(Parser)]
#[command(name = "dimfree", version, about = "Concentration and Poincaré checks on finite metric measure spaces")]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpaceArgs {
    /// Space file: JSON with `labels`, `dist`, `weights`.
    space: PathBuf,
    /// Product dimension.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Exponent of the l_p product distance.
    #[arg(long, default_value_t = 2.0)]
    p: f64,
}

impl SpaceArgs {
    fn load(&self) -> Result<(FiniteMetricMeasureSpace, ProductSpace)> {
        let space = FiniteMetricMeasureSpace::load(&self.space)?;
        if self.n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                value: 0.0,
                reason: "dimension must be at least 1",
            });
        }
        let view = space.view(self.n, self.p)?;
        Ok((space, view))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Gradient {
    Minus,
    Plus,
    Abs,
}

impl From<Gradient> for GradientKind {
    fn from(g: Gradient) -> Self {
        match g {
            Gradient::Minus => GradientKind::Minus,
            Gradient::Plus => GradientKind::Plus,
            Gradient::Abs => GradientKind::Abs,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load a space file and report the first violated invariant.
    Validate { space: PathBuf },
    /// Poincaré constant of a product of the space.
    Poincare {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, value_enum, default_value = "minus")]
        gradient: Gradient,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20_000)]
        grid_resolution: usize,
        #[arg(long, default_value_t = 500)]
        iterations: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Concentration profile; exact by enumeration unless --heuristic.
    Profile {
        #[command(flatten)]
        space: SpaceArgs,
        /// Radii as `start:stop:step`; defaults to every product distance.
        #[arg(long)]
        radii: Option<String>,
        /// Lower bound from candidate set families instead of enumeration.
        #[arg(long)]
        heuristic: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Deviation inequality for the inf-convolution against the exact profile.
    Qtcheck {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        radii: Option<String>,
        /// Time parameters, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        t: Vec<f64>,
        /// Deviation levels as `start:stop:step`.
        #[arg(long, default_value = "0.125:2:0.125")]
        levels: String,
        /// Number of random bounded-below functions.
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Transport-entropy inequality over a sampled family of measures.
    Transport {
        #[command(flatten)]
        space: SpaceArgs,
        /// Constant of the inequality.
        #[arg(long)]
        c: f64,
        /// Use the coordinate-wise quadratic-then-linear cost instead of W_p^p.
        #[arg(long)]
        theta: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Observable diameter at the given mass parameters.
    Obsdiam {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.5")]
        t: Vec<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run a verification suite.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
    /// Print a saved report and exit with its status.
    Report { report: PathBuf },
}

#[derive(Subcommand)]
enum Suite {
    /// Exact profiles against the Poincaré constant and its deviation bounds.
    MainTheorem {
        space: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_n: usize,
        /// Radii as `start:stop:step`; defaults to every distance at `max_n`.
        #[arg(long)]
        radii: Option<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

enum Outcome {
    Pass,
    Fail,
}

fn outcome(pass: bool) -> Outcome {
    if pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

/// Largest product whose pairwise distances serve as default radii.
const DEFAULT_RADII_POINTS: usize = 4096;

fn radii_for(view: &ProductSpace, spec: &Option<String>) -> Result<Vec<f64>> {
    match spec {
        Some(s) => parse_radii(s),
        None if view.len() <= DEFAULT_RADII_POINTS => Ok(distinct_distances(view)),
        None => Err(Error::DomainError(format!(
            "product space with {} points needs an explicit --radii start:stop:step",
            view.len()
        ))),
    }
}

fn exact_or_directed(view: &ProductSpace, radii: &[f64]) -> Result<ConcentrationProfile> {
    exact_profile(view, radii).map_err(|e| match e {
        Error::TooLarge { points, cap } => Error::DomainError(format!(
            "product space with {points} points exceeds the enumeration cap of {cap}; use `profile --heuristic`"
        )),
        e => e,
    })
}

fn run(cli: Cli) -> Result<Outcome> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Error::InvalidParameter {
                name: "workers",
                value: 0.0,
                reason: "at least one worker is required",
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Error::DomainError(e.to_string()))?;
    }
    match cli.command {
        Command::Validate { space } => {
            let s = FiniteMetricMeasureSpace::load(&space)?;
            let flags = s.flags();
            println!(
                "ok: {} points, support {}, diameter {}, dirac {}",
                s.len(),
                s.support().len(),
                format_ext(s.diameter()),
                flags.dirac
            );
            Ok(Outcome::Pass)
        }
        Command::Poincare {
            space,
            gradient,
            restarts,
            seed,
            grid_resolution,
            iterations,
            out,
        } => {
            let (_, view) = space.load()?;
            let opts = PoincareOptions {
                restarts,
                seed,
                grid_resolution,
                iterations,
            };
            let est = poincare_constant(&view, gradient.into(), &opts)?;
            write(&out, "poincare.json", &serde_json::to_string_pretty(&est.to_json())?)?;
            if let Some(w) = &est.witness {
                write(&out, "poincare_witness.csv", &w.to_csv_string())?;
            }
            println!("lambda = {}", format_ext(est.lambda));
            println!("method = {}, gradient = {}, seed = {}", est.method.name(), est.kind.name(), est.seed);
            Ok(Outcome::Pass)
        }
        Command::Profile {
            space,
            radii,
            heuristic,
            seed,
            out,
        } => {
            let (_, view) = space.load()?;
            let radii = radii_for(&view, &radii)?;
            let profile = if heuristic {
                let families = CandidateFamilies {
                    seed,
                    ..CandidateFamilies::default()
                };
                heuristic_profile(&view, &radii, &families)?
            } else {
                exact_or_directed(&view, &radii)?
            };
            write(&out, "profile.csv", &profile.to_csv_string(&radii))?;
            for (id, set) in profile.witness_sets() {
                let lines: Vec<String> = set.iter().map(|x| x.to_string()).collect();
                write(&out, &format!("witness_{id}.txt"), &(lines.join("\n") + "\n"))?;
            }
            print!("{}", profile.to_csv_string(&radii));
            println!("seed = {seed}");
            Ok(Outcome::Pass)
        }
        Command::Qtcheck {
            space,
            radii,
            t,
            levels,
            count,
            seed,
            out,
        } => {
            let (_, view) = space.load()?;
            let radii = radii_for(&view, &radii)?;
            let levels = parse_radii(&levels)?;
            let profile = exact_or_directed(&view, &radii)?;
            let mut pass = true;
            let mut sweeps = Vec::new();
            if view.len() <= SWEEP_CAP {
                for &tt in &t {
                    let s = indicator_sweep(&view, &profile, tt)?;
                    pass &= s.exact();
                    println!("indicator sweep t = {tt}: {} sets, max gap {}", s.sets, s.max_gap());
                    sweeps.push(json!({
                        "t": tt,
                        "sets": s.sets,
                        "max_gap": s.max_gap(),
                        "rows": s.rows.iter().map(|r| json!({
                            "rho": r.rho, "r": r.r, "regenerated": r.regenerated, "alpha": r.alpha,
                            "witness": r.witness.indices(),
                        })).collect::<Vec<_>>(),
                    }));
                }
            } else {
                println!("indicator sweep skipped: {} points exceed {SWEEP_CAP}", view.len());
            }
            let summary = random_deviation_checks(&view, &profile, count, seed, &t, &levels)?;
            pass &= summary.violations.is_empty();
            println!(
                "random functions: {} records, {} violations, seed = {seed}",
                summary.records,
                summary.violations.len()
            );
            let rec = |r: &dimfree_core::concentration::DeviationRecord| {
                json!({ "m": r.m, "t": r.t, "r": r.r, "lhs": r.lhs, "rhs": r.rhs, "violated": r.violated })
            };
            let doc = json!({
                "seed": seed,
                "count": count,
                "records": summary.records,
                "sweeps": sweeps,
                "violations": summary.violations.iter().map(rec).collect::<Vec<_>>(),
                "tightest": summary.tightest.as_ref().map(rec),
            });
            write(&out, "qtcheck.json", &serde_json::to_string_pretty(&doc)?)?;
            println!("{}", if pass { "PASS" } else { "FAIL" });
            Ok(outcome(pass))
        }
        Command::Transport {
            space,
            c,
            theta,
            seed,
            out,
        } => {
            let (_, view) = space.load()?;
            let family = NuFamily {
                seed,
                ..NuFamily::default()
            };
            let mu = view.measures().to_vec();
            let records = if theta {
                let check = check_theta_transport(&view, &mu, c, &family)?;
                println!(
                    "tightest C = {}, companion lambda = {}",
                    format_ext(check.tightest_constant),
                    format_ext(check.companion_lambda)
                );
                check.records
            } else {
                let check = check_talagrand(&view, &mu, c, space.p, &family)?;
                println!("observed constant = {}", format_ext(check.observed_constant));
                check.records
            };
            let mut buf = Vec::new();
            write_records_csv(&mut buf, &records)?;
            write(&out, "transport.csv", &String::from_utf8_lossy(&buf))?;
            let failed: Vec<&str> = records.iter().filter(|r| !r.satisfied).map(|r| r.nu_id.as_str()).collect();
            println!("{} measures, {} violations, seed = {seed}", records.len(), failed.len());
            if !failed.is_empty() {
                println!("violated by: {}", failed.join(", "));
            }
            Ok(outcome(failed.is_empty()))
        }
        Command::Obsdiam { space, t, out } => {
            let (_, view) = space.load()?;
            let mut csv = String::from("t,value,exact\n");
            for &tt in &t {
                let res = observable_diameter(&view, tt)?;
                let line = format!("{},{},{}", tt, format_ext(res.value), res.exact);
                println!("{line}");
                csv.push_str(&line);
                csv.push('\n');
            }
            write(&out, "obsdiam.csv", &csv)?;
            Ok(Outcome::Pass)
        }
        Command::Verify {
            suite: Suite::MainTheorem {
                space,
                max_n,
                radii,
                out,
            },
        } => {
            let s = FiniteMetricMeasureSpace::load(&space)?;
            if max_n == 0 {
                return Err(Error::InvalidParameter {
                    name: "max-n",
                    value: 0.0,
                    reason: "dimension must be at least 1",
                });
            }
            let radii = match &radii {
                Some(spec) => parse_radii(spec)?,
                None => {
                    let view = s.view(max_n, 2.0)?;
                    if view.len() > EXACT_CAP {
                        return Err(Error::TooLarge {
                            points: view.len(),
                            cap: EXACT_CAP,
                        });
                    }
                    distinct_distances(&view)
                }
            };
            let report = verify_main_theorem(&s, max_n, &radii)?;
            write(&out, "report.json", &report.to_json())?;
            print!("{}", report.to_text());
            Ok(outcome(report.passed()))
        }
        Command::Report { report } => {
            let text = fs::read_to_string(&report).map_err(|e| Error::Io(format!("{}: {e}", report.display())))?;
            let report = VerificationReport::from_json(&text)?;
            print!("{}", report.to_text());
            Ok(outcome(report.passed()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(2)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use captiveeq::mapper::{
    emit_cdf, emit_map, format_record, scan_grid, solve_point_with, ClassifyConfig, Equilibrium,
    GridConfig, PriceGrid,
};
use captiveeq::mixed::{CdfSpec, MixedContext, MixedEquilibrium, Piece};
use captiveeq::specfun::{ei_quadrature, ei_series, QuadTolerance};
use captiveeq::verify::{audit_mixed, audit_pure, AuditConfig, PureAuditConfig};
use captiveeq::{Error, Execution};
use clap::{Args, Parser, Subcommand};

const EXIT_AUDIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "captiveeq", version, about = "Price equilibria of a Hotelling duopoly with captive buyers")]
struct Cli {
    /// Relative error target of the Ei quadrature.
    #[arg(long, global = true, env = "CAPTIVEEQ_QUAD_TOL")]
    quad_tol: Option<f64>,

    /// Tolerance on profit deviations in audits.
    #[arg(long, global = true, env = "CAPTIVEEQ_AUDIT_TOL")]
    audit_tol: Option<f64>,

    /// Increase log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct Point {
    #[arg(long, allow_hyphen_values = true)]
    z1: f64,
    #[arg(long, allow_hyphen_values = true)]
    z2: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the region record of one location pair as a map row.
    Classify {
        #[command(flatten)]
        point: Point,
    },
    /// Print prices or CDF parameters, width, atoms and profits.
    Solve {
        #[command(flatten)]
        point: Point,
    },
    /// Run the full deviation audit; exit 0 only if it passes.
    Verify {
        #[command(flatten)]
        point: Point,
        #[arg(long, default_value_t = 0.001)]
        price_step: f64,
    },
    /// Sweep the location plane and write map.dat (and map_mixed.dat with --fine).
    Map {
        #[arg(long, default_value_t = 0.002)]
        spacing: f64,
        /// Also sweep z1 in (0.42, 0.6) at spacing 0.0005.
        #[arg(long)]
        fine: bool,
        /// Append informed-market profit columns.
        #[arg(long)]
        extra_columns: bool,
        /// Single-threaded sweep.
        #[arg(long)]
        sequential: bool,
        #[arg(long, env = "CAPTIVEEQ_OUT_DIR", default_value = ".")]
        out: PathBuf,
    },
    /// Write the equilibrium CDFs of a mixed point as four columns.
    Cdf {
        #[command(flatten)]
        point: Point,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.001)]
        price_step: f64,
    },
    /// Check kernel identities and the two Ei routes at a few points.
    Selftest,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(Error),
    Audit,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(msg) => Failure::Usage(msg),
            other => Failure::Numeric(other),
        }
    }
}

fn positive(name: &str, v: Option<f64>) -> Result<Option<f64>, Failure> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(Failure::Usage(format!("{name} must be positive, got {x}"))),
        other => Ok(other),
    }
}

fn classify_config(cli: &Cli) -> Result<ClassifyConfig, Failure> {
    let mut cfg = ClassifyConfig::default();
    if let Some(t) = positive("quad tolerance", cli.quad_tol)? {
        cfg.quad = QuadTolerance::new(t, cfg.quad.max_refinements)?;
    }
    if let Some(t) = positive("audit tolerance", cli.audit_tol)? {
        cfg.audit.tol_on = t;
        cfg.audit.tol_off = t;
    }
    Ok(cfg)
}

fn audit_config(cfg: &ClassifyConfig, price_step: f64) -> AuditConfig {
    AuditConfig {
        price_step,
        ..cfg.audit
    }
}

fn describe_cdf(name: &str, cdf: &CdfSpec) {
    for s in cdf.segments() {
        let shape = match s.piece {
            Piece::G { b, pi2 } => format!("g(p; b={b:.15}, pi2={pi2:.15})"),
            Piece::H { a } => format!("h(p; a={a:.15})"),
            Piece::Const { v } => format!("constant {v:.15}"),
        };
        println!("{name} segment [{:.15}, {:.15}] {shape}", s.lo, s.hi);
    }
    for a in cdf.atoms() {
        println!("{name} atom at {:.15} mass {:.15}", a.at, a.mass);
    }
}

fn mixed_of(point: Point, cfg: &ClassifyConfig) -> Result<MixedEquilibrium, Failure> {
    let sol = solve_point_with(point.z1, point.z2, cfg)?;
    match sol.equilibrium {
        Equilibrium::Mixed(eq) => Ok(eq),
        other => Err(Failure::Usage(format!(
            "({}, {}) is in region {}, not a mixed region",
            point.z1,
            point.z2,
            other.region().code()
        ))),
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = classify_config(cli)?;
    match &cli.command {
        Command::Classify { point } => {
            let sol = solve_point_with(point.z1, point.z2, &cfg)?;
            println!("{}", format_record(&sol.record(&cfg)?, false)?);
        }
        Command::Solve { point } => {
            let sol = solve_point_with(point.z1, point.z2, &cfg)?;
            let rec = sol.record(&cfg)?;
            println!("point {:.15} {:.15}", point.z1, point.z2);
            println!(
                "canonical {:.15} {:.15}{}",
                sol.canonical.z1(),
                sol.canonical.z2(),
                if sol.swapped { " (firms relabelled)" } else { "" }
            );
            println!("region {}", rec.region.code());
            match &sol.equilibrium {
                Equilibrium::Pure(e) => {
                    println!("kind {}", e.kind.name());
                    println!("canonical prices {:.15} {:.15}", e.prices.p1, e.prices.p2);
                }
                Equilibrium::Mixed(e) => {
                    println!("kind {}", e.kind.name());
                    println!("w {:.15}", e.w);
                    describe_cdf("F1", &e.f1);
                    describe_cdf("F2", &e.f2);
                }
                Equilibrium::Unresolved => println!("no equilibrium of a known type"),
            }
            println!("profits {:.15} {:.15}", rec.pi1, rec.pi2);
        }
        Command::Verify { point, price_step } => {
            let sol = solve_point_with(point.z1, point.z2, &cfg)?;
            let report = match &sol.equilibrium {
                Equilibrium::Pure(e) => {
                    let pc = PureAuditConfig {
                        price_step: *price_step,
                        tol: cfg.audit.tol_off,
                        ..PureAuditConfig::default()
                    };
                    audit_pure(e, &sol.canonical, &pc)?
                }
                Equilibrium::Mixed(e) => audit_mixed(e, &audit_config(&cfg, *price_step))?,
                Equilibrium::Unresolved => {
                    println!("region -1: nothing to verify");
                    return Err(Failure::Audit);
                }
            };
            println!("region {}", sol.equilibrium.region().code());
            println!("{report}");
            if !report.passes() {
                return Err(Failure::Audit);
            }
        }
        Command::Map {
            spacing,
            fine,
            extra_columns,
            sequential,
            out,
        } => {
            positive("spacing", Some(*spacing))?;
            let mut cfg = cfg;
            cfg.informed_profits = *extra_columns;
            let exec = if *sequential { Execution::Sequential } else { Execution::default() };
            std::fs::create_dir_all(out).map_err(|source| {
                Failure::Numeric(Error::Io {
                    path: out.clone(),
                    source,
                })
            })?;
            let mut jobs = vec![(GridConfig::with_spacing(*spacing), "map.dat")];
            if *fine {
                jobs.push((GridConfig::fine_window(), "map_mixed.dat"));
            }
            for (grid, name) in jobs {
                let records = scan_grid(&grid, &cfg, exec)?;
                let path = out.join(name);
                emit_map(&records, &path, *extra_columns)?;
                log::info!("wrote {} rows to {}", records.len(), path.display());
            }
        }
        Command::Cdf { point, out, price_step } => {
            let eq = mixed_of(*point, &cfg)?;
            let grid = PriceGrid {
                step: *price_step,
                ..PriceGrid::default()
            };
            emit_cdf(&eq, &grid, out)?;
        }
        Command::Selftest => selftest(&cfg)?,
    }
    Ok(())
}

fn selftest(cfg: &ClassifyConfig) -> Result<(), Failure> {
    let mut ok = true;
    let mut check = |name: &str, err: f64, tol: f64| {
        let pass = err <= tol;
        ok &= pass;
        println!("{} {name}: {err:.3e} (tol {tol:.0e})", if pass { "pass" } else { "FAIL" });
    };
    let mut worst: f64 = 0.0;
    for k in 1..=50 {
        let x = 0.1 * k as f64;
        let a = ei_series(x);
        let b = ei_quadrature(x, &cfg.quad)?;
        worst = worst.max(((a - b) / b).abs());
    }
    check("Ei series vs quadrature on (0, 5]", worst, 1e-12);
    for (z1, z2) in [(0.48, 0.6), (0.52, 0.65), (0.57, 0.67)] {
        let ctx = MixedContext::with_tolerance(captiveeq::market::LocationPair::new(z1, z2)?, cfg.quad)?;
        let l = ctx.lambda();
        let (mut haa, mut gbb, mut gd, mut hd): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
        for k in 1..=20 {
            let t = k as f64 / 21.0;
            let b = 1.0 - z1;
            let p = b - 0.1 * t;
            let pi = 0.7;
            let a = ctx.delta() + 0.05 + 0.2 * t;
            haa = haa.max(ctx.eval_h(a, a)?.abs());
            gbb = gbb.max((ctx.eval_g(b, b, pi)? - ctx.g_at_top(b, pi)?).abs());
            let eps = 1e-5;
            let dg = (ctx.eval_g(p + eps, b, pi)? - ctx.eval_g(p - eps, b, pi)?) / (2.0 * eps);
            let lhs = ctx.eval_g(p, b, pi)? - dg / l;
            let rhs = 1.0 - 2.0 * pi / (p + ctx.delta()).powi(2);
            gd = gd.max(((lhs - rhs) / rhs).abs());
            let q = a + 0.1;
            let dh = (ctx.eval_h(q + eps, a)? - ctx.eval_h(q - eps, a)?) / (2.0 * eps);
            let lhs = ctx.eval_h(q, a)? + dh / l;
            let rhs = 4.0 * (a - ctx.delta()) / (q - ctx.delta()).powi(2);
            hd = hd.max(((lhs - rhs) / rhs).abs());
        }
        check(&format!("h(a; a) = 0 at ({z1}, {z2})"), haa, 1e-12);
        check(&format!("g(b; b, pi) closed form at ({z1}, {z2})"), gbb, 1e-10);
        check(&format!("g differential identity at ({z1}, {z2})"), gd, 1e-6);
        check(&format!("h differential identity at ({z1}, {z2})"), hd, 1e-6);
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Audit)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Audit) => ExitCode::from(EXIT_AUDIT_FAIL),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("numerical error: {e}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}

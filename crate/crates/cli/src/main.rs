//! `quadk`: tables, simulations and cubic-field checks for K-groups of
//! quadratic rings of integers.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 cache corruption or
//! cache I/O failure, 4 a requested check failed, 5 resource bound exceeded.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use commands::*;
use quadk::Error;

#[derive(Debug, Parser)]
#[command(name = "quadk", version, about)]
struct Cli {
    /// Directory for the cubic field cache and report files.
    #[arg(long, global = true, env = "QUADK_CACHE_DIR", default_value = ".quadk-cache")]
    cache_dir: PathBuf,
    /// Worker threads. Never changes numerical results.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    threads: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Pretty)]
    format: Format,
    /// Print only; do not write a report file.
    #[arg(long, global = true)]
    no_report: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Pretty,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Values of α_{p,u,r} and the moment identities.
    Alpha(AlphaArgs),
    /// Conjectured probability and average tables for a prime.
    Tables(TablesArgs),
    /// Cokernel dimensions of random matrices over F_p.
    Cokernel(CokernelArgs),
    /// Fundamental discriminants and their densities.
    Quads(QuadsArgs),
    /// Class groups of imaginary quadratic fields.
    Classgroup(ClassgroupArgs),
    /// Build or extend the cubic field cache and report densities.
    Cubics(CubicsArgs),
    /// Cubic field counts against class group 3-ranks.
    BijectionCheck(BijectionArgs),
    /// Average orders of K_2n(O_F)_3 from cubic fields.
    #[command(name = "verify-thm12")]
    VerifyThm12(VerifyArgs),
    /// κ_{2n,p} from Bernoulli numerators.
    Kappa(KappaArgs),
    /// Dimension of K_{2i-1}(O_F)_p.
    OddK(OddKArgs),
    /// Brauer contribution for (p, n, d).
    Brauer(LocalArgs),
    /// u-value for (p, n, d).
    Uvalue(LocalArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Alpha(_) => "alpha",
            Command::Tables(_) => "tables",
            Command::Cokernel(_) => "cokernel",
            Command::Quads(_) => "quads",
            Command::Classgroup(_) => "classgroup",
            Command::Cubics(_) => "cubics",
            Command::BijectionCheck(_) => "bijection-check",
            Command::VerifyThm12(_) => "verify-thm12",
            Command::Kappa(_) => "kappa",
            Command::OddK(_) => "odd-k",
            Command::Brauer(_) => "brauer",
            Command::Uvalue(_) => "uvalue",
        }
    }

    fn config(&self) -> Value {
        let v = match self {
            Command::Alpha(a) => serde_json::to_value(a),
            Command::Tables(a) => serde_json::to_value(a),
            Command::Cokernel(a) => serde_json::to_value(a),
            Command::Quads(a) => serde_json::to_value(a),
            Command::Classgroup(a) => serde_json::to_value(a),
            Command::Cubics(a) => serde_json::to_value(a),
            Command::BijectionCheck(a) => serde_json::to_value(a),
            Command::VerifyThm12(a) => serde_json::to_value(a),
            Command::Kappa(a) => serde_json::to_value(a),
            Command::OddK(a) => serde_json::to_value(a),
            Command::Brauer(a) | Command::Uvalue(a) => serde_json::to_value(a),
        };
        v.expect("config serializes")
    }

    fn run(&self, ctx: &Ctx) -> quadk::Result<Outcome> {
        match self {
            Command::Alpha(a) => alpha_cmd(a),
            Command::Tables(a) => tables_cmd(a),
            Command::Cokernel(a) => cokernel_cmd(a, ctx),
            Command::Quads(a) => quads_cmd(a),
            Command::Classgroup(a) => classgroup_cmd(a),
            Command::Cubics(a) => cubics_cmd(a, ctx),
            Command::BijectionCheck(a) => bijection_cmd(a, ctx),
            Command::VerifyThm12(a) => verify_cmd(a, ctx),
            Command::Kappa(a) => kappa_cmd(a),
            Command::OddK(a) => odd_k_cmd(a),
            Command::Brauer(a) => local_cmd(a, "brauer"),
            Command::Uvalue(a) => local_cmd(a, "uvalue"),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::Precondition(_) => 2,
        Error::CacheIo { .. } | Error::CacheCorrupt(_) => 3,
        Error::Resource(_) | Error::BoundMismatch { .. } => 5,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        cache_dir: cli.cache_dir.clone(),
        threads: cli.threads as usize,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(ctx.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(5);
        }
    };
    let command = cli.command.name();
    let config = cli.command.config();
    let outcome = match pool.install(|| cli.command.run(&ctx)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let bytes = report::render(command, &config, outcome.passed, &outcome.result);
    match cli.format {
        Format::Pretty => print!("{}", outcome.pretty),
        Format::Csv => print!("{}", outcome.csv),
        Format::Json => print!("{}", String::from_utf8_lossy(&bytes)),
    }
    if !cli.no_report {
        match report::write(&ctx.cache_dir, command, &config, &bytes) {
            Ok(path) => eprintln!("report: {}", path.display()),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(exit_code(&e));
            }
        }
    }
    match outcome.passed {
        Some(false) => {
            eprintln!("check failed");
            ExitCode::from(4)
        }
        _ => ExitCode::SUCCESS,
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ratelab::cli;

#[derive(Parser)]
#[command(name = "ratelab", version, about = "Convergence-rate experiments for discretized linear SPDEs")]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment config and write <output>.csv and <output>.json.
    Run { config: PathBuf },
    /// Run every acceptance criterion.
    VerifyAll {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List experiment kinds.
    ListExperiments,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let res = match args.cmd {
        Cmd::Run { config } => cli::run_config_file(&config).map(|out| {
            for r in &out.summary.rates {
                println!("{}: slope {:.4} pass {:?}", r.name, r.report.slope, r.report.pass);
            }
            println!("pass: {}", out.summary.pass);
        }),
        Cmd::VerifyAll { out, seed } => cli::verify_all(&out, seed, |o| println!("{}", o.line())).map(|all| {
            let n = all.iter().filter(|o| o.pass).count();
            println!("{n}/{} criteria pass", all.len());
        }),
        Cmd::ListExperiments => {
            print!("{}", cli::list_experiments());
            Ok(())
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ratelab: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}

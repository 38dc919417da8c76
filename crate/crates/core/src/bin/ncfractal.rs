use std::process::ExitCode;

use clap::Parser;
use ncfractal::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            for c in &out.report.checks {
                let verdict = if c.pass { "pass" } else { "FAIL" };
                println!("{verdict}  {}  value={}  tol={:e}", c.name, c.value, c.tol);
            }
            println!("report: {}", out.json_path.display());
            if let Some(p) = &out.csv_path {
                println!("table:  {}", p.display());
            }
            if out.report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

use std::process::ExitCode;

use rapid_dim::experiment::{parse_args, run};
use rapid_dim::Error;

fn main() -> ExitCode {
    let parsed = match parse_args(std::env::args_os()) {
        Ok(p) => p,
        Err(Error::Help(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("rapid-dim: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&parsed.config, parsed.source) {
        Ok(report) => {
            eprintln!(
                "rapid-dim: {} rows ({} failures) -> {} (manifest {})",
                report.manifest.rows,
                report.manifest.failures,
                report.results_path.display(),
                report.manifest_path.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rapid-dim: {e}");
            ExitCode::FAILURE
        }
    }
}

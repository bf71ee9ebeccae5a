use std::process::ExitCode;

use clap::Parser;

use ddflux_cli::{execute, init_workers, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(ddflux_cli::error::EXIT_VALIDATION) } else { ExitCode::SUCCESS };
        }
    };
    match init_workers().and_then(|_| execute(cli)) {
        Ok(path) => {
            log::info!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

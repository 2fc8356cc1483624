mod args;
mod run;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use run::UsageError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        pool = pool.num_threads(jobs as usize);
    }
    let pool = match pool.build() {
        Ok(pool) => pool,
        Err(e) => {
            run::log_line(&format!("error: thread pool: {e}"));
            return ExitCode::from(1);
        }
    };
    let quiet = cli.quiet;
    let result = pool.install(|| match &cli.command {
        Command::Simulate(a) => run::simulate(a),
        Command::Fit(a) => run::fit(a, quiet),
        Command::Rank(a) => run::rank(a),
        Command::Predict(a) => run::predict(a),
        Command::Cv(a) => run::cv(a, quiet),
        Command::Path(a) => run::path(a, quiet),
        Command::PriorSample(a) => run::prior_sample(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            run::log_line(&format!("error: {e}"));
            ExitCode::from(2)
        }
        Err(e) => {
            run::log_line(&format!("error: {e:#}"));
            ExitCode::from(1)
        }
    }
}

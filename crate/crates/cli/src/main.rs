//! Command-line driver: parses a job configuration, runs its tasks in
//! order (optionally in parallel), and writes a deterministic structured
//! report. Exit codes: 0 all tasks passed, 1 a task or embedded assertion
//! failed, 2 configuration parse error, 3 validation error.

mod config;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{JobConfig, ResolvedJob, TaskDecl};
use tasks::TaskOutcome;

pub const REPORT_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "resint",
    version,
    about = "Exact residual-intersection calculus for exceptional curve families"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a job configuration and write its report
    Run {
        /// Path to the JSON job configuration
        config: PathBuf,
        /// Seed for randomized property tasks
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run independent tasks concurrently (report order is unchanged)
        #[arg(long)]
        parallel: bool,
        /// Validate the configuration without executing tasks
        #[arg(long)]
        check_only: bool,
        /// Report destination (overrides the config's output_path)
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            parallel,
            check_only,
            output,
        } => run(&config, seed, parallel, check_only, output),
    }
}

fn run(
    config_path: &PathBuf,
    seed: u64,
    parallel: bool,
    check_only: bool,
    output: Option<PathBuf>,
) -> ExitCode {
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    let parsed: JobConfig = match serde_json::from_str(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!(
                "error: parse failure at line {} column {}: {e}",
                e.line(),
                e.column()
            );
            return ExitCode::from(2);
        }
    };
    let job = match config::validate(parsed) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    if check_only {
        println!("configuration valid: {} tasks", job.tasks.len());
        return ExitCode::SUCCESS;
    }

    let outcomes = execute_all(&job, seed, parallel);
    let report = render_report(&job, seed, &outcomes);
    let failed = outcomes.iter().filter(|o| !o.pass).count();

    let destination = output
        .or_else(|| job.output_path.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("report.txt"));
    if let Err(e) = std::fs::write(&destination, &report) {
        eprintln!("error: cannot write {}: {e}", destination.display());
        return ExitCode::from(2);
    }
    println!(
        "{} tasks, {} passed, {} failed -> {}",
        outcomes.len(),
        outcomes.len() - failed,
        failed,
        destination.display()
    );
    if failed > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn execute_all(job: &ResolvedJob, seed: u64, parallel: bool) -> Vec<TaskOutcome> {
    if !parallel {
        return job
            .tasks
            .iter()
            .enumerate()
            .map(|(i, t)| tasks::execute(job, t, i, seed))
            .collect();
    }
    let mut outcomes: Vec<Option<TaskOutcome>> = Vec::new();
    outcomes.resize_with(job.tasks.len(), || None);
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (i, task) in job.tasks.iter().enumerate() {
            handles.push((i, scope.spawn(move || tasks::execute(job, task, i, seed))));
        }
        for (i, handle) in handles {
            outcomes[i] = Some(handle.join().expect("task thread panicked"));
        }
    });
    outcomes.into_iter().map(Option::unwrap).collect()
}

fn render_report(job: &ResolvedJob, seed: u64, outcomes: &[TaskOutcome]) -> String {
    let mut out = String::new();
    out.push_str(&format!("report_version {REPORT_VERSION}\n"));
    out.push_str(&format!("seed {seed}\n"));
    out.push_str(&format!("truncation {}\n", job.truncation));
    out.push_str(&format!("tasks {}\n", job.tasks.len()));
    for ((i, task), outcome) in job.tasks.iter().enumerate().zip(outcomes) {
        out.push_str(&format!("begin task {} {}\n", i + 1, kind_of(task)));
        for line in &outcome.lines {
            out.push_str("  ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&format!(
            "  status {}\n",
            if outcome.pass { "pass" } else { "fail" }
        ));
        out.push_str(&format!("end task {}\n", i + 1));
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    out.push_str(&format!(
        "summary passed {} failed {}\n",
        outcomes.len() - failed,
        failed
    ));
    out.push_str(&format!(
        "overall {}\n",
        if failed == 0 { "pass" } else { "fail" }
    ));
    out
}

fn kind_of(task: &TaskDecl) -> &'static str {
    task.kind_name()
}

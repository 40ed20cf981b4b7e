use std::fs::File;
use std::process::ExitCode;

use cnmpc::sim::{
    compare_runs, parse_cli, read_csv, run_simulation, write_csv, write_csv_to, CliError, SimError,
    SimResult,
};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let opts = match parse_cli(std::env::args_os()) {
        Ok(o) => o,
        Err(CliError::Clap(e)) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
        Err(e) => {
            eprintln!("{e}");
            eprintln!("run with --help for usage");
            return ExitCode::from(2);
        }
    };

    let cfg = &opts.config;
    let result = match run_simulation(cfg) {
        Ok(r) => r,
        Err(e @ SimError::ColdStart { .. }) => {
            eprintln!("{e}");
            return ExitCode::from(3);
        }
        Err(e) => {
            eprintln!("simulation failed: {e}");
            return ExitCode::from(1);
        }
    };

    let written = match &cfg.out {
        Some(path) => write_csv(&result, path),
        None => write_csv_to(&result, std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("cannot write log: {e}");
        return ExitCode::from(1);
    }

    let arrival = result
        .arrival_time
        .map_or_else(|| "not reached".to_string(), |t| format!("{t:.4} s"));
    eprintln!(
        "steps: {}  arrival: {arrival}  solver iterations: {}  rebuild evaluations: {}",
        result.records.len(),
        result.total_iterations(),
        result.total_rebuild_evals
    );

    if let Some(path) = &opts.baseline {
        let records = match File::open(path).and_then(read_csv) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("cannot read baseline {}: {e}", path.display());
                return ExitCode::from(1);
            }
        };
        let baseline = SimResult::from_records(records, result.decision_dim);
        let report = compare_runs(&baseline, &result);
        eprint!("{}", report.to_text());
        if let Some(out) = &opts.report {
            if let Err(e) = std::fs::write(out, report.to_csv()) {
                eprintln!("cannot write report {}: {e}", out.display());
                return ExitCode::from(1);
            }
        }
    }
    ExitCode::SUCCESS
}

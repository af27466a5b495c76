//! Command-line front end for denoising, online simulation, forecasting and
//! benchmarking of bounded-variation signals.

mod commands;
mod csvio;
mod errors;
mod opts;

use errors::CliResult;
use opts::Opts;

const USAGE: &str = "\
usage: aligator <command> [--key value]...

commands:
  denoise    offline estimation of a noisy series (CSV in, CSV out)
  simulate   online interaction protocol on a built-in or CSV signal
  forecast   rolling-origin forecasting with RMSE evaluation
  bench      cumulative-error rate study over a grid of sample counts

common options:
  --config FILE          key = value file; flags override it
  --output FILE          write CSV here instead of stdout
  --seed N               base seed for every random stream (default 0)
  --algorithm NAME       aligator | aligator-hedged | aligator-heuristic |
                         wavelet (denoise) | holt (forecast) |
                         running-mean (bench)
  --expert-kind KIND     running-average | polynomial:<d>

denoise:   --input FILE (columns: y[,theta])  [--eta E] [--sigma S]
           [--compare FILE]
simulate:  --signal doppler|heavisine --n N [--amplitude A | --target-tv V]
           | --input FILE (column: theta)
           [--sigma S] [--index-order isotonic|reverse|random-permutation|
            iid-uniform] [--rounds R] [--signal-out FILE]
forecast:  --input FILE (column: y) --window W --horizon H [--stride S]
           [--alpha A --beta B]
bench:     --ns 256,512,... [--signal NAME] [--sigma S] [--trials T]
           [--mode online|offline] [--algorithm a,b,...] [--delta D]
           [--amplitude A | --target-tv V]

exit codes: 0 ok, 2 config error, 3 input error, 4 numerical error";

fn run() -> CliResult<i32> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let command = match args.first().map(String::as_str) {
        Some("-h") | Some("--help") | None => {
            eprintln!("{USAGE}");
            return Ok(if args.is_empty() { 2 } else { 0 });
        }
        Some(cmd) => cmd.to_string(),
    };
    let opts = Opts::from_args(&args[1..])?;
    match command.as_str() {
        "denoise" => commands::cmd_denoise(opts)?,
        "simulate" => commands::cmd_simulate(opts)?,
        "forecast" => commands::cmd_forecast(opts)?,
        "bench" => commands::cmd_bench(opts)?,
        other => {
            return Err(errors::CliError::Config(format!(
                "unknown command '{other}' (denoise, simulate, forecast, bench)"
            )))
        }
    }
    Ok(0)
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("{err}");
            std::process::exit(err.exit_code());
        }
    }
}

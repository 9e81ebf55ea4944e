//! Standalone reference worker for the line protocol. See the `worker`
//! module docs for modes and flags.

use noisekit::worker::{parse_worker_args, run_worker};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let config = match parse_worker_args(&args) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    };
    match run_worker(&config) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}

use clap::Parser;
use qsync::cli::{run, Cli, EXIT_USAGE};

fn main() {
    // QSYNC_THREADS caps worker parallelism; default is one worker per core
    if let Ok(v) = std::env::var("QSYNC_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .expect("rayon pool already initialized");
            }
            _ => {
                eprintln!("error: QSYNC_THREADS must be a positive integer, got '{v}'");
                std::process::exit(EXIT_USAGE);
            }
        }
    }

    let cli = Cli::parse();
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            std::process::exit(e.exit_code());
        }
    }
}

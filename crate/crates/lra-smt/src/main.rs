use lra_smt::run_script;
use std::io::Read;
use std::time::{Duration, Instant};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut from_stdin = false;
    let mut file: Option<String> = None;
    let mut timeout_ms: Option<u64> = None;
    let mut i = 0;
    while i < args.len() {
        match args[i].as_str() {
            "-in" | "--in" => from_stdin = true,
            "-smt2" | "--smt2" => {}
            "-t" | "--timeout" => {
                i += 1;
                timeout_ms = args.get(i).and_then(|s| s.parse().ok());
            }
            "--version" => {
                println!("lra-smt {}", env!("CARGO_PKG_VERSION"));
                return;
            }
            other if !other.starts_with('-') => file = Some(other.to_string()),
            other => {
                eprintln!("unknown flag: {}", other);
                std::process::exit(2);
            }
        }
        i += 1;
    }

    let text = match (&file, from_stdin) {
        (Some(path), false) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("failed to read {}: {}", path, e);
                std::process::exit(2);
            }
        },
        _ => {
            let mut buf = String::new();
            if std::io::stdin().read_to_string(&mut buf).is_err() {
                eprintln!("failed to read stdin");
                std::process::exit(2);
            }
            buf
        }
    };

    let deadline = timeout_ms.map(|ms| Instant::now() + Duration::from_millis(ms));
    let outcome = run_script(&text, deadline);
    print!("{}", outcome.output);
}

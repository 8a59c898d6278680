use std::time::Instant;
use tsc_core::checksat::CheckConfig;
use tsc_core::consistency::analyze;
use tsc_core::dsl::parse_spec;
use tsc_core::report::human_report;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let file = args.first().expect("usage: profile_analyze FILE [jobs]");
    let jobs: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let text = std::fs::read_to_string(file).unwrap();
    let spec = parse_spec(&text, file).unwrap_or_else(|d| panic!("{:?}", d));
    let cfg = CheckConfig::from_spec(&spec);
    let t = Instant::now();
    let report = analyze(&spec, &cfg, jobs).unwrap();
    println!("{}", human_report(&report));
    println!("total: {:?}", t.elapsed());
}

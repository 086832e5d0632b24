//! Writes the demo household log. The bundled `fixtures/demo_home.jsonl` was
//! produced with the defaults.
//!
//! cargo run -p homeminer --example demo_log -- [days] [seed] > demo_home.jsonl
//! Add a third argument `csv` for the CSV layout.

use homeminer::bench::fixtures::demo_home;

fn main() {
    let mut args = std::env::args().skip(1);
    let days: u32 = args.next().map_or(60, |a| a.parse().expect("day count"));
    let seed: u64 = args.next().map_or(1, |a| a.parse().expect("seed"));
    let log = demo_home("H1", days, seed);
    let out = std::io::stdout().lock();
    match args.next().as_deref() {
        Some("csv") => log.write_csv(out),
        _ => log.write_jsonl(out),
    }
    .expect("stdout");
}

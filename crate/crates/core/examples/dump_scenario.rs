//! Prints a generated scenario as JSON: `cargo run --example dump_scenario -- <seed> <users>`.

use offload_core::experiments::{generate_scenario, GeneratorSpec};

fn main() {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let users = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let spec = GeneratorSpec {
        seed,
        users,
        ..Default::default()
    };
    let s = generate_scenario(&spec).expect("valid default spec");
    println!("{}", s.to_json().expect("serializable"));
}

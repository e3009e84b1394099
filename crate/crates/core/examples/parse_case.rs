//! Parse a MATPOWER case and print its shape.
//!
//! cargo run --example parse_case -- data/case24_synth.m

use gridrestore::network::parse_case;

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/case24_synth.m").into());
    let net = parse_case(&std::fs::read_to_string(&path).expect("readable case")).expect("valid case");
    println!("{path}: base {} MVA", net.base_mva());
    println!(
        "{} buses, {} lines, {} generators, {} loads",
        net.buses().len(),
        net.lines().len(),
        net.generators().len(),
        net.loads().len()
    );
    println!("demand {:.3} pu, generation capacity {:.3} pu", net.total_demand(), net.total_generation());
    for line in net.lines().iter().take(5) {
        println!(
            "  line {:>3}: {} -> {}  b={:.3}  rating={:.3}  capacity={:.3}",
            line.id.0,
            line.from_bus.0,
            line.to_bus.0,
            line.susceptance_b,
            line.thermal_limit,
            line.flow_capacity()
        );
    }
}

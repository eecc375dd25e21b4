//! Print a seeded synthetic instance: 47 zones, 12 stations, 8 ambulances.
//!
//! `cargo run --example generate_instance -- 42 > case.json`

use ems_relocation::generator::{generate, GeneratorConfig};
use ems_relocation::io::write_instance;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map_or(Ok(1), |s| s.parse())?;
    let inst = generate(&GeneratorConfig::default(), seed);
    print!("{}", write_instance(&inst));
    Ok(())
}

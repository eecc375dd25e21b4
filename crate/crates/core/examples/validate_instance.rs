//! Load an instance file and list everything wrong with it.
//!
//! `cargo run --example validate_instance -- path/to/instance.json`

use ems_relocation::io::{parse_instance, read_to_string};
use ems_relocation::validate_instance;

fn main() {
    let Some(path) = std::env::args().nth(1) else {
        eprintln!("usage: validate_instance <instance.json>");
        std::process::exit(2);
    };
    let text = match read_to_string(path.as_ref()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(4);
        }
    };
    // Schema errors carry the offending path, e.g. `points[3].d1`.
    let inst = match parse_instance(&text) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let report = validate_instance(&inst);
    for issue in &report.issues {
        println!("{issue}");
    }
    if !report.is_valid() {
        std::process::exit(2);
    }
    println!("ok");
}

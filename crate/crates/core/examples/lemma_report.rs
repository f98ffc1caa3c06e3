// Running the numerical verification suite and printing one line per check.

use meskit::lemmas::{self, LemmaConfig};
use meskit::tensor::Dims;

pub fn run_example() -> meskit::Result<()> {
    let mut config = LemmaConfig::new(Dims::new(3, 2)?);
    config.samples = 8;
    let report = lemmas::check_lemmas(&config)?;
    for check in &report.checks {
        let residual = check.max_residual.map_or("n/a".to_string(), |r| format!("{r:.1e}"));
        println!("{:<26} {} {residual}", check.name, if check.passed { "pass" } else { "FAIL" });
    }
    println!("all passed: {}", report.all_passed);
    Ok(())
}

fn main() -> meskit::Result<()> {
    run_example()
}

//! Non-lattice and continued-fraction diagnostics from short cycle lengths.

use homocycle::catalog;
use homocycle::diophantine::conditions_diagnostics;
use homocycle::surd::Surd;

pub fn run_example() -> homocycle::Result<()> {
    for (name, g) in [
        ("rose (1, 1)", catalog::rose(&[1.0, 1.0])),
        ("rose (1, √2)", catalog::rose_exact(&[Surd::from_integer(1), Surd::sqrt_of(2).unwrap()])),
        ("rose (1, √5)", catalog::rose_exact(&[Surd::from_integer(1), Surd::sqrt_of(5).unwrap()])),
    ] {
        let r = conditions_diagnostics(&g)?;
        println!("{name}: weak mixing {}, lattice spacing {:?}", r.weak_mixing, r.lattice_spacing);
        if let Some(d) = r.diophantine {
            println!("  ξ = {} ≈ {:.9}; quotients {:?}…; {}", d.xi_exact, d.xi, &d.partial_quotients[..d.partial_quotients.len().min(8)], d.note);
        }
    }
    Ok(())
}

fn main() -> homocycle::Result<()> {
    run_example()
}

//! Topological entropy `h` of length-weighted cycles: the root of `P(−h·r) = 0`.

use homocycle::catalog;
use homocycle::graph::{homology_labeling, oriented_double, MultiGraph};
use homocycle::thermo::solve_entropy;
use homocycle::transfer::TransferSystem;

fn entropy(g: &MultiGraph) -> homocycle::Result<f64> {
    let st = oriented_double(g);
    let hl = homology_labeling(g, &st)?;
    solve_entropy(&TransferSystem::new(&st, &hl)?)
}

pub fn run_example() -> homocycle::Result<()> {
    for k in 1..=4 {
        let h = entropy(&catalog::rose(&vec![1.0; k]))?;
        println!("rose with {k} unit loops: h = {h:.15} (ln {} = {:.15})", 2 * k, (2.0 * k as f64).ln());
    }
    let h = entropy(&catalog::two_loop([1.0; 3]))?;
    println!("loop plus double bond: h = {h:.15} (ln(1+√5) = {:.15})", (1.0 + 5f64.sqrt()).ln());
    let h = entropy(&catalog::rose(&[1.0, 2f64.sqrt()]))?;
    println!("rose (1, √2): h = {h:.12}");
    Ok(())
}

fn main() -> homocycle::Result<()> {
    run_example()
}

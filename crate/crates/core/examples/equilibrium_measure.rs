//! The Markov measure of maximal length-entropy and the class correlations
//! it produces on the loop-plus-double-bond graph.

use homocycle::catalog;
use homocycle::graph::{homology_labeling, oriented_double};
use homocycle::thermo::solve_entropy;
use homocycle::transfer::{correlation_moment, equilibrium_measure, TransferSystem};

pub fn run_example() -> homocycle::Result<()> {
    let g = catalog::two_loop([1.0; 3]);
    let st = oriented_double(&g);
    let hl = homology_labeling(&g, &st)?;
    let sys = TransferSystem::new(&st, &hl)?;
    let h = solve_entropy(&sys)?;
    let mm = equilibrium_measure(&sys, h)?;
    for s in 0..mm.size() {
        println!("μ({}) = {:.12}", s + 1, mm.mu(s));
    }
    println!("1/(2√5) = {:.12}", 1.0 / (2.0 * 5f64.sqrt()));
    for n in [1, 4, 8] {
        let cross = correlation_moment(&mm, &hl, 0, 1, n);
        let square = correlation_moment(&mm, &hl, 0, 0, n);
        println!("n = {n}: ∫f₁ⁿf₂ⁿ dμ = {cross:+.2e}, ∫(f₁ⁿ)² dμ = {square:.12} (2nμ(1) = {:.12})", 2.0 * n as f64 * mm.mu(0));
    }
    Ok(())
}

fn main() -> homocycle::Result<()> {
    run_example()
}

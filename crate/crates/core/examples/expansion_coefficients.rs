//! `c₀`, `a` and `c₁,₀` in both normalisations, and the rose closed forms
//! they are checked against.

use homocycle::catalog;
use homocycle::expansion::{c1_of_alpha, expansion_report, rose_constants, Mode};
use homocycle::graph::{homology_labeling, oriented_double};
use homocycle::thermo::thermodynamics;
use homocycle::transfer::TransferSystem;

pub fn run_example() -> homocycle::Result<()> {
    let lengths = [1.0, 2f64.sqrt()];
    let g = catalog::rose(&lengths);
    let st = oriented_double(&g);
    let hl = homology_labeling(&g, &st)?;
    let tp = thermodynamics(&TransferSystem::new(&st, &hl)?)?.profile;
    for mode in Mode::ALL {
        let rep = expansion_report(&tp, mode)?;
        println!("{mode}: c₀ = {:.9}, a = {:?}, c₁,₀ = {:.9}", rep.c0, rep.a, rep.c10);
        println!("  c₁((1,0)) = {:.9}", c1_of_alpha(&rep, &[1, 0])?);
        println!("  E4 = {:.6}, E6 = {:.1e}, Z = {:.6}", rep.breakdown.e4, rep.breakdown.e6, rep.breakdown.z);
    }
    let rc = rose_constants(&lengths, tp.h);
    println!("ξ = {:.9}, a_ii = ξ e^(h lᵢ) = {:?}", rc.xi, rc.a_diag);
    println!("d1 = {:.9}, d2 = {:.9}", rc.d1, rc.d2);
    println!(
        "c₁,₀: (d1 + d2) form {:.9}, (3 d1 + d2) form {:.9}, k = 2 display {:.9}",
        rc.c10,
        rc.c10_recounted,
        rc.c10_k2.unwrap_or(f64::NAN)
    );
    Ok(())
}

fn main() -> homocycle::Result<()> {
    run_example()
}

//! Taylor data of `β(u)` on a rose with unequal loops, three ways: the
//! implicit-function formulas on exact pressure jets, finite differences of
//! the pressure, and a direct fit to solved values of `β`.

use homocycle::catalog;
use homocycle::expansion::rose_constants;
use homocycle::graph::{homology_labeling, oriented_double};
use homocycle::tensor::{relative_difference, SCALE_FLOOR};
use homocycle::thermo::{beta_derivatives, beta_taylor_fit, pressure_derivatives_fd, thermodynamics, FdSteps};
use homocycle::transfer::TransferSystem;

pub fn run_example() -> homocycle::Result<()> {
    let lengths = [0.8, 1.5];
    let g = catalog::rose(&lengths);
    let st = oriented_double(&g);
    let hl = homology_labeling(&g, &st)?;
    let sys = TransferSystem::new(&st, &hl)?;
    let th = thermodynamics(&sys)?;
    let p = &th.profile;
    let closed = rose_constants(&lengths, p.h);
    println!("h = {:.12}, ∫r dμ = {:.12}", p.h, p.rbar);
    for i in 0..2 {
        println!("β″[{i}{i}] = {:.12}  closed form {:.12}", p.hess.get(&[i, i]), closed.hess_diag[i]);
        println!("β⁗[{i}{i}{i}{i}] = {:.12}  closed form {:.12}", p.fourth.get(&[i; 4]), closed.fourth_diag[i]);
    }
    println!("β⁗[0011] = {:.12}  closed form {:.12}", p.fourth.get(&[0, 0, 1, 1]), closed.fourth_mixed[0][1]);

    let fd = pressure_derivatives_fd(&sys, p.h, &th.measure, FdSteps::default())?;
    let fd_profile = beta_derivatives(&fd, p.rbar);
    let fit = beta_taylor_fit(&sys, p.h)?;
    println!(
        "finite differences: Hessian {:.1e}, fourth {:.1e} relative",
        relative_difference(fd_profile.hess.data(), p.hess.data(), SCALE_FLOOR),
        relative_difference(fd_profile.fourth.data(), p.fourth.data(), SCALE_FLOOR)
    );
    println!(
        "fit to β values:   Hessian {:.1e}, fourth {:.1e} relative",
        relative_difference(fit.hess.data(), p.hess.data(), SCALE_FLOOR),
        relative_difference(fit.fourth.data(), p.fourth.data(), SCALE_FLOOR)
    );
    Ok(())
}

fn main() -> homocycle::Result<()> {
    run_example()
}

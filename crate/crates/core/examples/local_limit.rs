//! Census counts on a rose with incommensurable loops against the
//! normalized local limit expansion.

use homocycle::catalog;
use homocycle::report::{cmd_verify, AnalysisConfig, Pipeline};

pub fn run_example() -> homocycle::Result<()> {
    let g = catalog::rose_exact(&[homocycle::surd::Surd::from_integer(1), homocycle::surd::Surd::sqrt_of(2).unwrap()]);
    let p = Pipeline::from_graph(g)?;
    let config = AnalysisConfig {
        t_grid: vec![10.0, 12.0, 14.0, 16.0, 18.0],
        alpha_radius: 1,
        ..AnalysisConfig::default()
    };
    let rep = cmd_verify(&p, &config)?;
    println!("c₀ = {:.9}, c₁,₀ = {:.9}", rep.expansion.c0, rep.expansion.c10);
    for r in rep.residuals.rows.iter().filter(|r| r.alpha.iter().all(|&x| x == 0)) {
        println!(
            "T = {:>4}: π = {:>8}, zeroth {:>12.1}, first {:>12.1}, residuals {:.4} / {:.4}",
            r.t, r.empirical, r.zeroth, r.first, r.residual_zeroth, r.residual_first
        );
    }
    println!("{:#?}", rep.flags);
    Ok(())
}

fn main() -> homocycle::Result<()> {
    run_example()
}

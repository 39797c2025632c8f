//! Gaussian moments of symmetric tensors by summing over pairings.

use homocycle::tensor::SymTensor;
use homocycle::wick::{pairings, quartic_moment, sextic_moment};
use nalgebra::DMatrix;

pub fn run_example() -> homocycle::Result<()> {
    println!("pairings of 4 and 6 points: {} and {}", pairings(4).len(), pairings(6).len());
    let id = DMatrix::identity(1, 1);
    let mut t4 = SymTensor::zeros(1, 4);
    t4.set(&[0, 0, 0, 0], 1.0);
    let mut t3 = SymTensor::zeros(1, 3);
    t3.set(&[0, 0, 0], 1.0);
    println!("E[x⁴] = {}, E[x⁶] = {}", quartic_moment(&id, &t4), sextic_moment(&id, &t3));

    let c = DMatrix::from_row_slice(2, 2, &[0.7, 0.0, 0.0, 1.9]);
    let mut mixed = SymTensor::zeros(2, 4);
    mixed.set(&[0, 0, 1, 1], 1.0);
    // six arrangements of (0,0,1,1), each paired one way
    println!("E[T(x,x,x,x)] for the unit (0,0,1,1) entry = {:.6} = 6·c₁c₂", quartic_moment(&c, &mixed));
    Ok(())
}

fn main() -> homocycle::Result<()> {
    run_example()
}

//! The 0/1 transition matrix of the oriented double for two small graphs.

use homocycle::catalog;
use homocycle::graph::oriented_double;
use homocycle::transfer::transition_matrix;

fn show(name: &str, g: &homocycle::graph::MultiGraph) -> homocycle::Result<Vec<Vec<u8>>> {
    let a = transition_matrix(&oriented_double(g))?;
    println!("{name} ({0}×{0}):", a.size());
    for row in a.to_rows() {
        println!("  {}", row.iter().map(u8::to_string).collect::<Vec<_>>().join(" "));
    }
    Ok(a.to_rows())
}

pub fn run_example() -> homocycle::Result<()> {
    let fig = show("loop plus triangle", &catalog::figure_one([1.0; 4]))?;
    let two = show("loop plus double bond", &catalog::two_loop([1.0; 3]))?;
    assert_eq!(fig.len(), 8);
    assert_eq!(two.len(), 6);
    Ok(())
}

fn main() -> homocycle::Result<()> {
    run_example()
}

//! Reference graphs: roses, the three-vertex graph with one loop, and the
//! two-vertex graph with a loop and a double bond.

use crate::graph::{length_from_f64, EdgeSpec, MultiGraph};
use crate::surd::Surd;

/// One vertex with a loop per length.
pub fn rose_exact(lengths: &[Surd]) -> MultiGraph {
    let edges = lengths
        .iter()
        .enumerate()
        .map(|(i, l)| EdgeSpec::new(format!("e{}", i + 1), "o", "o", l.clone()))
        .collect();
    MultiGraph::new(vec!["o".into()], edges).expect("rose lengths must be positive")
}

pub fn rose(lengths: &[f64]) -> MultiGraph {
    rose_exact(&lengths.iter().map(|&l| length_from_f64(l)).collect::<Vec<_>>())
}

/// Loop `e1` at X and the triangle X–Y–Z–X (`e2`, `e3`, `e4`).
pub fn figure_one_exact(lengths: [Surd; 4]) -> MultiGraph {
    let [l1, l2, l3, l4] = lengths;
    MultiGraph::new(
        vec!["X".into(), "Y".into(), "Z".into()],
        vec![
            EdgeSpec::new("e1", "X", "X", l1),
            EdgeSpec::new("e2", "X", "Y", l2),
            EdgeSpec::new("e3", "Y", "Z", l3),
            EdgeSpec::new("e4", "Z", "X", l4),
        ],
    )
    .expect("figure-one lengths must be positive")
}

pub fn figure_one(lengths: [f64; 4]) -> MultiGraph {
    figure_one_exact(lengths.map(length_from_f64))
}

/// Loop `e1` at v1 and two parallel edges `e2: v1→v2`, `e3: v2→v1`.
pub fn two_loop_exact(lengths: [Surd; 3]) -> MultiGraph {
    let [l1, l2, l3] = lengths;
    MultiGraph::new(
        vec!["v1".into(), "v2".into()],
        vec![
            EdgeSpec::new("e1", "v1", "v1", l1),
            EdgeSpec::new("e2", "v1", "v2", l2),
            EdgeSpec::new("e3", "v2", "v1", l3),
        ],
    )
    .expect("two-loop lengths must be positive")
}

pub fn two_loop(lengths: [f64; 3]) -> MultiGraph {
    two_loop_exact(lengths.map(length_from_f64))
}

/// Number of loops if `g` is a rose (single vertex, every edge a loop).
pub fn rose_size(g: &MultiGraph) -> Option<usize> {
    (g.vertex_count() == 1 && g.edges().iter().all(|e| e.is_loop())).then_some(g.edge_count())
}

/// Whether `g` has the shape of [`two_loop`]: two vertices, a loop at the
/// first, and two edges joining the pair (in that edge order).
pub fn is_two_loop(g: &MultiGraph) -> bool {
    let e = g.edges();
    g.vertex_count() == 2
        && e.len() == 3
        && e[0].ends == (0, 0)
        && e[1..].iter().all(|x| !x.is_loop())
}

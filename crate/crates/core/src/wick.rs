//! Gaussian moments of polynomial forms by Isserlis pairings.

use nalgebra::DMatrix;

use crate::tensor::SymTensor;

/// All perfect matchings of `0..n` (n even) as lists of pairs.
pub fn pairings(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn go(rest: &[usize]) -> Vec<Vec<(usize, usize)>> {
        if rest.is_empty() {
            return vec![vec![]];
        }
        let first = rest[0];
        let mut out = Vec::new();
        for k in 1..rest.len() {
            let partner = rest[k];
            let remaining: Vec<usize> = rest[1..].iter().copied().filter(|&x| x != partner).collect();
            for mut m in go(&remaining) {
                m.insert(0, (first, partner));
                out.push(m);
            }
        }
        out
    }
    assert!(n.is_multiple_of(2), "odd moments of a centred Gaussian vanish");
    go(&(0..n).collect::<Vec<_>>())
}

/// `E[x_{i_1} ⋯ x_{i_n}]` for `x ~ N(0, C)`.
pub fn isserlis(c: &DMatrix<f64>, idx: &[usize], matchings: &[Vec<(usize, usize)>]) -> f64 {
    matchings
        .iter()
        .map(|m| m.iter().map(|&(a, b)| c[(idx[a], idx[b])]).product::<f64>())
        .sum()
}

/// `E[T⁴(x, x, x, x)]`: three pairings per index quadruple.
pub fn quartic_moment(c: &DMatrix<f64>, t4: &SymTensor) -> f64 {
    let m = pairings(4);
    t4.all_indices()
        .iter()
        .map(|idx| t4.get(idx) * isserlis(c, idx, &m))
        .sum()
}

/// `E[T³(x, x, x)²]`: fifteen pairings of the six indices.
pub fn sextic_moment(c: &DMatrix<f64>, t3: &SymTensor) -> f64 {
    let m = pairings(6);
    let idx3 = t3.all_indices();
    let mut total = 0.0;
    for a in &idx3 {
        let ta = t3.get(a);
        if ta == 0.0 {
            continue;
        }
        for b in &idx3 {
            let tb = t3.get(b);
            if tb == 0.0 {
                continue;
            }
            let idx = [a[0], a[1], a[2], b[0], b[1], b[2]];
            total += ta * tb * isserlis(c, &idx, &m);
        }
    }
    total
}

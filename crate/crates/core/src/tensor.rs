//! Dense symmetric tensors over `R^dim`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTensor {
    dim: usize,
    order: usize,
    data: Vec<f64>,
}

/// All orderings of `idx` (with repeats when indices coincide).
fn permutations(idx: &[usize]) -> Vec<Vec<usize>> {
    if idx.len() <= 1 {
        return vec![idx.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..idx.len() {
        let mut rest = idx.to_vec();
        let first = rest.remove(k);
        for mut p in permutations(&rest) {
            p.insert(0, first);
            out.push(p);
        }
    }
    out
}

impl SymTensor {
    pub fn zeros(dim: usize, order: usize) -> Self {
        SymTensor {
            dim,
            order,
            data: vec![0.0; dim.pow(order as u32)],
        }
    }

    /// Fills every entry from a function of the sorted index tuple.
    pub fn from_sorted_fn(dim: usize, order: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = SymTensor::zeros(dim, order);
        for idx in t.sorted_indices() {
            let v = f(&idx);
            t.set(&idx, v);
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order);
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    /// Writes `value` at every permutation of `idx`.
    pub fn set(&mut self, idx: &[usize], value: f64) {
        for p in permutations(idx) {
            let o = self.offset(&p);
            self.data[o] = value;
        }
    }

    /// Non-decreasing index tuples: one representative per symmetric entry.
    pub fn sorted_indices(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..self.order {
            out = out
                .into_iter()
                .flat_map(|p| {
                    let start = p.last().copied().unwrap_or(0);
                    (start..self.dim).map(move |i| {
                        let mut q = p.clone();
                        q.push(i);
                        q
                    })
                })
                .collect();
        }
        out
    }

    /// Every index tuple in row-major order.
    pub fn all_indices(&self) -> Vec<Vec<usize>> {
        (0..self.data.len())
            .map(|mut flat| {
                let mut idx = vec![0; self.order];
                for slot in idx.iter_mut().rev() {
                    *slot = flat % self.dim;
                    flat /= self.dim;
                }
                idx
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `T(v, v, …, v)`.
    pub fn form(&self, v: &[f64]) -> f64 {
        self.all_indices()
            .iter()
            .map(|idx| self.get(idx) * idx.iter().map(|&i| v[i]).product::<f64>())
            .sum()
    }

    pub fn is_symmetric(&self) -> bool {
        self.all_indices().iter().all(|idx| {
            let mut s = idx.clone();
            s.sort_unstable();
            self.get(idx) == self.get(&s)
        })
    }
}

/// Denominator floor for entrywise comparisons of tensors recovered from
/// sampled `β` values: fourth derivatives from double-precision samples carry
/// ~1e-11 absolute noise, so entries are judged against at least a
/// thousandth of the tensor's largest entry.
pub const SCALE_FLOOR: f64 = 1e-3;

/// Largest entrywise relative difference, with denominators floored at
/// `floor · max(‖a‖∞, ‖b‖∞)` so that structurally zero entries compare
/// against the tensor's scale.
pub fn relative_difference(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let scale = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs()));
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let denom = x.abs().max(y.abs()).max(floor * scale);
            if denom == 0.0 {
                0.0
            } else {
                (x - y).abs() / denom
            }
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_set_and_form() {
        let mut t = SymTensor::zeros(2, 4);
        t.set(&[0, 0, 1, 1], 1.0);
        assert!(t.is_symmetric());
        assert_eq!(t.get(&[1, 0, 1, 0]), 1.0);
        // six arrangements of (0,0,1,1)
        assert_eq!(t.form(&[1.0, 1.0]), 6.0);
        assert_eq!(t.sorted_indices().len(), 5);
    }

    #[test]
    fn relative_difference_floor() {
        assert_eq!(relative_difference(&[1.0, 0.0], &[1.0, 1e-9], 1e-6), 1e-9 / 1e-6);
        assert_eq!(relative_difference(&[2.0], &[1.0], 0.0), 0.5);
    }
}

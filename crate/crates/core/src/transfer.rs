//! Transition matrices of the oriented double, weighted transfer matrices,
//! Perron data and the equilibrium Markov measure.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{HomologyLabeling, SymbolTable};

/// 0/1 matrix with `A(i, j) = 1` iff symbol `j` can follow symbol `i`.
/// Backtracking (`j = reverse(i)`) is allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    n: usize,
    entries: Vec<u8>,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).iter().enumerate().filter(|(_, &a)| a == 1).map(|(j, _)| j)
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j) as f64)
    }

    /// `trace(A^n)` in exact arithmetic.
    pub fn trace_power(&self, n: usize) -> BigUint {
        let size = self.n;
        let mut p: Vec<BigUint> = (0..size * size)
            .map(|k| if k / size == k % size { BigUint::one() } else { BigUint::zero() })
            .collect();
        for _ in 0..n {
            let mut next = vec![BigUint::zero(); size * size];
            for i in 0..size {
                for k in 0..size {
                    if p[i * size + k].is_zero() {
                        continue;
                    }
                    for j in self.successors(k) {
                        next[i * size + j] += &p[i * size + k];
                    }
                }
            }
            p = next;
        }
        (0..size).map(|i| p[i * size + i].clone()).sum()
    }

    fn bool_product(&self, a: &[bool], b: &[bool]) -> Vec<bool> {
        let n = self.n;
        let mut out = vec![false; n * n];
        for i in 0..n {
            for k in 0..n {
                if a[i * n + k] {
                    for j in 0..n {
                        out[i * n + j] |= b[k * n + j];
                    }
                }
            }
        }
        out
    }

    /// Smallest `k <= (size)^2` with `A^k` strictly positive, if any.
    pub fn primitivity_exponent(&self) -> Option<usize> {
        let n = self.n;
        let base: Vec<bool> = self.entries.iter().map(|&x| x == 1).collect();
        let mut power = base.clone();
        for k in 1..=n * n {
            if power.iter().all(|&x| x) {
                return Some(k);
            }
            power = self.bool_product(&power, &base);
        }
        None
    }

    pub fn is_irreducible(&self) -> bool {
        let n = self.n;
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for (j, s) in seen.iter_mut().enumerate() {
                    let edge = if forward { self.get(i, j) } else { self.get(j, i) };
                    if edge == 1 && !*s {
                        *s = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|x| x)
        };
        n > 0 && reach(true) && reach(false)
    }
}

/// Builds `A` and checks that it is irreducible and aperiodic.
pub fn transition_matrix(st: &SymbolTable) -> Result<TransitionMatrix> {
    let a = transition_matrix_unchecked(st);
    if !a.is_irreducible() {
        return Err(Error::Disconnected);
    }
    if a.primitivity_exponent().is_none() {
        return Err(Error::NotAperiodic { bound: a.n * a.n });
    }
    Ok(a)
}

/// The 0/1 pattern without admissibility checks.
pub fn transition_matrix_unchecked(st: &SymbolTable) -> TransitionMatrix {
    let n = st.len();
    let mut entries = vec![0u8; n * n];
    for i in 0..n {
        for j in 0..n {
            if st.get(i).terminal == st.get(j).initial {
                entries[i * n + j] = 1;
            }
        }
    }
    TransitionMatrix { n, entries }
}

/// Everything needed to evaluate the potential `-s·r + <u, f>` on symbols.
#[derive(Debug, Clone)]
pub struct TransferSystem {
    a: TransitionMatrix,
    lengths: Vec<f64>,
    labels: Vec<Vec<f64>>,
}

impl TransferSystem {
    pub fn new(st: &SymbolTable, hl: &HomologyLabeling) -> Result<Self> {
        let a = transition_matrix(st)?;
        Ok(TransferSystem {
            a,
            lengths: (0..st.len()).map(|s| st.length(s)).collect(),
            labels: hl.labels().iter().map(|f| f.iter().map(|&x| x as f64).collect()).collect(),
        })
    }

    pub fn transitions(&self) -> &TransitionMatrix {
        &self.a
    }

    pub fn size(&self) -> usize {
        self.a.n
    }

    pub fn rank(&self) -> usize {
        self.labels.first().map_or(0, Vec::len)
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// `f_i(s)` for each symbol `s`.
    pub fn label_column(&self, i: usize) -> Vec<f64> {
        self.labels.iter().map(|f| f[i]).collect()
    }

    pub fn labels(&self) -> &[Vec<f64>] {
        &self.labels
    }

    /// `-s·l(j) + <u, f(j)>`.
    pub fn potential(&self, j: usize, s: f64, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.rank());
        -s * self.lengths[j] + self.labels[j].iter().zip(u).map(|(f, x)| f * x).sum::<f64>()
    }

    /// `B(i, j) = A(i, j)·exp(potential(j))` (weight on the entered symbol).
    pub fn weighted_matrix(&self, s: f64, u: &[f64]) -> DMatrix<f64> {
        let w: Vec<f64> = (0..self.size()).map(|j| self.potential(j, s, u).exp()).collect();
        DMatrix::from_fn(self.size(), self.size(), |i, j| self.a.get(i, j) as f64 * w[j])
    }

    /// Same weights attached to the source symbol; similar to [`Self::weighted_matrix`].
    pub fn weighted_matrix_source(&self, s: f64, u: &[f64]) -> DMatrix<f64> {
        let w: Vec<f64> = (0..self.size()).map(|i| self.potential(i, s, u).exp()).collect();
        DMatrix::from_fn(self.size(), self.size(), |i, j| self.a.get(i, j) as f64 * w[i])
    }

    pub fn perron_at(&self, s: f64, u: &[f64]) -> Result<PerronData> {
        perron(&self.weighted_matrix(s, u))
    }

    pub fn pressure(&self, s: f64, u: &[f64]) -> Result<f64> {
        Ok(self.perron_at(s, u)?.lambda.ln())
    }

    /// `∂P/∂s` at `(s, u)`: minus the mean length under the equilibrium state there.
    pub fn pressure_ds(&self, s: f64, u: &[f64]) -> Result<(f64, f64)> {
        let pd = self.perron_at(s, u)?;
        let mean: f64 = (0..self.size())
            .map(|j| self.lengths[j] * pd.left[j] * pd.right[j])
            .sum();
        Ok((pd.lambda.ln(), -mean))
    }
}

/// Dominant eigendata of a non-negative primitive matrix. `right` has
/// max-entry 1 and `left` is scaled so that `left · right = 1`.
#[derive(Debug, Clone)]
pub struct PerronData {
    pub lambda: f64,
    pub right: DVector<f64>,
    pub left: DVector<f64>,
    /// Larger of the two scaled max-norm residuals.
    pub residual: f64,
    /// Eigenvalue estimate from the left iteration.
    pub lambda_left: f64,
}

const PERRON_TOL: f64 = 1e-12;
const POWER_CAP: usize = 20_000;

fn residual(b: &DMatrix<f64>, v: &DVector<f64>, lambda: f64) -> f64 {
    (b * v - v * lambda).amax() / (lambda * v.amax())
}

fn rayleigh(b: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    (b * v).sum() / v.sum()
}

/// Power iteration from the uniform vector, finished by a few steps of
/// shifted inverse iteration.
fn dominant_vector(b: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let n = b.nrows();
    let mut v = DVector::from_element(n, 1.0);
    let mut lambda = rayleigh(b, &v);
    let mut res = f64::INFINITY;
    for _ in 0..POWER_CAP {
        let w = b * &v;
        let scale = w.amax();
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::PerronNonConvergence {
                iterations: 0,
                residual: f64::NAN,
            });
        }
        v = w / scale;
        lambda = rayleigh(b, &v);
        res = residual(b, &v, lambda);
        if res < 1e-9 {
            break;
        }
    }
    let mut polished = 0;
    while res > 1e-15 && polished < 8 {
        let shifted = b - DMatrix::identity(n, n) * (lambda * (1.0 + 1e-11));
        let Some(w) = shifted.lu().solve(&v) else { break };
        let scale = w.amax().max(-w.min());
        if !(scale > 0.0 && scale.is_finite()) {
            break;
        }
        let w = &w / (w.sum().signum() * scale);
        let l2 = rayleigh(b, &w);
        let r2 = residual(b, &w, l2);
        if r2 >= res {
            break;
        }
        v = w;
        lambda = l2;
        res = r2;
        polished += 1;
    }
    if res > PERRON_TOL || v.iter().any(|&x| x <= 0.0) {
        return Err(Error::PerronNonConvergence {
            iterations: POWER_CAP,
            residual: res,
        });
    }
    Ok((lambda, v))
}

pub fn perron(b: &DMatrix<f64>) -> Result<PerronData> {
    let (lambda, mut right) = dominant_vector(b)?;
    let (lambda_left, mut left) = dominant_vector(&b.transpose())?;
    right /= right.amax();
    left /= left.dot(&right);
    let residual = residual(b, &right, lambda).max(residual(&b.transpose(), &left, lambda_left));
    // two-sided quotient: error is the product of the two residuals
    let two_sided = left.dot(&(b * &right));
    Ok(PerronData {
        lambda: if two_sided > 0.0 { two_sided } else { lambda },
        right,
        left,
        residual,
        lambda_left,
    })
}

pub fn pressure(sys: &TransferSystem, s: f64, u: &[f64]) -> Result<f64> {
    sys.pressure(s, u)
}

/// Stationary Markov chain on symbols.
#[derive(Debug, Clone)]
pub struct MarkovMeasure {
    mu: Vec<f64>,
    p: DMatrix<f64>,
}

impl MarkovMeasure {
    pub fn from_parts(mu: Vec<f64>, p: DMatrix<f64>) -> Self {
        MarkovMeasure { mu, p }
    }

    pub fn weights(&self) -> &[f64] {
        &self.mu
    }

    pub fn mu(&self, s: usize) -> f64 {
        self.mu[s]
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn size(&self) -> usize {
        self.mu.len()
    }

    /// Measure of the cylinder `[x_0 x_1 … x_n]`.
    pub fn cylinder(&self, word: &[usize]) -> f64 {
        match word.split_first() {
            None => 1.0,
            Some((&first, rest)) => {
                let mut m = self.mu[first];
                let mut prev = first;
                for &x in rest {
                    m *= self.p[(prev, x)];
                    prev = x;
                }
                m
            }
        }
    }

    /// `∫ g dμ` for a one-coordinate observable.
    pub fn integrate(&self, g: &[f64]) -> f64 {
        self.mu.iter().zip(g).map(|(m, x)| m * x).sum()
    }

    /// `∫ (Σ_{t<n} g(x_t)) (Σ_{t<n} k(x_t)) dμ`, via the lagged correlations
    /// `Σ_a μ(a) g(a) (P^lag k)(a)`.
    pub fn birkhoff_product(&self, g: &[f64], k: &[f64], n: usize) -> f64 {
        let dim = self.size();
        let mut pk = DVector::from_column_slice(k);
        let mut pg = DVector::from_column_slice(g);
        let lag = |left: &[f64], right: &DVector<f64>| -> f64 {
            (0..dim).map(|a| self.mu[a] * left[a] * right[a]).sum()
        };
        let mut total = n as f64 * lag(g, &pk);
        for l in 1..n {
            pk = &self.p * pk;
            pg = &self.p * pg;
            total += (n - l) as f64 * (lag(g, &pk) + lag(k, &pg));
        }
        total
    }
}

/// Equilibrium state of `-h·r` as a Markov measure; requires `P(h, 0) = 0`.
pub fn equilibrium_measure(sys: &TransferSystem, h: f64) -> Result<MarkovMeasure> {
    let zero = vec![0.0; sys.rank()];
    let b = sys.weighted_matrix(h, &zero);
    let pd = perron(&b)?;
    let pressure = pd.lambda.ln();
    if pressure.abs() > 1e-10 {
        return Err(Error::NotAtEquilibrium { pressure });
    }
    Ok(markov_from_perron(&b, &pd))
}

pub(crate) fn markov_from_perron(b: &DMatrix<f64>, pd: &PerronData) -> MarkovMeasure {
    let n = b.nrows();
    let p = DMatrix::from_fn(n, n, |i, j| b[(i, j)] * pd.right[j] / (pd.lambda * pd.right[i]));
    let mut mu: Vec<f64> = (0..n).map(|i| pd.left[i] * pd.right[i]).collect();
    let total: f64 = mu.iter().sum();
    mu.iter_mut().for_each(|m| *m /= total);
    MarkovMeasure { mu, p }
}

/// `∫ f_i^n f_j^n dμ` with `f^n = Σ_{t<n} f(x_t)`.
pub fn correlation_moment(mm: &MarkovMeasure, hl: &HomologyLabeling, i: usize, j: usize, n: usize) -> f64 {
    let col = |k: usize| hl.labels().iter().map(|f| f[k] as f64).collect::<Vec<_>>();
    mm.birkhoff_product(&col(i), &col(j), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::graph::{homology_labeling, oriented_double};
    use approx::assert_relative_eq;

    fn system(g: &crate::graph::MultiGraph) -> (SymbolTable, HomologyLabeling, TransferSystem) {
        let st = oriented_double(g);
        let hl = homology_labeling(g, &st).unwrap();
        let sys = TransferSystem::new(&st, &hl).unwrap();
        (st, hl, sys)
    }

    const FIGURE_ONE: [[u8; 8]; 8] = [
        [1, 1, 1, 0, 0, 0, 0, 1],
        [1, 1, 1, 0, 0, 0, 0, 1],
        [0, 0, 0, 1, 1, 0, 0, 0],
        [1, 1, 1, 0, 0, 0, 0, 1],
        [0, 0, 0, 0, 0, 1, 1, 0],
        [0, 0, 0, 1, 1, 0, 0, 0],
        [1, 1, 1, 0, 0, 0, 0, 1],
        [0, 0, 0, 0, 0, 1, 1, 0],
    ];

    const TWO_LOOP: [[u8; 6]; 6] = [
        [1, 1, 1, 0, 0, 1],
        [1, 1, 1, 0, 0, 1],
        [0, 0, 0, 1, 1, 0],
        [1, 1, 1, 0, 0, 1],
        [1, 1, 1, 0, 0, 1],
        [0, 0, 0, 1, 1, 0],
    ];

    #[test]
    fn reference_matrices() {
        let st = oriented_double(&catalog::figure_one([1.0; 4]));
        let a = transition_matrix(&st).unwrap();
        assert_eq!(a.to_rows(), FIGURE_ONE.map(|r| r.to_vec()).to_vec());

        let st = oriented_double(&catalog::two_loop([1.0; 3]));
        let a = transition_matrix(&st).unwrap();
        assert_eq!(a.to_rows(), TWO_LOOP.map(|r| r.to_vec()).to_vec());

        let st = oriented_double(&catalog::rose(&[1.0, 2.0, 3.0]));
        let a = transition_matrix(&st).unwrap();
        assert!(a.to_rows().iter().flatten().all(|&x| x == 1));
    }

    #[test]
    fn row_sums_are_out_degrees() {
        let st = oriented_double(&catalog::figure_one([1.0; 4]));
        let a = transition_matrix(&st).unwrap();
        for i in 0..a.size() {
            let sum: u32 = a.row(i).iter().map(|&x| x as u32).sum();
            assert_eq!(sum as usize, st.out_symbols(st.get(i).terminal).len());
        }
    }

    #[test]
    fn bipartite_pattern_is_rejected() {
        let g = crate::graph::parse_graph(include_str!("../data/square.json")).unwrap();
        let st = oriented_double(&g);
        assert!(matches!(transition_matrix(&st), Err(Error::NotAperiodic { .. })));
        assert!(transition_matrix_unchecked(&st).is_irreducible());
    }

    #[test]
    fn perron_reference_values() {
        let ones = DMatrix::from_element(4, 4, 1.0);
        let pd = perron(&ones).unwrap();
        assert_relative_eq!(pd.lambda, 4.0, epsilon = 1e-14);
        assert!(pd.right.iter().all(|&x| (x - 1.0).abs() < 1e-14));
        assert!(pd.left.iter().all(|&x| (x - 0.25).abs() < 1e-14));

        let a = DMatrix::from_fn(6, 6, |i, j| TWO_LOOP[i][j] as f64);
        let pd = perron(&a).unwrap();
        assert_relative_eq!(pd.lambda, 1.0 + 5f64.sqrt(), epsilon = 1e-13);
        assert!(pd.residual <= 1e-12);
        assert_relative_eq!(pd.lambda, pd.lambda_left, max_relative = 1e-12);
        assert_relative_eq!(pd.left.dot(&pd.right), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rose_pressure_closed_form() {
        let lengths = [0.7, 1.3, 1.9];
        let (_, _, sys) = system(&catalog::rose(&lengths));
        for (s, u) in [(0.4, [0.0, 0.0, 0.0]), (1.1, [0.3, -0.2, 0.9]), (2.0, [-1.0, 0.5, 0.0])] {
            let closed: f64 = lengths
                .iter()
                .zip(u)
                .map(|(l, ui): (&f64, f64)| 2.0 * (-s * l).exp() * ui.cosh())
                .sum::<f64>()
                .ln();
            assert_relative_eq!(sys.pressure(s, &u).unwrap(), closed, epsilon = 1e-13);
        }
        let (_, _, sys) = system(&catalog::rose(&[1.0, 1.0]));
        assert!(sys.pressure(4f64.ln(), &[0.0, 0.0]).unwrap().abs() < 1e-14);
    }

    #[test]
    fn weight_conventions_are_similar() {
        let (_, _, sys) = system(&catalog::figure_one([1.0, 0.6, 1.7, 1.2]));
        let u = [0.4, -0.3];
        let target = perron(&sys.weighted_matrix(0.8, &u)).unwrap().lambda;
        let source = perron(&sys.weighted_matrix_source(0.8, &u)).unwrap().lambda;
        assert_relative_eq!(target, source, max_relative = 1e-12);
        let plain = perron(&sys.transitions().to_f64()).unwrap().lambda;
        assert_relative_eq!(sys.pressure(0.0, &[0.0, 0.0]).unwrap(), plain.ln(), epsilon = 1e-13);
    }

    #[test]
    fn two_loop_measure() {
        let (_, hl, sys) = system(&catalog::two_loop([1.0; 3]));
        let h = (1.0 + 5f64.sqrt()).ln();
        let mm = equilibrium_measure(&sys, h).unwrap();
        let loop_mass = 1.0 / (2.0 * 5f64.sqrt());
        let other = (5.0 - 5f64.sqrt()) / 20.0;
        for s in 0..2 {
            assert_relative_eq!(mm.mu(s), loop_mass, epsilon = 1e-12);
        }
        for s in 2..6 {
            assert_relative_eq!(mm.mu(s), other, epsilon = 1e-12);
        }
        for n in 1..=8 {
            assert!(correlation_moment(&mm, &hl, 0, 1, n).abs() < 1e-12);
            assert_relative_eq!(
                correlation_moment(&mm, &hl, 0, 0, n),
                2.0 * n as f64 * mm.mu(0),
                max_relative = 1e-12
            );
        }
        assert!(matches!(equilibrium_measure(&sys, 1.0), Err(Error::NotAtEquilibrium { .. })));
    }

    #[test]
    fn rose_measure_and_moment() {
        let (_, hl, sys) = system(&catalog::rose(&[1.0, 1.0]));
        let h = 4f64.ln();
        let mm = equilibrium_measure(&sys, h).unwrap();
        for s in 0..4 {
            assert_relative_eq!(mm.mu(s), (-h).exp(), epsilon = 1e-14);
        }
        assert_relative_eq!(correlation_moment(&mm, &hl, 0, 0, 1), 2.0 * (-h).exp(), epsilon = 1e-14);
    }

    #[test]
    fn markov_consistency_and_reversal() {
        let (st, _, sys) = system(&catalog::figure_one([1.0, 0.6, 1.7, 1.2]));
        let zero = [0.0, 0.0];
        let mut lo = 0.0;
        let mut hi = 5.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sys.pressure(mid, &zero).unwrap() > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mm = equilibrium_measure(&sys, 0.5 * (lo + hi)).unwrap();
        let n = st.len();
        assert_relative_eq!(mm.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        let words = |len: usize| {
            let mut out: Vec<Vec<usize>> = vec![vec![]];
            for _ in 0..len {
                out = out
                    .into_iter()
                    .flat_map(|w| (0..n).map(move |x| [w.clone(), vec![x]].concat()))
                    .collect();
            }
            out
        };
        for len in 1..=3 {
            for w in words(len) {
                let m = mm.cylinder(&w);
                assert!(m >= 0.0);
                let extended: f64 = (0..n).map(|x| mm.cylinder(&[w.clone(), vec![x]].concat())).sum();
                assert!((m - extended).abs() < 1e-14);
            }
        }
        for len in 1..=4 {
            for w in words(len) {
                let rev: Vec<usize> = w.iter().rev().map(|&x| st.reverse(x)).collect();
                assert!((mm.cylinder(&w) - mm.cylinder(&rev)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trace_powers() {
        let st = oriented_double(&catalog::figure_one([1.0; 4]));
        let a = transition_matrix(&st).unwrap();
        assert_eq!(a.trace_power(2), BigUint::from(10u32));
        let st = oriented_double(&catalog::rose(&[1.0, 1.0]));
        let a = transition_matrix(&st).unwrap();
        assert_eq!(a.trace_power(7), BigUint::from(4u32.pow(7)));
    }
}

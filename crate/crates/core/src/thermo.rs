//! Entropy, the implicit function `β(u)` defined by `P(-β(u)·r + <u, f>) = 0`,
//! and its Taylor data at `u = 0`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, JetSpace};
use crate::tensor::SymTensor;
use crate::transfer::{equilibrium_measure, perron, MarkovMeasure, TransferSystem};

const ROOT_TOL: f64 = 1e-12;

/// Root of `s ↦ P(s, u)`, which is strictly decreasing with slope `-∫r dμ`.
pub fn solve_beta(sys: &TransferSystem, u: &[f64]) -> Result<f64> {
    let zero = vec![0.0; sys.rank()];
    let top = sys.pressure(0.0, &zero)?;
    let min_len = sys.lengths().iter().copied().fold(f64::INFINITY, f64::min);
    let spread: f64 = u.iter().map(|x| x.abs()).sum();
    let mut lo = 0.0;
    let mut hi = (top + spread) / min_len + 1.0;
    let mut p_lo = sys.pressure(lo, u)?;
    let p_hi = sys.pressure(hi, u)?;
    if !(p_lo > 0.0 && p_hi < 0.0) {
        // P(0, u) >= P(0, 0) > 0 by convexity and evenness; anything else is a bug upstream
        return Err(Error::BracketFailure { u: u.to_vec() });
    }
    // secant start from the bracket, then Newton with bisection fallback
    let mut s = hi * p_lo / (p_lo - p_hi);
    for _ in 0..200 {
        let (p, dp) = sys.pressure_ds(s, u)?;
        if p > 0.0 {
            lo = s;
            p_lo = p;
        } else {
            hi = s;
        }
        if p.abs() <= 1e-15 * (1.0 + p_lo.abs()) {
            return Ok(s);
        }
        let newton = s - p / dp;
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - s).abs() <= 1e-16 * s.abs().max(1.0) || hi - lo <= 1e-15 * hi {
            let (p, _) = sys.pressure_ds(next, u)?;
            if p.abs() > ROOT_TOL {
                return Err(Error::BracketFailure { u: u.to_vec() });
            }
            return Ok(next);
        }
        s = next;
    }
    let p = sys.pressure(s, u)?;
    if p.abs() <= ROOT_TOL {
        Ok(s)
    } else {
        Err(Error::BracketFailure { u: u.to_vec() })
    }
}

/// Entropy `h`: the root of `P(s, 0)`.
pub fn solve_entropy(sys: &TransferSystem) -> Result<f64> {
    let h = solve_beta(sys, &vec![0.0; sys.rank()])?;
    let p = sys.pressure(h, &vec![0.0; sys.rank()])?;
    if p.abs() > ROOT_TOL {
        return Err(Error::NotAtEquilibrium { pressure: p });
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivativeMethod {
    /// Perturbation series of the Perron eigenvalue in truncated Taylor arithmetic.
    Jet,
    /// Central finite differences with Richardson extrapolation.
    FiniteDifference,
}

/// Partial derivatives of `P(-s·r + <u, f>)` at `(s0, 0)`, keyed by exponent
/// vectors `[k_s, k_1, …, k_b]`.
#[derive(Debug, Clone)]
pub struct PressureDerivatives {
    pub s0: f64,
    pub rank: usize,
    pub method: DerivativeMethod,
    values: HashMap<Vec<u8>, f64>,
}

impl PressureDerivatives {
    /// `∂^{s_order}_s ∂_{u[0]} ∂_{u[1]} … P` (u-indices 0-based, repeats allowed).
    pub fn partial(&self, s_order: usize, u: &[usize]) -> f64 {
        let mut e = vec![0u8; self.rank + 1];
        e[0] = s_order as u8;
        for &i in u {
            e[i + 1] += 1;
        }
        *self
            .values
            .get(&e)
            .unwrap_or_else(|| panic!("derivative {e:?} was not computed"))
    }

    pub fn value(&self, exponents: &[u8]) -> Option<f64> {
        self.values.get(exponents).copied()
    }

    pub fn exponents(&self) -> impl Iterator<Item = (&Vec<u8>, &f64)> {
        self.values.iter()
    }
}

/// Multi-indices the β-assembly needs: every u-derivative up to order 4, and
/// s-derivatives `P_s, P_ss, P_si, P_sij, P_sijk`.
fn required_exponents(rank: usize) -> Vec<Vec<u8>> {
    let sp = JetSpace::new(rank + 1, 4);
    sp.monomials()
        .iter()
        .filter(|e| {
            let u_order: u8 = e[1..].iter().sum();
            match e[0] {
                0 => true,
                1 => u_order <= 3,
                2 => u_order == 0,
                _ => false,
            }
        })
        .cloned()
        .collect()
}

/// Taylor expansion of `P` at `(s0, 0)` to total degree `degree` by pushing
/// a jet through the eigen-equation with the normalization `u0·v = 1`.
pub fn pressure_jet(sys: &TransferSystem, s0: f64, degree: usize) -> Result<(JetSpace, Jet)> {
    let b = sys.rank();
    let n = sys.size();
    let sp = JetSpace::new(b + 1, degree);
    let b0 = sys.weighted_matrix(s0, &vec![0.0; b]);
    let pd = perron(&b0)?;
    let (lambda0, v0, u0) = (pd.lambda, pd.right.clone(), pd.left.clone());

    let k = &b0 - DMatrix::identity(n, n) * lambda0 + &v0 * u0.transpose();
    let k_inv = k
        .try_inverse()
        .ok_or_else(|| Error::Internal("bordered Perron matrix is singular".into()))?;

    let excess: Vec<Jet> = (0..n)
        .map(|j| {
            let mut coeffs = vec![-sys.lengths()[j]];
            coeffs.extend(&sys.labels()[j]);
            let mut e = sp.exp(&sp.linear(&coeffs));
            e[0] -= 1.0;
            e
        })
        .collect();

    let mut v: Vec<Jet> = (0..n).map(|i| sp.constant(v0[i])).collect();
    let mut lambda = sp.constant(lambda0);
    for _ in 0..=degree {
        let weighted: Vec<Jet> = (0..n).map(|j| sp.mul(&excess[j], &v[j])).collect();
        let mut db_v = vec![sp.zero(); n];
        for (i, row) in db_v.iter_mut().enumerate() {
            for (j, w) in weighted.iter().enumerate() {
                if b0[(i, j)] != 0.0 {
                    sp.add_scaled(row, w, b0[(i, j)]);
                }
            }
        }
        let mut shift = sp.zero();
        for (i, row) in db_v.iter().enumerate() {
            sp.add_scaled(&mut shift, row, u0[i]);
        }
        lambda = shift.clone();
        lambda[0] += lambda0;
        let rhs: Vec<Jet> = (0..n)
            .map(|i| {
                let mut r = sp.mul(&shift, &v[i]);
                sp.add_scaled(&mut r, &db_v[i], -1.0);
                r
            })
            .collect();
        v = (0..n)
            .map(|i| {
                let mut vi = sp.zero();
                for (j, r) in rhs.iter().enumerate() {
                    sp.add_scaled(&mut vi, r, k_inv[(i, j)]);
                }
                vi[0] += v0[i];
                vi
            })
            .collect();
    }
    let p = sp.ln(&lambda);
    Ok((sp, p))
}

/// Derivatives through order 4 from the jet expansion.
pub fn pressure_derivatives(sys: &TransferSystem, h: f64) -> Result<PressureDerivatives> {
    let (sp, p) = pressure_jet(sys, h, 4)?;
    let values = required_exponents(sys.rank())
        .into_iter()
        .map(|e| {
            let d = sp.derivative(&p, &e);
            (e, d)
        })
        .collect();
    Ok(PressureDerivatives {
        s0: h,
        rank: sys.rank(),
        method: DerivativeMethod::Jet,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSteps {
    pub s: f64,
    pub u: f64,
    /// Step sizes used: `h, h/2, …, h/2^(levels-1)`.
    pub levels: usize,
}

impl Default for FdSteps {
    fn default() -> Self {
        FdSteps {
            s: 2.5e-2,
            u: 5e-2,
            levels: 3,
        }
    }
}

/// Central stencil `(offset, weight)` for the k-th derivative, error `O(step²)`.
fn stencil(k: u8) -> &'static [(i32, f64)] {
    match k {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => unreachable!("derivatives above order 4 are not needed"),
    }
}

fn product_difference(sys: &TransferSystem, s0: f64, e: &[u8], hs: f64, hu: f64) -> Result<f64> {
    let mut combos: Vec<(Vec<i32>, f64)> = vec![(vec![], 1.0)];
    for &k in e {
        combos = combos
            .into_iter()
            .flat_map(|(offs, w)| {
                stencil(k).iter().map(move |&(o, wk)| {
                    let mut offs = offs.clone();
                    offs.push(o);
                    (offs, w * wk)
                })
            })
            .collect();
    }
    let mut total = 0.0;
    for (offs, w) in combos {
        let s = s0 + offs[0] as f64 * hs;
        let u: Vec<f64> = offs[1..].iter().map(|&o| o as f64 * hu).collect();
        total += w * sys.pressure(s, &u)?;
    }
    let scale = hs.powi(e[0] as i32) * hu.powi(e[1..].iter().map(|&x| x as i32).sum());
    Ok(total / scale)
}

/// Richardson table over step ratios of 2 for an even error expansion.
fn richardson(estimates: &[f64]) -> f64 {
    let mut row = estimates.to_vec();
    let mut factor = 4.0;
    while row.len() > 1 {
        row = row.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
        factor *= 4.0;
    }
    row[0]
}

fn fd_all(sys: &TransferSystem, h: f64, steps: FdSteps) -> Result<HashMap<Vec<u8>, f64>> {
    let mut values = HashMap::new();
    for e in required_exponents(sys.rank()) {
        if e.iter().all(|&x| x == 0) {
            values.insert(e, sys.pressure(h, &vec![0.0; sys.rank()])?);
            continue;
        }
        let mut ests = Vec::with_capacity(steps.levels);
        for level in 0..steps.levels {
            let f = 0.5f64.powi(level as i32);
            ests.push(product_difference(sys, h, &e, steps.s * f, steps.u * f)?);
        }
        values.insert(e, richardson(&ests));
    }
    Ok(values)
}

/// Finite-difference route. Steps are halved until `∂P/∂s` reproduces
/// `-∫r dμ` to `1e-7` relative and `∂P/∂u_i` reproduces `∫f_i dμ`.
pub fn pressure_derivatives_fd(
    sys: &TransferSystem,
    h: f64,
    mm: &MarkovMeasure,
    steps: FdSteps,
) -> Result<PressureDerivatives> {
    let rbar = mm.integrate(sys.lengths());
    let mut steps = steps;
    let mut achieved = f64::INFINITY;
    for _ in 0..4 {
        let values = fd_all(sys, h, steps)?;
        let mut e = vec![0u8; sys.rank() + 1];
        e[0] = 1;
        let mut err = ((values[&e] + rbar) / rbar).abs();
        for i in 0..sys.rank() {
            let mut e = vec![0u8; sys.rank() + 1];
            e[i + 1] = 1;
            let exact = mm.integrate(&sys.label_column(i));
            err = err.max((values[&e] - exact).abs() / rbar);
        }
        if err <= 1e-7 {
            return Ok(PressureDerivatives {
                s0: h,
                rank: sys.rank(),
                method: DerivativeMethod::FiniteDifference,
                values,
            });
        }
        achieved = achieved.min(err);
        steps.s *= 0.5;
        steps.u *= 0.5;
    }
    Err(Error::Calibration { achieved })
}

/// Taylor data of `β` at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoProfile {
    pub h: f64,
    /// `∫ r dμ` for the equilibrium state of `-h·r`.
    pub rbar: f64,
    pub grad: Vec<f64>,
    pub hess: SymTensor,
    pub third: SymTensor,
    pub fourth: SymTensor,
}

impl ThermoProfile {
    pub fn rank(&self) -> usize {
        self.grad.len()
    }

    pub fn hess_matrix(&self) -> DMatrix<f64> {
        let b = self.rank();
        DMatrix::from_fn(b, b, |i, j| self.hess.get(&[i, j]))
    }

    /// `h + ½ uᵀHu + (1/24) T⁴(u,u,u,u)`.
    pub fn quartic_model(&self, u: &[f64]) -> f64 {
        self.h + 0.5 * self.hess.form(u) + self.third.form(u) / 6.0 + self.fourth.form(u) / 24.0
    }
}

/// Implicit differentiation of `P(β(u), u) = 0` through fourth order,
/// using `∇β(0) = 0` (the first-order formula gives `∫f dμ / ∫r dμ`).
pub fn beta_derivatives(pd: &PressureDerivatives, rbar: f64) -> ThermoProfile {
    let b = pd.rank;
    let grad: Vec<f64> = (0..b).map(|i| pd.partial(0, &[i]) / rbar).collect();
    let hess = SymTensor::from_sorted_fn(b, 2, |ix| pd.partial(0, ix) / rbar);
    let b2 = |i: usize, j: usize| hess.get(&[i, j]);
    let third = SymTensor::from_sorted_fn(b, 3, |ix| {
        let (i, j, m) = (ix[0], ix[1], ix[2]);
        let ps = |k: usize| pd.partial(1, &[k]);
        (pd.partial(0, ix) + ps(i) * b2(j, m) + ps(j) * b2(i, m) + ps(m) * b2(i, j)) / rbar
    });
    let b3 = |i: usize, j: usize, m: usize| third.get(&[i, j, m]);
    let pss = pd.partial(2, &[]);
    let fourth = SymTensor::from_sorted_fn(b, 4, |ix| {
        let (i, j, m, n) = (ix[0], ix[1], ix[2], ix[3]);
        let ps = |k: usize| pd.partial(1, &[k]);
        let psij = |k: usize, l: usize| pd.partial(1, &[k, l]);
        let pairings = b2(i, j) * b2(m, n) + b2(i, m) * b2(j, n) + b2(i, n) * b2(j, m);
        let six = psij(i, j) * b2(m, n)
            + psij(i, m) * b2(j, n)
            + psij(i, n) * b2(j, m)
            + psij(j, m) * b2(i, n)
            + psij(j, n) * b2(i, m)
            + psij(m, n) * b2(i, j);
        let four = ps(i) * b3(j, m, n) + ps(j) * b3(i, m, n) + ps(m) * b3(i, j, n) + ps(n) * b3(i, j, m);
        (pd.partial(0, ix) + pss * pairings + six + four) / rbar
    });
    ThermoProfile {
        h: pd.s0,
        rbar,
        grad,
        hess,
        third,
        fourth,
    }
}

/// Entropy, equilibrium measure and β-profile in one pass.
#[derive(Debug, Clone)]
pub struct Thermodynamics {
    pub measure: MarkovMeasure,
    pub derivatives: PressureDerivatives,
    pub profile: ThermoProfile,
}

pub fn thermodynamics(sys: &TransferSystem) -> Result<Thermodynamics> {
    let h = solve_entropy(sys)?;
    let measure = equilibrium_measure(sys, h)?;
    let rbar = measure.integrate(sys.lengths());
    let derivatives = pressure_derivatives(sys, h)?;
    let ps = derivatives.partial(1, &[]);
    if ((ps + rbar) / rbar).abs() > 1e-9 {
        return Err(Error::Internal(format!(
            "∂P/∂s = {ps} disagrees with -∫r dμ = {}",
            -rbar
        )));
    }
    for i in 0..sys.rank() {
        let mean = measure.integrate(&sys.label_column(i));
        if mean.abs() > 1e-10 {
            return Err(Error::Internal(format!("∫f_{} dμ = {mean:e} is not zero", i + 1)));
        }
    }
    let profile = beta_derivatives(&derivatives, rbar);
    Ok(Thermodynamics {
        measure,
        derivatives,
        profile,
    })
}

/// `β`'s quadratic and quartic Taylor tensors recovered from solved values
/// of `β` alone: even-polynomial fits along directions, then a
/// least-squares solve for the symmetric tensor entries.
#[derive(Debug, Clone)]
pub struct BetaFit {
    pub hess: SymTensor,
    pub fourth: SymTensor,
}

fn monomial_exponents(b: usize, order: usize) -> Vec<Vec<usize>> {
    SymTensor::zeros(b, order).sorted_indices()
}

/// Count of distinct orderings of a sorted index tuple.
fn multiplicity(idx: &[usize]) -> f64 {
    let fact = |n: usize| (1..=n).product::<usize>() as f64;
    let mut counts = HashMap::new();
    for &i in idx {
        *counts.entry(i).or_insert(0usize) += 1;
    }
    fact(idx.len()) / counts.values().map(|&c| fact(c)).product::<f64>()
}

const FIT_SAMPLES: usize = 8;
const FIT_SPACING: f64 = 0.12;

pub fn beta_taylor_fit(sys: &TransferSystem, h: f64) -> Result<BetaFit> {
    beta_taylor_fit_with(sys, h, FIT_SAMPLES, FIT_SPACING)
}

pub fn beta_taylor_fit_with(sys: &TransferSystem, h: f64, n_samples: usize, spacing: f64) -> Result<BetaFit> {
    let b = sys.rank();
    // directions with entries in -2..=2, first nonzero entry positive
    let mut dirs: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..b {
        dirs = dirs
            .into_iter()
            .flat_map(|d| (-2..=2).map(move |x| [d.clone(), vec![x as f64]].concat()))
            .collect();
    }
    dirs.retain(|d| d.iter().find(|&&x| x != 0.0).is_some_and(|&x| x > 0.0));

    let samples: Vec<f64> = (1..=n_samples).map(|k| spacing * k as f64).collect();
    let vander = DMatrix::from_fn(samples.len(), samples.len(), |r, c| samples[r].powi(2 * (c as i32 + 1)));
    let lu = vander.lu();

    let mut quad = Vec::with_capacity(dirs.len());
    let mut quart = Vec::with_capacity(dirs.len());
    for d in &dirs {
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        let unit: Vec<f64> = d.iter().map(|x| x / norm).collect();
        let mut rhs = DVector::zeros(samples.len());
        for (k, &t) in samples.iter().enumerate() {
            let u: Vec<f64> = unit.iter().map(|x| x * t).collect();
            rhs[k] = solve_beta(sys, &u)? - h;
        }
        let coef = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Internal("singular sampling matrix".into()))?;
        quad.push(2.0 * coef[0] * norm.powi(2));
        quart.push(24.0 * coef[1] * norm.powi(4));
    }

    let fit = |order: usize, targets: &[f64]| -> Result<SymTensor> {
        let monos = monomial_exponents(b, order);
        let design = DMatrix::from_fn(dirs.len(), monos.len(), |r, c| {
            multiplicity(&monos[c]) * monos[c].iter().map(|&i| dirs[r][i]).product::<f64>()
        });
        let y = DVector::from_column_slice(targets);
        let sol = design
            .svd(true, true)
            .solve(&y, 1e-14)
            .map_err(|e| Error::Internal(e.to_string()))?;
        let mut t = SymTensor::zeros(b, order);
        for (c, idx) in monos.iter().enumerate() {
            t.set(idx, sol[c]);
        }
        Ok(t)
    };
    Ok(BetaFit {
        hess: fit(2, &quad)?,
        fourth: fit(4, &quart)?,
    })
}

/// β″(0) entries estimated from `(1/(n·rbar))·∫ f_i^n f_j^n dμ`.
pub fn covariance_estimate(sys: &TransferSystem, mm: &MarkovMeasure, rbar: f64, n: usize) -> DMatrix<f64> {
    let b = sys.rank();
    DMatrix::from_fn(b, b, |i, j| {
        mm.birkhoff_product(&sys.label_column(i), &sys.label_column(j), n) / (n as f64 * rbar)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::graph::{homology_labeling, oriented_double, MultiGraph};
    use crate::tensor::{relative_difference, SCALE_FLOOR};
    use approx::assert_relative_eq;

    fn system(g: &MultiGraph) -> TransferSystem {
        let st = oriented_double(g);
        let hl = homology_labeling(g, &st).unwrap();
        TransferSystem::new(&st, &hl).unwrap()
    }

    #[test]
    fn entropy_closed_forms() {
        assert_relative_eq!(solve_entropy(&system(&catalog::rose(&[1.0, 1.0]))).unwrap(), 4f64.ln(), epsilon = 1e-12);
        for k in 1..=5 {
            let h = solve_entropy(&system(&catalog::rose(&vec![1.0; k]))).unwrap();
            assert_relative_eq!(h, (2.0 * k as f64).ln(), epsilon = 1e-12);
        }
        let h = solve_entropy(&system(&catalog::two_loop([1.0; 3]))).unwrap();
        assert_relative_eq!(h, (1.0 + 5f64.sqrt()).ln(), epsilon = 1e-10);
    }

    #[test]
    fn beta_on_rose_axis() {
        let sys = system(&catalog::rose(&[1.0, 1.0]));
        for u1 in [-1.0f64, -0.3, 0.2, 0.9] {
            let beta = solve_beta(&sys, &[u1, 0.0]).unwrap();
            assert_relative_eq!(2.0 * (-beta).exp() * (u1.cosh() + 1.0), 1.0, epsilon = 1e-13);
            assert_relative_eq!(beta, solve_beta(&sys, &[-u1, 0.0]).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn jet_derivatives_on_rose() {
        let lengths = [0.8, 1.5];
        let sys = system(&catalog::rose(&lengths));
        let h = solve_entropy(&sys).unwrap();
        let pd = pressure_derivatives(&sys, h).unwrap();
        for (i, l) in lengths.iter().enumerate() {
            assert_relative_eq!(pd.partial(0, &[i, i]), 2.0 * (-h * l).exp(), max_relative = 1e-12);
            assert!(pd.partial(0, &[i]).abs() < 1e-13);
            // P = log Σ 2e^{-s l} cosh u: fourth u-derivative at 0 is 2e^{-hl} - 3(2e^{-hl})²
            let w = 2.0 * (-h * l).exp();
            assert_relative_eq!(pd.partial(0, &[i, i, i, i]), w - 3.0 * w * w, max_relative = 1e-11);
        }
        assert!(pd.partial(0, &[0, 1]).abs() < 1e-13);
        assert!(pd.partial(0, &[0, 0, 1]).abs() < 1e-13);
        let rbar: f64 = lengths.iter().map(|l| 2.0 * l * (-h * l).exp()).sum();
        assert_relative_eq!(pd.partial(1, &[]), -rbar, max_relative = 1e-12);
    }

    #[test]
    fn rose_profile_closed_forms() {
        // β = log(2(cosh u1 + cosh u2)) at unit lengths
        let sys = system(&catalog::rose(&[1.0, 1.0]));
        let th = thermodynamics(&sys).unwrap();
        let p = &th.profile;
        assert_relative_eq!(p.hess.get(&[0, 0]), 0.5, epsilon = 1e-12);
        assert!(p.hess.get(&[0, 1]).abs() < 1e-13);
        assert_relative_eq!(p.fourth.get(&[0, 0, 0, 0]), -0.25, epsilon = 1e-11);
        assert_relative_eq!(p.fourth.get(&[0, 0, 1, 1]), -0.25, epsilon = 1e-11);
        assert!(p.third.max_abs() < 1e-12);
        assert!(p.grad.iter().all(|g| g.abs() < 1e-13));
    }

    #[test]
    fn finite_differences_agree_with_jet() {
        let sys = system(&catalog::figure_one([1.0, 0.6, 1.7, 1.2]));
        let h = solve_entropy(&sys).unwrap();
        let mm = equilibrium_measure(&sys, h).unwrap();
        let jet = pressure_derivatives(&sys, h).unwrap();
        let fd = pressure_derivatives_fd(&sys, h, &mm, FdSteps::default()).unwrap();
        for (e, v) in jet.exponents() {
            let w = fd.values[e];
            assert!((v - w).abs() <= 1e-6 * v.abs().max(1.0), "{e:?}: jet {v} fd {w}");
        }
    }

    #[test]
    fn beta_fit_agrees_with_implicit_formulas() {
        let sys = system(&catalog::two_loop([1.0, 1.3, 0.7]));
        let th = thermodynamics(&sys).unwrap();
        let fit = beta_taylor_fit(&sys, th.profile.h).unwrap();
        let dh = relative_difference(fit.hess.data(), th.profile.hess.data(), SCALE_FLOOR);
        let d4 = relative_difference(fit.fourth.data(), th.profile.fourth.data(), SCALE_FLOOR);
        assert!(dh < 1e-6, "hess {dh:e}");
        assert!(d4 < 1e-6, "fourth {d4:e}");
    }

    #[test]
    fn two_loop_hessian_uses_engine_measure() {
        let sys = system(&catalog::two_loop([1.0; 3]));
        let th = thermodynamics(&sys).unwrap();
        let mu = th.measure.weights();
        let p = &th.profile;
        assert_relative_eq!(p.hess.get(&[0, 0]), 2.0 * mu[0] / p.rbar, max_relative = 1e-12);
        assert_relative_eq!(p.hess.get(&[1, 1]), 0.5 * (mu[2] + mu[4]) / p.rbar, max_relative = 1e-12);
        // equal lengths: rbar = 1, so β″₁₁ = 1/√5
        assert_relative_eq!(p.hess.get(&[0, 0]), 1.0 / 5f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn covariance_estimate_converges() {
        let sys = system(&catalog::rose(&[1.0, 1.0]));
        let th = thermodynamics(&sys).unwrap();
        let est = covariance_estimate(&sys, &th.measure, th.profile.rbar, 128);
        assert_relative_eq!(est[(0, 0)], th.profile.hess.get(&[0, 0]), max_relative = 5e-3);
    }
}

//! Coefficients of the local limit expansion
//! `π(T, α) ≈ e^{hT} / T^{b/2+1} · (c₀ + c₁(α)/T)`, with `c₁(α) = −αᵀaα + c₁,₀`.
//!
//! Two normalisations are carried. `PaperLiteral` keeps the `(2π)` factors of
//! the closed forms for rose and two-loop graphs; `Normalized` is the
//! expansion that actually matches cycle counts:
//! `c₀ = (2π)^{−b/2} / (h √det H)`, `a = (c₀/2) H⁻¹`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::graph::MultiGraph;
use crate::thermo::ThermoProfile;
use crate::wick;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    PaperLiteral,
    Normalized,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::PaperLiteral, Mode::Normalized];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::PaperLiteral => "paper-literal",
            Mode::Normalized => "normalized",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-literal" | "paper" => Ok(Mode::PaperLiteral),
            "normalized" => Ok(Mode::Normalized),
            other => Err(Error::Parse(format!("unknown mode {other:?} (expected paper-literal or normalized)"))),
        }
    }
}

/// `M = L⁻ᵀ` for the Cholesky factor `L` of `hess`, so `(MMᵀ)⁻¹ = hess`
/// and `det M > 0`.
pub fn factor_m(hess: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if hess.nrows() != hess.ncols() {
        return Err(Error::DimensionMismatch {
            expected: hess.nrows(),
            got: hess.ncols(),
        });
    }
    let l = hess.clone().cholesky().ok_or(Error::NotPositiveDefinite)?.l();
    let inv = l.solve_lower_triangular(&DMatrix::identity(hess.nrows(), hess.nrows())).ok_or(Error::NotPositiveDefinite)?;
    Ok(inv.transpose())
}

/// `(2π)` power in front of `det M · MMᵀ / (2h)`.
fn a_prefactor(b: usize, mode: Mode) -> f64 {
    match mode {
        Mode::PaperLiteral => (2.0 * PI).powf(b as f64 / 2.0 + 2.0),
        Mode::Normalized => (2.0 * PI).powf(-(b as f64) / 2.0),
    }
}

/// `a` from any `M` with `(MMᵀ)⁻¹ = hess`; depends on `M` only through
/// `det M` and `MMᵀ`, hence invariant under `M ↦ MQ` for rotations `Q`.
pub fn a_from_factor(m: &DMatrix<f64>, h: f64, mode: Mode) -> DMatrix<f64> {
    let b = m.nrows();
    m * m.transpose() * (a_prefactor(b, mode) * m.determinant() / (2.0 * h))
}

pub fn a_matrix(tp: &ThermoProfile, mode: Mode) -> Result<DMatrix<f64>> {
    Ok(a_from_factor(&factor_m(&tp.hess_matrix())?, tp.h, mode))
}

pub fn c0_leading(tp: &ThermoProfile) -> Result<f64> {
    let m = factor_m(&tp.hess_matrix())?;
    Ok((2.0 * PI).powf(-(tp.rank() as f64) / 2.0) * m.determinant() / tp.h)
}

/// The pieces of `c₁,₀`: Gaussian moments of the cubic and quartic parts of
/// `β` and the term from expanding `1/β` and the logarithmic integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C1Breakdown {
    /// `E[T⁴(x,x,x,x)]`, `x ~ N(0, H⁻¹)`.
    pub e4: f64,
    /// `E[T³(x,x,x)²]`.
    pub e6: f64,
    /// `∫ e^{−½vᵀHv} dv`.
    pub z: f64,
    pub quartic_term: f64,
    pub cubic_term: f64,
    pub correction_term: f64,
    /// Coefficients of the α-linear term; zero whenever `β` is even.
    pub linear: Vec<f64>,
    pub c10: f64,
}

pub fn c1_constant(tp: &ThermoProfile, mode: Mode) -> Result<C1Breakdown> {
    let b = tp.rank();
    let hess = tp.hess_matrix();
    let cov = hess.clone().try_inverse().ok_or(Error::NotPositiveDefinite)?;
    let m = factor_m(&hess)?;
    let z = (2.0 * PI).powf(b as f64 / 2.0) * m.determinant();
    let h = tp.h;
    let e4 = wick::quartic_moment(&cov, &tp.fourth);
    let e6 = wick::sextic_moment(&cov, &tp.third);
    let quartic_term = z * 3.0 * e4 / (72.0 * h);
    let cubic_term = -z * 2.0 * e6 / (72.0 * h);
    // ½ḡ₀″·(iv)² + ḡ₁ has Gaussian mean −(b+2)/(2h²) in the literal
    // normalisation; expanding ∫^T e^{βt}/t dt = e^{βT}/(βT)·(1 + 1/(βT) + …)
    // directly gives the opposite sign.
    let (scale, correction_sign) = match mode {
        Mode::PaperLiteral => (1.0, -1.0),
        Mode::Normalized => ((2.0 * PI).powf(-(b as f64)), 1.0),
    };
    let correction_term = correction_sign * z * (b as f64 + 2.0) / (2.0 * h * h);
    let linear = (0..b)
        .map(|i| {
            let mut acc = 0.0;
            for idx in tp.third.all_indices() {
                let (j, k, l) = (idx[0], idx[1], idx[2]);
                acc += tp.third.get(&idx) * cov[(i, j)] * cov[(k, l)];
            }
            scale * z * acc / (2.0 * h)
        })
        .collect();
    Ok(C1Breakdown {
        e4,
        e6,
        z,
        quartic_term: scale * quartic_term,
        cubic_term: scale * cubic_term,
        correction_term: scale * correction_term,
        linear,
        c10: scale * (quartic_term + cubic_term + correction_term),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub mode: Mode,
    pub h: f64,
    pub c0: f64,
    pub a: Vec<Vec<f64>>,
    pub c10: f64,
    pub m: Vec<Vec<f64>>,
    pub breakdown: C1Breakdown,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl ExpansionReport {
    pub fn rank(&self) -> usize {
        self.a.len()
    }

    pub fn a_matrix(&self) -> DMatrix<f64> {
        let b = self.rank();
        DMatrix::from_fn(b, b, |i, j| self.a[i][j])
    }

    /// `c₀ e^{hT} / T^{b/2+1}`.
    pub fn zeroth_order(&self, t: f64) -> f64 {
        self.c0 * self.growth(t)
    }

    /// `(c₀ + c₁(α)/T) e^{hT} / T^{b/2+1}`.
    pub fn first_order(&self, t: f64, alpha: &[i64]) -> Result<f64> {
        Ok((self.c0 + c1_of_alpha(self, alpha)? / t) * self.growth(t))
    }

    fn growth(&self, t: f64) -> f64 {
        (self.h * t - (self.rank() as f64 / 2.0 + 1.0) * t.ln()).exp()
    }
}

pub fn expansion_report(tp: &ThermoProfile, mode: Mode) -> Result<ExpansionReport> {
    let m = factor_m(&tp.hess_matrix())?;
    let a = a_from_factor(&m, tp.h, mode);
    let breakdown = c1_constant(tp, mode)?;
    let scale = breakdown.c10.abs().max(breakdown.z / tp.h * a_prefactor(0, mode));
    if breakdown.linear.iter().any(|x| x.abs() > 1e-7 * scale) {
        return Err(Error::Internal(format!(
            "α-linear coefficient {:?} is not zero: β is not even in this labeling",
            breakdown.linear
        )));
    }
    let c0 = c0_leading(tp)?;
    Ok(ExpansionReport {
        mode,
        h: tp.h,
        // c₀ has no literal form; a and c₁,₀ in literal mode carry extra (2π) powers
        c0,
        a: rows(&a),
        c10: breakdown.c10,
        m: rows(&m),
        breakdown,
    })
}

pub fn c1_of_alpha(rep: &ExpansionReport, alpha: &[i64]) -> Result<f64> {
    let b = rep.rank();
    if alpha.len() != b {
        return Err(Error::DimensionMismatch {
            expected: b,
            got: alpha.len(),
        });
    }
    let mut q = 0.0;
    for i in 0..b {
        for j in 0..b {
            q += rep.a[i][j] * alpha[i] as f64 * alpha[j] as f64;
        }
    }
    Ok(rep.c10 - q)
}

/// Closed forms for the rose with `k` loops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoseConstants {
    pub lengths: Vec<f64>,
    pub h: f64,
    /// `S = Σ lᵢ e^{−h lᵢ}`; `∫ r dμ = 2S`.
    pub s: f64,
    pub xi: f64,
    pub d_i: Vec<f64>,
    /// Symmetric, zero diagonal.
    pub d_ij: Vec<Vec<f64>>,
    /// `Σ_{i≠j} d_ij` over ordered pairs.
    pub d1: f64,
    pub d2: f64,
    /// `(1/(2π²))(d1 + d2 − (k+2)/(2hS)) ξ`.
    pub c10: f64,
    /// The same with prefactor `1/(2π)`.
    pub c10_alt_prefactor: f64,
    /// Counting all six arrangements of each mixed fourth derivative:
    /// `(1/(2π²))(3 d1 + d2 − (k+2)/(2hS)) ξ`.
    pub c10_recounted: f64,
    /// The explicit two-loop specialisation, `k = 2` only.
    pub c10_k2: Option<f64>,
    /// `a_ii = ξ e^{h lᵢ}`.
    pub a_diag: Vec<f64>,
    /// `β″_ii = e^{−h lᵢ}/S`.
    pub hess_diag: Vec<f64>,
    /// `β⁗_iiii = 8 dᵢ e^{−2h lᵢ}/S`.
    pub fourth_diag: Vec<f64>,
    /// `∂²ᵢ∂²ⱼβ = 24 d_ij e^{−h(lᵢ+lⱼ)}/S`.
    pub fourth_mixed: Vec<Vec<f64>>,
}

pub fn rose_constants(lengths: &[f64], h: f64) -> RoseConstants {
    let k = lengths.len();
    let kf = k as f64;
    let w: Vec<f64> = lengths.iter().map(|l| (-h * l).exp()).collect();
    let s: f64 = lengths.iter().zip(&w).map(|(l, w)| l * w).sum();
    let s2: f64 = lengths.iter().zip(&w).map(|(l, w)| l * l * w).sum();
    let total: f64 = lengths.iter().sum();
    let xi = (2.0 * PI).powf(kf / 2.0 + 2.0) / (2.0 * h) * (h * total).exp().sqrt() * s.powf(kf / 2.0 + 1.0);
    let d_i: Vec<f64> = lengths
        .iter()
        .map(|l| ((2.0 * (h * l).exp()) - 12.0 * l / s + 6.0 * s2 / (s * s)) / 16.0)
        .collect();
    let d_ij: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        (s2 / (s * s) - (lengths[i] + lengths[j]) / s) / 24.0
                    }
                })
                .collect()
        })
        .collect();
    let d1: f64 = d_ij.iter().flatten().sum();
    let d2: f64 = d_i.iter().sum();
    let tail = (kf + 2.0) / (2.0 * h * s);
    let c10_k2 = (k == 2).then(|| {
        let (l1, l2) = (lengths[0], lengths[1]);
        4.0 * PI.powi(3) * (h * (l1 + l2)).exp().sqrt() / (96.0 * h)
            * ((108.0 + 12.0 * ((h * l1).exp() + (h * l2).exp())) * s * s
                - 38.0 * l1 * l2
                - 63.0 * (l1 * l1 * w[0] + l2 * l2 * w[1]))
    });
    RoseConstants {
        lengths: lengths.to_vec(),
        h,
        s,
        xi,
        c10: (d1 + d2 - tail) * xi / (2.0 * PI * PI),
        c10_alt_prefactor: (d1 + d2 - tail) * xi / (2.0 * PI),
        c10_recounted: (3.0 * d1 + d2 - tail) * xi / (2.0 * PI * PI),
        c10_k2,
        a_diag: lengths.iter().map(|l| xi * (h * l).exp()).collect(),
        hess_diag: w.iter().map(|w| w / s).collect(),
        fourth_diag: d_i.iter().zip(&w).map(|(d, w)| 8.0 * d * w * w / s).collect(),
        fourth_mixed: (0..k)
            .map(|i| (0..k).map(|j| 24.0 * d_ij[i][j] * w[i] * w[j] / s).collect())
            .collect(),
        d_i,
        d_ij,
        d1,
        d2,
    }
}

/// Edge lengths of a rose, in edge order.
pub fn rose_lengths(g: &MultiGraph) -> Result<Vec<f64>> {
    catalog::rose_size(g)
        .map(|_| g.edges().iter().map(|e| e.length.to_f64()).collect())
        .ok_or_else(|| Error::Topology("expected a rose: one vertex, every edge a loop".into()))
}

/// Closed forms for the graph with a loop `l₁` and a double bond `l₂, l₃`,
/// using that graph's printed `β″ = diag(2e^{−hl₁}, ½(e^{−hl₂}+e^{−hl₃}))/(2S)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLoopConstants {
    pub lengths: [f64; 3],
    pub h: f64,
    pub c: f64,
    pub a11: f64,
    pub a22: f64,
    pub hess: [[f64; 2]; 2],
}

pub fn two_loop_constants(lengths: [f64; 3], h: f64) -> TwoLoopConstants {
    let [l1, l2, l3] = lengths;
    let s: f64 = lengths.iter().map(|l| l * (-h * l).exp()).sum();
    let root = ((-h * (l1 + l2)).exp() + (-h * (l1 + l3)).exp()).sqrt();
    let c = 8.0 * PI.powi(3) * s * s / (h * root);
    let e = |l: f64| (-h * l).exp();
    TwoLoopConstants {
        lengths,
        h,
        c,
        a11: c * (h * l1).exp(),
        a22: 4.0 * c * (h * (l2 + l3)).exp() / ((h * l2).exp() + (h * l3).exp()),
        hess: [[2.0 * e(l1) / (2.0 * s), 0.0], [0.0, 0.5 * (e(l2) + e(l3)) / (2.0 * s)]],
    }
}

impl TwoLoopConstants {
    pub fn hess_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(2, 2, |i, j| self.hess[i][j])
    }
}

pub fn two_loop_lengths(g: &MultiGraph) -> Result<[f64; 3]> {
    if !catalog::is_two_loop(g) {
        return Err(Error::Topology("expected a loop plus a double bond on two vertices".into()));
    }
    let e = g.edges();
    Ok([e[0].length.to_f64(), e[1].length.to_f64(), e[2].length.to_f64()])
}

/// Printed `β″` against the engine's, in the basis where the second class
/// coordinate counts traversals of the double bond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HessComparison {
    pub paper: Vec<Vec<f64>>,
    pub engine: Vec<Vec<f64>>,
    pub max_relative_difference: f64,
    pub discrepancy: bool,
}

pub fn compare_hessians(paper: &DMatrix<f64>, engine: &DMatrix<f64>) -> HessComparison {
    let diff = crate::tensor::relative_difference(paper.as_slice(), engine.as_slice(), 1e-12);
    HessComparison {
        paper: rows(paper),
        engine: rows(engine),
        max_relative_difference: diff,
        discrepancy: diff > 1e-6,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{homology_labeling, oriented_double};
    use crate::tensor::SymTensor;
    use crate::thermo::thermodynamics;
    use crate::transfer::TransferSystem;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn profile(g: &MultiGraph) -> ThermoProfile {
        let st = oriented_double(g);
        let hl = homology_labeling(g, &st).unwrap();
        thermodynamics(&TransferSystem::new(&st, &hl).unwrap()).unwrap().profile
    }

    #[test]
    fn factor_examples() {
        let m = factor_m(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(m, DMatrix::identity(3, 3));
        let m = factor_m(&DMatrix::from_diagonal_element(2, 2, 0.5)).unwrap();
        assert_relative_eq!(m[(0, 0)], 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(m.determinant(), 2.0, epsilon = 1e-14);
        assert!(matches!(
            factor_m(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn factor_inverts_hessian() {
        let h = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, -0.1, 0.3, 1.1, 0.2, -0.1, 0.2, 0.7]);
        let m = factor_m(&h).unwrap();
        let back = (&m * m.transpose()).try_inverse().unwrap();
        assert!((back - &h).amax() < 1e-12);
        assert!(m.determinant() > 0.0);
        let id = m.transpose() * &h * &m;
        assert!((id - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn rotations_leave_a_unchanged() {
        let h = DMatrix::from_row_slice(2, 2, &[0.8, 0.1, 0.1, 0.4]);
        let m = factor_m(&h).unwrap();
        let base = a_from_factor(&m, 1.3, Mode::PaperLiteral);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let q = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
            let rotated = a_from_factor(&(&m * q), 1.3, Mode::PaperLiteral);
            assert!((rotated - &base).amax() <= 1e-9 * base.amax());
        }
    }

    #[test]
    fn rose_unit_lengths() {
        let tp = profile(&catalog::rose(&[1.0, 1.0]));
        let h = 4f64.ln();
        assert_relative_eq!(c0_leading(&tp).unwrap(), 1.0 / (2.0 * PI) * 2.0 / h, max_relative = 1e-12);
        assert_relative_eq!(c0_leading(&tp).unwrap(), 0.229612, epsilon = 1e-6);
        let rc = rose_constants(&[1.0, 1.0], h);
        assert_relative_eq!(rc.xi, (2.0 * PI).powi(3) / (2.0 * h), max_relative = 1e-14);
        assert_relative_eq!(rc.xi, 89.4652, epsilon = 1e-4);
        assert_relative_eq!(rc.d_ij[0][1], -1.0 / 12.0, epsilon = 1e-15);
        assert_relative_eq!(rc.d_i[0], -0.25, epsilon = 1e-15);
        let a = a_matrix(&tp, Mode::PaperLiteral).unwrap();
        assert_relative_eq!(a[(0, 0)], 4.0 * rc.xi, max_relative = 1e-10);
        assert!(a[(0, 1)].abs() < 1e-9);
        let rep = expansion_report(&tp, Mode::PaperLiteral).unwrap();
        assert_relative_eq!(c1_of_alpha(&rep, &[1, 0]).unwrap(), -4.0 * rc.xi + rep.c10, max_relative = 1e-10);
        assert_relative_eq!(c1_of_alpha(&rep, &[0, 0]).unwrap(), rep.c10);
        assert!(c1_of_alpha(&rep, &[1]).is_err());
    }

    #[test]
    fn rose_closed_forms_match_engine() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in [2usize, 3] {
            for _ in 0..5 {
                let lengths: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..2.0)).collect();
                let tp = profile(&catalog::rose(&lengths));
                let rc = rose_constants(&lengths, tp.h);
                for i in 0..k {
                    assert_relative_eq!(tp.hess.get(&[i, i]), rc.hess_diag[i], max_relative = 1e-10);
                    assert_relative_eq!(tp.fourth.get(&[i, i, i, i]), rc.fourth_diag[i], max_relative = 1e-8);
                    for j in (i + 1)..k {
                        assert_relative_eq!(tp.fourth.get(&[i, i, j, j]), rc.fourth_mixed[i][j], max_relative = 1e-8);
                    }
                }
                let a = a_matrix(&tp, Mode::PaperLiteral).unwrap();
                for i in 0..k {
                    assert_relative_eq!(a[(i, i)], rc.a_diag[i], max_relative = 1e-9);
                }
                let c = c1_constant(&tp, Mode::PaperLiteral).unwrap();
                assert_relative_eq!(c.c10, rc.c10_recounted, max_relative = 1e-8);
                assert!(c.e6.abs() < 1e-18 && c.cubic_term.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn modes_differ_by_fixed_powers() {
        let tp = profile(&catalog::figure_one([1.0, 0.6, 1.7, 1.2]));
        let p = expansion_report(&tp, Mode::PaperLiteral).unwrap();
        let n = expansion_report(&tp, Mode::Normalized).unwrap();
        let ratio = (2.0 * PI).powi(tp.rank() as i32 + 2);
        for i in 0..2 {
            for j in 0..2 {
                if p.a[i][j].abs() > 1e-12 {
                    assert_relative_eq!(p.a[i][j] / n.a[i][j], ratio, max_relative = 1e-10);
                }
            }
        }
        let hinv = tp.hess_matrix().try_inverse().unwrap() * (n.c0 / 2.0);
        assert!((n.a_matrix() - hinv).amax() < 1e-12 * n.a_matrix().amax());
        let b = tp.rank() as f64;
        let z = p.breakdown.z;
        let flip = z * (b + 2.0) / (tp.h * tp.h);
        assert_relative_eq!(n.c10, (2.0 * PI).powf(-b) * (p.c10 + flip), max_relative = 1e-10);
    }

    #[test]
    fn two_loop_displays() {
        let lengths = [1.0, 1.3, 0.7];
        let tp = profile(&catalog::two_loop(lengths));
        let tl = two_loop_constants(lengths, tp.h);
        let a = a_from_factor(&factor_m(&tl.hess_matrix()).unwrap(), tp.h, Mode::PaperLiteral);
        assert_relative_eq!(a[(0, 0)], tl.a11, max_relative = 1e-12);
        assert_relative_eq!(a[(1, 1)], tl.a22, max_relative = 1e-12);
        let cmp = compare_hessians(&tl.hess_matrix(), &tp.hess_matrix());
        assert!(cmp.discrepancy);
        let eq = two_loop_constants([1.0; 3], (1.0 + 5f64.sqrt()).ln());
        assert_relative_eq!(eq.hess[0][0], 1.0 / 3.0, max_relative = 1e-12);
    }

    /// Probabilists' Gauss–Hermite rule.
    fn hermite_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
        let jacobi = DMatrix::from_fn(n, n, |i, j| if i + 1 == j || j + 1 == i { (i.max(j) as f64).sqrt() } else { 0.0 });
        let eig = jacobi.symmetric_eigen();
        ((eig.eigenvalues.iter().copied().collect()), (0..n).map(|k| eig.eigenvectors[(0, k)].powi(2)).collect())
    }

    #[test]
    fn wick_matches_gaussian_quadrature() {
        // F₂(iv) integrated against e^{−½vᵀHv}, with non-zero odd part
        let hess = DMatrix::from_row_slice(2, 2, &[0.7, 0.15, 0.15, 0.4]);
        let tp = ThermoProfile {
            h: 1.2,
            rbar: 1.0,
            grad: vec![0.0; 2],
            hess: SymTensor::from_sorted_fn(2, 2, |ix| hess[(ix[0], ix[1])]),
            third: SymTensor::from_sorted_fn(2, 3, |ix| 0.05 * (1 + ix[0] + 2 * ix[1] + ix[2]) as f64),
            fourth: SymTensor::from_sorted_fn(2, 4, |ix| -0.2 + 0.07 * ix.iter().sum::<usize>() as f64),
        };
        let c = c1_constant(&tp, Mode::PaperLiteral).unwrap();
        let l = hess.clone().try_inverse().unwrap().cholesky().unwrap().l();
        let (x, w) = hermite_rule(20);
        let mut mean = 0.0;
        for (xa, wa) in x.iter().zip(&w) {
            for (xb, wb) in x.iter().zip(&w) {
                let v = &l * nalgebra::DVector::from_vec(vec![*xa, *xb]);
                let v = v.as_slice();
                let t3 = tp.third.form(v);
                let f2 = (-2.0 * t3 * t3 + 3.0 * tp.fourth.form(v)) / (72.0 * tp.h)
                    - tp.hess.form(v) / (2.0 * tp.h * tp.h)
                    - 1.0 / (tp.h * tp.h);
                mean += wa * wb * f2;
            }
        }
        assert_relative_eq!(c.c10, c.z * mean, max_relative = 1e-10);
    }

    /// `(1/2π) ∫ cos(wα) ∫ e^{β(iw)t}/t dt dw` for `β(iw) = h − ½σ²w² + κw⁴/24`,
    /// integrated over `t ∈ [T − 40, T]` (earlier times are `e^{−40}` smaller).
    fn counting_integral(h: f64, sigma2: f64, kappa: f64, alpha: f64, t_end: f64) -> f64 {
        let beta = |w: f64| h - 0.5 * sigma2 * w * w + kappa * w.powi(4) / 24.0;
        let (wmax, nw) = (8.0, 3200);
        let dw = wmax / nw as f64;
        let g = |t: f64| {
            // even integrand: twice the half-line trapezoid
            let mut acc = 0.5 * (beta(0.0) * t - h * t_end).exp();
            for k in 1..=nw {
                let w = k as f64 * dw;
                acc += (w * alpha).cos() * (beta(w) * t - h * t_end).exp();
            }
            2.0 * acc * dw / (2.0 * PI)
        };
        let t0 = (t_end - 40.0).max(1.0);
        let n = 8000;
        let dt = (t_end - t0) / n as f64;
        let mut sum = 0.0;
        for k in 0..=n {
            let t = t0 + k as f64 * dt;
            let weight = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            sum += weight * g(t) / t;
        }
        sum * dt / 3.0
    }

    #[test]
    fn normalized_first_order_matches_direct_asymptotics() {
        let (h, sigma2, kappa) = (1.0, 0.5, -0.3);
        let tp = ThermoProfile {
            h,
            rbar: 1.0,
            grad: vec![0.0],
            hess: SymTensor::from_sorted_fn(1, 2, |_| sigma2),
            third: SymTensor::zeros(1, 3),
            fourth: SymTensor::from_sorted_fn(1, 4, |_| kappa),
        };
        let rep = expansion_report(&tp, Mode::Normalized).unwrap();
        for alpha in [0i64, 1] {
            // e^{−hT} already factored out inside the integral
            let q = |t: f64| t * (counting_integral(h, sigma2, kappa, alpha as f64, t) * t.powf(1.5) / rep.c0 - 1.0);
            let extrapolated = 2.0 * q(80.0) - q(40.0);
            let predicted = c1_of_alpha(&rep, &[alpha]).unwrap() / rep.c0;
            assert!((extrapolated - predicted).abs() < 0.02, "α={alpha}: {extrapolated} vs {predicted}");
        }
    }
}

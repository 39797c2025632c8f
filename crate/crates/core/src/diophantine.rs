//! Non-lattice and Diophantine diagnostics for cycle lengths.
//!
//! Condition (A), weak mixing, fails exactly when all prime cycle lengths
//! lie in `δZ` for one `δ > 0`. Condition (B) asks for `ξ` below to be
//! badly approximable. The Diophantine side looks at
//! `ξ = (l(γ₁) − l(γ₂)) / (l(γ₂) − l(γ₃))` for the three shortest distinct
//! lengths; its partial quotients are evidence only: bounded quotients
//! cannot be decided from finitely many of them.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::census::{dfs_oracle, OracleCycle};
use crate::graph::{homology_labeling, oriented_double, MultiGraph};
use crate::surd::Surd;
use crate::Result;

pub const CF_DEPTH: usize = 30;
pub const SEARCH_PERIOD: usize = 8;

/// Largest `δ` with every length in `δZ`, if the lengths are commensurable.
pub fn lattice_spacing(lengths: &[Surd]) -> Option<Surd> {
    let first = lengths.first()?;
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for l in lengths {
        let q = first.ratio_if_rational(l)?;
        num = num.gcd(q.numer());
        den = den.lcm(q.denom());
    }
    Some(first.scale(&BigRational::new(num, den)))
}

/// Partial quotients of `x` up to `depth` terms; shorter when `x` is
/// rational and the expansion terminates.
pub fn continued_fraction(x: &Surd, depth: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(depth);
    let mut x = x.clone();
    for _ in 0..depth {
        let a = x.floor();
        let rem = &x - &Surd::from_bigint(&a);
        out.push(a);
        match rem.inverse() {
            Some(inv) => x = inv,
            None => break,
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiophantineDiagnostic {
    /// The three shortest distinct cycle lengths, ascending.
    pub lengths: [String; 3],
    pub xi: f64,
    pub xi_exact: String,
    pub partial_quotients: Vec<String>,
    pub max_quotient: String,
    /// The expansion terminated: ξ is rational and condition (B) fails.
    pub terminated: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionsReport {
    pub cycles_examined: usize,
    pub search_period: usize,
    /// `δ` when all examined cycle lengths lie in `δZ`.
    pub lattice_spacing: Option<String>,
    pub weak_mixing: bool,
    /// `None` when fewer than three distinct lengths were found.
    pub diophantine: Option<DiophantineDiagnostic>,
    pub notes: Vec<String>,
}

pub fn diophantine_diagnostic(l1: &Surd, l2: &Surd, l3: &Surd) -> DiophantineDiagnostic {
    let xi = (l1 - l2) * (l2 - l3).inverse().expect("distinct lengths");
    let cf = continued_fraction(&xi, CF_DEPTH);
    let terminated = cf.len() < CF_DEPTH || xi.is_rational();
    // the leading term is the integer part, not a partial quotient
    let max = cf.iter().skip(1).map(|a| a.abs()).max().unwrap_or_else(BigInt::zero);
    let note = if terminated {
        "ξ is rational: condition (B) is violated".to_string()
    } else if cf.iter().skip(1).all(|a| a.is_one()) {
        "all partial quotients equal 1: best possible (golden-ratio type)".to_string()
    } else {
        format!(
            "largest of the first {} partial quotients is {max}; bounded quotients suggest but cannot establish condition (B)",
            cf.len().saturating_sub(1)
        )
    };
    DiophantineDiagnostic {
        lengths: [l1.to_string(), l2.to_string(), l3.to_string()],
        xi: xi.to_f64(),
        xi_exact: xi.to_string(),
        partial_quotients: cf.iter().map(BigInt::to_string).collect(),
        max_quotient: max.to_string(),
        terminated,
        note,
    }
}

fn cycle_length(lv: &[Surd], c: &OracleCycle) -> Surd {
    c.usage
        .iter()
        .zip(lv)
        .fold(Surd::zero(), |acc, (&n, l)| acc + l.scale_int(n as i64))
}

pub fn conditions_diagnostics(g: &MultiGraph) -> Result<ConditionsReport> {
    let st = oriented_double(g);
    let hl = homology_labeling(g, &st)?;
    let cycles = dfs_oracle(&st, &hl, f64::INFINITY, SEARCH_PERIOD);
    let mut lengths: Vec<Surd> = cycles.iter().map(|c| cycle_length(st.length_values(), c)).collect();
    lengths.sort();
    lengths.dedup();
    let spacing = lattice_spacing(&lengths);
    let mut notes = Vec::new();
    if let Some(d) = &spacing {
        notes.push(format!("condition (A) violated: every examined cycle length is a multiple of {d}"));
    }
    let diophantine = if lengths.len() >= 3 {
        Some(diophantine_diagnostic(&lengths[0], &lengths[1], &lengths[2]))
    } else {
        notes.push("inconclusive: fewer than three distinct cycle lengths".into());
        None
    };
    Ok(ConditionsReport {
        cycles_examined: cycles.len(),
        search_period: SEARCH_PERIOD,
        lattice_spacing: spacing.as_ref().map(Surd::to_string),
        weak_mixing: spacing.is_none(),
        diophantine,
        notes,
    })
}

/// Numeric value of a partial quotient string, saturating.
pub fn quotient_value(s: &str) -> u64 {
    s.parse::<BigInt>().ok().and_then(|b| b.to_u64()).unwrap_or(u64::MAX)
}

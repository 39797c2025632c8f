//! Exact cycle census: periodic points of the shift bucketed by homology
//! class and edge-length usage, reduced to prime closed orbits.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::expansion::{c1_of_alpha, ExpansionReport, Mode};
use crate::graph::{ClassVector, HomologyLabeling, SymbolTable};
use crate::surd::Surd;
use crate::transfer::transition_matrix_unchecked;
use crate::{Error, Result};

/// How many times each distinct edge length is traversed.
pub type UsageVector = Vec<u32>;

pub type Bucket = (ClassVector, UsageVector);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusConfig {
    pub n_max: usize,
    pub budget_mb: u64,
    /// Shard parallelism cap; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig {
            n_max: 12,
            budget_mb: 1024,
            threads: None,
        }
    }
}

/// Per-period maps `(class, usage) → count`; index `n − 1` holds period `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CensusTable {
    pub rank: usize,
    pub n_max: usize,
    pub length_values: Vec<Surd>,
    pub fixed: Vec<BTreeMap<Bucket, BigUint>>,
    /// Prime closed orbits of least period `n`; filled by [`primitive_orbit_counts`].
    pub orbits: Option<Vec<BTreeMap<Bucket, BigUint>>>,
}

impl CensusTable {
    pub fn fixed_total(&self, n: usize) -> BigUint {
        self.fixed[n - 1].values().sum()
    }

    pub fn usage_length(&self, usage: &[u32]) -> Surd {
        usage
            .iter()
            .zip(&self.length_values)
            .fold(Surd::zero(), |acc, (&c, l)| acc + l.scale_int(c as i64))
    }

    pub fn min_length(&self) -> Surd {
        self.length_values.iter().min().cloned().expect("at least one edge")
    }

    fn orbit_layer(&self) -> Result<&[BTreeMap<Bucket, BigUint>]> {
        self.orbits
            .as_deref()
            .ok_or_else(|| Error::Internal("orbit layer not computed".into()))
    }
}

/// Bit layout of a DP state packed into one `u128`: symbol in the low 16
/// bits, then `b` class coordinates and one usage count per length class,
/// each offset by `n_max` into a `width`-bit field.
struct Packing {
    width: u32,
    offset: i64,
    fields: usize,
}

impl Packing {
    fn new(n_max: usize, fields: usize) -> Option<Self> {
        let width = u64::BITS - (2 * n_max as u64 + 1).leading_zeros();
        (16 + width as usize * fields <= 128).then_some(Packing {
            width,
            offset: n_max as i64,
            fields,
        })
    }

    fn shift(&self, field: usize) -> u32 {
        16 + self.width * field as u32
    }

    /// Key of the zero class and zero usage, symbol 0.
    fn origin(&self) -> u128 {
        (0..self.fields).fold(0u128, |acc, f| acc | ((self.offset as u128) << self.shift(f)))
    }

    /// Signed increment as a wrapping `u128`.
    fn delta(&self, increments: &[i64]) -> u128 {
        increments.iter().enumerate().fold(0u128, |acc, (f, &d)| {
            let step = (d.unsigned_abs() as u128) << self.shift(f);
            if d >= 0 {
                acc.wrapping_add(step)
            } else {
                acc.wrapping_sub(step)
            }
        })
    }

    fn unpack(&self, key: u128, b: usize) -> Bucket {
        let mask = (1u128 << self.width) - 1;
        let field = |f: usize| ((key >> self.shift(f)) & mask) as i64 - self.offset;
        let class = ClassVector((0..b).map(field).collect());
        let usage = (b..self.fields).map(|f| field(f) as u32).collect();
        (class, usage)
    }
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Rough peak memory of one shard in MB: every (symbol, class, usage) state
/// alive at once, at ~96 bytes per map entry.
pub fn estimate_mb(st: &SymbolTable, rank: usize, n_max: usize, shards: usize) -> u64 {
    let classes = ((2 * n_max + 1) as f64).powi(rank as i32);
    let lv = st.length_values().len() as u64;
    let usages = binomial(n_max as u64 + lv - 1, lv - 1);
    let states = st.len() as f64 * classes.min(st.len() as f64 * (st.len() as f64 - 1.0).max(1.0).powi(n_max as i32)) * usages;
    (states * 96.0 * shards as f64 / 1e6).ceil() as u64
}

/// Fixed points of `σⁿ` for `n ≤ n_max`, bucketed by class and usage.
pub fn fixed_point_table(st: &SymbolTable, hl: &HomologyLabeling, config: &CensusConfig) -> Result<CensusTable> {
    let b = hl.rank();
    let n_max = config.n_max;
    let lv = st.length_values().len();
    if n_max == 0 {
        return Err(Error::Internal("census needs n_max >= 1".into()));
    }
    let shards = config.threads.unwrap_or_else(rayon::current_num_threads).clamp(1, st.len().max(1));
    let required = estimate_mb(st, b, n_max, shards);
    let packing = Packing::new(n_max, b + lv);
    if required > config.budget_mb || packing.is_none() {
        return Err(Error::BudgetExceeded {
            required_mb: required,
            budget_mb: config.budget_mb,
        });
    }
    let packing = packing.unwrap();
    let a = transition_matrix_unchecked(st);
    let deltas: Vec<u128> = (0..st.len())
        .map(|s| {
            let mut inc: Vec<i64> = hl.label(s).to_vec();
            inc.extend((0..lv).map(|k| (st.get(s).length_class == k) as i64));
            packing.delta(&inc)
        })
        .collect();
    let successors: Vec<Vec<usize>> = (0..st.len()).map(|s| a.successors(s).collect()).collect();
    let sym_mask: u128 = 0xFFFF;

    let shard = |s0: usize| -> Vec<HashMap<u128, BigUint>> {
        let mut out = vec![HashMap::new(); n_max];
        let mut layer: HashMap<u128, BigUint> = HashMap::new();
        layer.insert(packing.origin().wrapping_add(deltas[s0]) | s0 as u128, BigUint::one());
        for (n, slot) in out.iter_mut().enumerate() {
            for (key, count) in &layer {
                let x = (key & sym_mask) as usize;
                if a.get(x, s0) == 1 {
                    *slot.entry(key & !sym_mask).or_insert_with(BigUint::zero) += count;
                }
            }
            if n + 1 == n_max {
                break;
            }
            let mut next: HashMap<u128, BigUint> = HashMap::with_capacity(layer.len() * 2);
            for (key, count) in &layer {
                let x = (key & sym_mask) as usize;
                let base = key & !sym_mask;
                for &y in &successors[x] {
                    let k = base.wrapping_add(deltas[y]) | y as u128;
                    *next.entry(k).or_insert_with(BigUint::zero) += count;
                }
            }
            layer = next;
        }
        out
    };

    let run = || -> Vec<Vec<HashMap<u128, BigUint>>> { (0..st.len()).into_par_iter().map(shard).collect() };
    let per_start = match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };

    // merge in start-symbol order
    let mut fixed = vec![BTreeMap::new(); n_max];
    for shard in per_start {
        for (n, layer) in shard.into_iter().enumerate() {
            for (key, count) in layer {
                *fixed[n].entry(packing.unpack(key, b)).or_insert_with(BigUint::zero) += count;
            }
        }
    }
    Ok(CensusTable {
        rank: b,
        n_max,
        length_values: st.length_values().to_vec(),
        fixed,
        orbits: None,
    })
}

fn divide_bucket(bucket: &Bucket, q: i64) -> Option<Bucket> {
    let (class, usage) = bucket;
    if class.iter().all(|c| c % q == 0) && usage.iter().all(|u| *u as i64 % q == 0) {
        Some((
            ClassVector(class.iter().map(|c| c / q).collect()),
            usage.iter().map(|u| u / q as u32).collect(),
        ))
    } else {
        None
    }
}

/// Möbius-style peeling: points of least period `n` are the fixed points of
/// `σⁿ` minus the `n/d`-fold repeats of least-period-`d` points, which scale
/// class and usage by `n/d`. Each orbit has exactly `n` points.
pub fn primitive_orbit_counts(mut table: CensusTable) -> Result<CensusTable> {
    let mut points: Vec<BTreeMap<Bucket, BigUint>> = Vec::with_capacity(table.n_max);
    for n in 1..=table.n_max {
        let mut layer = BTreeMap::new();
        for (bucket, count) in &table.fixed[n - 1] {
            let mut p = count.clone();
            for d in (1..n).filter(|d| n % d == 0) {
                if let Some(root) = divide_bucket(bucket, (n / d) as i64) {
                    if let Some(sub) = points[d - 1].get(&root) {
                        if *sub > p {
                            return Err(Error::Internal(format!(
                                "negative primitive count at period {n}, bucket {bucket:?}"
                            )));
                        }
                        p -= sub;
                    }
                }
            }
            if !p.is_zero() {
                layer.insert(bucket.clone(), p);
            }
        }
        points.push(layer);
    }
    let mut orbits = Vec::with_capacity(table.n_max);
    for (idx, layer) in points.into_iter().enumerate() {
        let n = BigUint::from(idx + 1);
        let mut out = BTreeMap::new();
        for (bucket, p) in layer {
            let (q, r) = p.div_rem(&n);
            if !r.is_zero() {
                return Err(Error::Internal(format!(
                    "{p} primitive points at period {n} do not group into orbits ({bucket:?})"
                )));
            }
            out.insert(bucket, q);
        }
        orbits.push(out);
    }
    table.orbits = Some(orbits);
    Ok(table)
}

pub fn census(st: &SymbolTable, hl: &HomologyLabeling, config: &CensusConfig) -> Result<CensusTable> {
    primitive_orbit_counts(fixed_point_table(st, hl, config)?)
}

/// `T` as an exact number: shortest decimal reading of the float.
pub fn exact_time(t: f64) -> Surd {
    crate::graph::length_from_f64(t)
}

/// Smallest period bound guaranteeing every cycle of length `≤ T` is seen.
pub fn required_period(table: &CensusTable, t: f64) -> usize {
    let ratio = exact_time(t) * table.min_length().inverse().expect("positive length");
    let ceil = -(-&ratio).floor();
    ceil.to_usize().unwrap_or(usize::MAX)
}

/// Prime closed orbits in class `α` with length `≤ T`.
pub fn pi_empirical(table: &CensusTable, t: f64, alpha: &ClassVector) -> Result<BigUint> {
    Ok(pi_many(table, t, std::slice::from_ref(alpha))?.pop().unwrap())
}

/// [`pi_empirical`] for several classes in one sweep.
pub fn pi_many(table: &CensusTable, t: f64, alphas: &[ClassVector]) -> Result<Vec<BigUint>> {
    for a in alphas {
        if a.dim() != table.rank {
            return Err(Error::DimensionMismatch {
                expected: table.rank,
                got: a.dim(),
            });
        }
    }
    let required = required_period(table, t);
    if required > table.n_max {
        return Err(Error::InsufficientPeriod {
            t,
            required,
            n_max: table.n_max,
        });
    }
    let orbits = table.orbit_layer()?;
    let t_exact = exact_time(t);
    let values: Vec<f64> = table.length_values.iter().map(Surd::to_f64).collect();
    let mut out = vec![BigUint::zero(); alphas.len()];
    let index: HashMap<&ClassVector, Vec<usize>> = alphas.iter().enumerate().fold(HashMap::new(), |mut m, (i, a)| {
        m.entry(a).or_insert_with(Vec::new).push(i);
        m
    });
    for layer in orbits {
        for ((class, usage), count) in layer {
            let Some(slots) = index.get(class) else { continue };
            let approx: f64 = usage.iter().zip(&values).map(|(&c, l)| c as f64 * l).sum();
            // exact comparison only near the boundary
            let inside = if (approx - t).abs() > 1e-9 * t.max(1.0) {
                approx <= t
            } else {
                table.usage_length(usage) <= t_exact
            };
            if inside {
                for &i in slots {
                    out[i] += count;
                }
            }
        }
    }
    Ok(out)
}

/// Fixed points of `σⁿ` on the rose in class `α`, by usage `(aᵢ + bᵢ)` per
/// loop: words with `aᵢ` forward and `bᵢ` backward traversals of loop `i`
/// number `n! / Π aᵢ! bᵢ!`.
pub fn rose_fix_oracle(k: usize, n: usize, alpha: &[i64]) -> BTreeMap<Vec<u32>, BigUint> {
    fn factorial(n: u64) -> BigUint {
        (1..=n).fold(BigUint::one(), |acc, i| acc * i)
    }
    let mut out = BTreeMap::new();
    // usage u_i with u_i ≥ |α_i|, u_i ≡ α_i mod 2, Σ u_i = n
    fn go(i: usize, left: i64, alpha: &[i64], usage: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == alpha.len() {
            if left == 0 {
                out.push(usage.clone());
            }
            return;
        }
        let mut u = alpha[i].abs();
        while u <= left {
            usage.push(u as u32);
            go(i + 1, left - u, alpha, usage, out);
            usage.pop();
            u += 2;
        }
    }
    assert_eq!(alpha.len(), k, "class dimension must equal the number of loops");
    let mut usages = Vec::new();
    go(0, n as i64, alpha, &mut Vec::new(), &mut usages);
    let n_fact = factorial(n as u64);
    for usage in usages {
        let denom = usage.iter().zip(alpha).fold(BigUint::one(), |acc, (&u, &a)| {
            let fwd = (u as i64 + a) / 2;
            let bwd = (u as i64 - a) / 2;
            acc * factorial(fwd as u64) * factorial(bwd as u64)
        });
        out.insert(usage, &n_fact / denom);
    }
    out
}

/// One prime cycle found by exhaustive search: its lexicographically least
/// rotation as a symbol word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OracleCycle {
    pub word: Vec<usize>,
    pub class: ClassVector,
    pub usage: UsageVector,
}

impl OracleCycle {
    pub fn period(&self) -> usize {
        self.word.len()
    }
}

fn is_canonical_primitive(word: &[usize]) -> bool {
    let n = word.len();
    (1..n).all(|r| {
        let rotated = word[r..].iter().chain(&word[..r]);
        // strictly greater: equal means a proper power
        rotated.cmp(word.iter()) == std::cmp::Ordering::Greater
    })
}

/// Depth-first enumeration of prime cycles with length `≤ T` and at most
/// `max_period` symbols; an infinite `T` bounds by period alone.
pub fn dfs_oracle(st: &SymbolTable, hl: &HomologyLabeling, t: f64, max_period: usize) -> Vec<OracleCycle> {
    let a = transition_matrix_unchecked(st);
    let t_exact = t.is_finite().then(|| exact_time(t));
    let lv = st.length_values();
    let mut out = Vec::new();
    let mut word = Vec::new();
    fn go(
        st: &SymbolTable,
        a: &crate::transfer::TransitionMatrix,
        word: &mut Vec<usize>,
        length: Surd,
        t: &Option<Surd>,
        max_period: usize,
        emit: &mut dyn FnMut(&[usize]),
    ) {
        let first = word[0];
        let last = *word.last().unwrap();
        if a.get(last, first) == 1 && is_canonical_primitive(word) {
            emit(word);
        }
        if word.len() == max_period {
            return;
        }
        for y in a.successors(last).filter(|&y| y >= first) {
            let next = &length + &st.length_values()[st.get(y).length_class];
            if t.as_ref().is_none_or(|t| next <= *t) {
                word.push(y);
                go(st, a, word, next, t, max_period, emit);
                word.pop();
            }
        }
    }
    for s0 in 0..st.len() {
        let l0 = lv[st.get(s0).length_class].clone();
        if t_exact.as_ref().is_some_and(|t| l0 > *t) || max_period == 0 {
            continue;
        }
        word.push(s0);
        go(st, &a, &mut word, l0, &t_exact, max_period, &mut |w: &[usize]| {
            let mut usage = vec![0u32; lv.len()];
            for &s in w {
                usage[st.get(s).length_class] += 1;
            }
            out.push(OracleCycle {
                word: w.to_vec(),
                class: hl.class_of(w),
                usage,
            });
        });
        word.pop();
    }
    out.sort();
    out
}

/// Oracle cycles grouped like the census orbit layer.
pub fn oracle_orbit_layer(cycles: &[OracleCycle], n_max: usize) -> Vec<BTreeMap<Bucket, BigUint>> {
    let mut out = vec![BTreeMap::new(); n_max];
    for c in cycles.iter().filter(|c| c.period() <= n_max) {
        *out[c.period() - 1]
            .entry((c.class.clone(), c.usage.clone()))
            .or_insert_with(BigUint::zero) += 1u32;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub t: f64,
    pub alpha: ClassVector,
    /// Exact count, as a decimal string.
    pub empirical: String,
    pub zeroth: f64,
    pub first: f64,
    pub residual_zeroth: f64,
    pub residual_first: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub rows: Vec<ResidualRow>,
    pub warnings: Vec<String>,
}

impl ResidualReport {
    pub fn row(&self, t: f64, alpha: &ClassVector) -> Option<&ResidualRow> {
        self.rows.iter().find(|r| r.t == t && &r.alpha == alpha)
    }
}

pub const LATTICE_WARNING: &str = "lattice lengths: asymptotic comparison invalid (condition (A) violated)";

/// Census counts against the zeroth- and first-order predictions.
pub fn compare_prediction(
    table: &CensusTable,
    rep: &ExpansionReport,
    t_grid: &[f64],
    alphas: &[ClassVector],
) -> Result<ResidualReport> {
    if rep.mode != Mode::Normalized {
        return Err(Error::Internal("census comparison needs the normalized expansion".into()));
    }
    let mut warnings = Vec::new();
    if crate::diophantine::lattice_spacing(&table.length_values).is_some() {
        warnings.push(LATTICE_WARNING.to_string());
    }
    let mut rows = Vec::new();
    for &t in t_grid {
        let counts = pi_many(table, t, alphas)?;
        for (alpha, count) in alphas.iter().zip(counts) {
            let empirical = count.to_f64().unwrap_or(f64::INFINITY);
            let zeroth = rep.zeroth_order(t);
            let first = (rep.c0 + c1_of_alpha(rep, alpha)? / t) * zeroth / rep.c0;
            rows.push(ResidualRow {
                t,
                alpha: alpha.clone(),
                empirical: count.to_string(),
                zeroth,
                first,
                residual_zeroth: (empirical - zeroth).abs() / zeroth,
                residual_first: (empirical - first).abs() / zeroth,
            });
        }
    }
    Ok(ResidualReport { rows, warnings })
}

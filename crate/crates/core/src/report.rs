//! Command implementations behind the binary: configuration, JSON report
//! documents and CSV tables.

use std::fs;
use std::path::{Path, PathBuf};

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::census::{self, CensusConfig, CensusTable, ResidualReport};
use crate::diophantine::{self, ConditionsReport};
use crate::expansion::{self, ExpansionReport, HessComparison, Mode, RoseConstants, TwoLoopConstants};
use crate::graph::{
    homology_labeling, oriented_double, parse_graph, require_admissible, ClassVector, HomologyLabeling, MultiGraph,
    SymbolTable, ValidationReport,
};
use crate::tensor::SymTensor;
use crate::thermo::{self, FdSteps, Thermodynamics};
use crate::transfer::{transition_matrix, TransferSystem};
use crate::{Error, Result};

pub const MAX_ALPHA_RADIUS: i64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub mode: Mode,
    pub fd_steps: FdSteps,
    /// `None`: the smallest bound covering the largest `T`.
    pub n_max: Option<usize>,
    pub budget_mb: u64,
    pub threads: Option<usize>,
    pub t_grid: Vec<f64>,
    pub alpha_radius: i64,
    pub out: Option<PathBuf>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            mode: Mode::Normalized,
            fd_steps: FdSteps::default(),
            n_max: None,
            budget_mb: 1024,
            threads: None,
            t_grid: vec![8.0, 10.0, 12.0, 14.0, 16.0, 18.0],
            alpha_radius: 3,
            out: None,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Parse(format!("configuration: {what}")));
        if !(self.fd_steps.s > 0.0 && self.fd_steps.u > 0.0 && self.fd_steps.levels > 0) {
            return bad("derivative steps must be positive");
        }
        if self.n_max == Some(0) || self.budget_mb == 0 || self.threads == Some(0) {
            return bad("n_max, budget and thread count must be positive");
        }
        if self.t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return bad("T values must be positive and finite");
        }
        if !(0..=MAX_ALPHA_RADIUS).contains(&self.alpha_radius) {
            return bad(&format!("α radius must lie in 0..={MAX_ALPHA_RADIUS}"));
        }
        Ok(())
    }

    fn census_config(&self, table_min_len: f64) -> CensusConfig {
        let t_max = self.t_grid.iter().copied().fold(0.0, f64::max);
        let needed = (t_max / table_min_len).ceil().max(1.0) as usize;
        CensusConfig {
            n_max: self.n_max.unwrap_or(needed),
            budget_mb: self.budget_mb,
            threads: self.threads,
        }
    }
}

/// Hex SHA-256 of the input document.
pub fn content_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// A validated graph with its symbolic dynamics.
pub struct Pipeline {
    pub graph: MultiGraph,
    pub validation: ValidationReport,
    pub symbols: SymbolTable,
    pub labeling: HomologyLabeling,
    pub system: TransferSystem,
    pub input_hash: String,
}

impl Pipeline {
    pub fn from_document(text: &str) -> Result<Self> {
        let mut p = Self::from_graph(parse_graph(text)?)?;
        p.input_hash = content_hash(text);
        Ok(p)
    }

    pub fn from_graph(graph: MultiGraph) -> Result<Self> {
        let validation = require_admissible(&graph)?;
        if validation.b == 0 {
            return Err(Error::TrivialHomology);
        }
        let symbols = oriented_double(&graph);
        transition_matrix(&symbols)?;
        let labeling = homology_labeling(&graph, &symbols)?;
        let system = TransferSystem::new(&symbols, &labeling)?;
        let input_hash = content_hash(&graph.to_document());
        Ok(Pipeline {
            graph,
            validation,
            symbols,
            labeling,
            system,
            input_hash,
        })
    }

    pub fn thermodynamics(&self) -> Result<Thermodynamics> {
        thermo::thermodynamics(&self.system)
    }

    pub fn census(&self, config: &CensusConfig) -> Result<CensusTable> {
        census::census(&self.symbols, &self.labeling, config)
    }
}

pub fn read_document(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRow {
    /// 1-based symbol label.
    pub symbol: usize,
    pub edge: String,
    pub forward: bool,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C1Row {
    pub alpha: ClassVector,
    pub paper_literal: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoseSection {
    pub constants: RoseConstants,
    /// Wick value of `c₁,₀` in literal normalisation.
    pub engine_c10: f64,
    pub engine_a_diag: Vec<f64>,
    pub c10_matches_in_text: bool,
    pub c10_matches_recounted: bool,
    pub c10_matches_k2: Option<bool>,
    pub a_matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLoopSection {
    pub constants: TwoLoopConstants,
    pub hessians: HessComparison,
    /// Literal-mode `a` from the engine's `β″`.
    pub engine_a11: f64,
    pub engine_a22: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub input_hash: String,
    pub config: AnalysisConfig,
    pub validation: ValidationReport,
    pub h: f64,
    pub rbar: f64,
    pub measure: Vec<MeasureRow>,
    pub hess: SymTensor,
    pub third: SymTensor,
    pub fourth: SymTensor,
    /// Largest relative gap between the Taylor-series and finite-difference
    /// pressure derivatives, or why the latter could not be calibrated.
    pub fd_check: std::result::Result<f64, String>,
    pub expansions: Vec<ExpansionReport>,
    pub c1_table: Vec<C1Row>,
    pub rose: Option<RoseSection>,
    pub two_loop: Option<TwoLoopSection>,
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn rose_section(p: &Pipeline, th: &Thermodynamics) -> Result<Option<RoseSection>> {
    let Ok(lengths) = expansion::rose_lengths(&p.graph) else { return Ok(None) };
    let tp = &th.profile;
    let constants = expansion::rose_constants(&lengths, tp.h);
    let engine_c10 = expansion::c1_constant(tp, Mode::PaperLiteral)?.c10;
    let a = expansion::a_matrix(tp, Mode::PaperLiteral)?;
    let engine_a_diag: Vec<f64> = (0..lengths.len()).map(|i| a[(i, i)]).collect();
    Ok(Some(RoseSection {
        c10_matches_in_text: close(engine_c10, constants.c10, 1e-8),
        c10_matches_recounted: close(engine_c10, constants.c10_recounted, 1e-8),
        c10_matches_k2: constants.c10_k2.map(|v| close(engine_c10, v, 1e-8)),
        a_matches: engine_a_diag.iter().zip(&constants.a_diag).all(|(x, y)| close(*x, *y, 1e-8)),
        constants,
        engine_c10,
        engine_a_diag,
    }))
}

pub fn two_loop_section(p: &Pipeline, th: &Thermodynamics) -> Result<Option<TwoLoopSection>> {
    let Ok(lengths) = expansion::two_loop_lengths(&p.graph) else { return Ok(None) };
    let tp = &th.profile;
    // second coordinate counts passes through the double bond
    let labeling = HomologyLabeling::with_tree(&p.graph, &p.symbols, &[1])?;
    let system = TransferSystem::new(&p.symbols, &labeling)?;
    let profile = if labeling == p.labeling { tp.clone() } else { thermo::thermodynamics(&system)?.profile };
    let constants = expansion::two_loop_constants(lengths, profile.h);
    let hessians = expansion::compare_hessians(&constants.hess_matrix(), &profile.hess_matrix());
    let a = expansion::a_matrix(&profile, Mode::PaperLiteral)?;
    Ok(Some(TwoLoopSection {
        constants,
        hessians,
        engine_a11: a[(0, 0)],
        engine_a22: a[(1, 1)],
    }))
}

pub fn cmd_analyze(p: &Pipeline, config: &AnalysisConfig) -> Result<AnalysisReport> {
    config.validate()?;
    let th = p.thermodynamics()?;
    let tp = &th.profile;
    let measure = (0..p.symbols.len())
        .map(|s| {
            let sym = p.symbols.get(s);
            MeasureRow {
                symbol: s + 1,
                edge: p.graph.edges()[sym.edge].id.clone(),
                forward: s % 2 == 0,
                mu: th.measure.mu(s),
            }
        })
        .collect();
    let fd_check = thermo::pressure_derivatives_fd(&p.system, tp.h, &th.measure, config.fd_steps)
        .map(|fd| {
            th.derivatives
                .exponents()
                .map(|(e, v)| (v - fd.value(e).unwrap_or(f64::NAN)).abs() / v.abs().max(1.0))
                .fold(0.0, f64::max)
        })
        .map_err(|e| e.to_string());
    let expansions: Vec<ExpansionReport> = Mode::ALL
        .iter()
        .map(|&m| expansion::expansion_report(tp, m))
        .collect::<Result<_>>()?;
    let c1_table = ClassVector::window(tp.rank(), config.alpha_radius)
        .into_iter()
        .map(|alpha| {
            Ok(C1Row {
                paper_literal: expansion::c1_of_alpha(&expansions[0], &alpha)?,
                normalized: expansion::c1_of_alpha(&expansions[1], &alpha)?,
                alpha,
            })
        })
        .collect::<Result<_>>()?;
    Ok(AnalysisReport {
        input_hash: p.input_hash.clone(),
        config: config.clone(),
        validation: p.validation,
        h: tp.h,
        rbar: tp.rbar,
        measure,
        hess: tp.hess.clone(),
        third: tp.third.clone(),
        fourth: tp.fourth.clone(),
        fd_check,
        expansions,
        c1_table,
        rose: rose_section(p, &th)?,
        two_loop: two_loop_section(p, &th)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub t: f64,
    pub alpha: ClassVector,
    /// Exact count as a decimal string.
    pub count: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub input_hash: String,
    pub config: AnalysisConfig,
    pub n_max: usize,
    pub rows: Vec<CensusRow>,
}

pub fn cmd_census(p: &Pipeline, config: &AnalysisConfig) -> Result<CensusReport> {
    config.validate()?;
    let cc = config.census_config(p.symbols.min_length());
    let table = p.census(&cc)?;
    let alphas = ClassVector::window(p.labeling.rank(), config.alpha_radius);
    let mut rows = Vec::new();
    for &t in &config.t_grid {
        for (alpha, count) in alphas.iter().zip(census::pi_many(&table, t, &alphas)?) {
            rows.push(CensusRow {
                t,
                alpha: alpha.clone(),
                count: count.to_string(),
            });
        }
    }
    Ok(CensusReport {
        input_hash: p.input_hash.clone(),
        config: config.clone(),
        n_max: cc.n_max,
        rows,
    })
}

/// Pass/fail flags for the count-level checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyFlags {
    /// Fixed-point totals equal `trace(Aⁿ)` for `n ≤ min(n_max, 12)`.
    pub trace_identity: bool,
    /// `π(T, α) = π(T, −α)` on every row.
    pub class_symmetry: bool,
    /// `|π(T,0)·e^{−hT}T^{b/2+1}/c₀ − 1|` strictly decreasing along the grid.
    pub zeroth_residual_decreasing: bool,
    pub final_zeroth_residual: f64,
    /// `π(T,α)/π(T,0)` within `[0.5, 1.5]` for the unit classes `±e_i`.
    pub unit_ratio_in_band: bool,
    /// `|π(T,α)/π(T,0) − 1|` non-increasing along the grid for each unit class.
    pub unit_ratio_tightening: bool,
    /// On the last three grid points and the radius-1 window, the largest
    /// first-order residual is below the largest zeroth-order one.
    pub first_beats_zeroth: bool,
    pub max_residual_zeroth: f64,
    pub max_residual_first: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub input_hash: String,
    pub config: AnalysisConfig,
    pub n_max: usize,
    pub expansion: ExpansionReport,
    pub residuals: ResidualReport,
    /// Comparison is meaningless for lattice lengths.
    pub probative: bool,
    pub flags: VerifyFlags,
}

fn unit_classes(b: usize) -> Vec<ClassVector> {
    let mut out = Vec::new();
    for i in 0..b {
        for s in [1, -1] {
            let mut v = vec![0; b];
            v[i] = s;
            out.push(ClassVector(v));
        }
    }
    out
}

pub fn cmd_verify(p: &Pipeline, config: &AnalysisConfig) -> Result<VerifyReport> {
    config.validate()?;
    let th = p.thermodynamics()?;
    let rep = expansion::expansion_report(&th.profile, Mode::Normalized)?;
    let cc = config.census_config(p.symbols.min_length());
    let table = p.census(&cc)?;
    let b = p.labeling.rank();
    let mut alphas = ClassVector::window(b, config.alpha_radius.max(1));
    alphas.sort();
    let residuals = census::compare_prediction(&table, &rep, &config.t_grid, &alphas)?;
    let a = transition_matrix(&p.symbols)?;
    let trace_identity = (1..=cc.n_max.min(12)).all(|n| table.fixed_total(n) == a.trace_power(n));
    let class_symmetry = residuals
        .rows
        .iter()
        .all(|r| residuals.row(r.t, &r.alpha.negated()).map(|s| &s.empirical) == Some(&r.empirical));

    let zero = ClassVector::zero(b);
    let at = |t: f64, alpha: &ClassVector| residuals.row(t, alpha).expect("row for every grid point");
    let zeroth: Vec<f64> = config.t_grid.iter().map(|&t| at(t, &zero).residual_zeroth).collect();
    let zeroth_residual_decreasing = zeroth.windows(2).all(|w| w[1] < w[0]);
    let final_zeroth_residual = *zeroth.last().unwrap_or(&f64::NAN);
    let count = |t: f64, alpha: &ClassVector| at(t, alpha).empirical.parse::<f64>().unwrap_or(f64::NAN);
    let mut unit_ratio_in_band = true;
    let mut unit_ratio_tightening = true;
    for alpha in unit_classes(b) {
        let gaps: Vec<f64> = config
            .t_grid
            .iter()
            .map(|&t| {
                let r = count(t, &alpha) / count(t, &zero);
                unit_ratio_in_band &= (0.5..=1.5).contains(&r);
                (r - 1.0).abs()
            })
            .collect();
        unit_ratio_tightening &= gaps.windows(2).all(|w| w[1] <= w[0]);
    }
    let tail: Vec<f64> = config.t_grid.iter().rev().take(3).copied().collect();
    let window1 = ClassVector::window(b, 1);
    let (mut max_residual_zeroth, mut max_residual_first) = (0.0f64, 0.0f64);
    for &t in &tail {
        for alpha in &window1 {
            let r = at(t, alpha);
            max_residual_zeroth = max_residual_zeroth.max(r.residual_zeroth);
            max_residual_first = max_residual_first.max(r.residual_first);
        }
    }
    Ok(VerifyReport {
        input_hash: p.input_hash.clone(),
        config: config.clone(),
        n_max: cc.n_max,
        probative: residuals.warnings.is_empty(),
        expansion: rep,
        residuals,
        flags: VerifyFlags {
            trace_identity,
            class_symmetry,
            zeroth_residual_decreasing,
            final_zeroth_residual,
            unit_ratio_in_band,
            unit_ratio_tightening,
            first_beats_zeroth: max_residual_first < max_residual_zeroth,
            max_residual_zeroth,
            max_residual_first,
        },
    })
}

pub fn cmd_conditions(p: &Pipeline) -> Result<ConditionsReport> {
    diophantine::conditions_diagnostics(&p.graph)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "topology", rename_all = "kebab-case")]
pub enum OracleReport {
    Rose(RoseSection),
    TwoLoop(TwoLoopSection),
}

pub fn cmd_oracle(p: &Pipeline) -> Result<OracleReport> {
    let th = p.thermodynamics()?;
    if let Some(r) = rose_section(p, &th)? {
        return Ok(OracleReport::Rose(r));
    }
    if let Some(t) = two_loop_section(p, &th)? {
        return Ok(OracleReport::TwoLoop(t));
    }
    Err(Error::Topology("closed forms exist only for roses and the loop-plus-double-bond graph".into()))
}

/// Floats at 17 significant digits: enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn csv_finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Internal(format!("csv: {e}"))
}

fn alpha_header(b: usize) -> Vec<String> {
    (1..=b).map(|i| format!("alpha{i}")).collect()
}

pub fn census_csv(rep: &CensusReport) -> Result<String> {
    let b = rep.rows.first().map_or(0, |r| r.alpha.dim());
    let mut w = csv_writer();
    let mut header = vec!["t".to_string()];
    header.extend(alpha_header(b));
    header.push("count".into());
    w.write_record(&header).map_err(csv_err)?;
    for r in &rep.rows {
        let mut rec = vec![fmt_float(r.t)];
        rec.extend(r.alpha.iter().map(i64::to_string));
        rec.push(r.count.clone());
        w.write_record(&rec).map_err(csv_err)?;
    }
    csv_finish(w)
}

pub fn residual_csv(rep: &ResidualReport) -> Result<String> {
    let b = rep.rows.first().map_or(0, |r| r.alpha.dim());
    let mut w = csv_writer();
    let mut header = vec!["t".to_string()];
    header.extend(alpha_header(b));
    header.extend(["empirical", "zeroth", "first", "residual_zeroth", "residual_first"].map(String::from));
    w.write_record(&header).map_err(csv_err)?;
    for r in &rep.rows {
        let mut rec = vec![fmt_float(r.t)];
        rec.extend(r.alpha.iter().map(i64::to_string));
        rec.push(r.empirical.clone());
        rec.extend([r.zeroth, r.first, r.residual_zeroth, r.residual_first].map(fmt_float));
        w.write_record(&rec).map_err(csv_err)?;
    }
    csv_finish(w)
}

pub fn c1_csv(rep: &AnalysisReport) -> Result<String> {
    let b = rep.hess.dim();
    let mut w = csv_writer();
    let mut header = alpha_header(b);
    header.extend(["c1_paper_literal", "c1_normalized"].map(String::from));
    w.write_record(&header).map_err(csv_err)?;
    for r in &rep.c1_table {
        let mut rec: Vec<String> = r.alpha.iter().map(i64::to_string).collect();
        rec.extend([r.paper_literal, r.normalized].map(fmt_float));
        w.write_record(&rec).map_err(csv_err)?;
    }
    csv_finish(w)
}

/// Parses rows written by [`census_csv`].
pub fn parse_census_csv(text: &str) -> Result<Vec<CensusRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let b = r.headers().map_err(csv_err)?.len().saturating_sub(2);
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            let num = |i: usize| rec.get(i).ok_or_else(|| Error::Parse("short csv row".into()));
            Ok(CensusRow {
                t: num(0)?.parse().map_err(|_| Error::Parse("bad T".into()))?,
                alpha: ClassVector(
                    (1..=b)
                        .map(|i| num(i)?.parse().map_err(|_| Error::Parse("bad class".into())))
                        .collect::<Result<_>>()?,
                ),
                count: num(b + 1)?.to_string(),
            })
        })
        .collect()
}

pub fn to_json<T: Serialize>(doc: &T) -> Result<String> {
    serde_json::to_string_pretty(doc).map_err(|e| Error::Internal(e.to_string()))
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Writes `report.json` (and `table.csv` when given) into `dir`.
pub fn write_outputs(dir: &Path, json: &str, csv: Option<&str>) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), json)?;
    if let Some(csv) = csv {
        fs::write(dir.join("table.csv"), csv)?;
    }
    Ok(())
}

/// Count as a float, for ratios in reports.
pub fn count_f64(s: &str) -> f64 {
    s.parse::<num_bigint::BigUint>().ok().and_then(|b| b.to_f64()).unwrap_or(f64::NAN)
}

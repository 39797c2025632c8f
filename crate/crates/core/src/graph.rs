//! Weighted multigraphs, their oriented double, and integer homology labels.
//!
//! Symbols of the oriented double are numbered from 0 here: symbol `2i` is
//! edge `i` traversed from its first listed endpoint to its second, symbol
//! `2i + 1` is the reverse traversal. Printed tables use the 1-based labels
//! `2i + 1` and `2i + 2`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::ops::Deref;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::surd::Surd;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub ends: (usize, usize),
    pub length: Surd,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.ends.0 == self.ends.1
    }
}

/// An undirected multigraph with positive edge lengths, kept exactly as
/// given (parallel edges and loops included).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
}

/// Edge description used to build a [`MultiGraph`] by vertex name.
#[derive(Debug, Clone)]
pub struct EdgeSpec {
    pub id: String,
    pub ends: [String; 2],
    pub length: Surd,
}

impl EdgeSpec {
    pub fn new(id: impl Into<String>, from: impl Into<String>, to: impl Into<String>, length: Surd) -> Self {
        EdgeSpec {
            id: id.into(),
            ends: [from.into(), to.into()],
            length,
        }
    }
}

impl MultiGraph {
    pub fn new(vertices: Vec<String>, edges: Vec<EdgeSpec>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::DuplicateId(v.clone()));
            }
        }
        let mut seen = HashMap::new();
        let mut out = Vec::with_capacity(edges.len());
        for spec in edges {
            if seen.insert(spec.id.clone(), ()).is_some() {
                return Err(Error::DuplicateId(spec.id));
            }
            if spec.length.signum() <= 0 {
                return Err(Error::NonPositiveLength { edge: spec.id });
            }
            let lookup = |name: &String| {
                index.get(name).copied().ok_or_else(|| Error::DanglingEndpoint {
                    edge: spec.id.clone(),
                    vertex: name.clone(),
                })
            };
            let a = lookup(&spec.ends[0])?;
            let b = lookup(&spec.ends[1])?;
            out.push(Edge {
                id: spec.id,
                ends: (a, b),
                length: spec.length,
            });
        }
        Ok(MultiGraph {
            vertices,
            edges: out,
        })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    /// Serializes back to the graph document format.
    pub fn to_document(&self) -> String {
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|e| {
                serde_json::json!({
                    "id": e.id,
                    "ends": [self.vertices[e.ends.0], self.vertices[e.ends.1]],
                    "length": length_to_value(&e.length),
                })
            })
            .collect();
        let doc = serde_json::json!({ "vertices": self.vertices, "edges": edges });
        serde_json::to_string_pretty(&doc).expect("graph document serializes")
    }
}

#[derive(Deserialize)]
struct RawGraph {
    vertices: Vec<Value>,
    edges: Vec<RawEdge>,
}

#[derive(Deserialize)]
struct RawEdge {
    id: Value,
    ends: Vec<Value>,
    length: Option<Value>,
}

fn id_string(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(Error::Parse(format!("ids must be strings or numbers, got {other}"))),
    }
}

fn rational_from_value(v: &Value) -> Option<BigRational> {
    match v {
        Value::Number(n) => Surd::parse_rational(&n.to_string()),
        Value::String(s) => Surd::parse_rational(s),
        _ => None,
    }
}

fn length_from_value(v: &Value) -> Option<Surd> {
    match v {
        Value::Object(map) => {
            if map.keys().any(|k| !matches!(k.as_str(), "q0" | "q1" | "q2" | "q3")) {
                return None;
            }
            let get = |k: &str| match map.get(k) {
                Some(v) => rational_from_value(v),
                None => Some(BigRational::zero()),
            };
            Some(Surd::from_linear([get("q0")?, get("q1")?, get("q2")?, get("q3")?]))
        }
        other => rational_from_value(other).map(Surd::from_rational),
    }
}

fn length_to_value(s: &Surd) -> Value {
    fn text(q: &BigRational) -> Value {
        if q.is_integer() {
            Value::String(q.to_integer().to_string())
        } else {
            Value::String(format!("{}/{}", q.numer(), q.denom()))
        }
    }
    match s.as_rational() {
        Some(q) => text(q),
        None => {
            let [q0, q1, q2, q3] = s
                .linear_coeffs()
                .expect("edge lengths lie in span{1, √2, √3, √5}");
            serde_json::json!({ "q0": text(&q0), "q1": text(&q1), "q2": text(&q2), "q3": text(&q3) })
        }
    }
}

/// Reads a graph document:
/// `{"vertices": [ids], "edges": [{"id", "ends": [v, w], "length"}]}` where a
/// length is a decimal (number or string), a fraction string, or an object
/// `{"q0", "q1", "q2", "q3"}` meaning `q0 + q1·√2 + q2·√3 + q3·√5`.
pub fn parse_graph(text: &str) -> Result<MultiGraph> {
    let raw: RawGraph = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let vertices = raw.vertices.iter().map(id_string).collect::<Result<Vec<_>>>()?;
    let mut edges = Vec::with_capacity(raw.edges.len());
    for e in &raw.edges {
        let id = id_string(&e.id)?;
        if e.ends.len() != 2 {
            return Err(Error::Parse(format!("edge {id} must have exactly two ends")));
        }
        let length = match &e.length {
            None | Some(Value::Null) => return Err(Error::NonPositiveLength { edge: id }),
            Some(v) => length_from_value(v)
                .ok_or_else(|| Error::Parse(format!("edge {id}: unreadable length {v}")))?,
        };
        edges.push(EdgeSpec {
            ends: [id_string(&e.ends[0])?, id_string(&e.ends[1])?],
            id,
            length,
        });
    }
    MultiGraph::new(vertices, edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub connected: bool,
    pub bipartite: bool,
    /// Cycle rank `m - n + (number of components)`; equals `m - n + 1` when connected.
    pub b: usize,
}

pub fn validate_graph(g: &MultiGraph) -> ValidationReport {
    let n = g.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in g.edges() {
        let (a, b) = (find(&mut parent, e.ends.0), find(&mut parent, e.ends.1));
        if a != b {
            parent[a] = b;
        }
    }
    let components = (0..n).filter(|&v| find(&mut parent, v) == v).count();

    // two-colouring; a loop joins a vertex to itself and breaks it immediately
    let mut colour: Vec<Option<bool>> = vec![None; n];
    let adjacency = adjacency(g);
    let mut bipartite = true;
    for start in 0..n {
        if colour[start].is_some() {
            continue;
        }
        colour[start] = Some(false);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let c = colour[v].unwrap();
            for &(_, w) in &adjacency[v] {
                match colour[w] {
                    None => {
                        colour[w] = Some(!c);
                        queue.push_back(w);
                    }
                    Some(cw) if cw == c => bipartite = false,
                    _ => {}
                }
            }
        }
    }
    ValidationReport {
        connected: components == 1,
        bipartite,
        b: g.edge_count() + components - n,
    }
}

/// `(edge index, neighbour)` per vertex, in input edge order.
fn adjacency(g: &MultiGraph) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); g.vertex_count()];
    for (i, e) in g.edges().iter().enumerate() {
        adj[e.ends.0].push((i, e.ends.1));
        if !e.is_loop() {
            adj[e.ends.1].push((i, e.ends.0));
        }
    }
    adj
}

/// Rejects graphs that the expansion machinery cannot handle.
pub fn require_admissible(g: &MultiGraph) -> Result<ValidationReport> {
    let report = validate_graph(g);
    if !report.connected {
        return Err(Error::Disconnected);
    }
    if report.bipartite {
        return Err(Error::Bipartite);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    pub initial: usize,
    pub terminal: usize,
    pub reverse: usize,
    pub edge: usize,
    pub length: f64,
    /// Index into [`SymbolTable::length_values`].
    pub length_class: usize,
}

/// The `2m` arcs of the oriented double.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTable {
    symbols: Vec<Symbol>,
    length_values: Vec<Surd>,
    vertex_count: usize,
}

impl SymbolTable {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn get(&self, s: usize) -> &Symbol {
        &self.symbols[s]
    }

    pub fn reverse(&self, s: usize) -> usize {
        self.symbols[s].reverse
    }

    pub fn length(&self, s: usize) -> f64 {
        self.symbols[s].length
    }

    /// Distinct edge-length values, in order of first appearance.
    pub fn length_values(&self) -> &[Surd] {
        &self.length_values
    }

    pub fn min_length(&self) -> f64 {
        self.symbols.iter().map(|s| s.length).fold(f64::INFINITY, f64::min)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Symbols leaving vertex `v`, ascending.
    pub fn out_symbols(&self, v: usize) -> Vec<usize> {
        (0..self.len()).filter(|&s| self.symbols[s].initial == v).collect()
    }

    /// Whether the symbol word closes up into a cycle of the graph.
    pub fn is_closed_walk(&self, word: &[usize]) -> bool {
        !word.is_empty()
            && word
                .iter()
                .zip(word.iter().cycle().skip(1))
                .all(|(&a, &b)| self.symbols[a].terminal == self.symbols[b].initial)
    }
}

pub fn oriented_double(g: &MultiGraph) -> SymbolTable {
    let mut length_values: Vec<Surd> = Vec::new();
    let mut symbols = Vec::with_capacity(2 * g.edge_count());
    for (i, e) in g.edges().iter().enumerate() {
        let class = match length_values.iter().position(|v| *v == e.length) {
            Some(c) => c,
            None => {
                length_values.push(e.length.clone());
                length_values.len() - 1
            }
        };
        let length = e.length.to_f64();
        symbols.push(Symbol {
            initial: e.ends.0,
            terminal: e.ends.1,
            reverse: 2 * i + 1,
            edge: i,
            length,
            length_class: class,
        });
        symbols.push(Symbol {
            initial: e.ends.1,
            terminal: e.ends.0,
            reverse: 2 * i,
            edge: i,
            length,
            length_class: class,
        });
    }
    SymbolTable {
        symbols,
        length_values,
        vertex_count: g.vertex_count(),
    }
}

/// An element of `H_1(G, Z) ≅ Z^b` in the basis of a [`HomologyLabeling`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassVector(pub Vec<i64>);

impl ClassVector {
    pub fn zero(b: usize) -> Self {
        ClassVector(vec![0; b])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn negated(&self) -> Self {
        ClassVector(self.0.iter().map(|x| -x).collect())
    }

    /// Every class with all coordinates in `-radius..=radius`.
    pub fn window(b: usize, radius: i64) -> Vec<ClassVector> {
        let mut out = vec![Vec::new()];
        for _ in 0..b {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (-radius..=radius).map(move |x| {
                        let mut p = prefix.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(ClassVector).collect()
    }
}

impl Deref for ClassVector {
    type Target = [i64];
    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for ClassVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Spanning-tree cocycle: tree symbols carry 0, the forward symbol of the
/// k-th non-tree edge carries the k-th unit vector, its reverse the negative.
#[derive(Debug, Clone, PartialEq)]
pub struct HomologyLabeling {
    rank: usize,
    tree: Vec<bool>,
    cotree: Vec<usize>,
    labels: Vec<Vec<i64>>,
}

impl HomologyLabeling {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Indices of the tree edges.
    pub fn tree_edges(&self) -> Vec<usize> {
        (0..self.tree.len()).filter(|&i| self.tree[i]).collect()
    }

    /// Non-tree edges; the k-th one spans coordinate k.
    pub fn cotree_edges(&self) -> &[usize] {
        &self.cotree
    }

    pub fn label(&self, s: usize) -> &[i64] {
        &self.labels[s]
    }

    pub fn labels(&self) -> &[Vec<i64>] {
        &self.labels
    }

    pub fn class_of(&self, word: &[usize]) -> ClassVector {
        let mut c = vec![0i64; self.rank];
        for &s in word {
            for (ci, fi) in c.iter_mut().zip(&self.labels[s]) {
                *ci += fi;
            }
        }
        ClassVector(c)
    }

    /// Labeling relative to a caller-chosen spanning tree (edge indices).
    pub fn with_tree(g: &MultiGraph, st: &SymbolTable, tree_edges: &[usize]) -> Result<Self> {
        let n = g.vertex_count();
        if tree_edges.len() + 1 != n {
            return Err(Error::NotSpanningTree(format!(
                "{} edges cannot span {} vertices",
                tree_edges.len(),
                n
            )));
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut tree = vec![false; g.edge_count()];
        for &i in tree_edges {
            let e = g
                .edges()
                .get(i)
                .ok_or_else(|| Error::NotSpanningTree(format!("no edge {i}")))?;
            let (a, b) = (find(&mut parent, e.ends.0), find(&mut parent, e.ends.1));
            if a == b || tree[i] {
                return Err(Error::NotSpanningTree(format!("edge {} closes a cycle", e.id)));
            }
            parent[a] = b;
            tree[i] = true;
        }
        let cotree: Vec<usize> = (0..g.edge_count()).filter(|&i| !tree[i]).collect();
        let rank = cotree.len();
        if rank == 0 {
            return Err(Error::TrivialHomology);
        }
        let mut labels = vec![vec![0i64; rank]; st.len()];
        for (k, &e) in cotree.iter().enumerate() {
            labels[2 * e][k] = 1;
            labels[2 * e + 1][k] = -1;
        }
        Ok(HomologyLabeling {
            rank,
            tree,
            cotree,
            labels,
        })
    }

    /// Closed walk made of the k-th non-tree edge followed by the tree path back.
    pub fn fundamental_cycle(&self, g: &MultiGraph, k: usize) -> Vec<usize> {
        let e = self.cotree[k];
        let (a, b) = g.edges()[e].ends;
        let mut walk = vec![2 * e];
        walk.extend(self.tree_path(g, b, a));
        walk
    }

    /// Symbols of the unique tree path from `from` to `to`.
    fn tree_path(&self, g: &MultiGraph, from: usize, to: usize) -> Vec<usize> {
        let n = g.vertex_count();
        let mut via: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            for (i, e) in g.edges().iter().enumerate() {
                if !self.tree[i] {
                    continue;
                }
                let (sym, w) = if e.ends.0 == v {
                    (2 * i, e.ends.1)
                } else if e.ends.1 == v {
                    (2 * i + 1, e.ends.0)
                } else {
                    continue;
                };
                if !seen[w] {
                    seen[w] = true;
                    via[w] = Some(sym);
                    queue.push_back(w);
                }
            }
        }
        let mut path = Vec::new();
        let mut v = to;
        while v != from {
            let sym = via[v].expect("tree spans the graph");
            path.push(sym);
            v = if g.edges()[sym / 2].ends.1 == v && sym.is_multiple_of(2) {
                g.edges()[sym / 2].ends.0
            } else {
                g.edges()[sym / 2].ends.1
            };
        }
        path.reverse();
        path
    }
}

/// BFS spanning tree from the first vertex, scanning edges in input order.
pub fn homology_labeling(g: &MultiGraph, st: &SymbolTable) -> Result<HomologyLabeling> {
    let report = validate_graph(g);
    if !report.connected {
        return Err(Error::Disconnected);
    }
    let adj = adjacency(g);
    let mut seen = vec![false; g.vertex_count()];
    let mut tree = Vec::new();
    if g.vertex_count() > 0 {
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &(i, w) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    tree.push(i);
                    queue.push_back(w);
                }
            }
        }
    }
    tree.sort_unstable();
    HomologyLabeling::with_tree(g, st, &tree)
}

/// Integer matrix `U` with `to.class_of(w) = U · from.class_of(w)` for every
/// closed walk `w`. Column k is the `to`-class of the k-th fundamental cycle
/// of `from`.
pub fn change_of_basis(g: &MultiGraph, from: &HomologyLabeling, to: &HomologyLabeling) -> Vec<Vec<i64>> {
    let b = from.rank();
    let mut u = vec![vec![0i64; b]; to.rank()];
    for k in 0..b {
        let cycle = from.fundamental_cycle(g, k);
        let c = to.class_of(&cycle);
        for (row, x) in u.iter_mut().zip(c.0) {
            row[k] = x;
        }
    }
    u
}

pub fn apply_basis(u: &[Vec<i64>], c: &ClassVector) -> ClassVector {
    ClassVector(u.iter().map(|row| row.iter().zip(c.iter()).map(|(a, b)| a * b).sum()).collect())
}

/// Exact determinant of a small integer matrix (Bareiss elimination).
pub fn integer_determinant(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    if n == 0 {
        1
    } else {
        sign * a[n - 1][n - 1]
    }
}

/// Positive rational lengths come out of [`Surd::parse_rational`]; this is
/// the shortest-decimal reading of a float for convenience constructors.
pub fn length_from_f64(x: f64) -> Surd {
    let q = Surd::parse_rational(&format!("{x}")).expect("finite float prints as a decimal");
    Surd::from_rational(q)
}

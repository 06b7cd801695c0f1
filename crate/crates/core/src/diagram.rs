//! Splice diagrams and their weight combinatorics.
//!
//! A [`SpliceDiagram`] is a finite tree without valency-2 vertices whose
//! nodes carry a positive integer weight at every incident edge end. Leaves
//! are numbered `0..n` in declaration order (this order fixes the coordinates
//! of every vector downstream); nodes follow as `n..n+k`.
//!
//! Raw, possibly invalid input lives in [`DiagramSpec`]; [`validate`] reports
//! every violated invariant and [`SpliceDiagram::new`] refuses invalid specs.
//! Once constructed, a diagram precomputes its linking numbers, so every
//! query below is a table lookup.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a vertex: leaves come first, then nodes.
pub type VertexId = usize;

/// One edge of a raw diagram description. `wa`/`wb` are the weights at the
/// `a`/`b` ends and must be present exactly when that end is a node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub a: String,
    pub b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wa: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wb: Option<u64>,
}

impl EdgeSpec {
    pub fn new(a: &str, b: &str, wa: Option<u64>, wb: Option<u64>) -> Self {
        EdgeSpec { a: a.to_string(), b: b.to_string(), wa, wb }
    }
}

/// Raw diagram data, exactly as it appears in a diagram document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramSpec {
    pub leaves: Vec<String>,
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeSpec>,
}

/// A failed structural invariant of a splice diagram.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Violation {
    DuplicateLabel(String),
    UnknownVertex(String),
    SelfLoop(String),
    DuplicateEdge(String, String),
    NotConnected,
    NotAcyclic,
    NoValencyTwo(String),
    NodeValency(String),
    LeafValency(String),
    AtLeastOneNode,
    MissingWeight { node: String, edge: (String, String) },
    UnexpectedWeight { leaf: String, edge: (String, String) },
    ZeroWeight { node: String, edge: (String, String) },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateLabel(l) => write!(f, "duplicate vertex label {l}"),
            Violation::UnknownVertex(l) => write!(f, "edge mentions unknown vertex {l}"),
            Violation::SelfLoop(l) => write!(f, "self loop at {l}"),
            Violation::DuplicateEdge(a, b) => write!(f, "duplicate edge {a}-{b}"),
            Violation::NotConnected => write!(f, "graph is not connected"),
            Violation::NotAcyclic => write!(f, "graph contains a cycle"),
            Violation::NoValencyTwo(l) => write!(f, "vertex {l} has valency 2"),
            Violation::NodeValency(l) => write!(f, "node {l} has valency below 3"),
            Violation::LeafValency(l) => write!(f, "leaf {l} does not have valency 1"),
            Violation::AtLeastOneNode => write!(f, "diagram has no node"),
            Violation::MissingWeight { node, edge } => {
                write!(f, "missing weight at node {node} on edge {}-{}", edge.0, edge.1)
            }
            Violation::UnexpectedWeight { leaf, edge } => {
                write!(f, "leaf {leaf} carries a weight on edge {}-{}", edge.0, edge.1)
            }
            Violation::ZeroWeight { node, edge } => {
                write!(f, "zero weight at node {node} on edge {}-{}", edge.0, edge.1)
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("invalid splice diagram: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("vertex index {0} out of range")]
    VertexOutOfRange(VertexId),
    #[error("edge {0}-{1} does not join two nodes")]
    EdgeNotInternal(String, String),
    #[error("{0} and {1} are not adjacent")]
    NotAnEdge(String, String),
    #[error("{0} is not a node")]
    NotANode(String),
    #[error("{0} is not a leaf")]
    NotALeaf(String),
    #[error("vertex set is not a subtree")]
    NotASubtree,
    #[error("{0} is not an end-node of the subtree")]
    NotAnEndNode(String),
    #[error("no diagram with these parameters found after {0} attempts")]
    GenerationExhausted(usize),
}

/// Checks every structural invariant of a raw diagram description.
///
/// Returns one record per failed invariant; an empty list means the spec can
/// be turned into a [`SpliceDiagram`].
pub fn validate(spec: &DiagramSpec) -> Vec<Violation> {
    let mut out = BTreeSet::new();
    let mut index: HashMap<&str, (usize, bool)> = HashMap::new();
    for (i, l) in spec.leaves.iter().enumerate() {
        if index.insert(l.as_str(), (i, false)).is_some() {
            out.insert(Violation::DuplicateLabel(l.clone()));
        }
    }
    for (i, l) in spec.nodes.iter().enumerate() {
        if index.insert(l.as_str(), (spec.leaves.len() + i, true)).is_some() {
            out.insert(Violation::DuplicateLabel(l.clone()));
        }
    }
    if spec.nodes.is_empty() {
        out.insert(Violation::AtLeastOneNode);
    }
    let nv = spec.leaves.len() + spec.nodes.len();
    let mut degree = vec![0usize; nv];
    let mut seen = BTreeSet::new();
    let mut uf: Vec<usize> = (0..nv).collect();
    fn find(uf: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while uf[r] != r {
            r = uf[r];
        }
        let mut y = x;
        while uf[y] != r {
            let next = uf[y];
            uf[y] = r;
            y = next;
        }
        r
    }
    let mut valid_edges = 0usize;
    for e in &spec.edges {
        let ea = index.get(e.a.as_str()).copied();
        let eb = index.get(e.b.as_str()).copied();
        if ea.is_none() {
            out.insert(Violation::UnknownVertex(e.a.clone()));
        }
        if eb.is_none() {
            out.insert(Violation::UnknownVertex(e.b.clone()));
        }
        let (Some((ia, na)), Some((ib, nb))) = (ea, eb) else { continue };
        let pair = (e.a.clone(), e.b.clone());
        for (is_node, w, label) in [(na, e.wa, &e.a), (nb, e.wb, &e.b)] {
            match (is_node, w) {
                (true, None) => {
                    out.insert(Violation::MissingWeight { node: label.clone(), edge: pair.clone() });
                }
                (true, Some(0)) => {
                    out.insert(Violation::ZeroWeight { node: label.clone(), edge: pair.clone() });
                }
                (false, Some(_)) => {
                    out.insert(Violation::UnexpectedWeight { leaf: label.clone(), edge: pair.clone() });
                }
                _ => {}
            }
        }
        if ia == ib {
            out.insert(Violation::SelfLoop(e.a.clone()));
            continue;
        }
        let key = (ia.min(ib), ia.max(ib));
        if !seen.insert(key) {
            out.insert(Violation::DuplicateEdge(e.a.clone(), e.b.clone()));
            continue;
        }
        degree[ia] += 1;
        degree[ib] += 1;
        valid_edges += 1;
        let (ra, rb) = (find(&mut uf, ia), find(&mut uf, ib));
        if ra == rb {
            out.insert(Violation::NotAcyclic);
        } else {
            uf[ra] = rb;
        }
    }
    if nv > 0 {
        let r0 = find(&mut uf, 0);
        if (1..nv).any(|x| find(&mut uf, x) != r0) {
            out.insert(Violation::NotConnected);
        }
    }
    let _ = valid_edges;
    for (i, l) in spec.leaves.iter().chain(&spec.nodes).enumerate() {
        let is_node = i >= spec.leaves.len();
        match degree[i] {
            2 => {
                out.insert(Violation::NoValencyTwo(l.clone()));
            }
            d if is_node && d < 3 => {
                out.insert(Violation::NodeValency(l.clone()));
            }
            d if !is_node && d != 1 => {
                out.insert(Violation::LeafValency(l.clone()));
            }
            _ => {}
        }
    }
    out.into_iter().collect()
}

/// Result of [`SpliceDiagram::check_conditions`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub edge_determinant: bool,
    pub semigroup: bool,
    pub coprime: bool,
}

impl ConditionReport {
    /// Edge determinant and semigroup conditions, the ones needed to build
    /// splice type systems.
    pub fn admissible(&self) -> bool {
        self.edge_determinant && self.semigroup
    }
}

/// A non-negative integer combination of reduced linking numbers realizing
/// the weight `d_{v,e}`; its support lies beyond `e`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AdmissibleCoweight {
    pub node: VertexId,
    /// Position of the edge in the node's adjacency list.
    pub edge: usize,
    /// One coefficient per leaf, zero outside `Δ(v,e)`.
    pub coeffs: Vec<u32>,
}

/// The vector `(ℓ_{vλ})_λ` attached to a node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeWeightVector {
    pub node: VertexId,
    pub entries: Vec<BigInt>,
}

impl NodeWeightVector {
    /// Pairing with an exponent vector.
    pub fn pair(&self, m: &[u32]) -> BigInt {
        self.entries.iter().zip(m).map(|(a, &b)| a * BigInt::from(b)).sum()
    }
}

/// A validated splice diagram with precomputed linking numbers.
#[derive(Clone, Debug)]
pub struct SpliceDiagram {
    labels: Vec<String>,
    n_leaves: usize,
    /// Per vertex, neighbors in declaration order with the weight at this end.
    adj: Vec<Vec<(VertexId, Option<u64>)>>,
    /// Edges as (a, b) in declaration order with original orientation.
    edges: Vec<(VertexId, VertexId)>,
    /// `next[s][t]`: adjacency position at `s` of the first step toward `t`.
    next: Vec<Vec<usize>>,
    link: Vec<Vec<BigInt>>,
    reduced: Vec<Vec<BigInt>>,
    index: HashMap<String, VertexId>,
}

impl PartialEq for SpliceDiagram {
    fn eq(&self, other: &Self) -> bool {
        self.to_spec() == other.to_spec()
    }
}

impl Eq for SpliceDiagram {}

impl SpliceDiagram {
    /// Validates and builds a diagram.
    pub fn new(spec: &DiagramSpec) -> Result<Self, DiagramError> {
        let violations = validate(spec);
        if !violations.is_empty() {
            return Err(DiagramError::Invalid(violations));
        }
        let n_leaves = spec.leaves.len();
        let labels: Vec<String> = spec.leaves.iter().chain(&spec.nodes).cloned().collect();
        let index: HashMap<String, VertexId> =
            labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        let nv = labels.len();
        let mut adj = vec![Vec::new(); nv];
        let mut edges = Vec::with_capacity(spec.edges.len());
        for e in &spec.edges {
            let a = index[&e.a];
            let b = index[&e.b];
            adj[a].push((b, e.wa));
            adj[b].push((a, e.wb));
            edges.push((a, b));
        }
        let mut d = SpliceDiagram {
            labels,
            n_leaves,
            adj,
            edges,
            next: Vec::new(),
            link: Vec::new(),
            reduced: Vec::new(),
            index,
        };
        d.precompute();
        Ok(d)
    }

    fn precompute(&mut self) {
        let nv = self.labels.len();
        self.next = vec![vec![usize::MAX; nv]; nv];
        self.link = vec![vec![BigInt::zero(); nv]; nv];
        self.reduced = vec![vec![BigInt::zero(); nv]; nv];
        for s in 0..nv {
            // BFS from s; for each vertex store parent and first step.
            let mut parent = vec![usize::MAX; nv];
            let mut first = vec![usize::MAX; nv];
            // acc: product of off-path weights at vertices strictly before t,
            // including s; acc_red: same without s's contribution.
            let mut acc = vec![BigInt::one(); nv];
            let mut acc_red = vec![BigInt::one(); nv];
            let mut queue = VecDeque::from([s]);
            parent[s] = s;
            while let Some(x) = queue.pop_front() {
                for (pos, &(y, _)) in self.adj[x].iter().enumerate() {
                    if parent[y] != usize::MAX {
                        continue;
                    }
                    parent[y] = x;
                    first[y] = if x == s { pos } else { first[x] };
                    let contrib = self.off_path_product(x, Some(parent[x]).filter(|&p| p != x), y);
                    acc[y] = &acc[x] * &contrib;
                    acc_red[y] = if x == s { BigInt::one() } else { &acc_red[x] * &contrib };
                    queue.push_back(y);
                }
            }
            for t in 0..nv {
                self.next[s][t] = first[t];
                if t == s {
                    self.link[s][t] = self.off_path_product(s, None, usize::MAX);
                    self.reduced[s][t] = BigInt::one();
                } else {
                    let end = self.off_path_product(t, Some(parent[t]), usize::MAX);
                    self.link[s][t] = &acc[t] * end;
                    self.reduced[s][t] = acc_red[t].clone();
                }
            }
        }
    }

    /// Product of weights at `x` on edges other than those toward `a` and `b`.
    fn off_path_product(&self, x: VertexId, a: Option<VertexId>, b: VertexId) -> BigInt {
        self.adj[x]
            .iter()
            .filter(|&&(y, _)| Some(y) != a && y != b)
            .filter_map(|&(_, w)| w)
            .map(BigInt::from)
            .product()
    }

    /// The raw description this diagram was built from.
    pub fn to_spec(&self) -> DiagramSpec {
        let edges = self
            .edges
            .iter()
            .map(|&(a, b)| EdgeSpec {
                a: self.labels[a].clone(),
                b: self.labels[b].clone(),
                wa: self.weight_toward(a, b),
                wb: self.weight_toward(b, a),
            })
            .collect();
        DiagramSpec {
            leaves: self.labels[..self.n_leaves].to_vec(),
            nodes: self.labels[self.n_leaves..].to_vec(),
            edges,
        }
    }

    /// Number of leaves `n`.
    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn n_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn leaves(&self) -> std::ops::Range<VertexId> {
        0..self.n_leaves
    }

    pub fn nodes(&self) -> std::ops::Range<VertexId> {
        self.n_leaves..self.labels.len()
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        v < self.n_leaves
    }

    pub fn is_node(&self, v: VertexId) -> bool {
        v >= self.n_leaves && v < self.labels.len()
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Looks a vertex up by label.
    pub fn vertex(&self, label: &str) -> Result<VertexId, DiagramError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| DiagramError::UnknownVertex(label.to_string()))
    }

    pub fn node(&self, label: &str) -> Result<VertexId, DiagramError> {
        let v = self.vertex(label)?;
        if self.is_node(v) {
            Ok(v)
        } else {
            Err(DiagramError::NotANode(label.to_string()))
        }
    }

    pub fn leaf(&self, label: &str) -> Result<VertexId, DiagramError> {
        let v = self.vertex(label)?;
        if self.is_leaf(v) {
            Ok(v)
        } else {
            Err(DiagramError::NotALeaf(label.to_string()))
        }
    }

    /// Edges in declaration order.
    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    /// Neighbors of `v` in adjacency order.
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adj[v].iter().map(|&(y, _)| y)
    }

    pub fn valency(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    /// Weight `d_{v,e}` at node `v` of its `pos`-th incident edge.
    pub fn weight(&self, v: VertexId, pos: usize) -> u64 {
        self.adj[v][pos].1.expect("weights live at node ends")
    }

    /// Weight at `v` of the edge toward its neighbor `u`, if `v` is a node.
    pub fn weight_toward(&self, v: VertexId, u: VertexId) -> Option<u64> {
        self.adj[v].iter().find(|&&(y, _)| y == u).and_then(|&(_, w)| w)
    }

    /// Adjacency position at `v` of the edge on the geodesic toward `t != v`.
    pub fn toward(&self, v: VertexId, t: VertexId) -> usize {
        self.next[v][t]
    }

    /// Neighbor of `v` reached through adjacency position `pos`.
    pub fn neighbor(&self, v: VertexId, pos: usize) -> VertexId {
        self.adj[v][pos].0
    }

    /// Total weight `d_v`.
    pub fn total_weight(&self, v: VertexId) -> BigInt {
        self.link[v][v].clone()
    }

    /// Linking number `ℓ_{uv}`.
    pub fn linking_number(&self, u: VertexId, v: VertexId) -> BigInt {
        self.link[u][v].clone()
    }

    pub fn linking_ref(&self, u: VertexId, v: VertexId) -> &BigInt {
        &self.link[u][v]
    }

    /// Reduced linking number `ℓ'_{uv}`.
    pub fn reduced_linking_number(&self, u: VertexId, v: VertexId) -> BigInt {
        self.reduced[u][v].clone()
    }

    /// Checked variant of [`Self::linking_number`] taking labels.
    pub fn linking_by_label(&self, u: &str, v: &str) -> Result<BigInt, DiagramError> {
        Ok(self.linking_number(self.vertex(u)?, self.vertex(v)?))
    }

    /// `d_{u,v} d_{v,u} - ℓ_{uv}` for an edge joining two nodes.
    pub fn edge_determinant(&self, u: VertexId, v: VertexId) -> Result<BigInt, DiagramError> {
        if !self.is_node(u) || !self.is_node(v) {
            return Err(DiagramError::EdgeNotInternal(
                self.labels[u].clone(),
                self.labels[v].clone(),
            ));
        }
        let (Some(a), Some(b)) = (self.weight_toward(u, v), self.weight_toward(v, u)) else {
            return Err(DiagramError::NotAnEdge(self.labels[u].clone(), self.labels[v].clone()));
        };
        Ok(BigInt::from(a) * BigInt::from(b) - self.linking_number(u, v))
    }

    /// Internal edges (both ends nodes), in declaration order.
    pub fn internal_edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.edges.iter().copied().filter(|&(a, b)| self.is_node(a) && self.is_node(b))
    }

    /// Leaves beyond the `pos`-th edge at `v`: `Δ(v,e)`, in leaf order.
    pub fn leaves_beyond(&self, v: VertexId, pos: usize) -> Vec<VertexId> {
        self.leaves().filter(|&l| l != v && self.next[v][l] == pos).collect()
    }

    /// Lex-smallest admissible co-weight for `(v, e)`, if one exists.
    pub fn semigroup_decompose(&self, v: VertexId, pos: usize) -> Option<AdmissibleCoweight> {
        let target = self.weight(v, pos);
        let support = self.leaves_beyond(v, pos);
        let gens: Vec<u64> = support
            .iter()
            .map(|&l| self.reduced[v][l].to_u64().unwrap_or(u64::MAX))
            .collect();
        let sol = lex_smallest_representation(target, &gens)?;
        let mut coeffs = vec![0u32; self.n_leaves];
        for (&l, c) in support.iter().zip(sol) {
            coeffs[l] = c;
        }
        Some(AdmissibleCoweight { node: v, edge: pos, coeffs })
    }

    /// Evaluates the edge determinant, semigroup and coprimality conditions.
    pub fn check_conditions(&self) -> ConditionReport {
        let edge_determinant = self
            .internal_edges()
            .all(|(a, b)| self.edge_determinant(a, b).map(|d| d.is_positive()).unwrap_or(false));
        let semigroup = self
            .nodes()
            .all(|v| (0..self.valency(v)).all(|p| self.semigroup_decompose(v, p).is_some()));
        let coprime = self.nodes().all(|v| {
            let ws: Vec<u64> = (0..self.valency(v)).map(|p| self.weight(v, p)).collect();
            ws.iter()
                .enumerate()
                .all(|(i, a)| ws[i + 1..].iter().all(|b| a.gcd(b) == 1))
        });
        ConditionReport { edge_determinant, semigroup, coprime }
    }

    /// `w_v = (ℓ_{vλ})_λ`.
    pub fn node_weight_vector(&self, v: VertexId) -> NodeWeightVector {
        NodeWeightVector {
            node: v,
            entries: self.leaves().map(|l| self.link[v][l].clone()).collect(),
        }
    }

    /// Vertices of the geodesic from `u` to `v`, inclusive.
    pub fn geodesic(&self, u: VertexId, v: VertexId) -> Vec<VertexId> {
        let mut path = vec![u];
        let mut x = u;
        while x != v {
            x = self.adj[x][self.next[x][v]].0;
            path.push(x);
        }
        path
    }

    /// True when `x` lies on the geodesic `[u, v]`.
    pub fn on_geodesic(&self, x: VertexId, u: VertexId, v: VertexId) -> bool {
        if x == u || x == v {
            return true;
        }
        self.next[x][u] != self.next[x][v]
    }

    /// The branches at `v`: vertex sets of the components of the tree with
    /// `v` removed, one per incident edge in adjacency order.
    pub fn branches(&self, v: VertexId) -> Vec<Vec<VertexId>> {
        (0..self.valency(v))
            .map(|pos| {
                (0..self.n_vertices())
                    .filter(|&x| x != v && self.next[v][x] == pos)
                    .collect()
            })
            .collect()
    }

    fn subtree_degrees(&self, t: &BTreeSet<VertexId>) -> Result<HashMap<VertexId, usize>, DiagramError> {
        if t.is_empty() || t.iter().any(|&x| x >= self.n_vertices()) {
            return Err(DiagramError::NotASubtree);
        }
        let deg: HashMap<VertexId, usize> = t
            .iter()
            .map(|&x| (x, self.neighbors(x).filter(|y| t.contains(y)).count()))
            .collect();
        let edges: usize = deg.values().sum::<usize>() / 2;
        // A forest on |t| vertices is connected iff it has |t|-1 edges.
        if edges + 1 != t.len() {
            return Err(DiagramError::NotASubtree);
        }
        Ok(deg)
    }

    /// Star-full: every vertex interior to the subtree has its whole star in it.
    pub fn is_star_full(&self, t: &BTreeSet<VertexId>) -> Result<bool, DiagramError> {
        let deg = self.subtree_degrees(t)?;
        Ok(t.iter()
            .filter(|x| deg[x] >= 2)
            .all(|&x| self.neighbors(x).all(|y| t.contains(&y))))
    }

    /// Leaves of a subtree (its vertices of subtree-valency at most one).
    pub fn subtree_leaves(&self, t: &BTreeSet<VertexId>) -> Result<Vec<VertexId>, DiagramError> {
        let deg = self.subtree_degrees(t)?;
        Ok(t.iter().copied().filter(|x| deg[x] <= 1).collect())
    }

    /// Prunes a star-full subtree at an end-node `v`: removes the subtree
    /// leaves adjacent to `v`, which becomes a leaf of the result.
    pub fn prune_end_node(
        &self,
        t: &BTreeSet<VertexId>,
        v: VertexId,
    ) -> Result<BTreeSet<VertexId>, DiagramError> {
        let deg = self.subtree_degrees(t)?;
        let interior = |x: &VertexId| deg.get(x).is_some_and(|&d| d >= 2);
        let not_end = || DiagramError::NotAnEndNode(self.labels[v].clone());
        if !interior(&v) || !self.is_star_full(t)? {
            return Err(not_end());
        }
        let inner: Vec<VertexId> = self.neighbors(v).filter(|y| interior(y)).collect();
        if inner.len() != 1 {
            return Err(not_end());
        }
        let mut out = t.clone();
        for y in self.neighbors(v) {
            if !interior(&y) {
                out.remove(&y);
            }
        }
        Ok(out)
    }
}

/// Lex-smallest non-negative solution of `target = Σ c_i g_i` by bounded
/// exhaustive search; each `c_i ≤ target / g_i`.
fn lex_smallest_representation(target: u64, gens: &[u64]) -> Option<Vec<u32>> {
    // reach[i][r]: can r be written with gens[i..]?
    let t = target as usize;
    let k = gens.len();
    let mut reach = vec![vec![false; t + 1]; k + 1];
    reach[k][0] = true;
    for i in (0..k).rev() {
        let g = gens[i] as usize;
        for r in 0..=t {
            reach[i][r] = reach[i + 1][r] || (g > 0 && r >= g && reach[i][r - g]);
        }
    }
    if !reach[0][t] {
        return None;
    }
    let mut rem = t;
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let g = gens[i];
        let mut c = 0u64;
        loop {
            let used = c.saturating_mul(g);
            if used <= rem as u64 && reach[i + 1][rem - used as usize] {
                break;
            }
            c += 1;
        }
        rem -= (c * g) as usize;
        out.push(c as u32);
    }
    Some(out)
}

/// The running example: two nodes `u`, `v`, five leaves.
pub fn example_d1() -> SpliceDiagram {
    let spec = DiagramSpec {
        leaves: ["l1", "l2", "l3", "l4", "l5"].map(String::from).to_vec(),
        nodes: vec!["u".into(), "v".into()],
        edges: vec![
            EdgeSpec::new("u", "l1", Some(2), None),
            EdgeSpec::new("u", "l2", Some(3), None),
            EdgeSpec::new("u", "v", Some(49), Some(11)),
            EdgeSpec::new("v", "l3", Some(7), None),
            EdgeSpec::new("v", "l4", Some(5), None),
            EdgeSpec::new("v", "l5", Some(2), None),
        ],
    };
    SpliceDiagram::new(&spec).expect("running example is valid")
}

/// A star with one node and the given leaf weights.
pub fn star(weights: &[u64]) -> Result<SpliceDiagram, DiagramError> {
    let leaves: Vec<String> = (1..=weights.len()).map(|i| format!("l{i}")).collect();
    let edges = leaves
        .iter()
        .zip(weights)
        .map(|(l, &w)| EdgeSpec::new("u", l, Some(w), None))
        .collect();
    SpliceDiagram::new(&DiagramSpec { leaves, nodes: vec!["u".into()], edges })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn running_example_numbers() {
        let d = example_d1();
        let u = d.node("u").unwrap();
        let v = d.node("v").unwrap();
        assert_eq!(d.total_weight(u), big(294));
        assert_eq!(d.total_weight(v), big(770));
        assert_eq!(d.linking_number(u, v), big(420));
        assert_eq!(d.linking_number(u, 0), big(147));
        assert_eq!(d.edge_determinant(u, v).unwrap(), big(119));
        let wu: Vec<i64> = d.node_weight_vector(u).entries.iter().map(|x| x.to_i64().unwrap()).collect();
        let wv: Vec<i64> = d.node_weight_vector(v).entries.iter().map(|x| x.to_i64().unwrap()).collect();
        assert_eq!(wu, vec![147, 98, 60, 84, 210]);
        assert_eq!(wv, vec![210, 140, 110, 154, 385]);
    }

    #[test]
    fn reduced_linking_numbers() {
        let d = example_d1();
        let u = d.node("u").unwrap();
        let v = d.node("v").unwrap();
        let r: Vec<BigInt> = (2..5).map(|l| d.reduced_linking_number(u, l)).collect();
        assert_eq!(r, vec![big(10), big(14), big(35)]);
        assert_eq!(d.reduced_linking_number(v, 0), big(3));
        assert_eq!(d.reduced_linking_number(v, 1), big(2));
        assert_eq!(d.reduced_linking_number(v, v), big(1));
    }

    #[test]
    fn semigroup_decompositions() {
        let d = example_d1();
        let u = d.node("u").unwrap();
        let v = d.node("v").unwrap();
        let a = d.semigroup_decompose(u, d.toward(u, v)).unwrap();
        assert_eq!(a.coeffs, vec![0, 0, 0, 1, 1]);
        let b = d.semigroup_decompose(v, d.toward(v, u)).unwrap();
        assert_eq!(b.coeffs, vec![1, 4, 0, 0, 0]);
        let c = d.semigroup_decompose(v, d.toward(v, 2)).unwrap();
        assert_eq!(c.coeffs, vec![0, 0, 7, 0, 0]);
        assert_eq!(lex_smallest_representation(1, &[2, 3]), None);
        assert_eq!(lex_smallest_representation(11, &[3, 2]), Some(vec![1, 4]));
    }

    #[test]
    fn conditions() {
        assert_eq!(
            example_d1().check_conditions(),
            ConditionReport { edge_determinant: true, semigroup: true, coprime: true }
        );
        let s = star(&[2, 4, 3]).unwrap();
        assert_eq!(
            s.check_conditions(),
            ConditionReport { edge_determinant: true, semigroup: true, coprime: false }
        );
        let spec = DiagramSpec {
            leaves: ["a", "b", "c", "d"].map(String::from).to_vec(),
            nodes: vec!["x".into(), "y".into()],
            edges: vec![
                EdgeSpec::new("x", "a", Some(2), None),
                EdgeSpec::new("x", "b", Some(3), None),
                EdgeSpec::new("x", "y", Some(1), Some(1)),
                EdgeSpec::new("y", "c", Some(2), None),
                EdgeSpec::new("y", "d", Some(3), None),
            ],
        };
        let bad = SpliceDiagram::new(&spec).unwrap();
        assert_eq!(bad.edge_determinant(4, 5).unwrap(), big(-35));
        assert!(!bad.check_conditions().edge_determinant);
        assert!(matches!(s.edge_determinant(0, 3), Err(DiagramError::EdgeNotInternal(..))));
    }

    #[test]
    fn validation_reports() {
        let path = DiagramSpec {
            leaves: vec!["a".into(), "b".into()],
            nodes: vec!["x".into()],
            edges: vec![EdgeSpec::new("a", "x", None, Some(1)), EdgeSpec::new("x", "b", Some(1), None)],
        };
        assert_eq!(validate(&path), vec![Violation::NoValencyTwo("x".into())]);
        let edge = DiagramSpec {
            leaves: vec!["a".into(), "b".into()],
            nodes: vec![],
            edges: vec![EdgeSpec::new("a", "b", None, None)],
        };
        assert_eq!(validate(&edge), vec![Violation::AtLeastOneNode]);
        assert!(validate(&example_d1().to_spec()).is_empty());
    }

    #[test]
    fn geodesics_and_branches() {
        let d = example_d1();
        let names = |p: Vec<VertexId>| p.into_iter().map(|x| d.label(x).to_string()).collect::<Vec<_>>();
        assert_eq!(names(d.geodesic(0, 4)), vec!["l1", "u", "v", "l5"]);
        let u = d.node("u").unwrap();
        let br = d.branches(u);
        assert_eq!(br.len(), 3);
        assert_eq!(br[0], vec![0]);
        assert_eq!(br[1], vec![1]);
        assert_eq!(names(br[2].clone()), vec!["l3", "l4", "l5", "v"]);
    }

    #[test]
    fn pruning() {
        let d = example_d1();
        let all: BTreeSet<VertexId> = (0..d.n_vertices()).collect();
        assert!(d.is_star_full(&all).unwrap());
        let u = d.node("u").unwrap();
        let pruned = d.prune_end_node(&all, u).unwrap();
        let expect: BTreeSet<VertexId> = [2, 3, 4, u, d.node("v").unwrap()].into_iter().collect();
        assert_eq!(pruned, expect);
        assert!(d.is_star_full(&pruned).unwrap());
        assert_eq!(d.subtree_leaves(&pruned).unwrap(), vec![2, 3, 4, u]);
        assert!(d.prune_end_node(&pruned, d.node("v").unwrap()).is_err());
    }

    #[test]
    fn star_linking() {
        let s = star(&[2, 3, 5]).unwrap();
        let w: Vec<BigInt> = s.node_weight_vector(3).entries;
        assert_eq!(w, vec![big(15), big(10), big(6)]);
    }
}

//! Splice type systems: per-node families of `δ_v − 2` equations built from
//! admissible monomials, with coefficient matrices satisfying the Hamm
//! determinant conditions and optional polynomial tails.
//!
//! Equation indices are zero-based in the API and one-based in documents.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use crate::poly::{ExponentVector, Polynomial, WeightVector};

use crate::arith::det_rational;
use crate::diagram::{AdmissibleCoweight, ConditionReport, DiagramError, SpliceDiagram, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("diagram fails its conditions: {0:?}")]
    ConditionViolation(ConditionReport),
    #[error("no admissible co-weight at node {node} for edge {edge}")]
    SemigroupFailure { node: String, edge: usize },
    #[error("coefficient matrix at node {node} has shape {rows}x{cols}, expected {exp_rows}x{exp_cols}")]
    Shape { node: String, rows: usize, cols: usize, exp_rows: usize, exp_cols: usize },
    #[error("coefficient matrix at node {0} violates the Hamm determinant conditions")]
    HammViolation(String),
    #[error("tail of equation {index} at node {node} violates the tail conditions")]
    TailViolation { node: String, index: usize },
    #[error("no equation {index} at node {node}")]
    NoSuchEquation { node: String, index: usize },
    #[error("co-weight at node {node} for edge {edge} is not admissible")]
    BadCoweight { node: String, edge: usize },
}

/// Coefficients `c_{v,e,i}`: one row per incident edge (adjacency order), one
/// column per equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientMatrix {
    pub node: VertexId,
    pub rows: Vec<Vec<BigRational>>,
}

impl CoefficientMatrix {
    pub fn from_i64(node: VertexId, rows: &[&[i64]]) -> Self {
        CoefficientMatrix {
            node,
            rows: rows
                .iter()
                .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
                .collect(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Column `i` as a vector indexed by edge.
    pub fn column(&self, i: usize) -> Vec<BigRational> {
        self.rows.iter().map(|r| r[i].clone()).collect()
    }
}

/// Vandermonde coefficients `c_{j,i} = j^{i-1}`.
pub fn default_coefficients(diagram: &SpliceDiagram, v: VertexId) -> CoefficientMatrix {
    let delta = diagram.valency(v);
    let rows = (1..=delta)
        .map(|j| {
            (0..delta - 2)
                .map(|i| BigRational::from_integer(num_traits::pow(BigInt::from(j), i)))
                .collect()
        })
        .collect();
    CoefficientMatrix { node: v, rows }
}

/// True iff every maximal minor (choice of `δ − 2` rows) is nonzero.
pub fn check_hamm(m: &CoefficientMatrix) -> Result<bool, SystemError> {
    let rows = m.n_rows();
    let cols = m.n_cols();
    if rows < 3 || m.rows.iter().any(|r| r.len() != rows - 2) {
        return Err(SystemError::Shape {
            node: m.node.to_string(),
            rows,
            cols,
            exp_rows: rows.max(3),
            exp_cols: rows.max(3) - 2,
        });
    }
    Ok((0..rows).combinations(cols).all(|sel| {
        let sub: Vec<Vec<BigRational>> = sel.iter().map(|&r| m.rows[r].clone()).collect();
        !det_rational(&sub).is_zero()
    }))
}

/// Tail conditions: every exponent `m` has `w_v·m > d_v` and
/// `w_u·m > ℓ_{uv}` for all nodes `u ≠ v`.
pub fn validate_tail(diagram: &SpliceDiagram, v: VertexId, tail: &Polynomial) -> bool {
    let vectors: Vec<(Vec<BigInt>, BigInt)> = diagram
        .nodes()
        .map(|u| (diagram.node_weight_vector(u).entries, diagram.linking_number(u, v)))
        .collect();
    tail.monomials()
        .all(|m| vectors.iter().all(|(w, bound)| &m.pair_int(w) > bound))
}

/// The equations attached to one node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeFamily {
    pub node: VertexId,
    /// One admissible co-weight per incident edge, in adjacency order.
    pub coweights: Vec<AdmissibleCoweight>,
    pub coefficients: CoefficientMatrix,
    /// One tail per equation (possibly zero).
    pub tails: Vec<Polynomial>,
}

impl NodeFamily {
    pub fn n_equations(&self) -> usize {
        self.coefficients.n_cols()
    }

    pub fn monomial(&self, pos: usize) -> ExponentVector {
        ExponentVector(self.coweights[pos].coeffs.clone())
    }

    /// `f_{v,i} = Σ_e c_{v,e,i} z^{a_{v,e}}`.
    pub fn minimal(&self, i: usize) -> Polynomial {
        let n = self.coweights[0].coeffs.len();
        Polynomial::new(
            n,
            self.coefficients
                .rows
                .iter()
                .enumerate()
                .map(|(pos, r)| (r[i].clone(), self.monomial(pos))),
        )
    }

    /// `F_{v,i} = f_{v,i} + g_{v,i}`.
    pub fn equation(&self, i: usize) -> Polynomial {
        self.minimal(i).add(&self.tails[i])
    }
}

/// A splice type system on a diagram.
#[derive(Clone, Debug)]
pub struct SpliceSystem {
    diagram: SpliceDiagram,
    families: Vec<NodeFamily>,
}

/// One equation with its position in the canonical ordering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub node: VertexId,
    pub index: usize,
    pub minimal: Polynomial,
    pub tail: Polynomial,
}

impl Equation {
    pub fn full(&self) -> Polynomial {
        self.minimal.add(&self.tail)
    }
}

impl SpliceSystem {
    pub fn diagram(&self) -> &SpliceDiagram {
        &self.diagram
    }

    pub fn families(&self) -> &[NodeFamily] {
        &self.families
    }

    pub fn family(&self, v: VertexId) -> &NodeFamily {
        &self.families[v - self.diagram.n_leaves()]
    }

    pub fn n_vars(&self) -> usize {
        self.diagram.n_leaves()
    }

    /// True when every tail is zero.
    pub fn is_minimal(&self) -> bool {
        self.families.iter().all(|f| f.tails.iter().all(Polynomial::is_zero))
    }

    /// All equations ordered by node declaration order, then index.
    pub fn equations(&self) -> Vec<Equation> {
        self.families
            .iter()
            .flat_map(|f| {
                (0..f.n_equations()).map(move |i| Equation {
                    node: f.node,
                    index: i,
                    minimal: f.minimal(i),
                    tail: f.tails[i].clone(),
                })
            })
            .collect()
    }

    /// The full equations `F_{v,i}` in canonical order.
    pub fn polynomials(&self) -> Vec<Polynomial> {
        self.equations().iter().map(Equation::full).collect()
    }

    pub fn equation(&self, v: VertexId, i: usize) -> Result<Polynomial, SystemError> {
        let f = self.family(v);
        if i >= f.n_equations() {
            return Err(SystemError::NoSuchEquation { node: self.diagram.label(v).into(), index: i });
        }
        Ok(f.equation(i))
    }

    /// Admissible monomial exponent `a_{v,e}` for the `pos`-th edge at `v`.
    pub fn admissible_monomial(&self, v: VertexId, pos: usize) -> ExponentVector {
        self.family(v).monomial(pos)
    }
}

/// Incremental construction of a [`SpliceSystem`].
#[derive(Clone, Debug)]
pub struct SystemBuilder<'a> {
    diagram: &'a SpliceDiagram,
    coefficients: BTreeMap<VertexId, CoefficientMatrix>,
    tails: BTreeMap<(VertexId, usize), Polynomial>,
    coweights: BTreeMap<(VertexId, usize), Vec<u32>>,
    check_hamm: bool,
}

impl<'a> SystemBuilder<'a> {
    pub fn new(diagram: &'a SpliceDiagram) -> Self {
        SystemBuilder {
            diagram,
            coefficients: BTreeMap::new(),
            tails: BTreeMap::new(),
            coweights: BTreeMap::new(),
            check_hamm: true,
        }
    }

    /// Replaces the default coefficients at one node.
    pub fn coefficients(mut self, m: CoefficientMatrix) -> Self {
        self.coefficients.insert(m.node, m);
        self
    }

    pub fn tail(mut self, v: VertexId, i: usize, tail: Polynomial) -> Self {
        self.tails.insert((v, i), tail);
        self
    }

    /// Replaces the lex-smallest co-weight for `(v, pos)` by another
    /// admissible one.
    pub fn coweight(mut self, v: VertexId, pos: usize, coeffs: Vec<u32>) -> Self {
        self.coweights.insert((v, pos), coeffs);
        self
    }

    /// Skips the Hamm check. Only useful for building deliberately degenerate
    /// systems in tests of the numeric smoke checks.
    pub fn without_hamm_check(mut self) -> Self {
        self.check_hamm = false;
        self
    }

    pub fn build(self) -> Result<SpliceSystem, SystemError> {
        let d = self.diagram;
        let report = d.check_conditions();
        if !report.edge_determinant {
            return Err(SystemError::ConditionViolation(report));
        }
        let n = d.n_leaves();
        let mut families = Vec::new();
        for v in d.nodes() {
            let label = || d.label(v).to_string();
            let delta = d.valency(v);
            let mut coweights = Vec::with_capacity(delta);
            for pos in 0..delta {
                let cw = match self.coweights.get(&(v, pos)) {
                    Some(c) => {
                        let cw = AdmissibleCoweight { node: v, edge: pos, coeffs: c.clone() };
                        if !is_admissible(d, &cw) {
                            return Err(SystemError::BadCoweight { node: label(), edge: pos });
                        }
                        cw
                    }
                    None => d
                        .semigroup_decompose(v, pos)
                        .ok_or(SystemError::SemigroupFailure { node: label(), edge: pos })?,
                };
                coweights.push(cw);
            }
            let coefficients =
                self.coefficients.get(&v).cloned().unwrap_or_else(|| default_coefficients(d, v));
            if coefficients.n_rows() != delta || coefficients.rows.iter().any(|r| r.len() != delta - 2) {
                return Err(SystemError::Shape {
                    node: label(),
                    rows: coefficients.n_rows(),
                    cols: coefficients.n_cols(),
                    exp_rows: delta,
                    exp_cols: delta - 2,
                });
            }
            if self.check_hamm && !check_hamm(&coefficients)? {
                return Err(SystemError::HammViolation(label()));
            }
            let mut tails = Vec::with_capacity(delta - 2);
            for i in 0..delta - 2 {
                let t = self.tails.get(&(v, i)).cloned().unwrap_or_else(|| Polynomial::zero(n));
                if t.n_vars() != n || !validate_tail(d, v, &t) {
                    return Err(SystemError::TailViolation { node: label(), index: i });
                }
                tails.push(t);
            }
            families.push(NodeFamily { node: v, coweights, coefficients, tails });
        }
        for &(v, i) in self.tails.keys() {
            if !d.is_node(v) || i + 2 >= d.valency(v) {
                return Err(SystemError::NoSuchEquation { node: d.label(v).into(), index: i });
            }
        }
        Ok(SpliceSystem { diagram: d.clone(), families })
    }
}

/// Checks support and the defining identity of a co-weight.
pub fn is_admissible(d: &SpliceDiagram, cw: &AdmissibleCoweight) -> bool {
    if cw.coeffs.len() != d.n_leaves() || !d.is_node(cw.node) || cw.edge >= d.valency(cw.node) {
        return false;
    }
    let beyond: BTreeSet<VertexId> = d.leaves_beyond(cw.node, cw.edge).into_iter().collect();
    let support_ok = cw.coeffs.iter().enumerate().all(|(l, &c)| c == 0 || beyond.contains(&l));
    let w = d.node_weight_vector(cw.node);
    support_ok && w.pair(&cw.coeffs) == d.total_weight(cw.node)
}

/// Builds a system from per-node coefficients and tails `(node, index, tail)`.
pub fn build_system(
    diagram: &SpliceDiagram,
    coeffs: &[CoefficientMatrix],
    tails: &[(VertexId, usize, Polynomial)],
) -> Result<SpliceSystem, SystemError> {
    let mut b = SystemBuilder::new(diagram);
    for c in coeffs {
        b = b.coefficients(c.clone());
    }
    for (v, i, t) in tails {
        b = b.tail(*v, *i, t.clone());
    }
    b.build()
}

/// Attempts per node before [`random_system`] reports a Hamm violation.
pub const HAMM_RETRY_CAP: usize = 1_000;

/// A system whose coefficients are drawn uniformly from `-9..=9`, redrawn at
/// each node until the Hamm condition holds. Deterministic in `seed`.
pub fn random_system(diagram: &SpliceDiagram, seed: u64) -> Result<SpliceSystem, SystemError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut builder = SystemBuilder::new(diagram);
    for v in diagram.nodes() {
        let delta = diagram.valency(v);
        let mut found = None;
        for _ in 0..HAMM_RETRY_CAP {
            let rows = (0..delta)
                .map(|_| (0..delta - 2).map(|_| BigRational::from_integer(rng.gen_range(-9..=9).into())).collect())
                .collect();
            let m = CoefficientMatrix { node: v, rows };
            if check_hamm(&m)? {
                found = Some(m);
                break;
            }
        }
        let m = found.ok_or_else(|| SystemError::HammViolation(diagram.label(v).to_string()))?;
        builder = builder.coefficients(m);
    }
    builder.build()
}

/// The minimal system with default (Vandermonde) coefficients.
pub fn minimal_system(diagram: &SpliceDiagram) -> Result<SpliceSystem, SystemError> {
    SystemBuilder::new(diagram).build()
}

/// `in_{w_u}(f_{v,i})` as predicted from the tree: `f_{v,i}` itself when
/// `u = v`, otherwise `f_{v,i}` without the term of the edge toward `u`.
pub fn predicted_initial_form(system: &SpliceSystem, v: VertexId, i: usize, u: VertexId) -> Polynomial {
    let fam = system.family(v);
    let f = fam.minimal(i);
    if u == v {
        return f;
    }
    let pos = system.diagram().toward(v, u);
    let c = fam.coefficients.rows[pos][i].clone();
    f.sub(&Polynomial::monomial(c, fam.monomial(pos)))
}

/// The paper's coefficient choice for the running example: column `(1,−2,1)`
/// at `u` and rows `[1,33],[1,1],[1,2],[−2155,−2123]` at `v`.
pub fn example_d1_system(diagram: &SpliceDiagram) -> Result<SpliceSystem, SystemError> {
    let u = diagram.node("u")?;
    let v = diagram.node("v")?;
    build_system(
        diagram,
        &[
            CoefficientMatrix::from_i64(u, &[&[1], &[-2], &[1]]),
            CoefficientMatrix::from_i64(v, &[&[1, 33], &[1, 1], &[1, 2], &[-2155, -2123]]),
        ],
        &[],
    )
}

/// Unit row used by tests and documents: all-ones coefficients for a star.
pub fn unit_coefficients(node: VertexId, delta: usize) -> CoefficientMatrix {
    CoefficientMatrix { node, rows: vec![vec![BigRational::one(); delta - 2]; delta] }
}

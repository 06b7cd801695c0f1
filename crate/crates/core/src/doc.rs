//! JSON documents for diagrams, systems, fans, membership answers and
//! end-curves.
//!
//! Integers are written as JSON numbers while they are exactly representable
//! in a double (`|x| ≤ 2^53`) and as decimal strings beyond that. Rationals
//! are always strings, `"p/q"` or `"p"`. Readers accept both forms for every
//! number. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, DeserializeOwned, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::arith::rational_to_f64;
use crate::diagram::{DiagramError, DiagramSpec, SpliceDiagram};
use crate::endcurve::{BinomialSystem, MonomialCurve};
use crate::fan::{Certificate, CellLocation, Cone2, Ray, SpliceFan};
use crate::poly::{format_rational, parse_rational, ExponentVector, Polynomial};
use crate::system::{CoefficientMatrix, SpliceSystem, SystemBuilder, SystemError};

#[derive(Debug, Error)]
pub enum DocError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("{0}")]
    Shape(String),
}

const SAFE_INT: i64 = 1 << 53;

/// An arbitrary precision integer in JSON.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JsonInt(pub BigInt);

impl Serialize for JsonInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(x) if x.abs() <= SAFE_INT => s.serialize_i64(x),
            _ => s.serialize_str(&self.0.to_string()),
        }
    }
}

struct IntVisitor;

impl<'de> Visitor<'de> for IntVisitor {
    type Value = JsonInt;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a decimal string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<JsonInt, E> {
        Ok(JsonInt(v.into()))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<JsonInt, E> {
        Ok(JsonInt(v.into()))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<JsonInt, E> {
        v.trim().parse().map(JsonInt).map_err(|_| E::custom(format!("not an integer: {v:?}")))
    }
}

impl<'de> Deserialize<'de> for JsonInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(IntVisitor)
    }
}

/// A rational number in JSON.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JsonRational(pub BigRational);

impl Serialize for JsonRational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

struct RationalVisitor;

impl<'de> Visitor<'de> for RationalVisitor {
    type Value = JsonRational;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a string \"p/q\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<JsonRational, E> {
        Ok(JsonRational(BigRational::from_integer(v.into())))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<JsonRational, E> {
        Ok(JsonRational(BigRational::from_integer(v.into())))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<JsonRational, E> {
        parse_rational(v).map(JsonRational).map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for JsonRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(RationalVisitor)
    }
}

fn ints(v: &[BigInt]) -> Vec<JsonInt> {
    v.iter().cloned().map(JsonInt).collect()
}

fn rationals(v: &[BigRational]) -> Vec<JsonRational> {
    v.iter().cloned().map(JsonRational).collect()
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, DocError> {
    Ok(serde_json::from_str(text)?)
}

pub fn to_pretty<T: Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("documents serialize")
}

/// The diagram document is the raw [`DiagramSpec`].
pub type DiagramDoc = DiagramSpec;

pub fn diagram_from_doc(doc: &DiagramDoc) -> Result<SpliceDiagram, DocError> {
    Ok(SpliceDiagram::new(doc)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub c: JsonRational,
    pub m: Vec<u32>,
}

pub fn terms_doc(p: &Polynomial) -> Vec<TermDoc> {
    p.terms().iter().map(|(c, m)| TermDoc { c: JsonRational(c.clone()), m: m.0.clone() }).collect()
}

pub fn polynomial_from_terms(n: usize, terms: &[TermDoc]) -> Result<Polynomial, DocError> {
    if let Some(t) = terms.iter().find(|t| t.m.len() != n) {
        return Err(DocError::Shape(format!("exponent vector of length {}, expected {n}", t.m.len())));
    }
    Ok(Polynomial::new(n, terms.iter().map(|t| (t.c.0.clone(), ExponentVector(t.m.clone())))))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationDoc {
    pub node: String,
    /// 1-based index within the node's family.
    pub index: usize,
    pub terms: Vec<TermDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tail: Vec<TermDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    pub diagram: DiagramDoc,
    pub equations: Vec<EquationDoc>,
}

pub fn system_doc(system: &SpliceSystem) -> SystemDoc {
    let d = system.diagram();
    let equations = system
        .families()
        .iter()
        .flat_map(|fam| {
            (0..fam.n_equations()).map(move |i| EquationDoc {
                node: d.label(fam.node).to_string(),
                index: i + 1,
                terms: terms_doc(&fam.minimal(i)),
                tail: terms_doc(&fam.tails[i]),
            })
        })
        .collect();
    SystemDoc { diagram: d.to_spec(), equations }
}

/// Rebuilds a system: the admissible monomial of each edge is read off the
/// terms, whose coefficients form the coefficient matrix.
pub fn system_from_doc(doc: &SystemDoc, check_hamm: bool) -> Result<SpliceSystem, DocError> {
    let d = SpliceDiagram::new(&doc.diagram)?;
    let n = d.n_leaves();
    let mut by_node: BTreeMap<usize, Vec<&EquationDoc>> = BTreeMap::new();
    for eq in &doc.equations {
        let v = d.vertex(&eq.node)?;
        if !d.is_node(v) {
            return Err(DiagramError::NotANode(eq.node.clone()).into());
        }
        by_node.entry(v).or_default().push(eq);
    }
    let mut builder = SystemBuilder::new(&d);
    if !check_hamm {
        builder = builder.without_hamm_check();
    }
    for v in d.nodes() {
        let label = d.label(v);
        let mut eqs = by_node.remove(&v).unwrap_or_default();
        eqs.sort_by_key(|e| e.index);
        let delta = d.valency(v);
        if eqs.iter().map(|e| e.index).ne(1..=delta - 2) {
            return Err(DocError::Shape(format!("node {label} needs equations 1..={}", delta - 2)));
        }
        let mut rows = vec![vec![BigRational::zero(); delta - 2]; delta];
        let mut chosen: Vec<Option<Vec<u32>>> = vec![None; delta];
        for (i, eq) in eqs.iter().enumerate() {
            for t in &eq.terms {
                if t.m.len() != n {
                    return Err(DocError::Shape(format!("exponent vector of length {}, expected {n}", t.m.len())));
                }
                let support: Vec<usize> = (0..n).filter(|&l| t.m[l] > 0).collect();
                let pos = support
                    .first()
                    .map(|&l| d.toward(v, l))
                    .filter(|&p| support.iter().all(|&l| d.toward(v, l) == p))
                    .ok_or_else(|| DocError::Shape(format!("term {:?} at node {label} is not admissible", t.m)))?;
                match &chosen[pos] {
                    Some(m) if *m != t.m => {
                        return Err(DocError::Shape(format!("node {label} uses two monomials for one edge")));
                    }
                    _ => chosen[pos] = Some(t.m.clone()),
                }
                rows[pos][i] += &t.c.0;
            }
            if !eq.tail.is_empty() {
                builder = builder.tail(v, i, polynomial_from_terms(n, &eq.tail)?);
            }
        }
        for (pos, m) in chosen.into_iter().enumerate() {
            if let Some(m) = m {
                builder = builder.coweight(v, pos, m);
            }
        }
        builder = builder.coefficients(CoefficientMatrix { node: v, rows });
    }
    if let Some((_, eqs)) = by_node.into_iter().next() {
        return Err(DocError::Shape(format!("equations for unknown node {}", eqs[0].node)));
    }
    Ok(builder.build()?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayDoc {
    pub label: String,
    pub vector: Vec<JsonInt>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeDoc {
    pub rays: [String; 2],
    pub multiplicity: JsonInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanDoc {
    pub n: usize,
    pub rays: Vec<RayDoc>,
    pub cones: Vec<ConeDoc>,
}

pub fn fan_doc(fan: &SpliceFan) -> FanDoc {
    FanDoc {
        n: fan.n,
        rays: fan.rays.iter().map(|r| RayDoc { label: r.label.clone(), vector: ints(&r.vector) }).collect(),
        cones: fan
            .cones
            .iter()
            .map(|c| ConeDoc {
                rays: [fan.rays[c.rays.0].label.clone(), fan.rays[c.rays.1].label.clone()],
                multiplicity: JsonInt(c.multiplicity.clone()),
            })
            .collect(),
    }
}

pub fn fan_from_doc(doc: &FanDoc) -> Result<SpliceFan, DocError> {
    let rays: Vec<Ray> = doc
        .rays
        .iter()
        .map(|r| Ray { label: r.label.clone(), vector: r.vector.iter().map(|x| x.0.clone()).collect() })
        .collect();
    let index = |label: &str| {
        rays.iter().position(|r| r.label == label).ok_or_else(|| DocError::Shape(format!("unknown ray {label}")))
    };
    let cones = doc
        .cones
        .iter()
        .map(|c| Ok(Cone2 { rays: (index(&c.rays[0])?, index(&c.rays[1])?), multiplicity: c.multiplicity.0.clone() }))
        .collect::<Result<Vec<_>, DocError>>()?;
    Ok(SpliceFan { n: doc.n, rays, cones })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDoc {
    pub node: String,
    /// Label of the vertex across the winning edge.
    pub edge: String,
    pub values: Vec<Option<JsonRational>>,
    pub coefficients: Vec<JsonRational>,
    pub monomial: Vec<u32>,
}

pub fn certificate_doc(d: &SpliceDiagram, c: &Certificate) -> CertificateDoc {
    CertificateDoc {
        node: d.label(c.node).to_string(),
        edge: d.label(d.neighbor(c.node, c.edge)).to_string(),
        values: c.values.iter().map(|v| v.clone().map(JsonRational)).collect(),
        coefficients: rationals(&c.coefficients),
        monomial: c.monomial.0.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum CellDoc {
    Ray { ray: String, scale: JsonRational },
    Cone { rays: [String; 2], coefficients: [JsonRational; 2] },
    Outside,
}

pub fn cell_doc(fan: &SpliceFan, cell: &CellLocation) -> CellDoc {
    match cell {
        CellLocation::OnRay { ray, scale } => {
            CellDoc::Ray { ray: fan.rays[*ray].label.clone(), scale: JsonRational(scale.clone()) }
        }
        CellLocation::InCone { cone, coeffs } => {
            let (a, b) = fan.cones[*cone].rays;
            CellDoc::Cone {
                rays: [fan.rays[a].label.clone(), fan.rays[b].label.clone()],
                coefficients: [JsonRational(coeffs.0.clone()), JsonRational(coeffs.1.clone())],
            }
        }
        CellLocation::Outside => CellDoc::Outside,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MembershipDoc {
    pub w: Vec<JsonRational>,
    pub member: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<CellDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinomialDoc {
    pub node: String,
    pub terms: Vec<TermDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    /// `[re, im]` per non-root leaf.
    pub coeffs: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<Vec<JsonRational>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndCurveDoc {
    pub root: String,
    pub leaves: Vec<String>,
    pub exponents: Vec<JsonInt>,
    pub g: JsonInt,
    pub binomials: Vec<BinomialDoc>,
    pub components: Vec<ComponentDoc>,
}

pub fn end_curve_doc(d: &SpliceDiagram, bin: &BinomialSystem, curve: &MonomialCurve) -> EndCurveDoc {
    EndCurveDoc {
        root: d.label(curve.root).to_string(),
        leaves: curve.leaves.iter().map(|&l| d.label(l).to_string()).collect(),
        exponents: ints(&curve.exponents),
        g: JsonInt(curve.g.clone()),
        binomials: bin
            .relations
            .iter()
            .map(|b| BinomialDoc { node: d.label(b.node).to_string(), terms: terms_doc(&b.to_polynomial()) })
            .collect(),
        components: curve
            .components
            .iter()
            .map(|c| ComponentDoc {
                coeffs: match &c.exact {
                    Some(q) => q.iter().map(|x| [rational_to_f64(x).to_string(), "0".to_string()]).collect(),
                    None => c.coeffs.iter().map(|&z| complex_doc(z)).collect(),
                },
                exact: c.exact.as_deref().map(rationals),
            })
            .collect(),
    }
}

/// Parts smaller than `1e-12·|z|` are rounding noise and print as zero.
fn complex_doc(z: Complex64) -> [String; 2] {
    let snap = |x: f64| if x.abs() <= 1e-12 * z.norm() { 0.0 } else { x };
    [snap(z.re).to_string(), snap(z.im).to_string()]
}

//! End-curves of splice type systems.
//!
//! Rooting a diagram at a leaf `r` and deleting, in every equation, the
//! admissible monomial pointing toward `r` leaves a system in the other
//! variables. At each node its equations are linear in `δ_v - 1` monomials,
//! so elimination turns them into binomials. The binomial system cuts out `g`
//! torus translates of the monomial curve `t ↦ (t^{ℓ_{rλ}/g})`, where `g` is
//! the gcd of the linking numbers from `r`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::{gcd_all, rational_approximation, rational_to_f64, rref};
use crate::diagram::{DiagramError, SpliceDiagram, VertexId};
use crate::poly::{ExponentVector, Polynomial};
use crate::system::SpliceSystem;
use crate::torus::{diagonalize, TorusError};

/// Largest component count enumerated by [`parameterize`].
pub const MAX_COMPONENTS: i128 = 10_000;

/// Candidate representatives examined when normalizing a component.
const NORMALIZATION_CAP: u64 = 4_096;

/// Newton steps applied to each normalized component.
const REFINE_STEPS: usize = 3;

/// Relative substitution residual accepted for numeric components.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EndCurveError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("elimination at node {node} degenerates; the Hamm condition fails")]
    EliminationDegenerate { node: String },
    #[error("could not solve for the end-curve: {0}")]
    SolveFailed(String),
    #[error(transparent)]
    Torus(#[from] TorusError),
}

/// A diagram viewed from one of its leaves.
#[derive(Clone, Copy, Debug)]
pub struct RootedDiagram<'a> {
    diagram: &'a SpliceDiagram,
    root: VertexId,
}

pub fn root(diagram: &SpliceDiagram, r: VertexId) -> Result<RootedDiagram<'_>, EndCurveError> {
    if r >= diagram.n_vertices() {
        return Err(DiagramError::VertexOutOfRange(r).into());
    }
    if !diagram.is_leaf(r) {
        return Err(DiagramError::NotALeaf(diagram.label(r).to_string()).into());
    }
    Ok(RootedDiagram { diagram, root: r })
}

impl<'a> RootedDiagram<'a> {
    pub fn diagram(&self) -> &'a SpliceDiagram {
        self.diagram
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    /// The non-root leaves `Δ_r` in index order.
    pub fn others(&self) -> Vec<VertexId> {
        self.diagram.leaves().filter(|&l| l != self.root).collect()
    }

    /// `ℓ_{rλ}` for `λ ∈ Δ_r`.
    pub fn linking_numbers(&self) -> Vec<BigInt> {
        self.others().into_iter().map(|l| self.diagram.linking_number(self.root, l)).collect()
    }

    /// `g = gcd(ℓ_{rλ})`.
    pub fn g(&self) -> BigInt {
        gcd_all(&self.linking_numbers())
    }
}

/// The equations at one node after deleting the monomial toward the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeBlock {
    pub node: VertexId,
    /// Adjacency position at `node` of the edge toward the root.
    pub toward_root: usize,
    /// Surviving adjacency positions, in order.
    pub positions: Vec<usize>,
    pub monomials: Vec<ExponentVector>,
    /// `coefficients[i][k]`: coefficient of `monomials[k]` in equation `i`.
    pub coefficients: Vec<Vec<BigRational>>,
}

impl NodeBlock {
    pub fn equations(&self) -> Vec<Polynomial> {
        let n = self.monomials.first().map_or(0, ExponentVector::len);
        self.coefficients
            .iter()
            .map(|row| Polynomial::new(n, row.iter().cloned().zip(self.monomials.iter().cloned())))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndCurveSystem {
    pub root: VertexId,
    pub n_vars: usize,
    pub blocks: Vec<NodeBlock>,
}

impl EndCurveSystem {
    /// All `h_{v,i}` in node order.
    pub fn equations(&self) -> Vec<Polynomial> {
        self.blocks.iter().flat_map(NodeBlock::equations).collect()
    }
}

/// Drops, in every admissible equation, the monomial toward the root. Tails
/// are not part of the end-curve.
pub fn end_curve_system(system: &SpliceSystem, rooted: &RootedDiagram<'_>) -> EndCurveSystem {
    let d = system.diagram();
    let blocks = system
        .families()
        .iter()
        .map(|fam| {
            let toward_root = d.toward(fam.node, rooted.root);
            let positions: Vec<usize> = (0..fam.coweights.len()).filter(|&p| p != toward_root).collect();
            let monomials = positions.iter().map(|&p| fam.monomial(p)).collect();
            let coefficients = (0..fam.n_equations())
                .map(|i| positions.iter().map(|&p| fam.coefficients.rows[p][i].clone()).collect())
                .collect();
            NodeBlock { node: fam.node, toward_root, positions, monomials, coefficients }
        })
        .collect();
    EndCurveSystem { root: rooted.root, n_vars: system.n_vars(), blocks }
}

/// `z^{lhs} - constant · z^{rhs} = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binomial {
    pub node: VertexId,
    pub lhs: ExponentVector,
    pub rhs: ExponentVector,
    pub constant: BigRational,
}

impl Binomial {
    pub fn to_polynomial(&self) -> Polynomial {
        let n = self.lhs.len();
        Polynomial::new(n, [(BigRational::one(), self.lhs.clone()), (-self.constant.clone(), self.rhs.clone())])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinomialSystem {
    pub root: VertexId,
    pub n_vars: usize,
    pub relations: Vec<Binomial>,
}

impl BinomialSystem {
    pub fn polynomials(&self) -> Vec<Polynomial> {
        self.relations.iter().map(Binomial::to_polynomial).collect()
    }
}

/// Row reduces each node block; the last surviving monomial is the free
/// column, so every row becomes `z^{a_j} + α z^{a_last}`.
pub fn binomial_reduce(ecs: &EndCurveSystem, diagram: &SpliceDiagram) -> Result<BinomialSystem, EndCurveError> {
    let mut relations = Vec::new();
    for block in &ecs.blocks {
        let degenerate = || EndCurveError::EliminationDegenerate { node: diagram.label(block.node).to_string() };
        let k = block.monomials.len();
        let rows = block.coefficients.len();
        let (reduced, pivots) = rref(&block.coefficients);
        if pivots != (0..rows).collect::<Vec<_>>() || rows + 1 != k {
            return Err(degenerate());
        }
        for (j, row) in reduced.iter().enumerate() {
            if row[k - 1].is_zero() {
                return Err(degenerate());
            }
            relations.push(Binomial {
                node: block.node,
                lhs: block.monomials[j].clone(),
                rhs: block.monomials[k - 1].clone(),
                constant: -row[k - 1].clone(),
            });
        }
    }
    Ok(BinomialSystem { root: ecs.root, n_vars: ecs.n_vars, relations })
}

/// One torus translate `t ↦ (c_λ t^{e_λ})` of the monomial curve.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    /// Coefficients for the non-root leaves.
    pub coeffs: Vec<Complex64>,
    /// The same coefficients when they are rational and verify exactly.
    pub exact: Option<Vec<BigRational>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonomialCurve {
    pub root: VertexId,
    /// The non-root leaves, in the order of `exponents` and `coeffs`.
    pub leaves: Vec<VertexId>,
    /// `ℓ_{rλ}/g`, primitive.
    pub exponents: Vec<BigInt>,
    pub g: BigInt,
    pub components: Vec<Component>,
}

fn to_i64(x: &BigInt) -> Result<i64, EndCurveError> {
    x.to_i64().ok_or_else(|| EndCurveError::SolveFailed("exponent exceeds machine range".into()))
}

/// Solves the binomial system for its `g` components.
///
/// Each representative is normalized so the last coordinate is 1, choosing
/// among the admissible rescalings the one closest to real, and is stored
/// exactly when its coordinates are recognizably rational and substitution
/// confirms them.
pub fn parameterize(ecs: &EndCurveSystem, rooted: &RootedDiagram<'_>) -> Result<MonomialCurve, EndCurveError> {
    let d = rooted.diagram();
    let bin = binomial_reduce(ecs, d)?;
    let leaves = rooted.others();
    let m = leaves.len();
    let links = rooted.linking_numbers();
    let g = gcd_all(&links);
    let exponents: Vec<BigInt> = links.iter().map(|l| l / &g).collect();
    let exps: Vec<Vec<i64>> = bin
        .relations
        .iter()
        .map(|b| leaves.iter().map(|&l| i64::from(b.lhs.0[l]) - i64::from(b.rhs.0[l])).collect())
        .collect();
    let form = diagonalize(&exps)?;
    let kernel = form.kernel();
    if kernel.len() != 1 || form.rank() + 1 != m {
        return Err(EndCurveError::SolveFailed(format!("solution set has dimension {}", kernel.len())));
    }
    let k: Vec<BigInt> = kernel[0].iter().map(|&x| BigInt::from(x)).collect();
    let neg: Vec<BigInt> = k.iter().map(|x| -x).collect();
    if k != exponents && neg != exponents {
        return Err(EndCurveError::SolveFailed("kernel is not spanned by the linking numbers".into()));
    }
    let count = form.n_components().ok_or_else(|| EndCurveError::SolveFailed("rank deficient".into()))?;
    if BigInt::from(count) != g {
        return Err(EndCurveError::SolveFailed(format!("{count} components, expected {g}")));
    }
    if count > MAX_COMPONENTS {
        return Err(EndCurveError::SolveFailed(format!("{count} components exceed the enumeration cap")));
    }
    let beta: Vec<Complex64> = bin.relations.iter().map(|b| Complex64::new(rational_to_f64(&b.constant), 0.0)).collect();
    let e: Vec<i64> = exponents.iter().map(to_i64).collect::<Result<_, _>>()?;
    let mut components = Vec::new();
    for index in 0..count {
        let mut rest = index;
        let branches: Vec<i128> = form
            .diag
            .iter()
            .map(|&dg| {
                let b = rest % dg;
                rest /= dg;
                b
            })
            .collect();
        let raw = form.solve(&beta, &branches, &[Complex64::zero()])?;
        let coeffs = refine(&normalize(&raw, &e), &exps, &beta)?;
        let mut comp = Component { coeffs, exact: None };
        comp.exact = rationalize(&comp.coeffs).filter(|q| exact_check(q, &e, ecs, &leaves));
        components.push(comp);
    }
    let curve = MonomialCurve { root: rooted.root(), leaves, exponents, g, components };
    for (i, c) in curve.components.iter().enumerate() {
        let r = component_residual(&curve, c, ecs, 1.0).max(component_residual(&curve, c, ecs, 2.0));
        if r.is_nan() || r > RESIDUAL_TOL {
            return Err(EndCurveError::SolveFailed(format!("component {i} has residual {r:e}")));
        }
    }
    Ok(curve)
}

/// Rescales `c` by `t^e` so the last coordinate is 1 and the coordinates are
/// as close to real as the rescaling allows.
fn normalize(c: &[Complex64], e: &[i64]) -> Vec<Complex64> {
    let last = *c.last().expect("at least one coordinate");
    let e_last = *e.last().expect("at least one exponent");
    // t₀ with t₀^{e_last} = 1/last; the others differ by e_last-th roots of 1.
    let log_t0 = -last.ln() / e_last as f64;
    let scale = |k: u64| -> Vec<Complex64> {
        let log_t = log_t0 + Complex64::new(0.0, std::f64::consts::TAU * k as f64 / e_last as f64);
        c.iter().zip(e).map(|(ci, &ei)| ci * (log_t * ei as f64).exp()).collect()
    };
    let skew = |v: &[Complex64]| v.iter().map(|x| (x.im / x.norm()).abs()).fold(0.0, f64::max);
    let candidates = (e_last.unsigned_abs()).min(NORMALIZATION_CAP);
    let best = (0..candidates)
        .map(|k| {
            let v = scale(k);
            (skew(&v), k)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map_or(0, |(_, k)| k);
    let mut out = scale(best);
    *out.last_mut().expect("nonempty") = Complex64::new(1.0, 0.0);
    out
}

/// Newton steps in logarithmic coordinates with the last coordinate fixed
/// to one. There the binomials read `B'·x = log β (mod 2πi)` with `B'` the
/// exponent matrix without its last column, which is square and invertible
/// because the kernel of `B` is spanned by `e` and `e_last ≠ 0`.
fn refine(c: &[Complex64], exps: &[Vec<i64>], beta: &[Complex64]) -> Result<Vec<Complex64>, EndCurveError> {
    let m = c.len();
    let lu = DMatrix::from_fn(m - 1, m - 1, |i, j| exps[i][j] as f64).lu();
    let mut x: Vec<Complex64> = c[..m - 1].iter().map(|z| z.ln()).collect();
    let logs: Vec<Complex64> = beta.iter().map(|b| b.ln()).collect();
    for _ in 0..REFINE_STEPS {
        let r: Vec<Complex64> = exps
            .iter()
            .zip(&logs)
            .map(|(row, l)| {
                let s = row[..m - 1].iter().zip(&x).map(|(&a, xi)| xi * a as f64).sum::<Complex64>() - l;
                Complex64::new(s.re, s.im - TAU * (s.im / TAU).round())
            })
            .collect();
        let solve = |part: fn(&Complex64) -> f64| {
            lu.solve(&DVector::from_iterator(m - 1, r.iter().map(part)))
                .ok_or_else(|| EndCurveError::SolveFailed("singular exponent matrix".into()))
        };
        let (dre, dim) = (solve(|z| z.re)?, solve(|z| z.im)?);
        for (i, xi) in x.iter_mut().enumerate() {
            *xi -= Complex64::new(dre[i], dim[i]);
        }
    }
    Ok(x.into_iter().map(Complex64::exp).chain(std::iter::once(Complex64::new(1.0, 0.0))).collect())
}

fn rationalize(c: &[Complex64]) -> Option<Vec<BigRational>> {
    c.iter()
        .map(|x| {
            if x.im.abs() > 1e-9 * x.norm().max(1.0) {
                return None;
            }
            rational_approximation(x.re, 1_000_000, 1e-9 * x.re.abs().max(1.0))
        })
        .collect()
}

/// `Σ_k a_k · Π c_λ^{m_{kλ}} t^{e·m_k}` grouped by power of `t`.
fn substitute<T, F>(f: &Polynomial, e: &[i64], leaves: &[VertexId], coeff: F) -> Vec<(BigInt, Vec<T>)>
where
    F: Fn(&BigRational, &ExponentVector) -> T,
{
    let mut groups: Vec<(BigInt, Vec<T>)> = Vec::new();
    for (a, m) in f.terms() {
        let deg: BigInt = leaves.iter().zip(e).map(|(&l, &ei)| BigInt::from(m.0[l]) * ei).sum();
        let term = coeff(a, m);
        match groups.iter_mut().find(|(dg, _)| *dg == deg) {
            Some((_, v)) => v.push(term),
            None => groups.push((deg, vec![term])),
        }
    }
    groups
}

fn exact_check(q: &[BigRational], e: &[i64], ecs: &EndCurveSystem, leaves: &[VertexId]) -> bool {
    ecs.equations().iter().all(|f| {
        substitute(f, e, leaves, |a, m| {
            leaves.iter().zip(q).fold(a.clone(), |acc, (&l, ql)| acc * num_traits::pow(ql.clone(), m.0[l] as usize))
        })
        .into_iter()
        .all(|(_, terms)| terms.into_iter().fold(BigRational::zero(), |s, x| s + x).is_zero())
    })
}

/// Largest relative residual over all equations of the substitution
/// `z_λ = c_λ t^{e_λ}` at the real parameter `t`.
///
/// Each equation is divided by its largest power of `t` and by the sum of
/// absolute values of its terms, so the value is meaningful at any `t`.
pub fn component_residual(curve: &MonomialCurve, comp: &Component, ecs: &EndCurveSystem, t: f64) -> f64 {
    let e: Vec<i64> = curve.exponents.iter().map(|x| x.to_i64().unwrap_or(i64::MAX)).collect();
    let mut worst = 0.0f64;
    for f in ecs.equations() {
        let groups = substitute(&f, &e, &curve.leaves, |a, m| {
            curve
                .leaves
                .iter()
                .zip(&comp.coeffs)
                .fold(Complex64::new(rational_to_f64(a), 0.0), |acc, (&l, c)| acc * c.powi(m.0[l] as i32))
        });
        let Some(top) = groups.iter().map(|(dg, _)| dg.clone()).max() else { continue };
        let mut sum = Complex64::zero();
        let mut size = 0.0;
        for (dg, terms) in groups {
            let shift = (dg - &top).to_f64().unwrap_or(f64::NEG_INFINITY);
            let factor = t.powf(shift);
            for x in terms {
                sum += x * factor;
                size += x.norm() * factor;
            }
        }
        if size > 0.0 {
            worst = worst.max(sum.norm() / size);
        }
    }
    worst
}

/// Substitution check of every component: exact for components with
/// rational coefficients, relative residual at `t = 1` and `t = 2` otherwise.
pub fn verify_parameterization(curve: &MonomialCurve, ecs: &EndCurveSystem) -> bool {
    let Some(e) = curve.exponents.iter().map(|x| x.to_i64()).collect::<Option<Vec<i64>>>() else {
        return false;
    };
    curve.components.iter().all(|c| match &c.exact {
        Some(q) => exact_check(q, &e, ecs, &curve.leaves),
        None => [1.0, 2.0].iter().all(|&t| component_residual(curve, c, ecs, t) <= RESIDUAL_TOL),
    })
}

/// Builds a curve from explicit rational coefficients, for checking a
/// parameterization supplied from outside.
pub fn rational_curve(rooted: &RootedDiagram<'_>, coeffs: &[BigRational]) -> MonomialCurve {
    let links = rooted.linking_numbers();
    let g = gcd_all(&links);
    MonomialCurve {
        root: rooted.root(),
        leaves: rooted.others(),
        exponents: links.iter().map(|l| l / &g).collect(),
        g,
        components: vec![Component {
            coeffs: coeffs.iter().map(|q| Complex64::new(rational_to_f64(q), 0.0)).collect(),
            exact: Some(coeffs.to_vec()),
        }],
    }
}

/// Homogeneity of a binomial relation: both sides pair to `ℓ_{rv}` against
/// the linking numbers from the root.
pub fn binomial_degree(rooted: &RootedDiagram<'_>, b: &Binomial) -> Option<BigInt> {
    let d = rooted.diagram();
    let pair = |m: &ExponentVector| -> BigInt {
        d.leaves().map(|l| BigInt::from(m.0[l]) * d.linking_number(rooted.root(), l)).sum()
    };
    let (a, c) = (pair(&b.lhs), pair(&b.rhs));
    (a == c).then_some(a)
}

//! The splice fan of a diagram: one primitive ray per vertex, one
//! two-dimensional cone per edge, tropical multiplicities from closed-form
//! gcd expressions. Also the embedding of the diagram into the standard
//! simplex, exact point location and the balancing check.
//!
//! Membership certificates, boundary tropicalizations and the numeric smoke
//! test live in the submodules [`membership`] and [`smooth`].

pub mod membership;
pub mod smooth;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::{bezout, gcd_all, primitive};
use crate::diagram::{SpliceDiagram, VertexId};
use crate::poly::WeightVector;

pub use membership::{
    boundary_trop, certificate_search, initial_ideal_generators, membership, monomial_in_span_oracle,
    BoundaryTrop, Certificate, InitialIdeal, Membership, MembershipError, TruncationContext,
};
pub use smooth::{smoothness_smoke, SmokeError, SmokeReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FanError {
    #[error("the diagram violates the edge determinant or semigroup condition")]
    ConditionViolation,
    #[error("multiplicity of cone {0}-{1} is not an integer")]
    NonIntegralMultiplicity(String, String),
}

/// A labeled primitive ray.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ray {
    pub label: String,
    pub vector: Vec<BigInt>,
}

/// A two-dimensional cone spanned by two rays (indices into the ray list).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone2 {
    pub rays: (usize, usize),
    pub multiplicity: BigInt,
}

/// A weighted rational fan of dimension two in `ℝ^n`.
///
/// Rays produced by [`splice_fan`] are ordered leaves first, then nodes, so
/// ray `i` corresponds to vertex `i` of the diagram; cones follow the edge
/// order of the diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpliceFan {
    pub n: usize,
    pub rays: Vec<Ray>,
    pub cones: Vec<Cone2>,
}

/// Same shape as [`SpliceFan`], used as input to recovery.
pub type FanInput = SpliceFan;

impl SpliceFan {
    pub fn ray_index(&self, label: &str) -> Option<usize> {
        self.rays.iter().position(|r| r.label == label)
    }

    /// Indices of the rays sharing a cone with ray `r`, with the cone index.
    pub fn adjacent(&self, r: usize) -> Vec<(usize, usize)> {
        self.cones
            .iter()
            .enumerate()
            .filter_map(|(ci, c)| match c.rays {
                (a, b) if a == r => Some((b, ci)),
                (a, b) if b == r => Some((a, ci)),
                _ => None,
            })
            .collect()
    }
}

/// Builds the weighted splice fan.
pub fn splice_fan(d: &SpliceDiagram) -> Result<SpliceFan, FanError> {
    if !d.check_conditions().admissible() {
        return Err(FanError::ConditionViolation);
    }
    let n = d.n_leaves();
    let mut rays = Vec::with_capacity(d.n_vertices());
    for l in d.leaves() {
        let mut v = vec![BigInt::zero(); n];
        v[l] = BigInt::one();
        rays.push(Ray { label: d.label(l).to_string(), vector: v });
    }
    for v in d.nodes() {
        rays.push(Ray {
            label: d.label(v).to_string(),
            vector: primitive(&d.node_weight_vector(v).entries),
        });
    }
    let mut cones = Vec::with_capacity(d.edges().len());
    for &(a, b) in d.edges() {
        cones.push(Cone2 { rays: (a, b), multiplicity: edge_multiplicity(d, a, b)? });
    }
    Ok(SpliceFan { n, rays, cones })
}

/// Tropical multiplicity of the cone over the edge `[a, b]`.
pub fn edge_multiplicity(d: &SpliceDiagram, a: VertexId, b: VertexId) -> Result<BigInt, FanError> {
    let err = || FanError::NonIntegralMultiplicity(d.label(a).into(), d.label(b).into());
    let (num, den) = if d.is_leaf(a) || d.is_leaf(b) {
        let (lam, u) = if d.is_leaf(a) { (a, b) } else { (b, a) };
        let others: Vec<BigInt> = d.leaves().filter(|&m| m != lam).map(|m| d.linking_number(u, m)).collect();
        (gcd_all(&others), BigInt::from(d.weight_toward(u, lam).expect("node end")))
    } else {
        let side = |x: VertexId, y: VertexId| -> BigInt {
            let vals: Vec<BigInt> = d
                .leaves()
                .filter(|&l| d.toward(x, l) != d.toward(x, y))
                .map(|l| d.linking_number(x, l))
                .collect();
            gcd_all(&vals)
        };
        let den = BigInt::from(d.weight_toward(a, b).expect("node end"))
            * BigInt::from(d.weight_toward(b, a).expect("node end"));
        (side(a, b) * side(b, a), den)
    };
    let (q, r) = num.div_rem(&den);
    if !r.is_zero() {
        return Err(err());
    }
    Ok(q)
}

/// `ρ(v) = w_v / |w_v|₁` for nodes and the unit vector for leaves.
pub fn embed_vertex(d: &SpliceDiagram, v: VertexId) -> Vec<BigRational> {
    let n = d.n_leaves();
    if d.is_leaf(v) {
        let mut p = vec![BigRational::zero(); n];
        p[v] = BigRational::one();
        return p;
    }
    let w = d.node_weight_vector(v).entries;
    let norm: BigInt = w.iter().sum();
    w.into_iter().map(|x| BigRational::new(x, norm.clone())).collect()
}

/// Barycenter of the leaves `set` seen from node `v`: the normalization of
/// `Σ_{λ∈set} ℓ_{vλ} e_λ`.
pub fn barycenter(d: &SpliceDiagram, v: VertexId, set: &[VertexId]) -> Vec<BigRational> {
    let n = d.n_leaves();
    let total: BigInt = set.iter().map(|&l| d.linking_number(v, l)).sum();
    let mut p = vec![BigRational::zero(); n];
    for &l in set {
        p[l] = BigRational::new(d.linking_number(v, l), total.clone());
    }
    p
}

/// Position of a weight vector relative to the fan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CellLocation {
    /// `w = scale · ray`.
    OnRay { ray: usize, scale: BigRational },
    /// `w = coeffs.0 · ray_a + coeffs.1 · ray_b` with both coefficients positive.
    InCone { cone: usize, coeffs: (BigRational, BigRational) },
    Outside,
}

impl CellLocation {
    pub fn is_inside(&self) -> bool {
        !matches!(self, CellLocation::Outside)
    }
}

/// Positive scalar `s` with `w = s·r`, if any.
fn positive_multiple(w: &[BigRational], r: &[BigInt]) -> Option<BigRational> {
    let k = r.iter().position(|x| !x.is_zero())?;
    let s = &w[k] / BigRational::from_integer(r[k].clone());
    if !s.is_positive() {
        return None;
    }
    w.iter()
        .zip(r)
        .all(|(wi, ri)| *wi == &s * BigRational::from_integer(ri.clone()))
        .then_some(s)
}

/// Solves `w = α a + β b` exactly; `None` if `w` is not in the span.
fn solve_pair(w: &[BigRational], a: &[BigInt], b: &[BigInt]) -> Option<(BigRational, BigRational)> {
    let n = w.len();
    for i in 0..n {
        for j in i + 1..n {
            let det = &a[i] * &b[j] - &a[j] * &b[i];
            if det.is_zero() {
                continue;
            }
            let det = BigRational::from_integer(det);
            let (ai, aj) = (BigRational::from_integer(a[i].clone()), BigRational::from_integer(a[j].clone()));
            let (bi, bj) = (BigRational::from_integer(b[i].clone()), BigRational::from_integer(b[j].clone()));
            let alpha = (&w[i] * &bj - &w[j] * &bi) / &det;
            let beta = (&ai * &w[j] - &aj * &w[i]) / &det;
            let ok = (0..n).all(|k| {
                let v = &alpha * BigRational::from_integer(a[k].clone())
                    + &beta * BigRational::from_integer(b[k].clone());
                v == w[k]
            });
            return ok.then_some((alpha, beta));
        }
    }
    None
}

/// Locates `w` on a ray, in the relative interior of a cone, or outside.
pub fn locate(fan: &SpliceFan, w: &WeightVector) -> CellLocation {
    let entries = w.entries();
    for (i, r) in fan.rays.iter().enumerate() {
        if let Some(scale) = positive_multiple(entries, &r.vector) {
            return CellLocation::OnRay { ray: i, scale };
        }
    }
    for (ci, c) in fan.cones.iter().enumerate() {
        let (a, b) = c.rays;
        if let Some((x, y)) = solve_pair(entries, &fan.rays[a].vector, &fan.rays[b].vector) {
            if x.is_positive() && y.is_positive() {
                return CellLocation::InCone { cone: ci, coeffs: (x, y) };
            }
        }
    }
    CellLocation::Outside
}

/// Primitive generator, modulo `ℤτ`, of the image of the cone spanned by the
/// primitive rays `tau` and `r`: an integer vector `p` with
/// `r = k p + j τ`, `k > 0` the lattice index and `0 ≤ j < k`.
pub fn quotient_generator(tau: &[BigInt], r: &[BigInt]) -> Vec<BigInt> {
    let n = tau.len();
    let mut minors = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            minors.push(&tau[i] * &r[j] - &tau[j] * &r[i]);
        }
    }
    let k = gcd_all(&minors);
    if k.is_zero() {
        return r.to_vec();
    }
    // Since τ is primitive, Σ x_i τ_i = 1 for some integers x; then the
    // residue j of r modulo kτ is Σ x_i r_i mod k.
    let (_, x) = bezout(tau);
    let j: BigInt = x.iter().zip(r).map(|(a, b)| a * b).sum::<BigInt>().mod_floor(&k);
    r.iter().zip(tau).map(|(ri, ti)| (ri - &j * ti) / &k).collect()
}

fn parallel(a: &[BigInt], b: &[BigInt]) -> bool {
    let n = a.len();
    (0..n).all(|i| (i + 1..n).all(|j| &a[i] * &b[j] == &a[j] * &b[i]))
}

/// Balancing at every ray lying on at least two cones: the multiplicity
/// weighted sum of the quotient generators lies on the line through the ray.
pub fn check_balancing(fan: &SpliceFan) -> bool {
    (0..fan.rays.len()).all(|t| {
        let adj = fan.adjacent(t);
        if adj.len() < 2 {
            return true;
        }
        let tau = &fan.rays[t].vector;
        let mut sum = vec![BigInt::zero(); fan.n];
        for (other, ci) in adj {
            let p = quotient_generator(tau, &fan.rays[other].vector);
            let m = &fan.cones[ci].multiplicity;
            for (s, x) in sum.iter_mut().zip(&p) {
                *s += m * x;
            }
        }
        parallel(&sum, tau)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{example_d1, star};

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn running_example_fan() {
        let d = example_d1();
        let f = splice_fan(&d).unwrap();
        assert_eq!(f.rays.len(), 7);
        assert_eq!(f.cones.len(), 6);
        assert!(f.cones.iter().all(|c| c.multiplicity.is_one()));
        assert_eq!(f.rays[5].vector, ints(&[147, 98, 60, 84, 210]));
        assert_eq!(f.rays[6].vector, ints(&[210, 140, 110, 154, 385]));
        assert!(check_balancing(&f));
    }

    #[test]
    fn star_multiplicities() {
        let f = splice_fan(&star(&[2, 3, 5]).unwrap()).unwrap();
        assert!(f.cones.iter().all(|c| c.multiplicity.is_one()));
        assert!(check_balancing(&f));
        let g = splice_fan(&star(&[2, 4, 3]).unwrap()).unwrap();
        let ms: Vec<BigInt> = g.cones.iter().map(|c| c.multiplicity.clone()).collect();
        assert_eq!(ms, ints(&[1, 1, 2]));
        assert!(check_balancing(&g));
    }

    #[test]
    fn perturbed_multiplicity_breaks_balancing() {
        let mut f = splice_fan(&example_d1()).unwrap();
        f.cones[0].multiplicity = BigInt::from(2);
        assert!(!check_balancing(&f));
    }

    #[test]
    fn embedding_and_barycenters() {
        let d = example_d1();
        let p = embed_vertex(&d, 5);
        assert_eq!(p[0], BigRational::new(147.into(), 599.into()));
        let b = barycenter(&d, 5, &[0, 1]);
        assert_eq!(b[0], BigRational::new(3.into(), 5.into()));
        assert_eq!(b[1], BigRational::new(2.into(), 5.into()));
        assert_eq!(barycenter(&d, 5, &[3]), embed_vertex(&d, 3));
        // Adjacent nodes see the same barycenter of each side.
        assert_eq!(barycenter(&d, 5, &[0, 1]), barycenter(&d, 6, &[0, 1]));
        assert_eq!(barycenter(&d, 5, &[2, 3, 4]), barycenter(&d, 6, &[2, 3, 4]));
    }

    #[test]
    fn locations() {
        let d = example_d1();
        let f = splice_fan(&d).unwrap();
        let wu = WeightVector::from_i64(&[147, 98, 60, 84, 210]).unwrap();
        assert!(matches!(locate(&f, &wu), CellLocation::OnRay { ray: 5, .. }));
        let sum = WeightVector::from_i64(&[357, 238, 170, 238, 595]).unwrap();
        match locate(&f, &sum) {
            CellLocation::InCone { cone, coeffs } => {
                assert_eq!(f.cones[cone].rays, (5, 6));
                assert_eq!(coeffs, (BigRational::one(), BigRational::one()));
            }
            other => panic!("unexpected {other:?}"),
        }
        let ones = WeightVector::from_i64(&[1, 1, 1, 1, 1]).unwrap();
        assert_eq!(locate(&f, &ones), CellLocation::Outside);
    }

    #[test]
    fn quotient_generators() {
        let tau = ints(&[147, 98, 60, 84, 210]);
        let p = quotient_generator(&tau, &ints(&[1, 0, 0, 0, 0]));
        // e1 = 2 p + 1 τ
        let back: Vec<BigInt> = p.iter().zip(&tau).map(|(a, b)| BigInt::from(2) * a + b).collect();
        assert_eq!(back, ints(&[1, 0, 0, 0, 0]));
    }
}

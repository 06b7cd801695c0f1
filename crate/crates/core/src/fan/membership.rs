//! Constructive (non-)membership in the local tropicalization.
//!
//! A weight vector off the splice fan is certified by a single node `v` and a
//! rational combination of its equations whose `w`-initial form is one
//! admissible monomial. The search follows the three-monomial rule: at `v`
//! some edge `e` must have `w·a_{v,e}` strictly below the values of two other
//! edges. Under a truncation (some leaf variables set to zero) the rule
//! relaxes according to how many admissible monomials at `v` are killed.
//!
//! [`monomial_in_span_oracle`] answers the same question by brute-force exact
//! linear algebra over all generators and serves as an independent check.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use super::{locate, splice_fan, CellLocation, FanError, SpliceFan};
use crate::arith::{clear_denominators, in_row_space, primitive, solve_square};
use crate::diagram::VertexId;
use crate::poly::{ExponentVector, Polynomial, WeightVector};
use crate::system::SpliceSystem;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MembershipError {
    #[error("weight vector must be strictly positive")]
    NotPositive,
    #[error("weight vector has length {got}, expected {expected}")]
    Length { got: usize, expected: usize },
    #[error("point location and certificate search disagree")]
    Inconsistent,
    #[error("truncation set must be a nonempty proper subset of the leaves")]
    BadTruncation,
    #[error(transparent)]
    Fan(#[from] FanError),
}

/// The set `L` of leaves whose variables are set to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncationContext {
    n: usize,
    leaves: BTreeSet<usize>,
}

impl TruncationContext {
    pub fn new(n: usize, leaves: impl IntoIterator<Item = usize>) -> Result<Self, MembershipError> {
        let leaves: BTreeSet<usize> = leaves.into_iter().collect();
        if leaves.is_empty() || leaves.len() >= n || leaves.iter().any(|&l| l >= n) {
            return Err(MembershipError::BadTruncation);
        }
        Ok(TruncationContext { n, leaves })
    }

    pub fn leaves(&self) -> &BTreeSet<usize> {
        &self.leaves
    }

    /// Coordinates that survive the projection, in order.
    pub fn surviving(&self) -> Vec<usize> {
        (0..self.n).filter(|i| !self.leaves.contains(i)).collect()
    }

    /// Drops the truncated coordinates.
    pub fn project<T: Clone>(&self, v: &[T]) -> Vec<T> {
        self.surviving().into_iter().map(|i| v[i].clone()).collect()
    }

    /// Re-inserts zeros at the truncated coordinates.
    pub fn lift(&self, v: &[BigRational]) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.n];
        for (&i, x) in self.surviving().iter().zip(v) {
            out[i] = x.clone();
        }
        out
    }
}

/// A witness that `w` lies outside the (truncated) local tropicalization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub node: VertexId,
    /// Adjacency position at `node` of the winning edge.
    pub edge: usize,
    /// `w·a_{v,e'}` for every incident edge; `None` where the monomial is
    /// killed by the truncation.
    pub values: Vec<Option<BigRational>>,
    /// Coefficients of the combination of the node's equations.
    pub coefficients: Vec<BigRational>,
    /// Exponent of the resulting initial monomial.
    pub monomial: ExponentVector,
}

impl Certificate {
    /// The certified polynomial `Σ_i c_i F_{v,i}` (truncated if requested).
    pub fn combination(&self, system: &SpliceSystem, trunc: Option<&TruncationContext>) -> Polynomial {
        let fam = system.family(self.node);
        let mut p = Polynomial::zero(system.n_vars());
        for (i, c) in self.coefficients.iter().enumerate() {
            if !c.is_zero() {
                p = p.add(&fam.equation(i).scale(c));
            }
        }
        match trunc {
            Some(t) => p.tau_truncate(t.leaves()),
            None => p,
        }
    }

    /// Recomputes the combination and checks its initial form is the
    /// claimed monomial.
    pub fn verify(&self, system: &SpliceSystem, w: &WeightVector, trunc: Option<&TruncationContext>) -> bool {
        let init = self.combination(system, trunc).initial_form(w);
        init.is_monomial() && init.terms()[0].1 == self.monomial
    }
}

/// Searches the nodes in declaration order for a certificate.
///
/// `w` has full length `n`; under a truncation its entries at the truncated
/// coordinates are ignored.
pub fn certificate_search(
    system: &SpliceSystem,
    w: &WeightVector,
    trunc: Option<&TruncationContext>,
) -> Option<Certificate> {
    system.families().iter().find_map(|fam| {
        let delta = fam.coweights.len();
        let killed: Vec<bool> = (0..delta)
            .map(|p| trunc.is_some_and(|t| fam.monomial(p).meets(t.leaves())))
            .collect();
        let n_killed = killed.iter().filter(|&&k| k).count();
        if n_killed == delta {
            return None;
        }
        let scaled: Vec<Option<BigInt>> = (0..delta)
            .map(|p| (!killed[p]).then(|| w.pair_scaled(&fam.monomial(p))))
            .collect();
        let surviving: Vec<usize> = (0..delta).filter(|&p| !killed[p]).collect();
        let e = *surviving.iter().min_by_key(|&&p| scaled[p].clone()).expect("nonempty");
        let min = scaled[e].clone().expect("surviving");
        // Edges whose rows are left out of the elimination.
        let dropped: Vec<usize> = match n_killed {
            0 => {
                let mut above: Vec<usize> =
                    surviving.iter().copied().filter(|&p| scaled[p].as_ref() > Some(&min)).collect();
                if above.len() < 2 {
                    return None;
                }
                above.sort_by_key(|&p| std::cmp::Reverse(scaled[p].clone()));
                above.truncate(2);
                above
            }
            1 => {
                let top = surviving.iter().copied().max_by_key(|&p| scaled[p].clone())?;
                if scaled[top].as_ref() == Some(&min) {
                    return None;
                }
                let k = (0..delta).find(|&p| killed[p]).expect("one killed");
                vec![top, k]
            }
            _ => {
                // Keep every surviving row and pad with killed rows until the
                // system is square.
                let need = delta - 2 - surviving.len();
                let mut rest: Vec<usize> = (0..delta).filter(|&p| killed[p]).collect();
                rest.drain(..need);
                rest
            }
        };
        // Tails must not reach the weight of the winning monomial.
        let tail_min = fam
            .tails
            .iter()
            .map(|t| match trunc {
                Some(tc) => t.tau_truncate(tc.leaves()),
                None => t.clone(),
            })
            .filter_map(|t| t.w_weight_scaled(w))
            .min();
        if tail_min.is_some_and(|m| m <= min) {
            return None;
        }
        let rows: Vec<usize> = (0..delta).filter(|p| !dropped.contains(p)).collect();
        let a: Vec<Vec<BigRational>> = rows.iter().map(|&p| fam.coefficients.rows[p].clone()).collect();
        let b: Vec<BigRational> =
            rows.iter().map(|&p| if p == e { BigRational::one() } else { BigRational::zero() }).collect();
        let coefficients = solve_square(&a, &b)?;
        let values = (0..delta).map(|p| (!killed[p]).then(|| w.pair(&fam.monomial(p)))).collect();
        Some(Certificate { node: fam.node, edge: e, values, coefficients, monomial: fam.monomial(e) })
    })
}

/// Decides by exact linear algebra whether some rational combination of
/// `generators` has a single monomial as `w`-initial form, and returns one
/// such monomial.
///
/// Candidates are tried by increasing weight; for a candidate `m*` every
/// lower-weight monomial and every other monomial of equal weight must cancel
/// while `m*` survives, which is a row-space non-membership test.
pub fn monomial_in_span_oracle(generators: &[Polynomial], w: &WeightVector) -> Option<ExponentVector> {
    let gens: Vec<&Polynomial> = generators.iter().filter(|g| !g.is_zero()).collect();
    if gens.is_empty() {
        return None;
    }
    let k = gens.len();
    // Integer coefficient columns per monomial.
    let scaled_gens: Vec<BTreeMap<Vec<u32>, BigInt>> = gens
        .iter()
        .map(|g| {
            let coeffs: Vec<BigRational> = g.terms().iter().map(|(c, _)| c.clone()).collect();
            let ints = clear_denominators(&coeffs);
            g.terms().iter().map(|(_, m)| m.0.clone()).zip(ints).collect()
        })
        .collect();
    let mut monomials: BTreeMap<Vec<u32>, Vec<BigInt>> = BTreeMap::new();
    for (i, g) in scaled_gens.iter().enumerate() {
        for (m, c) in g {
            monomials.entry(m.clone()).or_insert_with(|| vec![BigInt::zero(); k])[i] = c.clone();
        }
    }
    let mut by_weight: BTreeMap<BigInt, Vec<(ExponentVector, Vec<BigInt>)>> = BTreeMap::new();
    for (m, col) in monomials {
        let e = ExponentVector(m);
        by_weight.entry(w.pair_scaled(&e)).or_default().push((e, col));
    }
    let mut lower: Vec<Vec<BigInt>> = Vec::new();
    for (_, mut group) in by_weight {
        group.sort_by(|a, b| b.0.cmp_grlex(&a.0));
        for t in 0..group.len() {
            let mut rows = lower.clone();
            rows.extend(group.iter().enumerate().filter(|&(s, _)| s != t).map(|(_, g)| g.1.clone()));
            if !in_row_space(&rows, &group[t].1) {
                return Some(group[t].0.clone());
            }
        }
        lower.extend(group.into_iter().map(|g| g.1));
        if crate::arith::rank_int(lower.clone()) == k {
            return None;
        }
    }
    None
}

/// Initial forms of all equations at `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InitialIdeal {
    pub generators: Vec<Polynomial>,
    pub monomial_free: bool,
}

pub fn initial_ideal_generators(system: &SpliceSystem, w: &WeightVector) -> InitialIdeal {
    let generators: Vec<Polynomial> = system.polynomials().iter().map(|f| f.initial_form(w)).collect();
    let monomial_free = !generators.iter().any(Polynomial::is_monomial)
        && monomial_in_span_oracle(&generators, w).is_none();
    InitialIdeal { generators, monomial_free }
}

/// Result of [`membership`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    In(CellLocation),
    Out(Certificate),
}

fn check_query(system: &SpliceSystem, w: &WeightVector) -> Result<(), MembershipError> {
    if w.len() != system.n_vars() {
        return Err(MembershipError::Length { got: w.len(), expected: system.n_vars() });
    }
    if !w.is_strictly_positive() {
        return Err(MembershipError::NotPositive);
    }
    Ok(())
}

/// Decides membership of a strictly positive `w` using a precomputed fan.
pub fn membership_in(system: &SpliceSystem, fan: &SpliceFan, w: &WeightVector) -> Result<Membership, MembershipError> {
    check_query(system, w)?;
    let cell = locate(fan, w);
    let cert = certificate_search(system, w, None);
    match (cell.is_inside(), cert) {
        (true, None) => Ok(Membership::In(cell)),
        (false, Some(c)) => Ok(Membership::Out(c)),
        _ => Err(MembershipError::Inconsistent),
    }
}

/// Decides membership of a strictly positive `w` in the local tropicalization.
pub fn membership(system: &SpliceSystem, w: &WeightVector) -> Result<Membership, MembershipError> {
    let fan = splice_fan(system.diagram())?;
    membership_in(system, &fan, w)
}

/// Boundary tropicalization for a truncation set `L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundaryTrop {
    /// A single primitive ray in the coordinates outside `L`.
    Ray(Vec<BigInt>),
    Empty,
}

/// For `L = {λ}`: the primitive projection of `w_u`, `u` the node next to
/// `λ`. For `|L| ≥ 2`: empty.
pub fn boundary_trop(system: &SpliceSystem, trunc: &TruncationContext) -> BoundaryTrop {
    if trunc.leaves().len() >= 2 {
        return BoundaryTrop::Empty;
    }
    let d = system.diagram();
    let lam = *trunc.leaves().iter().next().expect("nonempty");
    let u = d.neighbor(lam, 0);
    BoundaryTrop::Ray(primitive(&trunc.project(&d.node_weight_vector(u).entries)))
}

/// A random strictly positive rational vector of length `n` with small
/// numerators and denominators.
pub fn random_positive_vector<R: Rng>(n: usize, rng: &mut R) -> Vec<BigRational> {
    (0..n)
        .map(|_| BigRational::new(rng.gen_range(1..=40i64).into(), rng.gen_range(1..=6i64).into()))
        .collect()
}

/// Re-derives [`boundary_trop`] through certificates: the computed ray (if
/// any) admits no certificate, while `samples` random positive projected
/// vectors off the ray all do.
pub fn boundary_cross_check<R: Rng>(
    system: &SpliceSystem,
    trunc: &TruncationContext,
    samples: usize,
    rng: &mut R,
) -> bool {
    let m = trunc.surviving().len();
    let ray = boundary_trop(system, trunc);
    let lift = |v: &[BigRational]| WeightVector::new(trunc.lift(v)).expect("positive");
    if let BoundaryTrop::Ray(r) = &ray {
        let rv: Vec<BigRational> = r.iter().map(|x| BigRational::from_integer(x.clone())).collect();
        if certificate_search(system, &lift(&rv), Some(trunc)).is_some() {
            return false;
        }
    }
    (0..samples).all(|_| {
        let v = random_positive_vector(m, rng);
        if let BoundaryTrop::Ray(r) = &ray {
            if super::positive_multiple(&v, r).is_some() {
                return true;
            }
        }
        let w = lift(&v);
        match certificate_search(system, &w, Some(trunc)) {
            Some(c) => c.verify(system, &w, Some(trunc)),
            None => false,
        }
    })
}

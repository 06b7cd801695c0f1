//! Numerical smoothness check of initial varieties on the torus.
//!
//! For a weight `w` in the relative interior of a cell, the initial forms at
//! each node are linear relations among the node's surviving admissible
//! monomials. A random kernel vector fixes their ratios, which is a binomial
//! system solved by [`crate::torus`]. At the resulting torus point the
//! toric Jacobian `(z_j ∂_j in_w F)` should have full rank.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::embed_vertex;
use crate::arith::{kernel_rational, rational_to_f64};
use crate::diagram::VertexId;
use crate::poly::{Polynomial, WeightVector};
use crate::system::SpliceSystem;
use crate::torus::{diagonalize, TorusError};

/// Singular value ratio below which the Jacobian counts as rank deficient.
pub const RATIO_FLOOR: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmokeError {
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error("initial form at node {node} has a monomial-free kernel coordinate")]
    DegenerateKernel { node: String },
    #[error("Jacobian rank deficient at cell {cell}: singular value ratio {ratio:e}")]
    Singular { cell: String, ratio: f64 },
}

/// Outcome of [`smoothness_smoke`].
#[derive(Clone, Debug, PartialEq)]
pub struct SmokeReport {
    pub cells: Vec<String>,
    pub points: usize,
    pub min_ratio: f64,
}

/// Cells probed: every node ray and every 2-cone. Leaf rays lie on the
/// boundary of the positive orthant and are not probed.
fn cells(system: &SpliceSystem) -> Vec<(String, Vec<BigRational>)> {
    let d = system.diagram();
    let mut out: Vec<(String, Vec<BigRational>)> =
        d.nodes().map(|v| (d.label(v).to_string(), embed_vertex(d, v))).collect();
    for &(a, b) in d.edges() {
        let w = embed_vertex(d, a).into_iter().zip(embed_vertex(d, b)).map(|(x, y)| x + y).collect();
        out.push((format!("{}-{}", d.label(a), d.label(b)), w));
    }
    out
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU))
}

/// A torus point on the initial variety at `w`.
fn torus_point(
    system: &SpliceSystem,
    initial: &[(VertexId, Vec<Polynomial>)],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Complex64>, SmokeError> {
    let n = system.n_vars();
    let mut exps: Vec<Vec<i64>> = Vec::new();
    let mut beta: Vec<Complex64> = Vec::new();
    for (v, forms) in initial {
        let mut monos: Vec<_> = forms.iter().flat_map(|f| f.monomials().cloned()).collect();
        monos.sort();
        monos.dedup();
        let rows: Vec<Vec<BigRational>> = forms
            .iter()
            .map(|f| monos.iter().map(|m| f.coefficient(m)).collect())
            .collect();
        let basis = kernel_rational(&rows, monos.len());
        let weights: Vec<Complex64> = basis.iter().map(|_| random_complex(rng)).collect();
        let kappa: Vec<Complex64> = (0..monos.len())
            .map(|j| basis.iter().zip(&weights).map(|(b, c)| c * rational_to_f64(&b[j])).sum())
            .collect();
        if kappa.iter().any(|k| k.norm() < 1e-12) {
            return Err(SmokeError::DegenerateKernel { node: system.diagram().label(*v).to_string() });
        }
        for j in 1..monos.len() {
            let row = (0..n)
                .map(|i| i64::from(monos[j].0[i]) - i64::from(monos[0].0[i]))
                .collect();
            exps.push(row);
            beta.push(kappa[j] / kappa[0]);
        }
    }
    let form = diagonalize(&exps)?;
    let branches: Vec<i128> = form.diag.iter().map(|&d| rng.gen_range(0..d)).collect();
    let free: Vec<Complex64> = (form.rank()..n)
        .map(|_| Complex64::new(rng.gen_range(-0.2..0.2), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    Ok(form.solve(&beta, &branches, &free)?)
}

/// Ratio of the smallest to the largest singular value of the row-normalized
/// toric Jacobian of `forms` at `z`.
fn jacobian_ratio(forms: &[Polynomial], z: &[Complex64]) -> f64 {
    let n = z.len();
    let mut m = DMatrix::<Complex64>::zeros(forms.len(), n);
    for (i, f) in forms.iter().enumerate() {
        for (j, zj) in z.iter().enumerate() {
            m[(i, j)] = zj * f.derivative(j).evaluate_complex(z);
        }
        let norm = m.row(i).norm();
        if norm > 0.0 {
            for j in 0..n {
                m[(i, j)] /= norm;
            }
        }
    }
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

/// Samples `samples` torus points on the initial variety of every probed cell
/// and checks the Jacobian of the initial forms has full rank there.
pub fn smoothness_smoke(system: &SpliceSystem, samples: usize, seed: u64) -> Result<SmokeReport, SmokeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SmokeReport { cells: Vec::new(), points: 0, min_ratio: f64::INFINITY };
    for (name, w) in cells(system) {
        debug_assert!(w.iter().all(|x| *x > BigRational::zero()));
        let w = WeightVector::new(w).expect("node embeddings are positive");
        let initial: Vec<(VertexId, Vec<Polynomial>)> = system
            .families()
            .iter()
            .map(|fam| (fam.node, (0..fam.n_equations()).map(|i| fam.equation(i).initial_form(&w)).collect()))
            .collect();
        let forms: Vec<Polynomial> = initial.iter().flat_map(|(_, f)| f.iter().cloned()).collect();
        for _ in 0..samples {
            let z = torus_point(system, &initial, &mut rng)?;
            let ratio = jacobian_ratio(&forms, &z);
            report.min_ratio = report.min_ratio.min(ratio);
            report.points += 1;
            if ratio <= RATIO_FLOOR {
                return Err(SmokeError::Singular { cell: name, ratio });
            }
        }
        report.cells.push(name);
    }
    Ok(report)
}

//! Acceptance report: one line per criterion, exit status 1 if any fails.

mod common;

use std::collections::BTreeSet;
use std::thread;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{dot, q};
use splice_core::arith::is_primitive;
use splice_core::diagram::{example_d1, star, SpliceDiagram};
use splice_core::endcurve::{self, rational_curve};
use splice_core::fan::membership::{
    boundary_cross_check, boundary_trop, certificate_search, initial_ideal_generators, monomial_in_span_oracle,
    random_positive_vector, BoundaryTrop, TruncationContext,
};
use splice_core::fan::{check_balancing, locate, smoothness_smoke, splice_fan, SmokeError};
use splice_core::poly::{ExponentVector, Polynomial, WeightVector};
use splice_core::random::random_diagram;
use splice_core::recover::{isomorphic, recover, RecoverError};
use splice_core::system::{example_d1_system, minimal_system, CoefficientMatrix, SystemBuilder};

const DICHOTOMY_DIAGRAMS: usize = 200;
const QUERIES_PER_DIAGRAM: usize = 50;
const BOUNDARY_SAMPLES: usize = 50;
const RECOVERY_DIAGRAMS: usize = 100;
const SMOKE_DIAGRAMS: usize = 20;
const SMOKE_SAMPLES: usize = 10;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Diagrams cycling through 3 to 8 leaves and 1 to 3 nodes, seeded by index.
fn generated(count: usize, coprime: bool) -> Vec<SpliceDiagram> {
    let mut out = Vec::with_capacity(count);
    for i in 0u64.. {
        if out.len() == count {
            break;
        }
        let leaves = 3 + (i % 6) as usize;
        let nodes = 1 + ((i / 6) % 3) as usize;
        if leaves < nodes + 2 {
            continue;
        }
        if let Ok(d) = random_diagram(leaves, nodes, i, coprime) {
            out.push(d);
        }
    }
    out
}

/// Runs `f` on every item across the available cores and collects the
/// first error in input order.
fn par_check<T: Sync, F>(items: &[T], f: F) -> Result<(), String>
where
    F: Fn(usize, &T) -> Result<(), String> + Sync,
{
    let workers = thread::available_parallelism().map_or(4, |n| n.get()).min(items.len().max(1));
    let results: Vec<Result<(), String>> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let f = &f;
                s.spawn(move || {
                    (w..items.len()).step_by(workers).map(|i| (i, f(i, &items[i]))).find(|(_, r)| r.is_err())
                })
            })
            .collect();
        handles
            .into_iter()
            .filter_map(|h| h.join().expect("worker panicked"))
            .map(|(_, r)| r)
            .collect()
    });
    results.into_iter().next().unwrap_or(Ok(()))
}

fn criterion_1() -> Outcome {
    let d = example_d1();
    let (u, v) = (d.node("u").unwrap(), d.node("v").unwrap());
    ensure(d.total_weight(u) == 294.into(), || format!("d_u = {}", d.total_weight(u)))?;
    ensure(d.total_weight(v) == 770.into(), || format!("d_v = {}", d.total_weight(v)))?;
    ensure(d.linking_number(u, v) == 420.into(), || format!("l_uv = {}", d.linking_number(u, v)))?;
    let leaves = |names: &[&str]| names.iter().map(|n| d.leaf(n).unwrap()).collect::<Vec<_>>();
    let (far_u, far_v) = (leaves(&["l3", "l4", "l5"]), leaves(&["l1", "l2"]));
    let a = d.semigroup_decompose(u, d.toward(u, v)).ok_or("no decomposition at u")?;
    let gens: Vec<BigInt> = far_u.iter().map(|&l| d.reduced_linking_number(u, l)).collect();
    ensure(gens == ints(&[10, 14, 35]), || format!("generators at u {gens:?}"))?;
    let coeffs: Vec<u32> = far_u.iter().map(|&l| a.coeffs[l]).collect();
    ensure(coeffs == [0, 1, 1], || format!("decomposition at u {coeffs:?}"))?;
    let b = d.semigroup_decompose(v, d.toward(v, u)).ok_or("no decomposition at v")?;
    let gens: Vec<BigInt> = far_v.iter().map(|&l| d.reduced_linking_number(v, l)).collect();
    ensure(gens == ints(&[3, 2]), || format!("generators at v {gens:?}"))?;
    let coeffs: Vec<u32> = far_v.iter().map(|&l| b.coeffs[l]).collect();
    ensure(coeffs == [1, 4], || format!("decomposition at v {coeffs:?}"))?;
    ensure(d.node_weight_vector(u).entries == ints(&[147, 98, 60, 84, 210]), || "w_u".into())?;
    ensure(d.node_weight_vector(v).entries == ints(&[210, 140, 110, 154, 385]), || "w_v".into())?;
    let s = example_d1_system(&d).map_err(|e| e.to_string())?;
    let wu = WeightVector::from_ints(&d.node_weight_vector(u).entries).unwrap();
    let z1z2_4 = ExponentVector(vec![1, 4, 0, 0, 0]);
    for (i, c) in [(0, 1), (1, 33)] {
        let f = s.equation(v, i).unwrap();
        let want = f.sub(&Polynomial::monomial(q(c), z1z2_4.clone()));
        let got = f.initial_form(&wu);
        ensure(got == want, || format!("in_wu(f_v{}) = {got}", i + 1))?;
    }
    Ok("d_u=294 d_v=770 l_uv=420, decompositions, w_u, w_v and both initial forms exact".into())
}

fn criterion_2() -> Outcome {
    let d = example_d1();
    let s = example_d1_system(&d).map_err(|e| e.to_string())?;
    let r = endcurve::root(&d, d.leaf("l1").unwrap()).map_err(|e| e.to_string())?;
    ensure(r.linking_numbers() == ints(&[49, 30, 42, 105]), || format!("{:?}", r.linking_numbers()))?;
    ensure(r.g().is_one(), || format!("g = {}", r.g()))?;
    let ecs = endcurve::end_curve_system(&s, &r);
    let bin = endcurve::binomial_reduce(&ecs, &d).map_err(|e| e.to_string())?;
    let shown: BTreeSet<String> = bin.polynomials().iter().map(|p| p.to_string()).collect();
    for want in ["z4^5 + 32*z5^2", "z3^7 - 2187*z5^2"] {
        ensure(shown.contains(want), || format!("binomials {shown:?} lack {want}"))?;
    }
    let paper = rational_curve(&r, &[q(-1), q(3), q(-2), q(1)]);
    ensure(endcurve::verify_parameterization(&paper, &ecs), || "(-t^49, 3t^30, -2t^42, t^105) fails".into())?;
    let curve = endcurve::parameterize(&ecs, &r).map_err(|e| e.to_string())?;
    let exact = curve.components[0].exact.clone();
    ensure(exact == Some(vec![q(-1), q(3), q(-2), q(1)]), || format!("solved {exact:?}"))?;
    Ok("exponents (49,30,42,105), g=1, binomials and (-t^49, 3t^30, -2t^42, t^105) verified exactly".into())
}

fn criterion_3() -> Outcome {
    let d = example_d1();
    let f = splice_fan(&d).map_err(|e| e.to_string())?;
    ensure(f.rays.len() == 7 && f.cones.len() == 6, || format!("{} rays {} cones", f.rays.len(), f.cones.len()))?;
    ensure(f.cones.iter().all(|c| c.multiplicity.is_one()), || "multiplicity other than 1".into())?;
    for v in d.nodes() {
        ensure(is_primitive(&f.rays[v].vector), || format!("ray {} not primitive", d.label(v)))?;
    }
    Ok("7 rays, 6 cones, all multiplicities 1, node rays primitive".into())
}

fn on_fan_query<R: Rng>(d: &SpliceDiagram, rng: &mut R) -> WeightVector {
    let f = splice_fan(d).unwrap();
    let rat = |rng: &mut R| BigRational::new(rng.gen_range(1..=30i64).into(), rng.gen_range(1..=7i64).into());
    let scale = |v: &[BigInt], s: &BigRational| -> Vec<BigRational> {
        v.iter().map(|x| s * BigRational::from_integer(x.clone())).collect()
    };
    let n_nodes = d.nodes().len();
    let pick = rng.gen_range(0..n_nodes + f.cones.len());
    let w = if pick < n_nodes {
        scale(&f.rays[d.n_leaves() + pick].vector, &rat(rng))
    } else {
        let (a, b) = f.cones[pick - n_nodes].rays;
        let (x, y) = (scale(&f.rays[a].vector, &rat(rng)), scale(&f.rays[b].vector, &rat(rng)));
        x.iter().zip(&y).map(|(p, q)| p + q).collect()
    };
    WeightVector::new(w).unwrap()
}

fn criterion_4(diagrams: &[SpliceDiagram]) -> Outcome {
    par_check(diagrams, |i, d| {
        let s = minimal_system(d).map_err(|e| e.to_string())?;
        let f = splice_fan(d).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        for k in 0..QUERIES_PER_DIAGRAM {
            let w = if k % 2 == 0 {
                on_fan_query(d, &mut rng)
            } else {
                WeightVector::new(random_positive_vector(d.n_leaves(), &mut rng)).unwrap()
            };
            let inside = locate(&f, &w).is_inside();
            ensure(k % 2 == 1 || inside, || format!("diagram {i}: sampled fan point not located"))?;
            let cert = certificate_search(&s, &w, None);
            ensure(inside == cert.is_none(), || format!("diagram {i} query {k}: locate and certificate agree"))?;
            if let Some(c) = &cert {
                ensure(c.verify(&s, &w, None), || format!("diagram {i} query {k}: certificate does not verify"))?;
            }
            let oracle = monomial_in_span_oracle(&initial_ideal_generators(&s, &w).generators, &w);
            ensure(oracle.is_some() == cert.is_some(), || format!("diagram {i} query {k}: oracle disagrees"))?;
        }
        Ok(())
    })?;
    Ok(format!(
        "{} diagrams x {} queries (half on the fan), 0 disagreements",
        diagrams.len(),
        QUERIES_PER_DIAGRAM
    ))
}

fn criterion_5(diagrams: &[SpliceDiagram]) -> Outcome {
    par_check(diagrams, |i, d| {
        let s = minimal_system(d).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + i as u64);
        let n = d.n_leaves();
        for l in d.leaves() {
            let t = TruncationContext::new(n, [l]).map_err(|e| e.to_string())?;
            let rooted = endcurve::root(d, l).map_err(|e| e.to_string())?;
            let ecs = endcurve::end_curve_system(&s, &rooted);
            let g = rooted.g();
            let exps: Vec<BigInt> = if g <= BigInt::from(64) {
                endcurve::parameterize(&ecs, &rooted).map_err(|e| format!("diagram {i}: {e}"))?.exponents
            } else {
                rooted.linking_numbers().iter().map(|x| x / &g).collect()
            };
            ensure(boundary_trop(&s, &t) == BoundaryTrop::Ray(exps), || format!("diagram {i} leaf {l}: ray"))?;
            ensure(boundary_cross_check(&s, &t, 0, &mut rng), || format!("diagram {i} leaf {l}: ray certified"))?;
            for m in d.leaves().filter(|&m| m > l) {
                let t2 = TruncationContext::new(n, [l, m]).map_err(|e| e.to_string())?;
                ensure(boundary_trop(&s, &t2) == BoundaryTrop::Empty, || format!("diagram {i}: {l},{m} nonempty"))?;
                ensure(boundary_cross_check(&s, &t2, BOUNDARY_SAMPLES, &mut rng), || {
                    format!("diagram {i}: truncation {{{l},{m}}} has an uncertified vector")
                })?;
            }
        }
        Ok(())
    })?;
    Ok(format!(
        "{} diagrams: every 2-leaf truncation certified at {} vectors, every 1-leaf ray equals the end-curve exponents",
        diagrams.len(),
        BOUNDARY_SAMPLES
    ))
}

fn criterion_6(diagrams: &[SpliceDiagram]) -> Outcome {
    let mut perturbed = 0;
    for (i, d) in diagrams.iter().chain([&example_d1()]).enumerate() {
        let f = splice_fan(d).map_err(|e| e.to_string())?;
        ensure(check_balancing(&f), || format!("diagram {i} unbalanced"))?;
        for c in 0..f.cones.len() {
            for delta in [1i64, -1] {
                let mut g = f.clone();
                g.cones[c].multiplicity += delta;
                if delta < 0 && !g.cones[c].multiplicity.is_positive() {
                    continue;
                }
                perturbed += 1;
                ensure(!check_balancing(&g), || format!("diagram {i} cone {c} {delta:+} still balanced"))?;
            }
        }
    }
    Ok(format!("{} fans balanced, {perturbed} single perturbations all unbalanced", diagrams.len() + 1))
}

fn criterion_7(coprime: &[SpliceDiagram]) -> Outcome {
    let d1 = example_d1();
    let mut refused = 0;
    for (i, d) in coprime.iter().chain([&d1]).enumerate() {
        let f = splice_fan(d).map_err(|e| e.to_string())?;
        let r = recover(&f).map_err(|e| format!("diagram {i}: {e}"))?;
        ensure(isomorphic(&r, d), || format!("diagram {i} recovered a different diagram"))?;
        for c in 0..f.cones.len() {
            let mut g = f.clone();
            g.cones[c].multiplicity = BigInt::from(2 + (i + c) % 3);
            ensure(matches!(recover(&g), Err(RecoverError::NonCoprimeFan(_))), || {
                format!("diagram {i} cone {c}: multiplicity not refused")
            })?;
            refused += 1;
        }
    }
    Ok(format!("{} coprime diagrams and D1 round-trip, {refused} non-unit fans refused", coprime.len()))
}

fn invariants(d: &SpliceDiagram) -> Result<(), String> {
    let all = 0..d.n_vertices();
    for u in all.clone() {
        for v in all.clone() {
            ensure(d.linking_number(u, v) == d.linking_number(v, u), || "symmetry".into())?;
            for w in all.clone() {
                if d.is_node(u) && d.on_geodesic(u, v, w) {
                    ensure(
                        d.linking_number(w, u) * d.linking_number(u, v) == d.linking_number(w, v) * d.total_weight(u),
                        || "geodesic identity".into(),
                    )?;
                }
            }
        }
    }
    for u in d.nodes() {
        let wu = d.node_weight_vector(u).entries;
        for v in d.nodes() {
            let l = d.linking_number(u, v);
            let cs = d.total_weight(u) * d.total_weight(v);
            ensure(if u == v { cs == &l * &l } else { cs > &l * &l }, || "Cauchy-Schwarz".into())?;
            for w in d.nodes() {
                let lhs = d.linking_number(u, v) * d.linking_number(u, w);
                let rhs = d.total_weight(u) * d.linking_number(v, w);
                ensure(lhs <= rhs && (lhs == rhs) == d.on_geodesic(u, v, w), || "hypermetric".into())?;
            }
            for pos in 0..d.valency(v) {
                let a = d.semigroup_decompose(v, pos).ok_or("semigroup")?;
                if u == v {
                    ensure(dot(&wu, &a.coeffs) == d.total_weight(v), || "co-weight pairing".into())?;
                }
                let pairing = dot(&wu, &a.coeffs);
                let on_path = u != v && d.toward(v, u) == pos;
                ensure(pairing >= l && (pairing == l) == !on_path, || "key inequality".into())?;
            }
        }
    }
    Ok(())
}

fn criterion_8(diagrams: &[SpliceDiagram]) -> Outcome {
    par_check(diagrams, |i, d| invariants(d).map_err(|e| format!("diagram {i}: {e}")))?;
    invariants(&example_d1())?;
    Ok(format!("{} diagrams, all vertex triples", diagrams.len() + 1))
}

fn criterion_9(diagrams: &[SpliceDiagram]) -> Outcome {
    let d1 = example_d1();
    let mut systems = vec![example_d1_system(&d1).map_err(|e| e.to_string())?];
    for d in diagrams.iter().take(SMOKE_DIAGRAMS) {
        systems.push(minimal_system(d).map_err(|e| e.to_string())?);
    }
    let mut cells = 0;
    let mut worst = f64::INFINITY;
    for (i, s) in systems.iter().enumerate() {
        let r = smoothness_smoke(s, SMOKE_SAMPLES, 9000 + i as u64).map_err(|e| format!("system {i}: {e}"))?;
        ensure(r.min_ratio > 1e-9, || format!("system {i}: ratio {:e}", r.min_ratio))?;
        ensure(r.points >= r.cells.len() * SMOKE_SAMPLES, || format!("system {i}: too few points"))?;
        cells += r.cells.len();
        worst = worst.min(r.min_ratio);
    }
    let broken = star(&[2, 3, 5, 7]).map_err(|e| e.to_string())?;
    let m = CoefficientMatrix::from_i64(4, &[&[1, 1], &[1, 0], &[0, 1], &[0, 1]]);
    let s = SystemBuilder::new(&broken).coefficients(m).without_hamm_check().build().map_err(|e| e.to_string())?;
    let flagged = matches!(smoothness_smoke(&s, SMOKE_SAMPLES, 1), Err(SmokeError::Singular { .. } | SmokeError::DegenerateKernel { .. }));
    ensure(flagged, || "Hamm-broken system not flagged".into())?;
    Ok(format!(
        "{} systems, {cells} cells x {SMOKE_SAMPLES} points, min singular-value ratio {worst:.3e} > 1e-9, Hamm-broken system flagged",
        systems.len()
    ))
}

fn main() {
    let diagrams = generated(DICHOTOMY_DIAGRAMS, false);
    let coprime = generated(RECOVERY_DIAGRAMS, true);
    let criteria: Vec<(usize, Outcome)> = vec![
        (1, criterion_1()),
        (2, criterion_2()),
        (3, criterion_3()),
        (4, criterion_4(&diagrams)),
        (5, criterion_5(&diagrams)),
        (6, criterion_6(&diagrams)),
        (7, criterion_7(&coprime)),
        (8, criterion_8(&diagrams)),
        (9, criterion_9(&diagrams)),
    ];
    let mut failed = 0;
    for (n, outcome) in criteria {
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n}: FAIL {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

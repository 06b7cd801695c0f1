//! Recovery of a coprime splice diagram from its weighted splice fan.
//!
//! The fan's rays and 2-cones form a tree isomorphic to the diagram. An
//! end-node `u` (a node ray next to exactly one other node ray `v`) reads its
//! weights off its own ray: the gcd of its leaf entries is `d_{u,v}` and their
//! lcm is the product of all weights at `u`. Pruning the leaves of `u` turns
//! `u` into a leaf, and the remaining node rays are mapped to the smaller fan
//! by solving `A·x = w` with the [`PruneMatrix`] `A`. The recursion ends at a
//! star, whose weights are gcds of complementary entries.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::{gcd_all, lcm_all};
use crate::diagram::{DiagramError, DiagramSpec, EdgeSpec, SpliceDiagram, VertexId};
use crate::fan::{splice_fan, FanError, FanInput, SpliceFan};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecoverError {
    #[error("malformed fan: {0}")]
    InvalidFan(String),
    #[error("fan has a cone of multiplicity {0}; only coprime fans can be recovered")]
    NonCoprimeFan(BigInt),
    #[error("pruning solve failed: {0}")]
    SolveFailed(String),
    #[error("vector is not the weight vector of a coprime star: {0}")]
    NotRealizable(String),
    #[error("recovered diagram does not reproduce the fan: {0}")]
    VerificationFailed(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Fan(#[from] FanError),
}

/// The `n × (n - s + 1)` matrix relating node rays before and after pruning
/// the `s` leaves of an end-node.
///
/// Column 0 carries `ℓ_{uλ_i}/d_{u,v}` at the pruned coordinates; the other
/// columns are the identity on the surviving coordinates, in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PruneMatrix {
    n: usize,
    pruned: Vec<(usize, BigInt)>,
    surviving: Vec<usize>,
}

impl PruneMatrix {
    /// `pruned`: coordinates and their column-0 entries.
    pub fn new(n: usize, pruned: Vec<(usize, BigInt)>) -> Self {
        let gone: BTreeSet<usize> = pruned.iter().map(|(i, _)| *i).collect();
        let surviving = (0..n).filter(|i| !gone.contains(i)).collect();
        PruneMatrix { n, pruned, surviving }
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.surviving.len() + 1
    }

    pub fn surviving(&self) -> &[usize] {
        &self.surviving
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        let mut m = vec![vec![BigInt::zero(); self.n_cols()]; self.n];
        for (i, e) in &self.pruned {
            m[*i][0] = e.clone();
        }
        for (j, &i) in self.surviving.iter().enumerate() {
            m[i][j + 1] = BigInt::one();
        }
        m
    }

    pub fn apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.n];
        for (i, e) in &self.pruned {
            out[*i] = e * &x[0];
        }
        for (j, &i) in self.surviving.iter().enumerate() {
            out[i] = x[j + 1].clone();
        }
        out
    }

    /// The integral `x` with `A·x = w`, if any.
    pub fn solve(&self, w: &[BigInt]) -> Option<Vec<BigInt>> {
        let (i0, e0) = self.pruned.first()?;
        let (x0, r) = w[*i0].div_rem(e0);
        if !r.is_zero() {
            return None;
        }
        let mut x = vec![x0];
        x.extend(self.surviving.iter().map(|&i| w[i].clone()));
        (self.apply(&x) == w).then_some(x)
    }
}

/// Weights of a coprime star from its node weight vector: each weight is the
/// gcd of the other entries.
fn star_weights(w: &[BigInt]) -> Result<Vec<BigInt>, RecoverError> {
    if w.len() < 3 {
        return Err(RecoverError::NotRealizable("a star needs at least three leaves".into()));
    }
    if w.iter().any(|x| !x.is_positive()) {
        return Err(RecoverError::NotRealizable("entries must be positive".into()));
    }
    let d: Vec<BigInt> = (0..w.len())
        .map(|i| gcd_all(w.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| x)))
        .collect();
    for i in 0..d.len() {
        let link: BigInt = d.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| x).product();
        if link != w[i] {
            return Err(RecoverError::NotRealizable(format!("entry {i} is {} but the weights give {link}", w[i])));
        }
        if d[i + 1..].iter().any(|y| !d[i].gcd(y).is_one()) {
            return Err(RecoverError::NotRealizable("recovered weights are not pairwise coprime".into()));
        }
    }
    Ok(d)
}

fn to_u64(x: &BigInt) -> Result<u64, RecoverError> {
    x.to_u64().ok_or_else(|| RecoverError::NotRealizable(format!("weight {x} out of range")))
}

/// The star on leaves `l1, …` with node `u` whose node weight vector is `w`.
pub fn recover_star(w: &[BigInt]) -> Result<SpliceDiagram, RecoverError> {
    let d = star_weights(w)?;
    let weights: Vec<u64> = d.iter().map(to_u64).collect::<Result<_, _>>()?;
    Ok(crate::diagram::star(&weights)?)
}

/// Fan data during recovery, keyed by labels.
struct Stage {
    /// Leaf label of each coordinate.
    coords: Vec<String>,
    nodes: BTreeMap<String, Vec<BigInt>>,
    link: BTreeMap<String, BTreeSet<String>>,
}

fn validate(fan: &FanInput) -> Result<Stage, RecoverError> {
    let bad = |m: String| RecoverError::InvalidFan(m);
    let n = fan.n;
    let mut coords: Vec<Option<String>> = vec![None; n];
    let mut nodes = BTreeMap::new();
    let mut labels = BTreeSet::new();
    for ray in &fan.rays {
        if !labels.insert(ray.label.clone()) {
            return Err(bad(format!("duplicate ray label {}", ray.label)));
        }
        if ray.vector.len() != n {
            return Err(bad(format!("ray {} has length {}", ray.label, ray.vector.len())));
        }
        let nonzero: Vec<usize> = (0..n).filter(|&i| !ray.vector[i].is_zero()).collect();
        if nonzero.len() == 1 && ray.vector[nonzero[0]].is_one() {
            let slot = &mut coords[nonzero[0]];
            if slot.is_some() {
                return Err(bad(format!("two unit rays on coordinate {}", nonzero[0])));
            }
            *slot = Some(ray.label.clone());
        } else if ray.vector.iter().all(Signed::is_positive) {
            if !gcd_all(&ray.vector).is_one() {
                return Err(bad(format!("ray {} is not primitive", ray.label)));
            }
            nodes.insert(ray.label.clone(), ray.vector.clone());
        } else {
            return Err(bad(format!("ray {} is neither a unit ray nor strictly positive", ray.label)));
        }
    }
    let coords: Vec<String> = coords
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| bad(format!("no unit ray on coordinate {i}"))))
        .collect::<Result<_, _>>()?;
    if nodes.is_empty() {
        return Err(bad("no node rays".into()));
    }
    let mut link: BTreeMap<String, BTreeSet<String>> = labels.iter().map(|l| (l.clone(), BTreeSet::new())).collect();
    for cone in &fan.cones {
        if !cone.multiplicity.is_one() {
            return Err(RecoverError::NonCoprimeFan(cone.multiplicity.clone()));
        }
        let (a, b) = cone.rays;
        let (Some(ra), Some(rb)) = (fan.rays.get(a), fan.rays.get(b)) else {
            return Err(bad("cone refers to a missing ray".into()));
        };
        if a == b || !link.get_mut(&ra.label).expect("label").insert(rb.label.clone()) {
            return Err(bad(format!("repeated cone {}-{}", ra.label, rb.label)));
        }
        link.get_mut(&rb.label).expect("label").insert(ra.label.clone());
    }
    if fan.cones.len() + 1 != fan.rays.len() {
        return Err(bad("the link of the fan is not a tree".into()));
    }
    let mut seen = BTreeSet::from([coords[0].clone()]);
    let mut stack = vec![coords[0].clone()];
    while let Some(x) = stack.pop() {
        for y in &link[&x] {
            if seen.insert(y.clone()) {
                stack.push(y.clone());
            }
        }
    }
    if seen.len() != labels.len() {
        return Err(bad("the link of the fan is not connected".into()));
    }
    for c in &coords {
        if link[c].len() != 1 || !nodes.contains_key(link[c].iter().next().expect("one neighbor")) {
            return Err(bad(format!("leaf ray {c} must lie in exactly one cone, with a node ray")));
        }
    }
    Ok(Stage { coords, nodes, link })
}

/// Reconstructs the unique coprime diagram whose splice fan is `fan`, and
/// checks that it reproduces the fan exactly.
pub fn recover(fan: &FanInput) -> Result<SpliceDiagram, RecoverError> {
    let mut st = validate(fan)?;
    // weights[(a, b)]: weight at node a on the edge toward b.
    let mut weights: BTreeMap<(String, String), BigInt> = BTreeMap::new();
    while st.nodes.len() > 1 {
        let is_node = |x: &String| st.nodes.contains_key(x);
        let u = st
            .nodes
            .keys()
            .find(|u| st.link[*u].iter().filter(|y| is_node(y)).count() == 1)
            .cloned()
            .ok_or_else(|| RecoverError::InvalidFan("no end-node".into()))?;
        let v = st.link[&u].iter().find(|y| is_node(y)).cloned().expect("one node neighbor");
        let leaves: Vec<String> = st.link[&u].iter().filter(|y| **y != v).cloned().collect();
        let wu = &st.nodes[&u];
        let idx: Vec<usize> = leaves
            .iter()
            .map(|l| st.coords.iter().position(|c| c == l).expect("leaf coordinate"))
            .collect();
        let entries: Vec<BigInt> = idx.iter().map(|&i| wu[i].clone()).collect();
        let d_uv = gcd_all(&entries);
        let total = lcm_all(&entries);
        let leaf_weights: Vec<BigInt> = entries.iter().map(|e| &total / e).collect();
        if &d_uv * leaf_weights.iter().product::<BigInt>() != total {
            return Err(RecoverError::NotRealizable(format!("weights at {u} are not coprime")));
        }
        for (l, d) in leaves.iter().zip(&leaf_weights) {
            weights.insert((u.clone(), l.clone()), d.clone());
        }
        weights.insert((u.clone(), v.clone()), d_uv.clone());
        let a = PruneMatrix::new(st.coords.len(), idx.iter().zip(&entries).map(|(&i, e)| (i, e / &d_uv)).collect());
        let mut next_nodes = BTreeMap::new();
        for (label, w) in &st.nodes {
            if *label == u {
                continue;
            }
            let x = a.solve(w).ok_or_else(|| RecoverError::SolveFailed(format!("no integral preimage for {label}")))?;
            next_nodes.insert(label.clone(), x);
        }
        let mut coords = vec![u.clone()];
        coords.extend(a.surviving().iter().map(|&i| st.coords[i].clone()));
        for l in &leaves {
            st.link.remove(l);
        }
        st.link.insert(u.clone(), BTreeSet::from([v.clone()]));
        st = Stage { coords, nodes: next_nodes, link: st.link };
    }
    let (u, w) = st.nodes.iter().next().expect("one node left");
    for (c, d) in st.coords.iter().zip(star_weights(w)?) {
        weights.insert((u.clone(), c.clone()), d);
    }
    build_and_verify(fan, &weights)
}

fn build_and_verify(fan: &FanInput, weights: &BTreeMap<(String, String), BigInt>) -> Result<SpliceDiagram, RecoverError> {
    let mut leaves = vec![String::new(); fan.n];
    let mut nodes = Vec::new();
    for ray in &fan.rays {
        match (0..fan.n).find(|&i| ray.vector[i].is_one() && ray.vector.iter().filter(|x| !x.is_zero()).count() == 1) {
            Some(i) => leaves[i] = ray.label.clone(),
            None => nodes.push(ray.label.clone()),
        }
    }
    let weight = |a: &str, b: &str| -> Result<Option<u64>, RecoverError> {
        weights.get(&(a.to_string(), b.to_string())).map(to_u64).transpose()
    };
    let edges = fan
        .cones
        .iter()
        .map(|c| {
            let (a, b) = (&fan.rays[c.rays.0].label, &fan.rays[c.rays.1].label);
            Ok(EdgeSpec::new(a, b, weight(a, b)?, weight(b, a)?))
        })
        .collect::<Result<Vec<_>, RecoverError>>()?;
    let d = SpliceDiagram::new(&DiagramSpec { leaves, nodes, edges })?;
    let report = d.check_conditions();
    if !report.admissible() || !report.coprime {
        return Err(RecoverError::VerificationFailed(format!("conditions fail: {report:?}")));
    }
    let again = splice_fan(&d)?;
    if !same_fan(fan, &again) {
        return Err(RecoverError::VerificationFailed("splice fan differs from the input".into()));
    }
    Ok(d)
}

/// Equality of fans up to the order of rays and cones, keyed by ray labels.
pub fn same_fan(a: &SpliceFan, b: &SpliceFan) -> bool {
    let rays = |f: &SpliceFan| -> BTreeMap<String, Vec<BigInt>> {
        f.rays.iter().map(|r| (r.label.clone(), r.vector.clone())).collect()
    };
    let cones = |f: &SpliceFan| -> BTreeSet<(String, String, BigInt)> {
        f.cones
            .iter()
            .map(|c| {
                let (x, y) = (f.rays[c.rays.0].label.clone(), f.rays[c.rays.1].label.clone());
                let (x, y) = if x <= y { (x, y) } else { (y, x) };
                (x, y, c.multiplicity.clone())
            })
            .collect()
    };
    a.n == b.n && rays(a) == rays(b) && cones(a) == cones(b)
}

/// Per node: the partition of the leaf labels into branches, with the weight
/// on each branch. Leaf-labeled weighted trees are determined by this set.
fn signatures(d: &SpliceDiagram) -> BTreeSet<BTreeSet<(BTreeSet<String>, u64)>> {
    d.nodes()
        .map(|v| {
            d.branches(v)
                .into_iter()
                .enumerate()
                .map(|(pos, branch)| {
                    let leaves = branch.into_iter().filter(|&x| d.is_leaf(x)).map(|x| d.label(x).to_string()).collect();
                    (leaves, d.weight(v, pos))
                })
                .collect()
        })
        .collect()
}

/// Leaf-label-preserving isomorphism of weighted trees.
pub fn isomorphic(a: &SpliceDiagram, b: &SpliceDiagram) -> bool {
    let leaf_labels = |d: &SpliceDiagram| -> BTreeSet<String> { d.leaves().map(|l| d.label(l).to_string()).collect() };
    a.nodes().len() == b.nodes().len() && leaf_labels(a) == leaf_labels(b) && signatures(a) == signatures(b)
}

/// `recover(splice_fan(d))` is isomorphic to `d`.
pub fn roundtrip(d: &SpliceDiagram) -> Result<bool, RecoverError> {
    let fan = splice_fan(d)?;
    let r = recover(&fan)?;
    Ok(isomorphic(d, &r))
}

/// Prunes the leaves of the end-node `u`, which becomes a leaf of the
/// result. Leaf order of the result: `u` first, then the surviving leaves.
/// Returns the pruned diagram and the matching [`PruneMatrix`].
pub fn prune_diagram(d: &SpliceDiagram, u: VertexId) -> Result<(SpliceDiagram, PruneMatrix), RecoverError> {
    if !d.is_node(u) {
        return Err(DiagramError::NotANode(d.label(u).to_string()).into());
    }
    let node_nbrs: Vec<VertexId> = d.neighbors(u).filter(|&y| d.is_node(y)).collect();
    let [v] = node_nbrs[..] else {
        return Err(DiagramError::NotAnEndNode(d.label(u).to_string()).into());
    };
    let pruned: Vec<VertexId> = d.neighbors(u).filter(|&y| d.is_leaf(y)).collect();
    let d_uv = BigInt::from(d.weight_toward(u, v).expect("node weight"));
    let a = PruneMatrix::new(
        d.n_leaves(),
        pruned.iter().map(|&l| (l, d.linking_number(u, l) / &d_uv)).collect(),
    );
    let spec = d.to_spec();
    let mut leaves = vec![d.label(u).to_string()];
    leaves.extend(a.surviving().iter().map(|&l| d.label(l).to_string()));
    let nodes = d.nodes().filter(|&x| x != u).map(|x| d.label(x).to_string()).collect();
    let gone: BTreeSet<&str> = pruned.iter().map(|&l| d.label(l)).collect();
    let ul = d.label(u);
    let edges = spec
        .edges
        .into_iter()
        .filter(|e| !(gone.contains(e.a.as_str()) || gone.contains(e.b.as_str())))
        .map(|e| match (e.a == ul, e.b == ul) {
            (true, _) => EdgeSpec::new(&e.b, &e.a, e.wb, None),
            (_, true) => EdgeSpec::new(&e.a, &e.b, e.wa, None),
            _ => e,
        })
        .collect();
    let p = SpliceDiagram::new(&DiagramSpec { leaves, nodes, edges })?;
    Ok((p, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{example_d1, star};
    use crate::random::random_diagram;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn star_weights_of(d: &SpliceDiagram) -> Vec<u64> {
        let u = d.nodes().next().unwrap();
        (0..d.valency(u)).map(|p| d.weight(u, p)).collect()
    }

    #[test]
    fn stars() {
        assert_eq!(star_weights_of(&recover_star(&ints(&[15, 10, 6])).unwrap()), vec![2, 3, 5]);
        assert_eq!(star_weights_of(&recover_star(&ints(&[6, 10, 15])).unwrap()), vec![5, 3, 2]);
        assert_eq!(star_weights_of(&recover_star(&ints(&[1, 1, 1])).unwrap()), vec![1, 1, 1]);
        assert!(matches!(recover_star(&ints(&[4, 2, 2])), Err(RecoverError::NotRealizable(_))));
        assert!(matches!(recover_star(&ints(&[1, 1])), Err(RecoverError::NotRealizable(_))));
    }

    #[test]
    fn running_example() {
        let d = example_d1();
        let fan = splice_fan(&d).unwrap();
        let r = recover(&fan).unwrap();
        assert!(isomorphic(&d, &r));
        let v = r.vertex("v").unwrap();
        let u = r.vertex("u").unwrap();
        assert_eq!(r.weight_toward(v, u), Some(11));
        assert_eq!(r.weight_toward(u, v), Some(49));
        assert!(roundtrip(&d).unwrap());
        assert!(roundtrip(&star(&[2, 3, 5]).unwrap()).unwrap());
    }

    #[test]
    fn pruning_matrix_for_running_example() {
        let d = example_d1();
        let (p, a) = prune_diagram(&d, d.vertex("u").unwrap()).unwrap();
        let v = d.vertex("v").unwrap();
        let pv = p.vertex("v").unwrap();
        let x = p.node_weight_vector(pv).entries;
        assert_eq!(x, ints(&[70, 110, 154, 385]));
        assert_eq!(a.apply(&x), d.node_weight_vector(v).entries);
        assert_eq!(a.solve(&d.node_weight_vector(v).entries), Some(x));
        assert_eq!(a.rows()[0], ints(&[3, 0, 0, 0]));
        assert_eq!(a.rows()[1], ints(&[2, 0, 0, 0]));
    }

    #[test]
    fn non_coprime_fan_refused() {
        let mut fan = splice_fan(&example_d1()).unwrap();
        fan.cones[0].multiplicity = BigInt::from(4);
        assert!(matches!(recover(&fan), Err(RecoverError::NonCoprimeFan(_))));
    }

    #[test]
    fn random_roundtrips() {
        for seed in 0..8 {
            for (n, k) in [(5, 2), (6, 3), (7, 2)] {
                let d = random_diagram(n, k, seed, true).unwrap();
                assert!(roundtrip(&d).unwrap(), "seed {seed} shape ({n},{k})");
            }
        }
    }
}

//! Seeded generation of splice diagrams satisfying the edge determinant and
//! semigroup conditions.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagram::{DiagramError, DiagramSpec, EdgeSpec, SpliceDiagram};

/// Attempts before [`random_diagram`] gives up.
pub const RETRY_CAP: usize = 10_000;

/// Primes and prime powers up to 49.
const POOL: [u64; 23] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32, 37, 41, 43, 47, 49];

fn base_prime(q: u64) -> u64 {
    (2..=q).find(|p| q.is_multiple_of(*p)).unwrap_or(q)
}

/// Generates a diagram with `n_leaves` leaves and `n_nodes` nodes.
///
/// The output is a deterministic function of the arguments. It always passes
/// validation, the edge determinant and semigroup conditions, and coprimality
/// when `require_coprime` is set.
pub fn random_diagram(
    n_leaves: usize,
    n_nodes: usize,
    seed: u64,
    require_coprime: bool,
) -> Result<SpliceDiagram, DiagramError> {
    if n_leaves < 3 || n_nodes == 0 || n_nodes + 2 > n_leaves {
        return Err(DiagramError::GenerationExhausted(0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RETRY_CAP {
        let Some(spec) = draw(n_leaves, n_nodes, require_coprime, &mut rng) else {
            continue;
        };
        let Ok(d) = SpliceDiagram::new(&spec) else { continue };
        let report = d.check_conditions();
        if report.admissible() && (!require_coprime || report.coprime) {
            return Ok(d);
        }
    }
    Err(DiagramError::GenerationExhausted(RETRY_CAP))
}

/// Upper bound on generated weights; larger draws are rejected.
const WEIGHT_CAP: u128 = 2_000_000;

/// Candidates examined per weight before the draw is abandoned.
const SCAN: u128 = 200;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Leaf(usize),
    Node(usize),
}

struct Draft {
    /// Per node: neighbors and the weight toward each, once assigned.
    adj: Vec<Vec<(Slot, Option<u64>)>>,
}

impl Draft {
    fn weight(&self, v: usize, to: Slot) -> Option<u64> {
        self.adj[v].iter().find(|(s, _)| *s == to).and_then(|(_, w)| *w)
    }

    fn set(&mut self, v: usize, to: Slot, w: u64) {
        let slot = self.adj[v].iter_mut().find(|(s, _)| *s == to).expect("neighbor");
        slot.1 = Some(w);
    }

    /// Product of the weights at `c` other than those toward `a` and `b`.
    fn off_path(&self, c: usize, a: Slot, b: Slot) -> Option<u128> {
        self.adj[c]
            .iter()
            .filter(|(s, _)| *s != a && *s != b)
            .try_fold(1u128, |acc, (_, w)| acc.checked_mul(u128::from((*w)?)))
    }

    /// Reduced linking numbers from `v` to the leaves beyond the node `c`.
    fn generators(&self, v: usize, c: usize) -> Option<Vec<u128>> {
        let mut out = Vec::new();
        for &(y, _) in &self.adj[c] {
            if y == Slot::Node(v) {
                continue;
            }
            let here = self.off_path(c, Slot::Node(v), y)?;
            match y {
                Slot::Leaf(_) => out.push(here),
                Slot::Node(d) => {
                    for g in self.generators(c, d)? {
                        out.push(here.checked_mul(g)?);
                    }
                }
            }
        }
        Some(out)
    }

    fn others(&self, v: usize, except: Slot) -> Option<u128> {
        self.off_path(v, except, except)
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A weight above `floor`, in the semigroup of `gens` and coprime to every
/// weight in `avoid` when requested.
fn pick_weight(floor: u128, gens: &[u128], avoid: &[u64], coprime: bool, rng: &mut ChaCha8Rng) -> Option<u64> {
    let g = gens.iter().fold(0, |acc, &x| gcd(acc, x));
    let reduced: Vec<u128> = gens.iter().map(|&x| x / g).collect();
    let lo = *reduced.iter().min()?;
    if lo > 1_000_000 {
        return None;
    }
    // Smallest representable value in each residue class modulo `lo`.
    let m = lo as usize;
    let mut apery = vec![u128::MAX; m];
    apery[0] = 0;
    let mut heap = BinaryHeap::from([Reverse((0u128, 0usize))]);
    while let Some(Reverse((d, r))) = heap.pop() {
        if d > apery[r] {
            continue;
        }
        for &q in &reduced {
            let nd = d + q;
            let nr = (r + (q % lo) as usize) % m;
            if nd < apery[nr] {
                apery[nr] = nd;
                heap.push(Reverse((nd, nr)));
            }
        }
    }
    let member = |x: u128| x >= apery[(x % lo) as usize];
    let skip = rng.gen_range(0..3usize);
    let mut found = 0;
    let first = floor.max(2).div_ceil(g);
    for x in first..first + SCAN {
        if x * g > WEIGHT_CAP {
            break;
        }
        let t = x * g;
        if (!coprime || avoid.iter().all(|&a| gcd(t, u128::from(a)) == 1)) && member(x) {
            if found == skip {
                return u64::try_from(t).ok();
            }
            found += 1;
        }
    }
    None
}

fn draw(n: usize, k: usize, coprime: bool, rng: &mut ChaCha8Rng) -> Option<DiagramSpec> {
    // Random tree on the nodes: node i > 0 attaches to a uniform earlier node,
    // so parents precede children.
    let mut parent = vec![usize::MAX; k];
    let mut deg = vec![0usize; k];
    for i in 1..k {
        let j = rng.gen_range(0..i);
        parent[i] = j;
        deg[i] += 1;
        deg[j] += 1;
    }
    let mut leaves_at: Vec<usize> = deg.iter().map(|&d| 3usize.saturating_sub(d)).collect();
    let required: usize = leaves_at.iter().sum();
    if required > n {
        return None;
    }
    for _ in required..n {
        let i = rng.gen_range(0..k);
        leaves_at[i] += 1;
    }
    let mut leaf_order: Vec<usize> = (0..n).collect();
    leaf_order.shuffle(rng);

    let mut draft = Draft { adj: vec![Vec::new(); k] };
    let mut next_leaf = 0usize;
    let mut leaf_edges = Vec::new();
    for (i, &m) in leaves_at.iter().enumerate() {
        for _ in 0..m {
            let leaf = leaf_order[next_leaf];
            next_leaf += 1;
            draft.adj[i].push((Slot::Leaf(leaf), None));
            leaf_edges.push((i, leaf));
        }
    }
    for (i, &p) in parent.iter().enumerate().skip(1) {
        draft.adj[p].push((Slot::Node(i), None));
        draft.adj[i].push((Slot::Node(p), None));
    }

    // Leaf weights: small prime powers, distinct base primes when coprime.
    for (i, &count) in leaves_at.iter().enumerate() {
        let mut used = Vec::new();
        for s in 0..count {
            let candidates: Vec<u64> =
                POOL[..12].iter().copied().filter(|&q| !coprime || !used.contains(&base_prime(q))).collect();
            let q = *candidates.choose(rng)?;
            used.push(base_prime(q));
            let Slot::Leaf(l) = draft.adj[i][s].0 else { unreachable!() };
            draft.set(i, Slot::Leaf(l), q);
        }
    }
    let assigned = |d: &Draft, v: usize| -> Vec<u64> { d.adj[v].iter().filter_map(|(_, w)| *w).collect() };
    // Child-ward weights, deepest nodes first.
    for (c, &p) in parent.iter().enumerate().skip(1).rev() {
        let gens = draft.generators(p, c)?;
        let floor = gens.iter().copied().min()?;
        let w = pick_weight(floor, &gens, &assigned(&draft, p), coprime, rng)?;
        draft.set(p, Slot::Node(c), w);
    }
    // Parent-ward weights, from the root down, large enough for the edge
    // determinant to be positive.
    for (c, &p) in parent.iter().enumerate().skip(1) {
        let gens = draft.generators(c, p)?;
        let rest = draft.others(c, Slot::Node(p))?.checked_mul(draft.others(p, Slot::Node(c))?)?;
        let across = u128::from(draft.weight(p, Slot::Node(c))?);
        let floor = (rest / across + 1).max(gens.iter().copied().min()?);
        let w = pick_weight(floor, &gens, &assigned(&draft, c), coprime, rng)?;
        draft.set(c, Slot::Node(p), w);
    }

    let node_label = |i: usize| format!("n{}", i + 1);
    let leaf_label = |i: usize| format!("l{}", i + 1);
    let mut edges: Vec<EdgeSpec> = leaf_edges
        .iter()
        .map(|&(i, l)| EdgeSpec::new(&node_label(i), &leaf_label(l), draft.weight(i, Slot::Leaf(l)), None))
        .collect();
    for (c, &p) in parent.iter().enumerate().skip(1) {
        edges.push(EdgeSpec::new(
            &node_label(p),
            &node_label(c),
            draft.weight(p, Slot::Node(c)),
            draft.weight(c, Slot::Node(p)),
        ));
    }
    Some(DiagramSpec {
        leaves: (0..n).map(leaf_label).collect(),
        nodes: (0..k).map(node_label).collect(),
        edges,
    })
}

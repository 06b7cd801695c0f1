#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use splice_core::diagram::{SpliceDiagram, VertexId};
use splice_core::random::random_diagram;

/// Random diagrams with 3 to 8 leaves and 1 to 3 nodes satisfying the edge
/// determinant and semigroup conditions.
pub fn diagrams(coprime: bool) -> impl Strategy<Value = SpliceDiagram> {
    (3usize..=8, 1usize..=3, any::<u64>()).prop_filter_map("shape admits no diagram", move |(l, k, seed)| {
        if l < k + 2 {
            return None;
        }
        random_diagram(l, k, seed, coprime).ok()
    })
}

/// Product of the weights adjacent to, but not on, the geodesic `[u, v]`.
pub fn linking_oracle(d: &SpliceDiagram, u: VertexId, v: VertexId) -> BigInt {
    let path = d.geodesic(u, v);
    let mut out = BigInt::from(1);
    for &x in path.iter().filter(|&&x| d.is_node(x)) {
        for pos in 0..d.valency(x) {
            if !path.contains(&d.neighbor(x, pos)) {
                out *= d.weight(x, pos);
            }
        }
    }
    out
}

pub fn dot(a: &[BigInt], m: &[u32]) -> BigInt {
    a.iter().zip(m).map(|(x, &y)| x * BigInt::from(y)).sum()
}

pub fn q(x: i64) -> BigRational {
    BigRational::from_integer(x.into())
}

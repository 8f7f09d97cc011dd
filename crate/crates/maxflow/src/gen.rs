//! Seeded instance generators: uniform random, layered, and the two-path
//! family with one huge and one unit capacity.

use crate::network::Instance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform random digraph: `m` arcs over `n` nodes (no self-loops; parallel
/// arcs merge at build time), capacities in `1..=u`. `s = 0`, `t = n-1`.
pub fn random_instance(n: usize, m: usize, u: u128, seed: u64) -> Instance {
    assert!(n >= 2 && u >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs = Vec::with_capacity(m);
    for _ in 0..m {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let c = rng.gen_range(1..=u);
        arcs.push((i, j, c));
    }
    Instance {
        n,
        s: 0,
        t: n - 1,
        arcs,
    }
}

/// `depth` layers of `width` nodes between the terminals; each node feeds up
/// to three nodes of the next layer, terminals connect to the full first and
/// last layers. Capacities in `1..=u`.
pub fn layered_instance(width: usize, depth: usize, u: u128, seed: u64) -> Instance {
    assert!(width >= 1 && depth >= 1 && u >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = width * depth + 2;
    let s = 0;
    let t = n - 1;
    let node = |layer: usize, idx: usize| 1 + layer * width + idx;
    let mut arcs = Vec::new();
    let cap = |rng: &mut ChaCha8Rng| rng.gen_range(1..=u);
    for i in 0..width {
        arcs.push((s, node(0, i), cap(&mut rng)));
        arcs.push((node(depth - 1, i), t, cap(&mut rng)));
    }
    for layer in 0..depth - 1 {
        for i in 0..width {
            let fanout = rng.gen_range(1..=3usize.min(width));
            for _ in 0..fanout {
                let j = rng.gen_range(0..width);
                arcs.push((node(layer, i), node(layer + 1, j), cap(&mut rng)));
            }
        }
    }
    Instance { n, s, t, arcs }
}

/// Two disjoint two-arc paths: one of capacity `k^alpha`, one of capacity 1.
/// Max flow is `k^alpha + 1`; the huge path exercises capacity scaling depth.
pub fn two_path_instance(k: u64, alpha: u32) -> Instance {
    let big = (k as u128)
        .checked_pow(alpha)
        .expect("k^alpha exceeds u128");
    Instance {
        n: 4,
        s: 0,
        t: 3,
        arcs: vec![(0, 1, big), (1, 3, big), (0, 2, 1), (2, 3, 1)],
    }
}

#[cfg(test)]
mod test {
    use super::*;
    use crate::oracle::{oracle_max_flow, verify_flow};

    #[test]
    fn random_is_deterministic() {
        let a = random_instance(10, 30, 50, 7);
        let b = random_instance(10, 30, 50, 7);
        assert_eq!(a, b);
        let c = random_instance(10, 30, 50, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn random_builds_and_solves() {
        for seed in 0..5 {
            let inst = random_instance(12, 40, 100, seed);
            let net = inst.build().unwrap();
            let (value, flow) = oracle_max_flow(&net);
            assert_eq!(verify_flow(&net, &flow).unwrap(), value);
        }
    }

    #[test]
    fn layered_has_expected_shape() {
        let inst = layered_instance(3, 4, 10, 1);
        assert_eq!(inst.n, 14);
        let net = inst.build().unwrap();
        let (value, _) = oracle_max_flow(&net);
        assert!(value > 0);
    }

    #[test]
    fn two_path_value_known() {
        let inst = two_path_instance(4, 10);
        let net = inst.build().unwrap();
        let (value, _) = oracle_max_flow(&net);
        assert_eq!(value, 4u128.pow(10) as i128 + 1);
    }

    #[test]
    fn two_path_huge_caps_fit() {
        let inst = two_path_instance(4, 40);
        assert_eq!(inst.arcs[0].2, 1u128 << 80);
        let net = inst.build().unwrap();
        let (value, _) = oracle_max_flow(&net);
        assert_eq!(value, (1i128 << 80) + 1);
    }
}

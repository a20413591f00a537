//! Blossom matching against exhaustive search on small graphs.

use cantor_bounds::matching::{matching_with_limit, max_matching, Graph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Maximum matching size by DP over vertex subsets: the lowest unused
/// vertex is either left unmatched or paired with a neighbour.
fn brute_force(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut adj = vec![0u32; n];
    for &(u, v) in edges {
        if u != v {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
    }
    let full = (1u32 << n) - 1;
    let mut best = vec![0u8; 1 << n];
    for used in (0..full).rev() {
        let free = !used & full;
        let v = free.trailing_zeros() as usize;
        let mut b = best[(used | 1 << v) as usize];
        let mut cand = adj[v] & free & !(1 << v);
        while cand != 0 {
            let u = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            b = b.max(1 + best[(used | 1 << v | 1 << u) as usize]);
        }
        best[used as usize] = b;
    }
    best[0] as usize
}

fn random_graph(rng: &mut ChaCha8Rng) -> (usize, Vec<(usize, usize)>) {
    let n = rng.gen_range(1..=20);
    let p: f64 = rng.gen_range(0.05..0.6);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    (n, edges)
}

#[test]
fn blossom_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for round in 0..200 {
        let (n, edges) = random_graph(&mut rng);
        let g = Graph::from_edges(n, &edges);
        let m = max_matching(&g);
        assert!(m.is_valid_for(&g), "round {round}");
        assert!(m.maximum);
        assert_eq!(m.size(), brute_force(n, &edges), "round {round}: n={n} edges={edges:?}");
    }
}

#[test]
fn odd_cycles_and_cliques() {
    for n in 2..=15 {
        let cycle: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        assert_eq!(max_matching(&Graph::from_edges(n, &cycle)).size(), n / 2);
        let clique: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        assert_eq!(max_matching(&Graph::from_edges(n, &clique)).size(), n / 2);
    }
}

proptest! {
    #[test]
    fn limited_search_is_sound(seed in any::<u64>(), limit in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, edges) = random_graph(&mut rng);
        let g = Graph::from_edges(n, &edges);
        let partial = matching_with_limit(&g, limit);
        prop_assert!(partial.is_valid_for(&g));
        let full = max_matching(&g);
        prop_assert!(partial.size() <= full.size());
        if partial.maximum {
            prop_assert_eq!(partial.size(), full.size());
        }
    }
}

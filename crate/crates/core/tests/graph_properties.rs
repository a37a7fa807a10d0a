use proptest::prelude::*;

use signet_core::balance::{apply_gauge, brute_force_gauge, structural_balance, verify_gauge};
use signet_core::generate::{random_gauge, random_pair, random_signed_digraph, Family, Rng};
use signet_core::sgraph::{
    is_strongly_connected, laplacian, pos_neg_split, sign_consistency, union_adjacency,
    union_support, DigraphSupport, SignedDigraph,
};

fn graph(seed: u64, n: usize) -> SignedDigraph {
    let mut rng = Rng::new(seed);
    let density = rng.uniform(0.1, 0.7);
    random_signed_digraph(&mut rng, n, density)
}

fn reachable(succ: &[Vec<usize>], from: usize) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    let mut queue = std::collections::VecDeque::from([from]);
    seen[from] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &succ[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

proptest! {
    #[test]
    fn laplacian_row_sums(seed: u64, n in 1usize..8) {
        let g = graph(seed, n);
        let l = laplacian(&g);
        for (i, s) in l.row_sums().into_iter().enumerate() {
            let expected: f64 = (0..n).map(|j| g.weight(i, j).abs() - g.weight(i, j)).sum();
            prop_assert!((s - expected).abs() <= 1e-12);
            prop_assert!(s >= -1e-12);
        }
        let zero_rows = l.row_sums().iter().all(|s| s.abs() <= 1e-12);
        prop_assert_eq!(zero_rows, !g.has_negative_arc());
    }

    #[test]
    fn split_recomposes(seed: u64, n in 1usize..8) {
        let g = graph(seed, n);
        let (p, m) = pos_neg_split(&g);
        prop_assert!(p.arcs().all(|(_, _, w)| w > 0.0));
        prop_assert!(m.arcs().all(|(_, _, w)| w < 0.0));
        prop_assert_eq!(p.sum(&m).unwrap(), g);
    }

    #[test]
    fn union_support_matches_union_adjacency(seed: u64, n in 2usize..7, a in 0.25f64..4.0, b in 0.25f64..4.0) {
        let mut rng = Rng::new(seed);
        let family = Family::ALL[rng.below(3)];
        let pair = random_pair(&mut rng, n, family);
        if let Ok(u) = union_adjacency(&pair, a, b) {
            prop_assert_eq!(u.support(), union_support(&pair));
        }
    }

    #[test]
    fn consistency_is_symmetric(seed: u64, n in 2usize..7) {
        let mut rng = Rng::new(seed);
        let family = Family::ALL[rng.below(3)];
        let pair = random_pair(&mut rng, n, family);
        prop_assert_eq!(
            sign_consistency(&pair).is_consistent(),
            sign_consistency(&pair.swapped()).is_consistent()
        );
    }

    #[test]
    fn strong_connectivity_matches_bfs(seed: u64, n in 1usize..=6) {
        let mut rng = Rng::new(seed);
        let density = rng.uniform(0.05, 0.6);
        let arcs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && rng.chance(density))
            .collect();
        let support = DigraphSupport::new(n, arcs).unwrap();
        let succ = support.successors();
        let oracle = (0..n).all(|v| reachable(&succ, v).into_iter().all(|r| r));
        prop_assert_eq!(is_strongly_connected(&support), oracle);
    }

    #[test]
    fn balance_matches_exhaustive_search(seed: u64, n in 1usize..=10) {
        let g = graph(seed, n);
        let fast = structural_balance(&g);
        prop_assert_eq!(fast.is_balanced(), brute_force_gauge(&g).is_some());
        if let Some(d) = fast.gauge() {
            prop_assert!(verify_gauge(&g, d));
            let switched = apply_gauge(&g, d).unwrap();
            prop_assert!(switched.arcs().all(|(_, _, w)| w >= 0.0));
        }
    }

    #[test]
    fn balance_is_gauge_invariant(seed: u64, n in 1usize..=10) {
        let mut rng = Rng::new(seed);
        let g = random_signed_digraph(&mut rng, n, 0.4);
        let d = random_gauge(&mut rng, n);
        let switched = apply_gauge(&g, &d).unwrap();
        prop_assert_eq!(
            structural_balance(&switched).is_balanced(),
            structural_balance(&g).is_balanced()
        );
        let dm = d.as_matrix();
        let conj = &(&dm * &laplacian(&g)) * &dm;
        prop_assert!(laplacian(&switched).approx_eq(&conj, 1e-12));
    }
}

mod common;

use std::collections::BTreeSet;

use mdsconv::codec::CodeSpec;
use mdsconv::construct::hyperplane;
use mdsconv::gf::Fe;
use mdsconv::search::{
    self, canonicalize, establish_delta, passes_symmetry_filter, prefix_code, search, surviving_prefixes,
    walk, Budget, DeltaStatus, SearchOptions,
};

use common::{gf, survivors_vs_brute};

#[test]
fn survivors_equal_brute_force_filtration_gf4() {
    let f = gf(2);
    for target in 3..=6 {
        assert_eq!(survivors_vs_brute(&f, 2, target), Vec::<usize>::new(), "target {target}");
    }
    assert_eq!(survivors_vs_brute(&f, 3, 4), Vec::<usize>::new());
}

#[test]
fn survivors_equal_brute_force_filtration_gf8() {
    let f = gf(3);
    assert_eq!(survivors_vs_brute(&f, 2, 6), Vec::<usize>::new());
    assert_eq!(survivors_vs_brute(&f, 3, 4), Vec::<usize>::new());
}

fn full_codes(m: u32, n: usize, target: usize, symmetry: bool) -> BTreeSet<Vec<Fe>> {
    let f = gf(m);
    surviving_prefixes(f, n, target, symmetry)
        .unwrap()
        .pop()
        .unwrap()
        .into_iter()
        .collect()
}

fn as_sequence(code: &CodeSpec) -> Vec<Fe> {
    walk(code.k(), code.degree())
        .into_iter()
        .map(|(i, j)| code.coeff(i, j))
        .collect()
}

#[test]
fn symmetry_filter_keeps_one_representative_per_class() {
    for (m, n, target) in [(3, 3, 4), (3, 3, 5), (3, 4, 4), (4, 3, 5), (4, 4, 4)] {
        let f = gf(m);
        let k = n - 1;
        let all = full_codes(m, n, target, false);
        let reduced = full_codes(m, n, target, true);
        let filtered: BTreeSet<Vec<Fe>> = all
            .iter()
            .filter(|s| passes_symmetry_filter(&prefix_code(&f, k, target - 2, s)))
            .cloned()
            .collect();
        assert_eq!(reduced, filtered, "m={m} n={n} target={target}");
        for s in &all {
            let canon = canonicalize(&prefix_code(&f, k, target - 2, s)).expect("MDS codes canonicalize");
            assert!(reduced.contains(&as_sequence(&canon)), "m={m} n={n} {s:?}");
        }
        assert_eq!(all.is_empty(), reduced.is_empty());
    }
}

#[test]
fn search_results_do_not_depend_on_job_count() {
    let f = gf(4);
    let one = search(f.clone(), 3, 5, &SearchOptions::probe(3, 11)).unwrap();
    let four = search(f, 3, 5, &SearchOptions { jobs: 4, ..SearchOptions::probe(3, 11) }).unwrap();
    assert_eq!(one.code, four.code);
    assert_eq!(one.stats, four.stats);
}

#[test]
fn distance_four_is_out_of_reach_at_full_length() {
    for m in 2..=4u32 {
        let r = search(gf(m), 1 << m, 4, &SearchOptions::complete()).unwrap();
        assert!(r.infeasible(), "m={m}");
        let r = search(gf(m), (1 << (m - 1)) + 1, 4, &SearchOptions::complete()).unwrap();
        assert!(r.infeasible(), "m={m}");
        assert!(search(gf(m), 1 << (m - 1), 4, &SearchOptions::complete()).unwrap().code.is_some());
    }
}

#[test]
fn distance_four_first_layer_is_a_hyperplane_gf8() {
    let f = gf(3);
    let codes = full_codes(3, 4, 4, false);
    assert!(!codes.is_empty());
    let hyperplanes: Vec<BTreeSet<Fe>> = f
        .nonzero_by_log()
        .map(|b| hyperplane(&f, b).into_iter().filter(|x| !x.is_zero()).collect())
        .collect();
    for s in &codes {
        let code = prefix_code(&f, 3, 2, s);
        let layer: BTreeSet<Fe> = code.rows()[1].iter().copied().collect();
        assert!(hyperplanes.contains(&layer), "{s:?}");
    }
}

/// Largest target whose full-depth brute-force filtration is nonempty.
fn oracle_delta(m: u32, n: usize) -> usize {
    let f = gf(m);
    let k = n - 1;
    let mut best = 2;
    for target in 3.. {
        let d = target - 2;
        let len = walk(k, d).len();
        let any = common::all_sequences(&f, len)
            .iter()
            .any(|s| common::naive_is_mds(&prefix_code(&f, k, d, s)));
        if !any {
            return best;
        }
        best = target;
    }
    unreachable!()
}

#[test]
fn small_deltas_match_oracle() {
    for n in [2, 3] {
        let r = establish_delta(gf(2), n, &Budget::unlimited(), 1).unwrap();
        assert_eq!((r.delta, r.status), (oracle_delta(2, n), DeltaStatus::Exact), "n={n}");
    }
}

#[test]
fn small_deltas_match_tables() {
    for (m, n, delta) in [(3, 2, 6), (4, 2, 7), (4, 3, 5)] {
        let r = establish_delta(gf(m), n, &Budget::unlimited(), 1).unwrap();
        assert_eq!((r.delta, r.status), (delta, DeltaStatus::Exact), "m={m} n={n}");
        let code = r.code.unwrap();
        assert_eq!(code.degree() + 2, delta);
        assert!(mdsconv::cdp::cdp_via_minors(&code).unwrap().is_mds());
    }
    assert!(common::naive_is_mds(&establish_delta(gf(3), 2, &Budget::unlimited(), 1).unwrap().code.unwrap()));
}

#[test]
fn budget_stop_reports_deepest_prefix() {
    let r = search(gf(6), 2, 10, &SearchOptions {
        budget: Budget::nodes(50),
        ..SearchOptions::complete()
    });
    let Err(search::SearchError::BudgetExceeded(res)) = r else {
        panic!("expected a budget stop");
    };
    assert!(res.stats.nodes >= 50);
    assert!(!res.deepest_prefix.is_empty());
    assert!(mdsconv::cdp::cdp_via_minors(&res.deepest_code()).unwrap().is_mds());
}

mod common;

use mdsconv::cdp::cdp_via_minors;
use mdsconv::tables::{all_entries, lookup, parse, Verdict};

#[test]
fn table_ii_row() {
    let e = lookup(3, 2).unwrap();
    assert_eq!((e.delta, e.exact, e.rareness.as_str()), (6, true, "0.035"));
    assert_eq!(e.log_rows, vec![vec![0], vec![1], vec![4], vec![3]]);
    assert!(common::naive_is_mds(&e.code().unwrap()));
}

#[test]
fn entries_verify_except_known_misprint() {
    for e in all_entries() {
        let v = e.verify().unwrap();
        if (e.m, e.n) == (14, 8) {
            assert!(matches!(v, Verdict::Fail(Some(_))));
        } else {
            assert!(v.passed(), "m={} n={}", e.m, e.n);
        }
    }
}

#[test]
fn one_digit_repair_of_misprint_passes() {
    let mut e = lookup(14, 8).unwrap();
    assert_eq!(e.log_rows[2][0], 11424);
    e.log_rows[2][0] = 1424;
    assert!(e.verify().unwrap().passed());
}

#[test]
fn verification_agrees_with_profile() {
    for e in all_entries().into_iter().filter(|e| e.m <= 6) {
        let p = cdp_via_minors(&e.code().unwrap()).unwrap();
        assert_eq!(p.mds_prefix(), (2..=e.delta).collect::<Vec<_>>());
    }
}

#[test]
fn perturbed_entry_fails_with_witness() {
    let mut e = lookup(5, 3).unwrap();
    e.log_rows[3][1] = e.log_rows[3][0];
    e.log_rows[2][1] = e.log_rows[2][0];
    e.log_rows[1][1] = e.log_rows[1][0];
    assert!(matches!(e.verify().unwrap(), Verdict::Fail(Some(_))));
}

#[test]
fn code_file_round_trip() {
    for e in all_entries() {
        let c = e.code().unwrap();
        let back = mdsconv::codec::CodeSpec::from_text(&c.to_text().unwrap()).unwrap();
        assert_eq!(back, c);
    }
}

#[test]
fn parse_errors() {
    assert!(parse("II | 3 | 2 | 6 | exact | 0.035").is_err());
    assert!(parse("II | 3 | 2 | 6 | maybe | 0.035 | 0, 1").is_err());
    assert!(parse("II | 3 | 2 | 6 | exact | 0.035 | 0, x").is_err());
    assert_eq!(parse("# only a comment\n\n").unwrap(), vec![]);
}

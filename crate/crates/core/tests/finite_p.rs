//! Finite-prime behaviour of the normalized family at `q = p^2`.

use kloost::measure::FamilyStatistics;
use kloost::modular::legendre;
use kloost::{family_statistics, joint_moment, DlogTable, MomentSpec, PrimePowerModulus};

fn stats(p: u64, a: i64) -> FamilyStatistics {
    let table = DlogTable::build(PrimePowerModulus::new(p, 2).unwrap());
    family_statistics(&table, a, true).unwrap()
}

/// Admissible `t mod p` and those among them with no root of `a x^2 + t x + a`.
fn residue_counts(p: u64, a: u64) -> (u64, u64) {
    let two_a = 2 * a % p;
    let admissible: Vec<u64> = (0..p).filter(|&t| t != two_a && t != p - two_a).collect();
    let empty = admissible
        .iter()
        .filter(|&&t| legendre((t * t + p * p - 4 * a * a % p) % p, p) == -1)
        .count() as u64;
    (admissible.len() as u64, empty)
}

#[test]
fn zero_fraction_is_the_non_residue_share() {
    for p in [101u64, 211, 499, 997] {
        for a in [1i64, 2] {
            let s = stats(p, a);
            let (admissible, empty) = residue_counts(p, a as u64);
            // every t class holds the same number of characters
            assert_eq!(s.zero_count * admissible, empty * s.n_used, "p={p} a={a}");
            assert!((s.zero_fraction - 0.5).abs() <= 5.0 / (p as f64).sqrt());
        }
    }
}

#[test]
fn second_moment_error_shrinks() {
    let spec = MomentSpec::new(vec![2]).unwrap();
    let err: Vec<(u64, f64)> = [101u64, 499, 997]
        .into_iter()
        .map(|p| {
            let table = DlogTable::build(PrimePowerModulus::new(p, 2).unwrap());
            (
                p,
                (joint_moment(&table, &[1], &spec).unwrap().value - 1.0).abs(),
            )
        })
        .collect();
    for w in err.windows(2) {
        let ((_, e0), (p1, e1)) = (w[0], w[1]);
        assert!(e1 <= e0 + 2.0 / (p1 as f64).sqrt(), "{err:?}");
    }
}

#[test]
fn statistics_report_both_normalizations() {
    let s = stats(101, 1);
    let m2 = &s.moments[1];
    let ratio = m2.value / m2.value_used;
    assert!((ratio - s.n_used as f64 / s.q as f64).abs() < 1e-12);
    assert_eq!(s.excluded_count, 2 * 100);
}

#[test]
fn third_moment_vanishes_unless_p_is_one_mod_three() {
    // x^3 = 1 has nontrivial solutions mod p only when p = 1 (mod 3)
    for p in [101u64, 107, 113] {
        assert!(stats(p, 1).moments[2].value.abs() < 1e-12, "p={p}");
    }
    for p in [103u64, 499] {
        assert!(stats(p, 1).moments[2].value.abs() > 1e-4, "p={p}");
    }
}

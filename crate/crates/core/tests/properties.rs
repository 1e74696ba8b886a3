use proptest::prelude::*;

use dedekind::arith::gcd_i64;
use dedekind::contfrac::Parity;
use dedekind::dedekind::{
    fractional_certificate, hickerson_classical, s_decomposed_with, s_direct, scaled_sum, Display, SumParams,
};
use dedekind::equidist::{scan_emit, weyl_checkpoints, CertificateRoute, DirectRoute};
use dedekind::registry::sum_evaluators;
use dedekind::verify::{WEYL_IJ, WEYL_MS};
use dedekind::Rational;

fn coprime_pair(q_max: i64) -> impl Strategy<Value = (i64, i64)> {
    (2..=q_max)
        .prop_flat_map(|q| (1..q, Just(q)))
        .prop_filter("coprime", |&(p, q)| gcd_i64(p, q) == 1)
}

fn s11(p: i64, q: i64) -> Rational {
    s_direct(SumParams::new(1, 1, p, q).unwrap())
}

/// Brute-force sawtooth sum, independent of the library's Bernoulli machinery.
fn sawtooth_sum(p: i64, q: i64) -> Rational {
    let saw = |num: i64| {
        let r = num.rem_euclid(q);
        if r == 0 {
            Rational::from(0)
        } else {
            Rational::new(2 * r - q, 2 * q)
        }
    };
    (1..q).map(|k| saw(k) * saw(p * k)).sum()
}

#[test]
fn frozen_classical_values() {
    let cases = [
        ((1, 2), Rational::from(0)),
        ((1, 3), Rational::new(1, 18)),
        ((2, 3), Rational::new(-1, 18)),
        ((1, 5), Rational::new(1, 5)),
        ((2, 5), Rational::from(0)),
        ((3, 7), Rational::new(-1, 14)),
        ((5, 13), Rational::from(0)),
        ((3, 11), Rational::new(3, 22)),
        ((7, 19), Rational::new(3, 38)),
    ];
    for ((p, q), want) in cases {
        assert_eq!(s11(p, q), want, "s({p},{q})");
        assert_eq!(sawtooth_sum(p, q), want);
    }
}

#[test]
fn first_convergent_family() {
    // s(1, q) = (q - 1)(q - 2) / (12 q)
    for q in 2..200 {
        assert_eq!(s11(1, q), Rational::new((q - 1) * (q - 2), 12 * q));
    }
}

#[test]
fn weyl_sums_shrink_between_checkpoints() {
    let checkpoints = [250, 500, 1500, 3000];
    for (i, j) in WEYL_IJ {
        let res = weyl_checkpoints(&CertificateRoute, &WEYL_MS, i, j, &checkpoints, None).unwrap();
        for (m, pts) in WEYL_MS.iter().zip(&res) {
            let abs: Vec<f64> = pts.iter().map(|p| p.abs).collect();
            let decreases = abs.windows(2).filter(|w| w[1] < w[0]).count();
            assert!(abs[3] < 0.1, "m={m:?} ({i},{j}): {abs:?}");
            assert!(decreases >= 2, "m={m:?} ({i},{j}): {abs:?}");
        }
    }
}

#[test]
fn emitted_rows_satisfy_both_routes() {
    let dir = tempfile::tempdir().unwrap();
    for (i, j) in [(1, 1), (1, 3), (2, 2), (2, 4)] {
        let path = dir.path().join(format!("scan_{i}_{j}.csv"));
        let rows = scan_emit(&DirectRoute, i, j, 60, &path, Some(2)).unwrap();
        let mut reader = csv::Reader::from_path(&path).unwrap();
        let mut seen = 0;
        let mut last = (0i64, 0i64);
        for rec in reader.records() {
            let rec = rec.unwrap();
            let (q, p): (i64, i64) = (rec[0].parse().unwrap(), rec[1].parse().unwrap());
            assert!((q, p) > last);
            last = (q, p);
            let y: Rational = rec[5].parse().unwrap();
            let x: Rational = rec[4].parse().unwrap();
            assert_eq!(x, Rational::new(p, q));
            let exact = scaled_sum(i, j, p, q).unwrap();
            let cert = fractional_certificate(i, j, p, q).unwrap();
            assert!((&exact - &cert).is_integer());
            assert_eq!(y, exact.fract_part());
            assert_eq!(y, cert.fract_part());
            assert!((rec[3].parse::<f64>().unwrap() - y.to_f64()).abs() < 1e-12);
            seen += 1;
        }
        assert_eq!(seen, rows);
    }
}

proptest! {
    #[test]
    fn reciprocity((p, q) in coprime_pair(3000)) {
        let lhs = s11(p, q) + s11(q, p);
        let rhs = Rational::new(p * p + q * q + 1, 12 * p * q) - Rational::new(1, 4);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn matches_sawtooth_oracle((p, q) in coprime_pair(400)) {
        prop_assert_eq!(s11(p, q), sawtooth_sum(p, q));
        prop_assert_eq!(hickerson_classical(p, q).unwrap(), Rational::from(12) * sawtooth_sum(p, q));
    }

    #[test]
    fn displays_and_parities_agree((p, q) in coprime_pair(500), half in 1u32..5, e_off in 0u32..8) {
        let n = 2 * half;
        let e = 1 + e_off % (n - 1);
        let f = n - e;
        let want = s_direct(SumParams::new(e, f, p, q).unwrap());
        for parity in [Parity::Canonical, Parity::Even, Parity::Odd] {
            for display in [Display::Signed, Display::Literal] {
                let d = s_decomposed_with(e, f, p, q, parity, display).unwrap();
                prop_assert_eq!(&d.reconstructed, &want);
            }
        }
    }

    #[test]
    fn reflection_and_negation((p, q) in coprime_pair(300), half in 1u32..4, e_off in 0u32..6) {
        // B̄_i(-x) = (-1)^i B̄_i(x), so s_ij(q - p, q) = (-1)^j s_ij(p, q)
        let n = 2 * half;
        let i = 1 + e_off % (n - 1);
        let j = n - i;
        let a = s_direct(SumParams::new(i, j, p, q).unwrap());
        let b = s_direct(SumParams::new(i, j, q - p, q).unwrap());
        let sign = if j % 2 == 0 { Rational::from(1) } else { Rational::from(-1) };
        prop_assert_eq!(b, sign * a);
    }

    #[test]
    fn registry_evaluators_agree((p, q) in coprime_pair(120), half in 2u32..4, e_off in 0u32..6) {
        let n = 2 * half;
        let i = 1 + e_off % (n - 1);
        let j = n - i;
        let r = sum_evaluators();
        let want = r.get("direct").unwrap().eval(i, j, p, q).unwrap();
        for (name, ev) in r.iter() {
            prop_assert_eq!(ev.eval(i, j, p, q).unwrap(), want.clone(), "{}", name);
        }
    }
}

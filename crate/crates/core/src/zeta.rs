//! Partial zeta values `ζ(𝔞, 1 - N)` of real quadratic fields from the
//! hyperbolic matrix of the inverse unit: Siegel's formula, the higher Meyer
//! formula, and the cancellation identity linking them.

use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;

use crate::arith::{bernoulli_number, sign_pow, Rational};
use crate::contfrac::{table_for, ConvergentTable, Parity};
use crate::dedekind::{delta_term, s_direct, s_fractional, s_integral, Display, SumParams};
use crate::error::{Error, Result};
use crate::quadfield::HyperbolicMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZetaCoeffs {
    pub n: u32,
    pub trace: i64,
    /// `e_{N,0} .. e_{N,2N-2}`, serialized as decimal strings.
    #[serde(serialize_with = "big_vec")]
    pub e: Vec<BigInt>,
}

fn big_vec<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

/// Coefficients of `(z² + t z + 1)^{N-1}`.
pub fn e_coeffs(n: u32, trace: i64) -> Result<ZetaCoeffs> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be at least 1".into()));
    }
    let t = BigInt::from(trace);
    let mut c = vec![BigInt::from(1)];
    for _ in 1..n {
        let mut next = vec![BigInt::from(0); c.len() + 2];
        for (i, x) in c.iter().enumerate() {
            next[i] += x;
            next[i + 1] += &t * x;
            next[i + 2] += x;
        }
        c = next;
    }
    Ok(ZetaCoeffs { n, trace, e: c })
}

fn check_usable(m: &HyperbolicMatrix, n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be at least 1".into()));
    }
    if m.q == 1 || m.p.rem_euclid(m.q) == 0 {
        return Err(Error::DegenerateMatrix(
            m.to_string(),
            "q = 1 or p ≡ 0 (mod q); change the ideal basis so that q > 1".into(),
        ));
    }
    Ok(())
}

/// `(q/g)^{N-1}` with `g = gcd(q, s - p, r)`: rescales the raw formula
/// value to the norm of the ideal class rather than of the chosen basis.
fn class_scale(m: &HyperbolicMatrix, n: u32) -> Rational {
    let g = m.q.gcd(&(m.s - m.p)).gcd(&m.r);
    Rational::new(m.q / g, 1).pow(n as i32 - 1)
}

/// `Σ_k (-1)^k e_k t^{k+1} / (k+1)`.
fn polynomial_part(coeffs: &ZetaCoeffs) -> Rational {
    let t = BigInt::from(coeffs.trace);
    coeffs
        .e
        .iter()
        .enumerate()
        .map(|(k, e)| {
            Rational::new(sign_pow(k as i64) * e * t.pow(k as u32 + 1), k as i64 + 1)
        })
        .sum()
}

/// `Σ_k (-1)^{k+1} e_k X_{k+1, 2N-k-1} / ((k+1)(2N-1-k))`.
fn weighted_sum(coeffs: &ZetaCoeffs, mut x: impl FnMut(u32, u32) -> Rational) -> Rational {
    let two_n = 2 * coeffs.n;
    coeffs
        .e
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let (i, j) = (k as u32 + 1, two_n - k as u32 - 1);
            Rational::from(sign_pow(k as i64 + 1) * e) * x(i, j)
                / Rational::from(i64::from(i) * i64::from(j))
        })
        .sum()
}

pub fn zeta_siegel(m: &HyperbolicMatrix, n: u32) -> Result<Rational> {
    check_usable(m, n)?;
    let coeffs = e_coeffs(n, m.trace())?;
    let b = bernoulli_number(2 * n);
    let two_n = Rational::from(2 * i64::from(n));
    let q = Rational::from(m.q);
    let poly = polynomial_part(&coeffs) / q.pow(2 * n as i32 - 1);
    let sums = weighted_sum(&coeffs, |i, j| {
        let params = SumParams::new(i, j, m.p, m.q).expect("coprime by determinant");
        s_direct(params) + delta_term(i, j)
    });
    let raw = Rational::from(sign_pow(i64::from(n))) * (&b / &two_n) * (poly + &two_n / &b * sums);
    Ok(raw * class_scale(m, n))
}

/// Shears `m` so that `0 < p < q` and returns the expansion of `q/p` whose
/// parity makes `s = (-1)^{n-1} q_{n-1}`.
fn matched_table(m: &HyperbolicMatrix) -> Result<(HyperbolicMatrix, ConvergentTable)> {
    let k = m.p.div_euclid(m.q);
    let (p, s) = (m.p - k * m.q, m.s + k * m.q);
    let r = (p * s - 1) / m.q;
    let sheared = HyperbolicMatrix::new(p, m.q, r, s)?;
    for parity in [Parity::Even, Parity::Odd] {
        let t = table_for(p, m.q, parity)?;
        let n = t.n() as i64;
        if sign_pow(n - 1) * t.q_k(n - 1) == s {
            return Ok((sheared, t));
        }
    }
    Err(Error::MatrixInconsistent { p, q: m.q, s })
}

pub fn zeta_meyer_higher(m: &HyperbolicMatrix, n: u32) -> Result<Rational> {
    check_usable(m, n)?;
    let (m2, t) = matched_table(m)?;
    let coeffs = e_coeffs(n, m2.trace())?;
    let sums = weighted_sum(&coeffs, |i, j| s_integral(i, j, &t, Display::Signed));
    let q = Rational::from(m2.q);
    let raw = Rational::from(sign_pow(i64::from(n))) / q.pow(2 * n as i32 - 2) * sums;
    Ok(raw * class_scale(&m2, n))
}

/// The polynomial part plus the weighted fractional parts; identically zero.
pub fn cancellation_t(m: &HyperbolicMatrix, n: u32) -> Result<Rational> {
    check_usable(m, n)?;
    let (m2, t) = matched_table(m)?;
    let coeffs = e_coeffs(n, m2.trace())?;
    let b = bernoulli_number(2 * n);
    let two_n = Rational::from(2 * i64::from(n));
    let sums = weighted_sum(&coeffs, |i, j| s_fractional(i, j, &t));
    Ok(polynomial_part(&coeffs) + two_n / b * sums)
}

/// The first `count` hyperbolic matrices with `0 < p < q`, `|s| < q` that
/// the higher Meyer formula accepts, ordered by `(q, p, s)`.
pub fn sample_matrices(count: usize) -> Vec<HyperbolicMatrix> {
    let mut out = Vec::with_capacity(count);
    let mut q = 2i64;
    while out.len() < count {
        for p in 1..q {
            if p.gcd(&q) != 1 {
                continue;
            }
            let s0 = crate::dedekind::mod_inverse(p, q);
            for s in [s0 - q, s0] {
                if s.abs() >= q || (p + s).abs() <= 2 {
                    continue;
                }
                let Ok(m) = HyperbolicMatrix::new(p, q, (p * s - 1) / q, s) else {
                    continue;
                };
                if matched_table(&m).is_ok() && out.len() < count {
                    out.push(m);
                }
            }
        }
        q += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::eval_bernoulli_polynomial;
    use crate::quadfield::ideal_matrix;
    use proptest::prelude::*;

    fn mat(p: i64, q: i64, r: i64, s: i64) -> HyperbolicMatrix {
        HyperbolicMatrix::new(p, q, r, s).unwrap()
    }

    #[test]
    fn coefficient_examples() {
        let big = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        assert_eq!(e_coeffs(1, 7).unwrap().e, big(&[1]));
        assert_eq!(e_coeffs(2, 7).unwrap().e, big(&[1, 7, 1]));
        assert_eq!(e_coeffs(3, 5).unwrap().e, big(&[1, 10, 27, 10, 1]));
    }

    #[test]
    fn siegel_equals_meyer_small() {
        let m = mat(2, 3, 1, 2);
        for n in 1..=4 {
            assert_eq!(zeta_siegel(&m, n).unwrap(), zeta_meyer_higher(&m, n).unwrap());
            assert!(cancellation_t(&m, n).unwrap().is_zero());
        }
    }

    #[test]
    fn worked_weight_four_example() {
        // coefficients -1/3, (p+s)/4, -1/3 over q^{2N-2} = q², before the class rescaling
        let m = mat(2, 3, 1, 2);
        let (_, t) = matched_table(&m).unwrap();
        let si = |i, j| s_integral(i, j, &t, Display::Signed);
        let q2 = Rational::from(9);
        let expected = (Rational::new(-1, 3) * si(1, 3)
            + Rational::new(4, 4) * si(2, 2)
            + Rational::new(-1, 3) * si(3, 1))
            / q2;
        assert_eq!(zeta_meyer_higher(&m, 2).unwrap(), expected * class_scale(&m, 2));
    }

    #[test]
    fn meyer_at_n_one_is_integral_part() {
        let m = mat(2, 3, 1, 2);
        let (_, t) = matched_table(&m).unwrap();
        assert_eq!(
            zeta_meyer_higher(&m, 1).unwrap(),
            s_integral(1, 1, &t, Display::Signed)
        );
    }

    #[test]
    fn rejects_degenerate() {
        let m = mat(4, 1, -1, 0);
        assert!(matches!(zeta_siegel(&m, 2), Err(Error::DegenerateMatrix(..))));
        assert!(matches!(cancellation_t(&m, 2), Err(Error::DegenerateMatrix(..))));
        // |s| ≥ q leaves no matching expansion
        let far = mat(1, 3, -2, -5);
        assert!(matches!(
            zeta_meyer_higher(&far, 2),
            Err(Error::MatrixInconsistent { .. })
        ));
    }

    /// Legendre symbol modulo an odd prime.
    fn legendre(a: i64, p: i64) -> i64 {
        let a = a.rem_euclid(p);
        if a == 0 {
            return 0;
        }
        let mut result = 1i64;
        let (mut base, mut exp) = (a, (p - 1) / 2);
        while exp > 0 {
            if exp & 1 == 1 {
                result = result * base % p;
            }
            base = base * base % p;
            exp >>= 1;
        }
        if result == 1 { 1 } else { -1 }
    }

    /// `ζ_K(1 - N) = ζ(1 - N) L(1 - N, χ)` for a prime discriminant `f ≡ 1 mod 4`,
    /// using generalized Bernoulli numbers.
    fn dedekind_zeta(n: u32, f: i64) -> Rational {
        let bnchi = Rational::from(f).pow(n as i32 - 1)
            * (1..=f)
                .map(|a| {
                    Rational::from(legendre(a, f))
                        * eval_bernoulli_polynomial(n, &Rational::new(a, f))
                })
                .sum::<Rational>();
        let nn = Rational::from(i64::from(n));
        let zeta = -bernoulli_number(n) / &nn;
        let l = -bnchi / nn;
        zeta * l
    }

    #[test]
    fn l_function_oracle() {
        assert_eq!(dedekind_zeta(2, 5), Rational::new(1, 30));
        for d in [5i64, 13] {
            let m = ideal_matrix(d, None).unwrap().matrix;
            for n in [2u32, 4] {
                let want = dedekind_zeta(n, d);
                assert_eq!(zeta_siegel(&m, n).unwrap(), want, "D={d} N={n}");
                assert_eq!(zeta_meyer_higher(&m, n).unwrap(), want, "D={d} N={n}");
            }
            // odd N: the real character makes ζ_K vanish
            assert!(zeta_siegel(&m, 3).unwrap().is_zero());
        }
    }

    /// Hyperbolic matrices with `0 < p < q` and `|s| < q` of a given trace.
    fn matrices(trace: i64, q_max: i64) -> Vec<HyperbolicMatrix> {
        let mut out = Vec::new();
        for q in 2..q_max {
            for p in 1..q {
                let s = trace - p;
                if s.abs() >= q || (p * s - 1).rem_euclid(q) != 0 {
                    continue;
                }
                out.push(mat(p, q, (p * s - 1) / q, s));
            }
        }
        out
    }

    #[test]
    fn class_invariance_across_conjugates() {
        // every such matrix of trace 3 is conjugate to the D = 5 one
        for m in matrices(3, 40) {
            assert_eq!(zeta_siegel(&m, 2).unwrap(), Rational::new(1, 30), "{m}");
        }
    }

    #[test]
    fn sample_matrices_are_usable() {
        let ms = sample_matrices(20);
        assert_eq!(ms.len(), 20);
        assert!(ms.iter().any(|m| m.trace() < -2));
        for m in &ms {
            for n in 1..=4 {
                assert_eq!(zeta_siegel(m, n).unwrap(), zeta_meyer_higher(m, n).unwrap(), "{m} N={n}");
                assert!(cancellation_t(m, n).unwrap().is_zero(), "{m} N={n}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn siegel_meyer_and_cancellation(trace in 3i64..14, pick in 0usize..1000, n in 1u32..5) {
            let ms = matrices(trace, 60);
            prop_assume!(!ms.is_empty());
            let m = ms[pick % ms.len()];
            prop_assert_eq!(zeta_siegel(&m, n).unwrap(), zeta_meyer_higher(&m, n).unwrap());
            prop_assert!(cancellation_t(&m, n).unwrap().is_zero());
        }
    }
}

//! Continued fractions of `q/p` and the convergent ladder `(p_k, q_k, D_k)`.

use serde::{Deserialize, Serialize};

use crate::arith::{gcd_i64, Rational};
use crate::error::{Error, Result};

/// Which of the two finite expansions of a rational to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    /// Last term at least 2 (unless the expansion has a single term).
    #[default]
    Canonical,
    /// Even number of terms.
    Even,
    /// Odd number of terms.
    Odd,
}

impl std::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(Parity::Canonical),
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            _ => Err(Error::InvalidInput(format!(
                "parity must be canonical, even or odd, got '{s}'"
            ))),
        }
    }
}

/// Terms `a_1..a_n` with `q/p = a_1 + 1/(a_2 + ...)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuedFraction {
    pub terms: Vec<i64>,
    pub source_p: i64,
    pub source_q: i64,
}

impl ContinuedFraction {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Folds the terms back into a rational.
    pub fn fold(&self) -> Rational {
        fold_terms(&self.terms)
    }
}

pub fn fold_terms(terms: &[i64]) -> Rational {
    let mut iter = terms.iter().rev();
    let Some(&last) = iter.next() else {
        return Rational::zero();
    };
    let mut acc = Rational::from(last);
    for &a in iter {
        acc = Rational::from(a) + acc.recip();
    }
    acc
}

pub fn check_pair(p: i64, q: i64) -> Result<()> {
    if p <= 0 || q <= 0 {
        return Err(Error::InvalidInput(format!(
            "p and q must be positive, got p = {p}, q = {q}"
        )));
    }
    if p >= q {
        return Err(Error::InvalidInput(format!(
            "expected 0 < p < q, got p = {p}, q = {q}"
        )));
    }
    let g = gcd_i64(p, q);
    if g != 1 {
        return Err(Error::NotCoprime { p, q, gcd: g });
    }
    Ok(())
}

/// Expansion of `q/p` for coprime `0 < p < q`.
pub fn cf_expand(p: i64, q: i64, parity: Parity) -> Result<ContinuedFraction> {
    check_pair(p, q)?;
    let mut terms = Vec::new();
    let (mut x, mut y) = (q, p);
    while y != 0 {
        terms.push(x / y);
        (x, y) = (y, x % y);
    }
    let want_even = match parity {
        Parity::Canonical => None,
        Parity::Even => Some(true),
        Parity::Odd => Some(false),
    };
    if let Some(even) = want_even {
        if (terms.len() % 2 == 0) != even {
            flip_tail(&mut terms);
        }
    }
    Ok(ContinuedFraction {
        terms,
        source_p: p,
        source_q: q,
    })
}

/// `[.., a_n]` <-> `[.., a_n - 1, 1]`.
fn flip_tail(terms: &mut Vec<i64>) {
    let n = terms.len();
    if terms[n - 1] >= 2 {
        terms[n - 1] -= 1;
        terms.push(1);
    } else {
        // a_n = 1 and n >= 2 here, since q/p > 1
        terms.pop();
        terms[n - 2] += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergentRow {
    pub k: i64,
    pub p_k: i64,
    pub q_k: i64,
    pub d_k: i64,
}

/// Rows `k = -1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergentTable {
    pub p: i64,
    pub q: i64,
    pub terms: Vec<i64>,
    pub rows: Vec<ConvergentRow>,
}

impl ConvergentTable {
    /// Number of terms `n`.
    pub fn n(&self) -> usize {
        self.terms.len()
    }

    fn row(&self, k: i64) -> &ConvergentRow {
        &self.rows[(k + 1) as usize]
    }

    pub fn p_k(&self, k: i64) -> i64 {
        self.row(k).p_k
    }

    pub fn q_k(&self, k: i64) -> i64 {
        self.row(k).q_k
    }

    pub fn d_k(&self, k: i64) -> i64 {
        self.row(k).d_k
    }

    /// `a_k` with the 1-based indexing of the expansion.
    pub fn a(&self, k: i64) -> i64 {
        self.terms[(k - 1) as usize]
    }

    /// Ladder for `q = 1, p = 0`: no terms, rows `k = -1, 0` only.
    pub fn trivial() -> Self {
        build(0, 1, Vec::new())
    }
}

pub fn convergent_table(cf: &ContinuedFraction) -> ConvergentTable {
    build(cf.source_p, cf.source_q, cf.terms.clone())
}

fn build(p: i64, q: i64, terms: Vec<i64>) -> ConvergentTable {
    let mut rows = Vec::with_capacity(terms.len() + 2);
    let (mut pp, mut qp) = (1i64, 0i64);
    let (mut pc, mut qc) = (0i64, 1i64);
    rows.push(ConvergentRow {
        k: -1,
        p_k: pp,
        q_k: qp,
        d_k: -q,
    });
    rows.push(ConvergentRow {
        k: 0,
        p_k: pc,
        q_k: qc,
        d_k: p,
    });
    for (idx, &a) in terms.iter().enumerate() {
        let (pn, qn) = (pp + a * pc, qp + a * qc);
        (pp, qp, pc, qc) = (pc, qc, pn, qn);
        rows.push(ConvergentRow {
            k: idx as i64 + 1,
            p_k: pc,
            q_k: qc,
            d_k: p * qc - q * pc,
        });
    }
    ConvergentTable { p, q, terms, rows }
}

/// Ladder for `(p, q)` with the requested parity, including `q = 1`.
pub fn table_for(p: i64, q: i64, parity: Parity) -> Result<ConvergentTable> {
    if q == 1 {
        return Ok(ConvergentTable::trivial());
    }
    Ok(convergent_table(&cf_expand(p, q, parity)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::sign_pow;
    use proptest::prelude::*;

    fn coprime_pair() -> impl Strategy<Value = (i64, i64)> {
        (2i64..=10_000)
            .prop_flat_map(|q| (1..q, Just(q)))
            .prop_filter("coprime", |&(p, q)| gcd_i64(p, q) == 1)
    }

    #[test]
    fn examples() {
        assert_eq!(cf_expand(2, 3, Parity::Canonical).unwrap().terms, vec![1, 2]);
        assert_eq!(cf_expand(5, 7, Parity::Canonical).unwrap().terms, vec![1, 2, 2]);
        assert_eq!(cf_expand(2, 3, Parity::Odd).unwrap().terms, vec![1, 1, 1]);
        assert_eq!(cf_expand(1, 2, Parity::Even).unwrap().terms, vec![1, 1]);
        assert_eq!(cf_expand(3, 4, Parity::Even).unwrap().terms, vec![1, 3]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            cf_expand(2, 4, Parity::Canonical),
            Err(Error::NotCoprime { gcd: 2, .. })
        ));
        assert!(cf_expand(3, 3, Parity::Canonical).is_err());
        assert!(cf_expand(5, 3, Parity::Canonical).is_err());
        assert!(cf_expand(0, 3, Parity::Canonical).is_err());
    }

    #[test]
    fn table_examples() {
        let t = convergent_table(&cf_expand(2, 3, Parity::Canonical).unwrap());
        let rows: Vec<_> = t.rows.iter().map(|r| (r.k, r.p_k, r.q_k, r.d_k)).collect();
        assert_eq!(rows, vec![(-1, 1, 0, -3), (0, 0, 1, 2), (1, 1, 1, -1), (2, 2, 3, 0)]);

        let t = convergent_table(&cf_expand(1, 2, Parity::Canonical).unwrap());
        let rows: Vec<_> = t.rows.iter().map(|r| (r.k, r.p_k, r.q_k, r.d_k)).collect();
        assert_eq!(rows, vec![(-1, 1, 0, -2), (0, 0, 1, 1), (1, 1, 2, 0)]);
    }

    fn check_table(t: &ConvergentTable) -> std::result::Result<(), TestCaseError> {
        let n = t.n() as i64;
        prop_assert_eq!((t.p_k(-1), t.q_k(-1)), (1, 0));
        prop_assert_eq!((t.p_k(0), t.q_k(0)), (0, 1));
        for k in 0..n {
            prop_assert_eq!(t.p_k(k + 1), t.p_k(k - 1) + t.a(k + 1) * t.p_k(k));
            prop_assert_eq!(t.q_k(k + 1), t.q_k(k - 1) + t.a(k + 1) * t.q_k(k));
            prop_assert_eq!(t.d_k(k + 1), t.d_k(k - 1) + t.a(k + 1) * t.d_k(k));
        }
        for k in 0..=n {
            let det = t.p_k(k - 1) * t.q_k(k) - t.p_k(k) * t.q_k(k - 1);
            prop_assert_eq!(det, sign_pow(k));
        }
        prop_assert_eq!((t.p_k(n), t.q_k(n)), (t.p, t.q));
        prop_assert_eq!(t.d_k(-1), -t.q);
        prop_assert_eq!(t.d_k(0), t.p);
        prop_assert_eq!(t.d_k(n), 0);
        for k in 0..n {
            prop_assert!(sign_pow(k) * t.d_k(k) > 0);
        }
        Ok(())
    }

    proptest! {
        #[test]
        fn fold_reconstructs((p, q) in coprime_pair()) {
            for parity in [Parity::Canonical, Parity::Even, Parity::Odd] {
                let cf = cf_expand(p, q, parity).unwrap();
                prop_assert!(cf.terms.iter().all(|&a| a >= 1));
                prop_assert_eq!(cf.fold(), Rational::new(q, p));
                match parity {
                    Parity::Even => prop_assert_eq!(cf.len() % 2, 0),
                    Parity::Odd => prop_assert_eq!(cf.len() % 2, 1),
                    Parity::Canonical => prop_assert!(cf.len() == 1 || *cf.terms.last().unwrap() >= 2),
                }
            }
        }

        #[test]
        fn table_invariants((p, q) in coprime_pair()) {
            for parity in [Parity::Even, Parity::Odd] {
                check_table(&convergent_table(&cf_expand(p, q, parity).unwrap()))?;
            }
        }
    }
}

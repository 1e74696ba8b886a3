//! Todd series of the plane cone spanned by `(1, 0)` and `(p, q)`.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{bernoulli_number, binomial, factorial, sign_pow, Rational};
use crate::contfrac::{table_for, Parity};
use crate::dedekind::{delta_term, s_direct, SumParams};
use crate::error::{Error, Result};

/// Largest modulus accepted by [`todd_numeric_check`].
pub const NUMERIC_MAX_Q: i64 = 50;
/// Largest total degree accepted by [`todd_numeric_check`].
pub const NUMERIC_MAX_DEGREE: u32 = 8;
/// Largest degree accepted by [`todd_homogeneous`].
pub const MAX_HOMOGENEOUS_DEGREE: u32 = 16;

/// `t_ij(p, q) = -(-q)^{i+j-1} (s_ij(p, q) + δ(i,j) B_i B_j)`, the
/// `x^i y^j` coefficient of the Todd series scaled by `i! j!`.
pub fn todd_coefficient(i: u32, j: u32, p: i64, q: i64) -> Result<Rational> {
    let params = SumParams::new(i, j, p, q)?;
    let weight = i as i32 + j as i32;
    let mq = Rational::from(-params.q);
    Ok(-(mq.pow(weight - 1)) * (s_direct(params) + delta_term(i, j)))
}

/// `M(x, y) = m x + l y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LinearForm {
    pub m: i64,
    pub l: i64,
}

/// `M_k = (-1)^k (q_k x + D_k y)` for `k = -1..=n`.
pub fn mk_forms(p: i64, q: i64) -> Result<Vec<LinearForm>> {
    let t = table_for(p, q, Parity::Canonical)?;
    Ok(t.rows
        .iter()
        .map(|r| LinearForm {
            m: sign_pow(r.k) * r.q_k,
            l: sign_pow(r.k) * r.d_k,
        })
        .collect())
}

/// Homogeneous polynomial of degree `N`; `coeffs[a]` multiplies `x^a y^{N-a}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomogeneousPoly {
    pub degree: u32,
    pub coeffs: Vec<Rational>,
}

impl HomogeneousPoly {
    pub fn zero(degree: u32) -> Self {
        HomogeneousPoly {
            degree,
            coeffs: vec![Rational::zero(); degree as usize + 1],
        }
    }

    /// Coefficient of `x^a y^b`.
    pub fn coeff(&self, a: u32, b: u32) -> Rational {
        if a + b != self.degree {
            return Rational::zero();
        }
        self.coeffs[a as usize].clone()
    }

    fn power(form: LinearForm, e: u32) -> Self {
        let mut out = HomogeneousPoly::zero(e);
        let (m, l) = (BigInt::from(form.m), BigInt::from(form.l));
        for a in 0..=e {
            out.coeffs[a as usize] =
                Rational::from(binomial(e, a) * m.pow(a) * l.pow(e - a));
        }
        out
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = HomogeneousPoly::zero(self.degree + other.degree);
        for (a, x) in self.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (b, y) in other.coeffs.iter().enumerate() {
                out.coeffs[a + b] += x * y;
            }
        }
        out
    }

    fn scale(&self, c: &Rational) -> Self {
        HomogeneousPoly {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.degree, other.degree);
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y;
        }
    }
}

/// Degree-`N` part of the Todd series, expanded through the forms `M_k`.
pub fn todd_homogeneous(n_deg: u32, p: i64, q: i64) -> Result<HomogeneousPoly> {
    if n_deg % 2 == 1 || n_deg < 2 {
        return Err(Error::InvalidInput(format!(
            "degree must be even and at least 2, got {n_deg}"
        )));
    }
    if n_deg > MAX_HOMOGENEOUS_DEGREE {
        return Err(Error::InvalidInput(format!(
            "degree {n_deg} exceeds the supported maximum {MAX_HOMOGENEOUS_DEGREE}"
        )));
    }
    let params = SumParams::new(1, 1, p, q)?;
    let t = table_for(params.p, params.q, Parity::Canonical)?;
    let forms = mk_forms_from(&t);
    let n = t.n() as i64;
    let form = |k: i64| forms[(k + 1) as usize];
    let xy = HomogeneousPoly {
        degree: 2,
        coeffs: vec![Rational::zero(), Rational::one(), Rational::zero()],
    };
    let x = LinearForm { m: 1, l: 0 };
    let y = LinearForm { m: 0, l: 1 };
    let bn = bernoulli_number(n_deg) / Rational::from(factorial(n_deg));
    let qr = Rational::from(params.q);

    let mut total = HomogeneousPoly::zero(n_deg);
    for k in -1..n {
        let mut inner = HomogeneousPoly::zero(n_deg - 2);
        for i in 0..=(n_deg - 2) {
            let c = bernoulli_number(i + 1) * bernoulli_number(n_deg - i - 1)
                / Rational::from(factorial(i + 1) * factorial(n_deg - i - 1));
            let term = HomogeneousPoly::power(form(k), n_deg - 2 - i)
                .mul(&HomogeneousPoly::power(form(k + 1), i));
            inner.add_assign(&term.scale(&c));
        }
        let c = &qr * Rational::from(sign_pow(k + 1));
        total.add_assign(&xy.mul(&inner).scale(&c));
    }
    for k in 0..n {
        let mut inner = HomogeneousPoly::zero(n_deg - 2);
        for i in 0..=(n_deg - 2) {
            let term = HomogeneousPoly::power(form(k - 1), n_deg - 2 - i)
                .mul(&HomogeneousPoly::power(form(k + 1), i));
            inner.add_assign(&term);
        }
        let c = &qr * &bn * Rational::from(sign_pow(k) * t.a(k + 1));
        total.add_assign(&xy.mul(&inner).scale(&c));
    }
    let edge = HomogeneousPoly::power(form(0), n_deg - 1)
        .mul(&HomogeneousPoly::power(x, 1))
        .scale(&bn);
    total.add_assign(&edge);
    let edge = HomogeneousPoly::power(form(n - 1), n_deg - 1)
        .mul(&HomogeneousPoly::power(y, 1))
        .scale(&bn);
    total.add_assign(&edge);
    Ok(total)
}

fn mk_forms_from(t: &crate::contfrac::ConvergentTable) -> Vec<LinearForm> {
    t.rows
        .iter()
        .map(|r| LinearForm {
            m: sign_pow(r.k) * r.q_k,
            l: sign_pow(r.k) * r.d_k,
        })
        .collect()
}

/// Taylor coefficients of `x / (1 - ζ e^{-x})` up to `x^deg`.
fn series_factor(zeta: Complex64, deg: usize) -> Vec<Complex64> {
    let inv_fact: Vec<f64> = (0..=deg as u32 + 1)
        .scan(1.0f64, |acc, n| {
            if n > 0 {
                *acc /= f64::from(n);
            }
            Some(*acc)
        })
        .collect();
    if (zeta - Complex64::new(1.0, 0.0)).norm() < 1e-12 {
        return (0..=deg)
            .map(|n| {
                let b = bernoulli_number(n as u32).to_f64();
                Complex64::new(b * sign_pow(n as i64) as f64 * inv_fact[n], 0.0)
            })
            .collect();
    }
    // 1 - ζ e^{-x} = (1 - ζ) - ζ Σ_{n≥1} (-1)^n x^n / n!
    let den: Vec<Complex64> = (0..deg)
        .map(|n| {
            if n == 0 {
                Complex64::new(1.0, 0.0) - zeta
            } else {
                -zeta * (sign_pow(n as i64) as f64 * inv_fact[n])
            }
        })
        .collect();
    let mut inv = vec![Complex64::new(0.0, 0.0); deg.max(1)];
    inv[0] = den[0].inv();
    for n in 1..deg {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=n {
            acc += den[k] * inv[n - k];
        }
        inv[n] = -acc * inv[0];
    }
    let mut out = vec![Complex64::new(0.0, 0.0)];
    out.extend(inv.into_iter().take(deg));
    out
}

fn unit_root(num: i64, q: i64) -> Complex64 {
    let r = num.rem_euclid(q) as f64 / q as f64;
    Complex64::from_polar(1.0, TAU * r)
}

/// Maximum deviation between the Todd series summed numerically over the
/// group `Z/qZ` and the exact coefficients `t_ij / (i! j!)`, `i + j ≤ max_degree`.
pub fn todd_numeric_check(p: i64, q: i64, max_degree: u32) -> Result<f64> {
    if q > NUMERIC_MAX_Q {
        return Err(Error::InvalidInput(format!(
            "q = {q} exceeds the numeric check bound {NUMERIC_MAX_Q}"
        )));
    }
    if max_degree > NUMERIC_MAX_DEGREE {
        return Err(Error::InvalidInput(format!(
            "degree {max_degree} exceeds the numeric check bound {NUMERIC_MAX_DEGREE}"
        )));
    }
    let params = SumParams::new(0, 0, p, q)?;
    let (p, q) = (params.p, params.q);
    let deg = max_degree as usize;
    let mut series = vec![vec![Complex64::new(0.0, 0.0); deg + 1]; deg + 1];
    for k in 0..q {
        let a = series_factor(unit_root(-p * k, q), deg);
        let b = series_factor(unit_root(k, q), deg);
        for i in 0..=deg {
            for j in 0..=(deg - i) {
                series[i][j] += a[i] * b[j];
            }
        }
    }
    let mut worst = 0.0f64;
    for i in 0..=max_degree {
        for j in 0..=(max_degree - i) {
            let exact = todd_coefficient(i, j, p, q)?
                / Rational::from(factorial(i) * factorial(j));
            let dev = (series[i as usize][j as usize] - Complex64::new(exact.to_f64(), 0.0)).norm();
            worst = worst.max(dev);
        }
    }
    Ok(worst)
}

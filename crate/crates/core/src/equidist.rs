//! Equidistribution experiments on the graph points
//! `H_ij(p, q) = (p/q, {R q^{N-2} s_ij(p, q)})`: Weyl sums, complete
//! exponential sums of the associated Laurent polynomials, empirical Weil
//! bounds, and CSV scans.

use std::f64::consts::TAU;
use std::path::Path;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{binomial, gcd_i64, Rational};
use crate::contfrac::{table_for, Parity};
use crate::dedekind::{
    fractional_certificate, mod_inverse, norm_constants, s_fractional, DirectSummer, SumParams,
};
use crate::error::{Error, Result};

/// Environment variable consulted when no explicit worker count is given.
pub const WORKERS_ENV: &str = "DEDEKIND_WORKERS";

/// Worker count: explicit value, else `DEDEKIND_WORKERS`, else the machine's
/// available parallelism.
pub fn resolve_workers(explicit: Option<usize>) -> Result<usize> {
    if let Some(w) = explicit {
        if w == 0 {
            return Err(Error::InvalidInput("worker count must be positive".into()));
        }
        return Ok(w);
    }
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(w),
            _ => Err(Error::InvalidInput(format!("{WORKERS_ENV}='{v}' is not a positive integer"))),
        };
    }
    Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))
}

fn check_weight(i: u32, j: u32) -> Result<u32> {
    let n = i + j;
    if i == 0 || j == 0 {
        return Err(Error::InvalidInput(format!("indices must be at least 1, got ({i}, {j})")));
    }
    if n % 2 == 1 {
        return Err(Error::OddWeight { i, j, weight: n });
    }
    Ok(n)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphPoint {
    pub x: Rational,
    pub y: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanRecord {
    pub q: i64,
    pub p: i64,
    pub point: GraphPoint,
}

/// A way of computing `{R q^{N-2} s_ij(p, q)}`.
pub trait FractionalRoute: Send + Sync {
    fn name(&self) -> &'static str;

    fn y(&self, i: u32, j: u32, p: i64, q: i64) -> Result<Rational>;

    /// `q y`, an integer in `[0, q)`.
    fn residue(&self, i: u32, j: u32, p: i64, q: i64) -> Result<i64> {
        let scaled = self.y(i, j, p, q)? * Rational::from(q);
        if !scaled.is_integer() {
            return Err(Error::InvalidInput(format!(
                "route {} produced a fractional part with denominator not dividing {q}",
                self.name()
            )));
        }
        Ok(scaled.numer().to_i64().expect("residue below q"))
    }
}

/// From the defining sum.
pub struct DirectRoute;

/// From the closed-form fractional part `R s^R / q`.
pub struct ClosedFormRoute;

/// From the modular certificate `α r (p'^i C(N-1,i) + p^j C(N-1,j)) / q`.
pub struct CertificateRoute;

impl FractionalRoute for DirectRoute {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn y(&self, i: u32, j: u32, p: i64, q: i64) -> Result<Rational> {
        check_weight(i, j)?;
        let params = SumParams::new(i, j, p, q)?;
        let nc = norm_constants(i, j)?;
        let summer = DirectSummer::new(i, j, params.q)?;
        Ok(scaled_fract(&summer, &nc.big_r, nc.n, params.p, params.q))
    }
}

fn scaled_fract(summer: &DirectSummer, big_r: &BigInt, n: u32, p: i64, q: i64) -> Rational {
    let (num, scale) = summer.scaled(p);
    let num = num * big_r * BigInt::from(q).pow(n - 2);
    Rational::new(num.mod_floor(scale), scale.clone())
}

impl FractionalRoute for ClosedFormRoute {
    fn name(&self) -> &'static str {
        "closed-form"
    }

    fn y(&self, i: u32, j: u32, p: i64, q: i64) -> Result<Rational> {
        check_weight(i, j)?;
        let params = SumParams::new(i, j, p, q)?;
        if params.q == 1 {
            return Ok(Rational::zero());
        }
        let nc = norm_constants(i, j)?;
        let t = table_for(params.p, params.q, Parity::Canonical)?;
        let value = Rational::from(nc.big_r) * s_fractional(i, j, &t) / Rational::from(params.q);
        Ok(value.fract_part())
    }
}

impl FractionalRoute for CertificateRoute {
    fn name(&self) -> &'static str {
        "certificate"
    }

    fn y(&self, i: u32, j: u32, p: i64, q: i64) -> Result<Rational> {
        check_weight(i, j)?;
        Ok(fractional_certificate(i, j, p, q)?.fract_part())
    }

    fn residue(&self, i: u32, j: u32, p: i64, q: i64) -> Result<i64> {
        check_weight(i, j)?;
        let params = SumParams::new(i, j, p, q)?;
        Ok(CertificateKernel::new(i, j)?.residue(params.p, params.q))
    }
}

/// Integer constants of the certificate for fixed `(i, j)`.
#[derive(Debug, Clone)]
struct CertificateKernel {
    i: u32,
    j: u32,
    ar: BigInt,
    ci: BigInt,
    cj: BigInt,
}

impl CertificateKernel {
    fn new(i: u32, j: u32) -> Result<Self> {
        let nc = norm_constants(i, j)?;
        Ok(CertificateKernel {
            i,
            j,
            ar: &nc.alpha * &nc.r,
            ci: binomial(nc.n - 1, i),
            cj: binomial(nc.n - 1, j),
        })
    }

    fn residue(&self, p: i64, q: i64) -> i64 {
        if q == 1 {
            return 0;
        }
        let m = |v: &BigInt| v.mod_floor(&BigInt::from(q)).to_i128().expect("below q");
        let (ar, ci, cj) = (m(&self.ar), m(&self.ci), m(&self.cj));
        let q128 = i128::from(q);
        let pinv = i128::from(mod_inverse(p, q));
        let a = pow_mod(pinv, self.i, q128) * ci % q128;
        let b = pow_mod(i128::from(p), self.j, q128) * cj % q128;
        ((a + b) % q128 * ar % q128) as i64
    }
}

fn pow_mod(base: i128, exp: u32, m: i128) -> i128 {
    let mut result = 1 % m;
    let mut b = base.rem_euclid(m);
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result = result * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    result
}

/// `H_ij(p, q)` with `y` from the direct sum.
pub fn graph_point(i: u32, j: u32, p: i64, q: i64) -> Result<GraphPoint> {
    graph_point_with(&DirectRoute, i, j, p, q)
}

pub fn graph_point_with(
    route: &dyn FractionalRoute,
    i: u32,
    j: u32,
    p: i64,
    q: i64,
) -> Result<GraphPoint> {
    crate::contfrac::check_pair(p, q)?;
    Ok(GraphPoint {
        x: Rational::new(p, q),
        y: route.y(i, j, p, q)?,
    })
}

/// `m_1 x + m_2 α_N r_N (C(N-1,i) x^{-i} + C(N-1,j) x^j)` as `(coefficient, exponent)` terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LaurentExponent {
    pub terms: Vec<(i64, i64)>,
}

impl LaurentExponent {
    pub fn new(mut terms: Vec<(i64, i64)>) -> Self {
        terms.sort_by_key(|t| t.1);
        let mut merged: Vec<(i64, i64)> = Vec::new();
        for (c, e) in terms {
            match merged.last_mut() {
                Some(last) if last.1 == e => last.0 += c,
                _ => merged.push((c, e)),
            }
        }
        merged.retain(|t| t.0 != 0);
        LaurentExponent { terms: merged }
    }

    pub fn for_weight(m: (i64, i64), i: u32, j: u32) -> Result<Self> {
        let n = check_weight(i, j)?;
        let nc = norm_constants(i, j)?;
        let base = BigInt::from(m.1) * &nc.alpha * &nc.r;
        let narrow = |v: BigInt| {
            v.to_i64()
                .ok_or_else(|| Error::Overflow(format!("Laurent coefficient {v}")))
        };
        Ok(LaurentExponent::new(vec![
            (m.0, 1),
            (narrow(&base * binomial(n - 1, i))?, -i64::from(i)),
            (narrow(&base * binomial(n - 1, j))?, i64::from(j)),
        ]))
    }

    /// `F(x) mod q` for a unit `x` with inverse `xinv`.
    fn eval_mod(&self, x: i128, xinv: i128, q: i128) -> i128 {
        let mut acc = 0i128;
        for &(c, e) in &self.terms {
            let base = if e < 0 { xinv } else { x };
            let v = pow_mod(base, e.unsigned_abs() as u32, q) * i128::from(c).rem_euclid(q) % q;
            acc = (acc + v) % q;
        }
        acc
    }
}

/// Compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: Complex64,
    comp: Complex64,
}

impl KahanSum {
    pub fn add(&mut self, v: Complex64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> Complex64 {
        self.sum
    }
}

fn e_q(residue: i128, q: i128) -> Complex64 {
    Complex64::from_polar(1.0, TAU * residue.rem_euclid(q) as f64 / q as f64)
}

/// `Σ_{x ∈ (Z/qZ)^*} e(F(x)/q)`.
pub fn exp_sum_k(f: &LaurentExponent, q: i64) -> Result<Complex64> {
    if q < 1 {
        return Err(Error::InvalidInput(format!("q must be positive, got {q}")));
    }
    if q == 1 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let q128 = i128::from(q);
    let mut acc = KahanSum::default();
    for x in 1..q {
        if gcd_i64(x, q) != 1 {
            continue;
        }
        let xinv = i128::from(mod_inverse(x, q));
        acc.add(e_q(f.eval_mod(i128::from(x), xinv, q128), q128));
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, Serialize)]
pub struct WeylPoint {
    pub x: i64,
    pub pairs: u64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

fn check_m(m: (i64, i64)) -> Result<()> {
    if m == (0, 0) {
        return Err(Error::InvalidInput("m must be nonzero".into()));
    }
    Ok(())
}

/// `E(m, x)` for `x = x_max`.
pub fn weyl_sum(m: (i64, i64), i: u32, j: u32, x_max: i64) -> Result<Complex64> {
    let pts = weyl_checkpoints(&CertificateRoute, &[m], i, j, &[x_max], None)?;
    let p = &pts[0][0];
    Ok(Complex64::new(p.re, p.im))
}

/// `E(m, x)` at every checkpoint, for several `m` at once; result indexed
/// `[m][checkpoint]`. Per-`q` partial sums are merged in `q` order, so the
/// output does not depend on the worker count.
pub fn weyl_checkpoints(
    route: &dyn FractionalRoute,
    ms: &[(i64, i64)],
    i: u32,
    j: u32,
    checkpoints: &[i64],
    workers: Option<usize>,
) -> Result<Vec<Vec<WeylPoint>>> {
    check_weight(i, j)?;
    for &m in ms {
        check_m(m)?;
    }
    let x_max = checkpoints.iter().copied().max().unwrap_or(0);
    if checkpoints.iter().any(|&x| x < 2) {
        return Err(Error::InvalidInput("checkpoints must be at least 2".into()));
    }
    let fast = (route.name() == "certificate").then(|| CertificateKernel::new(i, j)).transpose()?;
    let per_q = |q: i64| -> Result<Vec<KahanSum>> {
        let mut sums = vec![KahanSum::default(); ms.len()];
        let q128 = i128::from(q);
        for p in 1..q {
            if gcd_i64(p, q) != 1 {
                continue;
            }
            let c = match &fast {
                Some(k) => k.residue(p, q),
                None => route.residue(i, j, p, q)?,
            };
            for (acc, m) in sums.iter_mut().zip(ms) {
                let r = (i128::from(m.0) * i128::from(p) + i128::from(m.1) * i128::from(c)) % q128;
                acc.add(e_q(r, q128));
            }
        }
        Ok(sums)
    };
    let partials: Vec<Vec<KahanSum>> = pool(resolve_workers(workers)?)?
        .install(|| (2..=x_max).into_par_iter().map(per_q).collect::<Result<Vec<_>>>())?;
    let mut sorted: Vec<i64> = checkpoints.to_vec();
    sorted.sort_unstable();
    let mut totals = vec![KahanSum::default(); ms.len()];
    let mut pairs: u64 = 0;
    let mut at: Vec<Vec<WeylPoint>> = vec![Vec::new(); ms.len()];
    let mut next = 0usize;
    for (idx, part) in partials.iter().enumerate() {
        let q = idx as i64 + 2;
        pairs += euler_phi(q);
        for (t, pv) in totals.iter_mut().zip(part) {
            t.add(pv.value());
        }
        while next < sorted.len() && sorted[next] == q {
            for (k, t) in totals.iter().enumerate() {
                let v = t.value() / pairs as f64;
                at[k].push(WeylPoint {
                    x: q,
                    pairs,
                    re: v.re,
                    im: v.im,
                    abs: v.norm(),
                });
            }
            next += 1;
        }
    }
    Ok(at)
}

/// `E(m, x)` over already computed graph points, `x` the largest `q` present.
pub fn weyl_from_rows(m: (i64, i64), rows: &[ScanRecord]) -> Result<WeylPoint> {
    check_m(m)?;
    let mut acc = KahanSum::default();
    for r in rows {
        let c = &r.point.y * Rational::from(r.q);
        if !c.is_integer() {
            return Err(Error::InvalidInput(format!(
                "y = {} at ({}, {}) does not have denominator dividing q",
                r.point.y, r.p, r.q
            )));
        }
        let c = c.numer().to_i128().expect("residue below q");
        let q = i128::from(r.q);
        acc.add(e_q((i128::from(m.0) * i128::from(r.p) + i128::from(m.1) * c) % q, q));
    }
    let pairs = rows.len() as u64;
    let v = if pairs == 0 { Complex64::new(0.0, 0.0) } else { acc.value() / pairs as f64 };
    Ok(WeylPoint {
        x: rows.iter().map(|r| r.q).max().unwrap_or(0),
        pairs,
        re: v.re,
        im: v.im,
        abs: v.norm(),
    })
}

pub fn euler_phi(n: i64) -> u64 {
    let mut n = n;
    let mut result = n;
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            while n % f == 0 {
                n /= f;
            }
            result -= result / f;
        }
        f += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result as u64
}

/// `φ(0..=n)` by sieve.
pub fn phi_sieve(n: usize) -> Vec<u64> {
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    for k in 2..=n {
        if phi[k] == k as u64 {
            let mut m = k;
            while m <= n {
                phi[m] -= phi[m] / k as u64;
                m += k;
            }
        }
    }
    phi
}

pub fn primes_up_to(n: usize) -> Vec<i64> {
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for k in 2..=n {
        if sieve[k] {
            out.push(k as i64);
            let mut m = k * k;
            while m <= n {
                sieve[m] = false;
                m += k;
            }
        }
    }
    out
}

/// `f` reduced for the prime field: coefficients mod `P`, exponents
/// divisible by `P` divided out (`x^P = x` on the field), equal exponents
/// merged and the constant term dropped.
fn reduce_for_prime(f: &LaurentExponent, prime: i64) -> Vec<(i64, i64)> {
    let mut terms: Vec<(i64, i64)> = Vec::new();
    for &(c, e) in &f.terms {
        let mut e = e;
        while e != 0 && e % prime == 0 {
            e /= prime;
        }
        terms.push((c.rem_euclid(prime), e));
    }
    let mut out: Vec<(i64, i64)> = Vec::new();
    for (c, e) in LaurentExponent::new(terms).terms {
        let c = c.rem_euclid(prime);
        if c != 0 && e != 0 {
            out.push((c, e));
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct WeilPrime {
    pub prime: i64,
    pub abs_k: f64,
    pub ratio: f64,
    /// `v_0 + v_∞` for the reduced polynomial.
    pub constant: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeilReport {
    pub m: (i64, i64),
    pub i: u32,
    pub j: u32,
    pub prime_max: i64,
    pub primes_checked: usize,
    pub max_ratio: f64,
    /// Ratio divided by the pole-order constant, maximized over primes.
    pub max_normalized: f64,
    /// Primes where `f` is constant on the field; `|K| = P - 1` there.
    pub degenerate: Vec<i64>,
    pub violations: Vec<WeilPrime>,
    pub passed: bool,
}

/// Checks `|K(m F_ij, P)| ≤ (v_0 + v_∞) √P` for primes `P ≤ prime_max`.
pub fn weil_check(m: (i64, i64), i: u32, j: u32, prime_max: i64) -> Result<WeilReport> {
    check_m(m)?;
    let f = LaurentExponent::for_weight(m, i, j)?;
    let mut report = WeilReport {
        m,
        i,
        j,
        prime_max,
        primes_checked: 0,
        max_ratio: 0.0,
        max_normalized: 0.0,
        degenerate: Vec::new(),
        violations: Vec::new(),
        passed: true,
    };
    for prime in primes_up_to(prime_max.max(0) as usize) {
        let reduced = reduce_for_prime(&f, prime);
        if reduced.is_empty() {
            report.degenerate.push(prime);
            continue;
        }
        let v0 = reduced.iter().map(|t| (-t.1).max(0)).max().unwrap_or(0);
        let vinf = reduced.iter().map(|t| t.1.max(0)).max().unwrap_or(0);
        let constant = (v0 + vinf) as u32;
        let k = exp_sum_k(&LaurentExponent::new(reduced), prime)?;
        let ratio = k.norm() / (prime as f64).sqrt();
        report.primes_checked += 1;
        report.max_ratio = report.max_ratio.max(ratio);
        report.max_normalized = report.max_normalized.max(ratio / f64::from(constant));
        if ratio > f64::from(constant) + 1e-9 {
            report.passed = false;
            report.violations.push(WeilPrime {
                prime,
                abs_k: k.norm(),
                ratio,
                constant,
            });
        }
    }
    Ok(report)
}

/// Computes all coprime pairs `p < q ≤ q_max` in parallel.
pub fn scan(
    route: &dyn FractionalRoute,
    i: u32,
    j: u32,
    q_max: i64,
    workers: Option<usize>,
) -> Result<Vec<ScanRecord>> {
    check_weight(i, j)?;
    let nc = norm_constants(i, j)?;
    let direct = route.name() == "direct";
    let per_q = |q: i64| -> Result<Vec<ScanRecord>> {
        let summer = direct.then(|| DirectSummer::new(i, j, q)).transpose()?;
        let mut rows = Vec::new();
        for p in 1..q {
            if gcd_i64(p, q) != 1 {
                continue;
            }
            let y = match &summer {
                Some(s) => scaled_fract(s, &nc.big_r, nc.n, p, q),
                None => route.y(i, j, p, q)?,
            };
            rows.push(ScanRecord {
                q,
                p,
                point: GraphPoint {
                    x: Rational::new(p, q),
                    y,
                },
            });
        }
        Ok(rows)
    };
    let chunks: Vec<Vec<ScanRecord>> = pool(resolve_workers(workers)?)?
        .install(|| (2..=q_max).into_par_iter().map(per_q).collect::<Result<Vec<_>>>())?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Writes `q,p,x,y,x_exact,y_exact` rows ordered by `(q, p)`; returns the row count.
pub fn scan_emit(
    route: &dyn FractionalRoute,
    i: u32,
    j: u32,
    q_max: i64,
    path: &Path,
    workers: Option<usize>,
) -> Result<usize> {
    let rows = scan(route, i, j, q_max, workers)?;
    let mut w = csv::Writer::from_path(path)?;
    write_rows(&mut w, &rows)?;
    w.flush()?;
    Ok(rows.len())
}

pub fn write_rows<W: std::io::Write>(w: &mut csv::Writer<W>, rows: &[ScanRecord]) -> Result<()> {
    w.write_record(["q", "p", "x", "y", "x_exact", "y_exact"])?;
    for r in rows {
        w.write_record([
            r.q.to_string(),
            r.p.to_string(),
            r.point.x.to_decimal(12),
            r.point.y.to_decimal(12),
            r.point.x.to_string(),
            r.point.y.to_string(),
        ])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dedekind::{s_direct, scaled_sum};
    use proptest::prelude::*;

    #[test]
    fn graph_point_examples() {
        let g = graph_point(1, 1, 2, 3).unwrap();
        assert_eq!((g.x, g.y), (Rational::new(2, 3), Rational::new(1, 3)));
        let g = graph_point(1, 1, 1, 2).unwrap();
        assert_eq!((g.x, g.y), (Rational::new(1, 2), Rational::zero()));
        assert!(graph_point(1, 1, 2, 4).is_err());
        assert!(graph_point(1, 2, 1, 3).is_err());
    }

    #[test]
    fn exp_sum_examples() {
        let f = LaurentExponent::new(vec![(1, 1)]);
        for prime in [2, 3, 5, 7, 101] {
            let k = exp_sum_k(&f, prime).unwrap();
            assert!((k - Complex64::new(-1.0, 0.0)).norm() < 1e-9);
        }
        let kl = LaurentExponent::new(vec![(1, 1), (1, -1)]);
        let k = exp_sum_k(&kl, 5).unwrap();
        assert!((k.re - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-9 && k.im.abs() < 1e-9);
        assert_eq!(exp_sum_k(&kl, 1).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn exp_sum_matches_naive_float() {
        let f = LaurentExponent::for_weight((2, 1), 1, 3).unwrap();
        for q in [97i64, 1000, 4096, 9973, 10_000] {
            let exact = exp_sum_k(&f, q).unwrap();
            let mut naive = Complex64::new(0.0, 0.0);
            for x in 1..q {
                if gcd_i64(x, q) != 1 {
                    continue;
                }
                let xinv = mod_inverse(x, q);
                let mut phase = 0.0f64;
                for &(c, e) in &f.terms {
                    let base = if e < 0 { xinv } else { x };
                    let v = pow_mod(i128::from(base), e.unsigned_abs() as u32, i128::from(q));
                    phase += (c as f64) * (v as f64) / q as f64;
                }
                naive += Complex64::from_polar(1.0, TAU * phase.rem_euclid(1.0));
            }
            assert!((exact - naive).norm() < 1e-9, "q = {q}");
        }
    }

    /// Direct enumeration of `E(m, x)` from exact graph points.
    fn brute_weyl(m: (i64, i64), i: u32, j: u32, x: i64) -> (Complex64, usize) {
        let mut total = Complex64::new(0.0, 0.0);
        let mut count = 0;
        for q in 2..=x {
            for p in 1..q {
                if gcd_i64(p, q) != 1 {
                    continue;
                }
                let g = graph_point(i, j, p, q).unwrap();
                let phase = (Rational::from(m.0) * g.x + Rational::from(m.1) * g.y).fract_part();
                total += Complex64::from_polar(1.0, TAU * phase.to_f64());
                count += 1;
            }
        }
        (total / count as f64, count)
    }

    #[test]
    fn weyl_matches_enumeration() {
        let (want, count) = brute_weyl((1, 1), 1, 1, 10);
        assert_eq!(count, 31);
        let got = weyl_sum((1, 1), 1, 1, 10).unwrap();
        assert!((got - want).norm() < 1e-12);
        for (m, i, j) in [((1, 0), 1, 3), ((2, 1), 2, 2), ((0, 3), 1, 5)] {
            let (want, _) = brute_weyl(m, i, j, 40);
            let got = weyl_sum(m, i, j, 40).unwrap();
            assert!((got - want).norm() < 1e-12);
        }
        assert!(weyl_sum((0, 0), 1, 1, 10).is_err());
    }

    #[test]
    fn weyl_first_coordinate_via_ramanujan_sums() {
        // Σ_{p coprime to q} e(p/q) is the Möbius function of q
        let x = 200;
        let mut mu_sum = 0i64;
        for q in 2..=x {
            mu_sum += mobius(q);
        }
        let pairs: u64 = (2..=x).map(euler_phi).sum();
        let got = weyl_sum((1, 0), 1, 1, x).unwrap();
        assert!((got.re - mu_sum as f64 / pairs as f64).abs() < 1e-12);
        assert!(got.im.abs() < 1e-12);
    }

    fn mobius(n: i64) -> i64 {
        let mut n = n;
        let mut sign = 1;
        let mut f = 2;
        while f * f <= n {
            if n % f == 0 {
                n /= f;
                if n % f == 0 {
                    return 0;
                }
                sign = -sign;
            }
            f += 1;
        }
        if n > 1 {
            sign = -sign;
        }
        sign
    }

    #[test]
    fn weyl_from_scan_rows() {
        let rows = scan(&DirectRoute, 2, 2, 80, None).unwrap();
        let a = weyl_from_rows((2, 1), &rows).unwrap();
        let b = weyl_sum((2, 1), 2, 2, 80).unwrap();
        assert_eq!(a.x, 80);
        assert!((Complex64::new(a.re, a.im) - b).norm() < 1e-12);
    }

    #[test]
    fn weyl_is_worker_independent() {
        let a = weyl_checkpoints(&CertificateRoute, &[(1, 1), (2, 1)], 1, 3, &[50, 120], Some(1)).unwrap();
        let b = weyl_checkpoints(&CertificateRoute, &[(1, 1), (2, 1)], 1, 3, &[50, 120], Some(3)).unwrap();
        for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
            assert_eq!((x.re.to_bits(), x.im.to_bits()), (y.re.to_bits(), y.im.to_bits()));
        }
    }

    #[test]
    fn weil_examples() {
        let kloosterman = weil_check((0, 1), 1, 1, 500).unwrap();
        assert!(kloosterman.passed && kloosterman.max_ratio <= 2.0 + 1e-9);
        let ramanujan = weil_check((1, 0), 1, 3, 500).unwrap();
        assert!(ramanujan.passed);
        for prime in primes_up_to(500) {
            let k = exp_sum_k(&LaurentExponent::new(vec![(1, 1)]), prime).unwrap();
            assert!((k.norm() - 1.0).abs() < 1e-9);
        }
        let mixed = weil_check((1, 1), 1, 3, 500).unwrap();
        assert!(mixed.passed, "{:?}", mixed.violations);
    }

    #[test]
    fn degenerate_primes_are_listed() {
        // 3 divides every coefficient of the (2,2) polynomial when m_1 = 0
        let r = weil_check((0, 1), 2, 2, 50).unwrap();
        assert!(r.degenerate.contains(&3));
        assert!(r.passed);
    }

    #[test]
    fn scan_examples() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        assert_eq!(scan_emit(&DirectRoute, 1, 1, 5, &path, Some(2)).unwrap(), 9);
        let path = dir.path().join("two.csv");
        assert_eq!(scan_emit(&DirectRoute, 1, 1, 2, &path, None).unwrap(), 1);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "q,p,x,y,x_exact,y_exact\n2,1,0.500000000000,0.000000000000,1/2,0\n"
        );
        let rows = scan(&DirectRoute, 1, 3, 3, None).unwrap();
        assert!(rows.iter().all(|r| !r.point.y.is_negative() && r.point.y < Rational::one()));
        let bad = dir.path().join("missing").join("x.csv");
        assert!(matches!(
            scan_emit(&DirectRoute, 1, 1, 5, &bad, None).unwrap_err().kind(),
            crate::error::ErrorKind::Io
        ));
    }

    #[test]
    fn phi_sieve_matches_direct() {
        let phi = phi_sieve(500);
        for (n, &v) in phi.iter().enumerate().skip(1) {
            assert_eq!(v, euler_phi(n as i64));
        }
        assert_eq!((2..=5).map(|q| phi[q]).sum::<u64>(), 9);
    }

    #[test]
    fn scan_rows_satisfy_congruence() {
        for (i, j) in [(1, 1), (1, 3), (2, 2), (3, 3)] {
            for r in scan(&DirectRoute, i, j, 40, None).unwrap() {
                let exact = scaled_sum(i, j, r.p, r.q).unwrap();
                let cert = fractional_certificate(i, j, r.p, r.q).unwrap();
                assert!((&exact - &cert).is_integer());
                assert_eq!(r.point.y, cert.fract_part());
                assert_eq!(r.point.y, exact.fract_part());
            }
        }
    }

    fn pair() -> impl Strategy<Value = (i64, i64)> {
        (2i64..=400)
            .prop_flat_map(|q| (1..q, Just(q)))
            .prop_filter("coprime", |&(p, q)| gcd_i64(p, q) == 1)
    }

    proptest! {
        #[test]
        fn routes_agree((p, q) in pair(), half in 1u32..4, e_off in 0u32..5) {
            let n = 2 * half;
            let i = 1 + e_off % (n - 1);
            let j = n - i;
            let d = DirectRoute.y(i, j, p, q).unwrap();
            prop_assert_eq!(&d, &ClosedFormRoute.y(i, j, p, q).unwrap());
            prop_assert_eq!(&d, &CertificateRoute.y(i, j, p, q).unwrap());
            let res = CertificateRoute.residue(i, j, p, q).unwrap();
            prop_assert_eq!(Rational::new(res, q), d.clone());
            prop_assert_eq!(DirectRoute.residue(i, j, p, q).unwrap(), res);
            let s = s_direct(SumParams::new(i, j, p, q).unwrap());
            let nc = norm_constants(i, j).unwrap();
            let full = Rational::from(nc.big_r) * Rational::from(q).pow(n as i32 - 2) * s;
            prop_assert_eq!(full.fract_part(), d);
        }
    }
}

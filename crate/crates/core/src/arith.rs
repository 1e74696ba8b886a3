//! Exact scalar substrate: rationals, Bernoulli numbers and polynomials,
//! periodic Bernoulli functions, factorials and binomials.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::sync::{Arc, LazyLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Arbitrary precision rational, always in lowest terms with a positive
/// denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        let denom = denom.into();
        assert!(!denom.is_zero(), "zero denominator");
        Rational(BigRational::new(numer.into(), denom))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// `x - floor(x)`, in `[0, 1)`.
    pub fn fract_part(&self) -> Rational {
        Rational(&self.0 - self.0.floor())
    }

    pub fn abs(&self) -> Rational {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Rational {
        Rational(self.0.recip())
    }

    pub fn pow(&self, exp: i32) -> Rational {
        Rational(num_traits::Pow::pow(&self.0, exp))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    /// Decimal rendering rounded to `digits` places.
    pub fn to_decimal(&self, digits: usize) -> String {
        format!("{:.*}", digits, self.to_f64())
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

impl From<&BigInt> for Rational {
    fn from(n: &BigInt) -> Self {
        Rational::from_integer(n.clone())
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError(String);

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot parse '{}' as num/den", self.0)
    }
}

impl std::error::Error for ParseRationalError {}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            None => Ok(Rational::from_integer(
                BigInt::from_str(s).map_err(|_| err())?,
            )),
            Some((n, d)) => {
                let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
                let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
                if d.is_zero() {
                    return Err(err());
                }
                Ok(Rational::new(n, d))
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Rational> for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl SubAssign<Rational> for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        self.0 -= rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

pub fn factorial(n: u32) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Binomial coefficient; zero when `k > n`.
pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for t in 0..k {
        acc = acc * (n - t) / (t + 1);
    }
    acc
}

pub fn lcm_all<'a>(values: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(&v.abs()))
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// `-1` to the power `k` for any integer `k`.
pub fn sign_pow(k: i64) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

static BERNOULLI: LazyLock<RwLock<Vec<Rational>>> =
    LazyLock::new(|| RwLock::new(vec![Rational::one()]));

/// `B_n` with the convention `B_1 = -1/2`, computed from
/// `sum_{k=0}^{n} C(n+1, k) B_k = 0` and memoized.
pub fn bernoulli_number(n: u32) -> Rational {
    let n = n as usize;
    if let Some(b) = BERNOULLI.read().expect("bernoulli cache poisoned").get(n) {
        return b.clone();
    }
    let mut cache = BERNOULLI.write().expect("bernoulli cache poisoned");
    while cache.len() <= n {
        let m = cache.len();
        let value = if m >= 3 && m % 2 == 1 {
            Rational::zero()
        } else {
            let mut acc = Rational::zero();
            for (k, b) in cache.iter().enumerate() {
                if !b.is_zero() {
                    acc += Rational::from(binomial(m as u32 + 1, k as u32)) * b;
                }
            }
            -acc / Rational::from(m as i64 + 1)
        };
        cache.push(value);
    }
    cache[n].clone()
}

/// Warms the Bernoulli cache up to index `n`.
pub fn prewarm_bernoulli(n: u32) {
    bernoulli_number(n);
}

static BERNOULLI_POLY: LazyLock<RwLock<Vec<Arc<Vec<Rational>>>>> =
    LazyLock::new(|| RwLock::new(Vec::new()));

/// Coefficients `c[m]` of `x^m` in the Bernoulli polynomial `B_i(x)`.
pub fn bernoulli_polynomial(i: u32) -> Arc<Vec<Rational>> {
    let idx = i as usize;
    if let Some(c) = BERNOULLI_POLY
        .read()
        .expect("bernoulli polynomial cache poisoned")
        .get(idx)
    {
        return Arc::clone(c);
    }
    let mut cache = BERNOULLI_POLY
        .write()
        .expect("bernoulli polynomial cache poisoned");
    while cache.len() <= idx {
        let deg = cache.len() as u32;
        // B_deg(x) = sum_k C(deg, k) B_k x^(deg - k)
        let mut coeffs = vec![Rational::zero(); deg as usize + 1];
        for k in 0..=deg {
            coeffs[(deg - k) as usize] = Rational::from(binomial(deg, k)) * bernoulli_number(k);
        }
        cache.push(Arc::new(coeffs));
    }
    Arc::clone(&cache[idx])
}

pub fn eval_bernoulli_polynomial(i: u32, x: &Rational) -> Rational {
    let coeffs = bernoulli_polynomial(i);
    let mut acc = Rational::zero();
    for c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Periodic Bernoulli function. For `i = 1` this is the sawtooth, which
/// vanishes at integers; for `i = 0` it is the constant 1.
pub fn periodic_bernoulli(i: u32, x: &Rational) -> Rational {
    let frac = x.fract_part();
    match i {
        0 => Rational::one(),
        1 if frac.is_zero() => Rational::zero(),
        1 => frac - Rational::new(1, 2),
        _ => eval_bernoulli_polynomial(i, &frac),
    }
}

/// Common denominator of `B_0..=B_i`.
pub fn bernoulli_denominator_lcm(i: u32) -> BigInt {
    let values: Vec<BigInt> = (0..=i).map(|k| bernoulli_number(k).denom().clone()).collect();
    lcm_all(values.iter())
}

/// Integer table `T[k] = L * q^i * Bbar_i(k/q)` for `k = 0..q`, together
/// with the scale `L * q^i`.
pub(crate) fn scaled_periodic_table(i: u32, q: i64) -> (Vec<BigInt>, BigInt) {
    let qb = BigInt::from(q);
    match i {
        0 => (vec![BigInt::one(); q as usize], BigInt::one()),
        1 => {
            // 2q((k/q)) = 2k - q, zero at k = 0
            let mut t = Vec::with_capacity(q as usize);
            t.push(BigInt::zero());
            for k in 1..q {
                t.push(BigInt::from(2 * k - q));
            }
            (t, 2 * qb)
        }
        _ => {
            let lcm = bernoulli_denominator_lcm(i);
            // integer coefficients of L * q^i * B_i(k/q) as a polynomial in k:
            // sum_m C(i,m) (L B_m) q^m k^(i-m)
            let mut coeff = vec![BigInt::zero(); i as usize + 1];
            let mut qpow = BigInt::one();
            for m in 0..=i {
                let bm = bernoulli_number(m);
                let scaled = (Rational::from(binomial(i, m) * &lcm) * bm).numer().clone();
                coeff[(i - m) as usize] = scaled * &qpow;
                qpow *= &qb;
            }
            let t = (0..q)
                .map(|k| {
                    let kb = BigInt::from(k);
                    coeff
                        .iter()
                        .rev()
                        .fold(BigInt::zero(), |acc, c| acc * &kb + c)
                })
                .collect();
            (t, lcm * qb.pow(i))
        }
    }
}

/// Integer `q^i * L * Bbar_i(k/q)` tables narrowed to `i128` when every
/// entry fits; used by the hot summation loops.
pub(crate) fn narrow_table(t: &[BigInt]) -> Option<Vec<i128>> {
    t.iter().map(|v| v.to_i128()).collect()
}

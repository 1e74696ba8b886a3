//! Real quadratic fields: exact surd arithmetic, periodic continued
//! fractions, fundamental units, and the matrix of multiplication by the
//! inverse totally positive unit on an ideal basis.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::Rational;
use crate::error::{Error, Result};

pub fn is_squarefree(d: i64) -> bool {
    if d < 2 {
        return false;
    }
    let mut n = d;
    let mut f = 2i64;
    while f * f <= n {
        if n % (f * f) == 0 {
            return false;
        }
        if n % f == 0 {
            n /= f;
        }
        f += 1;
    }
    true
}

fn check_d(d: i64) -> Result<()> {
    if is_squarefree(d) {
        Ok(())
    } else {
        Err(Error::NotSquarefree(d))
    }
}

/// `(a + b √D) / c` with `c > 0` and content removed.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadraticSurd {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: i64,
}

impl QuadraticSurd {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>, d: i64) -> Result<Self> {
        check_d(d)?;
        let c = c.into();
        if c.is_zero() {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        Ok(Self::normalized(a.into(), b.into(), c, d))
    }

    fn normalized(mut a: BigInt, mut b: BigInt, mut c: BigInt, d: i64) -> Self {
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        let g = a.gcd(&b).gcd(&c);
        if !g.is_one() && !g.is_zero() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        QuadraticSurd { a, b, c, d }
    }

    pub fn from_integer(n: impl Into<BigInt>, d: i64) -> Self {
        Self::normalized(n.into(), BigInt::zero(), BigInt::one(), d)
    }

    /// `√D`.
    pub fn sqrt_d(d: i64) -> Result<Self> {
        Self::new(0, 1, 1, d)
    }

    pub fn parts(&self) -> (&BigInt, &BigInt, &BigInt) {
        (&self.a, &self.b, &self.c)
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conjugate(&self) -> Self {
        Self::normalized(self.a.clone(), -&self.b, self.c.clone(), self.d)
    }

    /// `(x x')`, a rational.
    pub fn norm(&self) -> Rational {
        let num = &self.a * &self.a - &self.b * &self.b * self.d;
        Rational::new(num, &self.c * &self.c)
    }

    pub fn trace(&self) -> Rational {
        Rational::new(2 * &self.a, self.c.clone())
    }

    fn same_field(&self, other: &Self) {
        assert_eq!(self.d, other.d, "surds from different fields");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.same_field(o);
        Self::normalized(
            &self.a * &o.c + &o.a * &self.c,
            &self.b * &o.c + &o.b * &self.c,
            &self.c * &o.c,
            self.d,
        )
    }

    pub fn neg(&self) -> Self {
        Self::normalized(-&self.a, -&self.b, self.c.clone(), self.d)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.same_field(o);
        Self::normalized(
            &self.a * &o.a + &self.b * &o.b * self.d,
            &self.a * &o.b + &self.b * &o.a,
            &self.c * &o.c,
            self.d,
        )
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InvalidInput("division by zero surd".into()));
        }
        // c / (a + b√D) = c (a - b√D) / (a² - b² D)
        let den = &self.a * &self.a - &self.b * &self.b * self.d;
        Ok(Self::normalized(
            &self.c * &self.a,
            -(&self.c * &self.b),
            den,
            self.d,
        ))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn signum(&self) -> Ordering {
        // sign of a + b√D
        let sa = self.a.sign();
        let sb = self.b.sign();
        use num_bigint::Sign::*;
        match (sa, sb) {
            (NoSign, NoSign) => Ordering::Equal,
            (Plus | NoSign, Plus | NoSign) => Ordering::Greater,
            (Minus | NoSign, Minus | NoSign) => Ordering::Less,
            _ => {
                let a2 = &self.a * &self.a;
                let b2d = &self.b * &self.b * self.d;
                // a² ≠ b² D since D is not a square
                if (a2 > b2d) == (sa == Plus) {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
        }
    }

    pub fn cmp_surd(&self, o: &Self) -> Ordering {
        self.sub(o).signum()
    }

    pub fn floor(&self) -> BigInt {
        let b2d = &self.b * &self.b * self.d;
        let root = b2d.sqrt();
        let s = if self.b.is_negative() {
            if &root * &root == b2d {
                -root
            } else {
                -root - 1
            }
        } else {
            root
        };
        (&self.a + s).div_floor(&self.c)
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        let c = self.c.to_f64().unwrap_or(f64::NAN);
        (a + b * (self.d as f64).sqrt()) / c
    }

    /// `x > 1` and `-1 < x' < 0`.
    pub fn is_reduced(&self) -> bool {
        let one = Self::from_integer(1, self.d);
        let conj = self.conjugate();
        self.cmp_surd(&one) == Ordering::Greater
            && conj.signum() == Ordering::Less
            && conj.cmp_surd(&one.neg()) == Ordering::Greater
    }
}

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}*sqrt({}))/{}", self.a, self.b, self.d, self.c)
    }
}

impl fmt::Debug for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicCf {
    pub preperiod: Vec<BigInt>,
    pub period: Vec<BigInt>,
}

/// Eventually periodic expansion of an irrational quadratic surd.
pub fn surd_cf(x: &QuadraticSurd) -> Result<PeriodicCf> {
    if x.is_rational() {
        return Err(Error::RationalSurd(x.to_string()));
    }
    let mut seen: HashMap<QuadraticSurd, usize> = HashMap::new();
    let mut terms = Vec::new();
    let mut cur = x.clone();
    loop {
        if let Some(&start) = seen.get(&cur) {
            let period = terms.split_off(start);
            return Ok(PeriodicCf {
                preperiod: terms,
                period,
            });
        }
        seen.insert(cur.clone(), terms.len());
        let a = cur.floor();
        let rest = cur.sub(&QuadraticSurd::from_integer(a.clone(), cur.d));
        terms.push(a);
        cur = rest.recip()?;
    }
}

/// Surd whose expansion is `preperiod` followed by `period` repeated.
pub fn from_periodic_cf(cf: &PeriodicCf, d: i64) -> Result<QuadraticSurd> {
    check_d(d)?;
    if cf.period.is_empty() {
        return Err(Error::InvalidInput("empty period".into()));
    }
    // y = [period; y]: with convergents (P, Q), (P', Q') of the period,
    // y = (P y + P') / (Q y + Q'), so Q y² + (Q' - P) y - P' = 0
    let (mut pp, mut qp) = (BigInt::one(), BigInt::zero());
    let (mut pc, mut qc) = (cf.period[0].clone(), BigInt::one());
    for a in &cf.period[1..] {
        let pn = a * &pc + &pp;
        let qn = a * &qc + &qp;
        pp = std::mem::replace(&mut pc, pn);
        qp = std::mem::replace(&mut qc, qn);
    }
    let b = &qp - &pc;
    let disc: BigInt = &b * &b + 4 * &qc * &pp;
    let bad = || Error::InvalidInput(format!("period does not belong to sqrt({d})"));
    if !(&disc % BigInt::from(d)).is_zero() {
        return Err(bad());
    }
    let m2 = &disc / BigInt::from(d);
    let m = m2.sqrt();
    if &m * &m != m2 {
        return Err(bad());
    }
    let mut y = QuadraticSurd::normalized(-b, m, 2 * &qc, d);
    for a in cf.preperiod.iter().rev() {
        y = QuadraticSurd::from_integer(a.clone(), d).add(&y.recip()?);
    }
    Ok(y)
}

/// `(x + y √D) / 2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldUnit {
    pub d: i64,
    pub x: i64,
    pub y: i64,
}

impl FieldUnit {
    pub fn norm(&self) -> i64 {
        let (x, y, d) = (i128::from(self.x), i128::from(self.y), i128::from(self.d));
        ((x * x - d * y * y) / 4) as i64
    }

    pub fn to_surd(&self) -> QuadraticSurd {
        QuadraticSurd::normalized(self.x.into(), self.y.into(), 2.into(), self.d)
    }

    pub fn trace(&self) -> i64 {
        self.x
    }

    fn from_surd(s: &QuadraticSurd) -> Result<Self> {
        let (a, b, c) = s.parts();
        let two = BigInt::from(2);
        let (x, y) = (&two * a, &two * b);
        if !(&x % c).is_zero() || !(&y % c).is_zero() {
            return Err(Error::InvalidInput(format!("{s} is not an algebraic integer")));
        }
        let conv = |v: BigInt| {
            v.to_i64()
                .ok_or_else(|| Error::Overflow(format!("unit {s} exceeds 64-bit coordinates")))
        };
        Ok(FieldUnit {
            d: s.d(),
            x: conv(x / c)?,
            y: conv(y / c)?,
        })
    }
}

/// Generator `ω` of the maximal order: `√D` or `(1 + √D)/2`.
pub fn maximal_order_generator(d: i64) -> Result<QuadraticSurd> {
    check_d(d)?;
    Ok(if d % 4 == 1 {
        QuadraticSurd::normalized(1.into(), 1.into(), 2.into(), d)
    } else {
        QuadraticSurd::normalized(0.into(), 1.into(), 1.into(), d)
    })
}

/// Fundamental unit `ε > 1`, the product of the complete quotients over
/// one period of the expansion of the maximal-order generator.
pub fn fundamental_unit(d: i64) -> Result<FieldUnit> {
    let omega = maximal_order_generator(d)?;
    let cf = surd_cf(&omega)?;
    let mut cur = omega;
    for a in &cf.preperiod {
        cur = cur.sub(&QuadraticSurd::from_integer(a.clone(), d)).recip()?;
    }
    let mut prod = QuadraticSurd::from_integer(1, d);
    for a in &cf.period {
        prod = prod.mul(&cur);
        cur = cur.sub(&QuadraticSurd::from_integer(a.clone(), d)).recip()?;
    }
    FieldUnit::from_surd(&prod)
}

/// Smallest totally positive unit `> 1`.
pub fn totally_positive_unit(d: i64) -> Result<FieldUnit> {
    let e = fundamental_unit(d)?;
    if e.norm() == 1 {
        return Ok(e);
    }
    FieldUnit::from_surd(&e.to_surd().mul(&e.to_surd()))
}

/// `[[p, q], [r, s]]` in `SL_2(Z)` with `q > 0` and `|p + s| > 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HyperbolicMatrix {
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub s: i64,
}

impl HyperbolicMatrix {
    pub fn new(p: i64, q: i64, r: i64, s: i64) -> Result<Self> {
        let m = HyperbolicMatrix { p, q, r, s };
        let det = i128::from(p) * i128::from(s) - i128::from(q) * i128::from(r);
        if det != 1 {
            return Err(Error::DegenerateMatrix(m.to_string(), format!("determinant {det} ≠ 1")));
        }
        if q <= 0 {
            return Err(Error::DegenerateMatrix(m.to_string(), "q must be positive".into()));
        }
        if (p + s).abs() <= 2 {
            return Err(Error::DegenerateMatrix(m.to_string(), "not hyperbolic (|p + s| ≤ 2)".into()));
        }
        Ok(m)
    }

    pub fn trace(&self) -> i64 {
        self.p + self.s
    }

    fn mul(a: Mat, b: Mat) -> Mat {
        let mut out = [[0i128; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

}

impl fmt::Display for HyperbolicMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.p, self.q, self.r, self.s)
    }
}

impl std::str::FromStr for HyperbolicMatrix {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let parts: Vec<i64> = text
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidInput(format!("expected p,q,r,s integers, got '{text}'")))?;
        match parts[..] {
            [p, q, r, s] => HyperbolicMatrix::new(p, q, r, s),
            _ => Err(Error::InvalidInput(format!("expected four entries, got '{text}'"))),
        }
    }
}

type Mat = [[i128; 2]; 2];

/// Ordered basis `[α, β]` of a lattice in the field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealBasis {
    pub alpha: QuadraticSurd,
    pub beta: QuadraticSurd,
}

impl IdealBasis {
    /// `[-√D, 1]` or `[-(1 + √D)/2, 1]`, so that `-β/α = 1/ω`.
    pub fn maximal_order(d: i64) -> Result<Self> {
        let omega = maximal_order_generator(d)?;
        Ok(IdealBasis {
            alpha: omega.neg(),
            beta: QuadraticSurd::from_integer(1, d),
        })
    }

    /// `ω = -β/α`.
    pub fn omega(&self) -> Result<QuadraticSurd> {
        self.beta.neg().div(&self.alpha)
    }

    /// Integer coordinates of `v` in this basis, if any.
    pub fn coordinates(&self, v: &QuadraticSurd) -> Option<(i64, i64)> {
        let (a, b) = (&self.alpha, &self.beta);
        let det = a.mul(&b.conjugate()).sub(&a.conjugate().mul(b));
        let x = v.mul(&b.conjugate()).sub(&v.conjugate().mul(b)).div(&det).ok()?;
        let y = a.mul(&v.conjugate()).sub(&a.conjugate().mul(v)).div(&det).ok()?;
        let int = |s: &QuadraticSurd| -> Option<i64> {
            let (p, q, c) = s.parts();
            (q.is_zero() && c.is_one()).then(|| p.to_i64()).flatten()
        };
        Some((int(&x)?, int(&y)?))
    }

    fn transformed(&self, g: Mat) -> Self {
        let d = self.alpha.d();
        let c = |v: i128| QuadraticSurd::from_integer(v, d);
        IdealBasis {
            alpha: c(g[0][0]).mul(&self.alpha).add(&c(g[0][1]).mul(&self.beta)),
            beta: c(g[1][0]).mul(&self.alpha).add(&c(g[1][1]).mul(&self.beta)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealMatrix {
    pub matrix: HyperbolicMatrix,
    /// Basis the matrix is expressed in, after normalization.
    pub basis: IdealBasis,
    pub unit: FieldUnit,
}

/// Matrix of multiplication by `ε⁻¹` (`ε` the totally positive fundamental
/// unit) on `basis`, rewritten in an equivalent basis so that
/// `0 < p < q` and `|s| < q`.
pub fn ideal_matrix(d: i64, basis: Option<IdealBasis>) -> Result<IdealMatrix> {
    let basis = match basis {
        Some(b) => b,
        None => IdealBasis::maximal_order(d)?,
    };
    if basis.alpha.d() != d || basis.beta.d() != d {
        return Err(Error::InvalidInput(format!("basis is not in Q(sqrt({d}))")));
    }
    let omega = basis.omega()?;
    if omega.cmp_surd(&omega.conjugate()) != Ordering::Greater {
        return Err(Error::BasisOrientation);
    }
    let unit = totally_positive_unit(d)?;
    let inv = unit.to_surd().recip()?;
    let coords = |v: &QuadraticSurd| {
        basis
            .coordinates(&inv.mul(v))
            .ok_or_else(|| Error::NonInvariantBasis(format!("[{}, {}]", basis.alpha, basis.beta)))
    };
    let (p0, q0) = coords(&basis.alpha)?;
    let (r0, s0) = coords(&basis.beta)?;
    let m0: Mat = [[p0.into(), q0.into()], [r0.into(), s0.into()]];
    let g = normalizing_change(m0);
    let m = conjugate(m0, g);
    let narrow = |v: i128| {
        i64::try_from(v).map_err(|_| Error::Overflow(format!("matrix entry {v} for D = {d}")))
    };
    let matrix =
        HyperbolicMatrix::new(narrow(m[0][0])?, narrow(m[0][1])?, narrow(m[1][0])?, narrow(m[1][1])?)?;
    Ok(IdealMatrix {
        matrix,
        basis: basis.transformed(g),
        unit,
    })
}

fn inverse(g: Mat) -> Mat {
    [[g[1][1], -g[0][1]], [-g[1][0], g[0][0]]]
}

/// `g M g⁻¹`.
fn conjugate(m: Mat, g: Mat) -> Mat {
    HyperbolicMatrix::mul(HyperbolicMatrix::mul(g, m), inverse(g))
}

/// `[[1, 0], [k, 1]]` moving `p` into `[0, q)`.
fn shear(m: Mat) -> Mat {
    let k = m[0][0].div_euclid(m[0][1]);
    [[1, 0], [k, 1]]
}

fn acceptable(m: Mat) -> bool {
    let (p, q, s) = (m[0][0], m[0][1], m[1][1]);
    q >= 2 && 0 < p && p < q && s.abs() < q
}

/// Basis change `g ∈ SL_2(Z)` after which the matrix satisfies `0 < p < q`
/// and `|s| < q`.
fn normalizing_change(m0: Mat) -> Mat {
    if m0[0][1] > 0 {
        let g = shear(m0);
        if acceptable(conjugate(m0, g)) {
            return g;
        }
    }
    // new q is Q(x, y) = q0 x² + (s0 - p0) x y - r0 y² for first row (x, y);
    // pick the first primitive vector with Q(x, y) above the trace
    let (p0, q0, r0, s0) = (m0[0][0], m0[0][1], m0[1][0], m0[1][1]);
    let trace = p0 + s0;
    for radius in 1i128.. {
        let mut ring: Vec<(i128, i128)> = Vec::new();
        for x in -radius..=radius {
            for y in -radius..=radius {
                if x.abs().max(y.abs()) == radius {
                    ring.push((x, y));
                }
            }
        }
        for (x, y) in ring {
            if x.gcd(&y) != 1 {
                continue;
            }
            let form = q0 * x * x + (s0 - p0) * x * y - r0 * y * y;
            if form <= trace.abs() {
                continue;
            }
            let e = x.extended_gcd(&y);
            // x w - y z = 1 with w = e.x, z = -e.y
            let first = [[x, y], [-e.y, e.x]];
            let m1 = conjugate(m0, first);
            let g = HyperbolicMatrix::mul(shear(m1), first);
            if acceptable(conjugate(m0, g)) {
                return g;
            }
        }
    }
    unreachable!("the norm form of a hyperbolic matrix is indefinite")
}

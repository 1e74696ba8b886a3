//! Named algorithm variants behind common traits, selected at runtime.

use std::collections::BTreeMap;

use crate::arith::{factorial, Rational};
use crate::contfrac::Parity;
use crate::dedekind::{
    delta_term, s_decomposed, s_decomposed_with, s_direct, s_integral_table, Display, SumParams,
};
use crate::equidist::{CertificateRoute, ClosedFormRoute, DirectRoute, FractionalRoute};
use crate::error::{Error, Result};
use crate::quadfield::HyperbolicMatrix;
use crate::toddcone::todd_homogeneous;
use crate::zeta::{zeta_meyer_higher, zeta_siegel};

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<&'static str, Box<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: BTreeMap::new(),
        }
    }

    /// Adds or replaces the entry under `name`.
    pub fn register(&mut self, name: &'static str, item: Box<T>) -> &mut Self {
        self.entries.insert(name, item);
        self
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &T)> {
        self.entries.iter().map(|(k, v)| (*k, v.as_ref()))
    }
}

/// Evaluates `s_ij(p, q)`.
pub trait SumEvaluator: Send + Sync {
    fn eval(&self, i: u32, j: u32, p: i64, q: i64) -> Result<Rational>;
}

struct Direct;
struct ClosedForm(Display);
struct Table;
struct Todd;

impl SumEvaluator for Direct {
    fn eval(&self, i: u32, j: u32, p: i64, q: i64) -> Result<Rational> {
        Ok(s_direct(SumParams::new(i, j, p, q)?))
    }
}

impl SumEvaluator for ClosedForm {
    fn eval(&self, i: u32, j: u32, p: i64, q: i64) -> Result<Rational> {
        Ok(s_decomposed_with(i, j, p, q, Parity::Canonical, self.0)?.reconstructed)
    }
}

impl SumEvaluator for Table {
    fn eval(&self, i: u32, j: u32, p: i64, q: i64) -> Result<Rational> {
        let d = s_decomposed(i, j, p, q)?;
        let table = s_integral_table(i, j, p, q)?;
        let qn = Rational::from(SumParams::new(i, j, p, q)?.q);
        let n = (i + j) as i32;
        Ok(table / qn.pow(n - 2) + d.s_r / qn.pow(n - 1) - d.delta_term)
    }
}

impl SumEvaluator for Todd {
    fn eval(&self, i: u32, j: u32, p: i64, q: i64) -> Result<Rational> {
        let params = SumParams::new(i, j, p, q)?;
        if params.q == 1 {
            return Ok(s_direct(params));
        }
        let n = i + j;
        let poly = todd_homogeneous(n, params.p, params.q)?;
        let t = poly.coeff(i, j) * Rational::from(factorial(i) * factorial(j));
        let mq = Rational::from(-params.q);
        Ok(-t / mq.pow(n as i32 - 1) - delta_term(i, j))
    }
}

pub fn sum_evaluators() -> Registry<dyn SumEvaluator> {
    let mut r: Registry<dyn SumEvaluator> = Registry::new("evaluator");
    r.register("direct", Box::new(Direct))
        .register("closed-form", Box::new(ClosedForm(Display::Signed)))
        .register("closed-form-literal", Box::new(ClosedForm(Display::Literal)))
        .register("table", Box::new(Table))
        .register("todd", Box::new(Todd));
    r
}

/// Evaluates `ζ(A, 1 - N)` from a hyperbolic matrix.
pub trait ZetaMethod: Send + Sync {
    fn eval(&self, m: &HyperbolicMatrix, n: u32) -> Result<Rational>;
}

struct Siegel;
struct Meyer;

impl ZetaMethod for Siegel {
    fn eval(&self, m: &HyperbolicMatrix, n: u32) -> Result<Rational> {
        zeta_siegel(m, n)
    }
}

impl ZetaMethod for Meyer {
    fn eval(&self, m: &HyperbolicMatrix, n: u32) -> Result<Rational> {
        zeta_meyer_higher(m, n)
    }
}

pub fn zeta_methods() -> Registry<dyn ZetaMethod> {
    let mut r: Registry<dyn ZetaMethod> = Registry::new("zeta method");
    r.register("siegel", Box::new(Siegel)).register("meyer", Box::new(Meyer));
    r
}

pub fn fractional_routes() -> Registry<dyn FractionalRoute> {
    let mut r: Registry<dyn FractionalRoute> = Registry::new("route");
    r.register("direct", Box::new(DirectRoute))
        .register("closed-form", Box::new(ClosedFormRoute))
        .register("certificate", Box::new(CertificateRoute));
    r
}

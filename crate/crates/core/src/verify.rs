//! Batch invariant sweeps with configurable bounds and a serializable report.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Serialize;

use crate::arith::{factorial, gcd_i64, Rational};
use crate::contfrac::Parity;
use crate::dedekind::{
    fractional_certificate, hickerson_with_parity, norm_constants, s_decomposed_with,
    s_integral_table_with, DirectSummer, Display,
};
use crate::equidist::{weil_check, weyl_checkpoints, CertificateRoute};
use crate::error::Result;
use crate::quadfield::{ideal_matrix, HyperbolicMatrix};
use crate::registry::Registry;
use crate::toddcone::{todd_coefficient, todd_homogeneous, todd_numeric_check};
use crate::zeta::{cancellation_t, sample_matrices, zeta_meyer_higher, zeta_siegel};

/// Sweep limits; `None` means the suite default.
#[derive(Debug, Clone, Default)]
pub struct Bounds {
    pub qmax: Option<i64>,
    pub d_list: Option<Vec<i64>>,
    pub n_max: Option<u32>,
    pub matrices: Option<usize>,
    pub xmax: Option<i64>,
    pub pmax: Option<i64>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checked: u64,
    pub failure_count: u64,
    /// At most [`MAX_LISTED_FAILURES`] entries.
    pub failures: Vec<String>,
    pub bounds: BTreeMap<String, String>,
}

pub const MAX_LISTED_FAILURES: usize = 20;

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            passed: true,
            checked: 0,
            failure_count: 0,
            failures: Vec::new(),
            bounds: BTreeMap::new(),
        }
    }

    fn bound(&mut self, key: &str, value: impl ToString) {
        self.bounds.insert(key.to_string(), value.to_string());
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.passed = false;
            self.failure_count += 1;
            if self.failures.len() < MAX_LISTED_FAILURES {
                self.failures.push(describe());
            }
        }
    }
}

pub trait Suite: Send + Sync {
    fn description(&self) -> &'static str;
    fn run(&self, bounds: &Bounds) -> Result<SuiteReport>;
}

fn coprime_pairs(q_max: i64) -> impl Iterator<Item = (i64, i64)> {
    (2..=q_max).flat_map(|q| (1..q).filter(move |&p| gcd_i64(p, q) == 1).map(move |p| (p, q)))
}

/// `(e, f)` with `e, f ≥ 1` and `e + f` in `weights`.
pub fn index_pairs(weights: &[u32]) -> Vec<(u32, u32)> {
    weights
        .iter()
        .flat_map(|&n| (1..n).map(move |e| (e, n - e)))
        .collect()
}

struct Oracle;
struct Hickerson;
struct Tables;
struct Todd;
struct Zeta;
struct Congruence;
struct Weyl;

impl Suite for Oracle {
    fn description(&self) -> &'static str {
        "closed-form reconstruction equals the defining sum; R sI and R sR are integers"
    }

    fn run(&self, b: &Bounds) -> Result<SuiteReport> {
        let q_max = b.qmax.unwrap_or(150);
        let mut rep = SuiteReport::new("oracle");
        rep.bound("qmax", q_max);
        rep.bound("weights", "2,4,6,8");
        for (e, f) in index_pairs(&[2, 4, 6, 8]) {
            let big_r = Rational::from(norm_constants(e, f)?.big_r);
            for q in 2..=q_max {
                let summer = DirectSummer::new(e, f, q)?;
                for p in (1..q).filter(|&p| gcd_i64(p, q) == 1) {
                    let d = s_decomposed_with(e, f, p, q, Parity::Canonical, Display::Signed)?;
                    let direct = summer.eval(p);
                    rep.check(d.reconstructed == direct, || {
                        format!("s_{e}{f}({p},{q}): closed form {} != {direct}", d.reconstructed)
                    });
                    rep.check((&big_r * &d.s_i).is_integer(), || {
                        format!("R sI not integral at ({e},{f},{p},{q})")
                    });
                    rep.check((&big_r * &d.s_r).is_integer(), || {
                        format!("R sR not integral at ({e},{f},{p},{q})")
                    });
                }
            }
        }
        Ok(rep)
    }
}

impl Suite for Hickerson {
    fn description(&self) -> &'static str {
        "continued-fraction formula equals 12 s(p, q) for both parities"
    }

    fn run(&self, b: &Bounds) -> Result<SuiteReport> {
        let q_max = b.qmax.unwrap_or(500);
        let mut rep = SuiteReport::new("hickerson");
        rep.bound("qmax", q_max);
        for q in 2..=q_max {
            let summer = DirectSummer::new(1, 1, q)?;
            for p in (1..q).filter(|&p| gcd_i64(p, q) == 1) {
                let want = Rational::from(12) * summer.eval(p);
                for parity in [Parity::Even, Parity::Odd] {
                    let got = hickerson_with_parity(p, q, parity)?;
                    rep.check(got == want, || format!("({p},{q}) {parity:?}: {got} != {want}"));
                }
            }
        }
        Ok(rep)
    }
}

impl Suite for Tables {
    fn description(&self) -> &'static str {
        "weight 4 and 6 table rows equal the general integral part"
    }

    fn run(&self, b: &Bounds) -> Result<SuiteReport> {
        let q_max = b.qmax.unwrap_or(100);
        let mut rep = SuiteReport::new("tables");
        rep.bound("qmax", q_max);
        for (e, f) in index_pairs(&[4, 6]) {
            for (p, q) in coprime_pairs(q_max) {
                for parity in [Parity::Even, Parity::Odd] {
                    let table = s_integral_table_with(e, f, p, q, parity)?;
                    let general = s_decomposed_with(e, f, p, q, parity, Display::Signed)?.s_i;
                    rep.check(table == general, || {
                        format!("sI_{e}{f}({p},{q}) {parity:?}: table {table} != {general}")
                    });
                }
            }
        }
        Ok(rep)
    }
}

impl Suite for Todd {
    fn description(&self) -> &'static str {
        "expansion through the convergent forms matches t_ij; numeric series agrees"
    }

    fn run(&self, b: &Bounds) -> Result<SuiteReport> {
        let q_max = b.qmax.unwrap_or(50);
        let numeric_q = q_max.min(20);
        let mut rep = SuiteReport::new("todd");
        rep.bound("qmax", q_max);
        rep.bound("degrees", "2,4,6");
        rep.bound("numeric_qmax", numeric_q);
        rep.bound("numeric_degree", 6);
        for (p, q) in coprime_pairs(q_max) {
            for n in [2u32, 4, 6] {
                let poly = todd_homogeneous(n, p, q)?;
                for a in 0..=n {
                    let got = poly.coeff(a, n - a) * Rational::from(factorial(a) * factorial(n - a));
                    let want = todd_coefficient(a, n - a, p, q)?;
                    rep.check(got == want, || format!("t_{a},{}({p},{q}): {got} != {want}", n - a));
                }
            }
            if q <= numeric_q {
                let err = todd_numeric_check(p, q, 6)?;
                rep.check(err < 1e-9, || format!("numeric series at ({p},{q}) off by {err:e}"));
            }
        }
        Ok(rep)
    }
}

impl Suite for Zeta {
    fn description(&self) -> &'static str {
        "Siegel and higher Meyer formulas agree; polynomial part cancels"
    }

    fn run(&self, b: &Bounds) -> Result<SuiteReport> {
        let d_list = b.d_list.clone().unwrap_or_else(|| vec![3, 5, 13]);
        let count = b.matrices.unwrap_or(20);
        let n_max = b.n_max.unwrap_or(4);
        let mut rep = SuiteReport::new("zeta");
        rep.bound(
            "D",
            d_list.iter().map(i64::to_string).collect::<Vec<_>>().join(","),
        );
        rep.bound("matrices", count);
        rep.bound("nmax", n_max);
        let mut ms: Vec<HyperbolicMatrix> = Vec::new();
        for &d in &d_list {
            ms.push(ideal_matrix(d, None)?.matrix);
        }
        ms.extend(sample_matrices(count));
        for m in &ms {
            for n in 1..=n_max {
                let a = zeta_siegel(m, n)?;
                let c = zeta_meyer_higher(m, n)?;
                rep.check(a == c, || format!("{m} N={n}: Siegel {a} != Meyer {c}"));
                let t = cancellation_t(m, n)?;
                rep.check(t.is_zero(), || format!("{m} N={n}: T = {t}"));
            }
        }
        Ok(rep)
    }
}

impl Suite for Congruence {
    fn description(&self) -> &'static str {
        "R q^(N-2) s_ij minus the modular certificate is an integer"
    }

    fn run(&self, b: &Bounds) -> Result<SuiteReport> {
        let q_max = b.qmax.unwrap_or(300);
        let mut rep = SuiteReport::new("congruence");
        rep.bound("qmax", q_max);
        rep.bound("weights", "2,4,6");
        for (i, j) in index_pairs(&[2, 4, 6]) {
            let nc = norm_constants(i, j)?;
            for q in 2..=q_max {
                let summer = DirectSummer::new(i, j, q)?;
                let factor = &nc.big_r * BigInt::from(q).pow(nc.n - 2);
                for p in (1..q).filter(|&p| gcd_i64(p, q) == 1) {
                    let (num, scale) = summer.scaled(p);
                    let exact = Rational::new(num * &factor, scale.clone());
                    let cert = fractional_certificate(i, j, p, q)?;
                    rep.check((&exact - &cert).is_integer(), || {
                        format!("({i},{j},{p},{q}): {exact} - {cert} not integral")
                    });
                }
            }
        }
        Ok(rep)
    }
}

/// Characters used by the Weyl suite.
pub const WEYL_MS: [(i64, i64); 4] = [(1, 0), (0, 1), (1, 1), (2, 1)];
/// Index pairs used by the Weyl suite.
pub const WEYL_IJ: [(u32, u32); 3] = [(1, 1), (1, 3), (2, 2)];
pub const WEYL_THRESHOLD: f64 = 0.1;

impl Suite for Weyl {
    fn description(&self) -> &'static str {
        "Weyl sums are small and the Weil bound holds for the Laurent exponents"
    }

    fn run(&self, b: &Bounds) -> Result<SuiteReport> {
        let x_max = b.xmax.unwrap_or(3000);
        let p_max = b.pmax.unwrap_or(2000);
        let mut rep = SuiteReport::new("weyl");
        rep.bound("xmax", x_max);
        rep.bound("pmax", p_max);
        rep.bound("threshold", WEYL_THRESHOLD);
        for (i, j) in WEYL_IJ {
            let res = weyl_checkpoints(&CertificateRoute, &WEYL_MS, i, j, &[x_max], b.workers)?;
            for (m, pts) in WEYL_MS.iter().zip(&res) {
                let abs = pts[0].abs;
                rep.check(abs < WEYL_THRESHOLD, || {
                    format!("|E({m:?}, {x_max})| = {abs:.6} for ({i},{j})")
                });
            }
            for m in WEYL_MS {
                let w = weil_check(m, i, j, p_max)?;
                rep.check(w.passed, || {
                    format!("Weil bound fails for m={m:?} ({i},{j}) at {:?}", w.violations)
                });
            }
        }
        Ok(rep)
    }
}

pub fn suites() -> Registry<dyn Suite> {
    let mut r: Registry<dyn Suite> = Registry::new("suite");
    r.register("oracle", Box::new(Oracle))
        .register("hickerson", Box::new(Hickerson))
        .register("tables", Box::new(Tables))
        .register("todd", Box::new(Todd))
        .register("zeta", Box::new(Zeta))
        .register("congruence", Box::new(Congruence))
        .register("weyl", Box::new(Weyl));
    r
}

pub fn run_suite(name: &str, bounds: &Bounds) -> Result<SuiteReport> {
    suites().get(name)?.run(bounds)
}

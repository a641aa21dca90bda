//! Exponential spectral series `prefactor(t) · Σ c_k e^{−r_k t}` with lazily
//! extended coefficient tables and a relative truncation rule.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use crate::{Error, Result};

/// Relative size below which a term (bounded by the coefficient envelope) ends the sum.
pub const REL_TOL: f64 = 1e-14;
/// Minimum number of terms summed before the stopping rule may fire.
pub const MIN_TERMS: usize = 5;

const INITIAL_TERMS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub rate: f64,
}

/// Result of a truncated evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Sum of `|c_k| e^{−r_k t}` over stored terms beyond the cut, times the prefactor.
    pub tail_bound: f64,
    pub terms: usize,
}

type TermSource = Box<dyn Fn(usize, usize) -> Result<Vec<Term>> + Send + Sync>;
type Prefactor = Box<dyn Fn(f64) -> f64 + Send + Sync>;

struct Table {
    terms: Vec<Term>,
    // envelope[k] = max_{j ≥ k} |c_j| over the stored prefix
    envelope: Vec<f64>,
}

impl Table {
    fn rebuild_envelope(&mut self) {
        let mut env = vec![0.0; self.terms.len()];
        let mut m: f64 = 0.0;
        for (k, term) in self.terms.iter().enumerate().rev() {
            m = m.max(term.coef.abs());
            env[k] = m;
        }
        self.envelope = env;
    }
}

pub struct SpectralSeries {
    label: String,
    table: RwLock<Table>,
    source: TermSource,
    prefactor: Prefactor,
    max_terms: usize,
    clamp_negative: bool,
}

impl fmt::Debug for SpectralSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralSeries")
            .field("label", &self.label)
            .field("stored", &self.stored())
            .field("max_terms", &self.max_terms)
            .finish()
    }
}

impl SpectralSeries {
    /// `source(from, to)` must return terms `from..to` with non-decreasing rates.
    pub fn new(
        label: impl Into<String>,
        max_terms: usize,
        source: impl Fn(usize, usize) -> Result<Vec<Term>> + Send + Sync + 'static,
        prefactor: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SpectralSeries {
            label: label.into(),
            table: RwLock::new(Table {
                terms: Vec::new(),
                envelope: Vec::new(),
            }),
            source: Box::new(source),
            prefactor: Box::new(prefactor),
            max_terms,
            clamp_negative: false,
        }
    }

    /// Negative partial sums (cancellation roundoff where the density is tiny)
    /// are replaced by 0.
    pub fn clamping_negative(mut self) -> Self {
        self.clamp_negative = true;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn stored(&self) -> usize {
        self.table.read().expect("series lock poisoned").terms.len()
    }

    /// Makes sure at least `n` terms (capped at `max_terms`) are stored.
    pub fn ensure(&self, n: usize) -> Result<()> {
        let n = n.min(self.max_terms);
        if self.stored() >= n {
            return Ok(());
        }
        let mut table = self.table.write().expect("series lock poisoned");
        let have = table.terms.len();
        if have >= n {
            return Ok(());
        }
        let extra = (self.source)(have, n)?;
        if extra.len() != n - have {
            return Err(Error::Config(format!(
                "{}: term source returned {} terms, expected {}",
                self.label,
                extra.len(),
                n - have
            )));
        }
        table.terms.extend(extra);
        table.rebuild_envelope();
        Ok(())
    }

    /// Stored terms (after `ensure`).
    pub fn terms(&self) -> Vec<Term> {
        self.table.read().expect("series lock poisoned").terms.clone()
    }

    fn try_sum(&self, t: f64) -> Option<SeriesValue> {
        let table = self.table.read().expect("series lock poisoned");
        let mut sum = 0.0;
        let mut abs_sum = 0.0;
        let mut quiet = 0;
        for (k, term) in table.terms.iter().enumerate() {
            let decay = (-term.rate * t).exp();
            let v = term.coef * decay;
            sum += v;
            abs_sum += v.abs();
            if k + 1 >= MIN_TERMS && table.envelope[k] * decay <= REL_TOL * abs_sum {
                quiet += 1;
            } else {
                quiet = 0;
            }
            if quiet >= 2 {
                let tail: f64 = table.terms[k + 1..]
                    .iter()
                    .map(|s| s.coef.abs() * (-s.rate * t).exp())
                    .sum();
                return Some(SeriesValue {
                    value: sum,
                    tail_bound: tail,
                    terms: k + 1,
                });
            }
        }
        None
    }

    /// Sum of the series part only (no prefactor), extending the table as needed.
    pub fn sum(&self, t: f64) -> Result<SeriesValue> {
        let mut n = self.stored().max(INITIAL_TERMS);
        loop {
            self.ensure(n)?;
            if let Some(v) = self.try_sum(t) {
                return Ok(v);
            }
            let have = self.stored();
            if have >= self.max_terms {
                return Err(Error::Truncation { t, terms: have });
            }
            n = (2 * have).min(self.max_terms);
        }
    }

    /// `prefactor(t) · Σ_k c_k e^{−r_k t}` with the truncation diagnostics.
    pub fn evaluate(&self, t: f64) -> Result<SeriesValue> {
        let s = self.sum(t)?;
        let pre = (self.prefactor)(t);
        let mut value = pre * s.value;
        if value < 0.0 && self.clamp_negative {
            log::debug!("{}: negative partial sum {value:e} at t = {t} clamped to 0", self.label);
            value = 0.0;
        }
        Ok(SeriesValue {
            value,
            tail_bound: pre.abs() * s.tail_bound,
            terms: s.terms,
        })
    }

    /// Plain partial sum of the first `k` terms, prefactor included.
    pub fn partial_sum(&self, t: f64, k: usize) -> Result<f64> {
        self.ensure(k)?;
        let table = self.table.read().expect("series lock poisoned");
        if table.terms.len() < k {
            return Err(Error::Truncation { t, terms: table.terms.len() });
        }
        let s: f64 = table.terms[..k]
            .iter()
            .map(|s| s.coef * (-s.rate * t).exp())
            .sum();
        Ok((self.prefactor)(t) * s)
    }
}

type Registry = Mutex<HashMap<String, Arc<SpectralSeries>>>;

fn registry() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Process-wide memo so repeated requests for the same density share their
/// coefficient tables.
pub(crate) fn shared(key: &str, build: impl FnOnce() -> SpectralSeries) -> Arc<SpectralSeries> {
    let mut reg = registry().lock().expect("series registry poisoned");
    reg.entry(key.to_string())
        .or_insert_with(|| Arc::new(build()))
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric() -> SpectralSeries {
        // Σ_{k≥0} e^{−(k+1) t} = 1/(e^t − 1)
        SpectralSeries::new(
            "geometric",
            10_000,
            |from, to| {
                Ok((from..to)
                    .map(|k| Term {
                        coef: 1.0,
                        rate: (k + 1) as f64,
                    })
                    .collect())
            },
            |_| 1.0,
        )
    }

    #[test]
    fn sums_geometric_series() {
        let s = geometric();
        for t in [0.01, 0.5, 3.0] {
            let v = s.evaluate(t).unwrap();
            let exact = 1.0 / t.exp_m1();
            assert!((v.value - exact).abs() < 1e-12 * exact, "t={t}");
            assert!(v.tail_bound < 1e-11 * exact);
        }
    }

    #[test]
    fn tail_bound_dominates_doubling() {
        let s = geometric();
        let t = 0.2;
        let v = s.evaluate(t).unwrap();
        let more = s.partial_sum(t, 2 * v.terms).unwrap();
        assert!((more - v.value).abs() <= v.tail_bound + 1e-16);
    }

    #[test]
    fn exhausted_table_is_truncation_error() {
        let s = SpectralSeries::new(
            "short",
            8,
            |from, to| {
                Ok((from..to)
                    .map(|k| Term {
                        coef: 1.0,
                        rate: k as f64 * 1e-3,
                    })
                    .collect())
            },
            |_| 1.0,
        );
        assert!(matches!(s.evaluate(1.0), Err(Error::Truncation { terms: 8, .. })));
    }

    #[test]
    fn clamps_negative_values() {
        let s = SpectralSeries::new(
            "neg",
            100,
            |from, to| Ok((from..to).map(|k| Term { coef: -1.0, rate: k as f64 + 1.0 }).collect()),
            |_| 1.0,
        )
        .clamping_negative();
        assert_eq!(s.evaluate(1.0).unwrap().value, 0.0);
    }
}

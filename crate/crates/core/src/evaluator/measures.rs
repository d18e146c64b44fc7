//! Coverage, recall, precision and efficiency as exact fractions.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Execution;
use crate::matcher::MatchMapping;

/// A non-negative rational in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Fraction {
    pub const ZERO: Fraction = Fraction { num: 0, den: 1 };

    /// `num / den` reduced; `None` when `den` is zero.
    pub fn new(num: u64, den: u64) -> Option<Self> {
        if den == 0 {
            return None;
        }
        let g = gcd(num, den).max(1);
        Some(Fraction {
            num: num / g,
            den: den / g,
        })
    }

    /// `num / den`, or zero when `den` is zero.
    pub fn or_zero(num: u64, den: u64) -> Self {
        Self::new(num, den).unwrap_or(Self::ZERO)
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Whether `self * factor == product`, in integers.
    pub fn times_equals(self, factor: u64, product: u64) -> bool {
        u128::from(self.num) * u128::from(factor) == u128::from(product) * u128::from(self.den)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub coverage: Fraction,
    /// `None` when no relevant entity exists in the index.
    pub recall: Option<Fraction>,
    pub precision: Fraction,
    pub efficiency_all: Fraction,
    pub efficiency_first: Fraction,
    pub s_size: u64,
    pub t_size: u64,
    pub t_rel_size: u64,
    pub m_size: u64,
    pub domain_size: u64,
    pub range_size: u64,
    pub total_requests: u64,
    pub queries: u64,
    /// Inputs matched by first-page results.
    pub first_domain_size: u64,
}

impl MeasureReport {
    /// Every defining identity, checked in integer arithmetic.
    pub fn identities_hold(&self) -> bool {
        let recall_ok = match self.recall {
            Some(r) => r.times_equals(self.t_rel_size, self.range_size),
            None => self.t_rel_size == 0,
        };
        let efficiency_ok = if self.total_requests == 0 {
            self.efficiency_all == Fraction::ZERO
        } else {
            self.efficiency_all.times_equals(self.total_requests, self.domain_size)
        };
        let precision_ok = if self.t_size == 0 {
            self.precision == Fraction::ZERO
        } else {
            self.precision.times_equals(self.t_size, self.range_size)
        };
        self.coverage.times_equals(self.s_size, self.domain_size) && recall_ok && efficiency_ok && precision_ok
    }
}

/// Measures of one execution.
///
/// `inputs` are the input ids, `relevant` the relevant index ids and
/// `mapping` the match between inputs and every returned entity.
pub fn compute_measures(
    execution: &Execution,
    mapping: &MatchMapping,
    inputs: &BTreeSet<&str>,
    relevant: &BTreeSet<String>,
) -> MeasureReport {
    let returned = execution.returned();
    let first = execution.first_page_entities();
    let domain = mapping.domain();
    let range = mapping.range();
    let first_domain = mapping.restricted_to(&first).domain().len() as u64;
    let s_size = inputs.len() as u64;
    let t_size = returned.len() as u64;
    let t_rel_size = relevant.len() as u64;
    let domain_size = domain.len() as u64;
    let range_size = range.len() as u64;
    let total_requests = execution.total_requests as u64;
    let queries = execution.queries.len() as u64;
    MeasureReport {
        coverage: Fraction::or_zero(domain_size, s_size),
        recall: Fraction::new(range_size, t_rel_size),
        precision: Fraction::or_zero(range_size, t_size),
        efficiency_all: Fraction::or_zero(domain_size, total_requests),
        efficiency_first: Fraction::or_zero(first_domain, queries),
        s_size,
        t_size,
        t_rel_size,
        m_size: mapping.len() as u64,
        domain_size,
        range_size,
        total_requests,
        queries,
        first_domain_size: first_domain,
    }
}

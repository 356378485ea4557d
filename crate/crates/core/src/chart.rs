//! Charts: the named coordinate contexts every series lives over.
//!
//! A chart fixes the grading rank n, the truncation order for formal power
//! series, an ordered list of degree-0 (smooth) coordinates with sampling
//! intervals, and an ordered list of formal coordinates of nonzero degree.

use crate::degree::{enumerate_degrees, Degree};
use crate::error::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

pub const DEFAULT_TRUNCATION: usize = 6;

/// A formal coordinate: a name plus a nonzero Z2^n degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalVariable {
    pub name: String,
    pub degree: Degree,
}

/// Identifies a coordinate of a chart by kind and position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CoordId {
    Base(usize),
    Formal(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    name: String,
    n: usize,
    truncation: usize,
    base: Vec<String>,
    base_domain: Vec<(f64, f64)>,
    formal: Vec<FormalVariable>,
}

pub type ChartRef = Arc<Chart>;

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    // Trailing apostrophes mark the copies in doubled/tripled charts.
    let rest: Vec<char> = chars.collect();
    let tail_primes = rest.iter().rev().take_while(|&&c| c == '\'').count();
    rest[..rest.len() - tail_primes]
        .iter()
        .all(|&c| c.is_ascii_alphanumeric() || c == '_')
}

impl Chart {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        truncation: usize,
        base: Vec<(String, (f64, f64))>,
        formal: Vec<FormalVariable>,
    ) -> Result<ChartRef> {
        if n == 0 {
            return Err(Error::Domain("grading rank n must be at least 1".into()));
        }
        if truncation == 0 {
            return Err(Error::Domain("truncation order must be at least 1".into()));
        }
        let mut seen = BTreeSet::new();
        for (nm, (lo, hi)) in &base {
            if !valid_name(nm) {
                return Err(Error::InvalidInput(format!("invalid coordinate name '{nm}'")));
            }
            if !seen.insert(nm.clone()) {
                return Err(Error::InvalidInput(format!("duplicate coordinate name '{nm}'")));
            }
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidInput(format!(
                    "domain interval for '{nm}' must satisfy lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        for v in &formal {
            if !valid_name(&v.name) {
                return Err(Error::InvalidInput(format!("invalid coordinate name '{}'", v.name)));
            }
            if !seen.insert(v.name.clone()) {
                return Err(Error::InvalidInput(format!("duplicate coordinate name '{}'", v.name)));
            }
            if v.degree.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: v.degree.n() });
            }
            if v.degree.is_zero() {
                return Err(Error::InvalidInput(format!(
                    "formal coordinate '{}' must have nonzero degree",
                    v.name
                )));
            }
        }
        let (base, base_domain) = base.into_iter().unzip();
        Ok(Arc::new(Chart { name: name.into(), n, truncation, base, base_domain, formal }))
    }

    /// Convenience constructor with the default sampling box [-1, 1] per
    /// degree-0 coordinate.
    pub fn with_default_domain(
        name: impl Into<String>,
        n: usize,
        truncation: usize,
        base: Vec<String>,
        formal: Vec<FormalVariable>,
    ) -> Result<ChartRef> {
        let base = base.into_iter().map(|b| (b, (-1.0, 1.0))).collect();
        Chart::new(name, n, truncation, base, formal)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn base_count(&self) -> usize {
        self.base.len()
    }

    pub fn formal_count(&self) -> usize {
        self.formal.len()
    }

    pub fn coord_count(&self) -> usize {
        self.base.len() + self.formal.len()
    }

    pub fn base_names(&self) -> &[String] {
        &self.base
    }

    pub fn base_domain(&self) -> &[(f64, f64)] {
        &self.base_domain
    }

    pub fn formal_vars(&self) -> &[FormalVariable] {
        &self.formal
    }

    pub fn base_name(&self, i: usize) -> &str {
        &self.base[i]
    }

    pub fn formal_var(&self, i: usize) -> &FormalVariable {
        &self.formal[i]
    }

    /// All coordinates in declaration order: degree-0 first, then formal.
    pub fn coord_ids(&self) -> impl Iterator<Item = CoordId> + '_ {
        (0..self.base.len())
            .map(CoordId::Base)
            .chain((0..self.formal.len()).map(CoordId::Formal))
    }

    pub fn coord_name(&self, id: CoordId) -> &str {
        match id {
            CoordId::Base(i) => &self.base[i],
            CoordId::Formal(i) => &self.formal[i].name,
        }
    }

    pub fn coord_degree(&self, id: CoordId) -> Degree {
        match id {
            CoordId::Base(_) => Degree::zero(self.n),
            CoordId::Formal(i) => self.formal[i].degree.clone(),
        }
    }

    pub fn lookup(&self, name: &str) -> Option<CoordId> {
        if let Some(i) = self.base.iter().position(|b| b == name) {
            return Some(CoordId::Base(i));
        }
        self.formal.iter().position(|v| v.name == name).map(CoordId::Formal)
    }

    /// Dimension signature: (p, [q_gamma per nonzero degree in canonical order]).
    pub fn signature(&self) -> Result<(usize, Vec<usize>)> {
        let degrees = enumerate_degrees(self.n)?;
        let mut counts = vec![0usize; degrees.len() - 1];
        for v in &self.formal {
            let k = degrees.iter().position(|d| *d == v.degree).expect("degree enumerated");
            counts[k - 1] += 1;
        }
        Ok((self.base.len(), counts))
    }

    /// Two charts are interchangeable contexts when their full coordinate
    /// data agree (name included: a chart is a named context).
    pub fn same_context(&self, other: &Chart) -> bool {
        self == other
    }

    pub fn context_error(&self, other: &Chart) -> Error {
        Error::ContextMismatch {
            expected: self.name.clone(),
            found: other.name.clone(),
        }
    }

    /// A copy of this chart under a new name with every coordinate renamed
    /// through `f` (used for the primed copies in product charts).
    fn renamed(&self, name: String, f: impl Fn(&str) -> String) -> Chart {
        Chart {
            name,
            n: self.n,
            truncation: self.truncation,
            base: self.base.iter().map(|b| f(b)).collect(),
            base_domain: self.base_domain.clone(),
            formal: self
                .formal
                .iter()
                .map(|v| FormalVariable { name: f(&v.name), degree: v.degree.clone() })
                .collect(),
        }
    }

    /// Product chart: coordinates of `self` followed by coordinates of
    /// `other` renamed through `rename_other`.
    pub fn product(
        &self,
        other: &Chart,
        name: impl Into<String>,
        rename_other: impl Fn(&str) -> String,
    ) -> Result<ChartRef> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        if self.truncation != other.truncation {
            return Err(Error::ContextMismatch {
                expected: format!("truncation {}", self.truncation),
                found: format!("truncation {}", other.truncation),
            });
        }
        let renamed = other.renamed(String::new(), rename_other);
        let base = self
            .base
            .iter()
            .cloned()
            .zip(self.base_domain.iter().cloned())
            .chain(renamed.base.iter().cloned().zip(renamed.base_domain.iter().cloned()))
            .collect();
        let formal = self.formal.iter().cloned().chain(renamed.formal.iter().cloned()).collect();
        Chart::new(name, self.n, self.truncation, base, formal)
    }

    /// G x G with the second copy primed; used for group laws.
    pub fn doubled(&self) -> Result<ChartRef> {
        self.product(self, format!("{}^2", self.name), |s| format!("{s}'"))
    }

    /// G x G x G with primed and double-primed copies.
    pub fn tripled(&self) -> Result<ChartRef> {
        let d = self.doubled()?;
        d.product(self, format!("{}^3", self.name), |s| format!("{s}''"))
    }
}

/// An assignment of real values to the degree-0 coordinates of a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPoint {
    values: BTreeMap<String, f64>,
}

impl RealPoint {
    pub fn new(values: BTreeMap<String, f64>) -> Self {
        RealPoint { values }
    }

    pub fn empty() -> Self {
        RealPoint { values: BTreeMap::new() }
    }

    pub fn set(&mut self, name: impl Into<String>, v: f64) {
        self.values.insert(name.into(), v);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn values(&self) -> &BTreeMap<String, f64> {
        &self.values
    }

    /// Values in the base-coordinate order of `chart`; errors on a missing entry.
    pub fn coords_for(&self, chart: &Chart) -> Result<Vec<f64>> {
        chart
            .base_names()
            .iter()
            .map(|b| {
                self.get(b).ok_or_else(|| {
                    Error::Numeric(format!("point does not assign coordinate '{b}'"))
                })
            })
            .collect()
    }
}

//! Coefficients of graded series: exact multivariate polynomials over Q in
//! the degree-0 coordinates, or opaque smooth functions known only through
//! registered numeric evaluators (with optional derivative rules).
//!
//! Exact coefficients compare exactly; as soon as an opaque function enters a
//! computation the result carries sampled-equality semantics (seeded points
//! in the chart's base box, relative tolerance).

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Extremely large entries: fall back to the quotient of approximations.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exponent tuple over the degree-0 coordinates of a chart, ordered by
/// (total degree, lexicographic) so map iteration matches printing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseMono(Vec<u32>);

impl BaseMono {
    pub fn unit(len: usize) -> Self {
        BaseMono(vec![0; len])
    }

    pub fn var(len: usize, i: usize) -> Self {
        let mut e = vec![0; len];
        e[i] = 1;
        BaseMono(e)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_unit(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &BaseMono) -> BaseMono {
        BaseMono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for BaseMono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.total(), &self.0).cmp(&(other.total(), &other.0))
    }
}

impl PartialOrd for BaseMono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Multivariate polynomial over Q in the degree-0 coordinates of a chart.
/// Invariant: no stored zero coefficients; all keys share the chart arity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    arity: usize,
    terms: BTreeMap<BaseMono, Rat>,
}

impl Poly {
    pub fn zero(arity: usize) -> Self {
        Poly { arity, terms: BTreeMap::new() }
    }

    pub fn constant(arity: usize, c: Rat) -> Self {
        let mut p = Poly::zero(arity);
        if !c.is_zero() {
            p.terms.insert(BaseMono::unit(arity), c);
        }
        p
    }

    pub fn one(arity: usize) -> Self {
        Poly::constant(arity, Rat::one())
    }

    pub fn var(arity: usize, i: usize) -> Self {
        assert!(i < arity, "variable index out of range");
        let mut p = Poly::zero(arity);
        p.terms.insert(BaseMono::var(arity, i), Rat::one());
        p
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BaseMono, &Rat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Some(c) iff the polynomial is the constant c (zero counts, as 0).
    pub fn as_constant(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            return Some(Rat::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.is_unit() {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.total()).max().unwrap_or(0)
    }

    fn insert(&mut self, m: BaseMono, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.arity, other.arity);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            arity: self.arity,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.arity, other.arity);
        let mut out = Poly::zero(self.arity);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.arity);
        }
        Poly {
            arity: self.arity,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::one(self.arity);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Exact partial derivative in variable i.
    pub fn partial(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.arity);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[i] -= 1;
            out.insert(BaseMono(exps), c * rat_int(e as i64));
        }
        out
    }

    pub fn eval(&self, xs: &[f64]) -> f64 {
        debug_assert_eq!(xs.len(), self.arity);
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = rat_to_f64(c);
            for (i, &e) in m.0.iter().enumerate() {
                t *= xs[i].powi(e as i32);
            }
            acc += t;
        }
        acc
    }

    pub fn eval_exact(&self, xs: &[Rat]) -> Rat {
        debug_assert_eq!(xs.len(), self.arity);
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t *= &xs[i];
                }
            }
            acc += t;
        }
        acc
    }

    /// Substitute polynomials for the variables (exact composition).
    pub fn compose(&self, args: &[Poly]) -> Poly {
        assert_eq!(args.len(), self.arity);
        let out_arity = args.first().map_or(0, |p| p.arity);
        let mut out = Poly::zero(out_arity);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(out_arity, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&args[i].pow(e));
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Rebuild this polynomial over expression arguments.
    pub fn subst_exprs(&self, args: &[OpExpr]) -> OpExpr {
        assert_eq!(args.len(), self.arity);
        let mut out = OpExpr::from_rat(Rat::zero());
        for (m, c) in &self.terms {
            let mut t = OpExpr::from_rat(c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = OpExpr::mul(t, OpExpr::pow(args[i].clone(), e));
                }
            }
            out = OpExpr::add(out, t);
        }
        out
    }

    /// Print with variable names; used by the series/report formatters.
    pub fn format_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        // ascending total degree; within a degree, earlier variables first
        let mut terms: Vec<(&BaseMono, &Rat)> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            (a.total(), std::cmp::Reverse(a.exps())).cmp(&(b.total(), std::cmp::Reverse(b.exps())))
        });
        let mut out = String::new();
        for (k, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = if neg { -c.clone() } else { c.clone() };
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&format_term(&mag, m, names));
        }
        out
    }
}

fn format_term(mag: &Rat, m: &BaseMono, names: &[String]) -> String {
    let mut factors: Vec<String> = Vec::new();
    if !mag.is_one() || m.is_unit() {
        factors.push(mag.to_string());
    }
    for (i, &e) in m.exps().iter().enumerate() {
        match e {
            0 => {}
            1 => factors.push(names[i].clone()),
            _ => factors.push(format!("{}^{}", names[i], e)),
        }
    }
    factors.join("*")
}

/// A named real-valued function known through a numeric evaluator plus an
/// optional rule producing the i-th partial derivative at given arguments.
pub struct OpaqueFn {
    pub name: String,
    pub arity: usize,
    eval: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    partial: Option<Box<dyn Fn(usize, &[OpExpr]) -> OpExpr + Send + Sync>>,
}

pub type FnRef = Arc<OpaqueFn>;

impl fmt::Debug for OpaqueFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OpaqueFn")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("has_partials", &self.partial.is_some())
            .finish()
    }
}

impl OpaqueFn {
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> FnRef {
        Arc::new(OpaqueFn { name: name.into(), arity, eval: Box::new(eval), partial: None })
    }

    pub fn with_partials(
        name: impl Into<String>,
        arity: usize,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        partial: impl Fn(usize, &[OpExpr]) -> OpExpr + Send + Sync + 'static,
    ) -> FnRef {
        Arc::new(OpaqueFn {
            name: name.into(),
            arity,
            eval: Box::new(eval),
            partial: Some(Box::new(partial)),
        })
    }

    pub fn has_partials(&self) -> bool {
        self.partial.is_some()
    }
}

/// Expression tree for coefficients that involve opaque functions.
/// Variables are the degree-0 coordinates of the owning chart, referenced
/// through embedded polynomials.
#[derive(Debug, Clone)]
pub enum OpExpr {
    Poly(Poly),
    Add(Box<OpExpr>, Box<OpExpr>),
    Mul(Box<OpExpr>, Box<OpExpr>),
    Pow(Box<OpExpr>, u32),
    Call(FnRef, Vec<OpExpr>),
}

impl OpExpr {
    pub fn from_rat(c: Rat) -> OpExpr {
        // Arity 0 constants coerce against any arity on use; keep real
        // constants as arity-carrying polys only when combined.
        OpExpr::Poly(Poly::constant(0, c))
    }

    fn as_poly(&self) -> Option<&Poly> {
        match self {
            OpExpr::Poly(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_structural_zero(&self) -> bool {
        matches!(self, OpExpr::Poly(p) if p.is_zero())
    }

    fn coerce(a: Poly, b: Poly) -> (Poly, Poly) {
        // Zero-arity constants may meet charted polys; lift the constant.
        match (a.arity, b.arity) {
            (x, y) if x == y => (a, b),
            (0, _) => {
                let c = a.as_constant().expect("arity-0 poly is constant");
                (Poly::constant(b.arity, c), b)
            }
            (_, 0) => {
                let c = b.as_constant().expect("arity-0 poly is constant");
                let arity = a.arity;
                (a, Poly::constant(arity, c))
            }
            _ => panic!("mixed polynomial arities in expression"),
        }
    }

    pub fn add(a: OpExpr, b: OpExpr) -> OpExpr {
        if a.is_structural_zero() {
            return b;
        }
        if b.is_structural_zero() {
            return a;
        }
        if let (OpExpr::Poly(p), OpExpr::Poly(q)) = (&a, &b) {
            let (p, q) = OpExpr::coerce(p.clone(), q.clone());
            return OpExpr::Poly(p.add(&q));
        }
        OpExpr::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: OpExpr, b: OpExpr) -> OpExpr {
        if a.is_structural_zero() || b.is_structural_zero() {
            return OpExpr::from_rat(Rat::zero());
        }
        if let (OpExpr::Poly(p), OpExpr::Poly(q)) = (&a, &b) {
            let (p, q) = OpExpr::coerce(p.clone(), q.clone());
            return OpExpr::Poly(p.mul(&q));
        }
        if let Some(p) = a.as_poly() {
            if p.as_constant().map_or(false, |c| c.is_one()) {
                return b;
            }
        }
        if let Some(q) = b.as_poly() {
            if q.as_constant().map_or(false, |c| c.is_one()) {
                return a;
            }
        }
        OpExpr::Mul(Box::new(a), Box::new(b))
    }

    pub fn neg(a: OpExpr) -> OpExpr {
        OpExpr::mul(OpExpr::from_rat(-Rat::one()), a)
    }

    pub fn pow(a: OpExpr, k: u32) -> OpExpr {
        if k == 0 {
            return OpExpr::from_rat(Rat::one());
        }
        if k == 1 {
            return a;
        }
        if let OpExpr::Poly(p) = &a {
            return OpExpr::Poly(p.pow(k));
        }
        OpExpr::Pow(Box::new(a), k)
    }

    pub fn call(f: FnRef, args: Vec<OpExpr>) -> Result<OpExpr> {
        if args.len() != f.arity {
            return Err(Error::InvalidInput(format!(
                "function '{}' expects {} argument(s), got {}",
                f.name,
                f.arity,
                args.len()
            )));
        }
        Ok(OpExpr::Call(f, args))
    }

    pub fn eval(&self, xs: &[f64]) -> Result<f64> {
        let v = match self {
            OpExpr::Poly(p) => {
                if p.arity == 0 {
                    p.as_constant().map(|c| rat_to_f64(&c)).unwrap_or(0.0)
                } else {
                    p.eval(xs)
                }
            }
            OpExpr::Add(a, b) => a.eval(xs)? + b.eval(xs)?,
            OpExpr::Mul(a, b) => a.eval(xs)? * b.eval(xs)?,
            OpExpr::Pow(a, k) => a.eval(xs)?.powi(*k as i32),
            OpExpr::Call(f, args) => {
                let vals: Result<Vec<f64>> = args.iter().map(|a| a.eval(xs)).collect();
                (f.eval)(&vals?)
            }
        };
        if !v.is_finite() {
            return Err(Error::Numeric("expression evaluated to a non-finite value".into()));
        }
        Ok(v)
    }

    /// Symbolic partial derivative in base variable `i`; requires derivative
    /// rules on every opaque function encountered.
    pub fn diff(&self, i: usize) -> Result<OpExpr> {
        Ok(match self {
            OpExpr::Poly(p) => {
                if p.arity == 0 {
                    OpExpr::from_rat(Rat::zero())
                } else {
                    OpExpr::Poly(p.partial(i))
                }
            }
            OpExpr::Add(a, b) => OpExpr::add(a.diff(i)?, b.diff(i)?),
            OpExpr::Mul(a, b) => OpExpr::add(
                OpExpr::mul(a.diff(i)?, (**b).clone()),
                OpExpr::mul((**a).clone(), b.diff(i)?),
            ),
            OpExpr::Pow(a, k) => OpExpr::mul(
                OpExpr::mul(OpExpr::from_rat(rat_int(*k as i64)), OpExpr::pow((**a).clone(), k - 1)),
                a.diff(i)?,
            ),
            OpExpr::Call(f, args) => {
                let mut acc = OpExpr::from_rat(Rat::zero());
                for (j, arg) in args.iter().enumerate() {
                    let da = arg.diff(i)?;
                    if da.is_structural_zero() {
                        continue;
                    }
                    let rule = f.partial.as_ref().ok_or_else(|| {
                        Error::Capability(format!(
                            "no derivative registered for opaque function '{}'",
                            f.name
                        ))
                    })?;
                    acc = OpExpr::add(acc, OpExpr::mul(rule(j, args), da));
                }
                acc
            }
        })
    }

    /// Substitute expressions for the base variables.
    pub fn subst(&self, args: &[OpExpr]) -> OpExpr {
        match self {
            OpExpr::Poly(p) => {
                if p.arity == 0 {
                    self.clone()
                } else {
                    p.subst_exprs(args)
                }
            }
            OpExpr::Add(a, b) => OpExpr::add(a.subst(args), b.subst(args)),
            OpExpr::Mul(a, b) => OpExpr::mul(a.subst(args), b.subst(args)),
            OpExpr::Pow(a, k) => OpExpr::pow(a.subst(args), *k),
            OpExpr::Call(f, cargs) => {
                OpExpr::Call(f.clone(), cargs.iter().map(|a| a.subst(args)).collect())
            }
        }
    }

    pub fn format_with(&self, names: &[String]) -> String {
        fn prec(e: &OpExpr) -> u8 {
            match e {
                OpExpr::Add(..) => 1,
                OpExpr::Mul(..) => 2,
                OpExpr::Pow(..) => 3,
                OpExpr::Call(..) => 4,
                OpExpr::Poly(p) => {
                    if p.terms.len() > 1 {
                        1
                    } else if p.as_constant().map_or(true, |c| !c.is_negative()) {
                        4
                    } else {
                        2
                    }
                }
            }
        }
        fn go(e: &OpExpr, names: &[String], parent: u8, out: &mut String) {
            let p = prec(e);
            let wrap = p < parent;
            if wrap {
                out.push('(');
            }
            match e {
                OpExpr::Poly(q) => out.push_str(&q.format_with(names)),
                OpExpr::Add(a, b) => {
                    go(a, names, 1, out);
                    out.push_str(" + ");
                    go(b, names, 1, out);
                }
                OpExpr::Mul(a, b) => {
                    go(a, names, 2, out);
                    out.push('*');
                    go(b, names, 3, out);
                }
                OpExpr::Pow(a, k) => {
                    go(a, names, 4, out);
                    out.push_str(&format!("^{k}"));
                }
                OpExpr::Call(f, args) => {
                    out.push_str(&f.name);
                    out.push('(');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        go(a, names, 0, out);
                    }
                    out.push(')');
                }
            }
            if wrap {
                out.push(')');
            }
        }
        let mut s = String::new();
        go(self, names, 0, &mut s);
        s
    }
}

/// Coefficient of a graded-series term.
#[derive(Debug, Clone)]
pub enum Coeff {
    Poly(Poly),
    Opaque(OpExpr),
}

impl Coeff {
    pub fn zero(arity: usize) -> Coeff {
        Coeff::Poly(Poly::zero(arity))
    }

    pub fn one(arity: usize) -> Coeff {
        Coeff::Poly(Poly::one(arity))
    }

    pub fn constant(arity: usize, c: Rat) -> Coeff {
        Coeff::Poly(Poly::constant(arity, c))
    }

    pub fn is_structural_zero(&self) -> bool {
        match self {
            Coeff::Poly(p) => p.is_zero(),
            Coeff::Opaque(e) => e.is_structural_zero(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coeff::Poly(_))
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        match self {
            Coeff::Poly(p) => Some(p),
            Coeff::Opaque(_) => None,
        }
    }

    pub fn as_constant(&self) -> Option<Rat> {
        self.as_poly().and_then(|p| p.as_constant())
    }

    pub fn to_expr(&self) -> OpExpr {
        match self {
            Coeff::Poly(p) => OpExpr::Poly(p.clone()),
            Coeff::Opaque(e) => e.clone(),
        }
    }

    /// Wrap an expression, collapsing to the exact representation when the
    /// expression is a plain polynomial.
    pub fn from_expr(e: OpExpr) -> Coeff {
        Coeff::Opaque(e).normalized()
    }

    pub fn add(&self, other: &Coeff) -> Coeff {
        match (self, other) {
            (Coeff::Poly(a), Coeff::Poly(b)) => Coeff::Poly(a.add(b)),
            _ => Coeff::Opaque(OpExpr::add(self.to_expr(), other.to_expr())).normalized(),
        }
    }

    pub fn mul(&self, other: &Coeff) -> Coeff {
        match (self, other) {
            (Coeff::Poly(a), Coeff::Poly(b)) => Coeff::Poly(a.mul(b)),
            _ => Coeff::Opaque(OpExpr::mul(self.to_expr(), other.to_expr())).normalized(),
        }
    }

    pub fn neg(&self) -> Coeff {
        match self {
            Coeff::Poly(p) => Coeff::Poly(p.neg()),
            Coeff::Opaque(e) => Coeff::Opaque(OpExpr::neg(e.clone())),
        }
    }

    pub fn sub(&self, other: &Coeff) -> Coeff {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> Coeff {
        match self {
            Coeff::Poly(p) => Coeff::Poly(p.scale(c)),
            Coeff::Opaque(e) => {
                Coeff::Opaque(OpExpr::mul(OpExpr::from_rat(c.clone()), e.clone())).normalized()
            }
        }
    }

    /// Collapse an opaque wrapper that folded back to a polynomial.
    fn normalized(self) -> Coeff {
        match self {
            Coeff::Opaque(OpExpr::Poly(p)) => Coeff::Poly(p),
            other => other,
        }
    }

    pub fn eval(&self, xs: &[f64]) -> Result<f64> {
        match self {
            Coeff::Poly(p) => {
                let v = if p.arity() == 0 {
                    p.as_constant().map(|c| rat_to_f64(&c)).unwrap_or(0.0)
                } else {
                    p.eval(xs)
                };
                if !v.is_finite() {
                    return Err(Error::Numeric("polynomial evaluated to non-finite value".into()));
                }
                Ok(v)
            }
            Coeff::Opaque(e) => e.eval(xs),
        }
    }

    pub fn partial(&self, i: usize) -> Result<Coeff> {
        Ok(match self {
            Coeff::Poly(p) => Coeff::Poly(p.partial(i)),
            Coeff::Opaque(e) => Coeff::Opaque(e.diff(i)?).normalized(),
        })
    }

    pub fn format_with(&self, names: &[String]) -> String {
        match self {
            Coeff::Poly(p) => p.format_with(names),
            Coeff::Opaque(e) => e.format_with(names),
        }
    }
}

/// Parameters for sampled numeric equality.
#[derive(Debug, Clone, Copy)]
pub struct EqOptions {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for EqOptions {
    fn default() -> Self {
        EqOptions { samples: 8, seed: 42, tol: 1e-9 }
    }
}

/// Deterministic pseudo-random points in a box (seeded; stable across runs).
pub fn sample_points(domain: &[(f64, f64)], opts: &EqOptions) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    (0..opts.samples.max(1))
        .map(|_| domain.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect())
        .collect()
}

pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * f64::max(1.0, f64::max(a.abs(), b.abs()))
}

/// Coefficient equality: exact when both sides are polynomials, sampled at
/// seeded points of `domain` otherwise.
pub fn coeff_eq(a: &Coeff, b: &Coeff, domain: &[(f64, f64)], opts: &EqOptions) -> Result<bool> {
    match (a, b) {
        (Coeff::Poly(p), Coeff::Poly(q)) => {
            if p.arity() == q.arity() {
                Ok(p == q)
            } else {
                // constant against charted constant
                Ok(p.as_constant().zip(q.as_constant()).map_or(false, |(x, y)| x == y))
            }
        }
        _ => {
            for pt in sample_points(domain, opts) {
                let va = a.eval(&pt)?;
                let vb = b.eval(&pt)?;
                if !approx_eq(va, vb, opts.tol) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Registry of opaque functions available to expressions and manifests.
#[derive(Debug, Clone)]
pub struct FnRegistry {
    map: BTreeMap<String, FnRef>,
}

impl FnRegistry {
    pub fn empty() -> Self {
        FnRegistry { map: BTreeMap::new() }
    }

    /// The standard library of smooth functions. Every function's
    /// derivative rule produces expressions built from the same library, so
    /// repeated differentiation works to any order.
    pub fn builtins() -> Self {
        let mut r = FnRegistry::empty();
        r.register(builtin_recip());
        r.register(builtin_sin());
        r.register(builtin_cos());
        r.register(builtin_tan());
        r.register(builtin_exp());
        r.register(builtin_log());
        r.register(builtin_sqrt());
        r.register(builtin_arctan());
        r.register(builtin_arctan2());
        r.register(builtin_pi());
        r
    }

    pub fn register(&mut self, f: FnRef) {
        self.map.insert(f.name.clone(), f);
    }

    pub fn get(&self, name: &str) -> Option<&FnRef> {
        self.map.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(|s| s.as_str())
    }
}

// Each builtin is a process-wide singleton so the derivative-rule closures
// can reference sibling functions lazily (sin's rule calls builtin_cos()
// when invoked, never at construction, so mutual references are fine).
macro_rules! builtin_singleton {
    ($fn_name:ident, $name:literal, $arity:literal, $eval:expr) => {
        fn $fn_name() -> FnRef {
            use std::sync::OnceLock;
            static CELL: OnceLock<FnRef> = OnceLock::new();
            CELL.get_or_init(|| OpaqueFn::new($name, $arity, $eval)).clone()
        }
    };
    ($fn_name:ident, $name:literal, $arity:literal, $eval:expr, $partial:expr) => {
        fn $fn_name() -> FnRef {
            use std::sync::OnceLock;
            static CELL: OnceLock<FnRef> = OnceLock::new();
            CELL.get_or_init(|| OpaqueFn::with_partials($name, $arity, $eval, $partial))
                .clone()
        }
    };
}

builtin_singleton!(
    builtin_recip,
    "recip",
    1,
    |x: &[f64]| 1.0 / x[0],
    |_, args: &[OpExpr]| {
        OpExpr::neg(OpExpr::pow(OpExpr::Call(builtin_recip(), vec![args[0].clone()]), 2))
    }
);
builtin_singleton!(builtin_sin, "sin", 1, |x: &[f64]| x[0].sin(), |_, args: &[OpExpr]| {
    OpExpr::Call(builtin_cos(), vec![args[0].clone()])
});
builtin_singleton!(builtin_cos, "cos", 1, |x: &[f64]| x[0].cos(), |_, args: &[OpExpr]| {
    OpExpr::neg(OpExpr::Call(builtin_sin(), vec![args[0].clone()]))
});
builtin_singleton!(builtin_tan, "tan", 1, |x: &[f64]| x[0].tan(), |_, args: &[OpExpr]| {
    let t = OpExpr::Call(builtin_tan(), vec![args[0].clone()]);
    OpExpr::add(OpExpr::from_rat(Rat::one()), OpExpr::pow(t, 2))
});
builtin_singleton!(builtin_exp, "exp", 1, |x: &[f64]| x[0].exp(), |_, args: &[OpExpr]| {
    OpExpr::Call(builtin_exp(), vec![args[0].clone()])
});
builtin_singleton!(builtin_log, "log", 1, |x: &[f64]| x[0].ln(), |_, args: &[OpExpr]| {
    OpExpr::Call(builtin_recip(), vec![args[0].clone()])
});
builtin_singleton!(
    builtin_sqrt,
    "sqrt",
    1,
    |x: &[f64]| x[0].sqrt(),
    |_, args: &[OpExpr]| {
        let s = OpExpr::Call(builtin_sqrt(), vec![args[0].clone()]);
        OpExpr::mul(OpExpr::from_rat(rat(1, 2)), OpExpr::Call(builtin_recip(), vec![s]))
    }
);
builtin_singleton!(
    builtin_arctan,
    "arctan",
    1,
    |x: &[f64]| x[0].atan(),
    |_, args: &[OpExpr]| {
        let denom =
            OpExpr::add(OpExpr::from_rat(Rat::one()), OpExpr::pow(args[0].clone(), 2));
        OpExpr::Call(builtin_recip(), vec![denom])
    }
);
// arctan2(y, x): the angle of (x, y) in (-pi, pi].
builtin_singleton!(
    builtin_arctan2,
    "arctan2",
    2,
    |x: &[f64]| x[0].atan2(x[1]),
    |i, args: &[OpExpr]| {
        let y = args[0].clone();
        let x = args[1].clone();
        let denom = OpExpr::add(OpExpr::pow(x.clone(), 2), OpExpr::pow(y.clone(), 2));
        let r = OpExpr::Call(builtin_recip(), vec![denom]);
        if i == 0 {
            OpExpr::mul(x, r)
        } else {
            OpExpr::mul(OpExpr::neg(y), r)
        }
    }
);
builtin_singleton!(builtin_pi, "pi", 0, |_: &[f64]| std::f64::consts::PI);

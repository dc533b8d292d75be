//! Truncated graded-commutative polynomial algebra over exact rationals.
//!
//! A [`RingContext`] fixes a set of named generators, each with a positive
//! degree, together with a truncation degree. Every [`GradedClass`] lives in
//! one context; monomials whose total degree exceeds the truncation are
//! dropped silently by all operations, since every formula we evaluate is a
//! finite-degree extraction.
//!
//! Coefficients are arbitrary-precision rationals; there is no floating
//! point anywhere in this module.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RingError {
    #[error("duplicate variable name `{0}` in ring context")]
    DuplicateVariable(String),
    #[error("variable degree must be positive (variable `{0}`)")]
    ZeroDegreeVariable(String),
    #[error("operands belong to different ring contexts")]
    ContextMismatch,
    #[error("degree {degree} out of range (truncation {truncation})")]
    DegreeOutOfRange { degree: i64, truncation: u32 },
    #[error("class is not invertible: constant term is zero")]
    NotInvertible,
    #[error("expected a degree-1 variable, `{0}` has degree {1}")]
    NotALineVariable(String, u32),
    #[error("parse error at byte {at}: {msg}")]
    Parse { at: usize, msg: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

/// Handle to a generator of a ring context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable(pub(crate) usize);

/// Immutable description of the ambient graded ring.
#[derive(Debug, PartialEq, Eq)]
pub struct RingContext {
    names: Vec<String>,
    degrees: Vec<u32>,
    truncation: u32,
}

/// Shared handle to a ring context. Contexts are immutable, so classes can
/// be sent and shared freely across threads.
pub type Ctx = Arc<RingContext>;

impl RingContext {
    /// Build a context from `(name, degree)` pairs and a truncation degree.
    pub fn new(vars: &[(&str, u32)], truncation: u32) -> Result<Ctx, RingError> {
        let mut names = Vec::with_capacity(vars.len());
        let mut degrees = Vec::with_capacity(vars.len());
        for &(name, degree) in vars {
            if names.iter().any(|n| n == name) {
                return Err(RingError::DuplicateVariable(name.to_string()));
            }
            if degree == 0 {
                return Err(RingError::ZeroDegreeVariable(name.to_string()));
            }
            names.push(name.to_string());
            degrees.push(degree);
        }
        Ok(Arc::new(RingContext {
            names,
            degrees,
            truncation,
        }))
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn variable(&self, name: &str) -> Option<Variable> {
        self.names.iter().position(|n| n == name).map(Variable)
    }

    pub fn name(&self, v: Variable) -> &str {
        &self.names[v.0]
    }

    pub fn degree(&self, v: Variable) -> u32 {
        self.degrees[v.0]
    }

    fn monomial_degree(&self, exps: &[u32]) -> u64 {
        exps.iter()
            .zip(&self.degrees)
            .map(|(&e, &d)| e as u64 * d as u64)
            .sum()
    }
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A truncated graded class: a polynomial in the context's generators with
/// exact rational coefficients. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedClass {
    ctx: Ctx,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl GradedClass {
    pub fn zero(ctx: &Ctx) -> Self {
        GradedClass {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ctx: &Ctx) -> Self {
        Self::constant(ctx, BigRational::one())
    }

    pub fn constant(ctx: &Ctx, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; ctx.num_vars()], c);
        }
        GradedClass {
            ctx: ctx.clone(),
            terms,
        }
    }

    pub fn from_int(ctx: &Ctx, c: i64) -> Self {
        Self::constant(ctx, rational(c, 1))
    }

    /// The generator `v` as a class of its own degree.
    pub fn variable(ctx: &Ctx, v: Variable) -> Self {
        Self::monomial(ctx, &[(v, 1)], BigRational::one())
    }

    /// A single monomial `coeff * prod v_i^{e_i}` (dropped if it exceeds the
    /// truncation).
    pub fn monomial(ctx: &Ctx, powers: &[(Variable, u32)], coeff: BigRational) -> Self {
        let mut exps = vec![0u32; ctx.num_vars()];
        for &(v, e) in powers {
            exps[v.0] += e;
        }
        let mut class = Self::zero(ctx);
        class.insert(exps, coeff);
        class
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> BigRational {
        self.terms
            .get(&vec![0u32; self.ctx.num_vars()])
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn same_ctx(&self, other: &Self) -> Result<(), RingError> {
        if Arc::ptr_eq(&self.ctx, &other.ctx) || self.ctx == other.ctx {
            Ok(())
        } else {
            Err(RingError::ContextMismatch)
        }
    }

    fn insert(&mut self, exps: Vec<u32>, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        if self.ctx.monomial_degree(&exps) > self.ctx.truncation as u64 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + &coeff;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, RingError> {
        self.same_ctx(rhs)?;
        let mut out = self.clone();
        for (exps, coeff) in &rhs.terms {
            out.insert(exps.clone(), coeff.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, RingError> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), -c.clone()))
            .collect();
        GradedClass {
            ctx: self.ctx.clone(),
            terms,
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ctx);
        }
        let terms = self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect();
        GradedClass {
            ctx: self.ctx.clone(),
            terms,
        }
    }

    /// Graded product, truncated. Commutative and associative.
    pub fn mul(&self, rhs: &Self) -> Result<Self, RingError> {
        self.same_ctx(rhs)?;
        let trunc = self.ctx.truncation as u64;
        let mut out = Self::zero(&self.ctx);
        for (ea, ca) in &self.terms {
            let da = self.ctx.monomial_degree(ea);
            if da > trunc {
                continue;
            }
            for (eb, cb) in &rhs.terms {
                if da + self.ctx.monomial_degree(eb) > trunc {
                    continue;
                }
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(&x, &y)| x + y).collect();
                out.insert(exps, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Result<Self, RingError> {
        let mut out = Self::one(&self.ctx);
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// The sum of all terms of total degree exactly `d`.
    pub fn degree_part(&self, d: u32) -> Result<Self, RingError> {
        if d > self.ctx.truncation {
            return Err(RingError::DegreeOutOfRange {
                degree: d as i64,
                truncation: self.ctx.truncation,
            });
        }
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| self.ctx.monomial_degree(e) == d as u64)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        Ok(GradedClass {
            ctx: self.ctx.clone(),
            terms,
        })
    }

    /// Multiplicative inverse up to truncation. Requires a nonzero constant
    /// term; for total Chern classes the constant term is exactly 1 and the
    /// geometric series terminates at the truncation degree.
    pub fn inverse(&self) -> Result<Self, RingError> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(RingError::NotInvertible);
        }
        // self = c0 (1 + m) with m of positive degree; invert the unit part.
        let mut positive = self.scale(&(BigRational::one() / &c0));
        positive.terms.remove(&vec![0u32; self.ctx.num_vars()]);
        let mut out = Self::one(&self.ctx);
        let mut power = Self::one(&self.ctx);
        loop {
            power = power.mul(&positive)?.neg();
            if power.is_zero() {
                break;
            }
            out = out.add(&power)?;
        }
        Ok(out.scale(&(BigRational::one() / &c0)))
    }

    /// Evaluation homomorphism sending `v` to 0: drops every monomial that
    /// contains `v`.
    pub fn substitute_zero(&self, v: Variable) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e[v.0] == 0)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        GradedClass {
            ctx: self.ctx.clone(),
            terms,
        }
    }

    /// Evaluation homomorphism sending `v` to 1: erases `v` from every
    /// monomial and merges coefficients. Degrees only decrease, so the
    /// result is still truncated.
    pub fn substitute_one(&self, v: Variable) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (exps, coeff) in &self.terms {
            let mut e = exps.clone();
            e[v.0] = 0;
            out.insert(e, coeff.clone());
        }
        out
    }

    pub fn is_free_of(&self, v: Variable) -> bool {
        self.terms.keys().all(|e| e[v.0] == 0)
    }

    /// Largest exponent of `v` appearing in any stored monomial.
    pub fn max_power(&self, v: Variable) -> u32 {
        self.terms.keys().map(|e| e[v.0]).max().unwrap_or(0)
    }

    /// The `v`-free class multiplying `v^k`.
    pub fn coefficient_of_power(&self, v: Variable, k: u32) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (exps, coeff) in &self.terms {
            if exps[v.0] == k {
                let mut e = exps.clone();
                e[v.0] = 0;
                out.insert(e, coeff.clone());
            }
        }
        out
    }

    /// Terms sorted by (total degree, exponent vector), the canonical order
    /// used by [`fmt::Display`].
    fn sorted_terms(&self) -> Vec<(&Vec<u32>, &BigRational)> {
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by_key(|(e, _)| (self.ctx.monomial_degree(e), (*e).clone()));
        terms
    }

    /// Parse the canonical serialization produced by `Display`, resolving
    /// variable names against `ctx`. Round-trips bit-exactly.
    pub fn parse(ctx: &Ctx, input: &str) -> Result<Self, RingError> {
        let mut out = Self::zero(ctx);
        let trimmed = input.trim();
        if trimmed == "0" {
            return Ok(out);
        }
        let mut offset = 0usize;
        for piece in trimmed.split(" + ") {
            let (exps, coeff) = parse_term(ctx, piece, offset)?;
            out.insert(exps, coeff);
            offset += piece.len() + 3;
        }
        Ok(out)
    }
}

fn parse_rational(s: &str, at: usize) -> Result<BigRational, RingError> {
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let numer: BigInt = num_str.parse().map_err(|_| RingError::Parse {
        at,
        msg: format!("bad numerator `{num_str}`"),
    })?;
    let denom: BigInt = den_str.parse().map_err(|_| RingError::Parse {
        at,
        msg: format!("bad denominator `{den_str}`"),
    })?;
    if denom.is_zero() {
        return Err(RingError::Parse {
            at,
            msg: "zero denominator".to_string(),
        });
    }
    Ok(BigRational::new(numer, denom))
}

fn parse_term(ctx: &Ctx, piece: &str, at: usize) -> Result<(Vec<u32>, BigRational), RingError> {
    let mut factors = piece.trim().split('*');
    let coeff_str = factors.next().ok_or(RingError::Parse {
        at,
        msg: "empty term".to_string(),
    })?;
    let coeff = parse_rational(coeff_str.trim(), at)?;
    let mut exps = vec![0u32; ctx.num_vars()];
    for factor in factors {
        let factor = factor.trim();
        let (name, exp) = match factor.split_once('^') {
            Some((n, e)) => {
                let exp: u32 = e.parse().map_err(|_| RingError::Parse {
                    at,
                    msg: format!("bad exponent `{e}`"),
                })?;
                (n, exp)
            }
            None => (factor, 1),
        };
        let var = ctx
            .variable(name)
            .ok_or_else(|| RingError::UnknownVariable(name.to_string()))?;
        exps[var.0] += exp;
    }
    Ok((exps, coeff))
}

fn fmt_rational(c: &BigRational) -> String {
    if c.denom().is_one() {
        format!("{}", c.numer())
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for GradedClass {
    /// Canonical form: terms sorted by (total degree, exponent vector),
    /// joined by " + ", each as `coeff` or `coeff*v^e*...` with signed
    /// rational coefficients written `p` or `p/q`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (exps, coeff) in self.sorted_terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", fmt_rational(coeff))?;
            for (i, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                write!(f, "*{}", self.ctx.names[i])?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Convenience: exact rational from an integer pair.
pub fn ratio(n: i64, d: i64) -> BigRational {
    rational(n, d)
}

//! Virtual bundles: formal differences of honest bundles carrying a rank
//! and a total Chern class, with the Whitney/Segre calculus and the
//! tensor-by-line-bundle twist used throughout the family computations.

use num::{BigInt, BigRational, One};
use thiserror::Error;

use crate::ring::{Ctx, GradedClass, RingError, Variable};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BundleError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("total Chern class must have constant term 1, found {0}")]
    BadConstantTerm(String),
    #[error("honest rank-{rank} bundle cannot carry Chern classes above degree {rank}")]
    ChernAboveRank { rank: u32 },
    #[error("virtual rank {0} is negative; top Chern class undefined")]
    NegativeRank(i64),
    #[error("virtual rank {rank} exceeds truncation {truncation}")]
    RankAboveTruncation { rank: i64, truncation: u32 },
    #[error("projective pushforward requires a bundle of rank >= 1")]
    RankZeroProjectivization,
}

/// An honest bundle: a nonnegative rank and a total Chern class with
/// constant term 1 and no components above the rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bundle {
    rank: u32,
    ctotal: GradedClass,
}

impl Bundle {
    pub fn new(rank: u32, ctotal: GradedClass) -> Result<Self, BundleError> {
        if !ctotal.constant_term().is_one() {
            return Err(BundleError::BadConstantTerm(
                ctotal.constant_term().to_string(),
            ));
        }
        for d in rank + 1..=ctotal.ctx().truncation() {
            if !ctotal.degree_part(d)?.is_zero() {
                return Err(BundleError::ChernAboveRank { rank });
            }
        }
        Ok(Bundle { rank, ctotal })
    }

    /// Trivial bundle of the given rank (total Chern class 1).
    pub fn trivial(ctx: &Ctx, rank: u32) -> Self {
        Bundle {
            rank,
            ctotal: GradedClass::one(ctx),
        }
    }

    /// Line bundle with first Chern class `c1` (a degree-1 class).
    pub fn line(c1: &GradedClass) -> Result<Self, BundleError> {
        let ctx = c1.ctx();
        if c1.degree_part(1)? != *c1 {
            return Err(BundleError::ChernAboveRank { rank: 1 });
        }
        Bundle::new(1, GradedClass::one(ctx).add(c1)?)
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn ctotal(&self) -> &GradedClass {
        &self.ctotal
    }

    pub fn ctx(&self) -> &Ctx {
        self.ctotal.ctx()
    }

    /// Chern classes of the tensor product with the line bundle whose first
    /// Chern class is the degree-1 generator `l`:
    /// `c_k(E (x) L) = sum_j binom(rank - j, k - j) c_j(E) l^(k-j)`.
    pub fn twist(&self, l: Variable) -> Result<Bundle, BundleError> {
        let ctx = self.ctx().clone();
        if ctx.degree(l) != 1 {
            return Err(RingError::NotALineVariable(ctx.name(l).to_string(), ctx.degree(l)).into());
        }
        let top = self.rank.min(ctx.truncation());
        let mut out = GradedClass::zero(&ctx);
        for k in 0..=top {
            for j in 0..=k {
                let cj = self.ctotal.degree_part(j)?;
                if cj.is_zero() {
                    continue;
                }
                let b = binomial(self.rank - j, k - j);
                let lpow = GradedClass::monomial(&ctx, &[(l, k - j)], BigRational::from(b));
                out = out.add(&cj.mul(&lpow)?)?;
            }
        }
        Ok(Bundle {
            rank: self.rank,
            ctotal: out,
        })
    }
}

fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let mut out = BigInt::one();
    for i in 0..k {
        out = out * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    out
}

/// A formal difference of honest bundles. The virtual rank may be negative;
/// the total Chern class is the truncated quotient of the two products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirtualBundle {
    plus: Vec<Bundle>,
    minus: Vec<Bundle>,
}

impl VirtualBundle {
    pub fn zero() -> Self {
        VirtualBundle {
            plus: Vec::new(),
            minus: Vec::new(),
        }
    }

    pub fn from_bundle(b: Bundle) -> Self {
        VirtualBundle {
            plus: vec![b],
            minus: Vec::new(),
        }
    }

    pub fn difference(plus: Vec<Bundle>, minus: Vec<Bundle>) -> Self {
        VirtualBundle { plus, minus }
    }

    pub fn is_honest(&self) -> bool {
        self.minus.is_empty()
    }

    pub fn summands(&self) -> (&[Bundle], &[Bundle]) {
        (&self.plus, &self.minus)
    }

    pub fn vrank(&self) -> i64 {
        let p: i64 = self.plus.iter().map(|b| b.rank() as i64).sum();
        let m: i64 = self.minus.iter().map(|b| b.rank() as i64).sum();
        p - m
    }

    /// Whitney sum: ranks add, total Chern classes multiply.
    pub fn whitney_sum(&self, other: &VirtualBundle) -> VirtualBundle {
        let mut plus = self.plus.clone();
        plus.extend(other.plus.iter().cloned());
        let mut minus = self.minus.clone();
        minus.extend(other.minus.iter().cloned());
        VirtualBundle { plus, minus }
    }

    /// Formal inverse: swaps the two sides of the difference.
    pub fn negate(&self) -> VirtualBundle {
        VirtualBundle {
            plus: self.minus.clone(),
            minus: self.plus.clone(),
        }
    }

    fn any_ctx(&self) -> Option<&Ctx> {
        self.plus
            .first()
            .map(|b| b.ctx())
            .or_else(|| self.minus.first().map(|b| b.ctx()))
    }

    /// Total Chern class: the product over positive summands times the
    /// inverse of the product over negative summands, truncated.
    pub fn ctotal(&self) -> Result<GradedClass, BundleError> {
        let ctx = match self.any_ctx() {
            Some(c) => c.clone(),
            None => panic!("ctotal of the empty virtual bundle needs a context"),
        };
        let mut num = GradedClass::one(&ctx);
        for b in &self.plus {
            num = num.mul(b.ctotal())?;
        }
        let mut den = GradedClass::one(&ctx);
        for b in &self.minus {
            den = den.mul(b.ctotal())?;
        }
        Ok(num.mul(&den.inverse()?)?)
    }

    pub fn ctotal_in(&self, ctx: &Ctx) -> Result<GradedClass, BundleError> {
        if self.plus.is_empty() && self.minus.is_empty() {
            return Ok(GradedClass::one(ctx));
        }
        self.ctotal()
    }

    pub fn segre_total_in(&self, ctx: &Ctx) -> Result<GradedClass, BundleError> {
        Ok(self.ctotal_in(ctx)?.inverse()?)
    }

    /// Total Segre class, the formal inverse of the total Chern class, so
    /// `s_1 = -c_1` for an honest bundle.
    pub fn segre_total(&self) -> Result<GradedClass, BundleError> {
        Ok(self.ctotal()?.inverse()?)
    }

    /// Twist by the line bundle with first Chern class `l`, summand by
    /// summand. Every summand carries its honest rank, so the binomial
    /// formula applies on each side of the difference.
    pub fn twist(&self, l: Variable) -> Result<VirtualBundle, BundleError> {
        let plus = self
            .plus
            .iter()
            .map(|b| b.twist(l))
            .collect::<Result<Vec<_>, _>>()?;
        let minus = self
            .minus
            .iter()
            .map(|b| b.twist(l))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VirtualBundle { plus, minus })
    }

    /// Top Chern class of the virtual bundle: the degree part of the total
    /// Chern class at the virtual rank.
    pub fn top_chern(&self) -> Result<GradedClass, BundleError> {
        let r = self.vrank();
        if r < 0 {
            return Err(BundleError::NegativeRank(r));
        }
        let c = self.ctotal()?;
        let trunc = c.ctx().truncation();
        if r as u64 > trunc as u64 {
            return Err(BundleError::RankAboveTruncation {
                rank: r,
                truncation: trunc,
            });
        }
        Ok(c.degree_part(r as u32)?)
    }
}

/// Pushforward along the projectivization of an honest bundle `v` of rank
/// `r >= 1`, with `z` the hyperplane class of `P(v)`: each `z^(r-1+i)` maps
/// to `s_i(v)` and powers below `r-1` map to zero. The coefficients of the
/// `z`-powers must be base classes.
pub fn projective_pushforward(
    a: &GradedClass,
    v: &Bundle,
    z: Variable,
) -> Result<GradedClass, BundleError> {
    if v.rank() == 0 {
        return Err(BundleError::RankZeroProjectivization);
    }
    let ctx = a.ctx().clone();
    let segre = v.ctotal().inverse()?;
    let fiber_dim = v.rank() - 1;
    let mut out = GradedClass::zero(&ctx);
    for k in 0..=a.max_power(z) {
        if k < fiber_dim {
            continue;
        }
        let base = a.coefficient_of_power(z, k);
        if base.is_zero() {
            continue;
        }
        let i = k - fiber_dim;
        if i > ctx.truncation() {
            continue;
        }
        out = out.add(&base.mul(&segre.degree_part(i)?)?)?;
    }
    Ok(out)
}

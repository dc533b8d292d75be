//! Enumerative bookkeeping for families of exceptional curves: localized
//! top Chern classes of Kuranishi models, stabilization, Riemann-Roch rank
//! identities, fiber-product virtual classes, the tau class, and the
//! dominating-term expansion.

use std::collections::BTreeMap;

use num::{BigRational, Zero};
use thiserror::Error;

use crate::bundle::{Bundle, BundleError, VirtualBundle};
use crate::lattice::{pair, Febd, LatticeClass, LatticeError, SurfaceGeometry};
use crate::ring::{ratio, Ctx, GradedClass, RingError, Variable};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FamilyError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("Kuranishi model bundles must be honest (no negative summands)")]
    ModelNotHonest,
    #[error("Kuranishi model needs rank(V) >= 1, got {0}")]
    DeformationRankTooSmall(i64),
    #[error("expected dimension {ed} outside [0, {truncation}]")]
    EdOutOfRange { ed: i64, truncation: u32 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("need at least one exceptional class")]
    EmptyCollection,
    #[error("{what}: {lhs} != {rhs} (formula transcription bug)")]
    FormulaMismatch {
        what: &'static str,
        lhs: String,
        rhs: String,
    },
    #[error("assembled bundle rank {bundles} does not match lattice rank formula {lattice}")]
    OmegaRankMismatch { lattice: i64, bundles: i64 },
    #[error("{what} must be homogeneous of degree {expected}")]
    BadInsertionDegree { what: &'static str, expected: u32 },
    #[error(
        "expected one twist variable per exceptional class: {classes} classes, {vars} variables"
    )]
    TwistVariableCount { classes: usize, vars: usize },
}

/// An algebraic family Kuranishi model reduced to its class-level data:
/// the deformation bundle `V`, the obstruction bundle `W`, the dimension of
/// the ambient base, and the (user-supplied) total Segre class of the
/// moduli embedding into `P(V)`.
#[derive(Debug, Clone)]
pub struct KuranishiModel {
    v: VirtualBundle,
    w: VirtualBundle,
    base_dim: u32,
    moduli_segre: GradedClass,
}

impl KuranishiModel {
    pub fn new(
        v: VirtualBundle,
        w: VirtualBundle,
        base_dim: u32,
        moduli_segre: GradedClass,
    ) -> Result<Self, FamilyError> {
        if !v.is_honest() || !w.is_honest() {
            return Err(FamilyError::ModelNotHonest);
        }
        if v.vrank() < 1 {
            return Err(FamilyError::DeformationRankTooSmall(v.vrank()));
        }
        Ok(KuranishiModel {
            v,
            w,
            base_dim,
            moduli_segre,
        })
    }

    pub fn ctx(&self) -> &Ctx {
        self.moduli_segre.ctx()
    }

    pub fn expected_dimension(&self) -> i64 {
        self.base_dim as i64 + self.v.vrank() - 1 - self.w.vrank()
    }

    pub fn moduli_segre(&self) -> &GradedClass {
        &self.moduli_segre
    }
}

/// Localized contribution of the top Chern class along the moduli space:
/// the degree-`ed` part of `c_total(W (x) H) . s_total(M, P(V))`, with `z`
/// the hyperplane class of `P(V)`.
pub fn localized_class(k: &KuranishiModel, z: Variable) -> Result<GradedClass, FamilyError> {
    let ctx = k.ctx().clone();
    let ed = k.expected_dimension();
    if ed < 0 || ed as u64 > ctx.truncation() as u64 {
        return Err(FamilyError::EdOutOfRange {
            ed,
            truncation: ctx.truncation(),
        });
    }
    let obstruction = k.w.twist(z)?.ctotal_in(&ctx)?;
    Ok(obstruction.mul(&k.moduli_segre)?.degree_part(ed as u32)?)
}

/// Stabilization `(V, W) -> (V + G, W + G)`: the moduli Segre class picks
/// up the factor `s_total(G (x) H)` from the normal bundle of
/// `P(V) in P(V + G)`, and the localized class is unchanged.
pub fn stabilize(
    k: &KuranishiModel,
    g: &VirtualBundle,
    z: Variable,
) -> Result<KuranishiModel, FamilyError> {
    if !g.is_honest() {
        return Err(FamilyError::ModelNotHonest);
    }
    let ctx = k.ctx().clone();
    let correction = g.twist(z)?.segre_total_in(&ctx)?;
    KuranishiModel::new(
        k.v.whitney_sum(g),
        k.w.whitney_sum(g),
        k.base_dim,
        k.moduli_segre.mul(&correction)?,
    )
}

/// Virtual class of a fiber product: the diagonal Gysin pullback realized
/// as the product of the factors against a user-supplied excess or normal
/// insertion (the identity class when the diagonal is transverse).
pub fn fiber_product_vclass(
    a: &GradedClass,
    b: &GradedClass,
    normal_insertion: &GradedClass,
) -> Result<GradedClass, RingError> {
    a.mul(b)?.mul(normal_insertion)
}

/// Euler characteristic of a line bundle by surface Riemann-Roch:
/// `chi(O) + (c^2 - K.c)/2` with `chi(O) = (K^2 + c2)/12` by Noether.
pub fn chi_line(c: &LatticeClass, g: &SurfaceGeometry) -> Result<BigRational, FamilyError> {
    let c2 = pair(c, c, g)?;
    let kc = g.canonical_pair(&c.coords)?;
    let num = c2 - kc;
    if num.rem_euclid(2) != 0 {
        return Err(LatticeError::Parity {
            what: "c^2 - K.c",
            value: num,
        }
        .into());
    }
    let chi0 = g.chi_structure_sheaf()?;
    Ok(ratio(chi0, 1) + ratio(num / 2, 1))
}

/// Degree-2 polynomial in the twist multiplicity `n` with exact rational
/// coefficients `[n^0, n^1, n^2]`.
pub type NPoly = [BigRational; 3];

fn npoly_zero() -> NPoly {
    [
        BigRational::zero(),
        BigRational::zero(),
        BigRational::zero(),
    ]
}

fn npoly_add(a: &NPoly, b: &NPoly) -> NPoly {
    [&a[0] + &b[0], &a[1] + &b[1], &a[2] + &b[2]]
}

fn npoly_sub(a: &NPoly, b: &NPoly) -> NPoly {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

fn npoly_scale(a: &NPoly, k: i64) -> NPoly {
    let k = ratio(k, 1);
    [&a[0] * &k, &a[1] * &k, &a[2] * &k]
}

/// Riemann-Roch Euler characteristic of `O(a + nD)` as a polynomial in
/// `n`, with `chi(O)` kept as the exact rational `(K^2 + c2)/12` (it
/// cancels from every difference this feeds into, so Noether divisibility
/// is not required here).
fn chi_twisted_poly(a: &[i64], d: &[i64], g: &SurfaceGeometry) -> Result<NPoly, FamilyError> {
    let k = g.canonical().to_vec();
    let k2 = g.pair_vectors(&k, &k)?;
    let chi0 = BigRational::new((k2 + g.c2).into(), 12.into());
    let a2 = g.pair_vectors(a, a)?;
    let ka = g.pair_vectors(&k, a)?;
    let ad = g.pair_vectors(a, d)?;
    let kd = g.pair_vectors(&k, d)?;
    let d2 = g.pair_vectors(d, d)?;
    let half = ratio(1, 2);
    Ok([
        chi0 + ratio(a2 - ka, 1) * &half,
        ratio(2 * ad - kd, 1) * &half,
        ratio(d2, 1) * &half,
    ])
}

/// The rank of the comparison bundle `omega` as a symbolic polynomial in
/// the twist multiplicity `n`, computed from the Euler-characteristic
/// differences
/// `sum_i chi(O(e_i + nD)) - chi(O_{sum e_i}(C + nD)) - p (chi(O(nD)) + q)`
/// for the auxiliary divisor class `d`. The `n` coefficients must vanish.
pub fn rank_omega_symbolic(
    c: &LatticeClass,
    es: &[LatticeClass],
    d: &[i64],
    g: &SurfaceGeometry,
) -> Result<NPoly, FamilyError> {
    if es.is_empty() {
        return Err(FamilyError::EmptyCollection);
    }
    let p = es.len() as i64;
    let mut total = npoly_zero();
    for e in es {
        total = npoly_add(&total, &chi_twisted_poly(&e.coords, d, g)?);
    }
    // chi of the restriction to the divisor sum(e_i), via the twisting
    // short exact sequence: chi(O(C + nD)) - chi(O(C - sum e_i + nD)).
    let mut c_minus_s = c.coords.clone();
    for e in es {
        for (x, y) in c_minus_s.iter_mut().zip(&e.coords) {
            *x -= y;
        }
    }
    let restriction = npoly_sub(
        &chi_twisted_poly(&c.coords, d, g)?,
        &chi_twisted_poly(&c_minus_s, d, g)?,
    );
    total = npoly_sub(&total, &restriction);
    let zero = vec![0i64; g.rank()];
    let mut base = chi_twisted_poly(&zero, d, g)?;
    base[0] += ratio(g.q as i64, 1);
    total = npoly_sub(&total, &npoly_scale(&base, p));
    Ok(total)
}

/// Rank of the comparison bundle `omega` from the lattice formula
/// `-q p + sum e_i^2 - C.(sum e_i) + sum_{i<j} e_i.e_j`. The symbolic
/// `n`-polynomial route is evaluated against every standard basis divisor
/// and the all-ones divisor; any disagreement or surviving `n` coefficient
/// signals a transcription bug and is reported as an error.
pub fn rank_omega(
    c: &LatticeClass,
    es: &[LatticeClass],
    g: &SurfaceGeometry,
) -> Result<i64, FamilyError> {
    if es.is_empty() {
        return Err(FamilyError::EmptyCollection);
    }
    let p = es.len() as i64;
    let mut value = -(g.q as i64) * p;
    for e in es {
        value += pair(e, e, g)? - pair(c, e, g)?;
    }
    for i in 0..es.len() {
        for j in i + 1..es.len() {
            value += pair(&es[i], &es[j], g)?;
        }
    }
    let mut divisors: Vec<Vec<i64>> = (0..g.rank())
        .map(|i| {
            let mut v = vec![0i64; g.rank()];
            v[i] = 1;
            v
        })
        .collect();
    divisors.push(vec![1i64; g.rank()]);
    for d in &divisors {
        let sym = rank_omega_symbolic(c, es, d, g)?;
        if !sym[1].is_zero() || !sym[2].is_zero() {
            return Err(FamilyError::FormulaMismatch {
                what: "rank(omega) n-coefficients",
                lhs: format!("n: {}, n^2: {}", sym[1], sym[2]),
                rhs: "0".to_string(),
            });
        }
        if sym[0] != ratio(value, 1) {
            return Err(FamilyError::FormulaMismatch {
                what: "rank(omega) dual computation",
                lhs: sym[0].to_string(),
                rhs: value.to_string(),
            });
        }
    }
    Ok(value)
}

/// Rank of the sections of a line bundle on the intersection cycle of the
/// universal curve `e` with `n` copies of the auxiliary divisor `d`,
/// computed two ways: directly as the cycle length `n (e.d)`, and through
/// the Euler-characteristic differences of the twisting sequences for the
/// `twist` class. The two routes must agree for every twist, which is the
/// rank-equality shadow of switching the obstruction data between a curve
/// class and its exceptional residues.
pub fn intersection_sections_rank(
    twist: &LatticeClass,
    e: &LatticeClass,
    d: &[i64],
    n: i64,
    g: &SurfaceGeometry,
) -> Result<i64, FamilyError> {
    let direct = n * g.pair_vectors(&e.coords, d)?;
    // chi(O_{e n d}(twist + nD)) = [chi(O(twist+nD)) - chi(O(twist+nD-e))]
    //                            - [chi(O(twist)) - chi(O(twist-e))]
    let twist_minus_e: Vec<i64> = twist
        .coords
        .iter()
        .zip(&e.coords)
        .map(|(a, b)| a - b)
        .collect();
    let with_nd = npoly_sub(
        &chi_twisted_poly(&twist.coords, d, g)?,
        &chi_twisted_poly(&twist_minus_e, d, g)?,
    );
    let zero_d = vec![0i64; g.rank()];
    let without = npoly_sub(
        &chi_twisted_poly(&twist.coords, &zero_d, g)?,
        &chi_twisted_poly(&twist_minus_e, &zero_d, g)?,
    );
    let poly = npoly_sub(&with_nd, &without);
    let evaluated = &poly[0] + &poly[1] * ratio(n, 1) + &poly[2] * ratio(n * n, 1);
    if evaluated != ratio(direct, 1) {
        return Err(FamilyError::FormulaMismatch {
            what: "restriction bundle rank",
            lhs: evaluated.to_string(),
            rhs: direct.to_string(),
        });
    }
    Ok(direct)
}

/// The family-dimension triple: `a1` for the residual class, `a2` for the
/// coexistence moduli, `a3` for the rank gap, together with the identity
/// `a1 + a2 - a3 = 2 dim B - q + p_g + (C^2 - K.C)/2` checked exactly.
pub fn dimension_triple(
    c: &LatticeClass,
    es: &[LatticeClass],
    g: &SurfaceGeometry,
) -> Result<(i64, i64, i64), FamilyError> {
    let k = g.canonical().to_vec();
    let parity = |v: &[i64]| -> Result<i64, FamilyError> {
        let v2 = g.pair_vectors(v, v)?;
        let kv = g.pair_vectors(&k, v)?;
        let num = v2 - kv;
        if num.rem_euclid(2) != 0 {
            return Err(LatticeError::Parity {
                what: "v^2 - K.v",
                value: num,
            }
            .into());
        }
        Ok(num / 2)
    };
    let c_half = parity(&c.coords)?;
    let mut a2 = g.dim_base as i64;
    for e in es {
        a2 += parity(&e.coords)?;
    }
    let mut c_minus_s = c.coords.clone();
    for e in es {
        for (x, y) in c_minus_s.iter_mut().zip(&e.coords) {
            *x -= y;
        }
    }
    let a1 = g.dim_base as i64 - g.q as i64 + g.p_g as i64 + parity(&c_minus_s)?;
    let mut a3 = 0i64;
    for e in es {
        a3 += pair(e, e, g)? - pair(c, e, g)?;
    }
    for i in 0..es.len() {
        for j in i + 1..es.len() {
            a3 += pair(&es[i], &es[j], g)?;
        }
    }
    let rhs = 2 * g.dim_base as i64 - g.q as i64 + g.p_g as i64 + c_half;
    if a1 + a2 - a3 != rhs {
        return Err(FamilyError::FormulaMismatch {
            what: "a1 + a2 - a3 identity",
            lhs: (a1 + a2 - a3).to_string(),
            rhs: rhs.to_string(),
        });
    }
    Ok((a1, a2, a3))
}

/// The tau class of a comparison bundle: the `n`-independent term of its
/// top Chern class expanded as a polynomial in the hyperplane class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauClass {
    /// Sum of the coefficients, i.e. the top Chern class with the twist
    /// marker set to 0 and the hyperplane variable set to 1.
    pub tau: GradedClass,
    /// `r -> tau_r`, the hyperplane-free coefficient of `z^r`.
    pub by_power: BTreeMap<u32, GradedClass>,
}

/// Computes `c_rank(omega)`, removes every monomial containing the twist
/// marker `n` (the substitution `n -> 0`), and expands the result as a
/// polynomial in the hyperplane variable `z`.
pub fn tau_class(omega: &VirtualBundle, z: Variable, n: Variable) -> Result<TauClass, FamilyError> {
    let r = omega.vrank();
    if r < 0 {
        return Err(BundleError::NegativeRank(r).into());
    }
    let ctotal = omega.ctotal()?;
    let ctx = ctotal.ctx().clone();
    if r as u64 > ctx.truncation() as u64 {
        return Err(BundleError::RankAboveTruncation {
            rank: r,
            truncation: ctx.truncation(),
        }
        .into());
    }
    let top = ctotal.substitute_zero(n).degree_part(r as u32)?;
    let mut by_power = BTreeMap::new();
    for k in 0..=top.max_power(z) {
        let coeff = top.coefficient_of_power(z, k);
        if !coeff.is_zero() {
            by_power.insert(k, coeff);
        }
    }
    Ok(TauClass {
        tau: top.substitute_one(z),
        by_power,
    })
}

/// Class-level inputs for the dominating-term expansion: the bundle data
/// underlying the comparison bundle, the residual Kuranishi model, and the
/// opaque Segre/virtual-class stand-ins for the coexistence moduli.
#[derive(Debug, Clone)]
pub struct ExpansionInputs {
    /// Hyperplane variable `z` of the residual projectivization.
    pub hyperplane: Variable,
    /// Degree-1 marker carrying the `nD`-twist dependence of the data.
    pub nd_marker: Variable,
    /// One hyperplane variable per exceptional class.
    pub twist_vars: Vec<Variable>,
    /// Deformation bundles of the exceptional classes (pre-twist).
    pub deformation: Vec<Bundle>,
    /// The quotient `V'` of the two deformation bundles of the curve class.
    pub v_prime: Bundle,
    /// The quotient `W'` of the two obstruction bundles.
    pub w_prime: Bundle,
    /// Sections of `O_{nD}(nD)`; its Chern data may carry the `nd` marker.
    pub nd_sections: Bundle,
    /// Kuranishi model of the residual class `C - sum e_i`.
    pub residual: KuranishiModel,
    /// `s_total` of the coexistence moduli inside the ambient product.
    pub coexist_segre: GradedClass,
    /// Stand-in class for the coexistence virtual fundamental class.
    pub coexist_vclass: GradedClass,
    /// Named class standing for `c_{p_g}` of the second derived image of
    /// the structure sheaf. Ignored when `p_g = 0` or no class carries the
    /// genus shift.
    pub pg_insertion: GradedClass,
    /// Caller-declared triviality of that derived image (forces the
    /// insertion, and hence the dominating term, to vanish).
    pub r2_trivial: bool,
    /// Named class standing for `c_q` of the first derived image; enters
    /// the zero-section cap once per exceptional class. Ignored when q = 0.
    pub r1_top: GradedClass,
    /// Whether the splitting of curves over the co-existence locus is
    /// declared an isomorphism. When false the expansion still runs but
    /// the report is marked conditional.
    pub special_assumption: bool,
}

/// Result of the dominating-term expansion. The two virtual fundamental
/// classes are opaque symbols: `dominating` is the coefficient multiplying
/// their product, and the corrections are the remaining symbol-free terms
/// of the realized product; together with `dominating_piece` they
/// reassemble `full` exactly.
#[derive(Debug, Clone)]
pub struct ExpansionReport {
    /// Coefficient of the product of the two virtual-class symbols:
    /// insertion x zero-section cap x tau (hyperplane summed to 1).
    pub dominating: GradedClass,
    /// Labelled remainder terms of the realized product.
    pub corrections: Vec<(String, GradedClass)>,
    /// `r -> tau_r` from the tau-class expansion.
    pub tau_by_power: BTreeMap<u32, GradedClass>,
    /// The summed tau class.
    pub tau: GradedClass,
    /// Dimension bookkeeping for the three factors.
    pub a1: i64,
    pub a2: i64,
    pub a3: i64,
    pub rank_omega: i64,
    /// True when the special assumption was not declared; the expansion is
    /// then a formal bookkeeping identity without the splitting guarantee.
    pub conditional: bool,
    /// The graded dominating term inside `full` (hyperplane powers kept,
    /// stand-ins multiplied in).
    pub dominating_piece: GradedClass,
    /// The realized product of the three factors.
    pub full: GradedClass,
}

impl ExpansionReport {
    /// The defining decomposition: dominating piece plus corrections
    /// equals the realized product.
    pub fn reassembles(&self) -> bool {
        let mut sum = self.dominating_piece.clone();
        for (_, c) in &self.corrections {
            sum = match sum.add(c) {
                Ok(s) => s,
                Err(_) => return false,
            };
        }
        sum == self.full
    }
}

/// Expands the localized contribution along the co-existence locus into
/// the term proportional to both virtual fundamental classes and the
/// symbol-free corrections.
///
/// Hypotheses: `C.e_i < 0` for every member, `e_i.e_j >= 0` for distinct
/// members, and `a3 - p q >= 0`; violations are reported by name. The
/// assembled comparison bundle must reproduce the lattice rank formula.
pub fn main_theorem_expansion(
    c: &LatticeClass,
    es: &[LatticeClass],
    g: &SurfaceGeometry,
    inputs: &ExpansionInputs,
) -> Result<ExpansionReport, FamilyError> {
    if es.is_empty() {
        return Err(FamilyError::EmptyCollection);
    }
    let p = es.len();
    for (i, e) in es.iter().enumerate() {
        let ce = pair(c, e, g)?;
        if ce >= 0 {
            return Err(FamilyError::HypothesisViolated(format!(
                "C.e_{} = {} is not negative",
                i + 1,
                ce
            )));
        }
    }
    for i in 0..p {
        for j in i + 1..p {
            let eij = pair(&es[i], &es[j], g)?;
            if eij < 0 {
                return Err(FamilyError::HypothesisViolated(format!(
                    "e_{}.e_{} = {} is negative",
                    i + 1,
                    j + 1,
                    eij
                )));
            }
        }
    }
    let (a1, a2, a3) = dimension_triple(c, es, g)?;
    let rank = rank_omega(c, es, g)?;
    if rank < 0 {
        return Err(FamilyError::HypothesisViolated(format!(
            "a3 - p q = {rank} is negative"
        )));
    }
    if inputs.twist_vars.len() != p || inputs.deformation.len() != p {
        return Err(FamilyError::TwistVariableCount {
            classes: p,
            vars: inputs.twist_vars.len().min(inputs.deformation.len()),
        });
    }

    let ctx = inputs.residual.ctx().clone();
    let z = inputs.hyperplane;

    // Comparison bundle: the stabilized obstruction directions minus the
    // twisted quotients, one twist variable per exceptional class.
    let mut omega = VirtualBundle::zero();
    for (b, &h) in inputs.deformation.iter().zip(&inputs.twist_vars) {
        omega = omega.whitney_sum(&VirtualBundle::from_bundle(b.twist(h)?));
    }
    let mut negative = VirtualBundle::from_bundle(inputs.v_prime.twist(z)?);
    for &h in &inputs.twist_vars {
        let line = Bundle::line(&GradedClass::variable(&ctx, h))?;
        negative = negative.whitney_sum(&VirtualBundle::from_bundle(line));
        negative = negative.whitney_sum(&VirtualBundle::from_bundle(inputs.nd_sections.twist(h)?));
    }
    omega = omega.whitney_sum(&negative.negate());
    if omega.vrank() != rank {
        return Err(FamilyError::OmegaRankMismatch {
            lattice: rank,
            bundles: omega.vrank(),
        });
    }

    let tau = tau_class(&omega, z, inputs.nd_marker)?;
    let top_full = omega.top_chern()?;
    let top_nd_free = top_full.substitute_zero(inputs.nd_marker);
    let top_nd_part = top_full.sub(&top_nd_free)?;

    // Insertion: one c_{p_g} factor per class carrying the genus shift.
    let shifted = es.iter().filter(|e| e.febd == Febd::Pg).count() as u32;
    let insertion = if g.p_g == 0 || shifted == 0 {
        GradedClass::one(&ctx)
    } else if inputs.r2_trivial {
        GradedClass::zero(&ctx)
    } else {
        if inputs.pg_insertion.degree_part(g.p_g)? != inputs.pg_insertion {
            return Err(FamilyError::BadInsertionDegree {
                what: "pg_insertion",
                expected: g.p_g,
            });
        }
        inputs.pg_insertion.pow(shifted)?
    };

    // Zero-section cap: top Chern class of p copies of the rank-q normal
    // bundle, with every auxiliary twist variable trivialized.
    let cap = |x: &GradedClass| -> Result<GradedClass, FamilyError> {
        let mut out = x.clone();
        if g.q > 0 {
            if inputs.r1_top.degree_part(g.q)? != inputs.r1_top {
                return Err(FamilyError::BadInsertionDegree {
                    what: "r1_top",
                    expected: g.q,
                });
            }
            out = out.mul(&inputs.r1_top.pow(p as u32)?)?;
        }
        for &h in &inputs.twist_vars {
            out = out.substitute_zero(h);
        }
        Ok(out)
    };

    let tau_capped = cap(&top_nd_free)?;
    let nd_capped = cap(&top_nd_part)?;
    let dominating = insertion.mul(&tau_capped)?.substitute_one(z);

    // Residual factor: the localized class of the residual model is its
    // virtual-class stand-in.
    let residual_class = localized_class(&inputs.residual, z)?;

    // Coexistence factor at degree a2, expanded against the supplied
    // virtual-class stand-in; the difference is the eta-style remainder.
    if a2 < 0 || a2 as u64 > ctx.truncation() as u64 {
        return Err(FamilyError::EdOutOfRange {
            ed: a2,
            truncation: ctx.truncation(),
        });
    }
    let mut coexist_bundle = VirtualBundle::from_bundle(inputs.w_prime.twist(z)?);
    for &h in &inputs.twist_vars {
        let line = Bundle::line(&GradedClass::variable(&ctx, h))?;
        coexist_bundle = coexist_bundle.whitney_sum(&VirtualBundle::from_bundle(line));
        coexist_bundle =
            coexist_bundle.whitney_sum(&VirtualBundle::from_bundle(inputs.nd_sections.twist(h)?));
    }
    let coexist_full = coexist_bundle
        .ctotal_in(&ctx)?
        .mul(&inputs.coexist_segre)?
        .degree_part(a2 as u32)?;
    let eta = coexist_full.sub(&inputs.coexist_vclass.mul(&insertion)?)?;

    let dominating_factor = inputs.coexist_vclass.mul(&insertion)?;
    let dominating_piece = residual_class.mul(&dominating_factor)?.mul(&tau_capped)?;
    let corrections = vec![
        (
            "nd-dependent".to_string(),
            residual_class.mul(&dominating_factor)?.mul(&nd_capped)?,
        ),
        (
            "coexistence-remainder".to_string(),
            residual_class.mul(&eta)?.mul(&tau_capped)?,
        ),
        (
            "coexistence-remainder-nd".to_string(),
            residual_class.mul(&eta)?.mul(&nd_capped)?,
        ),
    ];
    let full = residual_class
        .mul(&coexist_full)?
        .mul(&tau_capped.add(&nd_capped)?)?;

    let report = ExpansionReport {
        dominating,
        corrections,
        tau_by_power: tau.by_power,
        tau: tau.tau,
        a1,
        a2,
        a3,
        rank_omega: rank,
        conditional: !inputs.special_assumption,
        dominating_piece,
        full,
    };
    if !report.reassembles() {
        return Err(FamilyError::FormulaMismatch {
            what: "expansion reassembly",
            lhs: "dominating + corrections".to_string(),
            rhs: "full".to_string(),
        });
    }
    Ok(report)
}

//! Exact integer lattice arithmetic for curve classes on a surface
//! fibration: the intersection pairing, exceptionality tests, and the
//! dimension-formula bookkeeping.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("vector length {got} does not match lattice rank {rank}")]
    DimensionMismatch { rank: usize, got: usize },
    #[error("gram matrix is not symmetric at ({0},{1})")]
    NotSymmetric(usize, usize),
    #[error("gram matrix row {0} has wrong length")]
    BadGramRow(usize),
    #[error("lattice rank must be positive")]
    ZeroRank,
    #[error("parity violation: {what} = {value} is odd")]
    Parity { what: &'static str, value: i64 },
    #[error("not a fan-like type I class: -(e^2 - K.e)/2 = {lhs} but -e^2 - 1 = {rhs}")]
    NotFanLikeTypeI { lhs: i64, rhs: i64 },
    #[error("adjunction requires an even self-intersection >= -2, got {0}")]
    BadAdjunctionInput(i64),
    #[error("Noether numerator K^2 + c2 = {0} is not divisible by 12")]
    NoetherIndivisible(i64),
    #[error("intersection pairing overflows 64 bits")]
    Overflow,
}

/// Mode of the formal excess base dimension entering the expected
/// dimension formula: either the full geometric-genus shift or none.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Febd {
    Zero,
    Pg,
}

/// User-declared kind of an exceptional class. Type II membership is not
/// decidable from lattice data, so it is carried as a tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeTag {
    TypeI,
    TypeII,
    Ordinary,
}

/// Numerical invariants and intersection form of the fiber surface and
/// base: the divisor lattice with its Gram matrix, the relative canonical
/// class, and the constants entering the dimension formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceGeometry {
    rank: usize,
    gram: Vec<Vec<i64>>,
    canonical: Vec<i64>,
    pub p_g: u32,
    pub q: u32,
    pub c2: i64,
    pub dim_base: u32,
}

impl SurfaceGeometry {
    pub fn new(
        gram: Vec<Vec<i64>>,
        canonical: Vec<i64>,
        p_g: u32,
        q: u32,
        c2: i64,
        dim_base: u32,
    ) -> Result<Self, LatticeError> {
        let rank = gram.len();
        if rank == 0 {
            return Err(LatticeError::ZeroRank);
        }
        for (i, row) in gram.iter().enumerate() {
            if row.len() != rank {
                return Err(LatticeError::BadGramRow(i));
            }
        }
        for (i, row) in gram.iter().enumerate() {
            for (j, &v) in row.iter().enumerate().skip(i + 1) {
                if v != gram[j][i] {
                    return Err(LatticeError::NotSymmetric(i, j));
                }
            }
        }
        if canonical.len() != rank {
            return Err(LatticeError::DimensionMismatch {
                rank,
                got: canonical.len(),
            });
        }
        Ok(SurfaceGeometry {
            rank,
            gram,
            canonical,
            p_g,
            q,
            c2,
            dim_base,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn canonical(&self) -> &[i64] {
        &self.canonical
    }

    pub fn pair_vectors(&self, a: &[i64], b: &[i64]) -> Result<i64, LatticeError> {
        if a.len() != self.rank {
            return Err(LatticeError::DimensionMismatch {
                rank: self.rank,
                got: a.len(),
            });
        }
        if b.len() != self.rank {
            return Err(LatticeError::DimensionMismatch {
                rank: self.rank,
                got: b.len(),
            });
        }
        let mut acc = 0i128;
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                let term = (ai as i128)
                    .checked_mul(self.gram[i][j] as i128)
                    .and_then(|x| x.checked_mul(bj as i128))
                    .ok_or(LatticeError::Overflow)?;
                acc = acc.checked_add(term).ok_or(LatticeError::Overflow)?;
            }
        }
        acc.try_into().map_err(|_| LatticeError::Overflow)
    }

    pub fn canonical_pair(&self, a: &[i64]) -> Result<i64, LatticeError> {
        self.pair_vectors(&self.canonical, a)
    }

    /// Holomorphic Euler characteristic of the structure sheaf by Noether:
    /// (K^2 + c2) / 12, as an error if the numerator is not divisible.
    pub fn chi_structure_sheaf(&self) -> Result<i64, LatticeError> {
        let k2 = self.pair_vectors(&self.canonical, &self.canonical)?;
        let numerator = k2 + self.c2;
        if numerator.rem_euclid(12) != 0 {
            return Err(LatticeError::NoetherIndivisible(numerator));
        }
        Ok(numerator / 12)
    }
}

/// An integer vector in the intersection lattice together with its
/// relative degree over the base (user-supplied; the polarization defining
/// it is not part of the lattice), the formal-excess-base-dimension mode,
/// and the declared class kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeClass {
    pub coords: Vec<i64>,
    pub degree_rel: i64,
    pub febd: Febd,
    pub type_tag: TypeTag,
}

impl LatticeClass {
    pub fn new(coords: Vec<i64>, degree_rel: i64, febd: Febd, type_tag: TypeTag) -> Self {
        LatticeClass {
            coords,
            degree_rel,
            febd,
            type_tag,
        }
    }

    /// Plain class with the geometric-genus shift and no special tag.
    pub fn ordinary(coords: Vec<i64>, degree_rel: i64) -> Self {
        Self::new(coords, degree_rel, Febd::Pg, TypeTag::Ordinary)
    }

    pub fn sub(&self, other: &LatticeClass) -> LatticeClass {
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a - b)
            .collect();
        LatticeClass {
            coords,
            degree_rel: self.degree_rel - other.degree_rel,
            febd: self.febd,
            type_tag: self.type_tag,
        }
    }
}

/// The intersection pairing `a . b` with respect to the geometry's Gram
/// matrix. Symmetric and bilinear.
pub fn pair(a: &LatticeClass, b: &LatticeClass, g: &SurfaceGeometry) -> Result<i64, LatticeError> {
    g.pair_vectors(&a.coords, &b.coords)
}

/// A class is exceptional when its fiberwise self-intersection is negative
/// and its relative degree is positive.
pub fn is_exceptional(e: &LatticeClass, g: &SurfaceGeometry) -> Result<bool, LatticeError> {
    Ok(pair(e, e, g)? < 0 && e.degree_rel > 0)
}

/// Checkable form of the degree assumption on an exceptional class: the
/// relative degree of `K - e` is negative. Callers opt in; it is not
/// enforced anywhere else.
pub fn degree_assumption_holds(canonical_degree_rel: i64, e: &LatticeClass) -> bool {
    canonical_degree_rel - e.degree_rel < 0
}

/// Expected algebraic family dimension
/// `dim B + [p_g if febd = pg] + (e^2 - e.K)/2`; the parity of
/// `e^2 - e.K` is a hard precondition.
pub fn expected_dimension(e: &LatticeClass, g: &SurfaceGeometry) -> Result<i64, LatticeError> {
    let e2 = pair(e, e, g)?;
    let ke = g.canonical_pair(&e.coords)?;
    let num = e2 - ke;
    if num.rem_euclid(2) != 0 {
        return Err(LatticeError::Parity {
            what: "e^2 - K.e",
            value: num,
        });
    }
    let pg_term = match e.febd {
        Febd::Pg => g.p_g as i64,
        Febd::Zero => 0,
    };
    Ok(g.dim_base as i64 + pg_term + num / 2)
}

/// Codimension of the family moduli space of a fan-like type I class:
/// `-(e^2 - K.e)/2`, which must agree with `-e^2 - 1`. Disagreement means
/// the class is not fan-like type I and is rejected.
pub fn type1_codimension(e: &LatticeClass, g: &SurfaceGeometry) -> Result<i64, LatticeError> {
    let e2 = pair(e, e, g)?;
    let ke = g.canonical_pair(&e.coords)?;
    let num = e2 - ke;
    if num.rem_euclid(2) != 0 {
        return Err(LatticeError::Parity {
            what: "e^2 - K.e",
            value: num,
        });
    }
    let lhs = -num / 2;
    let rhs = -e2 - 1;
    if lhs != rhs {
        return Err(LatticeError::NotFanLikeTypeI { lhs, rhs });
    }
    Ok(lhs)
}

/// Node count from the adjunction constraint `L^2 = 2 delta - 2`:
/// `delta = L^2/2 + 1` for even `L^2 >= -2`.
pub fn adjunction_delta(l_sq: i64) -> Result<u64, LatticeError> {
    if l_sq < -2 || l_sq.rem_euclid(2) != 0 {
        return Err(LatticeError::BadAdjunctionInput(l_sq));
    }
    Ok((l_sq / 2 + 1) as u64)
}

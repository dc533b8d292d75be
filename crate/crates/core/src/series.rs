//! The nodal-curve generating series, adjunction bookkeeping, and the
//! vanishing test for type II contributions on universal families with
//! trivialized second derived image.

use num::{BigInt, One, Zero};
use thiserror::Error;

use crate::lattice::{adjunction_delta, LatticeError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Integer-coefficient power series truncated at a fixed node count, with
/// constant term 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffSeries {
    coeffs: Vec<BigInt>,
}

impl CoeffSeries {
    pub fn delta_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, delta: usize) -> &BigInt {
        &self.coeffs[delta]
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Truncated product of two series, to the shorter truncation.
    pub fn mul(&self, other: &CoeffSeries) -> CoeffSeries {
        let len = self.coeffs.len().min(other.coeffs.len());
        let mut coeffs = vec![BigInt::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                coeffs[i + j] += a * b;
            }
        }
        CoeffSeries { coeffs }
    }

    /// Newline-delimited "delta n_delta" table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for (delta, n) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{delta} {n}\n"));
        }
        out
    }
}

/// Coefficients of `prod_{i>=1} (1 - q^i)^(-c2)` through `q^delta_max`:
/// the generating series for counts of nodal rational curves, with the
/// product taken over positive exponents.
pub fn yau_zaslow_series(c2: u32, delta_max: usize) -> CoeffSeries {
    let mut coeffs = vec![BigInt::zero(); delta_max + 1];
    coeffs[0] = BigInt::one();
    for i in 1..=delta_max {
        // (1 - q^i)^(-c2) = sum_k binom(c2 - 1 + k, k) q^(i k)
        let mut factor = Vec::new();
        let mut binom = BigInt::one();
        let mut k = 0usize;
        while i * k <= delta_max {
            factor.push((i * k, binom.clone()));
            binom = binom * BigInt::from(c2 as u64 + k as u64) / BigInt::from(k as u64 + 1);
            k += 1;
        }
        let mut next = vec![BigInt::zero(); delta_max + 1];
        for (shift, b) in &factor {
            if b.is_zero() {
                continue;
            }
            for m in *shift..=delta_max {
                let add = &coeffs[m - shift] * b;
                next[m] += add;
            }
        }
        coeffs = next;
    }
    CoeffSeries { coeffs }
}

/// Whether every mixed family invariant involving `p >= 1` type II classes
/// vanishes: true exactly when the geometric genus is positive and the
/// second derived image of the structure sheaf is declared to have trivial
/// first Chern class, so the genus insertion carries a vanishing factor.
/// Monotone in `p`: the insertion only accumulates.
pub fn k3_type2_vanishing(p_g: u32, r2_c1_is_zero: bool, _p_type2: u32) -> bool {
    p_g >= 1 && r2_c1_is_zero
}

/// Node count from the adjunction constraint together with the matching
/// generating-series coefficient.
pub fn virtual_count_report(l_sq: i64, c2: u32) -> Result<(u64, BigInt), SeriesError> {
    let delta = adjunction_delta(l_sq)?;
    let series = yau_zaslow_series(c2, delta as usize);
    Ok((delta, series.coeff(delta as usize).clone()))
}

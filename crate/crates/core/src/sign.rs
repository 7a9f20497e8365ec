//! The three sign operators: deterministic sign, stochastic sign, and
//! majority vote.
//!
//! Exact-zero semantics: sign(0) = 0, no epsilon-snapping. The stochastic
//! sign of the zero vector is the zero sign vector with probability 1; for
//! a nonzero vector every coordinate is +1 with probability
//! 1/2 + v_i / (2 ||v||) and -1 otherwise, so it never returns 0. A
//! coordinate with v_i = 0 inside a nonzero vector comes out +/-1 with
//! probability 1/2 each.

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::vector::{DenseVector, SignVector};

/// Element-wise signum; zero maps to zero.
pub fn sign(v: &DenseVector) -> SignVector {
    SignVector::new(
        v.iter()
            .map(|&x| {
                if x > 0.0 {
                    1
                } else if x < 0.0 {
                    -1
                } else {
                    0
                }
            })
            .collect(),
    )
    .expect("signum entries are in {-1, 0, 1}")
}

/// Randomized sign operator: +1 with probability 1/2 + v_i / (2 ||v||),
/// else -1; the zero vector maps to the zero sign vector.
pub fn stochastic_sign(v: &DenseVector, rng: &mut RandomSource) -> SignVector {
    if v.is_zero() {
        return SignVector::zeros(v.dim());
    }
    let norm = v.norm_l2();
    SignVector::new(
        v.iter()
            .map(|&x| {
                let p = 0.5 + x / (2.0 * norm);
                if rng.uniform() < p {
                    1
                } else {
                    -1
                }
            })
            .collect(),
    )
    .expect("stochastic sign entries are +/-1")
}

/// Success probability of `stochastic_sign` matching `sign(v_i)` for a
/// nonzero coordinate: 1/2 + |v_i| / (2 ||v||).
pub fn stochastic_sign_probabilities(v: &DenseVector) -> Vec<f64> {
    if v.is_zero() {
        return vec![1.0; v.dim()];
    }
    let norm = v.norm_l2();
    v.iter().map(|&x| 0.5 + x / (2.0 * norm)).collect()
}

/// Coordinate-wise sign of the integer sum of votes. A tied vote (possible
/// only for an even number of voters) yields 0 in that coordinate.
pub fn majority_vote(signs: &[SignVector]) -> Result<SignVector> {
    let first = signs
        .first()
        .ok_or_else(|| Error::domain("majority vote over empty list"))?;
    let dim = first.dim();
    let mut sums = vec![0i64; dim];
    for s in signs {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.dim(),
            });
        }
        for (acc, &e) in sums.iter_mut().zip(s.as_slice()) {
            *acc += e as i64;
        }
    }
    SignVector::new(sums.iter().map(|&s| s.signum() as i8).collect())
}

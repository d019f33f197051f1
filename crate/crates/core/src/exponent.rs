//! The integrability exponent and the constants derived from it.

use crate::error::{Error, Result};

/// An exponent `1 < p < ∞` together with its Hölder conjugate `p' = p/(p-1)`
/// and the Hardy constant `C(p) = (p')^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PExponent {
    p: f64,
    p_conj: f64,
    c_p: f64,
}

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidExponent(p));
        }
        let p_conj = p / (p - 1.0);
        Ok(Self {
            p,
            p_conj,
            c_p: p_conj.powf(p),
        })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Hölder conjugate `p'`.
    #[inline]
    pub fn p_conj(&self) -> f64 {
        self.p_conj
    }

    /// `C(p) = (p/(p-1))^p`.
    #[inline]
    pub fn c_p(&self) -> f64 {
        self.c_p
    }

    /// `x^p`, with the common case `p = 2` kept exact and cheap.
    #[inline]
    pub fn pow_p(&self, x: f64) -> f64 {
        if self.p == 2.0 {
            x * x
        } else {
            x.powf(self.p)
        }
    }

    /// `x^(p-1)`.
    #[inline]
    pub fn pow_p_minus_1(&self, x: f64) -> f64 {
        if self.p == 2.0 {
            x
        } else {
            x.powf(self.p - 1.0)
        }
    }
}

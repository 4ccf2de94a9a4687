//! Arithmetic in `Z_d` for odd prime `d` and the discrete symplectic group `SL(2, Z_d)`.
//!
//! Residues are always kept in canonical form `[0, d - 1]`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// A validated odd prime Hilbert-space dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PrimeDim {
    d: usize,
    inv2: usize,
}

impl PrimeDim {
    /// Validates `d` as an odd prime and precomputes the inverse of 2.
    pub fn new(d: i64) -> Result<Self> {
        if d < 2 {
            return Err(Error::OutOfRange(d));
        }
        if d == 2 {
            return Err(Error::EvenDim(d));
        }
        if !is_prime(d as u64) {
            return Err(if d % 2 == 0 { Error::EvenDim(d) } else { Error::NonPrime(d) });
        }
        let d = d as usize;
        Ok(PrimeDim { d, inv2: d.div_ceil(2) })
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    /// The unique integer in `[0, d - 1]` with `2 * inv2 = 1 mod d`.
    #[inline]
    pub fn inv2(&self) -> usize {
        self.inv2
    }

    /// Dimension of Bloch space, `d^2 - 1`.
    #[inline]
    pub fn bloch_dim(&self) -> usize {
        self.d * self.d - 1
    }

    /// Canonical residue of an arbitrary integer.
    #[inline]
    pub fn reduce(&self, x: i64) -> usize {
        x.rem_euclid(self.d as i64) as usize
    }

    #[inline]
    pub fn add(&self, x: usize, y: usize) -> usize {
        (x + y) % self.d
    }

    #[inline]
    pub fn sub(&self, x: usize, y: usize) -> usize {
        (x + self.d - y % self.d) % self.d
    }

    #[inline]
    pub fn neg(&self, x: usize) -> usize {
        (self.d - x % self.d) % self.d
    }

    #[inline]
    pub fn mul(&self, x: usize, y: usize) -> usize {
        (x % self.d) * (y % self.d) % self.d
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(&self, x: i64) -> Result<usize> {
        let x = self.reduce(x) as i64;
        if x == 0 {
            return Err(Error::ZeroInverse(x, self.d));
        }
        let (g, s, _) = extended_gcd(x, self.d as i64);
        debug_assert_eq!(g, 1);
        Ok(self.reduce(s))
    }
}

impl fmt::Display for PrimeDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.d)
    }
}

/// Returns `(g, s, t)` with `s * a + t * b = g = gcd(a, b)`.
pub fn extended_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    (old_r, old_s, old_t)
}

/// Deterministic trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut k = 3;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 2;
    }
    true
}

/// A point of the discrete phase space `Z_d x Z_d`, used both as a displacement
/// label and as the vector acted on by [`SympMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DisplacementIndex {
    pub q1: usize,
    pub q2: usize,
}

impl DisplacementIndex {
    pub fn new(q1: i64, q2: i64, dim: PrimeDim) -> Self {
        DisplacementIndex { q1: dim.reduce(q1), q2: dim.reduce(q2) }
    }

    pub const ZERO: DisplacementIndex = DisplacementIndex { q1: 0, q2: 0 };

    pub fn is_zero(&self) -> bool {
        self.q1 == 0 && self.q2 == 0
    }

    pub fn neg(&self, dim: PrimeDim) -> Self {
        DisplacementIndex { q1: dim.neg(self.q1), q2: dim.neg(self.q2) }
    }

    pub fn add(&self, other: &Self, dim: PrimeDim) -> Self {
        DisplacementIndex { q1: dim.add(self.q1, other.q1), q2: dim.add(self.q2, other.q2) }
    }

    /// Flat index `q1 * d + q2`, the ordering used for SIC vectors.
    pub fn flat(&self, dim: PrimeDim) -> usize {
        self.q1 * dim.d() + self.q2
    }

    pub fn from_flat(i: usize, dim: PrimeDim) -> Self {
        DisplacementIndex { q1: i / dim.d(), q2: i % dim.d() }
    }

    /// All `d^2` indices in flat order.
    pub fn all(dim: PrimeDim) -> impl Iterator<Item = DisplacementIndex> {
        let d = dim.d();
        (0..d * d).map(move |i| DisplacementIndex { q1: i / d, q2: i % d })
    }
}

/// An element of `SL(2, Z_d)`:
///
/// ```text
/// [ alpha  beta  ]
/// [ gamma  delta ]
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SympMatrix {
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
    pub delta: usize,
}

impl SympMatrix {
    pub fn new(alpha: i64, beta: i64, gamma: i64, delta: i64, dim: PrimeDim) -> Result<Self> {
        let m = SympMatrix {
            alpha: dim.reduce(alpha),
            beta: dim.reduce(beta),
            gamma: dim.reduce(gamma),
            delta: dim.reduce(delta),
        };
        if m.det(dim) != 1 {
            return Err(Error::NotSymplectic(m.alpha, m.beta, m.gamma, m.delta, dim.d()));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        SympMatrix { alpha: 1, beta: 0, gamma: 0, delta: 1 }
    }

    /// `[[1, 1], [0, 1]]`
    pub fn g() -> Self {
        SympMatrix { alpha: 1, beta: 1, gamma: 0, delta: 1 }
    }

    /// `[[0, 1], [-1, 0]]`
    pub fn h(dim: PrimeDim) -> Self {
        SympMatrix { alpha: 0, beta: 1, gamma: dim.d() - 1, delta: 0 }
    }

    pub fn det(&self, dim: PrimeDim) -> usize {
        dim.sub(dim.mul(self.alpha, self.delta), dim.mul(self.beta, self.gamma))
    }

    /// Matrix product `self * other` mod d.
    pub fn mul(&self, other: &SympMatrix, dim: PrimeDim) -> SympMatrix {
        let (a, b, c, e) = (self.alpha, self.beta, self.gamma, self.delta);
        SympMatrix {
            alpha: dim.add(dim.mul(a, other.alpha), dim.mul(b, other.gamma)),
            beta: dim.add(dim.mul(a, other.beta), dim.mul(b, other.delta)),
            gamma: dim.add(dim.mul(c, other.alpha), dim.mul(e, other.gamma)),
            delta: dim.add(dim.mul(c, other.beta), dim.mul(e, other.delta)),
        }
    }

    /// Inverse, `[[delta, -beta], [-gamma, alpha]]` since the determinant is 1.
    pub fn inverse(&self, dim: PrimeDim) -> SympMatrix {
        SympMatrix { alpha: self.delta, beta: dim.neg(self.beta), gamma: dim.neg(self.gamma), delta: self.alpha }
    }

    pub fn pow(&self, n: usize, dim: PrimeDim) -> SympMatrix {
        (0..n).fold(SympMatrix::identity(), |acc, _| acc.mul(self, dim))
    }

    /// `F q` mod d.
    pub fn apply(&self, q: DisplacementIndex, dim: PrimeDim) -> DisplacementIndex {
        DisplacementIndex {
            q1: dim.add(dim.mul(self.alpha, q.q1), dim.mul(self.beta, q.q2)),
            q2: dim.add(dim.mul(self.gamma, q.q1), dim.mul(self.delta, q.q2)),
        }
    }
}

//! Dense operators on `C^d`: shift `X`, clock `Z`, Weyl-Heisenberg displacements
//! `D_q = w^(2^-1 q1 q2) X^q1 Z^q2` and the symplectic unitaries `U_F`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tol::TOL_COV;
use crate::zmod::{DisplacementIndex, PrimeDim, SympMatrix};

pub type Ket = DVector<Complex64>;
pub type Operator = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `w^k` with `w = exp(2 pi i / d)`. The exponent is reduced mod d first so that
/// every power is evaluated directly from its residue.
#[inline]
pub fn omega_pow(k: i64, dim: PrimeDim) -> Complex64 {
    let r = dim.reduce(k);
    Complex64::from_polar(1.0, 2.0 * PI * r as f64 / dim.d() as f64)
}

#[inline]
fn omega_res(r: usize, dim: PrimeDim) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (r % dim.d()) as f64 / dim.d() as f64)
}

/// Standard basis vector `|a>`.
pub fn basis_ket(a: usize, dim: PrimeDim) -> Ket {
    let mut v = Ket::zeros(dim.d());
    v[a % dim.d()] = ONE;
    v
}

pub fn identity(dim: PrimeDim) -> Operator {
    Operator::identity(dim.d(), dim.d())
}

pub fn is_unitary(u: &Operator, tol: f64) -> bool {
    if !u.is_square() {
        return false;
    }
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - Operator::identity(n, n))) <= tol
}

pub fn is_hermitian(a: &Operator, tol: f64) -> bool {
    a.is_square() && max_abs(&(a - a.adjoint())) <= tol
}

pub fn is_traceless(a: &Operator, tol: f64) -> bool {
    a.trace().norm() <= tol
}

/// Largest entry modulus.
pub fn max_abs(a: &Operator) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `X|a> = |a + 1>`.
pub fn build_x(dim: PrimeDim) -> Operator {
    let d = dim.d();
    let mut x = Operator::zeros(d, d);
    for a in 0..d {
        x[(dim.add(a, 1), a)] = ONE;
    }
    x
}

/// `Z|a> = w^a |a>`.
pub fn build_z(dim: PrimeDim) -> Operator {
    let d = dim.d();
    Operator::from_diagonal(&Ket::from_iterator(d, (0..d).map(|a| omega_res(a, dim))))
}

/// `D_q = w^(2^-1 q1 q2) X^q1 Z^q2`, built entrywise:
/// `D_q |a> = w^(2^-1 q1 q2 + q2 a) |a + q1>`.
pub fn build_d(q: DisplacementIndex, dim: PrimeDim) -> Operator {
    let d = dim.d();
    let base = dim.mul(dim.inv2(), dim.mul(q.q1, q.q2));
    let mut op = Operator::zeros(d, d);
    for a in 0..d {
        op[(dim.add(a, q.q1), a)] = omega_res(base + dim.mul(q.q2, a), dim);
    }
    op
}

/// `D_q psi` without materialising the matrix.
pub fn displace(q: DisplacementIndex, psi: &Ket, dim: PrimeDim) -> Ket {
    let d = dim.d();
    let base = dim.mul(dim.inv2(), dim.mul(q.q1, q.q2));
    let mut out = Ket::zeros(d);
    for a in 0..d {
        out[dim.add(a, q.q1)] = omega_res(base + dim.mul(q.q2, a), dim) * psi[a];
    }
    out
}

/// Which exponent is used in the `beta != 0` branch of `U_F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UfVariant {
    /// `(2 beta)^-1 (alpha b^2 - 2 a b + beta b^2)` over `|a><b|`, as transcribed.
    Transcribed,
    /// `(2 beta)^-1 (alpha b^2 - 2 a b + delta a^2)` over `|a><b|`.
    Standard,
}

impl UfVariant {
    pub const ALL: [UfVariant; 2] = [UfVariant::Transcribed, UfVariant::Standard];

    pub fn name(&self) -> &'static str {
        match self {
            UfVariant::Transcribed => "transcribed",
            UfVariant::Standard => "standard",
        }
    }
}

/// `U_F` for a given exponent variant, without checking covariance.
/// The global phase is fixed so that the first nonzero entry (row-major) is real positive.
pub fn build_uf_variant(f: &SympMatrix, variant: UfVariant, dim: PrimeDim) -> Operator {
    let d = dim.d();
    let mut u = Operator::zeros(d, d);
    if f.beta != 0 {
        let inv_2beta = dim.inv(2 * f.beta as i64).expect("beta is nonzero mod an odd prime");
        let norm = 1.0 / (d as f64).sqrt();
        for a in 0..d {
            for b in 0..d {
                let last = match variant {
                    UfVariant::Transcribed => dim.mul(f.beta, dim.mul(b, b)),
                    UfVariant::Standard => dim.mul(f.delta, dim.mul(a, a)),
                };
                let e = dim.sub(dim.add(dim.mul(f.alpha, dim.mul(b, b)), last), dim.mul(2, dim.mul(a, b)));
                u[(a, b)] = omega_res(dim.mul(inv_2beta, e), dim) * norm;
            }
        }
    } else {
        let c = dim.mul(dim.inv2(), dim.mul(f.alpha, f.gamma));
        for a in 0..d {
            u[(dim.mul(f.alpha, a), a)] = omega_res(dim.mul(c, dim.mul(a, a)), dim);
        }
    }
    fix_global_phase(&mut u);
    u
}

/// Rescales by a unit phase so the first nonzero entry in row-major order is real positive.
pub fn fix_global_phase(u: &mut Operator) {
    let first =
        (0..u.nrows()).flat_map(|i| (0..u.ncols()).map(move |j| (i, j))).map(|ij| u[ij]).find(|z| z.norm() > 1e-12);
    if let Some(z) = first {
        let phase = z.conj() / z.norm();
        u.iter_mut().for_each(|x| *x *= phase);
    }
}

/// Builds `U_F`, trying each exponent variant and returning the first whose
/// covariance deviation is below `TOL_COV`.
pub fn build_uf(f: &SympMatrix, dim: PrimeDim) -> Result<(Operator, UfVariant)> {
    let mut best = f64::INFINITY;
    for variant in UfVariant::ALL {
        let u = build_uf_variant(f, variant, dim);
        let dev = check_covariance(&u, f, dim);
        if dev < TOL_COV {
            return Ok((u, variant));
        }
        best = best.min(dev);
    }
    Err(Error::CovarianceFailure(best))
}

/// `max_q min_phi || U D_q U^dag - e^(i phi) D_(Fq) ||_F`, with the optimal
/// phase taken from the trace inner product.
pub fn check_covariance(u: &Operator, f: &SympMatrix, dim: PrimeDim) -> f64 {
    let ud = u.adjoint();
    DisplacementIndex::all(dim)
        .map(|q| {
            let lhs = u * build_d(q, dim) * &ud;
            let rhs = build_d(f.apply(q, dim), dim);
            let overlap = (rhs.adjoint() * &lhs).trace();
            let phase = if overlap.norm() > 1e-300 { overlap / overlap.norm() } else { ONE };
            (lhs - rhs * phase).norm()
        })
        .fold(0.0, f64::max)
}

/// Integer matrix power by repeated multiplication.
pub fn op_pow(a: &Operator, n: usize) -> Operator {
    let mut out = Operator::identity(a.nrows(), a.ncols());
    for _ in 0..n {
        out = &out * a;
    }
    out
}

/// Hermitian inner product `<x|y>`.
#[inline]
pub fn braket(x: &Ket, y: &Ket) -> Complex64 {
    x.iter().zip(y.iter()).fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol::TOL_UNIT;

    fn dim(d: i64) -> PrimeDim {
        PrimeDim::new(d).unwrap()
    }

    fn close(a: &Operator, b: &Operator, tol: f64) -> bool {
        max_abs(&(a - b)) <= tol
    }

    #[test]
    fn shift_and_clock() {
        let d3 = dim(3);
        let x = build_x(d3);
        assert_eq!(&x * basis_ket(2, d3), basis_ket(0, d3));
        let z = build_z(d3);
        let expect = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!(((&z * basis_ket(1, d3))[1] - expect).norm() < 1e-15);
        for d in [3, 5, 7] {
            let p = dim(d);
            let (x, z) = (build_x(p), build_z(p));
            assert!(close(&op_pow(&x, p.d()), &identity(p), TOL_UNIT));
            assert!(close(&op_pow(&z, p.d()), &identity(p), TOL_UNIT));
            assert!(x.trace().norm() < TOL_UNIT);
            assert!(close(&(&z * &x), &(&x * &z * omega_pow(1, p)), TOL_UNIT));
            assert!(is_unitary(&x, TOL_UNIT) && is_unitary(&z, TOL_UNIT));
        }
    }

    #[test]
    fn displacement_basics() {
        for d in [3, 5, 7] {
            let p = dim(d);
            assert_eq!(build_d(DisplacementIndex::ZERO, p), identity(p));
            assert_eq!(build_d(DisplacementIndex::new(1, 0, p), p), build_x(p));
            for q in DisplacementIndex::all(p) {
                let dq = build_d(q, p);
                assert!(is_unitary(&dq, TOL_UNIT));
                assert!(close(&dq.adjoint(), &build_d(q.neg(p), p), TOL_UNIT));
                // matches the product form
                let prod = op_pow(&build_x(p), q.q1)
                    * op_pow(&build_z(p), q.q2)
                    * omega_pow((p.inv2() * q.q1 * q.q2) as i64, p);
                assert!(close(&dq, &prod, TOL_UNIT));
                let psi = Ket::from_iterator(p.d(), (0..p.d()).map(|k| Complex64::new(k as f64, 1.0)));
                assert!((displace(q, &psi, p) - &dq * &psi).norm() < TOL_UNIT);
            }
        }
        let p = dim(5);
        for q in DisplacementIndex::all(p).filter(|q| !q.is_zero()) {
            assert!(build_d(q, p).trace().norm() < TOL_UNIT, "{q:?}");
        }
    }

    #[test]
    fn displacement_composition_and_orthogonality() {
        for d in [3, 5, 7] {
            let p = dim(d);
            let dn = p.d() as f64;
            let all: Vec<_> = DisplacementIndex::all(p).map(|q| (q, build_d(q, p))).collect();
            for (qa, a) in &all {
                for (qb, b) in &all {
                    let prod = a * b;
                    let target = build_d(qa.add(qb, p), p);
                    // phase from the leading nonzero entry
                    let (i, j) = (0..p.d())
                        .flat_map(|i| (0..p.d()).map(move |j| (i, j)))
                        .find(|&ij| target[ij].norm() > 0.5)
                        .unwrap();
                    let phase = prod[(i, j)] / target[(i, j)];
                    assert!((phase.norm() - 1.0).abs() < TOL_UNIT);
                    assert!(close(&prod, &(target * phase), TOL_UNIT));
                    let tr = (a.adjoint() * b).trace().norm();
                    let expect = if qa == qb { dn } else { 0.0 };
                    assert!((tr - expect).abs() < TOL_UNIT);
                }
            }
        }
    }

    #[test]
    fn symplectic_unitaries_are_covariant() {
        for d in [3, 5, 7] {
            let p = dim(d);
            let g = SympMatrix::g();
            let h = SympMatrix::h(p);
            let sample = [
                SympMatrix::identity(),
                g,
                h,
                g.mul(&h, p),
                h.mul(&g, p),
                g.pow(2, p).mul(&h, p).mul(&g, p),
                SympMatrix::new(2, 0, 1, p.inv(2).unwrap() as i64, p).unwrap(),
            ];
            for f in sample {
                let (u, _) = build_uf(&f, p).unwrap();
                assert!(is_unitary(&u, TOL_UNIT));
                assert!(check_covariance(&u, &f, p) < TOL_COV, "{f:?} at d={d}");
            }
        }
    }

    #[test]
    fn covariance_check_examples() {
        let d3 = dim(3);
        assert!(check_covariance(&identity(d3), &SympMatrix::identity(), d3) < 1e-14);
        let (u, _) = build_uf(&SympMatrix::identity(), d3).unwrap();
        assert!(close(&u, &identity(d3), TOL_UNIT));

        let p = dim(5);
        let (ug, _) = build_uf(&SympMatrix::g(), p).unwrap();
        assert!(check_covariance(&ug, &SympMatrix::g(), p) < 1e-10);
        assert!(check_covariance(&ug, &SympMatrix::h(p), p) > 0.5);

        let (uh, _) = build_uf(&SympMatrix::h(p), p).unwrap();
        let lhs = &uh * build_d(DisplacementIndex::new(1, 0, p), p) * uh.adjoint();
        let rhs = build_d(DisplacementIndex::new(0, -1, p), p);
        let phase = (rhs.adjoint() * &lhs).trace() / 5.0;
        assert!(close(&lhs, &(rhs * phase), TOL_UNIT));
    }

    #[test]
    fn global_phase_convention() {
        let p = dim(5);
        for f in [SympMatrix::g(), SympMatrix::h(p)] {
            for v in UfVariant::ALL {
                let u = build_uf_variant(&f, v, p);
                assert!(u[(0, 0)].im.abs() < 1e-15 && u[(0, 0)].re > 0.0);
            }
        }
    }
}

//! The full set of `d + 1` mutually unbiased bases `|m, a> = U_G^m |a>` (and
//! `|inf, a> = U_H |a>`) and the action of the displacement operators on them.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qops::{self, build_d, build_uf, op_pow, Ket, Operator, UfVariant};
use crate::tol::TOL_UNIT;
use crate::zmod::{DisplacementIndex, PrimeDim, SympMatrix};

/// Basis label: `0..d-1` or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MubLabel {
    Finite(usize),
    Infinity,
}

impl MubLabel {
    /// Dense array index; infinity is stored as `d`.
    pub fn index(&self, dim: PrimeDim) -> usize {
        match *self {
            MubLabel::Finite(m) => m,
            MubLabel::Infinity => dim.d(),
        }
    }

    pub fn from_index(i: usize, dim: PrimeDim) -> Self {
        if i >= dim.d() {
            MubLabel::Infinity
        } else {
            MubLabel::Finite(i)
        }
    }

    /// `0, 1, ..., d-1, inf`.
    pub fn all(dim: PrimeDim) -> impl Iterator<Item = MubLabel> {
        (0..=dim.d()).map(move |i| MubLabel::from_index(i, dim))
    }

    /// Permutation part of `D_q` on this basis: `q1 - m q2`, or `-q2` for infinity.
    pub fn shift(&self, q: DisplacementIndex, dim: PrimeDim) -> usize {
        match *self {
            MubLabel::Finite(m) => dim.sub(q.q1, dim.mul(m, q.q2)),
            MubLabel::Infinity => dim.neg(q.q2),
        }
    }
}

impl fmt::Display for MubLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MubLabel::Finite(m) => write!(f, "{m}"),
            MubLabel::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for MubLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "inf" {
            return Ok(MubLabel::Infinity);
        }
        s.parse::<usize>().map(MubLabel::Finite).map_err(|_| Error::BadLabel(s.to_string()))
    }
}

impl Serialize for MubLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MubLabel::Finite(m) => s.serialize_u64(*m as u64),
            MubLabel::Infinity => s.serialize_str("inf"),
        }
    }
}

/// Eigenvalue convention for `Z_m |m, a> = w^(e a) |m, a>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZmVariant {
    /// `e = 2^-1`, as transcribed.
    HalfExponent,
    /// `e = 1`, mirroring the definition of `Z`.
    FullExponent,
}

impl ZmVariant {
    pub const ALL: [ZmVariant; 2] = [ZmVariant::HalfExponent, ZmVariant::FullExponent];

    pub fn multiplier(&self, dim: PrimeDim) -> usize {
        match self {
            ZmVariant::HalfExponent => dim.inv2(),
            ZmVariant::FullExponent => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ZmVariant::HalfExponent => "half_exponent",
            ZmVariant::FullExponent => "full_exponent",
        }
    }
}

/// Formula variants selected while building a [`MubFamily`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectedVariants {
    pub uf_g: UfVariant,
    pub uf_h: UfVariant,
    pub zm: ZmVariant,
    /// Residual of the displacement-action formula under the chosen `Z_m` convention.
    pub zm_residual: f64,
}

/// How `D_q` permutes and rephases one basis: `D_q |m, a> = phases[a] |m, a + shift>`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementAction {
    pub shift: usize,
    pub phases: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct MubFamily {
    dim: PrimeDim,
    /// Column `a` of `bases[m]` is `|m, a>`; index `d` holds the infinity basis.
    bases: Vec<Operator>,
    variants: SelectedVariants,
}

impl MubFamily {
    /// Builds all `d + 1` bases and resolves the `U_F` and `Z_m` formula variants.
    pub fn build(dim: PrimeDim) -> Result<Self> {
        let (ug, uf_g) = build_uf(&SympMatrix::g(), dim)?;
        let (uh, uf_h) = build_uf(&SympMatrix::h(dim), dim)?;
        let mut bases: Vec<Operator> = (0..dim.d()).map(|m| op_pow(&ug, m)).collect();
        bases.push(uh);
        let mut fam = MubFamily {
            dim,
            bases,
            variants: SelectedVariants { uf_g, uf_h, zm: ZmVariant::FullExponent, zm_residual: 0.0 },
        };
        let mut best = f64::INFINITY;
        for zm in ZmVariant::ALL {
            let residual = fam.action_formula_residual(zm);
            if residual < TOL_UNIT {
                fam.variants.zm = zm;
                fam.variants.zm_residual = residual;
                return Ok(fam);
            }
            best = best.min(residual);
        }
        Err(Error::ZmUnresolved(best))
    }

    pub fn dim(&self) -> PrimeDim {
        self.dim
    }

    pub fn variants(&self) -> SelectedVariants {
        self.variants
    }

    /// Unitary whose columns are the vectors of basis `m`.
    pub fn basis(&self, m: MubLabel) -> &Operator {
        &self.bases[m.index(self.dim)]
    }

    pub fn ket(&self, m: MubLabel, a: usize) -> Ket {
        self.basis(m).column(a % self.dim.d()).into_owned()
    }

    /// `p_{m,a} = |<m, a|psi>|^2` for every label (rows in label order) and outcome.
    pub fn probabilities(&self, psi: &Ket) -> Vec<Vec<f64>> {
        self.bases.iter().map(|b| (b.adjoint() * psi).iter().map(|z| z.norm_sqr()).collect()).collect()
    }

    /// `X_m` and `Z_m` for basis `m`, using the selected `Z_m` convention.
    pub fn xm_zm(&self, m: MubLabel) -> (Operator, Operator) {
        self.xm_zm_variant(m, self.variants.zm)
    }

    pub fn xm_zm_variant(&self, m: MubLabel, zm: ZmVariant) -> (Operator, Operator) {
        let d = self.dim.d();
        let b = self.basis(m);
        let e = zm.multiplier(self.dim);
        let mut x = Operator::zeros(d, d);
        let mut z = Operator::zeros(d, d);
        for a in 0..d {
            let ka = b.column(a);
            let kn = b.column(self.dim.add(a, 1));
            x += kn * ka.adjoint();
            z += ka * ka.adjoint() * qops::omega_pow((e * a) as i64, self.dim);
        }
        (x, z)
    }

    /// Measures the permutation and phases with which `D_q` acts on basis `m`.
    pub fn displacement_action(&self, m: MubLabel, q: DisplacementIndex) -> Result<DisplacementAction> {
        let d = self.dim.d();
        let basis = self.basis(m);
        let dq = build_d(q, self.dim);
        let mapped = basis.adjoint() * &dq * basis;
        let mut shift = None;
        let mut phases = Vec::with_capacity(d);
        for a in 0..d {
            let col = mapped.column(a);
            let (b, c) = col
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.norm_sqr().total_cmp(&y.1.norm_sqr()))
                .map(|(b, c)| (b, *c))
                .unwrap();
            let residual = (col.norm_squared() - c.norm_sqr()).max(0.0).sqrt() + (c.norm() - 1.0).abs();
            let s = self.dim.sub(b, a);
            if residual > TOL_UNIT || shift.is_some_and(|s0| s0 != s) {
                return Err(Error::ActionMismatch { label: m.to_string(), residual });
            }
            shift = Some(s);
            phases.push(c);
        }
        Ok(DisplacementAction { shift: shift.unwrap_or(0), phases })
    }

    /// Max deviation of `D_q |m, a>` from the closed-form action
    /// `w^(2^-1 (q1 - m q2) q2) X_m^(q1 - m q2) Z_m^q2` (finite `m`) or
    /// `w^(-2^-1 q1 q2) X_m^(-q2) Z_m^q1` (infinite `m`), over all `m`, `q`, `a`.
    pub fn action_formula_residual(&self, zm: ZmVariant) -> f64 {
        let dim = self.dim;
        let e = zm.multiplier(dim);
        let mut worst: f64 = 0.0;
        for m in MubLabel::all(dim) {
            for q in DisplacementIndex::all(dim) {
                let dq = build_d(q, dim);
                let s = m.shift(q, dim);
                let (prefactor, zpow) = match m {
                    MubLabel::Finite(_) => (dim.mul(dim.inv2(), dim.mul(s, q.q2)), q.q2),
                    MubLabel::Infinity => (dim.neg(dim.mul(dim.inv2(), dim.mul(q.q1, q.q2))), q.q1),
                };
                for a in 0..dim.d() {
                    let lhs = &dq * self.ket(m, a);
                    let coeff = qops::omega_pow((prefactor + e * a * zpow) as i64, dim);
                    let rhs = self.ket(m, dim.add(a, s)) * coeff;
                    worst = worst.max((lhs - rhs).norm());
                }
            }
        }
        worst
    }
}

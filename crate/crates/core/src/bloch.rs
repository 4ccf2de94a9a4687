//! Generalized Bloch space.
//!
//! A density matrix is written `rho = (1 + B) / d` with `B` traceless Hermitian,
//! and Bloch space carries the inner product `<X, Y> = tr(X Y) / (d (d - 1))`, under
//! which pure states lie on the unit sphere. Vectors are stored as real components
//! relative to rescaled generalized Gell-Mann matrices, so the inner product is the
//! Euclidean dot product of components.
//!
//! On top of that this module builds, per MUB label `m`:
//!
//! * the MUB simplex `B_{m,a} = d |m,a><m,a| - 1`,
//! * the hyperplane projector `Q_m`,
//! * the projected simplex `C_{m,a}` and the rotation `R_m` taking `B_{m,a}` to `C_{m,a}`,
//! * the Fourier diagonalisation of `R_m` into 2x2 rotation blocks with angles `theta_{m,a}`,
//! * the cyclic shift rotation `S_m`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mubs::{MubFamily, MubLabel};
use crate::qops::{self, is_hermitian, Ket, Operator};
use crate::tol::{TOL_COV, TOL_UNIT};
use crate::zmod::PrimeDim;

pub type RealMatrix = DMatrix<f64>;

/// A real vector in Bloch space, `d^2 - 1` components.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochVector(DVector<f64>);

impl BlochVector {
    pub fn new(components: DVector<f64>) -> Self {
        BlochVector(components)
    }

    pub fn zeros(n: usize) -> Self {
        BlochVector(DVector::zeros(n))
    }

    pub fn components(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_components(self) -> DVector<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.0.dot(&other.0)
    }

    /// Largest componentwise difference.
    pub fn max_diff(&self, other: &BlochVector) -> f64 {
        (&self.0 - &other.0).amax()
    }

    pub fn apply(&self, m: &RealMatrix) -> BlochVector {
        BlochVector(m * &self.0)
    }
}

/// `<x, y> = tr(X Y) / (d (d - 1))`.
pub fn bloch_inner(x: &BlochVector, y: &BlochVector) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    Ok(x.dot(y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Generator {
    Symmetric(usize, usize),
    Antisymmetric(usize, usize),
    Diagonal(usize),
}

/// Generalized Gell-Mann matrices rescaled by `sqrt(d (d - 1) / 2)`, so that
/// `tr(E_u E_v) = d (d - 1) delta_uv`. Order: symmetric pairs `(j < k)` row-major,
/// antisymmetric pairs in the same order, then the `d - 1` diagonal members.
#[derive(Debug, Clone)]
pub struct BlochBasis {
    dim: PrimeDim,
    generators: Vec<Generator>,
    scale: f64,
}

impl BlochBasis {
    pub fn new(dim: PrimeDim) -> Self {
        let d = dim.d();
        let pairs: Vec<(usize, usize)> = (0..d).flat_map(|j| (j + 1..d).map(move |k| (j, k))).collect();
        let generators = pairs
            .iter()
            .map(|&(j, k)| Generator::Symmetric(j, k))
            .chain(pairs.iter().map(|&(j, k)| Generator::Antisymmetric(j, k)))
            .chain((1..d).map(Generator::Diagonal))
            .collect();
        BlochBasis { dim, generators, scale: ((d * (d - 1)) as f64 / 2.0).sqrt() }
    }

    pub fn dim(&self) -> PrimeDim {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// The matrix `E_u`.
    pub fn matrix(&self, u: usize) -> Operator {
        let d = self.dim.d();
        let c = Complex64::new(self.scale, 0.0);
        let i = Complex64::new(0.0, self.scale);
        let mut e = Operator::zeros(d, d);
        match self.generators[u] {
            Generator::Symmetric(j, k) => {
                e[(j, k)] = c;
                e[(k, j)] = c;
            }
            Generator::Antisymmetric(j, k) => {
                e[(j, k)] = -i;
                e[(k, j)] = i;
            }
            Generator::Diagonal(l) => {
                let w = self.scale * (2.0 / (l * (l + 1)) as f64).sqrt();
                for j in 0..l {
                    e[(j, j)] = Complex64::new(w, 0.0);
                }
                e[(l, l)] = Complex64::new(-(l as f64) * w, 0.0);
            }
        }
        e
    }

    /// Components `tr(E_u A) / (d (d - 1))` of a traceless Hermitian `A`.
    pub fn components_of(&self, a: &Operator) -> BlochVector {
        let d = self.dim.d();
        let norm = (d * (d - 1)) as f64;
        let s = self.scale;
        let comps = self.generators.iter().map(|g| {
            let tr = match *g {
                Generator::Symmetric(j, k) => s * (a[(j, k)] + a[(k, j)]).re,
                Generator::Antisymmetric(j, k) => s * (Complex64::new(0.0, 1.0) * (a[(j, k)] - a[(k, j)])).re,
                Generator::Diagonal(l) => {
                    let w = s * (2.0 / (l * (l + 1)) as f64).sqrt();
                    w * ((0..l).map(|j| a[(j, j)].re).sum::<f64>() - l as f64 * a[(l, l)].re)
                }
            };
            tr / norm
        });
        BlochVector(DVector::from_iterator(self.len(), comps))
    }

    /// `B = sum_u x_u E_u`.
    pub fn matrix_of(&self, x: &BlochVector) -> Operator {
        let d = self.dim.d();
        let mut out = Operator::zeros(d, d);
        for (u, &xu) in x.components().iter().enumerate() {
            out += self.matrix(u) * Complex64::new(xu, 0.0);
        }
        out
    }

    /// Bloch vector of the pure state `|psi><psi|`, i.e. of `d |psi><psi| - 1`.
    /// `psi` is assumed normalised.
    pub fn pure_state(&self, psi: &Ket) -> BlochVector {
        let d = self.dim.d();
        let b = psi * psi.adjoint() * Complex64::new(d as f64, 0.0) - Operator::identity(d, d);
        self.components_of(&b)
    }
}

/// Bloch vector `B = d rho - 1` of a density matrix.
pub fn to_bloch(rho: &Operator, basis: &BlochBasis) -> Result<BlochVector> {
    let d = basis.dim().d();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: rho.nrows() });
    }
    if !is_hermitian(rho, TOL_UNIT) {
        return Err(Error::NotDensityMatrix("not Hermitian".into()));
    }
    let tr = rho.trace();
    if (tr - 1.0).norm() > TOL_UNIT {
        return Err(Error::NotDensityMatrix(format!("trace {tr} != 1")));
    }
    let herm = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let min_eig = herm.symmetric_eigenvalues().min();
    if min_eig < -TOL_UNIT {
        return Err(Error::NotDensityMatrix(format!("negative eigenvalue {min_eig:e}")));
    }
    let b = rho * Complex64::new(d as f64, 0.0) - Operator::identity(d, d);
    Ok(basis.components_of(&b))
}

/// Inverse of [`to_bloch`]: `rho = (1 + B) / d`.
pub fn from_bloch(b: &BlochVector, basis: &BlochBasis) -> Operator {
    let d = basis.dim().d();
    (Operator::identity(d, d) + basis.matrix_of(b)) / Complex64::new(d as f64, 0.0)
}

/// The `d` Bloch vectors `B_{m,a}` of one basis.
#[derive(Debug, Clone)]
pub struct MubSimplex {
    pub label: MubLabel,
    pub vectors: Vec<BlochVector>,
}

impl MubSimplex {
    /// `B_{m,a}` with `a` taken mod d.
    pub fn vertex(&self, a: usize) -> &BlochVector {
        &self.vectors[a % self.vectors.len()]
    }

    pub fn d(&self) -> usize {
        self.vectors.len()
    }

    fn bloch_len(&self) -> usize {
        self.vectors[0].len()
    }

    /// `(d-1)/d sum_a x_a y_a^T` for two families of vectors indexed by `a`.
    fn outer_sum<'a>(
        &self,
        left: impl Iterator<Item = &'a BlochVector>,
        right: impl Iterator<Item = &'a BlochVector>,
    ) -> RealMatrix {
        let n = self.bloch_len();
        let d = self.d() as f64;
        let mut m = RealMatrix::zeros(n, n);
        for (x, y) in left.zip(right) {
            m.ger(1.0, x.components(), y.components(), 1.0);
        }
        m * ((d - 1.0) / d)
    }
}

/// MUB simplices for every label, in label order `0..d-1, inf`.
pub fn mub_simplices(fam: &MubFamily, basis: &BlochBasis) -> Vec<MubSimplex> {
    let dim = fam.dim();
    MubLabel::all(dim)
        .map(|m| MubSimplex { label: m, vectors: (0..dim.d()).map(|a| basis.pure_state(&fam.ket(m, a))).collect() })
        .collect()
}

/// Orthogonal projector onto the hyperplane spanned by one MUB simplex.
#[derive(Debug, Clone)]
pub struct HyperplaneProjector {
    pub label: MubLabel,
    pub matrix: RealMatrix,
}

/// `Q_{m,uu'} = (d-1)/d sum_a B_{m,a,u} B_{m,a,u'}`.
pub fn build_qm(simplex: &MubSimplex) -> HyperplaneProjector {
    HyperplaneProjector {
        label: simplex.label,
        matrix: simplex.outer_sum(simplex.vectors.iter(), simplex.vectors.iter()),
    }
}

/// `Q_m B`.
pub fn project(q: &HyperplaneProjector, b: &BlochVector) -> BlochVector {
    b.apply(&q.matrix)
}

pub(crate) fn check_probabilities(probs: &[f64], d: usize) -> Result<()> {
    if probs.len() != d {
        return Err(Error::NotProbability(format!("expected {d} entries, got {}", probs.len())));
    }
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < -TOL_UNIT) {
        return Err(Error::NotProbability(format!("entry {p}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > TOL_UNIT {
        return Err(Error::NotProbability(format!("sum {total} != 1")));
    }
    Ok(())
}

/// `C_{m,a} = sqrt(d+1) sum_b p_{m,b} B_{m,b+a}`, for `a = 0..d-1`.
pub fn build_c_vectors(simplex: &MubSimplex, probs: &[f64]) -> Result<Vec<BlochVector>> {
    let d = simplex.d();
    check_probabilities(probs, d)?;
    let scale = ((d + 1) as f64).sqrt();
    Ok((0..d)
        .map(|a| {
            let mut c = DVector::zeros(simplex.bloch_len());
            for (b, p) in probs.iter().enumerate() {
                c.axpy(scale * p, simplex.vertex(b + a).components(), 1.0);
            }
            BlochVector(c)
        })
        .collect())
}

/// Max deviation of the Gram matrix of `vectors` from the regular simplex value `(d delta - 1)/(d - 1)`.
pub fn simplex_gram_deviation(vectors: &[BlochVector]) -> f64 {
    let d = vectors.len() as f64;
    let mut worst: f64 = 0.0;
    for (a, x) in vectors.iter().enumerate() {
        for (b, y) in vectors.iter().enumerate() {
            let target = if a == b { 1.0 } else { -1.0 / (d - 1.0) };
            worst = worst.max((x.dot(y) - target).abs());
        }
    }
    worst
}

/// `R_{m,uv} = (d-1)/d sum_a C_{m,a,u} B_{m,a,v}`, the rotation with `R B_{m,a} = C_{m,a}`.
pub fn build_rm(simplex: &MubSimplex, cvecs: &[BlochVector]) -> Result<RealMatrix> {
    if cvecs.len() != simplex.d() {
        return Err(Error::DimensionMismatch { expected: simplex.d(), got: cvecs.len() });
    }
    let dev = simplex_gram_deviation(cvecs);
    if dev > TOL_COV {
        return Err(Error::DegenerateSimplex(dev));
    }
    Ok(simplex.outer_sum(cvecs.iter(), simplex.vectors.iter()))
}

/// `S_{m,uv} = (d-1)/d sum_a B_{m,a+1,u} B_{m,a,v}`, the cyclic shift `B_{m,a} -> B_{m,a+1}`.
pub fn build_sm(simplex: &MubSimplex) -> RealMatrix {
    let d = simplex.d();
    simplex.outer_sum((0..d).map(|a| simplex.vertex(a + 1)), simplex.vectors.iter())
}

/// Real and imaginary parts of the Fourier vector
/// `B~_{m,a} = sqrt(d-1)/d sum_b w^(ab) B_{m,b}`, for `a = 1..d-1`.
pub fn fourier_vectors(simplex: &MubSimplex, dim: PrimeDim) -> Vec<(DVector<f64>, DVector<f64>)> {
    let d = dim.d();
    let scale = ((d - 1) as f64).sqrt() / d as f64;
    (1..d)
        .map(|a| {
            let mut re = DVector::zeros(simplex.bloch_len());
            let mut im = DVector::zeros(simplex.bloch_len());
            for b in 0..d {
                let w = qops::omega_pow((a * b) as i64, dim) * scale;
                re.axpy(w.re, simplex.vertex(b).components(), 1.0);
                im.axpy(w.im, simplex.vertex(b).components(), 1.0);
            }
            (re, im)
        })
        .collect()
}

/// Real orthonormal basis `(B~R_{m,a}, B~I_{m,a})`, `a = 1..(d-1)/2`, of the hyperplane,
/// with `B~R = (B~_{-a} + B~_a)/sqrt2` and `B~I = i (B~_{-a} - B~_a)/sqrt2`.
pub fn fourier_planes(simplex: &MubSimplex, dim: PrimeDim) -> Vec<(BlochVector, BlochVector)> {
    let half = (dim.d() - 1) / 2;
    fourier_vectors(simplex, dim)
        .into_iter()
        .take(half)
        .map(|(re, im)| {
            let s = std::f64::consts::SQRT_2;
            (BlochVector(re * s), BlochVector(im * s))
        })
        .collect()
}

/// Columns: the plane basis `B~R_1, B~I_1, ..., B~R_h, B~I_h`.
pub fn plane_basis_matrix(simplex: &MubSimplex, dim: PrimeDim) -> RealMatrix {
    let cols: Vec<DVector<f64>> = fourier_planes(simplex, dim)
        .into_iter()
        .flat_map(|(r, i)| [r.into_components(), i.into_components()])
        .collect();
    RealMatrix::from_columns(&cols)
}

/// `M` expressed in the plane basis of the simplex's hyperplane, a `(d-1) x (d-1)` matrix.
pub fn restrict_to_hyperplane(m: &RealMatrix, simplex: &MubSimplex, dim: PrimeDim) -> RealMatrix {
    let p = plane_basis_matrix(simplex, dim);
    p.transpose() * m * p
}

/// One invariant plane of `R_m`.
#[derive(Debug, Clone)]
pub struct RotationPlane {
    /// Fourier index `a` in `1..=(d-1)/2`.
    pub index: usize,
    /// `theta_{m,a}` in `(-pi, pi]`.
    pub theta: f64,
    pub real: BlochVector,
    pub imag: BlochVector,
}

/// `R_m` as a direct sum of 2x2 rotations.
#[derive(Debug, Clone)]
pub struct RotationDecomposition {
    pub label: MubLabel,
    pub planes: Vec<RotationPlane>,
    /// `p~_{m,a} = sqrt(d+1) sum_b w^(-ab) p_{m,b}` for `a = 1..d-1` (index `a - 1`).
    pub eigenvalues: Vec<Complex64>,
    /// `max_a || R B~_a - p~_a B~_a ||` over `a = 1..d-1`.
    pub eigen_residual: f64,
}

impl RotationDecomposition {
    pub fn angles(&self) -> Vec<f64> {
        self.planes.iter().map(|p| p.theta).collect()
    }

    /// Same planes, replaced angles.
    pub fn with_angles(&self, angles: &[f64]) -> RotationDecomposition {
        let mut out = self.clone();
        for (p, &t) in out.planes.iter_mut().zip(angles) {
            p.theta = t;
        }
        out
    }
}

/// `p~_{m,a} = sqrt(d+1) sum_b w^(-ab) p_b`, `a = 0..d-1`.
pub fn probability_dft(probs: &[f64], dim: PrimeDim) -> Vec<Complex64> {
    let d = dim.d();
    let scale = ((d + 1) as f64).sqrt();
    (0..d)
        .map(|a| {
            probs.iter().enumerate().map(|(b, p)| qops::omega_pow(-((a * b) as i64), dim) * *p).sum::<Complex64>()
                * scale
        })
        .collect()
}

/// Argument in `(-pi, pi]`.
pub fn principal_angle(z: Complex64) -> f64 {
    let t = z.im.atan2(z.re);
    if t <= -std::f64::consts::PI {
        t + 2.0 * std::f64::consts::PI
    } else {
        t
    }
}

/// Distance between two angles on the circle.
pub fn angle_distance(x: f64, y: f64) -> f64 {
    let t = (x - y).rem_euclid(2.0 * std::f64::consts::PI);
    t.min(2.0 * std::f64::consts::PI - t)
}

/// Diagonalises `R_m` in the Fourier basis of the MUB simplex and extracts the angles.
pub fn fourier_diagonalize(simplex: &MubSimplex, probs: &[f64], dim: PrimeDim) -> Result<RotationDecomposition> {
    let d = dim.d();
    let dft = probability_dft(probs, dim);
    for (a, z) in dft.iter().enumerate().skip(1) {
        if (z.norm() - 1.0).abs() > TOL_COV {
            return Err(Error::NonUnitEigenvalue { index: a, modulus: z.norm() });
        }
    }
    let cvecs = build_c_vectors(simplex, probs)?;
    let r = build_rm(simplex, &cvecs)?;
    let fvecs = fourier_vectors(simplex, dim);
    let mut eigen_residual: f64 = 0.0;
    for (k, (re, im)) in fvecs.iter().enumerate() {
        let lambda = dft[k + 1];
        // R (re + i im) - lambda (re + i im), split into real and imaginary parts
        let res_re = &r * re - (re * lambda.re - im * lambda.im);
        let res_im = &r * im - (im * lambda.re + re * lambda.im);
        eigen_residual = eigen_residual.max((res_re.norm_squared() + res_im.norm_squared()).sqrt());
    }
    let planes = fourier_planes(simplex, dim)
        .into_iter()
        .enumerate()
        .map(|(k, (real, imag))| RotationPlane { index: k + 1, theta: principal_angle(dft[k + 1]), real, imag })
        .collect();
    Ok(RotationDecomposition { label: simplex.label, planes, eigenvalues: dft[1..d].to_vec(), eigen_residual })
}

/// `sum_a cos(theta) (R R^T + I I^T) + sin(theta) (R I^T - I R^T)`, i.e. the
/// rotation with `R (B~R + i B~I) = e^{i theta} (B~R + i B~I)`.
pub fn rebuild_r_from_angles(dec: &RotationDecomposition) -> RealMatrix {
    let n = dec.planes.first().map(|p| p.real.len()).unwrap_or(0);
    let mut out = RealMatrix::zeros(n, n);
    for p in &dec.planes {
        let (c, s) = (p.theta.cos(), p.theta.sin());
        let (r, i) = (p.real.components(), p.imag.components());
        out.ger(c, r, r, 1.0);
        out.ger(c, i, i, 1.0);
        out.ger(s, r, i, 1.0);
        out.ger(-s, i, r, 1.0);
    }
    out
}

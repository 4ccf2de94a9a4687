//! Weyl-Heisenberg covariant SIC-POVMs.
//!
//! A unit ket `psi` is a fiducial when `|<psi|D_q|psi>|^2 = 1/(d+1)` for every
//! `q != 0`; its orbit `psi_q = D_q psi` is then a SIC. Equivalently, `psi` is a
//! minimum uncertainty state (`sum_a p_{m,a}^2 = 2/(d+1)` for every MUB `m`) whose
//! MUB distributions have flat autocorrelation `sum_b p_{m,b} p_{m,b+a} = 1/(d+1)`
//! for `a != 0`. Both forms are checked here, along with their geometric versions
//! in Bloch space and the reconstruction of the SIC from MUB-hyperplane data.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bloch::{
    self, build_c_vectors, build_qm, build_rm, build_sm, fourier_diagonalize, mub_simplices, rebuild_r_from_angles,
    simplex_gram_deviation, BlochBasis, BlochVector, HyperplaneProjector, MubSimplex, RealMatrix,
    RotationDecomposition,
};
use crate::error::{Error, Result};
use crate::mubs::{MubFamily, MubLabel, SelectedVariants};
use crate::qops::{braket, displace, Ket, Operator};
use crate::tol::{TOL_COV, TOL_POLISH, TOL_SIC, TOL_UNIT};
use crate::zmod::{DisplacementIndex, PrimeDim};

/// A unit ket offered as a SIC fiducial.
#[derive(Debug, Clone, PartialEq)]
pub struct FiducialCandidate {
    ket: Ket,
    dim: PrimeDim,
}

impl FiducialCandidate {
    /// Wraps a ket that is already normalised to within `TOL_UNIT`.
    pub fn new(ket: Ket, dim: PrimeDim) -> Result<Self> {
        if ket.len() != dim.d() {
            return Err(Error::DimensionMismatch { expected: dim.d(), got: ket.len() });
        }
        let norm = ket.norm();
        if (norm - 1.0).abs() > TOL_UNIT {
            return Err(Error::NotNormalized(norm));
        }
        Ok(FiducialCandidate { ket, dim })
    }

    /// Normalises `ket` and fixes its phase so the first nonzero amplitude is real positive.
    pub fn normalized(ket: Ket, dim: PrimeDim) -> Result<Self> {
        if ket.len() != dim.d() {
            return Err(Error::DimensionMismatch { expected: dim.d(), got: ket.len() });
        }
        let norm = ket.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized(norm));
        }
        Ok(FiducialCandidate { ket: gauge_fix(&(ket / Complex64::new(norm, 0.0))), dim })
    }

    pub fn ket(&self) -> &Ket {
        &self.ket
    }

    pub fn dim(&self) -> PrimeDim {
        self.dim
    }

    pub fn conj(&self) -> FiducialCandidate {
        FiducialCandidate { ket: self.ket.map(|z| z.conj()), dim: self.dim }
    }
}

fn gauge_fix(psi: &Ket) -> Ket {
    match psi.iter().find(|z| z.norm() > 1e-10) {
        Some(z) => psi * (z.conj() / z.norm()),
        None => psi.clone(),
    }
}

/// `<psi|D_q|psi>` for every `q`, in flat order `q1 * d + q2`.
pub fn overlaps(psi: &Ket, dim: PrimeDim) -> Vec<Complex64> {
    DisplacementIndex::all(dim).map(|q| braket(psi, &displace(q, psi, dim))).collect()
}

/// `max_{q != 0} | |<psi|D_q|psi>|^2 - 1/(d+1) |`.
pub fn overlap_deviation(psi: &Ket, dim: PrimeDim) -> f64 {
    let target = 1.0 / (dim.d() + 1) as f64;
    overlaps(psi, dim).iter().skip(1).map(|c| (c.norm_sqr() - target).abs()).fold(0.0, f64::max)
}

/// One named check: `pass` iff `deviation <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub dimension: usize,
    #[serde(serialize_with = "criteria_as_map")]
    pub criteria: Vec<Criterion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variants: Option<SelectedVariants>,
}

#[derive(Serialize)]
struct CriterionEntry {
    deviation: f64,
    tolerance: f64,
    pass: bool,
}

// name -> {deviation, tolerance, pass}, in insertion order
fn criteria_as_map<S: serde::Serializer>(criteria: &[Criterion], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(criteria.len()))?;
    for c in criteria {
        map.serialize_entry(&c.name, &CriterionEntry { deviation: c.deviation, tolerance: c.tolerance, pass: c.pass })?;
    }
    map.end()
}

impl VerificationReport {
    pub fn new(dim: PrimeDim) -> Self {
        VerificationReport { dimension: dim.d(), criteria: Vec::new(), variants: None }
    }

    pub fn push(&mut self, name: impl Into<String>, deviation: f64, tolerance: f64) {
        let pass = deviation <= tolerance;
        self.criteria.push(Criterion { name: name.into(), deviation, tolerance, pass });
    }

    pub fn pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    /// Criteria whose name starts with `prefix`.
    pub fn matching<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Criterion> + 'a {
        self.criteria.iter().filter(move |c| c.name.starts_with(prefix))
    }
}

/// Checks `|<psi|D_q|psi>|^2 = (d delta_q0 + 1)/(d+1)` for all `q`.
pub fn verify_fiducial(psi: &FiducialCandidate) -> VerificationReport {
    verify_fiducial_with(psi, TOL_SIC)
}

pub fn verify_fiducial_with(psi: &FiducialCandidate, tol: f64) -> VerificationReport {
    let dim = psi.dim();
    let mut report = VerificationReport::new(dim);
    let c0 = braket(psi.ket(), psi.ket());
    report.push("normalization", (c0.norm_sqr() - 1.0).abs(), tol);
    report.push("sic_overlap", overlap_deviation(psi.ket(), dim), tol);
    report
}

/// The `d^2` displaced kets of a fiducial with their Bloch vectors and MUB statistics.
#[derive(Debug, Clone)]
pub struct SicEnsemble {
    pub fiducial: FiducialCandidate,
    /// `psi_q = D_q psi`, flat order.
    pub kets: Vec<Ket>,
    /// `B^s_q`, flat order.
    pub blochs: Vec<BlochVector>,
    /// `p_{m,a} = |<m,a|psi>|^2`, rows in label order.
    pub probs: Vec<Vec<f64>>,
}

pub fn build_sic(psi: &FiducialCandidate, fam: &MubFamily, basis: &BlochBasis) -> Result<SicEnsemble> {
    let dim = psi.dim();
    let dev = overlap_deviation(psi.ket(), dim);
    if dev > TOL_SIC {
        return Err(Error::NotFiducial(dev));
    }
    let kets: Vec<Ket> = DisplacementIndex::all(dim).map(|q| displace(q, psi.ket(), dim)).collect();
    let blochs = kets.iter().map(|k| basis.pure_state(k)).collect();
    Ok(SicEnsemble { fiducial: psi.clone(), kets, blochs, probs: fam.probabilities(psi.ket()) })
}

impl SicEnsemble {
    pub fn dim(&self) -> PrimeDim {
        self.fiducial.dim()
    }

    pub fn bloch(&self, q: DisplacementIndex) -> &BlochVector {
        &self.blochs[q.flat(self.dim())]
    }

    /// `|| (1/d) sum_q |psi_q><psi_q| - 1 ||_max`.
    pub fn resolution_deviation(&self) -> f64 {
        let d = self.dim().d();
        let mut acc = Operator::zeros(d, d);
        for k in &self.kets {
            acc += k * k.adjoint();
        }
        let acc = acc / Complex64::new(d as f64, 0.0) - Operator::identity(d, d);
        crate::qops::max_abs(&acc)
    }

    /// Max deviation of `|<psi_q|psi_q'>|^2` from `(d delta + 1)/(d+1)`.
    pub fn ket_overlap_deviation(&self) -> f64 {
        let d = self.dim().d() as f64;
        let mut worst: f64 = 0.0;
        for (i, x) in self.kets.iter().enumerate() {
            for (j, y) in self.kets.iter().enumerate() {
                let target = if i == j { 1.0 } else { 1.0 / (d + 1.0) };
                worst = worst.max((braket(x, y).norm_sqr() - target).abs());
            }
        }
        worst
    }

    /// Max deviation of `<B_q, B_q'>` from `(d^2 delta - 1)/(d^2 - 1)`.
    pub fn bloch_gram_deviation(&self) -> f64 {
        sic_gram_deviation(&self.blochs)
    }

    pub fn bloch_sum_norm(&self) -> f64 {
        let n = self.blochs[0].len();
        self.blochs.iter().fold(DVector::zeros(n), |acc, b| acc + b.components()).amax()
    }
}

/// Max deviation of a family of `d^2` Bloch vectors from the SIC Gram matrix.
pub fn sic_gram_deviation(blochs: &[BlochVector]) -> f64 {
    let n2 = blochs.len() as f64;
    let mut worst: f64 = 0.0;
    for (i, x) in blochs.iter().enumerate() {
        for (j, y) in blochs.iter().enumerate() {
            let target = if i == j { 1.0 } else { -1.0 / (n2 - 1.0) };
            worst = worst.max((x.dot(y) - target).abs());
        }
    }
    worst
}

/// Per-label minimum uncertainty data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinUncertainty {
    pub label: MubLabel,
    pub sum_sq: f64,
    /// `|sum_a p^2 - 2/(d+1)|`.
    pub deviation: f64,
    /// `||Q_m B||^2 = (d sum_a p^2 - 1)/(d - 1)`.
    pub projected_norm_sq: f64,
    /// `| ||Q_m B||^2 - 1/(d+1) |`.
    pub projected_deviation: f64,
}

fn check_rows(probs: &[Vec<f64>], dim: PrimeDim) -> Result<()> {
    if probs.len() != dim.d() + 1 {
        return Err(Error::NotProbability(format!("expected {} rows, got {}", dim.d() + 1, probs.len())));
    }
    probs.iter().try_for_each(|row| bloch::check_probabilities(row, dim.d()))
}

/// `sum_a p_{m,a}^2` against `2/(d+1)`, together with the equivalent hyperplane norm.
pub fn min_uncertainty_check(probs: &[Vec<f64>], dim: PrimeDim) -> Result<Vec<MinUncertainty>> {
    check_rows(probs, dim)?;
    let d = dim.d() as f64;
    Ok(probs
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let sum_sq: f64 = row.iter().map(|p| p * p).sum();
            let projected_norm_sq = (d * sum_sq - 1.0) / (d - 1.0);
            MinUncertainty {
                label: MubLabel::from_index(i, dim),
                sum_sq,
                deviation: (sum_sq - 2.0 / (d + 1.0)).abs(),
                projected_norm_sq,
                projected_deviation: (projected_norm_sq - 1.0 / (d + 1.0)).abs(),
            }
        })
        .collect())
}

/// `sum_b p_b p_{b+a}` for `a = 0..d-1`.
pub fn autocorrelation(row: &[f64]) -> Vec<f64> {
    let d = row.len();
    (0..d).map(|a| (0..d).map(|b| row[b] * row[(b + a) % d]).sum()).collect()
}

/// Deviations of the autocorrelation from `(delta_a0 + 1)/(d+1)`, `a = 0..d-1`.
pub fn autocorrelation_check(row: &[f64], dim: PrimeDim) -> Result<Vec<f64>> {
    bloch::check_probabilities(row, dim.d())?;
    let d = dim.d() as f64;
    Ok(autocorrelation(row)
        .into_iter()
        .enumerate()
        .map(|(a, v)| {
            let target = if a == 0 { 2.0 / (d + 1.0) } else { 1.0 / (d + 1.0) };
            (v - target).abs()
        })
        .collect())
}

/// `<Q_m B, S_m^a Q_m B>` for every label and shift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometricReport {
    /// `values[m][a]`.
    pub values: Vec<Vec<f64>>,
    /// Max deviation from `(d delta_a0 - 1)/(d^2 - 1)`.
    pub max_deviation: f64,
    pub pass: bool,
}

pub fn geometric_fiduciality_check(
    b: &BlochVector,
    qs: &[HyperplaneProjector],
    ss: &[RealMatrix],
    dim: PrimeDim,
) -> GeometricReport {
    let d = dim.d() as f64;
    let mut worst: f64 = 0.0;
    let values: Vec<Vec<f64>> = qs
        .iter()
        .zip(ss)
        .map(|(q, s)| {
            let proj = b.components().clone_owned();
            let proj = &q.matrix * proj;
            let mut shifted = proj.clone();
            (0..dim.d())
                .map(|a| {
                    let v = proj.dot(&shifted);
                    let target = if a == 0 { (d - 1.0) / (d * d - 1.0) } else { -1.0 / (d * d - 1.0) };
                    worst = worst.max((v - target).abs());
                    shifted = s * &shifted;
                    v
                })
                .collect()
        })
        .collect();
    GeometricReport { values, max_deviation: worst, pass: worst <= TOL_COV }
}

/// Max discrepancy between the geometric values `<Q_m B, S^a Q_m B>` and
/// `(d sum_b p_b p_{b+a} - 1)/(d - 1)` computed from the probabilities.
pub fn geometric_vs_probabilistic(geo: &GeometricReport, probs: &[Vec<f64>], dim: PrimeDim) -> f64 {
    let d = dim.d() as f64;
    geo.values
        .iter()
        .zip(probs)
        .flat_map(|(vals, row)| {
            autocorrelation(row)
                .into_iter()
                .zip(vals.iter())
                .map(move |(ac, v)| ((d * ac - 1.0) / (d - 1.0) - v).abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

/// Fiduciality decided two ways: by the overlap condition, and by minimum
/// uncertainty plus flat autocorrelation in every MUB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiducialityVerdict {
    pub by_overlaps: bool,
    pub by_mub_statistics: bool,
    pub overlap_deviation: f64,
    pub statistics_deviation: f64,
}

pub fn fiduciality_verdict(psi: &FiducialCandidate, fam: &MubFamily, tol: f64) -> Result<FiducialityVerdict> {
    let dim = psi.dim();
    let overlap_dev = overlap_deviation(psi.ket(), dim);
    let probs = fam.probabilities(psi.ket());
    let mut stat_dev: f64 = 0.0;
    for mu in min_uncertainty_check(&probs, dim)? {
        stat_dev = stat_dev.max(mu.deviation);
    }
    for row in &probs {
        for dev in autocorrelation_check(row, dim)?.into_iter().skip(1) {
            stat_dev = stat_dev.max(dev);
        }
    }
    Ok(FiducialityVerdict {
        by_overlaps: overlap_dev <= tol,
        by_mub_statistics: stat_dev <= tol,
        overlap_deviation: overlap_dev,
        statistics_deviation: stat_dev,
    })
}

/// `B^s_q = (C_{inf,-q2} + sum_m C_{m, q1 - m q2}) / sqrt(d+1)`.
///
/// `cvecs[m][a]` is `C_{m,a}` with rows in label order (`inf` last).
pub fn reconstruct_sic(cvecs: &[Vec<BlochVector>], dim: PrimeDim) -> Vec<BlochVector> {
    let scale = 1.0 / ((dim.d() + 1) as f64).sqrt();
    let n = cvecs[0][0].len();
    DisplacementIndex::all(dim)
        .map(|q| {
            let sum = MubLabel::all(dim).fold(DVector::zeros(n), |acc: DVector<f64>, m| {
                acc + cvecs[m.index(dim)][m.shift(q, dim)].components()
            });
            BlochVector::new(sum * scale)
        })
        .collect()
}

/// Rotates every MUB simplex by the `R_m` rebuilt from its angles, then reconstructs the SIC.
pub fn angles_to_sic(
    simplices: &[MubSimplex],
    decompositions: &[RotationDecomposition],
    dim: PrimeDim,
) -> Result<Vec<BlochVector>> {
    let mut cvecs = Vec::with_capacity(simplices.len());
    for (s, dec) in simplices.iter().zip(decompositions) {
        let r = rebuild_r_from_angles(dec);
        let cs: Vec<BlochVector> = s.vectors.iter().map(|b| b.apply(&r)).collect();
        let dev = simplex_gram_deviation(&cs);
        if dev > TOL_COV {
            return Err(Error::DegenerateSimplex(dev));
        }
        cvecs.push(cs);
    }
    Ok(reconstruct_sic(&cvecs, dim))
}

/// All derived per-label geometry of a SIC.
#[derive(Debug, Clone)]
pub struct SicGeometry {
    pub simplices: Vec<MubSimplex>,
    pub projectors: Vec<HyperplaneProjector>,
    pub shifts: Vec<RealMatrix>,
    pub cvecs: Vec<Vec<BlochVector>>,
    pub rotations: Vec<RealMatrix>,
    pub decompositions: Vec<RotationDecomposition>,
}

pub fn sic_geometry(sic: &SicEnsemble, fam: &MubFamily, basis: &BlochBasis) -> Result<SicGeometry> {
    let dim = sic.dim();
    let simplices = mub_simplices(fam, basis);
    let projectors = simplices.iter().map(build_qm).collect();
    let shifts = simplices.iter().map(build_sm).collect();
    let mut cvecs = Vec::new();
    let mut rotations = Vec::new();
    let mut decompositions = Vec::new();
    for (s, row) in simplices.iter().zip(&sic.probs) {
        let cs = build_c_vectors(s, row)?;
        rotations.push(build_rm(s, &cs)?);
        decompositions.push(fourier_diagonalize(s, row, dim)?);
        cvecs.push(cs);
    }
    Ok(SicGeometry { simplices, projectors, shifts, cvecs, rotations, decompositions })
}

/// Runs every check available for `psi`. The SIC-derived geometry is only
/// evaluated when the overlap condition holds.
pub fn full_report(
    psi: &FiducialCandidate,
    fam: &MubFamily,
    basis: &BlochBasis,
    tol: f64,
) -> Result<VerificationReport> {
    let dim = psi.dim();
    let d = dim.d() as f64;
    let mut report = verify_fiducial_with(psi, tol);
    report.variants = Some(fam.variants());
    report.push("zm_action_formula", fam.variants().zm_residual, TOL_UNIT);

    let probs = fam.probabilities(psi.ket());
    for mu in min_uncertainty_check(&probs, dim)? {
        report.push(format!("min_uncertainty[m={}]", mu.label), mu.deviation, tol);
    }
    for (i, row) in probs.iter().enumerate() {
        let label = MubLabel::from_index(i, dim);
        for (a, dev) in autocorrelation_check(row, dim)?.into_iter().enumerate().skip(1) {
            report.push(format!("autocorrelation[m={label},a={a}]"), dev, tol);
        }
    }

    let b = basis.pure_state(psi.ket());
    let simplices = mub_simplices(fam, basis);
    let qs: Vec<_> = simplices.iter().map(build_qm).collect();
    let ss: Vec<_> = simplices.iter().map(build_sm).collect();
    let mut cross: f64 = 0.0;
    for (q, mu) in qs.iter().zip(min_uncertainty_check(&probs, dim)?) {
        let proj = bloch::project(q, &b);
        cross = cross.max((proj.norm().powi(2) - mu.projected_norm_sq).abs());
    }
    report.push("projected_norm_cross_check", cross, TOL_UNIT);
    let geo = geometric_fiduciality_check(&b, &qs, &ss, dim);
    report.push("geometric_fiduciality", geo.max_deviation, TOL_COV.max(tol));
    report.push("geometric_vs_probabilistic", geometric_vs_probabilistic(&geo, &probs, dim), TOL_UNIT);

    if !report.get("sic_overlap").is_some_and(|c| c.pass) {
        return Ok(report);
    }

    let sic = build_sic(psi, fam, basis)?;
    report.push("resolution_of_identity", sic.resolution_deviation(), TOL_COV);
    report.push("sic_ket_overlaps", sic.ket_overlap_deviation(), TOL_COV);
    report.push("sic_bloch_gram", sic.bloch_gram_deviation(), TOL_COV);
    report.push("sic_bloch_sum", sic.bloch_sum_norm(), TOL_COV);

    let geom = sic_geometry(&sic, fam, basis)?;
    let target = 1.0 / (d + 1.0);
    let mut proj_dev: f64 = 0.0;
    let mut image_dev: f64 = 0.0;
    let scale = 1.0 / (d + 1.0).sqrt();
    for (mi, q) in geom.projectors.iter().enumerate() {
        let m = MubLabel::from_index(mi, dim);
        for qi in DisplacementIndex::all(dim) {
            let img = bloch::project(q, sic.bloch(qi));
            proj_dev = proj_dev.max((img.norm().powi(2) - target).abs());
            let expect = BlochVector::new(geom.cvecs[mi][m.shift(qi, dim)].components() * scale);
            image_dev = image_dev.max(img.max_diff(&expect));
        }
    }
    report.push("projected_sic_norm", proj_dev, TOL_COV);
    report.push("projected_sic_images", image_dev, TOL_COV);

    for (mi, s) in geom.simplices.iter().enumerate() {
        let m = MubLabel::from_index(mi, dim);
        let r = &geom.rotations[mi];
        let q = &geom.projectors[mi].matrix;
        report.push(format!("c_simplex_gram[m={m}]"), simplex_gram_deviation(&geom.cvecs[mi]), TOL_COV);
        report.push(format!("rotation_orthogonality[m={m}]"), (r.transpose() * r - q).amax(), TOL_COV);
        let maps = s.vectors.iter().zip(&geom.cvecs[mi]).map(|(bv, c)| bv.apply(r).max_diff(c)).fold(0.0, f64::max);
        report.push(format!("rotation_maps_simplex[m={m}]"), maps, TOL_COV);
        let dec = &geom.decompositions[mi];
        let modulus = dec.eigenvalues.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
        report.push(format!("eigenvalue_modulus[m={m}]"), modulus, TOL_COV);
        report.push(format!("eigenvector_residual[m={m}]"), dec.eigen_residual, TOL_COV);
        report.push(format!("block_rebuild[m={m}]"), (rebuild_r_from_angles(dec) - r).amax(), TOL_COV);
    }
    let rebuilt = reconstruct_sic(&geom.cvecs, dim);
    let recon = rebuilt.iter().zip(&sic.blochs).map(|(x, y)| x.max_diff(y)).fold(0.0, f64::max);
    report.push("reconstruction", recon, TOL_COV);
    let from_angles = angles_to_sic(&geom.simplices, &geom.decompositions, dim)?;
    let recon = from_angles.iter().zip(&sic.blochs).map(|(x, y)| x.max_diff(y)).fold(0.0, f64::max);
    report.push("angles_round_trip", recon, TOL_COV);
    Ok(report)
}

/// `f(psi) = sum_{q != 0} (|<psi|D_q|psi>|^2 - 1/(d+1))^2`.
pub fn objective(psi: &Ket, dim: PrimeDim) -> f64 {
    let t = 1.0 / (dim.d() + 1) as f64;
    overlaps(psi, dim).iter().skip(1).map(|c| (c.norm_sqr() - t).powi(2)).sum()
}

/// `f` and its gradient with respect to `(Re psi, Im psi)`, packed as a complex vector.
///
/// Using `D_q^dag = D_{-q}` the two Wirtinger terms coincide, giving
/// `grad = 8 sum_{q != 0} (|c_q|^2 - t) conj(c_q) D_q psi`.
pub fn objective_and_gradient(psi: &Ket, dim: PrimeDim) -> (f64, Ket) {
    let t = 1.0 / (dim.d() + 1) as f64;
    let mut f = 0.0;
    let mut grad = Ket::zeros(dim.d());
    for q in DisplacementIndex::all(dim).skip(1) {
        let shifted = displace(q, psi, dim);
        let c = braket(psi, &shifted);
        let r = c.norm_sqr() - t;
        f += r * r;
        grad.axpy(Complex64::new(8.0 * r, 0.0) * c.conj(), &shifted, Complex64::new(1.0, 0.0));
    }
    (f, grad)
}

/// Outcome of [`search_fiducial`].
#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Found {
        candidate: FiducialCandidate,
        /// Index of the successful restart.
        restart: usize,
        objective: f64,
        max_deviation: f64,
    },
    NotFound {
        restarts: usize,
        best_objective: f64,
    },
}

/// Parameters of the multi-start descent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub seed: u64,
    pub max_restarts: usize,
    /// Acceptance tolerance on the overlap deviation.
    pub tol: f64,
    pub max_iters: usize,
}

impl SearchConfig {
    pub fn new(seed: u64, max_restarts: usize, tol: f64) -> Self {
        SearchConfig { seed, max_restarts, tol, max_iters: 10_000 }
    }
}

/// Uniformly random unit ket (normalised complex Gaussian).
pub fn random_ket(rng: &mut impl rand::Rng, dim: PrimeDim) -> Ket {
    let v = Ket::from_fn(dim.d(), |_, _| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)));
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// Random start for restart `k`; each restart has its own ChaCha stream.
pub fn restart_start(seed: u64, k: usize, dim: PrimeDim) -> Ket {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    random_ket(&mut rng, dim)
}

/// Projected gradient descent on the unit sphere with backtracking line search.
/// Stops when `f < stop` or after `max_iters` iterations. Returns the final point and value.
pub fn descend(mut psi: Ket, dim: PrimeDim, stop: f64, max_iters: usize) -> (Ket, f64) {
    let (mut f, mut g) = objective_and_gradient(&psi, dim);
    let mut step = 0.1;
    for _ in 0..max_iters {
        if f < stop {
            break;
        }
        // Riemannian gradient on the sphere
        let radial = braket(&psi, &g).re;
        let tangent = &g - &psi * Complex64::new(radial, 0.0);
        let gnorm2 = tangent.norm_squared();
        if gnorm2 < 1e-300 {
            break;
        }
        let mut accepted = false;
        while step > 1e-16 {
            let trial = &psi - &tangent * Complex64::new(step, 0.0);
            let trial = &trial / Complex64::new(trial.norm(), 0.0);
            let (ft, gt) = objective_and_gradient(&trial, dim);
            if ft <= f - 1e-4 * step * gnorm2 {
                psi = trial;
                f = ft;
                g = gt;
                accepted = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (psi, f)
}

/// Residuals `r_q = |<psi|D_q|psi>|^2 - 1/(d+1)` for `q != 0` and their Jacobian
/// with respect to `(Re psi, Im psi)`.
fn residuals_and_jacobian(psi: &Ket, dim: PrimeDim) -> (DVector<f64>, RealMatrix) {
    let d = dim.d();
    let t = 1.0 / (d + 1) as f64;
    let n = d * d - 1;
    let mut r = DVector::zeros(n);
    let mut jac = RealMatrix::zeros(n, 2 * d);
    for (row, q) in DisplacementIndex::all(dim).skip(1).enumerate() {
        let fwd = displace(q, psi, dim);
        let back = displace(q.neg(dim), psi, dim);
        let c = braket(psi, &fwd);
        r[row] = c.norm_sqr() - t;
        // d|c|^2 = 2 Re( conj(dpsi) . (conj(c) D_q psi + c D_q^dag psi) )
        for k in 0..d {
            let g = (fwd[k] * c.conj() + back[k] * c) * 2.0;
            jac[(row, k)] = g.re;
            jac[(row, d + k)] = g.im;
        }
    }
    (r, jac)
}

/// Gauss-Newton refinement of a near-fiducial, with the step from the SVD
/// pseudo-inverse. Converges linearly where plain descent is sublinear (the
/// `d = 3` fiducials are degenerate zeros of the objective).
pub fn polish(mut psi: Ket, dim: PrimeDim, target: f64, max_iters: usize) -> Ket {
    let d = dim.d();
    let (mut r, mut jac) = residuals_and_jacobian(&psi, dim);
    for _ in 0..max_iters {
        if r.amax() < target {
            break;
        }
        let step = match jac.clone().svd(true, true).solve(&(-&r), 1e-12) {
            Ok(s) => s,
            Err(_) => break,
        };
        let delta = Ket::from_fn(d, |k, _| Complex64::new(step[k], step[d + k]));
        let trial = &psi + delta;
        let trial = &trial / Complex64::new(trial.norm(), 0.0);
        let (rt, jt) = residuals_and_jacobian(&trial, dim);
        if rt.norm() >= r.norm() {
            break;
        }
        psi = trial;
        r = rt;
        jac = jt;
    }
    psi
}

/// Multi-start search for a fiducial. Restart `k` starts from [`restart_start`]`(seed, k)`;
/// the lowest-index success is returned, so the result depends only on `config`.
///
/// Each restart runs descent until `f < tol^2 d^2` (or the iteration cap); starts that
/// reach the basin of a zero (`f < 1e-8`) are then polished toward `TOL_POLISH` and
/// accepted when the overlap deviation is within `tol`.
pub fn search_fiducial(dim: PrimeDim, config: SearchConfig) -> SearchOutcome {
    let d2 = (dim.d() * dim.d()) as f64;
    let accept = config.tol * config.tol * d2;
    let mut best = f64::INFINITY;
    for k in 0..config.max_restarts {
        let start = restart_start(config.seed, k, dim);
        let (psi, f) = descend(start, dim, accept, config.max_iters);
        best = best.min(f);
        if f >= accept.max(1e-8) {
            continue;
        }
        let psi = polish(psi, dim, TOL_POLISH, 200);
        let candidate = FiducialCandidate::normalized(psi, dim).expect("descent keeps unit norm");
        let max_deviation = overlap_deviation(candidate.ket(), dim);
        let f = objective(candidate.ket(), dim);
        best = best.min(f);
        if max_deviation <= config.tol {
            return SearchOutcome::Found { candidate, restart: k, objective: f, max_deviation };
        }
    }
    SearchOutcome::NotFound { restarts: config.max_restarts, best_objective: best }
}

/// Fiducial file: `{ "d": int, "fiducial": [[re, im], ...] }` in the standard basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiducialFile {
    pub d: i64,
    pub fiducial: Vec<[f64; 2]>,
}

impl FiducialFile {
    pub fn from_candidate(psi: &FiducialCandidate) -> Self {
        FiducialFile { d: psi.dim().d() as i64, fiducial: psi.ket().iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Validates the entry count and normalisation against `dim`.
    pub fn to_candidate(&self, dim: PrimeDim) -> Result<FiducialCandidate> {
        if self.d != dim.d() as i64 || self.fiducial.len() != dim.d() {
            return Err(Error::DimensionMismatch { expected: dim.d(), got: self.fiducial.len() });
        }
        let ket = Ket::from_iterator(dim.d(), self.fiducial.iter().map(|[re, im]| Complex64::new(*re, *im)));
        FiducialCandidate::new(ket, dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(d: i64) -> PrimeDim {
        PrimeDim::new(d).unwrap()
    }

    fn fiducial3() -> FiducialCandidate {
        let s = 1.0 / 2f64.sqrt();
        let ket = Ket::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(s, 0.0), Complex64::new(-s, 0.0)]);
        FiducialCandidate::new(ket, dim(3)).unwrap()
    }

    /// Brute-force oracle for the d = 3 overlaps, straight from the matrices.
    fn overlaps_by_matrix(psi: &Ket, p: PrimeDim) -> Vec<f64> {
        DisplacementIndex::all(p)
            .map(|q| {
                let v = crate::qops::build_d(q, p) * psi;
                psi.dotc(&v).norm_sqr()
            })
            .collect()
    }

    #[test]
    fn verify_examples() {
        let psi = fiducial3();
        let report = verify_fiducial(&psi);
        assert!(report.pass());
        assert!(report.get("sic_overlap").unwrap().deviation < 1e-12);
        let brute = overlaps_by_matrix(psi.ket(), psi.dim());
        assert!((brute[0] - 1.0).abs() < 1e-15);
        assert!(brute[1..].iter().all(|v| (v - 0.25).abs() < 1e-12));

        let basis_state = FiducialCandidate::new(crate::qops::basis_ket(0, dim(3)), dim(3)).unwrap();
        let report = verify_fiducial(&basis_state);
        assert!(!report.pass());
        // <0|D_(0,1)|0> = 1
        assert!((report.get("sic_overlap").unwrap().deviation - 0.75).abs() < 1e-12);
        assert!((overlaps(basis_state.ket(), dim(3))[0] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn candidate_validation() {
        let p = dim(3);
        let k = Ket::from_element(3, Complex64::new(1.0, 0.0));
        assert!(matches!(FiducialCandidate::new(k.clone(), p), Err(Error::NotNormalized(_))));
        let c = FiducialCandidate::normalized(k * Complex64::new(0.0, 2.0), p).unwrap();
        assert!((c.ket()[0] - Complex64::new(1.0 / 3f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!(FiducialCandidate::new(Ket::zeros(5), p).is_err());
        assert!(FiducialCandidate::normalized(Ket::zeros(3), p).is_err());
    }

    #[test]
    fn sic_ensemble_d3() {
        let p = dim(3);
        let fam = MubFamily::build(p).unwrap();
        let basis = BlochBasis::new(p);
        let sic = build_sic(&fiducial3(), &fam, &basis).unwrap();
        assert_eq!(sic.kets.len(), 9);
        assert!(sic.bloch_gram_deviation() < TOL_COV);
        assert!((sic.blochs[0].dot(&sic.blochs[4]) + 1.0 / 8.0).abs() < 1e-12);
        assert!(sic.blochs.iter().all(|b| (b.norm() - 1.0).abs() < TOL_UNIT));
        assert!(sic.bloch_sum_norm() < TOL_COV);
        assert!(sic.resolution_deviation() < TOL_COV);
        assert!(sic.ket_overlap_deviation() < TOL_COV);
        let bad = FiducialCandidate::new(crate::qops::basis_ket(1, p), p).unwrap();
        assert!(matches!(build_sic(&bad, &fam, &basis), Err(Error::NotFiducial(_))));
    }

    #[test]
    fn min_uncertainty_examples() {
        let p = dim(3);
        let fam = MubFamily::build(p).unwrap();
        let probs = fam.probabilities(fiducial3().ket());
        for mu in min_uncertainty_check(&probs, p).unwrap() {
            assert!((mu.sum_sq - 0.5).abs() < 1e-12);
            assert!(mu.projected_deviation < 1e-12);
        }
        let mut rows = probs.clone();
        rows[0] = vec![1.0 / 3.0; 3];
        rows[1] = vec![1.0, 0.0, 0.0];
        let res = min_uncertainty_check(&rows, p).unwrap();
        assert!((res[0].sum_sq - 1.0 / 3.0).abs() < 1e-12 && res[0].deviation > 0.1);
        assert!((res[1].deviation - 0.5).abs() < 1e-12);
        rows[2] = vec![0.7, 0.7, -0.4];
        assert!(matches!(min_uncertainty_check(&rows, p), Err(Error::NotProbability(_))));
        assert!(min_uncertainty_check(&rows[..2], p).is_err());
    }

    #[test]
    fn autocorrelation_examples() {
        let p = dim(3);
        let fam = MubFamily::build(p).unwrap();
        for row in fam.probabilities(fiducial3().ket()) {
            let ac = autocorrelation(&row);
            assert!((ac[0] - 0.5).abs() < 1e-12);
            assert!((ac[1] - 0.25).abs() < 1e-12 && (ac[2] - 0.25).abs() < 1e-12);
            assert!(autocorrelation_check(&row, p).unwrap().iter().all(|v| *v < 1e-12));
        }
        let uniform = vec![1.0 / 3.0; 3];
        let devs = autocorrelation_check(&uniform, p).unwrap();
        assert!(devs.iter().all(|v| *v > 1e-3));
        assert!(autocorrelation_check(&[0.5, 0.5], p).is_err());
    }

    #[test]
    fn geometric_examples() {
        let p = dim(3);
        let fam = MubFamily::build(p).unwrap();
        let basis = BlochBasis::new(p);
        let simplices = mub_simplices(&fam, &basis);
        let qs: Vec<_> = simplices.iter().map(build_qm).collect();
        let ss: Vec<_> = simplices.iter().map(build_sm).collect();
        let psi = fiducial3();
        let b = basis.pure_state(psi.ket());
        let geo = geometric_fiduciality_check(&b, &qs, &ss, p);
        assert!(geo.pass);
        for vals in &geo.values {
            assert!((vals[0] - 0.25).abs() < 1e-12);
            assert!((vals[1] + 0.125).abs() < 1e-12 && (vals[2] + 0.125).abs() < 1e-12);
        }
        let probs = fam.probabilities(psi.ket());
        assert!(geometric_vs_probabilistic(&geo, &probs, p) < TOL_UNIT);

        let e0 = crate::qops::basis_ket(0, p);
        let geo = geometric_fiduciality_check(&basis.pure_state(&e0), &qs, &ss, p);
        assert!(!geo.pass);
        assert!(geometric_vs_probabilistic(&geo, &fam.probabilities(&e0), p) < TOL_UNIT);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = dim(5);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let psi = random_ket(&mut rng, p);
        let (_, g) = objective_and_gradient(&psi, p);
        let h = 1e-6;
        for k in 0..5 {
            for (dir, part) in [(Complex64::new(1.0, 0.0), 0), (Complex64::new(0.0, 1.0), 1)] {
                let mut plus = psi.clone();
                plus[k] += dir * h;
                let mut minus = psi.clone();
                minus[k] -= dir * h;
                let fd = (objective(&plus, p) - objective(&minus, p)) / (2.0 * h);
                let an = if part == 0 { g[k].re } else { g[k].im };
                assert!((fd - an).abs() < 1e-6, "k={k} part={part}: {fd} vs {an}");
            }
        }
        assert!(objective(fiducial3().ket(), dim(3)) < 1e-28);
    }

    #[test]
    fn search_d3_and_zero_restarts() {
        let p = dim(3);
        for seed in [0, 1, 2] {
            match search_fiducial(p, SearchConfig::new(seed, 10, 1e-7)) {
                SearchOutcome::Found { candidate, max_deviation, .. } => {
                    assert!(max_deviation <= 1e-7);
                    assert!(verify_fiducial(&candidate).pass());
                    let first = candidate.ket().iter().find(|z| z.norm() > 1e-10).unwrap();
                    assert!(first.im.abs() < 1e-15 && first.re > 0.0);
                }
                other => panic!("seed {seed}: {other:?}"),
            }
        }
        assert!(matches!(
            search_fiducial(p, SearchConfig::new(0, 0, 1e-7)),
            SearchOutcome::NotFound { restarts: 0, .. }
        ));
    }

    #[test]
    fn fiducial_file_round_trip() {
        let psi = fiducial3();
        let file = FiducialFile::from_candidate(&psi);
        let text = serde_json::to_string(&file).unwrap();
        let back = FiducialFile::parse(&text).unwrap().to_candidate(dim(3)).unwrap();
        assert_eq!(back, psi);
        assert!(matches!(FiducialFile::parse("{\"d\": 3, \"fiducial\": [[0"), Err(Error::Parse(_))));
        assert!(file.to_candidate(dim(5)).is_err());
    }
}

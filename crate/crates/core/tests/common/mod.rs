#![allow(dead_code)]

use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use sicmub::qops::{build_uf, displace, Ket};
use sicmub::sic::{search_fiducial, FiducialCandidate, SearchConfig, SearchOutcome};
use sicmub::tol::TOL_SEARCH;
use sicmub::zmod::{DisplacementIndex, SympMatrix};
use sicmub::PrimeDim;

pub const DIMS: [i64; 3] = [3, 5, 7];

pub fn dim(d: i64) -> PrimeDim {
    PrimeDim::new(d).unwrap()
}

/// `(|1> - |2>)/sqrt2` at d = 3.
pub fn d3_fiducial() -> FiducialCandidate {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let ket = Ket::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(s, 0.0), Complex64::new(-s, 0.0)]);
    FiducialCandidate::new(ket, dim(3)).unwrap()
}

/// Seed-0 search result, cached per dimension.
pub fn found_fiducial(d: i64) -> FiducialCandidate {
    static CACHE: [OnceLock<FiducialCandidate>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let slot = DIMS.iter().position(|&x| x == d).expect("cached dims are 3, 5, 7");
    CACHE[slot]
        .get_or_init(|| match search_fiducial(dim(d), SearchConfig::new(0, 50, TOL_SEARCH)) {
            SearchOutcome::Found { candidate, .. } => candidate,
            SearchOutcome::NotFound { best_objective, .. } => panic!("no fiducial at d={d}: {best_objective}"),
        })
        .clone()
}

/// Every fiducial under test at `d`.
pub fn fiducials(d: i64) -> Vec<FiducialCandidate> {
    let mut out = vec![found_fiducial(d)];
    if d == 3 {
        out.push(d3_fiducial());
    }
    out
}

pub fn random_ket(rng: &mut impl Rng, dim: PrimeDim) -> Ket {
    sicmub::sic::random_ket(rng, dim)
}

/// Random element of SL(2, Z_d) as a word in `G` and `H`.
pub fn random_symplectic(rng: &mut impl Rng, dim: PrimeDim) -> SympMatrix {
    let mut f = SympMatrix::identity();
    for _ in 0..rng.random_range(1..8) {
        let g = if rng.random_bool(0.5) { SympMatrix::g() } else { SympMatrix::h(dim) };
        f = f.mul(&g, dim);
    }
    f
}

/// `e^{i phi} D_q U_F psi` for random `F`, `q`, `phi`: again a fiducial when `psi` is.
pub fn clifford_image(rng: &mut impl Rng, psi: &Ket, dim: PrimeDim) -> Ket {
    let f = random_symplectic(rng, dim);
    let (u, _) = build_uf(&f, dim).unwrap();
    let d = dim.d() as i64;
    let q = DisplacementIndex::new(rng.random_range(0..d), rng.random_range(0..d), dim);
    let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
    displace(q, &(u * psi), dim) * phase
}

/// Parity `|a> -> |-a>`, written out directly.
pub fn parity(psi: &Ket) -> Ket {
    let d = psi.len();
    Ket::from_fn(d, |i, _| psi[(d - i) % d])
}

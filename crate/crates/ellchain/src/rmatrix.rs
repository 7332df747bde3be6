//! Elliptic R-matrices and the deformed nearest-neighbour permutations built from them.
//!
//! Vertex type (Baxter–Belavin, r ≥ 2), with ⟨αγ|R|βδ⟩ nonzero only if α+γ ≡ β+δ mod r:
//!
//! R_{αγ,βδ}(u) = e^{(2πi/r)((β−α)u + (γ−β)η + (γ−β)(β−α)τ)} φ(u+(γ−β)τ, η+(β−α)τ | rτ) / φ(u,η|τ)
//!
//! Face type (Felder), with dynamical parameters a = (a_1..a_r):
//!
//! R(u,a) = Σ_α E_αα⊗E_αα + Σ_{α≠β} φ(a_β−a_α,η)/φ(u,η) E_αα⊗E_ββ + Σ_{α≠β} φ(u,a_β−a_α)/φ(u,η) E_αβ⊗E_βα
//!
//! Both are normalised so that Ř(u) = P R(u) satisfies Ř(u)Ř(−u) = 1 and Ř(0) = 1.

use std::f64::consts::PI;

use crate::elliptic::{inverse_phi_jet, phi_jet, theta, theta_jet, theta_nonzero, Jet, Lattice};
use crate::linalg::{self, SpinMatrix};
use crate::{Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Which R-matrix the deformed permutations are built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RKind {
    Vertex,
    Face,
    /// r = 1: every deformed permutation is the scalar 1.
    ScalarTrivial,
}

impl RKind {
    pub fn name(self) -> &'static str {
        match self {
            RKind::Vertex => "vertex",
            RKind::Face => "face",
            RKind::ScalarTrivial => "scalar",
        }
    }
}

impl std::str::FromStr for RKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vertex" => Ok(RKind::Vertex),
            "face" => Ok(RKind::Face),
            "scalar" => Ok(RKind::ScalarTrivial),
            _ => Err(Error::invalid(format!("unknown R-matrix kind '{s}'"))),
        }
    }
}

/// The full parameter pack of a spin-Ruijsenaars model.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub kind: RKind,
    pub eta: C64,
    pub epsilon: C64,
    /// Only enters through shifted arguments x − iħεk.
    pub hbar: C64,
    pub lattice: Lattice,
    /// Dynamical parameters (face case); length r.
    pub dyn_a: Vec<C64>,
    pub r: usize,
    pub n_sites: usize,
}

impl ModelParams {
    pub fn new(
        kind: RKind,
        r: usize,
        n_sites: usize,
        eta: C64,
        epsilon: C64,
        hbar: C64,
        tau: C64,
        dyn_a: Vec<C64>,
    ) -> Result<Self> {
        let lattice = Lattice::new(tau)?;
        if n_sites < 2 {
            return Err(Error::invalid("need at least N = 2 sites"));
        }
        match kind {
            RKind::ScalarTrivial if r != 1 => {
                return Err(Error::invalid("the scalar kind forces r = 1"));
            }
            RKind::Vertex if r < 2 => {
                return Err(Error::invalid("the vertex R-matrix needs r >= 2"))
            }
            RKind::Face if dyn_a.len() != r => {
                return Err(Error::invalid(format!(
                    "face R-matrix needs {r} dynamical parameters, got {}",
                    dyn_a.len()
                )))
            }
            _ => {}
        }
        if r == 0 || r > 4 {
            return Err(Error::invalid(format!("rank r = {r} outside 1..=4")));
        }
        linalg::space_dim(r, n_sites)?;
        if lattice.lattice_distance(eta) < 1e-8 {
            return Err(Error::Degenerate(format!(
                "eta = {eta} lies on the period lattice"
            )));
        }
        Ok(Self {
            kind,
            eta,
            epsilon,
            hbar,
            lattice,
            dyn_a,
            r,
            n_sites,
        })
    }

    pub fn dim(&self) -> usize {
        self.r.pow(self.n_sites as u32)
    }

    pub fn tau(&self) -> C64 {
        self.lattice.tau()
    }

    /// Same model with different ħ.
    pub fn with_hbar(&self, hbar: C64) -> Self {
        Self {
            hbar,
            ..self.clone()
        }
    }

    /// Same model with η replaced (used for small-η limits).
    pub fn with_eta(&self, eta: C64) -> Self {
        Self {
            eta,
            ..self.clone()
        }
    }
}

/// A matrix-valued function of u together with its first two u-derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct MatJet {
    pub v: SpinMatrix,
    pub d1: SpinMatrix,
    pub d2: SpinMatrix,
}

impl MatJet {
    fn zeros(n: usize) -> Self {
        Self {
            v: SpinMatrix::zeros(n, n),
            d1: SpinMatrix::zeros(n, n),
            d2: SpinMatrix::zeros(n, n),
        }
    }

    fn set(&mut self, row: usize, col: usize, j: Jet) {
        self.v[(row, col)] = j.v;
        self.d1[(row, col)] = j.d1;
        self.d2[(row, col)] = j.d2;
    }

    fn left_mul(&self, m: &SpinMatrix) -> Self {
        Self {
            v: m * &self.v,
            d1: m * &self.d1,
            d2: m * &self.d2,
        }
    }
}

/// Baxter–Belavin R(u) and its u-derivatives.
pub fn r_vertex(u: C64, eta: C64, lat: &Lattice, r: usize) -> Result<MatJet> {
    if r < 2 {
        return Err(Error::invalid("the vertex R-matrix needs r >= 2"));
    }
    let rf = r as f64;
    let lat_r = lat.scaled(rf)?;
    let tau = lat.tau();
    let inv_phi = inverse_phi_jet(u, eta, lat)?;
    let mut out = MatJet::zeros(r * r);
    for al in 0..r {
        for be in 0..r {
            for ga in 0..r {
                // ice rule fixes δ
                let de = (al + ga + r - be) % r;
                let ba = be as f64 - al as f64;
                let gb = ga as f64 - be as f64;
                let phase = Jet::exp_linear_at(
                    2.0 * PI * I * ba / rf,
                    2.0 * PI * I / rf * (eta * gb + tau * (gb * ba)),
                    u,
                );
                let phi = phi_jet(u, tau * gb, eta + tau * ba, &lat_r)?;
                out.set(al * r + ga, be * r + de, phase * phi * inv_phi);
            }
        }
    }
    Ok(out)
}

/// Felder's dynamical R(u, a) and its u-derivatives.
pub fn r_face(u: C64, a: &[C64], eta: C64, lat: &Lattice) -> Result<MatJet> {
    let r = a.len();
    let mut out = MatJet::zeros(r * r);
    let one = Jet::constant(C64::new(1.0, 0.0));
    let inv_phi = if r > 1 {
        Some(inverse_phi_jet(u, eta, lat)?)
    } else {
        None
    };
    let th_eta = theta(eta, lat)?.value;
    for al in 0..r {
        out.set(al * r + al, al * r + al, one);
        for be in 0..r {
            if al == be {
                continue;
            }
            let d = a[be] - a[al];
            let th_d = theta_nonzero(d, lat, "dynamical parameter difference").map_err(|_| {
                Error::Degenerate(format!(
                    "a_{} - a_{} = {d} lies on the period lattice",
                    be + 1,
                    al + 1
                ))
            })?;
            let inv_phi = inv_phi.expect("r > 1");
            let diag = Jet::constant(theta(d + eta, lat)?.value / (th_d.v * th_eta)) * inv_phi;
            out.set(al * r + be, al * r + be, diag);
            // φ(u,d)/φ(u,η) = θ(u+d)θ(η) / (θ(d)θ(u+η))
            let hop = theta_jet(u + d, lat)? * Jet::constant(th_eta / th_d.v)
                / theta_nonzero(u + eta, lat, "kronecker phi denominator")?;
            out.set(al * r + be, be * r + al, hop);
        }
    }
    Ok(out)
}

/// Ř = P R on two sites, with the face parameters already shifted.
pub fn r_check(
    kind: RKind,
    u: C64,
    a: &[C64],
    eta: C64,
    lat: &Lattice,
    r: usize,
) -> Result<MatJet> {
    let p = linalg::flip(r);
    match kind {
        RKind::Vertex => Ok(r_vertex(u, eta, lat, r)?.left_mul(&p)),
        RKind::Face => Ok(r_face(u, a, eta, lat)?.left_mul(&p)),
        RKind::ScalarTrivial => {
            let mut j = MatJet::zeros(1);
            j.v[(0, 0)] = C64::new(1.0, 0.0);
            Ok(j)
        }
    }
}

/// P_{i,i+1}(u) with its first two u-derivatives, on the full space.
///
/// Face case: on the block where sites 1..i−1 carry weight μ, the two-site factor is
/// Ř(u, a − ημ).
pub fn deformed_permutation_jet(i: usize, u: C64, params: &ModelParams) -> Result<MatJet> {
    let (r, n) = (params.r, params.n_sites);
    if params.kind == RKind::ScalarTrivial {
        if i == 0 || i >= n {
            return Err(Error::invalid(format!(
                "two-site position {i} out of range 1..{n}"
            )));
        }
        let mut j = MatJet::zeros(1);
        j.v[(0, 0)] = C64::new(1.0, 0.0);
        return Ok(j);
    }
    let two_site = |mu: &[usize]| -> Result<MatJet> {
        let a: Vec<C64> = match params.kind {
            RKind::Face => params
                .dyn_a
                .iter()
                .zip(mu)
                .map(|(&a, &m)| a - params.eta * m as f64)
                .collect(),
            _ => Vec::new(),
        };
        r_check(params.kind, u, &a, params.eta, &params.lattice, r)
    };
    if params.kind == RKind::Vertex {
        let j = two_site(&[])?;
        return Ok(MatJet {
            v: linalg::embed_two_site(&j.v, i, r, n)?,
            d1: linalg::embed_two_site(&j.d1, i, r, n)?,
            d2: linalg::embed_two_site(&j.d2, i, r, n)?,
        });
    }
    // compute every weight block once, then embed the three components
    let mut blocks: Vec<(Vec<usize>, MatJet)> = Vec::new();
    let stride = r.pow((n - i + 1) as u32);
    for h in 0..params.dim() / stride {
        let mu = linalg::weight_of_prefix(h * stride, i, r, n)?;
        if !blocks.iter().any(|(m, _)| *m == mu) {
            let j = two_site(&mu)?;
            blocks.push((mu, j));
        }
    }
    let pick = |f: fn(&MatJet) -> &SpinMatrix| {
        linalg::embed_two_site_blockwise(
            |mu| {
                Ok(f(&blocks
                    .iter()
                    .find(|(m, _)| m == mu)
                    .expect("weight enumerated")
                    .1)
                .clone())
            },
            i,
            r,
            n,
        )
    };
    Ok(MatJet {
        v: pick(|j| &j.v)?,
        d1: pick(|j| &j.d1)?,
        d2: pick(|j| &j.d2)?,
    })
}

/// P_{i,i+1}(u).
pub fn deformed_permutation(i: usize, u: C64, params: &ModelParams) -> Result<SpinMatrix> {
    Ok(deformed_permutation_jet(i, u, params)?.v)
}

/// h_{i,i+1}(u) = P_{i,i+1}(−u) P′_{i,i+1}(u).
pub fn h_interaction(i: usize, u: C64, params: &ModelParams) -> Result<SpinMatrix> {
    let pm = deformed_permutation(i, -u, params)?;
    Ok(pm * deformed_permutation_jet(i, u, params)?.d1)
}

/// ‖P_{i,i+1}(u) P_{i,i+1}(−u) − 1‖_F / √dim.
pub fn unitarity_residual(i: usize, u: C64, params: &ModelParams) -> Result<f64> {
    let prod = deformed_permutation(i, u, params)? * deformed_permutation(i, -u, params)?;
    let d = prod.nrows();
    Ok(linalg::frobenius(&(prod - linalg::identity(d))) / (d as f64).sqrt())
}

/// Normalised residual of the braided Yang–Baxter equation at sites (i, i+1, i+2):
/// P_i(u)P_{i+1}(u+v)P_i(v) = P_{i+1}(v)P_i(u+v)P_{i+1}(u).
pub fn ybe_residual(i: usize, u: C64, v: C64, params: &ModelParams) -> Result<f64> {
    if i + 2 > params.n_sites {
        return Err(Error::invalid(
            "the braided Yang-Baxter check needs i <= N - 2",
        ));
    }
    let p = |k: usize, z: C64| deformed_permutation(k, z, params);
    let lhs = p(i, u)? * p(i + 1, u + v)? * p(i, v)?;
    let rhs = p(i + 1, v)? * p(i, u + v)? * p(i + 1, u)?;
    linalg::rel_diff(&lhs, &rhs, 1e-300)
}

/// Distance of the two-site vertex interaction h(u) (r = 2) from span{1, P σ^α⊗σ^α},
/// as the least-squares residual relative to ‖h‖.
pub fn pauli_span_residual(u: C64, params: &ModelParams) -> Result<f64> {
    if params.kind != RKind::Vertex || params.r != 2 {
        return Err(Error::invalid(
            "the Pauli decomposition applies to the r = 2 vertex model",
        ));
    }
    let two = ModelParams {
        n_sites: 2,
        ..params.clone()
    };
    let h = h_interaction(1, u, &two)?;
    let p = linalg::flip(2);
    let mut basis = vec![linalg::identity(4)];
    for k in 1..=3 {
        let s = linalg::pauli(k);
        basis.push(&p * s.kronecker(&s));
    }
    let a = nalgebra::DMatrix::from_fn(16, 4, |row, col| basis[col].as_slice()[row]);
    let b = nalgebra::DVector::from_column_slice(h.as_slice());
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Degenerate(e.to_string()))?;
    Ok((a * coef - &b).norm() / b.norm().max(1e-300))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn params(kind: RKind, n: usize) -> ModelParams {
        ModelParams::new(
            kind,
            2,
            n,
            c64(0.17, 0.04),
            c64(0.8, 0.0),
            c64(0.37, 0.0),
            c64(0.3, 1.1),
            vec![c64(0.31, 0.1), c64(-0.2, 0.05)],
        )
        .unwrap()
    }

    #[test]
    fn vertex_interaction_in_pauli_span() {
        let p = params(RKind::Vertex, 2);
        for u in [c64(0.21, 0.03), c64(-0.4, 0.2)] {
            assert!(pauli_span_residual(u, &p).unwrap() < 1e-12);
        }
        assert!(pauli_span_residual(c64(0.2, 0.0), &params(RKind::Face, 2)).is_err());
    }

    #[test]
    fn face_interaction_shares_permutation_pattern() {
        let p = params(RKind::Face, 2);
        let u = c64(0.21, 0.03);
        let h = h_interaction(1, u, &p).unwrap();
        let pf = deformed_permutation(1, u, &p).unwrap();
        for (hv, pv) in h.iter().zip(pf.iter()) {
            if pv.norm() == 0.0 {
                assert_eq!(hv.norm(), 0.0);
            }
        }
        assert!(linalg::frobenius(&h) > 1e-3);
    }

    #[test]
    fn eight_vertex_sparsity() {
        let p = params(RKind::Vertex, 2);
        let r = r_vertex(c64(0.23, 0.05), p.eta, &p.lattice, 2).unwrap().v;
        let mut count = 0;
        for a in 0..2 {
            for g in 0..2 {
                for b in 0..2 {
                    for d in 0..2 {
                        let z = r[(a * 2 + g, b * 2 + d)];
                        if (a + g + b + d) % 2 == 0 {
                            assert!(z.norm() > 1e-6);
                            count += 1;
                        } else {
                            assert_eq!(z, C64::new(0.0, 0.0));
                        }
                    }
                }
            }
        }
        assert_eq!(count, 8);
    }

    #[test]
    fn face_diagonal_ones() {
        let p = params(RKind::Face, 2);
        let r = r_face(c64(0.23, 0.05), &p.dyn_a, p.eta, &p.lattice)
            .unwrap()
            .v;
        assert_eq!(r[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(r[(3, 3)], C64::new(1.0, 0.0));
    }

    #[test]
    fn face_rank_one_is_scalar_one() {
        let lat = Lattice::new(c64(0.0, 1.0)).unwrap();
        let j = r_face(c64(0.3, 0.0), &[c64(0.1, 0.0)], c64(0.2, 0.0), &lat).unwrap();
        assert_eq!(j.v[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(j.d1[(0, 0)], C64::new(0.0, 0.0));
    }

    #[test]
    fn unitarity_and_ybe_both_kinds() {
        for kind in [RKind::Vertex, RKind::Face] {
            let p = params(kind, 3);
            for i in 1..=2 {
                assert!(unitarity_residual(i, c64(0.27, -0.08), &p).unwrap() < 1e-12);
            }
            assert!(ybe_residual(1, c64(0.21, 0.03), c64(-0.13, 0.07), &p).unwrap() < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for kind in [RKind::Vertex, RKind::Face] {
            let p = params(kind, 3);
            let u = c64(0.19, 0.06);
            let h = 1e-3;
            let f = |z: C64| deformed_permutation(2, z, &p).unwrap();
            let fd = (f(u - 2.0 * h) - f(u - h) * c64(8.0, 0.0) + f(u + h) * c64(8.0, 0.0)
                - f(u + 2.0 * h))
                / c64(12.0 * h, 0.0);
            let j = deformed_permutation_jet(2, u, &p).unwrap();
            assert!(
                linalg::rel_diff(&fd, &j.d1, 1.0).unwrap() < 1e-9,
                "{kind:?}"
            );
            let g = |z: C64| deformed_permutation_jet(2, z, &p).unwrap().d1;
            let fd2 = (g(u - 2.0 * h) - g(u - h) * c64(8.0, 0.0) + g(u + h) * c64(8.0, 0.0)
                - g(u + 2.0 * h))
                / c64(12.0 * h, 0.0);
            assert!(
                linalg::rel_diff(&fd2, &j.d2, 1.0).unwrap() < 1e-8,
                "{kind:?}"
            );
        }
    }

    #[test]
    fn parameter_validation() {
        let tau = c64(0.0, 1.0);
        let z = c64(0.0, 0.0);
        assert!(
            ModelParams::new(RKind::ScalarTrivial, 2, 3, c64(0.1, 0.0), z, z, tau, vec![]).is_err()
        );
        assert!(ModelParams::new(RKind::Vertex, 1, 3, c64(0.1, 0.0), z, z, tau, vec![]).is_err());
        assert!(ModelParams::new(RKind::Face, 2, 3, c64(0.1, 0.0), z, z, tau, vec![z]).is_err());
        assert!(ModelParams::new(RKind::Vertex, 2, 3, c64(1.0, 0.0), z, z, tau, vec![]).is_err());
    }
}

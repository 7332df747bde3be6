//! Classical Ruijsenaars–Schneider functions D_n^cl = Σ_{|I|=n} A_I(x) γ_I, their Hamilton flows,
//! Poisson brackets, and equilibrium diagnostics.

use crate::elliptic::{theta_jet, theta_nonzero, Lattice};
use crate::linalg::SpinMatrix;
use crate::perm::{subsets, Subset};
use crate::rmatrix::ModelParams;
use crate::{Error, Result, C64};

/// A_I(x; η) = Π_{i∈I, j∉I} θ(x_i − x_j + η)/θ(x_i − x_j).
pub fn a_coefficient(subset: &Subset, x: &[C64], eta: C64, lat: &Lattice) -> Result<C64> {
    Ok(a_coefficient_with_gradient(subset, x, eta, lat, false)?.0)
}

/// A_I together with ∂A_I/∂x_k for every k (empty unless `gradient`).
pub fn a_coefficient_with_gradient(
    subset: &Subset,
    x: &[C64],
    eta: C64,
    lat: &Lattice,
    gradient: bool,
) -> Result<(C64, Vec<C64>)> {
    let n = x.len();
    if subset.n_sites() != n {
        return Err(Error::Dimension(format!(
            "subset of 1..={} for {n} coordinates",
            subset.n_sites()
        )));
    }
    // factors f = θ(d+η)/θ(d) with d = x_i − x_j, and their d-derivatives
    let mut factors: Vec<(usize, usize, C64, C64)> = Vec::new();
    for &i in subset.items() {
        for j in 1..=n {
            if subset.contains(j) {
                continue;
            }
            let d = x[i - 1] - x[j - 1];
            let den = theta_nonzero(d, lat, &format!("A coefficient denominator x_{i} - x_{j}"))?;
            let num = theta_jet(d + eta, lat)?;
            let f = num.v / den.v;
            let df = (num.d1 - f * den.d1) / den.v;
            factors.push((i - 1, j - 1, f, df));
        }
    }
    let value: C64 = factors.iter().map(|t| t.2).product();
    if !gradient {
        return Ok((value, Vec::new()));
    }
    let mut grad = vec![C64::new(0.0, 0.0); n];
    for (k, &(i, j, _, df)) in factors.iter().enumerate() {
        let others: C64 = factors
            .iter()
            .enumerate()
            .filter(|(m, _)| *m != k)
            .map(|(_, t)| t.2)
            .product();
        grad[i] += others * df;
        grad[j] -= others * df;
    }
    Ok((value, grad))
}

/// The parameters the classical functions depend on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalParams {
    pub eta: C64,
    pub epsilon: C64,
    pub lattice: Lattice,
}

impl ClassicalParams {
    pub fn new(eta: C64, epsilon: C64, tau: C64) -> Result<Self> {
        Ok(Self {
            eta,
            epsilon,
            lattice: Lattice::new(tau)?,
        })
    }
}

impl From<&ModelParams> for ClassicalParams {
    fn from(p: &ModelParams) -> Self {
        Self {
            eta: p.eta,
            epsilon: p.epsilon,
            lattice: p.lattice,
        }
    }
}

/// Complexified positions and momenta.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: Vec<C64>,
    pub p: Vec<C64>,
}

impl PhasePoint {
    pub fn new(x: Vec<C64>, p: Vec<C64>) -> Result<Self> {
        if x.len() != p.len() || x.is_empty() {
            return Err(Error::Dimension(format!(
                "{} positions and {} momenta",
                x.len(),
                p.len()
            )));
        }
        if x.iter()
            .chain(&p)
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::invalid("non-finite phase-space coordinate"));
        }
        Ok(Self { x, p })
    }

    pub fn n_sites(&self) -> usize {
        self.x.len()
    }

    /// γ_j = e^{ε p_j}.
    pub fn gamma(&self, epsilon: C64) -> Vec<C64> {
        self.p.iter().map(|p| (epsilon * p).exp()).collect()
    }
}

fn check_order(n: i32, n_sites: usize) -> Result<usize> {
    let m = n.unsigned_abs() as usize;
    if m == 0 || m > n_sites {
        return Err(Error::invalid(format!(
            "flow index {n} outside ±1..=±{n_sites}"
        )));
    }
    Ok(m)
}

/// Terms (subset, coefficient, gradient of coefficient, momentum weight e^{±εp_I}) of D_{±n}^cl.
fn terms(
    n: i32,
    pt: &PhasePoint,
    cp: &ClassicalParams,
    gradient: bool,
) -> Result<Vec<(Subset, C64, Vec<C64>, C64)>> {
    let size = check_order(n, pt.n_sites())?;
    let sign = n.signum() as f64;
    let eta = cp.eta * sign;
    let mut out = Vec::new();
    for s in subsets(size, pt.n_sites()) {
        let (a, g) = a_coefficient_with_gradient(&s, &pt.x, eta, &cp.lattice, gradient)?;
        let psum: C64 = s.items().iter().map(|&i| pt.p[i - 1]).sum();
        out.push((s, a, g, (cp.epsilon * psum * sign).exp()));
    }
    Ok(out)
}

/// D_n^cl = Σ_{|I|=n} A_I(x) γ_I for n > 0, and D_{−n}^cl = Σ_{|I|=n} A_I(x;−η) γ_I⁻¹.
pub fn d_classical(n: i32, pt: &PhasePoint, cp: &ClassicalParams) -> Result<C64> {
    Ok(terms(n, pt, cp, false)?.iter().map(|t| t.1 * t.3).sum())
}

/// P^cl = (D_1 − D_{−1})/2.
pub fn momentum_cl(pt: &PhasePoint, cp: &ClassicalParams) -> Result<C64> {
    Ok((d_classical(1, pt, cp)? - d_classical(-1, pt, cp)?) / 2.0)
}

/// H^cl = (D_1 + D_{−1})/2.
pub fn hamiltonian_cl(pt: &PhasePoint, cp: &ClassicalParams) -> Result<C64> {
    Ok((d_classical(1, pt, cp)? + d_classical(-1, pt, cp)?) / 2.0)
}

/// Velocities ∂x_i/∂t_n = ∂D_n/∂p_i and jerks ∂p_j/∂t_n = −∂D_n/∂x_j.
#[derive(Clone, Debug, PartialEq)]
pub struct Flow {
    pub velocities: Vec<C64>,
    pub jerks: Vec<C64>,
}

/// Analytic Hamilton flow of D_n^cl (θ′/θ for the x-derivatives).
pub fn flow_data(n: i32, pt: &PhasePoint, cp: &ClassicalParams) -> Result<Flow> {
    let len = pt.n_sites();
    let sign = n.signum() as f64;
    let mut velocities = vec![C64::new(0.0, 0.0); len];
    let mut jerks = vec![C64::new(0.0, 0.0); len];
    for (s, a, g, w) in terms(n, pt, cp, true)? {
        for &i in s.items() {
            velocities[i - 1] += cp.epsilon * sign * a * w;
        }
        for (j, gj) in g.iter().enumerate() {
            jerks[j] -= gj * w;
        }
    }
    Ok(Flow { velocities, jerks })
}

/// Central-difference step for phase-space derivatives.
pub const FD_STEP: f64 = 1e-3;

/// Fourth-order central-difference gradient of a matrix-valued phase-space function along every
/// x_j and p_j, with holomorphic steps in the real direction.
pub fn phase_gradient<F>(
    f: &F,
    pt: &PhasePoint,
    h: f64,
) -> Result<(Vec<SpinMatrix>, Vec<SpinMatrix>)>
where
    F: Fn(&PhasePoint) -> Result<SpinMatrix>,
{
    let stencil = |moved: &dyn Fn(f64) -> PhasePoint| -> Result<SpinMatrix> {
        let c = |z: f64| C64::new(z, 0.0);
        let fm2 = f(&moved(-2.0 * h))?;
        let fm1 = f(&moved(-h))?;
        let fp1 = f(&moved(h))?;
        let fp2 = f(&moved(2.0 * h))?;
        Ok((fm2 - fp2 + (fp1 - fm1) * c(8.0)) / c(12.0 * h))
    };
    let n = pt.n_sites();
    let mut dx = Vec::with_capacity(n);
    let mut dp = Vec::with_capacity(n);
    for j in 0..n {
        dx.push(stencil(&|s| {
            let mut q = pt.clone();
            q.x[j] += s;
            q
        })?);
        dp.push(stencil(&|s| {
            let mut q = pt.clone();
            q.p[j] += s;
            q
        })?);
    }
    Ok((dx, dp))
}

/// {f, G} = Σ_j (∂f/∂x_j ∂G/∂p_j − ∂f/∂p_j ∂G/∂x_j) for scalar f and matrix-valued G, by finite
/// differences. Errors if halving the step moves the result by more than 1e-6 relative, which
/// flags a non-analytic input.
pub fn poisson_bracket_matrix<F, G>(f: &F, g: &G, pt: &PhasePoint) -> Result<SpinMatrix>
where
    F: Fn(&PhasePoint) -> Result<C64>,
    G: Fn(&PhasePoint) -> Result<SpinMatrix>,
{
    let fm = |q: &PhasePoint| f(q).map(|v| SpinMatrix::from_element(1, 1, v));
    let at = |h: f64| -> Result<SpinMatrix> {
        let (fx, fp) = phase_gradient(&fm, pt, h)?;
        let (gx, gp) = phase_gradient(g, pt, h)?;
        let mut acc = gx[0].clone() * C64::new(0.0, 0.0);
        for j in 0..pt.n_sites() {
            acc += &gp[j] * fx[j][(0, 0)] - &gx[j] * fp[j][(0, 0)];
        }
        Ok(acc)
    };
    let coarse = at(FD_STEP)?;
    let fine = at(FD_STEP / 2.0)?;
    let scale = crate::linalg::frobenius(&fine).max(1.0);
    let gap = crate::linalg::frobenius(&(&coarse - &fine)) / scale;
    if gap > 1e-6 {
        return Err(Error::invalid(format!(
            "bracket not resolved by finite differences (step disagreement {gap:e})"
        )));
    }
    Ok(fine)
}

/// Scalar Poisson bracket {f, g}.
pub fn poisson_bracket<F, G>(f: &F, g: &G, pt: &PhasePoint) -> Result<C64>
where
    F: Fn(&PhasePoint) -> Result<C64>,
    G: Fn(&PhasePoint) -> Result<C64>,
{
    let gm = |q: &PhasePoint| g(q).map(|v| SpinMatrix::from_element(1, 1, v));
    Ok(poisson_bracket_matrix(f, &gm, pt)?[(0, 0)])
}

/// Diagnostics deciding whether a phase point is a classical equilibrium of all N flows.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumReport {
    /// Mean velocity v_n* of flow n = 1..N (index n−1).
    pub velocities: Vec<C64>,
    /// max_i |∂x_i/∂t_n − v_n*|, n = 1..N.
    pub spread: Vec<f64>,
    /// max_j |∂p_j/∂t_n|, n = 1..N.
    pub jerk: Vec<f64>,
    /// |v_{N−n}*/(N−n) − v_n*/n|, n = 1..N−1: the complement symmetry, per particle in the subset.
    pub complement_symmetry: Vec<f64>,
    /// |v_n*(x, −p; −η) − v_n*(x, p; η)|, n = 1..N.
    pub reflection_symmetry: Vec<f64>,
    /// Residuals are divided by this (|v_1*|, or 1 if that vanishes).
    pub scale: f64,
    pub tolerance: f64,
    pub accepted: bool,
}

impl EquilibriumReport {
    /// Largest scaled residual over all categories.
    pub fn worst(&self) -> f64 {
        self.spread
            .iter()
            .chain(&self.jerk)
            .chain(&self.complement_symmetry)
            .chain(&self.reflection_symmetry)
            .fold(0.0, |m, &v| m.max(v))
    }
}

fn mean_velocities(pt: &PhasePoint, cp: &ClassicalParams) -> Result<Vec<(Flow, C64)>> {
    let n = pt.n_sites();
    (1..=n as i32)
        .map(|k| {
            let f = flow_data(k, pt, cp)?;
            let mean = f.velocities.iter().sum::<C64>() / n as f64;
            Ok((f, mean))
        })
        .collect()
}

/// Velocity spreads, jerks and symmetry residuals at `pt`, all scaled by |v_1*|.
pub fn equilibrium_report(
    pt: &PhasePoint,
    cp: &ClassicalParams,
    tolerance: f64,
) -> Result<EquilibriumReport> {
    let n = pt.n_sites();
    let flows = mean_velocities(pt, cp)?;
    let scale = match flows[0].1.norm() {
        s if s > 0.0 => s,
        _ => 1.0,
    };
    let velocities: Vec<C64> = flows.iter().map(|f| f.1).collect();
    let spread = flows
        .iter()
        .map(|(f, m)| {
            f.velocities
                .iter()
                .map(|v| (v - m).norm())
                .fold(0.0, f64::max)
                / scale
        })
        .collect();
    let jerk = flows
        .iter()
        .map(|(f, _)| f.jerks.iter().map(|j| j.norm()).fold(0.0, f64::max) / scale)
        .collect();
    let complement_symmetry = (1..n)
        .map(|k| {
            (velocities[n - k - 1] / (n - k) as f64 - velocities[k - 1] / k as f64).norm() / scale
        })
        .collect();
    let reflected_pt = PhasePoint {
        x: pt.x.clone(),
        p: pt.p.iter().map(|p| -p).collect(),
    };
    let reflected_cp = ClassicalParams {
        eta: -cp.eta,
        ..*cp
    };
    let reflected = mean_velocities(&reflected_pt, &reflected_cp)?;
    let reflection_symmetry = reflected
        .iter()
        .zip(&velocities)
        .map(|((_, m), v)| (m - v).norm() / scale)
        .collect();
    let mut report = EquilibriumReport {
        velocities,
        spread,
        jerk,
        complement_symmetry,
        reflection_symmetry,
        scale,
        tolerance,
        accepted: false,
    };
    report.accepted = report.worst() < tolerance;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn cp() -> ClassicalParams {
        ClassicalParams::new(c64(0.13, 0.05), c64(0.7, 0.1), c64(0.2, 0.9)).unwrap()
    }

    fn pt3() -> PhasePoint {
        PhasePoint::new(
            vec![c64(0.11, 0.02), c64(0.43, -0.05), c64(0.71, 0.08)],
            vec![c64(0.3, -0.1), c64(-0.2, 0.05), c64(0.1, 0.2)],
        )
        .unwrap()
    }

    #[test]
    fn single_particle_is_relativistic() {
        let cp = cp();
        let pt = PhasePoint::new(vec![c64(0.3, 0.0)], vec![c64(0.4, 0.1)]).unwrap();
        let ep = cp.epsilon * pt.p[0];
        // N = 1 has no pairs, so D_{±1} = e^{±εp}
        assert!((momentum_cl(&pt, &cp).unwrap() - ep.sinh()).norm() < 1e-14);
        assert!((hamiltonian_cl(&pt, &cp).unwrap() - ep.cosh()).norm() < 1e-14);
    }

    #[test]
    fn top_function_is_total_momentum_exponential() {
        let cp = cp();
        let pt = pt3();
        let want = (cp.epsilon * pt.p.iter().sum::<C64>()).exp();
        assert!((d_classical(3, &pt, &cp).unwrap() - want).norm() < 1e-13);
    }

    #[test]
    fn negative_flow_times_top_is_complement() {
        let cp = cp();
        let pt = pt3();
        let top = d_classical(3, &pt, &cp).unwrap();
        for n in 1..3 {
            let lhs = d_classical(-n, &pt, &cp).unwrap() * top;
            let rhs = d_classical(3 - n, &pt, &cp).unwrap();
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
        }
    }

    #[test]
    fn analytic_flow_matches_bracket() {
        let cp = cp();
        let pt = pt3();
        for n in [1, 2, -1] {
            let flow = flow_data(n, &pt, &cp).unwrap();
            let d = |q: &PhasePoint| d_classical(n, q, &cp);
            for j in 0..3 {
                let xj = |q: &PhasePoint| Ok(q.x[j]);
                let pj = |q: &PhasePoint| Ok(q.p[j]);
                let v = poisson_bracket(&xj, &d, &pt).unwrap();
                let jk = poisson_bracket(&pj, &d, &pt).unwrap();
                assert!((v - flow.velocities[j]).norm() < 1e-9, "n={n} j={j}");
                assert!((jk - flow.jerks[j]).norm() < 1e-9, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn total_momentum_conserved() {
        let f = flow_data(2, &pt3(), &cp()).unwrap();
        assert!(f.jerks.iter().sum::<C64>().norm() < 1e-12);
    }
}

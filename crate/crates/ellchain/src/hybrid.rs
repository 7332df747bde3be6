//! Hybrid evolution: the classical Hamilton flow of D_1^cl carrying a Heisenberg-picture spin
//! observable along with it,
//!
//! ẋ = ∂D_1/∂p,  ṗ = −∂D_1/∂x,  Ȧ = i[Q(x, p), A],
//!
//! where Q(x, p) = c̃_0(D̃_1^{(1)}) is the order-ħ part of the first spin-Ruijsenaars operator.
//! Integration is fixed-step RK4; every step is repeated as two half steps and the difference
//! serves as the local error estimate.

use crate::classical::{d_classical, flow_data, ClassicalParams, PhasePoint};
use crate::freezing::order1_matrix;
use crate::linalg::{self, SpinMatrix};
use crate::rmatrix::ModelParams;
use crate::{Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Local error estimate above which a step is rejected.
pub const STEP_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct HybridState {
    pub pt: PhasePoint,
    pub a: SpinMatrix,
    pub t: f64,
}

/// Q(x, p) = −iε Σ_i A_i(x) [P_{(1..i)}⁻¹ ∂_i P_{(1..i)}] e^{εp_i}.
pub fn spin_generator(pt: &PhasePoint, params: &ModelParams) -> Result<SpinMatrix> {
    order1_matrix(1, pt, params)
}

/// Time derivative of the full state.
struct Rate {
    x: Vec<C64>,
    p: Vec<C64>,
    a: SpinMatrix,
}

fn rate(state: &HybridState, params: &ModelParams, cp: &ClassicalParams) -> Result<Rate> {
    let flow = flow_data(1, &state.pt, cp)?;
    let q = spin_generator(&state.pt, params)?;
    let a = (&q * &state.a - &state.a * &q) * I;
    Ok(Rate {
        x: flow.velocities,
        p: flow.jerks,
        a,
    })
}

fn advance(state: &HybridState, k: &Rate, h: f64) -> HybridState {
    let hc = C64::new(h, 0.0);
    let shift = |v: &[C64], d: &[C64]| v.iter().zip(d).map(|(v, d)| v + d * hc).collect();
    HybridState {
        pt: PhasePoint {
            x: shift(&state.pt.x, &k.x),
            p: shift(&state.pt.p, &k.p),
        },
        a: &state.a + &k.a * hc,
        t: state.t + h,
    }
}

fn rk4_step(
    state: &HybridState,
    k1: &Rate,
    h: f64,
    params: &ModelParams,
    cp: &ClassicalParams,
) -> Result<HybridState> {
    let k2 = rate(&advance(state, k1, h / 2.0), params, cp)?;
    let k3 = rate(&advance(state, &k2, h / 2.0), params, cp)?;
    let k4 = rate(&advance(state, &k3, h), params, cp)?;
    let combine = |a: &[C64], b: &[C64], c: &[C64], d: &[C64]| -> Vec<C64> {
        (0..a.len())
            .map(|i| (a[i] + (b[i] + c[i]) * 2.0 + d[i]) / 6.0)
            .collect()
    };
    let sum = Rate {
        x: combine(&k1.x, &k2.x, &k3.x, &k4.x),
        p: combine(&k1.p, &k2.p, &k3.p, &k4.p),
        a: (&k1.a + (&k2.a + &k3.a) * C64::new(2.0, 0.0) + &k4.a) / C64::new(6.0, 0.0),
    };
    Ok(advance(state, &sum, h))
}

fn state_distance(u: &HybridState, v: &HybridState) -> f64 {
    let coords = u.pt.x.iter().zip(&v.pt.x).chain(u.pt.p.iter().zip(&v.pt.p));
    let c = coords.map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let a = linalg::frobenius(&(&u.a - &v.a)) / linalg::frobenius(&u.a).max(1.0);
    c.max(a)
}

/// A sampled trajectory with the largest local error estimate met along the way.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<HybridState>,
    pub steps: usize,
    pub max_local_error: f64,
}

impl Trajectory {
    pub fn last(&self) -> &HybridState {
        self.states
            .last()
            .expect("a trajectory always holds its initial state")
    }
}

/// Integrate the n = 1 hybrid flow from `state0` to `t_end` with step `dt`, keeping every
/// `sample_every`-th state (the final state is always kept).
pub fn evolve(
    state0: &HybridState,
    params: &ModelParams,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0 && t_end >= state0.t && dt.is_finite() && t_end.is_finite()) {
        return Err(Error::invalid(format!(
            "need dt > 0 and t_end >= t0, got dt = {dt}, t_end = {t_end}"
        )));
    }
    if state0.pt.n_sites() != params.n_sites || state0.a.nrows() != params.dim() {
        return Err(Error::Dimension(
            "initial state does not match the model size".into(),
        ));
    }
    let q0 = spin_generator(&state0.pt, params)?;
    if linalg::frobenius(&q0) * dt >= 0.1 {
        return Err(Error::invalid(format!(
            "dt = {dt} does not resolve the spin generator (‖Q‖·dt = {:.3} ≥ 0.1)",
            linalg::frobenius(&q0) * dt
        )));
    }
    let cp = ClassicalParams::from(params);
    // the last step is shortened so the trajectory ends exactly at t_end
    let span = t_end - state0.t;
    let steps = ((span / dt) * (1.0 - 1e-12)).ceil() as usize;
    let every = sample_every.max(1);
    let mut states = vec![state0.clone()];
    let mut state = state0.clone();
    let mut max_local_error: f64 = 0.0;
    for k in 1..=steps {
        let h = if k == steps { t_end - state.t } else { dt };
        let k1 = rate(&state, params, &cp)?;
        let full = rk4_step(&state, &k1, h, params, &cp)?;
        let mid = rk4_step(&state, &k1, h / 2.0, params, &cp)?;
        let half = rk4_step(&mid, &rate(&mid, params, &cp)?, h / 2.0, params, &cp)?;
        let err = state_distance(&full, &half) / 15.0;
        if !err.is_finite() || err > STEP_TOLERANCE {
            return Err(Error::Residual {
                name: format!("local error at t = {:.6}", state.t),
                value: err,
                tolerance: STEP_TOLERANCE,
            });
        }
        max_local_error = max_local_error.max(err);
        state = full;
        state.t = if k == steps {
            t_end
        } else {
            state0.t + k as f64 * dt
        };
        if k % every == 0 || k == steps {
            states.push(state.clone());
        }
    }
    Ok(Trajectory {
        states,
        steps,
        max_local_error,
    })
}

/// Relative drift |D_m(end) − D_m(start)| / |D_m(start)| of each classical hamiltonian along a
/// trajectory, for m = ±1..±(N−1) and N.
pub fn conserved_drift(traj: &Trajectory, cp: &ClassicalParams) -> Result<Vec<(i32, f64)>> {
    let first = &traj.states[0].pt;
    let last = &traj.last().pt;
    let n = first.n_sites() as i32;
    (1..=n)
        .chain(-(n - 1)..=-1)
        .map(|m| {
            let a = d_classical(m, first, cp)?;
            let b = d_classical(m, last, cp)?;
            Ok((m, (b - a).norm() / a.norm().max(1e-300)))
        })
        .collect()
}

/// Largest change of the relative coordinates x_i − x_{i+1} along a trajectory.
pub fn relative_coordinate_drift(traj: &Trajectory) -> f64 {
    let rel = |pt: &PhasePoint| -> Vec<C64> { pt.x.windows(2).map(|w| w[0] - w[1]).collect() };
    let start = rel(&traj.states[0].pt);
    traj.states
        .iter()
        .flat_map(|s| {
            rel(&s.pt)
                .into_iter()
                .zip(start.clone())
                .map(|(a, b)| (a - b).norm())
        })
        .fold(0.0, f64::max)
}

/// e^{iHt} A e^{−iHt}, the exact Heisenberg evolution under a constant generator.
pub fn conjugation_oracle(h: &SpinMatrix, a: &SpinMatrix, t: f64) -> SpinMatrix {
    let u = linalg::expm(&(h * (I * t)));
    let u_inv = linalg::expm(&(h * (-I * t)));
    u * a * u_inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::rmatrix::RKind;

    fn params(kind: RKind, r: usize) -> ModelParams {
        let a = if kind == RKind::Face {
            vec![c64(0.31, 0.1), c64(-0.2, 0.05)]
        } else {
            vec![]
        };
        ModelParams::new(
            kind,
            r,
            3,
            c64(0.17, 0.04),
            c64(0.8, 0.0),
            c64(0.0, 0.0),
            c64(0.3, 1.1),
            a,
        )
        .unwrap()
    }

    fn start(dim: usize) -> HybridState {
        let pt = PhasePoint::new(
            vec![c64(0.11, 0.0), c64(0.43, 0.0), c64(0.71, 0.0)],
            vec![c64(0.05, 0.0), c64(-0.02, 0.0), c64(0.01, 0.0)],
        )
        .unwrap();
        let a = SpinMatrix::from_fn(dim, dim, |i, j| {
            c64((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.05)
        });
        HybridState { pt, a, t: 0.0 }
    }

    #[test]
    fn trivial_rank_keeps_observable_fixed() {
        let p = ModelParams::new(
            RKind::ScalarTrivial,
            1,
            3,
            c64(0.17, 0.04),
            c64(0.8, 0.0),
            c64(0.0, 0.0),
            c64(0.3, 1.1),
            vec![],
        )
        .unwrap();
        let s0 = start(1);
        let traj = evolve(&s0, &p, 0.2, 0.01, 5).unwrap();
        assert_eq!(traj.last().a, s0.a);
        for (_, d) in conserved_drift(&traj, &ClassicalParams::from(&p)).unwrap() {
            assert!(d < 1e-10);
        }
    }

    #[test]
    fn generator_varies_along_generic_flow() {
        let p = params(RKind::Vertex, 2);
        let traj = evolve(&start(8), &p, 0.025, 0.005, 1).unwrap();
        assert_eq!(traj.steps, 5);
        assert_eq!(traj.states.len(), 6);
        assert!((traj.last().t - 0.025).abs() < 1e-15);
        let q0 = spin_generator(&traj.states[0].pt, &p).unwrap();
        let q1 = spin_generator(&traj.last().pt, &p).unwrap();
        assert!(linalg::rel_diff(&q0, &q1, 1e-12).unwrap() > 1e-6);
    }

    #[test]
    fn coarse_step_is_refused() {
        let p = params(RKind::Face, 2);
        assert!(evolve(&start(8), &p, 1.0, 10.0, 1).is_err());
        assert!(evolve(&start(8), &p, 1.0, -0.1, 1).is_err());
    }
}

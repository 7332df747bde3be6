//! The order-ħ part of the spin-Ruijsenaars operators, its partial classical limit, and the
//! commuting spin-chain hamiltonians obtained by evaluating it at an equilibrium.
//!
//! Write P_I = F_1 ⋯ F_L with F_k = P_{j_k,j_k+1}(x_{a_k} − x_{b_k}), T_k = F_{k+1} ⋯ F_L and
//! h_k = F_k⁻¹F_k′. Then P_I⁻¹ ∂_{x_i} P_I = Σ_k (∂u_k/∂x_i) T_k⁻¹ h_k T_k: every factor hit by the
//! derivative leaves a nearest-neighbour interaction transported through the factors to its right.
//! Inverses use unitarity, F⁻¹ = P(−u).
//!
//! c̃_0(D̃_n^{(1)}) = −iε Σ_{|I|=n} A_I(x) γ_I P_I⁻¹ Σ_{i∈I} ∂_i P_I,
//! c̃_0(D̃_{−n}^{(1)}) = +iε Σ_{|I|=n} A_{I^c}(x) γ_I⁻¹ P_{I^c}⁻¹ Σ_{i∈I} ∂_i P_{I^c},
//! and H_{n,B} is its value at the equilibrium (x*, p*) of the modular family member B.

use std::collections::BTreeMap;

use crate::classical::{
    a_coefficient, a_coefficient_with_gradient, flow_data, poisson_bracket_matrix, PhasePoint,
};
use crate::diffops::build_spin_d;
use crate::elliptic::{theta, theta_nonzero};
use crate::linalg::{self, SpinMatrix};
use crate::modular::{build_eval_context, EvalContext, FamilyBase, ModularWord};
use crate::perm::{chain_crossings, p_chain, product, subset_crossings, subsets, Crossing, Subset};
use crate::rmatrix::{
    deformed_permutation, deformed_permutation_jet, h_interaction, ModelParams, RKind,
};
use crate::{Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn czero(dim: usize) -> SpinMatrix {
    SpinMatrix::zeros(dim, dim)
}

/// Transported insertions H_k = T_k⁻¹ h_k T_k and, optionally, K_k = T_k⁻¹ F_k⁻¹ F_k″ T_k.
struct Insertions {
    h: Vec<SpinMatrix>,
    k: Vec<SpinMatrix>,
}

fn insertions(
    factors: &[Crossing],
    x: &[C64],
    params: &ModelParams,
    second: bool,
) -> Result<Insertions> {
    let dim = params.dim();
    let len = factors.len();
    let mut h = vec![czero(dim); len];
    let mut k = if second {
        vec![czero(dim); len]
    } else {
        Vec::new()
    };
    let mut t = linalg::identity(dim);
    let mut t_inv = linalg::identity(dim);
    for idx in (0..len).rev() {
        let c = factors[idx];
        let u = c.argument(x);
        let jet = deformed_permutation_jet(c.site, u, params)?;
        let f_inv = deformed_permutation(c.site, -u, params)?;
        h[idx] = &t_inv * (&f_inv * &jet.d1) * &t;
        if second {
            k[idx] = &t_inv * (&f_inv * &jet.d2) * &t;
        }
        t = &jet.v * t;
        t_inv *= f_inv;
    }
    Ok(Insertions { h, k })
}

/// Which subset carries the braiding and which the shifted coordinates, for D̃_{±n}.
fn roles(subset: &Subset, sign: i32) -> (Subset, &Subset) {
    if sign > 0 {
        (subset.clone(), subset)
    } else {
        (subset.complement(), subset)
    }
}

/// P_B⁻¹ Σ_{i∈D} ∂_i P_B with B the braiding subset and D the differentiated coordinates.
pub fn order1_spin_part(
    braid: &Subset,
    diff: &Subset,
    x: &[C64],
    params: &ModelParams,
) -> Result<SpinMatrix> {
    let factors = subset_crossings(braid)?;
    let ins = insertions(&factors, x, params, false)?;
    let mut s = czero(params.dim());
    for (c, h) in factors.iter().zip(&ins.h) {
        let w: f64 = diff.items().iter().map(|&i| c.slope(i - 1)).sum();
        if w != 0.0 {
            s += h * C64::new(w, 0.0);
        }
    }
    Ok(s)
}

/// Same quantity without the unitarity simplification: LU inverse of P_B times the product rule.
pub fn order1_spin_part_unsimplified(
    braid: &Subset,
    diff: &Subset,
    x: &[C64],
    params: &ModelParams,
) -> Result<SpinMatrix> {
    let factors = subset_crossings(braid)?;
    let dim = params.dim();
    let mut dp = czero(dim);
    for k in 0..factors.len() {
        let w: f64 = diff.items().iter().map(|&i| factors[k].slope(i - 1)).sum();
        if w == 0.0 {
            continue;
        }
        let mut m = linalg::identity(dim);
        for (l, c) in factors.iter().enumerate() {
            let jet = deformed_permutation_jet(c.site, c.argument(x), params)?;
            m *= if l == k { jet.d1 } else { jet.v };
        }
        dp += m * C64::new(w, 0.0);
    }
    Ok(linalg::inverse(&product(&factors, x, params)?)? * dp)
}

/// The x-dependent part of the order-ħ coefficient of Γ_I^{±1} in D̃_{±n}:
/// −iε A_I(x) P_I⁻¹Σ_{i∈I}∂_iP_I for sign +1, +iε A_{I^c}(x) P_{I^c}⁻¹Σ_{i∈I}∂_iP_{I^c} for −1.
pub fn order1_coefficient(
    subset: &Subset,
    sign: i32,
    x: &[C64],
    params: &ModelParams,
) -> Result<SpinMatrix> {
    let (braid, diff) = roles(subset, sign);
    let a = a_coefficient(&braid, x, params.eta, &params.lattice)?;
    let pre = -I * params.epsilon * a * sign as f64;
    Ok(order1_spin_part(&braid, diff, x, params)? * pre)
}

fn gamma_weight(subset: &Subset, sign: i32, p: &[C64], epsilon: C64) -> C64 {
    let s: C64 = subset.items().iter().map(|&i| p[i - 1]).sum();
    (epsilon * s * sign as f64).exp()
}

fn check_flow(n: i32, n_sites: usize) -> Result<usize> {
    let m = n.unsigned_abs() as usize;
    if m == 0 || m > n_sites {
        return Err(Error::invalid(format!(
            "flow index {n} outside ±1..=±{n_sites}"
        )));
    }
    Ok(m)
}

/// c̃_0(D̃_n^{(1)}) at the phase point (x, p), summed directly over all n-subsets.
pub fn order1_matrix(n: i32, pt: &PhasePoint, params: &ModelParams) -> Result<SpinMatrix> {
    let m = check_flow(n, params.n_sites)?;
    let sign = n.signum();
    let mut acc = czero(params.dim());
    for s in subsets(m, params.n_sites) {
        acc += order1_coefficient(&s, sign, &pt.x, params)?
            * gamma_weight(&s, sign, &pt.p, params.epsilon);
    }
    Ok(acc)
}

/// c̃_0(D̃_n^{(1)}) together with its analytic x-gradient ∂M/∂x_j, j = 1..N.
///
/// With G_j = P⁻¹∂_jP = Σ_k c_{jk}H_k and S = Σ_k w_kH_k:
/// ∂_j S = −G_j S + Σ_{k<l}(c_{jk}w_l + c_{jl}w_k) H_k H_l + Σ_k c_{jk}w_k K_k.
pub fn order1_matrix_with_gradient(
    n: i32,
    pt: &PhasePoint,
    params: &ModelParams,
) -> Result<(SpinMatrix, Vec<SpinMatrix>)> {
    let m = check_flow(n, params.n_sites)?;
    let sign = n.signum();
    let (dim, len) = (params.dim(), params.n_sites);
    let mut value = czero(dim);
    let mut grad = vec![czero(dim); len];
    for s in subsets(m, len) {
        let (braid, diff) = roles(&s, sign);
        let factors = subset_crossings(&braid)?;
        let ins = insertions(&factors, &pt.x, params, true)?;
        let w: Vec<f64> = factors
            .iter()
            .map(|c| diff.items().iter().map(|&i| c.slope(i - 1)).sum())
            .collect();
        let mut spin = czero(dim);
        for (h, &wk) in ins.h.iter().zip(&w) {
            spin += h * C64::new(wk, 0.0);
        }
        let (a, da) =
            a_coefficient_with_gradient(&braid, &pt.x, params.eta, &params.lattice, true)?;
        let pre = -I * params.epsilon * sign as f64 * gamma_weight(&s, sign, &pt.p, params.epsilon);
        value += &spin * (pre * a);
        for j in 0..len {
            let c: Vec<f64> = factors.iter().map(|f| f.slope(j)).collect();
            let mut gj = czero(dim);
            for (h, &ck) in ins.h.iter().zip(&c) {
                if ck != 0.0 {
                    gj += h * C64::new(ck, 0.0);
                }
            }
            let mut ds = -(&gj * &spin);
            for k in 0..factors.len() {
                if c[k] * w[k] != 0.0 {
                    ds += &ins.k[k] * C64::new(c[k] * w[k], 0.0);
                }
                for l in k + 1..factors.len() {
                    let coef = c[k] * w[l] + c[l] * w[k];
                    if coef != 0.0 {
                        ds += &ins.h[k] * &ins.h[l] * C64::new(coef, 0.0);
                    }
                }
            }
            grad[j] += (ds * a + &spin * da[j]) * pre;
        }
    }
    Ok((value, grad))
}

/// ħ-extraction oracle: Σ_I γ_I^{±1} ∂_ħ Ã_I |_{ħ=0} from the full spin operator, by central
/// differences at ħ = ±δ, ±2δ with one Richardson step.
pub fn order1_matrix_hbar_oracle(
    n: i32,
    pt: &PhasePoint,
    params: &ModelParams,
    delta: f64,
) -> Result<SpinMatrix> {
    let m = check_flow(n, params.n_sites)?;
    let sign = n.signum();
    let at = |h: f64| build_spin_d(n, &params.with_hbar(C64::new(h, 0.0)));
    let ops = [at(delta)?, at(-delta)?, at(2.0 * delta)?, at(-2.0 * delta)?];
    let mut acc = czero(params.dim());
    for s in subsets(m, params.n_sites) {
        let shift: Vec<i32> = s.indicator().iter().map(|k| k * sign).collect();
        let c: Vec<SpinMatrix> = ops
            .iter()
            .map(|op| op.coefficient_at(&shift, &pt.x))
            .collect::<Result<_>>()?;
        let d1 = (&c[0] - &c[1]) / C64::new(2.0 * delta, 0.0);
        let d2 = (&c[2] - &c[3]) / C64::new(4.0 * delta, 0.0);
        let rich = (d1 * C64::new(4.0, 0.0) - d2) / C64::new(3.0, 0.0);
        acc += rich * gamma_weight(&s, sign, &pt.p, params.epsilon);
    }
    Ok(acc)
}

/// Π_{m<m′} θ(d)² / (θ(d+η)θ(d−η)), d = x_{i_m} − x_{i_m′}.
fn pair_ratio(subset: &Subset, x: &[C64], params: &ModelParams) -> Result<C64> {
    let lat = &params.lattice;
    let items = subset.items();
    let mut acc = C64::new(1.0, 0.0);
    for (m, &i) in items.iter().enumerate() {
        for &j in &items[m + 1..] {
            let d = x[i - 1] - x[j - 1];
            let t = theta(d, lat)?.value;
            let tp = theta_nonzero(d + params.eta, lat, "pair ratio")?.v;
            let tm = theta_nonzero(d - params.eta, lat, "pair ratio")?.v;
            acc *= t * t / (tp * tm);
        }
    }
    Ok(acc)
}

/// The scalar prefactor of one subset in H_{±n,B}, computed two ways.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetCoefficient {
    pub subset: Vec<usize>,
    /// iε A_I(x*) γ_I* (or iε A_{I^c}(x*) γ_I*⁻¹ for −n), from the equilibrium momenta.
    pub direct: C64,
    /// iε (v_{±1}*/ε)^n Π θ²/(θ_{+η}θ_{−η}), independent of p*.
    pub closed_form: C64,
}

impl SubsetCoefficient {
    pub fn relative_gap(&self) -> f64 {
        (self.direct - self.closed_form).norm() / self.direct.norm().max(1e-300)
    }
}

/// Both evaluations of the subset prefactors for flow ±n at an equilibrium.
pub fn subset_coefficients(
    n: i32,
    ctx: &EvalContext,
    params: &ModelParams,
) -> Result<Vec<SubsetCoefficient>> {
    let m = check_flow(n, params.n_sites)?;
    let sign = n.signum();
    let pt = ctx.phase_point();
    let eps = params.epsilon;
    let v = if sign > 0 {
        ctx.velocity(1)
    } else {
        ctx.v_minus1
    };
    subsets(m, params.n_sites)
        .into_iter()
        .map(|s| {
            let (braid, _) = roles(&s, sign);
            let a = a_coefficient(&braid, &pt.x, params.eta, &params.lattice)?;
            let direct = I * eps * a * gamma_weight(&s, sign, &pt.p, eps);
            let closed_form = I * eps * (v / eps).powi(m as i32) * pair_ratio(&s, &pt.x, params)?;
            Ok(SubsetCoefficient {
                subset: s.items().to_vec(),
                direct,
                closed_form,
            })
        })
        .collect()
}

/// Commuting hamiltonians of one member of the modular family.
#[derive(Clone, Debug)]
pub struct FrozenChain {
    pub kind: RKind,
    pub params: ModelParams,
    pub context: EvalContext,
    /// H_{n,B}, keyed by n.
    pub hamiltonians: BTreeMap<i32, SpinMatrix>,
    /// Two-path subset coefficients for every flow that was assembled directly.
    pub coefficients: BTreeMap<i32, Vec<SubsetCoefficient>>,
}

impl FrozenChain {
    pub fn get(&self, n: i32) -> Option<&SpinMatrix> {
        self.hamiltonians.get(&n)
    }

    /// Largest relative gap between the two evaluations of any subset coefficient.
    pub fn coefficient_gap(&self) -> f64 {
        self.coefficients
            .values()
            .flatten()
            .map(|c| c.relative_gap())
            .fold(0.0, f64::max)
    }

    /// Normalised commutators ‖[H_n, H_m]‖/(‖H_n‖‖H_m‖) for every pair n < m.
    pub fn commutators(&self) -> Result<Vec<(i32, i32, f64)>> {
        let keys: Vec<i32> = self.hamiltonians.keys().copied().collect();
        let mut out = Vec::new();
        for (a, &n) in keys.iter().enumerate() {
            for &m in &keys[a + 1..] {
                out.push((
                    n,
                    m,
                    linalg::comm_norm(&self.hamiltonians[&n], &self.hamiltonians[&m])?,
                ));
            }
        }
        Ok(out)
    }
}

/// Assemble H_{n,B} = c̃_0(D̃_n^{(1)})(x*, p*) at the equilibrium of `ctx`.
///
/// Flows with |n| > N/2 are obtained from the opposite side of the equator,
/// H_n = (γ_1⋯γ_N)* H_{−(N−n)}, which has fewer factors per subset.
pub fn freeze(kind: RKind, r: usize, ctx: &EvalContext, n_range: &[i32]) -> Result<FrozenChain> {
    let params = ctx.model_params(kind, r, C64::new(0.0, 0.0))?;
    let len = params.n_sites;
    let pt = ctx.phase_point();
    let total: C64 = pt.p.iter().sum::<C64>() * params.epsilon;
    let mut hamiltonians = BTreeMap::new();
    let mut coefficients = BTreeMap::new();
    for &n in n_range {
        let m = check_flow(n, len)?;
        if m == len {
            return Err(Error::invalid(
                "the top flow ±N has no spin part; choose |n| < N",
            ));
        }
        let (direct_n, factor) = if 2 * m > len {
            let other = -n.signum() * (len - m) as i32;
            (other, (total * n.signum() as f64).exp())
        } else {
            (n, C64::new(1.0, 0.0))
        };
        let h = order1_matrix(direct_n, &pt, &params)? * factor;
        coefficients
            .entry(direct_n)
            .or_insert(subset_coefficients(direct_n, ctx, &params)?);
        hamiltonians.insert(n, h);
    }
    Ok(FrozenChain {
        kind,
        params,
        context: ctx.clone(),
        hamiltonians,
        coefficients,
    })
}

/// P_{(k..l)}(x)⁻¹ M P_{(k..l)}(x), with the inverse taken factorwise by unitarity.
fn transport_chain(
    k: usize,
    l: usize,
    m: &SpinMatrix,
    x: &[C64],
    params: &ModelParams,
) -> Result<SpinMatrix> {
    let fwd = p_chain(k, l, x, params)?;
    let mut inv = linalg::identity(params.dim());
    for c in chain_crossings(k, l).iter().rev() {
        inv *= deformed_permutation(c.site, -c.argument(x), params)?;
    }
    Ok(inv * m * fwd)
}

/// H_1 as i v_1* Σ_{i<j} P_{(i+1..j)}⁻¹ h_{i,i+1}(x_i − x_j) P_{(i+1..j)} at the equilibrium.
pub fn h1_chiral_form(ctx: &EvalContext, params: &ModelParams) -> Result<SpinMatrix> {
    let x = &ctx.data.x;
    let mut acc = czero(params.dim());
    for j in 2..=params.n_sites {
        for i in 1..j {
            let h = h_interaction(i, x[i - 1] - x[j - 1], params)?;
            acc += transport_chain(i + 1, j, &h, x, params)?;
        }
    }
    Ok(acc * (I * ctx.velocity(1)))
}

/// H_2 regrouped by the sites of the interaction:
///
/// Σ_{i<j} (Σ_{k<i} a_{jk} + Σ_{k>j} a_{jk}) P_{(i+1..j)}⁻¹ h_{i,i+1}(x_i − x_j) P_{(i+1..j)}
/// + Σ_{i<j<k} a_{jk} P_{(i..j)}(x)⁻¹ P_{(i+2..k)}(y)⁻¹ h_{i+1,i+2}(x_i − x_k) P_{(i+2..k)}(y) P_{(i..j)}(x),
///
/// with a_{jk} = iεA_{{j,k}}γ_jγ_k at the equilibrium and y = (x_1..x_{i−1}, x_j, x_i..x_{j−1}, x_{j+1}..).
pub fn h2_regrouped_form(ctx: &EvalContext, params: &ModelParams) -> Result<SpinMatrix> {
    let len = params.n_sites;
    let x = &ctx.data.x;
    let mut a = vec![vec![C64::new(0.0, 0.0); len + 1]; len + 1];
    for c in subset_coefficients(2, ctx, params)? {
        let (j, k) = (c.subset[0], c.subset[1]);
        a[j][k] = c.direct;
        a[k][j] = c.direct;
    }
    let mut acc = czero(params.dim());
    for j in 2..=len {
        for i in 1..j {
            let w: C64 = (1..i).chain(j + 1..=len).map(|k| a[j][k]).sum();
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            let h = h_interaction(i, x[i - 1] - x[j - 1], params)?;
            acc += transport_chain(i + 1, j, &h, x, params)? * w;
        }
    }
    for i in 1..=len {
        for j in i + 1..=len {
            for k in j + 1..=len {
                let mut y: Vec<C64> = x[..i - 1].to_vec();
                y.push(x[j - 1]);
                y.extend_from_slice(&x[i - 1..j - 1]);
                y.extend_from_slice(&x[j..]);
                let h = h_interaction(i + 1, x[i - 1] - x[k - 1], params)?;
                let inner = transport_chain(i + 2, k, &h, &y, params)?;
                acc += transport_chain(i, j, &inner, x, params)? * a[j][k];
            }
        }
    }
    Ok(acc)
}

/// Σ_j ∂_{x_j} c̃_0(D̃_n^{(1)}) at a phase point, relative to the largest single ‖∂_{x_j}‖.
pub fn translation_invariance_residual(
    n: i32,
    pt: &PhasePoint,
    params: &ModelParams,
) -> Result<f64> {
    let (_, grad) = order1_matrix_with_gradient(n, pt, params)?;
    let scale = grad.iter().map(linalg::frobenius).fold(0.0, f64::max);
    let total = grad.iter().fold(czero(params.dim()), |acc, g| acc + g);
    Ok(if scale == 0.0 {
        0.0
    } else {
        linalg::frobenius(&total) / scale
    })
}

/// {D_n^cl, c̃_0(D̃_m^{(1)})} at a phase point, analytic and by finite differences, each
/// divided by Σ_j (|∂_{x_j}D| ‖∂_{p_j}M‖ + |∂_{p_j}D| ‖∂_{x_j}M‖).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracketResidual {
    pub analytic: f64,
    pub finite_difference: f64,
}

pub fn freezing_bracket_residual(
    n: i32,
    m: i32,
    pt: &PhasePoint,
    params: &ModelParams,
) -> Result<BracketResidual> {
    let cp = params.into();
    let flow = flow_data(n, pt, &cp)?;
    let (_, mx) = order1_matrix_with_gradient(m, pt, params)?;
    // ∂M/∂p_j = ±ε Σ_{I∋j} (subset term), from the γ-weights
    let sign = m.signum();
    let size = check_flow(m, params.n_sites)?;
    let mut mp = vec![czero(params.dim()); params.n_sites];
    for s in subsets(size, params.n_sites) {
        let term = order1_coefficient(&s, sign, &pt.x, params)?
            * (gamma_weight(&s, sign, &pt.p, params.epsilon) * params.epsilon * sign as f64);
        for &j in s.items() {
            mp[j - 1] += &term;
        }
    }
    // ∂D/∂x_j = −jerk_j, ∂D/∂p_j = velocity_j
    let mut acc = czero(params.dim());
    let mut scale = 0.0;
    for j in 0..params.n_sites {
        let dx = -flow.jerks[j];
        let dp = flow.velocities[j];
        acc += &mp[j] * dx - &mx[j] * dp;
        scale += dx.norm() * linalg::frobenius(&mp[j]) + dp.norm() * linalg::frobenius(&mx[j]);
    }
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let d = |q: &PhasePoint| crate::classical::d_classical(n, q, &cp);
    let mm = |q: &PhasePoint| order1_matrix(m, q, params);
    let fd = poisson_bracket_matrix(&d, &mm, pt)?;
    Ok(BracketResidual {
        analytic: linalg::frobenius(&acc) / scale,
        finite_difference: linalg::frobenius(&fd) / scale,
    })
}

/// How far H_{1,1} − H_{1,S} (vertex, r = 2, same base parameters) is from a multiple of the identity.
///
/// Two normalisations are reported because the identification of the two charts is not unique:
/// `raw` compares the hamiltonians as built, `per_velocity` first divides each by its own i v_1*.
/// Each value is ‖Δ − (tr Δ/dim)·1‖ divided by the larger of the two compared norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityShift {
    pub raw: f64,
    pub per_velocity: f64,
}

pub fn identity_shift_residuals(
    base: &FamilyBase,
    n_sites: usize,
    tolerance: f64,
) -> Result<IdentityShift> {
    let build = |w: &str| -> Result<(SpinMatrix, C64)> {
        let word: ModularWord = w.parse()?;
        let ctx = build_eval_context(&word, base, n_sites, tolerance)?;
        let chain = freeze(RKind::Vertex, 2, &ctx, &[1])?;
        Ok((chain.hamiltonians[&1].clone(), I * ctx.velocity(1)))
    };
    let (h1, v1) = build("1")?;
    let (hs, vs) = build("S")?;
    let traceless = |a: &SpinMatrix, b: &SpinMatrix| {
        let d = a - b;
        let shift = d.trace() / d.nrows() as f64;
        let off = &d - linalg::identity(d.nrows()) * shift;
        linalg::frobenius(&off) / linalg::frobenius(a).max(linalg::frobenius(b)).max(1e-300)
    };
    Ok(IdentityShift {
        raw: traceless(&h1, &hs),
        per_velocity: traceless(&(h1 / v1), &(hs / vs)),
    })
}

/// Base parameters of the face regime in which H_1 + H_{−1} at B = S has a real spectrum:
/// imaginary ω and base η, a chosen so that η and a are real in the S-chart where the chain lives.
pub fn real_spectrum_base() -> FamilyBase {
    FamilyBase {
        eta: C64::new(0.0, 0.3),
        epsilon: C64::new(0.7, 0.0),
        a: vec![C64::new(0.0, 0.31), C64::new(0.0, -0.2)],
        omega: C64::new(0.0, 2.0),
    }
}

/// Largest |Im λ| over the eigenvalues of H_1 + H_{−1} of a chain, with the largest |λ| for scale.
pub fn spectrum_imaginary_part(chain: &FrozenChain) -> Result<(f64, f64)> {
    let (Some(a), Some(b)) = (chain.get(1), chain.get(-1)) else {
        return Err(Error::invalid("chain must contain the flows 1 and -1"));
    };
    let ev = linalg::eigenvalues(&(a + b))?;
    let im = ev.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let scale = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok((im, scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn params(kind: RKind, n: usize) -> ModelParams {
        let a = if kind == RKind::Face {
            vec![c64(0.31, 0.1), c64(-0.2, 0.05)]
        } else {
            vec![]
        };
        ModelParams::new(
            kind,
            2,
            n,
            c64(0.17, 0.04),
            c64(0.8, 0.1),
            c64(0.0, 0.0),
            c64(0.3, 1.1),
            a,
        )
        .unwrap()
    }

    fn point(n: usize) -> PhasePoint {
        let x = [
            c64(0.11, 0.02),
            c64(0.43, -0.05),
            c64(0.71, 0.08),
            c64(0.27, 0.13),
        ];
        let p = [
            c64(0.3, -0.1),
            c64(-0.2, 0.05),
            c64(0.1, 0.2),
            c64(-0.15, 0.0),
        ];
        PhasePoint::new(x[..n].to_vec(), p[..n].to_vec()).unwrap()
    }

    #[test]
    fn simplified_insertions_match_product_rule() {
        for kind in [RKind::Vertex, RKind::Face] {
            let p = params(kind, 4);
            let x = point(4).x;
            for s in subsets(2, 4) {
                for (braid, diff) in [(s.clone(), s.clone()), (s.complement(), s.clone())] {
                    let a = order1_spin_part(&braid, &diff, &x, &p).unwrap();
                    let b = order1_spin_part_unsimplified(&braid, &diff, &x, &p).unwrap();
                    assert!(
                        linalg::rel_diff(&a, &b, 1e-12).unwrap() < 1e-11,
                        "{kind:?} {s:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_difference() {
        for kind in [RKind::Vertex, RKind::Face] {
            let p = params(kind, 3);
            let pt = point(3);
            for n in [1, -1, 2] {
                let (_, grad) = order1_matrix_with_gradient(n, &pt, &p).unwrap();
                let f = |q: &PhasePoint| order1_matrix(n, q, &p);
                let (coarse, _) = crate::classical::phase_gradient(&f, &pt, 2e-3).unwrap();
                let (fine, _) = crate::classical::phase_gradient(&f, &pt, 1e-3).unwrap();
                for j in 0..3 {
                    let fd = (&fine[j] * c64(16.0, 0.0) - &coarse[j]) / c64(15.0, 0.0);
                    assert!(
                        linalg::rel_diff(&grad[j], &fd, 1.0).unwrap() < 1e-9,
                        "{kind:?} n={n} j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn hbar_oracle_agrees() {
        for kind in [RKind::Vertex, RKind::Face] {
            let p = params(kind, 3);
            let pt = point(3);
            for n in [1, 2, -1, -2] {
                let a = order1_matrix(n, &pt, &p).unwrap();
                let b = order1_matrix_hbar_oracle(n, &pt, &p, 1e-4).unwrap();
                assert!(
                    linalg::rel_diff(&a, &b, 1e-12).unwrap() < 1e-8,
                    "{kind:?} n={n}"
                );
            }
        }
    }

    #[test]
    fn rank_one_has_no_spin_part() {
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
        let m = order1_matrix(1, &point(3), &p).unwrap();
        assert_eq!(m[(0, 0)], C64::new(0.0, 0.0));
    }
}

//! The SL(2,ℤ) action on (x, p; η, ε, a | τ) and the modular family of equilibria grown from the
//! equally spaced seed.
//!
//! S : (x, p; η, ε, a | τ) ↦ (−x/τ, −τp − (2πiη/ε) Σ_j (|x| − N x_j) e_j; −η/τ, −ε/τ, −a/τ | −1/τ)
//! T : τ ↦ τ + 1, everything else fixed.
//!
//! The momentum shift makes S canonical and cancels the x-dependent phase that the imaginary
//! transformation of θ produces in each A_I γ_I, leaving S·D_n^cl = e^{iπn(N−n)η²/τ} D_n^cl.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::classical::{
    d_classical, equilibrium_report, flow_data, ClassicalParams, EquilibriumReport, PhasePoint,
};
use crate::rmatrix::{ModelParams, RKind};
use crate::{Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// A generator of SL(2,ℤ) or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gen {
    S,
    T,
    SInv,
    TInv,
}

impl Gen {
    pub fn matrix(self) -> [[i64; 2]; 2] {
        match self {
            Gen::S => [[0, -1], [1, 0]],
            Gen::SInv => [[0, 1], [-1, 0]],
            Gen::T => [[1, 1], [0, 1]],
            Gen::TInv => [[1, -1], [0, 1]],
        }
    }

    fn letter(self) -> char {
        match self {
            Gen::S => 'S',
            Gen::T => 'T',
            Gen::SInv => 's',
            Gen::TInv => 't',
        }
    }
}

/// A word in S, T and their inverses, written as a composition: "TS" applies S first, then T.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ModularWord {
    gens: Vec<Gen>,
}

impl ModularWord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn from_gens(gens: Vec<Gen>) -> Self {
        Self { gens }
    }

    /// Generators as written, leftmost first.
    pub fn gens(&self) -> &[Gen] {
        &self.gens
    }

    /// Product of the generator matrices in written order.
    pub fn matrix(&self) -> [[i64; 2]; 2] {
        self.gens
            .iter()
            .fold([[1, 0], [0, 1]], |m, g| mat_mul(m, g.matrix()))
    }

    /// This word repeated k times.
    pub fn pow(&self, k: usize) -> Self {
        Self {
            gens: self
                .gens
                .iter()
                .copied()
                .cycle()
                .take(self.gens.len() * k)
                .collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let inv = |g: &Gen| match g {
            Gen::S => Gen::SInv,
            Gen::SInv => Gen::S,
            Gen::T => Gen::TInv,
            Gen::TInv => Gen::T,
        };
        Self {
            gens: self.gens.iter().rev().map(inv).collect(),
        }
    }
}

fn mat_mul(a: [[i64; 2]; 2], b: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

impl FromStr for ModularWord {
    type Err = Error;
    /// Letters S, T, s (= S⁻¹), t (= T⁻¹); the empty string and "1" denote the identity.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "1" {
            return Ok(Self::identity());
        }
        let gens = s
            .chars()
            .map(|c| match c {
                'S' => Ok(Gen::S),
                'T' => Ok(Gen::T),
                's' => Ok(Gen::SInv),
                't' => Ok(Gen::TInv),
                other => Err(Error::invalid(format!(
                    "modular word may only contain S, T, s, t; found '{other}'"
                ))),
            })
            .collect::<Result<_>>()?;
        Ok(Self { gens })
    }
}

impl fmt::Display for ModularWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.gens.is_empty() {
            return write!(f, "1");
        }
        self.gens
            .iter()
            .try_for_each(|g| write!(f, "{}", g.letter()))
    }
}

/// Everything the modular group acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct ModularData {
    pub x: Vec<C64>,
    pub p: Vec<C64>,
    pub eta: C64,
    pub epsilon: C64,
    pub a: Vec<C64>,
    pub tau: C64,
}

impl ModularData {
    pub fn phase_point(&self) -> Result<PhasePoint> {
        PhasePoint::new(self.x.clone(), self.p.clone())
    }

    pub fn classical_params(&self) -> Result<ClassicalParams> {
        ClassicalParams::new(self.eta, self.epsilon, self.tau)
    }

    /// Largest absolute difference over all components.
    pub fn distance(&self, other: &Self) -> f64 {
        let pairs = self
            .x
            .iter()
            .zip(&other.x)
            .chain(self.p.iter().zip(&other.p))
            .chain(self.a.iter().zip(&other.a))
            .chain([
                (&self.eta, &other.eta),
                (&self.epsilon, &other.epsilon),
                (&self.tau, &other.tau),
            ]);
        pairs.map(|(u, v)| (u - v).norm()).fold(0.0, f64::max)
    }
}

/// Momentum shift term (2πiη/ε)(|x| − N x_j).
fn shift_term(x: &[C64], eta: C64, epsilon: C64, j: usize) -> C64 {
    let total: C64 = x.iter().sum();
    2.0 * PI * I * eta / epsilon * (total - x[j] * x.len() as f64)
}

fn act_gen(g: Gen, d: &ModularData) -> ModularData {
    let n = d.x.len();
    match g {
        Gen::T => ModularData {
            tau: d.tau + 1.0,
            ..d.clone()
        },
        Gen::TInv => ModularData {
            tau: d.tau - 1.0,
            ..d.clone()
        },
        Gen::S => {
            let tau = d.tau;
            ModularData {
                x: d.x.iter().map(|x| -x / tau).collect(),
                p: (0..n)
                    .map(|j| -tau * d.p[j] - shift_term(&d.x, d.eta, d.epsilon, j))
                    .collect(),
                eta: -d.eta / tau,
                epsilon: -d.epsilon / tau,
                a: d.a.iter().map(|a| -a / tau).collect(),
                tau: -tau.inv(),
            }
        }
        Gen::SInv => {
            // undo S: τ = −1/τ′, x = x′/τ′ and η/ε is unchanged
            let tp = d.tau;
            let tau = -tp.inv();
            let x: Vec<C64> = d.x.iter().map(|x| x / tp).collect();
            let p = (0..n)
                .map(|j| -(d.p[j] + shift_term(&x, d.eta, d.epsilon, j)) / tau)
                .collect();
            ModularData {
                x,
                p,
                eta: d.eta / tp,
                epsilon: d.epsilon / tp,
                a: d.a.iter().map(|a| a / tp).collect(),
                tau,
            }
        }
    }
}

/// Apply a word to data: the rightmost generator acts first.
pub fn act(word: &ModularWord, data: &ModularData) -> ModularData {
    word.gens
        .iter()
        .rev()
        .fold(data.clone(), |d, &g| act_gen(g, &d))
}

/// Base parameters of the modular family, before the 1/N rescaling of the seed.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyBase {
    pub eta: C64,
    pub epsilon: C64,
    pub a: Vec<C64>,
    pub omega: C64,
}

/// Seed equilibrium: x_i = i/N, p = 0, with (η, ε, a | τ) = (η, ε, a | ω)/N.
pub fn seed(base: &FamilyBase, n_sites: usize) -> ModularData {
    let nf = n_sites as f64;
    ModularData {
        x: (1..=n_sites)
            .map(|i| C64::new(i as f64 / nf, 0.0))
            .collect(),
        p: vec![C64::new(0.0, 0.0); n_sites],
        eta: base.eta / nf,
        epsilon: base.epsilon / nf,
        a: base.a.iter().map(|a| a / nf).collect(),
        tau: base.omega / nf,
    }
}

/// An equilibrium of the modular family with its transformed parameters and velocities.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalContext {
    pub word: ModularWord,
    pub data: ModularData,
    pub report: EquilibriumReport,
    /// v_{−1}* = ε A_{{i}}(x*; −η) γ_i*⁻¹, the common value for the inverse flow.
    pub v_minus1: C64,
}

impl EvalContext {
    pub fn n_sites(&self) -> usize {
        self.data.x.len()
    }

    /// v_n* for 1 ≤ n ≤ N.
    pub fn velocity(&self, n: usize) -> C64 {
        self.report.velocities[n - 1]
    }

    pub fn phase_point(&self) -> PhasePoint {
        PhasePoint {
            x: self.data.x.clone(),
            p: self.data.p.clone(),
        }
    }

    pub fn classical_params(&self) -> Result<ClassicalParams> {
        self.data.classical_params()
    }

    /// Model parameters at the transformed point; the face kind uses the transformed a.
    pub fn model_params(&self, kind: RKind, r: usize, hbar: C64) -> Result<ModelParams> {
        let a = if kind == RKind::Face {
            self.data.a.clone()
        } else {
            Vec::new()
        };
        ModelParams::new(
            kind,
            r,
            self.n_sites(),
            self.data.eta,
            self.data.epsilon,
            hbar,
            self.data.tau,
            a,
        )
    }
}

/// Apply `word` to the seed and certify the result as an equilibrium.
pub fn build_eval_context(
    word: &ModularWord,
    base: &FamilyBase,
    n_sites: usize,
    tolerance: f64,
) -> Result<EvalContext> {
    if n_sites < 2 {
        return Err(Error::invalid("need at least N = 2 sites"));
    }
    let data = act(word, &seed(base, n_sites));
    let pt = data.phase_point()?;
    let cp = data.classical_params()?;
    let report = equilibrium_report(&pt, &cp, tolerance)?;
    if !report.accepted {
        return Err(Error::Residual {
            name: format!("equilibrium residual for word {word}"),
            value: report.worst(),
            tolerance,
        });
    }
    let back = flow_data(-1, &pt, &cp)?;
    let v_minus1 = -back.velocities.iter().sum::<C64>() / n_sites as f64;
    Ok(EvalContext {
        word: word.clone(),
        data,
        report,
        v_minus1,
    })
}

/// c_n(η) = e^{iπ n(N−n) η²/τ}.
pub fn covariance_factor(n: usize, n_sites: usize, eta: C64, tau: C64) -> C64 {
    (I * PI * (n * (n_sites - n)) as f64 * eta * eta / tau).exp()
}

/// |D_n^cl(g·data) − c·D_n^cl(data)| / |c·D_n^cl(data)| for a generator g, with c = c_n(η) for S
/// and 1 for T.
pub fn modular_covariance_residual(g: Gen, n: usize, data: &ModularData) -> Result<f64> {
    let moved = act_gen(g, data);
    let nn = n as i32;
    let before = d_classical(nn, &data.phase_point()?, &data.classical_params()?)?;
    let after = d_classical(nn, &moved.phase_point()?, &moved.classical_params()?)?;
    let c = match g {
        Gen::S => covariance_factor(n, data.x.len(), data.eta, data.tau),
        Gen::T | Gen::TInv => C64::new(1.0, 0.0),
        Gen::SInv => return Err(Error::invalid("covariance is checked for S and T")),
    };
    Ok((after - c * before).norm() / (c * before).norm().max(1e-300))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn data() -> ModularData {
        ModularData {
            x: vec![c64(0.11, 0.02), c64(0.43, -0.05), c64(0.71, 0.08)],
            p: vec![c64(0.3, -0.1), c64(-0.2, 0.05), c64(0.1, 0.2)],
            eta: c64(0.13, 0.05),
            epsilon: c64(0.7, 0.1),
            a: vec![c64(0.2, 0.1), c64(-0.3, 0.0)],
            tau: c64(0.2, 0.9),
        }
    }

    #[test]
    fn parse_and_display() {
        let w: ModularWord = "TsS".parse().unwrap();
        assert_eq!(w.gens(), &[Gen::T, Gen::SInv, Gen::S]);
        assert_eq!(w.to_string(), "TsS");
        assert_eq!("".parse::<ModularWord>().unwrap(), ModularWord::identity());
        assert!("TX".parse::<ModularWord>().is_err());
    }

    #[test]
    fn matrices_are_in_sl2() {
        for w in ["S", "TS", "SSSS", "STSTST", "tsT"] {
            let m = w.parse::<ModularWord>().unwrap().matrix();
            assert_eq!(m[0][0] * m[1][1] - m[0][1] * m[1][0], 1, "{w}");
        }
        assert_eq!(
            "STSTSTSTSTST".parse::<ModularWord>().unwrap().matrix(),
            [[1, 0], [0, 1]]
        );
    }

    #[test]
    fn inverses_undo_generators() {
        let d = data();
        for w in ["Tt", "tT", "Ss", "sS", "STs"] {
            let w: ModularWord = w.parse().unwrap();
            let back = act(&w.inverse(), &act(&w, &d));
            assert!(back.distance(&d) < 1e-12, "{w}");
        }
        assert!(act(&"Tt".parse().unwrap(), &d).distance(&d) < 1e-15);
    }

    #[test]
    fn s_squared_flips_signs() {
        let d = data();
        let s2 = act(&"SS".parse().unwrap(), &d);
        let flipped = ModularData {
            x: d.x.iter().map(|x| -x).collect(),
            p: d.p.iter().map(|p| -p).collect(),
            eta: -d.eta,
            epsilon: -d.epsilon,
            a: d.a.iter().map(|a| -a).collect(),
            tau: d.tau,
        };
        assert!(s2.distance(&flipped) < 1e-12);
    }

    #[test]
    fn s_maps_seed_to_line_through_minus_one_over_omega() {
        let base = FamilyBase {
            eta: c64(0.3, 0.05),
            epsilon: c64(0.7, 0.0),
            a: vec![],
            omega: c64(0.2, 2.0),
        };
        let n = 4;
        let d = act(&"S".parse().unwrap(), &seed(&base, n));
        for i in 1..=n {
            assert!((d.x[i - 1] + (i as f64) / base.omega).norm() < 1e-14);
            let want = -((n + 1) as f64 - 2.0 * i as f64) * PI * I * base.eta / base.epsilon;
            assert!((d.p[i - 1] - want).norm() < 1e-12);
        }
        assert!((d.eta + base.eta / base.omega).norm() < 1e-15);
        assert!((d.tau + n as f64 / base.omega).norm() < 1e-14);
    }
}

//! Odd Jacobi theta function normalised by θ′(0) = 1, the Kronecker function, and the identities
//! they satisfy.
//!
//! θ(x|τ) = Σ_n (−1)^n p^{n(n+1)} sin((2n+1)πx) / (π Σ_n (−1)^n (2n+1) p^{n(n+1)}), p = e^{iπτ}.
//! Arguments are first reduced into the fundamental parallelogram with the quasiperiodicity
//! relations θ(x+1) = −θ(x), θ(x+τ) = −p⁻¹ e^{−2πix} θ(x), so the series never sees large |Im x|.

use std::f64::consts::PI;
use std::ops::{Div, Mul};

use crate::{c64, Error, Result, C64};

/// Smallest accepted Im τ; below it the nome approaches the unit circle and the series stalls.
pub const MIN_IM_TAU: f64 = 0.1;

/// Relative distance to a zero of θ below which a denominator counts as a pole.
pub const POLE_THRESHOLD: f64 = 1e-12;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Lattice parameter τ with its nome p = e^{iπτ}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    tau: C64,
    nome: C64,
}

impl Lattice {
    pub fn new(tau: C64) -> Result<Self> {
        if !(tau.re.is_finite() && tau.im.is_finite()) {
            return Err(Error::invalid(format!("non-finite tau {tau}")));
        }
        if tau.im <= 0.0 {
            return Err(Error::invalid(format!(
                "Im tau must be positive, got {}",
                tau.im
            )));
        }
        if tau.im < MIN_IM_TAU {
            return Err(Error::invalid(format!(
                "Im tau = {} is below the supported minimum {MIN_IM_TAU}",
                tau.im
            )));
        }
        Ok(Self {
            tau,
            nome: (I * PI * tau).exp(),
        })
    }

    pub fn tau(&self) -> C64 {
        self.tau
    }

    pub fn nome(&self) -> C64 {
        self.nome
    }

    /// The lattice with parameter kτ (the vertex R-matrix needs rτ).
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.tau * k)
    }

    /// Distance-like measure of how close `x` is to a point of ℤ + τℤ, in reduced coordinates.
    pub fn lattice_distance(&self, x: C64) -> f64 {
        let (x0, _, _) = reduce(x, self.tau);
        let mut best = f64::INFINITY;
        for a in -1..=1 {
            for b in -1..=1 {
                best = best.min((x0 - c64(a as f64, 0.0) - self.tau * b as f64).norm());
            }
        }
        best
    }
}

/// θ and θ′ at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaValue {
    pub value: C64,
    pub derivative: C64,
}

/// Value with first and second derivative in one complex variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: C64,
    pub d1: C64,
    pub d2: C64,
}

impl Jet {
    pub fn constant(v: C64) -> Self {
        Self {
            v,
            d1: C64::new(0.0, 0.0),
            d2: C64::new(0.0, 0.0),
        }
    }

    /// Jet of e^{c·u + d} evaluated at u.
    pub fn exp_linear_at(c: C64, d: C64, u: C64) -> Self {
        let v = (c * u + d).exp();
        Self {
            v,
            d1: c * v,
            d2: c * c * v,
        }
    }

    pub fn recip(self) -> Self {
        Jet::constant(C64::new(1.0, 0.0)) / self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let q = self.v / o.v;
        let q1 = (self.d1 - q * o.d1) / o.v;
        let q2 = (self.d2 - 2.0 * q1 * o.d1 - q * o.d2) / o.v;
        Jet {
            v: q,
            d1: q1,
            d2: q2,
        }
    }
}

/// Split x = x0 + kτ + m with x0 in the fundamental parallelogram centred at 0.
fn reduce(x: C64, tau: C64) -> (C64, i64, i64) {
    let k = (x.im / tau.im).round();
    let x1 = x - tau * k;
    let m = x1.re.round();
    (x1 - m, k as i64, m as i64)
}

/// Series for θ, θ′, θ″ at a reduced argument.
fn series(x0: C64, q: C64) -> Jet {
    let mut s0 = C64::new(0.0, 0.0);
    let mut s1 = C64::new(0.0, 0.0);
    let mut s2 = C64::new(0.0, 0.0);
    let mut norm = C64::new(0.0, 0.0);
    let qabs = q.norm();
    let growth = (PI * x0.im.abs()).exp();
    for n in 0..200 {
        let nn = n as f64;
        let e = (nn * (nn + 1.0)) as i32;
        let w = q.powi(e) * if n % 2 == 0 { 1.0 } else { -1.0 };
        let k = (2.0 * nn + 1.0) * PI;
        let arg = x0 * k;
        let (s, c) = (arg.sin(), arg.cos());
        s0 += w * s;
        s1 += w * k * c;
        s2 -= w * k * k * s;
        norm += w * (2.0 * nn + 1.0);
        let bound = qabs.powi(e) * growth.powf(2.0 * nn + 1.0) * k * k;
        let scale = s0.norm() + s1.norm() / PI + s2.norm() / (PI * PI);
        if n > 0 && bound < 1e-18 * scale.max(1e-300) {
            break;
        }
    }
    let d = PI * norm;
    Jet {
        v: s0 / d,
        d1: s1 / d,
        d2: s2 / d,
    }
}

fn check_finite(x: C64) -> Result<()> {
    if x.re.is_finite() && x.im.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("non-finite argument {x}")))
    }
}

/// θ(x|τ) with its first two derivatives in x.
pub fn theta_jet(x: C64, lat: &Lattice) -> Result<Jet> {
    check_finite(x)?;
    let tau = lat.tau;
    let (x0, k, m) = reduce(x, tau);
    let base = series(x0, lat.nome);
    if k == 0 && m == 0 {
        return Ok(base);
    }
    // θ(x0 + kτ + m) = (−1)^{k+m} e^{−iπτk² − 2πik x0} θ(x0)
    let kf = k as f64;
    let sign = if (k + m).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    };
    let c = -2.0 * PI * I * kf;
    let f = ((-I * PI * tau * kf * kf) + c * x0).exp() * sign;
    Ok(Jet {
        v: f * base.v,
        d1: f * (base.d1 + c * base.v),
        d2: f * (base.d2 + 2.0 * c * base.d1 + c * c * base.v),
    })
}

/// θ(x|τ) and θ′(x|τ).
pub fn theta(x: C64, lat: &Lattice) -> Result<ThetaValue> {
    let j = theta_jet(x, lat)?;
    Ok(ThetaValue {
        value: j.v,
        derivative: j.d1,
    })
}

/// θ evaluated as a denominator: errors if x sits on a zero of θ, i.e. on the lattice.
pub fn theta_nonzero(x: C64, lat: &Lattice, what: &str) -> Result<Jet> {
    let j = theta_jet(x, lat)?;
    if j.v.norm() <= POLE_THRESHOLD * j.d1.norm() {
        return Err(Error::Pole {
            what: what.to_string(),
            at: x,
        });
    }
    Ok(j)
}

/// θ′(x)/θ(x).
pub fn log_derivative(x: C64, lat: &Lattice) -> Result<C64> {
    let j = theta_nonzero(x, lat, "theta log-derivative")?;
    Ok(j.d1 / j.v)
}

/// The infinite-product form of θ, evaluated independently of the series (slow; oracle use).
pub fn theta_product(x: C64, lat: &Lattice) -> C64 {
    let q2 = lat.nome * lat.nome;
    let c2 = (x * 2.0 * PI).cos();
    let mut acc = (x * PI).sin() / PI;
    let mut qn = q2;
    for _ in 0..10_000 {
        let one = C64::new(1.0, 0.0);
        let f = (one - qn * c2 * 2.0 + qn * qn) / ((one - qn) * (one - qn));
        acc *= f;
        if (f - one).norm() < 1e-19 {
            break;
        }
        qn *= q2;
    }
    acc
}

/// Unnormalised ϑ₁(z|τ) = 2p^{1/4} Σ (−1)^n p^{n(n+1)} sin((2n+1)z), related by θ(x) = ϑ₁(πx)/(πϑ₁′(0)).
pub fn vartheta1(z: C64, lat: &Lattice) -> Result<C64> {
    Ok(vartheta1_prime0(lat) * PI * theta(z / PI, lat)?.value)
}

fn vartheta1_prime0(lat: &Lattice) -> C64 {
    let q = lat.nome;
    let mut s = C64::new(0.0, 0.0);
    for n in 0..200 {
        let nn = n as f64;
        let t = q.powi((nn * (nn + 1.0)) as i32) * (2.0 * nn + 1.0);
        s += if n % 2 == 0 { t } else { -t };
        if t.norm() < 1e-18 * s.norm() {
            break;
        }
    }
    (I * PI * lat.tau / 4.0).exp() * 2.0 * s
}

/// Residuals of θ(x+1) + θ(x) and θ(x+τ) + p⁻¹e^{−2πix}θ(x).
pub fn theta_quasiperiod_residual(x: C64, lat: &Lattice) -> Result<(C64, C64)> {
    let t = theta(x, lat)?.value;
    let r1 = theta(x + 1.0, lat)?.value + t;
    let r2 = theta(x + lat.tau, lat)?.value + (-2.0 * PI * I * x).exp() / lat.nome * t;
    Ok((r1, r2))
}

/// LHS − RHS of θ(x+y)θ(x−y)θ(z+w)θ(z−w) = θ(x+z)θ(x−z)θ(y+w)θ(y−w) + θ(x+w)θ(x−w)θ(z+y)θ(z−y),
/// together with the largest of the three term magnitudes (for relative comparisons).
pub fn theta_addition_residual(
    x: C64,
    y: C64,
    z: C64,
    w: C64,
    lat: &Lattice,
) -> Result<(C64, f64)> {
    let th = |a: C64| theta(a, lat).map(|t| t.value);
    let lhs = th(x + y)? * th(x - y)? * th(z + w)? * th(z - w)?;
    let r1 = th(x + z)? * th(x - z)? * th(y + w)? * th(y - w)?;
    let r2 = th(x + w)? * th(x - w)? * th(z + y)? * th(z - y)?;
    let scale = lhs.norm().max(r1.norm()).max(r2.norm());
    Ok((lhs - r1 - r2, scale))
}

/// φ(u,v|τ) = θ(u+v)/(θ(u)θ(v)).
pub fn kronecker_phi(u: C64, v: C64, lat: &Lattice) -> Result<C64> {
    let tu = theta_nonzero(u, lat, "kronecker phi first argument")?;
    let tv = theta_nonzero(v, lat, "kronecker phi second argument")?;
    Ok(theta(u + v, lat)?.value / (tu.v * tv.v))
}

/// Residuals of φ(u+1,v) − φ(u,v) and φ(u+τ,v) − e^{−2πiv}φ(u,v), with |φ(u,v)| for scale.
pub fn kronecker_quasiperiod_residual(u: C64, v: C64, lat: &Lattice) -> Result<(C64, C64, f64)> {
    let f = kronecker_phi(u, v, lat)?;
    let r1 = kronecker_phi(u + 1.0, v, lat)? - f;
    let r2 = kronecker_phi(u + lat.tau, v, lat)? - (-2.0 * PI * I * v).exp() * f;
    Ok((r1, r2, f.norm()))
}

/// 1/φ(u,v|τ) = θ(u)θ(v)/θ(u+v) as a jet in u; well defined at u = 0.
pub fn inverse_phi_jet(u: C64, v: C64, lat: &Lattice) -> Result<Jet> {
    let num = theta_jet(u, lat)? * Jet::constant(theta(v, lat)?.value);
    let den = theta_nonzero(u + v, lat, "kronecker phi denominator")?;
    Ok(num / den)
}

/// φ(u+s, v|τ) as a jet in u, for fixed shift s and second argument v.
pub fn phi_jet(u: C64, s: C64, v: C64, lat: &Lattice) -> Result<Jet> {
    let num = theta_jet(u + s + v, lat)?;
    let den = theta_nonzero(u + s, lat, "kronecker phi first argument")?
        * Jet::constant(theta_nonzero(v, lat, "kronecker phi second argument")?.v);
    Ok(num / den)
}

/// Residual of θ(−x/τ | −1/τ) + τ⁻¹ e^{iπx²/τ} θ(x|τ).
///
/// With the normalisation θ′(0)=1 the theta function has modular weight −1, so the prefactor is
/// −1/τ. The unnormalised ϑ₁ carries the prefactor i(−iτ)^{1/2} instead, see
/// [`jacobi_imaginary_residual_vartheta`]; the two differ by the weight of ϑ₁′(0).
pub fn jacobi_imaginary_residual(x: C64, lat: &Lattice) -> Result<C64> {
    let tau = lat.tau;
    let dual = Lattice::new(-tau.inv())?;
    let lhs = theta(-x / tau, &dual)?.value;
    let rhs = -(I * PI * x * x / tau).exp() / tau * theta(x, lat)?.value;
    Ok(lhs - rhs)
}

/// Residual of ϑ₁(−πx/τ | −1/τ) − i(−iτ)^{1/2} e^{iπx²/τ} ϑ₁(πx|τ), principal square root.
///
/// Flipping the branch of the square root flips the sign of the second term.
pub fn jacobi_imaginary_residual_vartheta(x: C64, lat: &Lattice) -> Result<C64> {
    let tau = lat.tau;
    let dual = Lattice::new(-tau.inv())?;
    let lhs = vartheta1(-PI * x / tau, &dual)?;
    let rhs = I * (-I * tau).sqrt() * (I * PI * x * x / tau).exp() * vartheta1(PI * x, lat)?;
    Ok(lhs - rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(re: f64, im: f64) -> Lattice {
        Lattice::new(c64(re, im)).unwrap()
    }

    #[test]
    fn normalisation_at_origin() {
        let t = theta(c64(0.0, 0.0), &lat(0.0, 0.7)).unwrap();
        assert!(t.value.norm() < 1e-16);
        assert!((t.derivative - 1.0).norm() < 1e-14);
    }

    #[test]
    fn trigonometric_limit() {
        let t = theta(c64(0.3, 0.0), &lat(0.0, 5.0)).unwrap().value;
        assert!((t - (0.3 * PI).sin() / PI).norm() < 1e-6);
    }

    #[test]
    fn series_matches_product_after_reduction() {
        let l = lat(0.31, 0.83);
        for &x in &[c64(0.17, 0.05), c64(2.4, -1.3), c64(-3.7, 2.9)] {
            let s = theta(x, &l).unwrap().value;
            let p = theta_product(x, &l);
            assert!(
                (s - p).norm() < 1e-11 * p.norm().max(1.0),
                "{x}: {s} vs {p}"
            );
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let l = lat(-0.2, 0.9);
        let x = c64(0.41, 0.37);
        let h = 1e-3;
        let f = |z: C64| theta(z, &l).unwrap().value;
        let fd = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
        let j = theta_jet(x, &l).unwrap();
        assert!((fd - j.d1).norm() < 1e-9 * j.d1.norm());
        let g = |z: C64| theta(z, &l).unwrap().derivative;
        let fd2 = (g(x - 2.0 * h) - 8.0 * g(x - h) + 8.0 * g(x + h) - g(x + 2.0 * h)) / (12.0 * h);
        assert!((fd2 - j.d2).norm() < 1e-8 * j.d2.norm());
    }

    #[test]
    fn jet_quotient_rule() {
        let a = Jet {
            v: c64(1.0, 2.0),
            d1: c64(0.5, -1.0),
            d2: c64(3.0, 0.1),
        };
        let b = Jet {
            v: c64(-0.3, 0.7),
            d1: c64(2.0, 1.0),
            d2: c64(-1.0, 0.4),
        };
        let back = (a / b) * b;
        assert!((back.v - a.v).norm() < 1e-14);
        assert!((back.d1 - a.d1).norm() < 1e-13);
        assert!((back.d2 - a.d2).norm() < 1e-12);
    }

    #[test]
    fn rejects_small_im_tau() {
        assert!(Lattice::new(c64(0.0, 0.05)).is_err());
        assert!(Lattice::new(c64(0.0, -1.0)).is_err());
    }

    #[test]
    fn pole_detected() {
        let l = lat(0.1, 1.1);
        let err = kronecker_phi(l.tau() + 1.0, c64(0.3, 0.0), &l).unwrap_err();
        assert!(err.is_numerical());
    }

    #[test]
    fn unnormalised_transformation_uses_square_root_prefactor() {
        let l = lat(0.3, 0.9);
        let r = jacobi_imaginary_residual_vartheta(c64(0.23, 0.11), &l).unwrap();
        assert!(r.norm() < 1e-12);
    }
}

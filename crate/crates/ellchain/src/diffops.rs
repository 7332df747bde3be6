//! Difference operators with matrix-valued coefficients, Σ_k C_k(x) Γ^k, where Γ_i shifts
//! x_i ↦ x_i − iħε, and the scalar and spin Ruijsenaars operators.
//!
//! Coefficients always stand to the left of the shifts, so f(x)Γ^k · g(x)Γ^l = f(x)g(x − iħεk)Γ^{k+l}.

use std::sync::Arc;

use nalgebra::DVector;

use crate::classical::a_coefficient;
use crate::linalg::{self, SpinMatrix};
use crate::perm::{p_subset, subsets, Subset};
use crate::rmatrix::ModelParams;
use crate::{Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Matrix-valued coefficient function of the positions.
pub type Coefficient = Arc<dyn Fn(&[C64]) -> Result<SpinMatrix> + Send + Sync>;

/// One monomial C(x) Γ^k.
#[derive(Clone)]
pub struct Term {
    pub shift: Vec<i32>,
    pub coeff: Coefficient,
}

/// A finite sum of monomials.
#[derive(Clone)]
pub struct DiffOperator {
    n_sites: usize,
    dim: usize,
    /// iħε: Γ^k moves x to x − (iħε) k.
    unit: C64,
    terms: Vec<Term>,
}

impl std::fmt::Debug for DiffOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiffOperator")
            .field("n_sites", &self.n_sites)
            .field("dim", &self.dim)
            .field("unit", &self.unit)
            .field(
                "shifts",
                &self.terms.iter().map(|t| &t.shift).collect::<Vec<_>>(),
            )
            .finish()
    }
}

fn shifted(x: &[C64], unit: C64, k: &[i32]) -> Vec<C64> {
    x.iter()
        .zip(k)
        .map(|(&xi, &ki)| xi - unit * ki as f64)
        .collect()
}

impl DiffOperator {
    pub fn new(n_sites: usize, dim: usize, unit: C64) -> Self {
        Self {
            n_sites,
            dim,
            unit,
            terms: Vec::new(),
        }
    }

    /// Empty operator with the metadata of a model: N sites, dim r^N (or 1 if `scalar`), unit iħε.
    pub fn for_model(params: &ModelParams, scalar: bool) -> Self {
        let dim = if scalar { 1 } else { params.dim() };
        Self::new(params.n_sites, dim, I * params.hbar * params.epsilon)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unit(&self) -> C64 {
        self.unit
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn push(&mut self, shift: Vec<i32>, coeff: Coefficient) -> Result<()> {
        if shift.len() != self.n_sites {
            return Err(Error::Dimension(format!(
                "shift of length {} for N = {}",
                shift.len(),
                self.n_sites
            )));
        }
        self.terms.push(Term { shift, coeff });
        Ok(())
    }

    /// The identity operator.
    pub fn identity(n_sites: usize, dim: usize, unit: C64) -> Self {
        let mut op = Self::new(n_sites, dim, unit);
        op.terms.push(Term {
            shift: vec![0; n_sites],
            coeff: Arc::new(move |_| Ok(linalg::identity(dim))),
        });
        op
    }

    /// The pure shift Γ^k.
    pub fn shift_monomial(n_sites: usize, dim: usize, unit: C64, k: Vec<i32>) -> Self {
        let mut op = Self::new(n_sites, dim, unit);
        op.terms.push(Term {
            shift: k,
            coeff: Arc::new(move |_| Ok(linalg::identity(dim))),
        });
        op
    }

    /// Multiplication by f(x)·𝟙.
    pub fn multiplication<F>(n_sites: usize, dim: usize, unit: C64, f: F) -> Self
    where
        F: Fn(&[C64]) -> C64 + Send + Sync + 'static,
    {
        let mut op = Self::new(n_sites, dim, unit);
        op.terms.push(Term {
            shift: vec![0; n_sites],
            coeff: Arc::new(move |x| Ok(linalg::identity(dim) * f(x))),
        });
        op
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n_sites != other.n_sites || self.dim != other.dim || self.unit != other.unit {
            return Err(Error::Dimension(format!(
                "operators on (N={}, dim={}, unit={}) and (N={}, dim={}, unit={})",
                self.n_sites, self.dim, self.unit, other.n_sites, other.dim, other.unit
            )));
        }
        Ok(())
    }

    /// The product self · other.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::new(self.n_sites, self.dim, self.unit);
        let unit = self.unit;
        for a in &self.terms {
            for b in &other.terms {
                let shift: Vec<i32> = a.shift.iter().zip(&b.shift).map(|(p, q)| p + q).collect();
                let (fa, fb, ka) = (a.coeff.clone(), b.coeff.clone(), a.shift.clone());
                out.terms.push(Term {
                    shift,
                    coeff: Arc::new(move |x| Ok(fa(x)? * fb(&shifted(x, unit, &ka))?)),
                });
            }
        }
        Ok(out)
    }

    /// self + c·other.
    pub fn add_scaled(&self, other: &Self, c: C64) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for t in &other.terms {
            let f = t.coeff.clone();
            out.terms.push(Term {
                shift: t.shift.clone(),
                coeff: Arc::new(move |x| Ok(f(x)? * c)),
            });
        }
        Ok(out)
    }

    /// self·other − other·self.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.compose(other)?
            .add_scaled(&other.compose(self)?, C64::new(-1.0, 0.0))
    }

    /// Sum of the coefficients of every monomial with the given shift, at x.
    pub fn coefficient_at(&self, shift: &[i32], x: &[C64]) -> Result<SpinMatrix> {
        let mut m = SpinMatrix::zeros(self.dim, self.dim);
        for t in self.terms.iter().filter(|t| t.shift == shift) {
            m += (t.coeff)(x)?;
        }
        Ok(m)
    }

    /// Distinct shift vectors, sorted.
    pub fn shifts(&self) -> Vec<Vec<i32>> {
        let mut s: Vec<Vec<i32>> = self.terms.iter().map(|t| t.shift.clone()).collect();
        s.sort();
        s.dedup();
        s
    }
}

/// Exponential probe x ↦ exp(Σ_j c_j x_j); closed under shifts.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeFunction {
    pub c: Vec<C64>,
}

impl ProbeFunction {
    pub fn eval(&self, x: &[C64]) -> C64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum::<C64>().exp()
    }
}

/// Σ_k C_k(x0) f(x0 − iħεk) v, with the largest single-term norm (for relative residuals).
pub fn apply_to_probe(
    op: &DiffOperator,
    f: &ProbeFunction,
    spin: &DVector<C64>,
    x0: &[C64],
) -> Result<(DVector<C64>, f64)> {
    check_probe(op, f, spin, x0)?;
    let mut acc = DVector::zeros(op.dim);
    let mut scale: f64 = 0.0;
    for t in &op.terms {
        let c = (t.coeff)(x0)?;
        let term = c * spin * f.eval(&shifted(x0, op.unit, &t.shift));
        scale = scale.max(term.norm());
        acc += term;
    }
    Ok((acc, scale))
}

fn check_probe(
    op: &DiffOperator,
    f: &ProbeFunction,
    spin: &DVector<C64>,
    x0: &[C64],
) -> Result<()> {
    if f.c.len() != op.n_sites || x0.len() != op.n_sites || spin.len() != op.dim {
        return Err(Error::Dimension(
            "probe, point, or spin vector does not match the operator".into(),
        ));
    }
    Ok(())
}

/// ‖[A, B] f v‖ at x0 divided by the largest individual contribution; 0 means commuting.
pub fn commutator_on_probe(
    a: &DiffOperator,
    b: &DiffOperator,
    f: &ProbeFunction,
    spin: &DVector<C64>,
    x0: &[C64],
) -> Result<f64> {
    let (v, scale) = apply_to_probe(&a.commutator(b)?, f, spin, x0)?;
    Ok(if scale == 0.0 { 0.0 } else { v.norm() / scale })
}

/// ‖(A − B) f v‖ at x0 divided by the largest individual contribution.
pub fn difference_on_probe(
    a: &DiffOperator,
    b: &DiffOperator,
    f: &ProbeFunction,
    spin: &DVector<C64>,
    x0: &[C64],
) -> Result<f64> {
    let (v, scale) = apply_to_probe(&a.add_scaled(b, C64::new(-1.0, 0.0))?, f, spin, x0)?;
    Ok(if scale == 0.0 { 0.0 } else { v.norm() / scale })
}

fn check_order(n: i32, n_sites: usize) -> Result<usize> {
    let m = n.unsigned_abs() as usize;
    if m == 0 || m > n_sites {
        return Err(Error::invalid(format!(
            "operator index {n} outside ±1..=±{n_sites}"
        )));
    }
    Ok(m)
}

/// Scalar Ruijsenaars operator: D_n = Σ_{|I|=n} A_I(x) Γ_I, and D_{−n} = Σ_{|I|=n} A_I(x;−η) Γ_I⁻¹.
pub fn build_scalar_d(n: i32, params: &ModelParams) -> Result<DiffOperator> {
    let m = check_order(n, params.n_sites)?;
    let mut op = DiffOperator::for_model(params, true);
    let sign = n.signum();
    let eta = params.eta * sign as f64;
    for s in subsets(m, params.n_sites) {
        let lat = params.lattice;
        let shift = s.indicator().iter().map(|k| k * sign).collect();
        let s2 = s.clone();
        op.push(
            shift,
            Arc::new(move |x| {
                Ok(SpinMatrix::from_element(
                    1,
                    1,
                    a_coefficient(&s2, x, eta, &lat)?,
                ))
            }),
        )?;
    }
    Ok(op)
}

/// Spin Ruijsenaars operator with coefficients pushed to the left:
///
/// D̃_n = Σ_{|I|=n} A_I(x) P_I(x)⁻¹ P_I(x − iħε e_I) Γ_I,
/// D̃_{−n} = Σ_{|I|=n} A_{I^c}(x) P_{I^c}(x)⁻¹ P_{I^c}(x + iħε e_I) Γ_I⁻¹ (= D_N⁻¹ D̃_{N−n}).
pub fn build_spin_d(n: i32, params: &ModelParams) -> Result<DiffOperator> {
    let m = check_order(n, params.n_sites)?;
    let mut op = DiffOperator::for_model(params, false);
    let unit = op.unit;
    for s in subsets(m, params.n_sites) {
        let (braid, shift): (Subset, Vec<i32>) = if n > 0 {
            (s.clone(), s.indicator())
        } else {
            (s.complement(), s.indicator().iter().map(|k| -k).collect())
        };
        let p = Arc::new(params.clone());
        let k = shift.clone();
        op.push(
            shift,
            Arc::new(move |x| {
                let a = a_coefficient(&braid, x, p.eta, &p.lattice)?;
                let here = p_subset(&braid, x, &p)?;
                let there = p_subset(&braid, &shifted(x, unit, &k), &p)?;
                Ok(linalg::inverse(&here)? * there * a)
            }),
        )?;
    }
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::rmatrix::RKind;

    fn params(kind: RKind, r: usize, n: usize) -> ModelParams {
        let a = if kind == RKind::Face {
            vec![c64(0.31, 0.1), c64(-0.2, 0.05)]
        } else {
            vec![]
        };
        ModelParams::new(
            kind,
            r,
            n,
            c64(0.17, 0.04),
            c64(0.8, 0.0),
            c64(0.37, 0.0),
            c64(0.3, 1.1),
            a,
        )
        .unwrap()
    }

    #[test]
    fn gamma_shifts_coefficient_argument() {
        let unit = c64(0.0, 0.3);
        let g = DiffOperator::shift_monomial(2, 1, unit, vec![1, 0]);
        let f = DiffOperator::multiplication(2, 1, unit, |x| x[0] * x[0]);
        let c = g.compose(&f).unwrap();
        let x = [c64(0.5, 0.1), c64(0.2, 0.0)];
        let got = c.coefficient_at(&[1, 0], &x).unwrap()[(0, 0)];
        let want = (x[0] - unit) * (x[0] - unit);
        assert!((got - want).norm() < 1e-15);
    }

    #[test]
    fn top_operator_is_total_shift() {
        let p = params(RKind::Vertex, 2, 3);
        let d = build_spin_d(3, &p).unwrap();
        assert_eq!(d.terms().len(), 1);
        let c = d
            .coefficient_at(&[1, 1, 1], &[c64(0.1, 0.0), c64(0.4, 0.1), c64(0.7, -0.1)])
            .unwrap();
        assert!(linalg::rel_diff(&c, &linalg::identity(8), 1.0).unwrap() < 1e-13);
    }

    #[test]
    fn zero_hbar_gives_scalar_coefficients() {
        let p = params(RKind::Face, 2, 3).with_hbar(c64(0.0, 0.0));
        let x = [c64(0.1, 0.0), c64(0.4, 0.1), c64(0.7, -0.1)];
        let d = build_spin_d(1, &p).unwrap();
        let s = build_scalar_d(1, &p).unwrap();
        for k in d.shifts() {
            let a = s.coefficient_at(&k, &x).unwrap()[(0, 0)];
            let c = d.coefficient_at(&k, &x).unwrap();
            assert!(linalg::rel_diff(&c, &(linalg::identity(8) * a), 1e-300).unwrap() < 1e-13);
        }
    }
}

//! Dense complex matrices on (ℂ^r)^{⊗N}.
//!
//! Basis convention: a basis index b = Σ_k c_k r^{N−k} with colours c_k ∈ 0..r, so site 1 is the
//! slowest-varying tensor index.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::{Error, Result, C64};

/// Dense complex square matrix acting on the spin space.
pub type SpinMatrix = DMatrix<C64>;

/// Largest supported matrix dimension (N = 12 at r = 2).
pub const MAX_DIM: usize = 4096;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// r^N, checked against [`MAX_DIM`].
pub fn space_dim(r: usize, n_sites: usize) -> Result<usize> {
    if r == 0 {
        return Err(Error::invalid("rank r must be at least 1"));
    }
    let mut d: usize = 1;
    for _ in 0..n_sites {
        d = d.checked_mul(r).filter(|&d| d <= MAX_DIM).ok_or_else(|| {
            Error::Dimension(format!(
                "r^N exceeds the dense cap {MAX_DIM} (r={r}, N={n_sites})"
            ))
        })?;
    }
    Ok(d)
}

pub fn identity(dim: usize) -> SpinMatrix {
    SpinMatrix::identity(dim, dim)
}

/// The flip P: a⊗b ↦ b⊗a on ℂ^r ⊗ ℂ^r.
pub fn flip(r: usize) -> SpinMatrix {
    let mut p = SpinMatrix::zeros(r * r, r * r);
    for a in 0..r {
        for b in 0..r {
            p[(b * r + a, a * r + b)] = ONE;
        }
    }
    p
}

/// Colours of a basis index, site 1 first.
pub fn digits(index: usize, r: usize, n_sites: usize) -> Vec<usize> {
    let mut out = vec![0; n_sites];
    let mut b = index;
    for k in (0..n_sites).rev() {
        out[k] = b % r;
        b /= r;
    }
    out
}

/// Occupation counts of colours 0..r among sites 1..i−1 of a basis state.
pub fn weight_of_prefix(index: usize, i: usize, r: usize, n_sites: usize) -> Result<Vec<usize>> {
    let dim = space_dim(r, n_sites)?;
    if index >= dim {
        return Err(Error::invalid(format!(
            "basis index {index} out of range {dim}"
        )));
    }
    if i == 0 || i > n_sites + 1 {
        return Err(Error::invalid(format!(
            "prefix site {i} out of range 1..={}",
            n_sites + 1
        )));
    }
    let d = digits(index, r, n_sites);
    let mut mu = vec![0; r];
    for &c in &d[..i - 1] {
        mu[c] += 1;
    }
    Ok(mu)
}

fn check_site(i: usize, n_sites: usize) -> Result<()> {
    if i == 0 || i + 1 > n_sites {
        return Err(Error::invalid(format!(
            "two-site position {i} out of range 1..{n_sites}"
        )));
    }
    Ok(())
}

/// 𝟙^{⊗(i−1)} ⊗ op ⊗ 𝟙^{⊗(N−i−1)} for an r²×r² matrix `op`.
pub fn embed_two_site(op: &SpinMatrix, i: usize, r: usize, n_sites: usize) -> Result<SpinMatrix> {
    embed_two_site_blockwise(|_| Ok(op.clone()), i, r, n_sites)
}

/// Like [`embed_two_site`], but the two-site factor may depend on the prefix weight of sites
/// 1..i−1 (which the factor leaves untouched, so the result is block diagonal in it).
pub fn embed_two_site_blockwise<F>(
    op_for_weight: F,
    i: usize,
    r: usize,
    n_sites: usize,
) -> Result<SpinMatrix>
where
    F: Fn(&[usize]) -> Result<SpinMatrix>,
{
    check_site(i, n_sites)?;
    let dim = space_dim(r, n_sites)?;
    let inner = r * r;
    let tail = space_dim(r, n_sites - i - 1)?;
    let head = dim / (inner * tail);
    let mut out = SpinMatrix::zeros(dim, dim);
    let mut cache: Vec<(Vec<usize>, SpinMatrix)> = Vec::new();
    for h in 0..head {
        let mu = weight_of_prefix(h * inner * tail, i, r, n_sites)?;
        let idx = match cache.iter().position(|(m, _)| *m == mu) {
            Some(k) => k,
            None => {
                let op = op_for_weight(&mu)?;
                if op.nrows() != inner || op.ncols() != inner {
                    return Err(Error::Dimension(format!(
                        "two-site factor is {}x{}, expected {inner}x{inner}",
                        op.nrows(),
                        op.ncols()
                    )));
                }
                cache.push((mu, op));
                cache.len() - 1
            }
        };
        let op = &cache[idx].1;
        for a in 0..inner {
            for b in 0..inner {
                let v = op[(a, b)];
                if v == ZERO {
                    continue;
                }
                for t in 0..tail {
                    let row = (h * inner + a) * tail + t;
                    let col = (h * inner + b) * tail + t;
                    out[(row, col)] = v;
                }
            }
        }
    }
    Ok(out)
}

pub fn frobenius(a: &SpinMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ‖AB − BA‖_F / (‖A‖_F ‖B‖_F); zero if either factor vanishes.
pub fn comm_norm(a: &SpinMatrix, b: &SpinMatrix) -> Result<f64> {
    same_shape(a, b)?;
    let na = frobenius(a);
    let nb = frobenius(b);
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok(frobenius(&(a * b - b * a)) / (na * nb))
}

/// ‖A − B‖_F / max(‖A‖_F, ‖B‖_F, floor).
pub fn rel_diff(a: &SpinMatrix, b: &SpinMatrix, floor: f64) -> Result<f64> {
    same_shape(a, b)?;
    Ok(frobenius(&(a - b)) / frobenius(a).max(frobenius(b)).max(floor))
}

fn same_shape(a: &SpinMatrix, b: &SpinMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!(
            "{:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// Inverse via LU; errors if the matrix is numerically singular.
pub fn inverse(a: &SpinMatrix) -> Result<SpinMatrix> {
    a.clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("matrix is not invertible".into()))
}

/// Pauli matrices σ⁰ = 𝟙, σ^x, σ^y, σ^z.
pub fn pauli(k: usize) -> SpinMatrix {
    let i = C64::new(0.0, 1.0);
    let m = match k {
        0 => [ONE, ZERO, ZERO, ONE],
        1 => [ZERO, ONE, ONE, ZERO],
        2 => [ZERO, -i, i, ZERO],
        _ => [ONE, ZERO, ZERO, -ONE],
    };
    SpinMatrix::from_row_slice(2, 2, &m)
}

/// Complex Schur form A = Q T Q*. The QR iteration can stall on exactly block-structured input
/// (ice-rule sparsity), so on failure it is retried on a fixed unitary rotation of A.
fn schur(a: &SpinMatrix) -> Result<(SpinMatrix, SpinMatrix)> {
    let n = a.nrows();
    let iters = 300 * n.max(1);
    for (attempt, eps) in [f64::EPSILON, 4.0 * f64::EPSILON, 16.0 * f64::EPSILON]
        .into_iter()
        .enumerate()
    {
        let u = if attempt == 0 {
            identity(n)
        } else {
            rotation(n, attempt as u32)
        };
        let b = u.adjoint() * a * &u;
        if let Some(s) = nalgebra::Schur::try_new(b, eps, iters) {
            let (q, t) = s.unpack();
            return Ok((u * q, t));
        }
    }
    Err(Error::Degenerate("Schur iteration did not converge".into()))
}

/// A fixed dense unitary, different for each `attempt`.
fn rotation(n: usize, attempt: u32) -> SpinMatrix {
    let g = SpinMatrix::from_fn(n, n, |i, j| {
        let t = (attempt * 7919) as f64 + (i * n + j) as f64 * 0.618_033_988_749_895;
        C64::new((t * 12.9898).sin(), (t * 78.233).cos())
    });
    g.qr().q()
}

/// Eigenvalues and right eigenvectors (columns of V) from the complex Schur form.
pub fn eigen(a: &SpinMatrix) -> Result<(Vec<C64>, SpinMatrix)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Dimension("eigen needs a square matrix".into()));
    }
    if n > MAX_DIM {
        return Err(Error::Dimension(format!("dimension {n} exceeds {MAX_DIM}")));
    }
    let (q, t) = schur(a)?;
    let lambdas: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let scale = frobenius(&t).max(1e-300);
    let mut y = SpinMatrix::zeros(n, n);
    for k in 0..n {
        y[(k, k)] = ONE;
        for j in (0..k).rev() {
            let mut s = ZERO;
            for l in j + 1..=k {
                s += t[(j, l)] * y[(l, k)];
            }
            let mut d = t[(j, j)] - lambdas[k];
            if d.norm() < 1e-14 * scale {
                d = C64::new(1e-14 * scale, 0.0);
            }
            y[(j, k)] = -s / d;
        }
    }
    let mut v = q * y;
    for mut col in v.column_iter_mut() {
        let nrm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            col.iter_mut().for_each(|z| *z /= nrm);
        }
    }
    Ok((lambdas, v))
}

pub fn eigenvalues(a: &SpinMatrix) -> Result<Vec<C64>> {
    Ok(eigen(a)?.0)
}

/// Matrix exponential (Padé with scaling and squaring).
pub fn expm(a: &SpinMatrix) -> SpinMatrix {
    a.clone().exp()
}

/// Write `dim` as little-endian u64, then the entries row-major as (re, im) f64 pairs.
pub fn write_bin<W: Write>(mut w: W, a: &SpinMatrix) -> std::io::Result<()> {
    let n = a.nrows();
    w.write_all(&(n as u64).to_le_bytes())?;
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Inverse of [`write_bin`].
pub fn read_bin<R: Read>(mut r: R) -> Result<SpinMatrix> {
    let io = |e: std::io::Error| Error::invalid(format!("binary matrix: {e}"));
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8).map_err(io)?;
    let n = u64::from_le_bytes(b8) as usize;
    if n > MAX_DIM {
        return Err(Error::Dimension(format!(
            "stored dimension {n} exceeds {MAX_DIM}"
        )));
    }
    let mut out = SpinMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            r.read_exact(&mut b8).map_err(io)?;
            let re = f64::from_le_bytes(b8);
            r.read_exact(&mut b8).map_err(io)?;
            let im = f64::from_le_bytes(b8);
            out[(i, j)] = C64::new(re, im);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn flip_at_two_sites_swaps_01_and_10() {
        let p = embed_two_site(&flip(2), 1, 2, 2).unwrap();
        assert_eq!(p[(1, 2)], ONE);
        assert_eq!(p[(2, 1)], ONE);
        assert_eq!(p[(0, 0)], ONE);
        assert_eq!(p[(3, 3)], ONE);
        assert_eq!(p[(1, 1)], ZERO);
    }

    #[test]
    fn plain_flips_satisfy_braid_relation() {
        let p1 = embed_two_site(&flip(2), 1, 2, 3).unwrap();
        let p2 = embed_two_site(&flip(2), 2, 2, 3).unwrap();
        assert_eq!(&p1 * &p2 * &p1, &p2 * &p1 * &p2);
    }

    #[test]
    fn prefix_weights() {
        // |0,1,0> is index 2 for r = 2, N = 3
        assert_eq!(weight_of_prefix(2, 3, 2, 3).unwrap(), vec![1, 1]);
        assert_eq!(weight_of_prefix(5, 1, 2, 3).unwrap(), vec![0, 0]);
        assert!(weight_of_prefix(8, 1, 2, 3).is_err());
    }

    #[test]
    fn pauli_commutator_norm() {
        let v = comm_norm(&pauli(1), &pauli(3)).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-15);
        let a = pauli(1).kronecker(&pauli(0));
        let b = pauli(0).kronecker(&pauli(3));
        assert_eq!(comm_norm(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn dimension_cap() {
        assert!(space_dim(2, 12).is_ok());
        assert!(space_dim(2, 13).is_err());
    }

    #[test]
    fn eigen_reconstructs() {
        let a = SpinMatrix::from_fn(6, 6, |i, j| {
            c64(
                (i * 7 + j * 3) as f64 % 5.0 - 2.0,
                (i as f64 - j as f64) * 0.3,
            )
        });
        let (l, v) = eigen(&a).unwrap();
        let d = SpinMatrix::from_diagonal(&nalgebra::DVector::from_vec(l));
        let back = &v * d * inverse(&v).unwrap();
        assert!(rel_diff(&back, &a, 1.0).unwrap() < 1e-9);
    }

    #[test]
    fn binary_round_trip() {
        let a = SpinMatrix::from_fn(4, 4, |i, j| c64(i as f64 - 0.5, j as f64 * 1e-3));
        let mut buf = Vec::new();
        write_bin(&mut buf, &a).unwrap();
        assert_eq!(buf.len(), 8 + 16 * 16);
        assert_eq!(read_bin(buf.as_slice()).unwrap(), a);
    }
}

//! Permutations, reduced words, and the products of deformed permutations P_w(x), P_I(x).
//!
//! A word j_1..j_ℓ stands for w = s_{j_1} ∘ ⋯ ∘ s_{j_ℓ}. In P_w(x) the rightmost letter is the
//! first crossing: the inhomogeneities start as x, each crossing at (j, j+1) contributes the
//! factor P_{j,j+1}(y_j − y_{j+1}) and then swaps y_j and y_{j+1}; later crossings multiply on
//! the left. The line starting at position k ends at position w(k).

use crate::linalg::{self, SpinMatrix};
use crate::rmatrix::{deformed_permutation, ModelParams};
use crate::{Error, Result, C64};

/// A permutation of {1..N} in one-line notation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn new(one_line: Vec<usize>) -> Result<Self> {
        let n = one_line.len();
        let mut seen = vec![false; n];
        for &v in &one_line {
            if v == 0 || v > n || seen[v - 1] {
                return Err(Error::invalid(format!(
                    "{one_line:?} is not a permutation of 1..={n}"
                )));
            }
            seen[v - 1] = true;
        }
        Ok(Self(one_line))
    }

    pub fn identity(n: usize) -> Self {
        Self((1..=n).collect())
    }

    /// s_{j_1} ∘ ⋯ ∘ s_{j_ℓ}.
    pub fn from_word(word: &[usize], n: usize) -> Result<Self> {
        let mut w = Self::identity(n);
        for &j in word {
            check_letter(j, n)?;
            // right multiplication by s_j swaps positions j, j+1 of the one-line notation
            w.0.swap(j - 1, j);
        }
        Ok(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn one_line(&self) -> &[usize] {
        &self.0
    }

    /// w(k) for 1-based k.
    pub fn apply(&self, k: usize) -> usize {
        self.0[k - 1]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (k, &v) in self.0.iter().enumerate() {
            inv[v - 1] = k + 1;
        }
        Self(inv)
    }

    /// Number of inversions, the length of any reduced word.
    pub fn inversions(&self) -> usize {
        let w = &self.0;
        (0..w.len())
            .map(|a| (a + 1..w.len()).filter(|&b| w[a] > w[b]).count())
            .sum()
    }

    /// Canonical reduced word: repeatedly strip the leftmost right descent.
    pub fn reduced_word(&self) -> Vec<usize> {
        let mut w = self.0.clone();
        let mut word = Vec::new();
        while let Some(j) = (0..w.len().saturating_sub(1)).find(|&j| w[j] > w[j + 1]) {
            word.push(j + 1);
            w.swap(j, j + 1);
        }
        word.reverse();
        word
    }

    /// A second reduced word: repeatedly strip the largest left descent.
    pub fn reduced_word_alt(&self) -> Vec<usize> {
        let mut w = self.inverse().0;
        let mut word = Vec::new();
        // left descents of w are right descents of w⁻¹
        while let Some(j) = (0..w.len().saturating_sub(1))
            .rev()
            .find(|&j| w[j] > w[j + 1])
        {
            word.push(j + 1);
            w.swap(j, j + 1);
        }
        word
    }

    /// Every reduced word (exponential in ℓ; meant for N ≤ 5).
    pub fn all_reduced_words(&self) -> Vec<Vec<usize>> {
        fn go(w: &mut Vec<usize>, suffix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            let descents: Vec<usize> = (0..w.len().saturating_sub(1))
                .filter(|&j| w[j] > w[j + 1])
                .collect();
            if descents.is_empty() {
                let mut word = suffix.clone();
                word.reverse();
                out.push(word);
                return;
            }
            for j in descents {
                w.swap(j, j + 1);
                suffix.push(j + 1);
                go(w, suffix, out);
                suffix.pop();
                w.swap(j, j + 1);
            }
        }
        let mut out = Vec::new();
        go(&mut self.0.clone(), &mut Vec::new(), &mut out);
        out
    }
}

/// All permutations of {1..n} in lexicographic order.
pub fn all_perms(n: usize) -> Vec<Perm> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Perm>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(Perm(prefix.clone()));
            return;
        }
        for v in 1..=n {
            if !used[v - 1] {
                used[v - 1] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v - 1] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn check_letter(j: usize, n: usize) -> Result<()> {
    if j == 0 || j >= n {
        return Err(Error::invalid(format!("letter s_{j} outside 1..{n}")));
    }
    Ok(())
}

/// A strictly increasing subset I ⊆ {1..N}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset {
    items: Vec<usize>,
    n_sites: usize,
}

impl Subset {
    pub fn new(items: Vec<usize>, n_sites: usize) -> Result<Self> {
        if items.windows(2).any(|p| p[0] >= p[1])
            || items.first().is_some_and(|&i| i == 0)
            || items.last().is_some_and(|&i| i > n_sites)
        {
            return Err(Error::invalid(format!(
                "{items:?} is not an increasing subset of 1..={n_sites}"
            )));
        }
        Ok(Self { items, n_sites })
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn contains(&self, i: usize) -> bool {
        self.items.binary_search(&i).is_ok()
    }

    pub fn complement(&self) -> Self {
        Self {
            items: (1..=self.n_sites).filter(|&i| !self.contains(i)).collect(),
            n_sites: self.n_sites,
        }
    }

    /// Indicator vector e_I.
    pub fn indicator(&self) -> Vec<i32> {
        (1..=self.n_sites)
            .map(|i| self.contains(i) as i32)
            .collect()
    }
}

/// All subsets of size n of {1..N}, in lexicographic order.
pub fn subsets(n: usize, n_sites: usize) -> Vec<Subset> {
    fn go(start: usize, n: usize, n_sites: usize, cur: &mut Vec<usize>, out: &mut Vec<Subset>) {
        if cur.len() == n {
            out.push(Subset {
                items: cur.clone(),
                n_sites,
            });
            return;
        }
        for i in start..=n_sites {
            cur.push(i);
            go(i + 1, n, n_sites, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, n, n_sites, &mut Vec::new(), &mut out);
    out
}

/// The Grassmannian permutation w_I: k ↦ i_k for k ≤ |I|, order preserving on the rest.
pub fn grassmannian(subset: &Subset) -> Perm {
    let mut w = subset.items.clone();
    w.extend(subset.complement().items);
    Perm(w)
}

/// One factor P_{site,site+1}(x_a − x_b) of an ordered product (0-based a, b).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Crossing {
    pub site: usize,
    pub a: usize,
    pub b: usize,
}

impl Crossing {
    pub fn argument(&self, x: &[C64]) -> C64 {
        x[self.a] - x[self.b]
    }

    /// ∂(x_a − x_b)/∂x_i for 0-based i.
    pub fn slope(&self, i: usize) -> f64 {
        (i == self.a) as i32 as f64 - (i == self.b) as i32 as f64
    }
}

/// The factors of P_w for the word, left to right, with inhomogeneities carried by the lines.
pub fn crossings(word: &[usize], n_sites: usize) -> Result<Vec<Crossing>> {
    let mut y: Vec<usize> = (0..n_sites).collect();
    let mut out = Vec::with_capacity(word.len());
    for &j in word.iter().rev() {
        check_letter(j, n_sites)?;
        out.push(Crossing {
            site: j,
            a: y[j - 1],
            b: y[j],
        });
        y.swap(j - 1, j);
    }
    out.reverse();
    Ok(out)
}

fn check_coords(x: &[C64], params: &ModelParams) -> Result<()> {
    if x.len() != params.n_sites {
        return Err(Error::Dimension(format!(
            "{} coordinates for N = {}",
            x.len(),
            params.n_sites
        )));
    }
    Ok(())
}

/// Product of the factors in order.
pub fn product(factors: &[Crossing], x: &[C64], params: &ModelParams) -> Result<SpinMatrix> {
    check_coords(x, params)?;
    let mut m = linalg::identity(params.dim());
    for c in factors {
        let f = deformed_permutation(c.site, c.argument(x), params).map_err(|e| match e {
            Error::Pole { what, at } => Error::Pole {
                what: format!(
                    "{what} in P_{{{},{}}}(x_{} - x_{})",
                    c.site,
                    c.site + 1,
                    c.a + 1,
                    c.b + 1
                ),
                at,
            },
            other => other,
        })?;
        m *= f;
    }
    Ok(m)
}

/// P_w(x) along a given reduced word of w.
pub fn p_word(word: &[usize], x: &[C64], params: &ModelParams) -> Result<SpinMatrix> {
    product(&crossings(word, params.n_sites)?, x, params)
}

/// P_w(x) along the canonical reduced word.
pub fn p_w(w: &Perm, x: &[C64], params: &ModelParams) -> Result<SpinMatrix> {
    if w.len() != params.n_sites {
        return Err(Error::Dimension(format!(
            "permutation of {} for N = {}",
            w.len(),
            params.n_sites
        )));
    }
    p_word(&w.reduced_word(), x, params)
}

/// Factors of P_I = P_{w_I⁻¹}.
pub fn subset_crossings(subset: &Subset) -> Result<Vec<Crossing>> {
    crossings(
        &grassmannian(subset).inverse().reduced_word(),
        subset.n_sites,
    )
}

/// P_I(x) := P_{w_I⁻¹}(x).
pub fn p_subset(subset: &Subset, x: &[C64], params: &ModelParams) -> Result<SpinMatrix> {
    product(&subset_crossings(subset)?, x, params)
}

/// P_{−I}(x) := P_{I^c}(x).
pub fn p_neg_subset(subset: &Subset, x: &[C64], params: &ModelParams) -> Result<SpinMatrix> {
    p_subset(&subset.complement(), x, params)
}

/// P_{(k..l)}(x) = P_{k,k+1}(x_k − x_l) ⋯ P_{l−1,l}(x_{l−1} − x_l) for 1-based k ≤ l.
pub fn p_chain(k: usize, l: usize, x: &[C64], params: &ModelParams) -> Result<SpinMatrix> {
    product(&chain_crossings(k, l), x, params)
}

pub fn chain_crossings(k: usize, l: usize) -> Vec<Crossing> {
    (k..l)
        .map(|m| Crossing {
            site: m,
            a: m - 1,
            b: l - 1,
        })
        .collect()
}

/// The matrix of the undeformed action of w on (ℂ^r)^{⊗N}: product of plain flips along a word.
pub fn plain_permutation(w: &Perm, r: usize) -> Result<SpinMatrix> {
    let n = w.len();
    let mut m = linalg::identity(linalg::space_dim(r, n)?);
    for j in w.reduced_word() {
        m *= linalg::embed_two_site(&linalg::flip(r), j, r, n)?;
    }
    Ok(m)
}

/// ‖P_w(x) P_{w⁻¹}(y) − 1‖ / √dim with y_k = x_{w⁻¹(k)}: the diagram of w read upside down.
pub fn inverse_identity_residual(w: &Perm, x: &[C64], params: &ModelParams) -> Result<f64> {
    let winv = w.inverse();
    let y: Vec<C64> = (1..=w.len()).map(|k| x[winv.apply(k) - 1]).collect();
    let prod = p_w(w, x, params)? * p_w(&winv, &y, params)?;
    let d = prod.nrows();
    Ok(linalg::frobenius(&(prod - linalg::identity(d))) / (d as f64).sqrt())
}

/// Largest difference between P_w built from any reduced word of w and from the canonical one.
pub fn reduced_word_spread(w: &Perm, x: &[C64], params: &ModelParams) -> Result<f64> {
    let reference = p_w(w, x, params)?;
    let mut worst: f64 = 0.0;
    for word in w.all_reduced_words() {
        worst = worst.max(linalg::rel_diff(
            &p_word(&word, x, params)?,
            &reference,
            1.0,
        )?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::rmatrix::RKind;

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
    fn inverse_and_word_independence_in_s3() {
        for kind in [RKind::Vertex, RKind::Face] {
            let p = params(kind, 3);
            let x = [c64(0.11, 0.02), c64(0.43, -0.05), c64(0.71, 0.08)];
            for w in all_perms(3) {
                assert!(inverse_identity_residual(&w, &x, &p).unwrap() < 1e-12);
                assert!(reduced_word_spread(&w, &x, &p).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn grassmannian_examples() {
        let i = Subset::new(vec![2, 4], 4).unwrap();
        assert_eq!(grassmannian(&i).one_line(), &[2, 4, 1, 3]);
        let i = Subset::new(vec![1, 2], 4).unwrap();
        assert_eq!(grassmannian(&i), Perm::identity(4));
        // w_{{i}} is the cycle (i i−1 … 1): 1 ↦ i, k ↦ k−1 otherwise below i
        let i = Subset::new(vec![3], 4).unwrap();
        assert_eq!(grassmannian(&i).one_line(), &[3, 1, 2, 4]);
    }

    #[test]
    fn reduced_words_have_inversion_length_and_reproduce_w() {
        for w in all_perms(4) {
            for word in [w.reduced_word(), w.reduced_word_alt()] {
                assert_eq!(word.len(), w.inversions());
                assert_eq!(Perm::from_word(&word, 4).unwrap(), w);
            }
            for word in w.all_reduced_words() {
                assert_eq!(Perm::from_word(&word, 4).unwrap(), w);
            }
        }
        // the longest element of S_4 has 16 reduced words
        assert_eq!(
            Perm::new(vec![4, 3, 2, 1])
                .unwrap()
                .all_reduced_words()
                .len(),
            16
        );
    }

    #[test]
    fn identity_and_transposition() {
        let p = params(RKind::Vertex, 3);
        let x = [c64(0.1, 0.02), c64(0.45, -0.03), c64(0.77, 0.05)];
        let e = p_w(&Perm::identity(3), &x, &p).unwrap();
        assert_eq!(e, linalg::identity(8));
        let s2 = Perm::from_word(&[2], 3).unwrap();
        let direct = deformed_permutation(2, x[1] - x[2], &p).unwrap();
        assert_eq!(p_w(&s2, &x, &p).unwrap(), direct);
    }

    #[test]
    fn single_site_subset_is_chain() {
        let p = params(RKind::Face, 4);
        let x = [
            c64(0.1, 0.02),
            c64(0.45, -0.03),
            c64(0.77, 0.05),
            c64(0.31, -0.11),
        ];
        for i in 1..=4 {
            let s = Subset::new(vec![i], 4).unwrap();
            let a = p_subset(&s, &x, &p).unwrap();
            let b = p_chain(1, i, &x, &p).unwrap();
            assert!(linalg::rel_diff(&a, &b, 1.0).unwrap() < 1e-14);
        }
    }

    #[test]
    fn chain_crossings_for_subset_ends() {
        let s = Subset::new(vec![3], 3).unwrap();
        assert_eq!(
            subset_crossings(&s).unwrap(),
            vec![
                Crossing {
                    site: 1,
                    a: 0,
                    b: 2
                },
                Crossing {
                    site: 2,
                    a: 1,
                    b: 2
                }
            ]
        );
    }
}

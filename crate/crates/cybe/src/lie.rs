//! Finite-dimensional simple Lie algebras over the rationals.
//!
//! An algebra is stored by its structure constants `c[a][b][g]` with
//! `[I_a, I_b] = sum_g c[a][b][g] I_g`, together with the Killing form
//! `kappa(a, b) = tr(ad a . ad b)` and its inverse. Loading validates
//! antisymmetry, the Jacobi identity, non-degeneracy of the Killing form
//! and ad-invariance, all in exact arithmetic.
//!
//! The Casimir element is built from dual bases, `Omega = sum_{a,b}
//! (kappa^{-1})_{ab} I_a (x) I_b`, which is equal to the orthonormal-basis
//! Casimir but stays inside the rationals.
//!
//! Built-in sl(n) uses a frozen basis order: `e_{ij}` for `i < j` in
//! lexicographic order, then `h_i = e_{ii} - e_{i+1,i+1}` for
//! `i = 1..n-1`, then `e_{ij}` for `i > j` in lexicographic order.
//! For sl(2) this reads `(e, h, f)`. The default triangular decomposition
//! `n_+ (+) h (+) n_-` is exactly this basis partition.

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::rat::{rint, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LieError {
    #[error("structure constants violate antisymmetry at ({0}, {1}, {2})")]
    Antisymmetry(usize, usize, usize),
    #[error("Jacobi identity fails at basis triple ({0}, {1}, {2})")]
    JacobiViolation(usize, usize, usize),
    #[error("Killing form is degenerate")]
    KillingDegenerate,
    #[error("bad rank {0} for built-in algebra (need >= 2)")]
    BadRank(usize),
    #[error("element dimension {found} does not match algebra dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid triangular decomposition: {0}")]
    BadDecomposition(String),
}

/// Element of the algebra as a coefficient vector over the fixed basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GElement {
    pub coeffs: Vec<Rat>,
}

impl GElement {
    pub fn zero(dim: usize) -> Self {
        GElement {
            coeffs: vec![Rat::zero(); dim],
        }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut e = Self::zero(dim);
        e.coeffs[index] = rint(1);
        e
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rat::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        GElement {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        GElement {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        GElement {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        GElement {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

/// Tensor in `g (x) g`, stored sparsely as `sum t[(a,b)] I_a (x) I_b`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Tensor2 {
    entries: BTreeMap<(usize, usize), Rat>,
}

impl Tensor2 {
    pub fn zero() -> Self {
        Tensor2::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = ((usize, usize), Rat)>) -> Self {
        let mut t = Tensor2::zero();
        for (key, value) in entries {
            t.add_to(key, value);
        }
        t
    }

    /// `a (x) b` for coefficient vectors.
    pub fn pure(a: &GElement, b: &GElement) -> Self {
        let mut t = Tensor2::zero();
        for (i, ai) in a.coeffs.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.coeffs.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                t.add_to((i, j), ai * bj);
            }
        }
        t
    }

    pub fn get(&self, a: usize, b: usize) -> Rat {
        self.entries.get(&(a, b)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add_to(&mut self, key: (usize, usize), value: Rat) {
        if value.is_zero() {
            return;
        }
        let slot = self.entries.entry(key).or_insert_with(Rat::zero);
        *slot += value;
        if slot.is_zero() {
            self.entries.remove(&key);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Rat)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut t = self.clone();
        for (key, value) in other.iter() {
            t.add_to(*key, value.clone());
        }
        t
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut t = self.clone();
        for (key, value) in other.iter() {
            t.add_to(*key, -value.clone());
        }
        t
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Tensor2::zero();
        }
        Tensor2 {
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (*k, v * c))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Tensor2 {
            entries: self.entries.iter().map(|(k, v)| (*k, -v)).collect(),
        }
    }

    /// Leg swap `tau(a (x) b) = b (x) a`.
    pub fn transpose(&self) -> Self {
        Tensor2 {
            entries: self
                .entries
                .iter()
                .map(|(&(a, b), v)| ((b, a), v.clone()))
                .collect(),
        }
    }

    /// The second-leg expansion: coefficient of `I_b` as an element of g,
    /// i.e. `t = sum_b column(b) (x) I_b`.
    pub fn second_leg_coefficient(&self, dim: usize, b: usize) -> GElement {
        let mut g = GElement::zero(dim);
        for (&(i, j), v) in self.entries.iter() {
            if j == b {
                g.coeffs[i] += v;
            }
        }
        g
    }
}

/// A simple Lie algebra with validated structure data.
#[derive(Debug, Clone)]
pub struct LieAlgebra {
    pub dim: usize,
    pub basis_labels: Vec<String>,
    /// `constants[a][b]` is the sparse expansion of `[I_a, I_b]`.
    constants: Vec<Vec<Vec<(usize, Rat)>>>,
    killing: Vec<Vec<Rat>>,
    killing_inverse: Vec<Vec<Rat>>,
    /// Default triangular decomposition (basis index partition), when known.
    triangular: Option<TriangularDecomposition>,
}

/// Basis partition `g = n_+ (+) h (+) n_-` by index sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangularDecomposition {
    pub plus: Vec<usize>,
    pub cartan: Vec<usize>,
    pub minus: Vec<usize>,
}

impl LieAlgebra {
    /// Built-in sl(n), n >= 2, in the frozen basis order documented above.
    pub fn sl(rank: usize) -> Result<Self, LieError> {
        if rank < 2 {
            return Err(LieError::BadRank(rank));
        }
        let n = rank;
        // Basis as traceless n x n matrices.
        let mut mats: Vec<Vec<Vec<Rat>>> = Vec::new();
        let mut labels = Vec::new();
        let mut plus = Vec::new();
        let mut cartan = Vec::new();
        let mut minus = Vec::new();
        let zero_mat = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                if i < j {
                    let mut m = zero_mat.clone();
                    m[i][j] = rint(1);
                    plus.push(mats.len());
                    labels.push(format!("e{}{}", i + 1, j + 1));
                    mats.push(m);
                }
            }
        }
        for i in 0..n - 1 {
            let mut m = zero_mat.clone();
            m[i][i] = rint(1);
            m[i + 1][i + 1] = rint(-1);
            cartan.push(mats.len());
            labels.push(format!("h{}", i + 1));
            mats.push(m);
        }
        for i in 0..n {
            for j in 0..n {
                if i > j {
                    let mut m = zero_mat.clone();
                    m[i][j] = rint(1);
                    minus.push(mats.len());
                    labels.push(format!("e{}{}", i + 1, j + 1));
                    mats.push(m);
                }
            }
        }
        let dim = mats.len();
        debug_assert_eq!(dim, n * n - 1);

        let commutator = |a: &Vec<Vec<Rat>>, b: &Vec<Vec<Rat>>| -> Vec<Vec<Rat>> {
            let mut c = vec![vec![Rat::zero(); n]; n];
            for i in 0..n {
                for j in 0..n {
                    let mut v = Rat::zero();
                    for k in 0..n {
                        v += &a[i][k] * &b[k][j] - &b[i][k] * &a[k][j];
                    }
                    c[i][j] = v;
                }
            }
            c
        };
        // Expand a traceless matrix over the basis: off-diagonal entries map
        // directly to e_{ij}; the diagonal d expands over h_i with the
        // partial sums d_1 + ... + d_i.
        let expand = |m: &Vec<Vec<Rat>>| -> Vec<(usize, Rat)> {
            let mut out = Vec::new();
            for (idx, _) in mats.iter().enumerate() {
                let _ = idx;
            }
            let mut pos = 0usize;
            for i in 0..n {
                for j in 0..n {
                    if i < j {
                        if !m[i][j].is_zero() {
                            out.push((pos, m[i][j].clone()));
                        }
                        pos += 1;
                    }
                }
            }
            let mut partial = Rat::zero();
            for i in 0..n - 1 {
                partial += &m[i][i];
                if !partial.is_zero() {
                    out.push((pos, partial.clone()));
                }
                pos += 1;
            }
            for i in 0..n {
                for j in 0..n {
                    if i > j {
                        if !m[i][j].is_zero() {
                            out.push((pos, m[i][j].clone()));
                        }
                        pos += 1;
                    }
                }
            }
            out
        };

        let mut tensor = vec![vec![vec![Rat::zero(); dim]; dim]; dim];
        for a in 0..dim {
            for b in 0..dim {
                let c = commutator(&mats[a], &mats[b]);
                for (g, v) in expand(&c) {
                    tensor[a][b][g] = v;
                }
            }
        }
        let mut algebra = Self::from_dense_constants(tensor, Some(labels))?;
        algebra.triangular = Some(TriangularDecomposition {
            plus,
            cartan,
            minus,
        });
        Ok(algebra)
    }

    /// Loads an algebra from a dense constant tensor, verifying all
    /// invariants exactly.
    pub fn from_dense_constants(
        tensor: Vec<Vec<Vec<Rat>>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, LieError> {
        let dim = tensor.len();
        for a in 0..dim {
            if tensor[a].len() != dim {
                return Err(LieError::DimensionMismatch {
                    expected: dim,
                    found: tensor[a].len(),
                });
            }
            for b in 0..dim {
                if tensor[a][b].len() != dim {
                    return Err(LieError::DimensionMismatch {
                        expected: dim,
                        found: tensor[a][b].len(),
                    });
                }
            }
        }
        // Antisymmetry.
        for a in 0..dim {
            for b in 0..dim {
                for g in 0..dim {
                    if &tensor[a][b][g] + &tensor[b][a][g] != Rat::zero() {
                        return Err(LieError::Antisymmetry(a, b, g));
                    }
                }
            }
        }
        // Jacobi: [[a,b],c] + [[b,c],a] + [[c,a],b] = 0 on basis triples.
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for g in 0..dim {
                        let mut total = Rat::zero();
                        for l in 0..dim {
                            total += &tensor[a][b][l] * &tensor[l][c][g];
                            total += &tensor[b][c][l] * &tensor[l][a][g];
                            total += &tensor[c][a][l] * &tensor[l][b][g];
                        }
                        if !total.is_zero() {
                            return Err(LieError::JacobiViolation(a, b, c));
                        }
                    }
                }
            }
        }
        // Killing form: kappa_{ab} = tr(ad I_a . ad I_b)
        //             = sum_{c,d} tensor[a][c][d] * tensor[b][d][c].
        let mut killing = vec![vec![Rat::zero(); dim]; dim];
        for a in 0..dim {
            for b in a..dim {
                let mut v = Rat::zero();
                for c in 0..dim {
                    for d in 0..dim {
                        if !tensor[a][c][d].is_zero() {
                            v += &tensor[a][c][d] * &tensor[b][d][c];
                        }
                    }
                }
                killing[a][b] = v.clone();
                killing[b][a] = v;
            }
        }
        let killing_inverse = invert_matrix(&killing).ok_or(LieError::KillingDegenerate)?;
        // ad-invariance: kappa([a,b],c) + kappa(b,[a,c]) = 0.
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    let mut v = Rat::zero();
                    for g in 0..dim {
                        v += &tensor[a][b][g] * &killing[g][c];
                        v += &tensor[a][c][g] * &killing[b][g];
                    }
                    if !v.is_zero() {
                        // Implied by Jacobi; still checked exactly.
                        return Err(LieError::JacobiViolation(a, b, c));
                    }
                }
            }
        }
        let sparse = tensor
            .iter()
            .map(|plane| {
                plane
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(_, v)| !v.is_zero())
                            .map(|(g, v)| (g, v.clone()))
                            .collect::<Vec<_>>()
                    })
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>();
        let basis_labels =
            labels.unwrap_or_else(|| (0..dim).map(|i| format!("I{}", i + 1)).collect());
        Ok(LieAlgebra {
            dim,
            basis_labels,
            constants: sparse,
            killing,
            killing_inverse,
            triangular: None,
        })
    }

    /// Loads from a sparse list of `(a, b, g, value)` entries. Missing
    /// entries are zero; the full antisymmetric tensor must be supplied
    /// explicitly (both `(a,b,g)` and `(b,a,g)`).
    pub fn from_sparse_constants(
        dim: usize,
        entries: &[(usize, usize, usize, Rat)],
        labels: Option<Vec<String>>,
    ) -> Result<Self, LieError> {
        let mut tensor = vec![vec![vec![Rat::zero(); dim]; dim]; dim];
        for (a, b, g, v) in entries {
            if *a >= dim || *b >= dim || *g >= dim {
                return Err(LieError::DimensionMismatch {
                    expected: dim,
                    found: (*a).max(*b).max(*g) + 1,
                });
            }
            tensor[*a][*b][*g] = v.clone();
        }
        Self::from_dense_constants(tensor, labels)
    }

    pub fn structure_constant(&self, a: usize, b: usize, g: usize) -> Rat {
        self.constants[a][b]
            .iter()
            .find(|(idx, _)| *idx == g)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(Rat::zero)
    }

    /// Sparse expansion of `[I_a, I_b]`.
    pub fn bracket_basis(&self, a: usize, b: usize) -> &[(usize, Rat)] {
        &self.constants[a][b]
    }

    pub fn check_element(&self, x: &GElement) -> Result<(), LieError> {
        if x.dim() != self.dim {
            return Err(LieError::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(())
    }

    pub fn bracket(&self, x: &GElement, y: &GElement) -> Result<GElement, LieError> {
        self.check_element(x)?;
        self.check_element(y)?;
        let mut out = GElement::zero(self.dim);
        for (a, xa) in x.coeffs.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.coeffs.iter().enumerate() {
                if yb.is_zero() {
                    continue;
                }
                let prod = xa * yb;
                for (g, c) in &self.constants[a][b] {
                    out.coeffs[*g] += &prod * c;
                }
            }
        }
        Ok(out)
    }

    pub fn killing_form(&self, x: &GElement, y: &GElement) -> Result<Rat, LieError> {
        self.check_element(x)?;
        self.check_element(y)?;
        let mut v = Rat::zero();
        for (a, xa) in x.coeffs.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.coeffs.iter().enumerate() {
                if yb.is_zero() {
                    continue;
                }
                v += xa * yb * &self.killing[a][b];
            }
        }
        Ok(v)
    }

    pub fn killing_entry(&self, a: usize, b: usize) -> &Rat {
        &self.killing[a][b]
    }

    pub fn killing_inverse_entry(&self, a: usize, b: usize) -> &Rat {
        &self.killing_inverse[a][b]
    }

    /// The dual basis element `I^a = sum_b (kappa^{-1})_{ab} I_b`, so that
    /// `kappa(I^a, I_b) = delta_{ab}`.
    pub fn dual_basis_element(&self, a: usize) -> GElement {
        GElement {
            coeffs: self.killing_inverse[a].clone(),
        }
    }

    /// Quadratic Casimir `Omega = sum_{a,b} (kappa^{-1})_{ab} I_a (x) I_b`.
    pub fn casimir(&self) -> Tensor2 {
        let mut t = Tensor2::zero();
        for a in 0..self.dim {
            for b in 0..self.dim {
                let v = self.killing_inverse[a][b].clone();
                t.add_to((a, b), v);
            }
        }
        t
    }

    /// `[x (x) 1, t]`: ad-action on the first leg.
    pub fn ad_first(&self, x: &GElement, t: &Tensor2) -> Tensor2 {
        let mut out = Tensor2::zero();
        for (&(a, b), v) in t.iter() {
            for (g, xg) in x.coeffs.iter().enumerate() {
                if xg.is_zero() {
                    continue;
                }
                for (e, c) in &self.constants[g][a] {
                    out.add_to((*e, b), xg * v * c);
                }
            }
        }
        out
    }

    /// `[1 (x) x, t]`: ad-action on the second leg.
    pub fn ad_second(&self, x: &GElement, t: &Tensor2) -> Tensor2 {
        let mut out = Tensor2::zero();
        for (&(a, b), v) in t.iter() {
            for (g, xg) in x.coeffs.iter().enumerate() {
                if xg.is_zero() {
                    continue;
                }
                for (e, c) in &self.constants[g][b] {
                    out.add_to((a, *e), xg * v * c);
                }
            }
        }
        out
    }

    /// `[x (x) 1 + 1 (x) x, t]`.
    pub fn ad_both(&self, x: &GElement, t: &Tensor2) -> Tensor2 {
        self.ad_first(x, t).add(&self.ad_second(x, t))
    }

    pub fn default_decomposition(&self) -> Option<&TriangularDecomposition> {
        self.triangular.as_ref()
    }

    /// Drinfeld-Jimbo tensor for a triangular decomposition: one half of the
    /// Cartan Casimir plus `sum_{a in n_+} e_a (x) e_a^v` with `e_a^v` the
    /// Killing-dual of `e_a` inside `n_-`. Satisfies `r + tau r = Omega`.
    pub fn drinfeld_jimbo(
        &self,
        decomposition: Option<&TriangularDecomposition>,
    ) -> Result<Tensor2, LieError> {
        let dec = match decomposition.or(self.triangular.as_ref()) {
            Some(d) => d,
            None => {
                return Err(LieError::BadDecomposition(
                    "no triangular decomposition available".into(),
                ))
            }
        };
        let mut seen = vec![false; self.dim];
        for &i in dec.plus.iter().chain(&dec.cartan).chain(&dec.minus) {
            if i >= self.dim || seen[i] {
                return Err(LieError::BadDecomposition(
                    "index sets must partition the basis".into(),
                ));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(LieError::BadDecomposition(
                "index sets must partition the basis".into(),
            ));
        }
        if dec.plus.len() != dec.minus.len() {
            return Err(LieError::BadDecomposition(
                "n_+ and n_- must have equal dimension".into(),
            ));
        }
        // kappa must vanish on n_+ x n_+, n_- x n_-, h x n_+-, and pair
        // n_+ with n_- nondegenerately; h x h must be nondegenerate.
        for &a in &dec.plus {
            for &b in &dec.plus {
                if !self.killing[a][b].is_zero() {
                    return Err(LieError::BadDecomposition(
                        "Killing form does not vanish on n_+ x n_+".into(),
                    ));
                }
            }
        }
        for &a in &dec.minus {
            for &b in &dec.minus {
                if !self.killing[a][b].is_zero() {
                    return Err(LieError::BadDecomposition(
                        "Killing form does not vanish on n_- x n_-".into(),
                    ));
                }
            }
        }
        for &a in &dec.cartan {
            for &b in dec.plus.iter().chain(&dec.minus) {
                if !self.killing[a][b].is_zero() {
                    return Err(LieError::BadDecomposition(
                        "Killing form does not vanish on h x (n_+ + n_-)".into(),
                    ));
                }
            }
        }
        // Cartan block Casimir.
        let k = dec.cartan.len();
        let mut cartan_block = vec![vec![Rat::zero(); k]; k];
        for (i, &a) in dec.cartan.iter().enumerate() {
            for (j, &b) in dec.cartan.iter().enumerate() {
                cartan_block[i][j] = self.killing[a][b].clone();
            }
        }
        let cartan_inv = invert_matrix(&cartan_block).ok_or_else(|| {
            LieError::BadDecomposition("Killing form degenerate on the Cartan part".into())
        })?;
        let mut r = Tensor2::zero();
        for (i, &a) in dec.cartan.iter().enumerate() {
            for (j, &b) in dec.cartan.iter().enumerate() {
                r.add_to((a, b), &cartan_inv[i][j] / rint(2));
            }
        }
        // Pairing block between n_+ and n_-.
        let p = dec.plus.len();
        let mut pairing = vec![vec![Rat::zero(); p]; p];
        for (i, &a) in dec.plus.iter().enumerate() {
            for (j, &b) in dec.minus.iter().enumerate() {
                pairing[i][j] = self.killing[a][b].clone();
            }
        }
        let pairing_inv = invert_matrix(&pairing).ok_or_else(|| {
            LieError::BadDecomposition("n_+ and n_- do not pair nondegenerately".into())
        })?;
        // e_i^v = sum_j (P^{-1})_{ji}^T ... : kappa(e_i, e_j^v) = delta_{ij}
        // with e_j^v = sum_l (P^{-1})_{jl}-combination of minus basis.
        for (i, &a) in dec.plus.iter().enumerate() {
            for (l, &b) in dec.minus.iter().enumerate() {
                // coefficient of minus-basis b in e_a^v: solve P c = delta_i.
                r.add_to((a, b), pairing_inv[l][i].clone());
            }
        }
        Ok(r)
    }
}

/// Exact Gauss-Jordan inverse; `None` when singular.
pub fn invert_matrix(m: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = m.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut inv: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { rint(1) } else { Rat::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] /= &p;
            inv[col][j] /= &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for j in 0..n {
                    let av = &a[col][j] * &factor;
                    a[r][j] -= av;
                    let iv = &inv[col][j] * &factor;
                    inv[r][j] -= iv;
                }
            }
        }
    }
    Some(inv)
}

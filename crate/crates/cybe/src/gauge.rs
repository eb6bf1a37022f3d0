//! Polynomial gauge automorphisms of `g[[x]]` and their action on
//! r-matrices and Lagrangian subalgebras.
//!
//! A gauge transform is an `F[[x]]`-linear map `phi(a) = sum_k phi_k(a)
//! x^k` with matrix coefficients `phi_k` and invertible `phi_0`, which is
//! a Lie algebra morphism degree by degree. Acting on a standard-form
//! r-matrix, `phi (x) phi` fixes the scalar part: with the deformed
//! Casimir `Omega_phi(x,y) = sum_a phi(I^a)(x) (x) phi(I_a)(y)` one has
//! `Omega_phi(y,y) = Omega` (dual bases transport along the Killing
//! isometry), so
//!
//!   (phi (x) phi) r = s(y) Omega/(x-y)
//!                   + s(y) (Omega_phi(x,y) - Omega_phi(y,y))/(x-y)
//!                   + (phi (x) phi) g,
//!
//! and the second line is Taylor: only the regular part moves.

use num_traits::Zero;
use thiserror::Error;

use crate::doubles::DoubleElement;
use crate::lagrangian::WBasis;
use crate::lie::{invert_matrix, GElement, LieAlgebra, Tensor2};
use crate::rat::{rint, Rat};
use crate::series::tensor::{GPoly, StandardRMatrix, Tensor2Series};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GaugeError {
    #[error("not an automorphism: {0}")]
    NotAutomorphism(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
}

/// `phi(a) = sum_k phi_k(a) x^k` with n x n rational matrices `phi_k`
/// acting on basis coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugeAuto {
    /// `layers[k]` is the matrix of `phi_k` (column `a` holds the
    /// coordinates of `phi_k(I_a)`).
    pub layers: Vec<Vec<Vec<Rat>>>,
}

impl GaugeAuto {
    pub fn identity(dim: usize) -> Self {
        let mut id = vec![vec![Rat::zero(); dim]; dim];
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = rint(1);
        }
        GaugeAuto { layers: vec![id] }
    }

    /// `exp(x^degree ad(generator))`, exact when `ad(generator)` is
    /// nilpotent; errors otherwise.
    pub fn exp_nilpotent_ad(
        algebra: &LieAlgebra,
        generator: &GElement,
        degree: i64,
    ) -> Result<Self, GaugeError> {
        if degree < 0 {
            return Err(GaugeError::WindowTooSmall(
                "generator degree must be non-negative".into(),
            ));
        }
        let n = algebra.dim;
        // ad matrix of the generator.
        let mut ad = vec![vec![Rat::zero(); n]; n];
        for a in 0..n {
            let img = algebra
                .bracket(generator, &GElement::basis(n, a))
                .expect("dimension checked");
            for (i, c) in img.coeffs.iter().enumerate() {
                ad[i][a] = c.clone();
            }
        }
        // Powers ad^k / k! until nilpotency.
        let mut layers: Vec<Vec<Vec<Rat>>> = Vec::new();
        let mut current = GaugeAuto::identity(n).layers.remove(0);
        let mut factorial = rint(1);
        let mut k = 0i64;
        loop {
            let scaled: Vec<Vec<Rat>> = current
                .iter()
                .map(|row| row.iter().map(|v| v / &factorial).collect())
                .collect();
            let is_zero = scaled.iter().all(|row| row.iter().all(Rat::is_zero));
            if is_zero {
                break;
            }
            // Layer k acts with x^{degree * k}.
            let slot = (degree * k) as usize;
            while layers.len() <= slot {
                layers.push(vec![vec![Rat::zero(); n]; n]);
            }
            for i in 0..n {
                for j in 0..n {
                    layers[slot][i][j] = &layers[slot][i][j] + &scaled[i][j];
                }
            }
            // Next power.
            k += 1;
            if k > 2 * n as i64 {
                return Err(GaugeError::NotAutomorphism(
                    "generator is not ad-nilpotent".into(),
                ));
            }
            factorial *= rint(k);
            let mut next = vec![vec![Rat::zero(); n]; n];
            for i in 0..n {
                for j in 0..n {
                    let mut v = Rat::zero();
                    for l in 0..n {
                        v += &ad[i][l] * &current[l][j];
                    }
                    next[i][j] = v;
                }
            }
            current = next;
        }
        Ok(GaugeAuto { layers })
    }

    /// Composition `self . other` as maps (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        let n = self.layers[0].len();
        let mut layers: Vec<Vec<Vec<Rat>>> = Vec::new();
        for (k1, a) in self.layers.iter().enumerate() {
            for (k2, b) in other.layers.iter().enumerate() {
                let slot = k1 + k2;
                while layers.len() <= slot {
                    layers.push(vec![vec![Rat::zero(); n]; n]);
                }
                for i in 0..n {
                    for j in 0..n {
                        let mut v = layers[slot][i][j].clone();
                        for l in 0..n {
                            v += &a[i][l] * &b[l][j];
                        }
                        layers[slot][i][j] = v;
                    }
                }
            }
        }
        GaugeAuto { layers }
    }

    pub fn degree(&self) -> i64 {
        self.layers.len() as i64 - 1
    }

    /// Applies to an element of g (constant), producing a g-polynomial.
    pub fn apply_constant(&self, a: &GElement) -> GPoly {
        let n = a.dim();
        let mut out = GPoly::zero(n);
        for (k, layer) in self.layers.iter().enumerate() {
            let mut img = GElement::zero(n);
            for (i, row) in layer.iter().enumerate() {
                let mut v = Rat::zero();
                for (j, c) in a.coeffs.iter().enumerate() {
                    if !c.is_zero() {
                        v += &row[j] * c;
                    }
                }
                img.coeffs[i] = v;
            }
            out.add_to(k as i64, img);
        }
        out
    }

    /// `F((x))`-linear extension to g-valued Laurent polynomials.
    pub fn apply_gpoly(&self, f: &GPoly) -> GPoly {
        let mut out = GPoly::zero(f.dim);
        out.cap = f.cap;
        for (d, coeff) in &f.terms {
            let img = self.apply_constant(coeff);
            for (k, part) in &img.terms {
                if out.cap.covers(d + k) {
                    out.add_to(d + k, part.clone());
                }
            }
        }
        out
    }
}

/// Degreewise automorphism check: `phi_0` invertible and
/// `phi([a, b]) = [phi(a), phi(b)]` up to the layer depth, on all basis
/// pairs.
pub fn check_automorphism(algebra: &LieAlgebra, phi: &GaugeAuto) -> Result<(), GaugeError> {
    let n = algebra.dim;
    if phi.layers.is_empty() {
        return Err(GaugeError::NotAutomorphism("no layers".into()));
    }
    for layer in &phi.layers {
        if layer.len() != n || layer.iter().any(|row| row.len() != n) {
            return Err(GaugeError::NotAutomorphism(
                "layer dimensions do not match the algebra".into(),
            ));
        }
    }
    if invert_matrix(&phi.layers[0]).is_none() {
        return Err(GaugeError::NotAutomorphism(
            "constant layer is not invertible".into(),
        ));
    }
    let depth = phi.degree();
    for a in 0..n {
        for b in 0..n {
            let bracket = algebra
                .bracket(&GElement::basis(n, a), &GElement::basis(n, b))
                .expect("dimensions match");
            let lhs = phi.apply_constant(&bracket);
            let pa = phi.apply_constant(&GElement::basis(n, a));
            let pb = phi.apply_constant(&GElement::basis(n, b));
            let rhs = crate::residuals::gpoly_bracket(algebra, &pa, &pb);
            let difference = lhs.sub(&rhs);
            for (d, coeff) in &difference.terms {
                if *d <= depth && !coeff.is_zero() {
                    return Err(GaugeError::NotAutomorphism(format!(
                        "bracket mismatch on basis pair ({a}, {b}) at degree {d}"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// `(phi (x) phi) r` in standard form: the scalar part is unchanged and
/// the regular part becomes
/// `(phi (x) phi) g + s(y) . ddx(Omega_phi)` where `ddx` is the divided
/// difference in x of the deformed Casimir.
pub fn gauge_apply(
    algebra: &LieAlgebra,
    r: &StandardRMatrix,
    phi: &GaugeAuto,
    window: i64,
) -> Result<StandardRMatrix, GaugeError> {
    check_automorphism(algebra, phi)?;
    if !r.s.cap().covers(window) || !r.g.y_cap().covers(window) || !r.g.x_cap().covers(window) {
        return Err(GaugeError::WindowTooSmall(format!(
            "r must be known on the window {window}"
        )));
    }
    let n = algebra.dim;
    // Omega_phi(x, y) = sum_a phi(I^a)(x) (x) phi(I_a)(y), minus its value
    // on the diagonal, divided by (x - y).
    let mut omega_phi = Tensor2Series::zero();
    for a in 0..n {
        let dual_img = phi.apply_constant(&algebra.dual_basis_element(a));
        let base_img = phi.apply_constant(&GElement::basis(n, a));
        for (dx, u) in &dual_img.terms {
            for (dy, v) in &base_img.terms {
                omega_phi.add_to((*dx, *dy), Tensor2::pure(u, v));
            }
        }
    }
    // Sanity: on the diagonal the deformed Casimir collapses to Omega
    // degreewise (phi preserves the Killing form, so transported dual
    // bases still sum to the Casimir over F[[x]]).
    debug_assert!({
        let mut by_total: std::collections::BTreeMap<i64, Tensor2> = std::collections::BTreeMap::new();
        for (&(i, j), t) in omega_phi.iter() {
            let slot = by_total.entry(i + j).or_insert_with(Tensor2::zero);
            *slot = slot.add(t);
        }
        by_total
            .iter()
            .all(|(t, v)| if *t == 0 { *v == algebra.casimir() } else { v.is_zero() })
    });
    // Divided difference in x: entry (i, j) of Omega_phi contributes
    // (x^i - y^i)/(x - y) y^j = sum_{c+d=i-1} x^c y^{d+j}.
    let mut ddx = Tensor2Series::zero();
    for (&(i, j), t) in omega_phi.iter() {
        for c in 0..i {
            ddx.add_to((c, j + i - 1 - c), t.clone());
        }
    }
    let yang_correction = ddx.mul_scalar_y(&r.s);
    // (phi (x) phi) g. The layers of phi only raise degrees, so the caps
    // of g survive; exact inputs give an exact result.
    let mut g_new = Tensor2Series::zero().with_caps(r.g.x_cap(), r.g.y_cap());
    for (&(i, j), tensor) in r.g.iter() {
        // Apply phi to both legs of each pure component.
        for (&(a, b), value) in tensor.iter() {
            let pa = phi.apply_constant(&GElement::basis(n, a));
            let pb = phi.apply_constant(&GElement::basis(n, b));
            for (da, ca) in &pa.terms {
                for (db, cb) in &pb.terms {
                    g_new.add_to((i + da, j + db), Tensor2::pure(ca, cb).scale(value));
                }
            }
        }
    }
    let g_total = g_new.add(&yang_correction);
    Ok(StandardRMatrix::new(r.s.clone(), g_total))
}

/// `(phi x [phi])` applied to a windowed subalgebra basis.
pub fn gauge_apply_w(algebra: &LieAlgebra, w: &WBasis, phi: &GaugeAuto) -> Result<WBasis, GaugeError> {
    check_automorphism(algebra, phi)?;
    let mut elements = Vec::new();
    for row in &w.elements {
        let mut new_row = Vec::with_capacity(row.len());
        for elt in row {
            let laurent = phi.apply_gpoly(&elt.laurent);
            // [phi] on the residue class: phi layers shift degrees, reduced
            // mod x^m.
            let m = elt.m;
            let mut residue = vec![GElement::zero(algebra.dim); m];
            for (j, part) in elt.residue.iter().enumerate() {
                if part.is_zero() {
                    continue;
                }
                let img = phi.apply_constant(part);
                for (k, coeff) in &img.terms {
                    let slot = j + *k as usize;
                    if slot < m {
                        residue[slot] = residue[slot].add(coeff);
                    }
                }
            }
            new_row.push(DoubleElement::new(m, laurent, residue));
        }
        elements.push(new_row);
    }
    Ok(WBasis {
        m: w.m,
        window: w.window,
        elements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::{build_w, spans_equal};
    use crate::residuals::cyb_residual;

    fn sl2() -> LieAlgebra {
        LieAlgebra::sl(2).unwrap()
    }

    const E: usize = 0;
    const H: usize = 1;
    const F: usize = 2;

    #[test]
    fn identity_gauge_is_automorphism() {
        let g = sl2();
        let id = GaugeAuto::identity(3);
        check_automorphism(&g, &id).unwrap();
        let r = StandardRMatrix::base(&g, 2).unwrap();
        let out = gauge_apply(&g, &r, &id, 5).unwrap();
        for (&(i, j), t) in r.g.iter() {
            assert_eq!(out.g.coeff(i, j), *t);
        }
        for (&(i, j), t) in out.g.iter() {
            assert_eq!(r.g.coeff(i, j), *t);
        }
    }

    #[test]
    fn exp_ad_xe_is_automorphism() {
        let g = sl2();
        let phi = GaugeAuto::exp_nilpotent_ad(&g, &GElement::basis(3, E), 1).unwrap();
        assert_eq!(phi.degree(), 2); // ad(e)^2 != 0, ad(e)^3 = 0 on sl2.
        check_automorphism(&g, &phi).unwrap();
    }

    #[test]
    fn broken_constant_layer_rejected() {
        let g = sl2();
        let mut phi = GaugeAuto::identity(3);
        phi.layers[0][0][0] = Rat::zero(); // kill one diagonal entry
        phi.layers[0][0][1] = Rat::zero();
        phi.layers[0][0][2] = Rat::zero();
        phi.layers[0][1][0] = Rat::zero();
        phi.layers[0][2][0] = Rat::zero();
        assert!(matches!(
            check_automorphism(&g, &phi),
            Err(GaugeError::NotAutomorphism(_))
        ));
    }

    #[test]
    fn gauge_preserves_cybe() {
        let g = sl2();
        let phi = GaugeAuto::exp_nilpotent_ad(&g, &GElement::basis(3, E), 1).unwrap();
        for base in [1usize, 2, 3] {
            let r = StandardRMatrix::base(&g, base).unwrap();
            let transformed = gauge_apply(&g, &r, &phi, 8).unwrap();
            let res = cyb_residual(&g, &transformed, 2).unwrap();
            assert!(
                res.is_zero_on_window(),
                "gauge of r_{base} fails CYBE: {:?}",
                res.first_nonzero()
            );
            let skew = crate::series::tensor::skew_residual(&g, &transformed, 3).unwrap();
            assert!(skew.is_zero_on_window(), "gauge of r_{base} not skew");
        }
    }

    #[test]
    fn gauge_coherence_on_w() {
        // W(gauge r) = (phi x [phi]) W(r) as windowed spans.
        let g = sl2();
        let phi = GaugeAuto::exp_nilpotent_ad(&g, &GElement::basis(3, F), 2).unwrap();
        for base in [1usize, 2, 3] {
            let r = StandardRMatrix::base(&g, base).unwrap();
            let w = build_w(&g, &r, 4).unwrap();
            let transported = gauge_apply_w(&g, &w, &phi).unwrap();
            let r_gauged = gauge_apply(&g, &r, &phi, 12).unwrap();
            let w_gauged = build_w(&g, &r_gauged, 4).unwrap();
            assert!(
                spans_equal(&g, &transported, &w_gauged),
                "gauge coherence fails for base {base}"
            );
        }
    }

    #[test]
    fn composition_stays_automorphism() {
        let g = sl2();
        let a = GaugeAuto::exp_nilpotent_ad(&g, &GElement::basis(3, E), 1).unwrap();
        let b = GaugeAuto::exp_nilpotent_ad(&g, &GElement::basis(3, F), 0).unwrap();
        let c = a.compose(&b);
        check_automorphism(&g, &c).unwrap();
        let h_img = c.apply_constant(&GElement::basis(3, H));
        assert!(!h_img.is_zero());
    }
}

//! Normalization of the scalar part of an r-matrix.
//!
//! The multiplicity of `s(y)` (its vanishing order at 0) can only be 0, 1
//! or 2 for a formal r-matrix; order three or higher is classified as
//! unsupported. For multiplicity 2 the normalizing transformation exists
//! exactly when `res_{y=0} 1/s(y) = 0`, which for `s = s_2 y^2 + s_3 y^3 +
//! ...` equals `-s_3/s_2^2`.
//!
//! `solve_psi` produces the change of coordinates: a scale `xi = 1/s_m`
//! and `psi in y + y^2 F[[y]]` with
//!
//!   xi s(psi(y)) = y^m psi'(y)
//!
//! exactly on the window (the returned certificate). The coefficients are
//! determined degree by degree; the linear coefficient of the unknown is
//! `m - 1 - k` at step `k`, so only `m = 2, k = 3` is resonant — exactly
//! the residue obstruction — where the free coefficient is pinned to zero.
//!
//! `substitute_coords` applies `r(x,y) -> xi r(psi(x), psi(y))` and
//! re-splits the pole: with `psi(x) - psi(y) = (x - y) q(x, y)` and the
//! unit `q`, the Yang kernel re-expands as
//!
//!   s(psi(y))/(psi(x)-psi(y)) = (s(psi(y))/psi'(y)) / (x-y) + regular,
//!
//! the regular part being `s(psi(y))` times the x-divided difference of
//! `1/q`.

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::lie::LieAlgebra;
use crate::rat::{rint, Rat};
use crate::series::tensor::{StandardRMatrix, Tensor2Series};
use crate::series::{Cap, ScalarSeries, SeriesError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("series vanishes on the whole window; order undecidable")]
    AllZeroWindow,
    #[error("multiplicity {found} does not match the expected {expected}")]
    WrongMultiplicity { expected: i64, found: i64 },
    #[error("obstructed: the residue of 1/s is {0}, normalization needs 0")]
    Obstructed(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Multiplicity classification of the scalar part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Multiplicity {
    /// Vanishing order 0, 1 or 2.
    Order(i64),
    /// Order three or more: no formal r-matrix has such a scalar part.
    Unsupported(i64),
    /// The exact zero series.
    ZeroSeries,
}

/// Vanishing order of `s` at `y = 0`.
pub fn multiplicity(s: &ScalarSeries) -> Result<Multiplicity, NormalizeError> {
    match s.order() {
        Some(order) if order < 0 => Err(NormalizeError::WindowTooSmall(
            "scalar part must be Taylor".into(),
        )),
        Some(order) if order <= 2 => Ok(Multiplicity::Order(order)),
        Some(order) => Ok(Multiplicity::Unsupported(order)),
        None => match s.cap() {
            Cap::Exact => Ok(Multiplicity::ZeroSeries),
            Cap::At(_) => Err(NormalizeError::AllZeroWindow),
        },
    }
}

/// `res_{y=0} 1/s(y)` for a multiplicity-2 series; zero exactly when the
/// normalizing transformation exists.
pub fn residue_obstruction(s: &ScalarSeries) -> Result<Rat, NormalizeError> {
    match multiplicity(s)? {
        Multiplicity::Order(2) => {}
        Multiplicity::Order(found) => {
            return Err(NormalizeError::WrongMultiplicity {
                expected: 2,
                found,
            })
        }
        Multiplicity::Unsupported(found) => {
            return Err(NormalizeError::WrongMultiplicity {
                expected: 2,
                found,
            })
        }
        Multiplicity::ZeroSeries => {
            return Err(NormalizeError::WrongMultiplicity {
                expected: 2,
                found: -1,
            })
        }
    }
    let inverse = s.invert().map_err(NormalizeError::Series)?;
    if !inverse.cap().covers(-1) {
        return Err(NormalizeError::WindowTooSmall(
            "cannot see the residue of 1/s".into(),
        ));
    }
    Ok(inverse.coeff(-1))
}

/// Normalizing change of coordinates: `psi(0) = 0`, `psi'(0) = 1`, and a
/// scale `xi != 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordTransform {
    pub psi: ScalarSeries,
    pub xi: Rat,
}

impl CoordTransform {
    pub fn identity() -> Self {
        CoordTransform {
            psi: ScalarSeries::monomial(1, rint(1)),
            xi: rint(1),
        }
    }

    pub fn validate(&self) -> Result<(), NormalizeError> {
        if self.xi.is_zero() {
            return Err(NormalizeError::WindowTooSmall("xi must be nonzero".into()));
        }
        if self.psi.coeff(1) != rint(1) || self.psi.order() != Some(1) {
            return Err(NormalizeError::WindowTooSmall(
                "psi must lie in y + y^2 F[[y]]".into(),
            ));
        }
        Ok(())
    }
}

/// Solves `xi s(psi(y)) = y^m psi'(y)` degreewise up to `window`, with
/// `xi = 1/s_m` and the resonant coefficient (m = 2 only) pinned to zero.
pub fn solve_psi(
    s: &ScalarSeries,
    m: i64,
    window: i64,
) -> Result<CoordTransform, NormalizeError> {
    match multiplicity(s)? {
        Multiplicity::Order(found) if found == m => {}
        Multiplicity::Order(found) => {
            return Err(NormalizeError::WrongMultiplicity {
                expected: m,
                found,
            })
        }
        Multiplicity::Unsupported(found) => {
            return Err(NormalizeError::WrongMultiplicity {
                expected: m,
                found,
            })
        }
        Multiplicity::ZeroSeries => {
            return Err(NormalizeError::WrongMultiplicity {
                expected: m,
                found: -1,
            })
        }
    }
    if m == 2 {
        let res = residue_obstruction(s)?;
        if !res.is_zero() {
            return Err(NormalizeError::Obstructed(crate::rat::fmt_rat(&res)));
        }
    }
    if !s.cap().covers(window + m) {
        return Err(NormalizeError::WindowTooSmall(format!(
            "s must be known to degree {}",
            window + m
        )));
    }
    let xi = rint(1) / s.coeff(m);
    // psi = y + sum_{j>=2} p_j y^j. The equation coefficient at degree
    // j + m - 1 is linear in p_j with factor (m - 1 - (j + m - 1)) =
    // ... concretely: [y^{j+m-1}] (xi s(psi) - y^m psi') =
    // (known terms) + p_j (m * xi s_m - j) = (known) + p_j (m - j).
    let mut psi = ScalarSeries::monomial(1, rint(1));
    for j in 2..=window {
        let eq_degree = j + m - 1;
        let residual_series = defect(s, &psi, &xi, eq_degree);
        let residual = residual_series.coeff(eq_degree);
        let linear = rint(m - j);
        if linear.is_zero() {
            // Resonant step: m = 2, j = 2 (equation degree 3). The residue
            // obstruction already vanished, so the equation must be
            // consistent and the coefficient stays free; pin it to zero.
            if !residual.is_zero() {
                return Err(NormalizeError::Obstructed(crate::rat::fmt_rat(&residual)));
            }
            continue;
        }
        let p_j = -residual / linear;
        if !p_j.is_zero() {
            psi = psi.add(&ScalarSeries::monomial(j, p_j));
        }
    }
    // The computed psi is a truncation of the true solution: coefficients
    // beyond the window are unknown, not zero.
    let transform = CoordTransform {
        psi: psi.with_cap(Cap::At(window)),
        xi,
    };
    // Certificate: the defect vanishes exactly on the window.
    let final_defect = defect(s, &transform.psi, &transform.xi, window + m - 1);
    if !final_defect.is_zero_on_window() {
        return Err(NormalizeError::WindowTooSmall(format!(
            "ODE defect does not close on the window: {:?}",
            final_defect.terms().next().map(|(d, c)| (d, c.clone()))
        )));
    }
    Ok(transform)
}

/// `xi s(psi(y)) - y^m psi'(y)` truncated at `cap`, with `m` read from the
/// caller through the cap alignment (the full series is returned).
fn defect(s: &ScalarSeries, psi: &ScalarSeries, xi: &Rat, cap: i64) -> ScalarSeries {
    let m = s.order().unwrap_or(0);
    let composed = s
        .truncate(Cap::At(cap))
        .compose(&psi.truncate(Cap::At(cap)))
        .expect("psi has zero constant term");
    let lhs = composed.scale(xi);
    let rhs = psi.derivative().shift(m);
    lhs.sub(&rhs).truncate(Cap::At(cap))
}

/// The ODE certificate `xi s(psi(y)) - y^m psi'(y)`; exactly zero on the
/// window for every `solve_psi` output.
pub fn ode_certificate(
    s: &ScalarSeries,
    transform: &CoordTransform,
    m: i64,
    window: i64,
) -> ScalarSeries {
    defect(s, &transform.psi, &transform.xi, window + m - 1)
}

/// Bivariate scalar series used for the pole re-splitting, with a total-
/// degree exactness bound.
#[derive(Debug, Clone)]
struct Bivariate {
    coeffs: BTreeMap<(i64, i64), Rat>,
    total_cap: i64,
}

impl Bivariate {
    fn zero(total_cap: i64) -> Self {
        Bivariate {
            coeffs: BTreeMap::new(),
            total_cap,
        }
    }

    fn add_to(&mut self, key: (i64, i64), value: Rat) {
        if value.is_zero() || key.0 + key.1 > self.total_cap {
            return;
        }
        let slot = self.coeffs.entry(key).or_insert_with(Rat::zero);
        *slot += value;
        if slot.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Bivariate::zero(self.total_cap.min(other.total_cap));
        for (&(a, b), u) in &self.coeffs {
            for (&(c, d), v) in &other.coeffs {
                out.add_to((a + c, b + d), u * v);
            }
        }
        out
    }

    fn scale(&self, c: &Rat) -> Self {
        let mut out = Bivariate::zero(self.total_cap);
        for (&k, v) in &self.coeffs {
            out.add_to(k, v * c);
        }
        out
    }

    fn one(total_cap: i64) -> Self {
        let mut out = Bivariate::zero(total_cap);
        out.add_to((0, 0), rint(1));
        out
    }

    /// Inverse of a unit (nonzero constant term), by total degree.
    fn invert(&self) -> Option<Self> {
        let c0 = self.coeffs.get(&(0, 0))?.clone();
        if c0.is_zero() {
            return None;
        }
        let inv0 = rint(1) / &c0;
        // u = 1/c0 * sum_k (1 - f/c0)^k truncated by total degree.
        let mut tail = self.scale(&-&inv0);
        tail.add_to((0, 0), rint(1));
        // tail = 1 - f/c0 has zero constant term.
        let mut acc = Bivariate::one(self.total_cap);
        let mut power = Bivariate::one(self.total_cap);
        for _ in 0..=self.total_cap {
            power = power.mul(&tail);
            if power.coeffs.is_empty() {
                break;
            }
            for (&k, v) in &power.coeffs {
                acc.add_to(k, v.clone());
            }
        }
        Some(acc.scale(&inv0))
    }
}

/// Applies a coordinate transform to an r-matrix in standard form:
/// `r(x,y) -> xi r(psi(x), psi(y))` with the pole split back into
/// standard shape. Returns `(s~, g~)` with `s~ = xi s(psi(y))/psi'(y)`.
pub fn substitute_coords(
    algebra: &LieAlgebra,
    r: &StandardRMatrix,
    transform: &CoordTransform,
    window: i64,
) -> Result<StandardRMatrix, NormalizeError> {
    transform.validate()?;
    let psi = &transform.psi;
    // The pole re-splitting reads q^{-1} at total degree up to 2 window + 1,
    // which consumes psi coefficients up to degree 2 window + 2.
    if !psi.cap().covers(2 * window + 2) {
        return Err(NormalizeError::WindowTooSmall(format!(
            "psi must be known to degree {}",
            2 * window + 2
        )));
    }
    if !r.s.cap().covers(window + 1) {
        return Err(NormalizeError::WindowTooSmall(format!(
            "s must be known to degree {}",
            window + 1
        )));
    }
    let total_cap = 2 * window + 2;
    // q(x, y) = (psi(x) - psi(y))/(x - y) = sum_l psi_l sum_{a+b=l-1} x^a y^b.
    let mut q = Bivariate::zero(total_cap);
    for (l, c) in psi.terms() {
        for a in 0..l {
            q.add_to((a, l - 1 - a), c.clone());
        }
    }
    let q_inv = q
        .invert()
        .expect("q(0,0) = psi'(0) = 1 is a unit");
    // Divided difference of q^{-1} in x: u0(x, y) =
    // (q^{-1}(x,y) - q^{-1}(y,y))/(x - y).
    let mut u0 = Bivariate::zero(total_cap);
    for (&(a, b), v) in &q_inv.coeffs {
        // x^a y^b -> (x^a - y^a)/(x-y) y^b = sum_{c+d=a-1} x^c y^{b+d}.
        for c in 0..a {
            u0.add_to((c, b + a - 1 - c), v.clone());
        }
    }
    // s(psi(y)) and s~ = xi s(psi(y)) / psi'(y).
    let s_of_psi = r
        .s
        .truncate(Cap::At(window + 1))
        .compose(psi)
        .map_err(NormalizeError::Series)?;
    let psi_prime = psi.derivative();
    let psi_prime_inv = psi_prime.invert().map_err(NormalizeError::Series)?;
    let s_new = s_of_psi
        .scale(&transform.xi)
        .mul(&psi_prime_inv)
        .truncate(Cap::At(window));

    // g~ = xi s(psi(y)) u0(x, y) Omega + xi g(psi(x), psi(y)).
    let omega = algebra.casimir();
    let mut g_new = Tensor2Series::zero().with_caps(Cap::At(window), Cap::At(window));
    for (&(a, b), v) in &u0.coeffs {
        for (l, c) in s_of_psi.terms() {
            g_new.add_to((a, b + l), omega.scale(&(v * c * &transform.xi)));
        }
    }
    // Substitute psi into both legs of g.
    if !r.g.x_cap().covers(window) || !r.g.y_cap().covers(window) {
        return Err(NormalizeError::WindowTooSmall(
            "g must be known on the requested window".into(),
        ));
    }
    let mut psi_pow_x: Vec<ScalarSeries> = vec![ScalarSeries::one()];
    for _ in 1..=window.max(0) {
        let prev = psi_pow_x.last().unwrap();
        psi_pow_x.push(prev.mul(psi).truncate(Cap::At(window)));
    }
    for (&(i, j), tensor) in r.g.iter() {
        if i < 0 || j < 0 || i > window || j > window {
            continue;
        }
        let px = &psi_pow_x[i as usize];
        let py = &psi_pow_x[j as usize];
        for (dx, cx) in px.terms() {
            for (dy, cy) in py.terms() {
                if dx > window || dy > window {
                    continue;
                }
                g_new.add_to((dx, dy), tensor.scale(&(cx * cy * &transform.xi)));
            }
        }
    }
    Ok(StandardRMatrix::new(s_new, g_new))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;
    use crate::residuals::cyb_residual;

    fn sl2() -> LieAlgebra {
        LieAlgebra::sl(2).unwrap()
    }

    fn poly(terms: &[(i64, i64)]) -> ScalarSeries {
        ScalarSeries::from_terms(terms.iter().map(|(d, c)| (*d, rint(*c))))
    }

    #[test]
    fn multiplicity_classification() {
        assert_eq!(
            multiplicity(&poly(&[(0, 3), (1, 1)])).unwrap(),
            Multiplicity::Order(0)
        );
        assert_eq!(
            multiplicity(&poly(&[(2, 1), (5, 1)])).unwrap(),
            Multiplicity::Order(2)
        );
        assert_eq!(
            multiplicity(&poly(&[(3, 1)])).unwrap(),
            Multiplicity::Unsupported(3)
        );
        assert_eq!(
            multiplicity(&ScalarSeries::zero()).unwrap(),
            Multiplicity::ZeroSeries
        );
        assert_eq!(
            multiplicity(&ScalarSeries::zero().with_cap(Cap::At(4))).unwrap_err(),
            NormalizeError::AllZeroWindow
        );
    }

    #[test]
    fn residue_obstruction_values() {
        // res 1/(y^2 + y^3) = -1; res 1/y^2 = 0; res 1/(y^2 + y^4) = 0.
        assert_eq!(residue_obstruction(&poly(&[(2, 1), (3, 1)])).unwrap(), rint(-1));
        assert_eq!(residue_obstruction(&poly(&[(2, 1)])).unwrap(), rint(0));
        assert_eq!(residue_obstruction(&poly(&[(2, 1), (4, 1)])).unwrap(), rint(0));
        // Closed form -s_3/s_2^2 on a generic example.
        let s = ScalarSeries::from_terms([(2, rat(3, 2)), (3, rat(5, 7)), (4, rint(11))]);
        let expected = -rat(5, 7) / (rat(3, 2) * rat(3, 2));
        assert_eq!(residue_obstruction(&s).unwrap(), expected);
    }

    #[test]
    fn solve_psi_m0_unit() {
        let t = solve_psi(&poly(&[(0, 1)]), 0, 8).unwrap();
        assert_eq!(t.xi, rint(1));
        assert_eq!(t.psi.coeff(1), rint(1));
        assert_eq!(t.psi.terms().count(), 1);
        assert_eq!(t.psi.cap(), Cap::At(8));
    }

    #[test]
    fn solve_psi_m1_geometric() {
        // s = y + y^2: psi = y/(1-y), all coefficients 1.
        let t = solve_psi(&poly(&[(1, 1), (2, 1)]), 1, 8).unwrap();
        assert_eq!(t.xi, rint(1));
        for j in 1..=8i64 {
            assert_eq!(t.psi.coeff(j), rint(1), "psi coefficient {j}");
        }
        let cert = ode_certificate(&poly(&[(1, 1), (2, 1)]), &t, 1, 8);
        assert!(cert.is_zero_on_window());
    }

    #[test]
    fn solve_psi_m2_obstructed() {
        let err = solve_psi(&poly(&[(2, 1), (3, 1)]), 2, 6).unwrap_err();
        assert!(matches!(err, NormalizeError::Obstructed(_)));
    }

    #[test]
    fn solve_psi_m2_unobstructed() {
        let s = poly(&[(2, 1), (4, 1)]);
        let t = solve_psi(&s, 2, 8).unwrap();
        let cert = ode_certificate(&s, &t, 2, 8);
        assert!(cert.is_zero_on_window());
    }

    #[test]
    fn solve_psi_wrong_multiplicity() {
        assert!(matches!(
            solve_psi(&poly(&[(1, 1)]), 2, 6),
            Err(NormalizeError::WrongMultiplicity { .. })
        ));
        assert!(matches!(
            solve_psi(&poly(&[(3, 1)]), 2, 6),
            Err(NormalizeError::WrongMultiplicity { .. })
        ));
    }

    #[test]
    fn substitute_identity_is_noop() {
        let g = sl2();
        let r = StandardRMatrix::base(&g, 2).unwrap();
        let out = substitute_coords(&g, &r, &CoordTransform::identity(), 6).unwrap();
        for (k, c) in out.s.terms() {
            assert_eq!(r.s.coeff(k), *c);
        }
        for (&(i, j), t) in out.g.iter() {
            assert_eq!(r.g.coeff(i, j), *t);
        }
        for (&(i, j), t) in r.g.iter() {
            if i <= 6 && j <= 6 {
                assert_eq!(out.g.coeff(i, j), *t);
            }
        }
    }

    #[test]
    fn substitute_yang_scalar_part() {
        // r_1 with psi = y + y^2: s~ = 1/psi'(y) = 1/(1 + 2y).
        let g = sl2();
        let r = StandardRMatrix::base(&g, 1).unwrap();
        let t = CoordTransform {
            psi: poly(&[(1, 1), (2, 1)]),
            xi: rint(1),
        };
        let out = substitute_coords(&g, &r, &t, 6).unwrap();
        for k in 0..=6i64 {
            let expected = if k % 2 == 0 { rint(1) } else { rint(-1) } * rint(2).pow(k as i32);
            assert_eq!(out.s.coeff(k), expected, "s~ coefficient {k}");
        }
    }

    #[test]
    fn substitute_after_solve_normalizes() {
        // Round trip: solve_psi output turns s into exactly y^m.
        let g = sl2();
        let s = poly(&[(1, 1), (2, 1)]);
        let t = solve_psi(&s, 1, 14).unwrap();
        let r = StandardRMatrix::new(s, Tensor2Series::zero());
        let out = substitute_coords(&g, &r, &t, 6).unwrap();
        assert_eq!(out.s.coeff(1), rint(1));
        for k in 0..=6i64 {
            if k != 1 {
                assert!(out.s.coeff(k).is_zero(), "stray s~ coefficient at {k}");
            }
        }
        assert!(out.s.cap().covers(6));
    }

    #[test]
    fn substitution_preserves_cybe() {
        // xi r(psi(x), psi(y)) of an r-matrix still solves the CYBE;
        // windowed check after re-splitting the pole.
        let g = sl2();
        let r = StandardRMatrix::base(&g, 1).unwrap();
        let t = CoordTransform {
            psi: poly(&[(1, 1), (2, 1)]),
            xi: rint(1),
        };
        let out = substitute_coords(&g, &r, &t, 8).unwrap();
        let res = cyb_residual(&g, &out, 2).unwrap();
        assert!(
            res.is_zero_on_window(),
            "substituted matrix fails CYBE: {:?}",
            res.first_nonzero()
        );
        // And it stays skew.
        let skew = crate::series::tensor::skew_residual(&g, &out, 3).unwrap();
        assert!(skew.is_zero_on_window());
    }

    #[test]
    fn obstruction_invariant_under_substitution() {
        // An unobstructed multiplicity-2 scalar stays unobstructed after a
        // coordinate change.
        let g = sl2();
        let s = poly(&[(2, 1), (4, 1)]);
        let r = StandardRMatrix::new(s, Tensor2Series::zero());
        let t = CoordTransform {
            psi: poly(&[(1, 1), (2, 3)]),
            xi: rint(1),
        };
        let out = substitute_coords(&g, &r, &t, 8).unwrap();
        assert_eq!(residue_obstruction(&out.s.truncate(Cap::At(8))).unwrap(), rint(0));
    }
}

//! Windowed exact series arithmetic.
//!
//! Truncation is part of the value: every series carries a guaranteed-exact
//! cap. Coefficients at degrees up to the cap are exactly the coefficients
//! of the untruncated value; beyond the cap they are *unknown*, never
//! assumed zero. `Cap::Exact` marks values with no truncation at all
//! (polynomials, finite tensors), for which the stored support is the whole
//! story.
//!
//! Binary operations compute the largest cap on which the result is
//! provably exact. For products this is `min(cap_a + ord_b, cap_b + ord_a)`
//! where `ord` is the least support degree: an unknown coefficient of one
//! factor first pollutes the product at one past the cap plus the other
//! factor's lowest degree. Results are pruned to their cap, so stored
//! coefficients are always trustworthy.

pub mod tensor;
pub mod trivariate;

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::rat::{rint, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("inner series must have zero constant term")]
    NotComposable,
    #[error("cannot invert: no known nonzero coefficient")]
    NotInvertible,
}

/// Guaranteed-exact truncation cap for one degree axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cap {
    /// No truncation: all coefficients outside the stored support are zero.
    Exact,
    /// Coefficients of degree <= the bound are exact, higher ones unknown.
    At(i64),
}

impl Cap {
    pub fn min(self, other: Cap) -> Cap {
        match (self, other) {
            (Cap::Exact, c) | (c, Cap::Exact) => c,
            (Cap::At(a), Cap::At(b)) => Cap::At(a.min(b)),
        }
    }

    pub fn shift(self, k: i64) -> Cap {
        match self {
            Cap::Exact => Cap::Exact,
            Cap::At(a) => Cap::At(a + k),
        }
    }

    /// Cap of a convolution against a factor with the given cap and least
    /// support degree. An empty exact factor yields an exact zero product,
    /// reported here as `Exact`.
    pub fn conv(self, self_ord: Option<i64>, other: Cap, other_ord: Option<i64>) -> Cap {
        let pollution_from_other = match (other, self_ord) {
            (Cap::Exact, _) => Cap::Exact,
            (Cap::At(_), None) => Cap::Exact,
            (Cap::At(c), Some(o)) => Cap::At(c + o),
        };
        let pollution_from_self = match (self, other_ord) {
            (Cap::Exact, _) => Cap::Exact,
            (Cap::At(_), None) => Cap::Exact,
            (Cap::At(c), Some(o)) => Cap::At(c + o),
        };
        pollution_from_self.min(pollution_from_other)
    }

    pub fn covers(self, degree: i64) -> bool {
        match self {
            Cap::Exact => true,
            Cap::At(a) => degree <= a,
        }
    }

    pub fn bound(self) -> Option<i64> {
        match self {
            Cap::Exact => None,
            Cap::At(a) => Some(a),
        }
    }
}

/// Sparse Laurent/Taylor series over the rationals with a guaranteed cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarSeries {
    coeffs: BTreeMap<i64, Rat>,
    cap: Cap,
}

impl Default for ScalarSeries {
    fn default() -> Self {
        ScalarSeries::zero()
    }
}

impl ScalarSeries {
    pub fn zero() -> Self {
        ScalarSeries {
            coeffs: BTreeMap::new(),
            cap: Cap::Exact,
        }
    }

    pub fn one() -> Self {
        Self::monomial(0, rint(1))
    }

    pub fn monomial(degree: i64, coeff: Rat) -> Self {
        let mut s = Self::zero();
        s.set(degree, coeff);
        s
    }

    /// Exact polynomial from `(degree, coefficient)` pairs.
    pub fn from_terms(terms: impl IntoIterator<Item = (i64, Rat)>) -> Self {
        let mut s = Self::zero();
        for (d, c) in terms {
            s.add_to(d, c);
        }
        s
    }

    /// Same data, but only trusted up to `cap`.
    pub fn with_cap(mut self, cap: Cap) -> Self {
        self.cap = cap;
        self.prune();
        self
    }

    pub fn cap(&self) -> Cap {
        self.cap
    }

    pub fn coeff(&self, degree: i64) -> Rat {
        self.coeffs.get(&degree).cloned().unwrap_or_else(Rat::zero)
    }

    /// Whether the coefficient at `degree` is known exactly.
    pub fn knows(&self, degree: i64) -> bool {
        self.cap.covers(degree)
    }

    fn set(&mut self, degree: i64, coeff: Rat) {
        if coeff.is_zero() {
            self.coeffs.remove(&degree);
        } else {
            self.coeffs.insert(degree, coeff);
        }
    }

    fn add_to(&mut self, degree: i64, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(degree).or_insert_with(Rat::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.coeffs.remove(&degree);
        }
    }

    fn prune(&mut self) {
        if let Cap::At(cap) = self.cap {
            self.coeffs.retain(|d, _| *d <= cap);
        }
    }

    /// Least degree with a nonzero stored coefficient.
    pub fn order(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    /// Lower bound for the support including the unknown region beyond the
    /// cap. `None` means provably empty support (the exact zero series).
    pub fn effective_order(&self) -> Option<i64> {
        match self.cap {
            Cap::Exact => self.order(),
            Cap::At(c) => Some(self.order().map_or(c + 1, |o| o.min(c + 1))),
        }
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// True when every known coefficient vanishes. For capped series this
    /// only asserts vanishing on the window.
    pub fn is_zero_on_window(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_exactly_zero(&self) -> bool {
        self.coeffs.is_empty() && self.cap == Cap::Exact
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rat)> {
        self.coeffs.iter().map(|(d, c)| (*d, c))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.cap = self.cap.min(other.cap);
        for (d, c) in other.terms() {
            out.add_to(d, c.clone());
        }
        out.prune();
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        ScalarSeries {
            coeffs: self.coeffs.iter().map(|(d, c)| (*d, -c)).collect(),
            cap: self.cap,
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return ScalarSeries {
                coeffs: BTreeMap::new(),
                cap: self.cap,
            };
        }
        ScalarSeries {
            coeffs: self.coeffs.iter().map(|(d, v)| (*d, v * c)).collect(),
            cap: self.cap,
        }
    }

    /// Multiplication by `x^k`.
    pub fn shift(&self, k: i64) -> Self {
        ScalarSeries {
            coeffs: self.coeffs.iter().map(|(d, c)| (d + k, c.clone())).collect(),
            cap: self.cap.shift(k),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let cap = self
            .cap
            .conv(self.effective_order(), other.cap, other.effective_order());
        let mut out = ScalarSeries {
            coeffs: BTreeMap::new(),
            cap,
        };
        for (da, ca) in self.terms() {
            for (db, cb) in other.terms() {
                let d = da + db;
                if cap.covers(d) {
                    out.add_to(d, ca * cb);
                }
            }
        }
        out
    }

    pub fn truncate(&self, cap: Cap) -> Self {
        self.clone().with_cap(self.cap.min(cap))
    }

    pub fn derivative(&self) -> Self {
        let mut out = ScalarSeries {
            coeffs: BTreeMap::new(),
            cap: self.cap.shift(-1),
        };
        for (d, c) in self.terms() {
            out.add_to(d - 1, c * rint(d));
        }
        out.prune();
        out
    }

    /// Multiplicative inverse. Requires a known nonzero leading coefficient;
    /// Laurent inversion is permitted. For a series of order `o` exact to
    /// `cap`, the inverse is exact to `cap - 2 o`.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        let ord = self.order().ok_or(SeriesError::NotInvertible)?;
        let lead = self.coeff(ord);
        let lead_inv = rint(1) / &lead;
        // Inverse coefficients v_k of (sum_{k>=0} a_k x^k)^{-1} with
        // a_k := coeff(ord + k), a_0 invertible:
        // v_0 = 1/a_0, v_n = -(1/a_0) sum_{i=1..n} a_i v_{n-i}.
        let depth = match self.cap {
            Cap::Exact => None,
            Cap::At(c) => Some(c - ord),
        };
        let cap = match depth {
            None => Cap::Exact,
            Some(d) => Cap::At(d - ord),
        };
        // For exact polynomials the inverse is still an infinite series;
        // we must choose a finite depth. Exact inputs therefore produce a
        // capped result only when the caller truncates afterwards; here we
        // keep a generous default depth for exact inputs.
        const DEFAULT_DEPTH: i64 = 48;
        let n_terms = depth.unwrap_or(DEFAULT_DEPTH).max(0) as usize;
        let mut v: Vec<Rat> = Vec::with_capacity(n_terms + 1);
        v.push(lead_inv.clone());
        for n in 1..=n_terms {
            let mut acc = Rat::zero();
            for i in 1..=n {
                let a_i = self.coeff(ord + i as i64);
                if a_i.is_zero() {
                    continue;
                }
                acc += a_i * &v[n - i];
            }
            v.push(-&lead_inv * acc);
        }
        let out_cap = match cap {
            Cap::Exact => Cap::At(DEFAULT_DEPTH - ord),
            c => c,
        };
        let mut out = ScalarSeries {
            coeffs: BTreeMap::new(),
            cap: out_cap,
        };
        for (k, c) in v.into_iter().enumerate() {
            let d = -ord + k as i64;
            if out_cap.covers(d) {
                out.add_to(d, c);
            }
        }
        Ok(out)
    }

    /// Composition `self(inner)`; the inner series needs zero constant term
    /// and the outer series must be Taylor.
    pub fn compose(&self, inner: &Self) -> Result<Self, SeriesError> {
        match inner.order() {
            Some(o) if o <= 0 => return Err(SeriesError::NotComposable),
            _ => {}
        }
        if let Some(o) = self.order() {
            if o < 0 {
                return Err(SeriesError::NotComposable);
            }
        }
        if self.is_exactly_zero() {
            return Ok(ScalarSeries::zero());
        }
        let cap = self.cap.min(inner.cap);
        let mut out = ScalarSeries {
            coeffs: BTreeMap::new(),
            cap,
        };
        // Horner over descending degrees of self keeps powers of the inner
        // series bounded by the cap.
        let mut acc = ScalarSeries::zero().with_cap(cap);
        let degrees: Vec<i64> = self.coeffs.keys().rev().copied().collect();
        let mut prev: Option<i64> = None;
        for d in degrees {
            if let Some(p) = prev {
                let gap = p - d;
                for _ in 0..gap {
                    acc = acc.mul(inner).truncate(cap);
                }
            } else {
                // Highest term: start accumulator at its coefficient.
            }
            acc = acc.add(&ScalarSeries::monomial(0, self.coeff(d)));
            prev = Some(d);
        }
        if let Some(p) = prev {
            for _ in 0..p {
                acc = acc.mul(inner).truncate(cap);
            }
        }
        out = out.add(&acc);
        out.prune();
        Ok(out)
    }

    /// Exact integer power (non-negative).
    pub fn pow(&self, exp: u32) -> Self {
        let mut out = ScalarSeries::one();
        for _ in 0..exp {
            out = out.mul(self);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(terms: &[(i64, i64)]) -> ScalarSeries {
        ScalarSeries::from_terms(terms.iter().map(|(d, c)| (*d, rint(*c))))
    }

    #[test]
    fn invert_unit() {
        let one = ScalarSeries::one();
        let inv = one.invert().unwrap();
        assert_eq!(inv.coeff(0), rint(1));
        assert!(inv.terms().all(|(d, _)| d == 0));
    }

    #[test]
    fn invert_laurent_example() {
        // 1/(y^2 + y^3) = y^-2 - y^-1 + 1 - y + ... (geometric series).
        let f = poly(&[(2, 1), (3, 1)]).with_cap(Cap::At(10));
        let inv = f.invert().unwrap();
        assert_eq!(inv.cap(), Cap::At(6));
        for k in -2..=6 {
            let expected = if (k + 2) % 2 == 0 { rint(1) } else { rint(-1) };
            assert_eq!(inv.coeff(k), expected, "coefficient at {k}");
        }
    }

    #[test]
    fn compose_example() {
        // (1 + y) o (y + y^2) = 1 + y + y^2.
        let outer = poly(&[(0, 1), (1, 1)]);
        let inner = poly(&[(1, 1), (2, 1)]);
        let composed = outer.compose(&inner).unwrap();
        assert_eq!(composed.coeff(0), rint(1));
        assert_eq!(composed.coeff(1), rint(1));
        assert_eq!(composed.coeff(2), rint(1));
        assert!(composed.coeff(3).is_zero());
    }

    #[test]
    fn compose_rejects_constant_term() {
        let outer = poly(&[(0, 1), (1, 1)]);
        let inner = poly(&[(0, 1), (1, 1)]);
        assert_eq!(outer.compose(&inner).unwrap_err(), SeriesError::NotComposable);
    }

    #[test]
    fn derivative_and_shift() {
        let f = poly(&[(0, 3), (2, 5)]);
        let df = f.derivative();
        assert_eq!(df.coeff(1), rint(10));
        assert!(df.coeff(0).is_zero());
        let g = f.shift(-2);
        assert_eq!(g.coeff(-2), rint(3));
        assert_eq!(g.coeff(0), rint(5));
    }

    #[test]
    fn capped_sum_prunes() {
        let f = poly(&[(0, 1), (5, 1)]).with_cap(Cap::At(3));
        assert!(f.coeff(5).is_zero());
        assert!(!f.knows(5));
        assert!(f.knows(3));
    }

    fn arb_poly() -> impl Strategy<Value = ScalarSeries> {
        proptest::collection::vec((-4i64..8, -5i64..5), 0..6).prop_map(|terms| {
            ScalarSeries::from_terms(terms.into_iter().map(|(d, c)| (d, rint(c))))
        })
    }

    proptest! {
        // Window soundness: truncating inputs then multiplying agrees with
        // multiplying exactly then truncating, on the reported window.
        #[test]
        fn mul_window_soundness(a in arb_poly(), b in arb_poly(), cap_a in -2i64..9, cap_b in -2i64..9) {
            let exact = a.mul(&b);
            let ta = a.truncate(Cap::At(cap_a));
            let tb = b.truncate(Cap::At(cap_b));
            let windowed = ta.mul(&tb);
            if let Cap::At(w) = windowed.cap() {
                for d in -10..=w {
                    prop_assert_eq!(windowed.coeff(d), exact.coeff(d), "degree {}", d);
                }
            } else {
                prop_assert_eq!(&windowed, &exact);
            }
        }

        // f * invert(f) = 1 on the guaranteed window.
        #[test]
        fn invert_round_trip(a in arb_poly(), lead in 1i64..5) {
            // Force a nonzero leading coefficient at a fixed degree.
            let f = a.add(&ScalarSeries::monomial(-5, rint(lead))).with_cap(Cap::At(8));
            let inv = f.invert().unwrap();
            let prod = f.mul(&inv);
            if let Cap::At(w) = prod.cap() {
                prop_assert!(w >= 0, "window collapsed: {:?}", prod.cap());
                for d in -30..=w {
                    let expected = if d == 0 { rint(1) } else { rint(0) };
                    prop_assert_eq!(prod.coeff(d), expected, "degree {}", d);
                }
            }
        }

        // Composition associates with evaluation order on the window:
        // (f+g) o psi = f o psi + g o psi.
        #[test]
        fn compose_additive(f in arb_poly(), g in arb_poly(), inner in arb_poly()) {
            let f = ScalarSeries::from_terms(f.terms().filter(|(d, _)| *d >= 0).map(|(d, c)| (d, c.clone())));
            let g = ScalarSeries::from_terms(g.terms().filter(|(d, _)| *d >= 0).map(|(d, c)| (d, c.clone())));
            let psi = inner.shift(1 - inner.order().unwrap_or(0)).truncate(Cap::At(8));
            if psi.order().is_none() {
                return Ok(());
            }
            let lhs = f.add(&g).compose(&psi).unwrap();
            let rhs = f.compose(&psi).unwrap().add(&g.compose(&psi).unwrap());
            let w = match lhs.cap().min(rhs.cap()) { Cap::At(w) => w, Cap::Exact => 20 };
            for d in 0..=w {
                prop_assert_eq!(lhs.coeff(d), rhs.coeff(d));
            }
        }
    }
}

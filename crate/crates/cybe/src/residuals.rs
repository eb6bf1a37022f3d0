//! Residual computations: the formal CYBE in the mixed trivariate regime,
//! cobrackets, cocycle / co-Jacobi residuals and the twist condition.
//!
//! Every occurrence of an r-matrix keeps its native regime (first variable
//! Laurent, second Taylor), so the CYBE residual lives in
//! `(g (x) g (x) g)((x1))((x2))[[x3]]` and the three bracket terms are
//! never re-expanded across regimes.
//!
//! Window growth: with the s-part of order `m`, the internal expansion is
//! carried to y-degree `2 w + 1 - m` for a requested output window `w`.
//! Unknown tail terms of the expansion can then only reach monomials whose
//! second or third exponent exceeds `w`, so the reported window is
//! guaranteed. This enlargement is exercised by the window-extension
//! stability test.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::lie::{GElement, LieAlgebra};
use crate::rat::Rat;
use crate::series::tensor::{GPoly, StandardRMatrix, Tensor2Series};
use crate::series::trivariate::{
    bracket_12_13, bracket_12_23, bracket_13_23, embed_12, rectangle_caps, Tensor3Series,
};
use crate::series::{Cap, SeriesError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CybeError {
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("tensor is not skew-symmetric")]
    NotSkew,
    #[error("unknown base index {0} (expected 1, 2 or 3)")]
    BadBase(usize),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Number of worker threads for the trivariate convolution, from the
/// `CYBE_THREADS` environment variable. Results do not depend on it.
pub fn thread_budget() -> usize {
    std::env::var("CYBE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

fn split_entries(series: &Tensor2Series, chunks: usize) -> Vec<Tensor2Series> {
    let entries: Vec<_> = series.iter().map(|(k, v)| (*k, v.clone())).collect();
    if chunks <= 1 || entries.len() <= 1 {
        return vec![series.clone()];
    }
    let per = entries.len().div_ceil(chunks);
    entries
        .chunks(per)
        .map(|chunk| {
            Tensor2Series::from_entries(chunk.iter().cloned())
                .with_caps(series.x_cap(), series.y_cap())
        })
        .collect()
}

/// `[a^12, a^13] + [a^12, a^23] + [a^13, a^23]` with caller-supplied
/// validity caps, optionally block-parallel over the entries of the left
/// factor. Chunk results are merged in a fixed order, so the output is
/// deterministic.
fn cyb_brackets(algebra: &LieAlgebra, a: &Tensor2Series, caps: [Cap; 3]) -> Tensor3Series {
    let threads = thread_budget();
    if threads <= 1 {
        return bracket_12_13(algebra, a, a, caps)
            .add(&bracket_12_23(algebra, a, a, caps))
            .add(&bracket_13_23(algebra, a, a, caps));
    }
    let parts = split_entries(a, threads);
    let results: Vec<Tensor3Series> = std::thread::scope(|scope| {
        let handles: Vec<_> = parts
            .iter()
            .map(|part| {
                scope.spawn(move || {
                    bracket_12_13(algebra, part, a, caps)
                        .add(&bracket_12_23(algebra, part, a, caps))
                        .add(&bracket_13_23(algebra, part, a, caps))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut out = results[0].clone();
    for part in &results[1..] {
        out = out.add(part);
    }
    out
}

/// Safe caps for `CYB` of a self-contained Taylor tensor: the componentwise
/// minimum of the three rectangle bounds.
fn generic_cyb_caps(a: &Tensor2Series) -> [Cap; 3] {
    let bounds = rectangle_caps(a, a);
    let mut caps = bounds[0];
    for b in &bounds[1..] {
        for axis in 0..3 {
            caps[axis] = caps[axis].min(b[axis]);
        }
    }
    caps
}

/// The formal CYBE residual of a standard-form r-matrix, guaranteed exact
/// on the cube of side `window` (all three exponents at most `window`; the
/// Laurent floors are reported by the result's support).
pub fn cyb_residual(
    algebra: &LieAlgebra,
    r: &StandardRMatrix,
    window: i64,
) -> Result<Tensor3Series, CybeError> {
    if window < 0 {
        return Err(CybeError::WindowTooSmall("negative window".into()));
    }
    let m = r.s.order().unwrap_or(0).max(0);
    let ny_internal = (2 * window + 1 - m).max(m).max(window);
    if !r.s.cap().covers(ny_internal) {
        return Err(CybeError::WindowTooSmall(format!(
            "s(y) must be known to degree {ny_internal} for output window {window}"
        )));
    }
    if !r.g.y_cap().covers(ny_internal) {
        return Err(CybeError::WindowTooSmall(format!(
            "g(x,y) must be known to y-degree {ny_internal} for output window {window}"
        )));
    }
    let laurent_depth = ny_internal - m + 1;
    if !r.g.x_cap().covers(window + laurent_depth) {
        return Err(CybeError::WindowTooSmall(format!(
            "g(x,y) must be known to x-degree {} for output window {window}",
            window + laurent_depth
        )));
    }
    let expansion = r.expand_at_y(algebra, ny_internal)?;
    // The caps below are justified by the regime structure rather than the
    // generic rectangle rule: every term of the expansion missing beyond
    // y-degree `ny_internal` carries Laurent x-depth below `m - 1 -
    // ny_internal`, so inside the requested cube its products land at a
    // second or third exponent above `window`. See the window-extension
    // stability test.
    let caps = [Cap::At(window); 3];
    Ok(cyb_brackets(algebra, &expansion, caps))
}

/// The cobracket `dr(f) = [f(x) (x) 1 + 1 (x) f(y), r(x,y)]` of a g-valued
/// polynomial. The Yang-part pole cancels through the invariance of the
/// Casimir, leaving
/// `sum_d s(y) ((x^d - y^d)/(x - y)) [f_d (x) 1, Omega] + [f, g]-terms`,
/// which is Taylor in both variables.
pub fn cobracket(
    algebra: &LieAlgebra,
    r: &StandardRMatrix,
    f: &GPoly,
) -> Result<Tensor2Series, CybeError> {
    let omega = algebra.casimir();
    let mut out = Tensor2Series::zero();
    for (&d, coeff) in &f.terms {
        if d < 0 {
            return Err(CybeError::WindowTooSmall(
                "cobracket input must be a Taylor polynomial".into(),
            ));
        }
        let action = algebra.ad_first(coeff, &omega);
        if action.is_zero() || d == 0 {
            continue;
        }
        // (x^d - y^d)/(x - y) = sum_{a+b=d-1} x^a y^b, times [f_d (x) 1, Omega].
        let mut dd = Tensor2Series::zero();
        for a in 0..d {
            dd.add_to((a, d - 1 - a), action.clone());
        }
        out = out.add(&dd);
    }
    let yang_part = out.mul_scalar_y(&r.s);
    let g_part = r
        .g
        .ad_first_poly(algebra, f)
        .add(&r.g.ad_second_poly(algebra, f));
    Ok(yang_part.add(&g_part))
}

/// Lie bracket of g-valued polynomials, degreewise.
pub fn gpoly_bracket(algebra: &LieAlgebra, f: &GPoly, g: &GPoly) -> GPoly {
    let cap = f.cap.conv(f.min_degree(), g.cap, g.min_degree());
    let mut out = GPoly::zero(algebra.dim);
    out.cap = cap;
    for (df, af) in &f.terms {
        for (dg, ag) in &g.terms {
            let d = df + dg;
            if cap.covers(d) {
                let br = algebra.bracket(af, ag).expect("dimension checked");
                out.add_to(d, br);
            }
        }
    }
    out
}

/// Cocycle residual
/// `delta([f,g]) - [f (x) 1 + 1 (x) f, delta(g)] + [g (x) 1 + 1 (x) g, delta(f)]`
/// with `delta = cobracket(r, .)`; zero for any formal r-matrix. The
/// converse fails: a matrix with nonzero CYBE residual can still satisfy
/// the cocycle identity on particular pairs, so this is a necessary check
/// only.
pub fn cocycle_residual(
    algebra: &LieAlgebra,
    r: &StandardRMatrix,
    f: &GPoly,
    g: &GPoly,
) -> Result<Tensor2Series, CybeError> {
    let delta_fg = cobracket(algebra, r, &gpoly_bracket(algebra, f, g))?;
    let delta_g = cobracket(algebra, r, g)?;
    let delta_f = cobracket(algebra, r, f)?;
    let act_f = delta_g
        .ad_first_poly(algebra, f)
        .add(&delta_g.ad_second_poly(algebra, f));
    let act_g = delta_f
        .ad_first_poly(algebra, g)
        .add(&delta_f.ad_second_poly(algebra, g));
    Ok(delta_fg.sub(&act_f).add(&act_g))
}

/// `(delta (x) 1) t` for a Taylor tensor `t`: applies `delta` to every
/// first-leg monomial `I_a x^i`, embedding the result in slots (1, 2) with
/// the second leg moved to slot 3.
fn delta_on_first_leg(
    algebra: &LieAlgebra,
    r: &StandardRMatrix,
    t: &Tensor2Series,
) -> Result<Tensor3Series, CybeError> {
    if t.x_cap() != Cap::Exact {
        return Err(CybeError::WindowTooSmall(
            "first-leg cobracket needs the x-support known exactly".into(),
        ));
    }
    let mut cache: BTreeMap<(usize, i64), Tensor2Series> = BTreeMap::new();
    let mut out = Tensor3Series::zero().with_caps([Cap::Exact, Cap::Exact, t.y_cap()]);
    for (&(i, j), tensor) in t.iter() {
        for (&(a, b), value) in tensor.iter() {
            let delta_mono = match cache.get(&(a, i)) {
                Some(d) => d.clone(),
                None => {
                    let mono = GPoly::monomial(algebra.dim, GElement::basis(algebra.dim, a), i);
                    let d = cobracket(algebra, r, &mono)?;
                    cache.insert((a, i), d.clone());
                    d
                }
            };
            out = out.add(&embed_12(&delta_mono, b, j, value));
        }
    }
    Ok(out)
}

/// Co-Jacobi residual `Alt((delta (x) 1) delta(f))` for `delta =
/// cobracket(r, .)`; vanishes whenever the CYBE residual of `r` does.
pub fn cojacobi_residual(
    algebra: &LieAlgebra,
    r: &StandardRMatrix,
    f: &GPoly,
) -> Result<Tensor3Series, CybeError> {
    let delta_f = cobracket(algebra, r, f)?;
    Ok(delta_on_first_leg(algebra, r, &delta_f)?.alternate())
}

/// Checks `t(x,y) + tau t(y,x) = 0` on the window.
pub fn is_skew(t: &Tensor2Series) -> bool {
    t.add(&t.swap_variables_and_legs()).is_zero_on_window()
}

/// Twist residual for the base structure of `r_i`: `CYB(s) -
/// Alt((dr_i (x) 1) s)`. By the twist/CYBE correspondence this equals the
/// CYBE residual of `r_i + s`, computed here along an independent route.
/// The twist data must be skew and Taylor.
pub fn twist_residual(
    algebra: &LieAlgebra,
    base: usize,
    s: &Tensor2Series,
    window: i64,
) -> Result<Tensor3Series, CybeError> {
    let r_base = StandardRMatrix::base(algebra, base).ok_or(CybeError::BadBase(base))?;
    if !is_skew(s) {
        return Err(CybeError::NotSkew);
    }
    if s.x_min().is_some_and(|m| m < 0) || s.y_min().is_some_and(|m| m < 0) {
        return Err(CybeError::WindowTooSmall(
            "twist data must be Taylor in both variables".into(),
        ));
    }
    let cyb_s = cyb_brackets(algebra, s, generic_cyb_caps(s));
    let alt_part = delta_on_first_leg(algebra, &r_base, s)?.alternate();
    Ok(cyb_s.sub(&alt_part).truncate([Cap::At(window); 3]))
}

/// Residual report data extracted from a trivariate series.
pub fn first_nonzero_entry(
    t: &Tensor3Series,
) -> Option<((i64, i64, i64), (usize, usize, usize), Rat)> {
    t.first_nonzero()
}

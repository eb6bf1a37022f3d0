//! Typed JSON reports. Every residual report carries its guaranteed
//! window so downstream tooling never over-trusts a truncated zero, and
//! all scalars are `"num/den"` strings. Serialization is byte-stable:
//! struct fields in declaration order, sparse data pre-sorted.

use serde::Serialize;

use crate::rat::fmt_rat;
use crate::series::tensor::Tensor2Series;
use crate::series::trivariate::Tensor3Series;
use crate::series::Cap;

#[derive(Debug, Clone, Serialize)]
pub struct WindowBound {
    /// `null` means exact: no truncation on this axis.
    pub cap: Option<i64>,
    /// Least degree present in the support, when any.
    pub min: Option<i64>,
}

fn cap_to_bound(cap: Cap, min: Option<i64>) -> WindowBound {
    WindowBound {
        cap: cap.bound(),
        min,
    }
}

/// Report for a trivariate residual.
#[derive(Debug, Clone, Serialize)]
pub struct Residual3Report {
    pub zero_on_window: bool,
    /// `[i1, i2, i3, a, b, c, "num/den"]` of the first nonzero monomial.
    pub first_nonzero_monomial: Option<(i64, i64, i64, usize, usize, usize, String)>,
    pub guaranteed_window: Vec<WindowBound>,
}

impl Residual3Report {
    pub fn from_series(series: &Tensor3Series) -> Self {
        let mins = series.mins();
        let caps = series.caps();
        let first = series.first_nonzero().map(|((i1, i2, i3), (a, b, c), v)| {
            (i1, i2, i3, a, b, c, fmt_rat(&v))
        });
        Residual3Report {
            zero_on_window: series.is_zero_on_window(),
            first_nonzero_monomial: first,
            guaranteed_window: vec![
                cap_to_bound(caps[0], mins.map(|m| m.0)),
                cap_to_bound(caps[1], mins.map(|m| m.1)),
                cap_to_bound(caps[2], mins.map(|m| m.2)),
            ],
        }
    }
}

/// Report for a bivariate residual.
#[derive(Debug, Clone, Serialize)]
pub struct Residual2Report {
    pub zero_on_window: bool,
    /// `[i, j, a, b, "num/den"]` of the first nonzero monomial.
    pub first_nonzero_monomial: Option<(i64, i64, usize, usize, String)>,
    pub guaranteed_window: Vec<WindowBound>,
}

impl Residual2Report {
    pub fn from_series(series: &Tensor2Series) -> Self {
        let first = series
            .first_nonzero()
            .map(|((i, j), (a, b), v)| (i, j, a, b, fmt_rat(&v)));
        Residual2Report {
            zero_on_window: series.is_zero_on_window(),
            first_nonzero_monomial: first,
            guaranteed_window: vec![
                cap_to_bound(series.x_cap(), series.x_min()),
                cap_to_bound(series.y_cap(), series.y_min()),
            ],
        }
    }
}

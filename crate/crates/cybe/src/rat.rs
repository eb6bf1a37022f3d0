//! Exact rational scalars and their `"num/den"` wire format.
//!
//! All coefficients in this crate are arbitrary-precision rationals.
//! Manifests and reports never contain floats; every scalar crosses the
//! process boundary as a `"num/den"` string (or a plain integer string).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

/// Shorthand for a rational from two machine integers.
pub fn rat(num: i64, den: i64) -> Rat {
    assert!(den != 0, "zero denominator");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for an integer rational.
pub fn rint(num: i64) -> Rat {
    Rat::from_integer(BigInt::from(num))
}

/// Parses `"num/den"` or `"num"`. Rejects zero denominators and any
/// non-integer syntax, so float contamination is impossible.
pub fn parse_rat(text: &str) -> Result<Rat, String> {
    let text = text.trim();
    let (num_str, den_str) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num_str
        .parse()
        .map_err(|_| format!("invalid numerator in rational '{text}'"))?;
    let den: BigInt = den_str
        .parse()
        .map_err(|_| format!("invalid denominator in rational '{text}'"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in rational '{text}'"));
    }
    Ok(Rat::new(num, den))
}

/// Canonical text form: integers print bare, everything else as `num/den`
/// with the sign on the numerator.
pub fn fmt_rat(value: &Rat) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else if value.denom().is_negative() {
        format!("{}/{}", -value.numer(), -value.denom())
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

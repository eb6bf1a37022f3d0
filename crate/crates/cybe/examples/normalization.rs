//! Multiplicity classification and coordinate normalization of the
//! scalar part.
//!
//! Only orders 0, 1 and 2 occur for formal r-matrices; order >= 3 is
//! rejected outright. For order 2 the residue of 1/s decides existence:
//! `y^2 + y^3` is obstructed while `y^2 + y^4` normalizes. The solver
//! returns `(xi, psi)` with the exact certificate `xi s(psi) = y^m psi'`,
//! and the substitution turns the r-matrix back into standard form with
//! scalar part exactly `y^m`.
//!
//! Run with `cargo run --release --example normalization`.

use cybe::lie::LieAlgebra;
use cybe::normalize::{
    multiplicity, ode_certificate, residue_obstruction, solve_psi, substitute_coords,
    Multiplicity, NormalizeError,
};
use cybe::rat::rint;
use cybe::series::tensor::{StandardRMatrix, Tensor2Series};
use cybe::series::ScalarSeries;

fn poly(terms: &[(i64, i64)]) -> ScalarSeries {
    ScalarSeries::from_terms(terms.iter().map(|(d, c)| (*d, rint(*c))))
}

fn main() {
    // Classification.
    for (label, s) in [
        ("3 + y", poly(&[(0, 3), (1, 1)])),
        ("y^2 + y^5", poly(&[(2, 1), (5, 1)])),
        ("y^3", poly(&[(3, 1)])),
    ] {
        println!("multiplicity({label}) = {:?}", multiplicity(&s).unwrap());
    }
    assert_eq!(
        multiplicity(&poly(&[(3, 1)])).unwrap(),
        Multiplicity::Unsupported(3)
    );

    // The obstruction residue.
    let obstructed = poly(&[(2, 1), (3, 1)]);
    let fine = poly(&[(2, 1), (4, 1)]);
    println!(
        "res 1/(y^2 + y^3) = {}, res 1/(y^2 + y^4) = {}",
        cybe::rat::fmt_rat(&residue_obstruction(&obstructed).unwrap()),
        cybe::rat::fmt_rat(&residue_obstruction(&fine).unwrap()),
    );
    assert!(matches!(
        solve_psi(&obstructed, 2, 8),
        Err(NormalizeError::Obstructed(_))
    ));
    println!("y^2 + y^3 rejected: obstruction residue -1");

    // Solving the normalization ODE for m = 1.
    let s = poly(&[(1, 1), (2, 1)]);
    let transform = solve_psi(&s, 1, 14).unwrap();
    let psi_coeffs: Vec<String> = transform
        .psi
        .terms()
        .take(5)
        .map(|(d, c)| format!("y^{d}: {}", cybe::rat::fmt_rat(c)))
        .collect();
    println!(
        "solve_psi(y + y^2): xi = {}, psi = [{}] ... (geometric series)",
        cybe::rat::fmt_rat(&transform.xi),
        psi_coeffs.join(", ")
    );
    let cert = ode_certificate(&s, &transform, 1, 14);
    println!("ODE certificate zero on window 14: {}", cert.is_zero_on_window());
    assert!(cert.is_zero_on_window());

    // Substituting back: the scalar part becomes exactly y.
    let algebra = LieAlgebra::sl(2).unwrap();
    let r = StandardRMatrix::new(s, Tensor2Series::zero());
    let normalized = substitute_coords(&algebra, &r, &transform, 6).unwrap();
    let s_terms: Vec<String> = normalized
        .s
        .terms()
        .map(|(d, c)| format!("y^{d}: {}", cybe::rat::fmt_rat(c)))
        .collect();
    println!("substituted scalar part on window 6: [{}]", s_terms.join(", "));
    assert_eq!(normalized.s.coeff(1), rint(1));
    assert_eq!(normalized.s.terms().count(), 1);

    // The unobstructed order-2 series normalizes too.
    let transform = solve_psi(&fine, 2, 10).unwrap();
    let cert = ode_certificate(&fine, &transform, 2, 10);
    println!(
        "y^2 + y^4 normalizes with certificate zero: {}",
        cert.is_zero_on_window()
    );
    assert!(cert.is_zero_on_window());
}

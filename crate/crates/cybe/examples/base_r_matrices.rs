//! The three base r-matrices and their residual checks.
//!
//! Builds `r_1 = Omega/(x-y)`, `r_2 = y Omega/(x-y) + r_DJ` and
//! `r_3 = y^2 Omega/(x-y) + y Omega` over sl(2) and sl(3), then verifies
//! exactly on a window of 6 that each is skew-symmetric and solves the
//! formal classical Yang-Baxter equation.
//!
//! Run with `cargo run --release --example base_r_matrices`.

use cybe::lie::LieAlgebra;
use cybe::residuals::cyb_residual;
use cybe::series::tensor::{skew_residual, StandardRMatrix};

fn main() {
    let window = 6;
    for rank in [2usize, 3] {
        let algebra = LieAlgebra::sl(rank).unwrap();
        println!(
            "sl({rank}): dimension {}, basis {:?}",
            algebra.dim, algebra.basis_labels
        );
        for base in [1usize, 2, 3] {
            let r = StandardRMatrix::base(&algebra, base).unwrap();
            let skew = skew_residual(&algebra, &r, window).unwrap();
            let cybe = cyb_residual(&algebra, &r, window).unwrap();
            println!(
                "  r_{base}: skew residual zero on window {window}: {}, CYBE residual zero: {}",
                skew.is_zero_on_window(),
                cybe.is_zero_on_window()
            );
            assert!(skew.is_zero_on_window());
            assert!(cybe.is_zero_on_window());
        }
    }
    // A failing case for contrast: the symmetric perturbation h (x) h
    // breaks the equation, and the first offending monomial is reported.
    let algebra = LieAlgebra::sl(2).unwrap();
    let h = cybe::lie::GElement::basis(3, 1);
    let bad = cybe::series::tensor::Tensor2Series::constant(cybe::lie::Tensor2::pure(&h, &h));
    let r_bad = StandardRMatrix::yang().plus(&bad);
    let res = cyb_residual(&algebra, &r_bad, 4).unwrap();
    let witness = res.first_nonzero().expect("perturbation must fail");
    println!(
        "counterexample Omega/(x-y) + h(x)h: first nonzero CYBE monomial at degrees {:?}, tensor slot {:?}, value {}",
        witness.0,
        witness.1,
        cybe::rat::fmt_rat(&witness.2)
    );
    assert!(!res.is_zero_on_window());
}

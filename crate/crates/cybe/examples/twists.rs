//! Topological twists and their three faces.
//!
//! The constant Jordanian tensor `s = h (x) e - e (x) h` is a twist of the
//! base structure of `r_1`: its twist residual vanishes, the r-matrix
//! `r_1 + s` solves the CYBE, the associated linear map `T` acts by
//! `T w = B(w, h) e - B(w, e) h`, and `T` round-trips back to `s` through
//! the dual-set reconstruction. The subalgebra attached to the twist is
//! commensurable with `W_1`.
//!
//! Run with `cargo run --release --example twists`.

use cybe::lagrangian::{
    commensurability, spans_equal, t_to_twist, twist_associated_w, twist_to_t,
};
use cybe::lie::{GElement, LieAlgebra, Tensor2};
use cybe::residuals::{cyb_residual, twist_residual};
use cybe::series::tensor::{StandardRMatrix, Tensor2Series};

fn main() {
    let algebra = LieAlgebra::sl(2).unwrap();
    let h = GElement::basis(3, 1);
    let e = GElement::basis(3, 0);
    let s = Tensor2Series::constant(Tensor2::pure(&h, &e).sub(&Tensor2::pure(&e, &h)));
    let base = 1usize;

    let residual = twist_residual(&algebra, base, &s, 4).unwrap();
    println!(
        "jordanian twist residual zero on window 4: {}",
        residual.is_zero_on_window()
    );
    assert!(residual.is_zero_on_window());

    let r_sum = StandardRMatrix::base(&algebra, base).unwrap().plus(&s);
    let via_sum = cyb_residual(&algebra, &r_sum, 4).unwrap();
    println!(
        "CYBE residual of r_1 + s zero on window 4: {}",
        via_sum.is_zero_on_window()
    );
    assert!(via_sum.is_zero_on_window());

    // The linear map: images of the dual basis elements.
    let t = twist_to_t(&algebra, base, &s).unwrap();
    println!("linear map T with {} independent image vectors:", t.pairs.len());
    for (p, tp) in &t.pairs {
        println!(
            "  p = {:?} |-> Tp = {:?}",
            p.terms
                .iter()
                .map(|(d, c)| (d, c.coeffs.iter().map(cybe::rat::fmt_rat).collect::<Vec<_>>()))
                .collect::<Vec<_>>(),
            tp.terms
                .iter()
                .map(|(d, c)| (d, c.coeffs.iter().map(cybe::rat::fmt_rat).collect::<Vec<_>>()))
                .collect::<Vec<_>>()
        );
    }

    // Round trip through the dual-set reconstruction.
    let recovered = t_to_twist(&algebra, &t).unwrap();
    let round_trip = recovered.sub(&s).is_zero_on_window();
    println!("T -> twist round trip recovers s: {round_trip}");
    assert!(round_trip);

    // The associated subalgebra is W of r_1 + s.
    let w_twist = twist_associated_w(&algebra, base, &s, 4).unwrap();
    let w_sum = cybe::lagrangian::build_w(&algebra, &r_sum, 4).unwrap();
    let spans_match = spans_equal(&algebra, &w_twist, &w_sum);
    println!("W from the twist equals W of r_1 + s: {spans_match}");
    assert!(spans_match);

    let report = commensurability(&algebra, &w_twist, base, 4).unwrap();
    println!(
        "commensurability with W_1: dim (W_1 + W)/(W_1 /\\ W) = {} on the window, tails stabilized: {}",
        report.dim_sum_quotient, report.stabilized
    );
    assert!(report.stabilized);
}

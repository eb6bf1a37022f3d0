//! Gauge transformations and their coherence with subalgebras.
//!
//! `phi = exp(ad(x e))` is an F[[x]]-linear automorphism of sl(2)[[x]]
//! (exact, since ad(e) is nilpotent). Applying `phi (x) phi` to an
//! r-matrix keeps the scalar part and moves only the regular part; the
//! result still solves the CYBE and stays skew. Transporting the
//! subalgebra with `phi x [phi]` commutes with the W-construction.
//!
//! Run with `cargo run --release --example gauge_equivalence`.

use cybe::gauge::{check_automorphism, gauge_apply, gauge_apply_w, GaugeAuto};
use cybe::lagrangian::{build_w, spans_equal};
use cybe::lie::{GElement, LieAlgebra};
use cybe::residuals::cyb_residual;
use cybe::series::tensor::{skew_residual, StandardRMatrix};

fn main() {
    let algebra = LieAlgebra::sl(2).unwrap();
    let e = GElement::basis(3, 0);
    let phi = GaugeAuto::exp_nilpotent_ad(&algebra, &e, 1).unwrap();
    check_automorphism(&algebra, &phi).unwrap();
    println!(
        "phi = exp(ad(x e)): polynomial automorphism of degree {}",
        phi.degree()
    );

    for base in [1usize, 2, 3] {
        let r = StandardRMatrix::base(&algebra, base).unwrap();
        let transformed = gauge_apply(&algebra, &r, &phi, 10).unwrap();
        let cybe = cyb_residual(&algebra, &transformed, 2).unwrap();
        let skew = skew_residual(&algebra, &transformed, 3).unwrap();
        println!(
            "(phi (x) phi) r_{base}: scalar part unchanged, CYBE still zero: {}, skew still zero: {}",
            cybe.is_zero_on_window(),
            skew.is_zero_on_window()
        );
        assert!(cybe.is_zero_on_window() && skew.is_zero_on_window());

        let w = build_w(&algebra, &r, 4).unwrap();
        let transported = gauge_apply_w(&algebra, &w, &phi).unwrap();
        let w_of_gauged = build_w(&algebra, &transformed, 4).unwrap();
        let coherent = spans_equal(&algebra, &transported, &w_of_gauged);
        println!("  (phi x [phi]) W(r_{base}) = W((phi (x) phi) r_{base}): {coherent}");
        assert!(coherent);
    }

    // Compositions of nilpotent exponentials stay automorphisms.
    let f = GElement::basis(3, 2);
    let psi = GaugeAuto::exp_nilpotent_ad(&algebra, &f, 2).unwrap();
    let composed = phi.compose(&psi);
    check_automorphism(&algebra, &composed).unwrap();
    println!(
        "exp(ad(x e)) . exp(ad(x^2 f)) is an automorphism of degree {}",
        composed.degree()
    );
}

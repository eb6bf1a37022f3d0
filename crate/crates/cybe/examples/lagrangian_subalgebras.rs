//! Lagrangian subalgebras from r-matrices.
//!
//! Builds the indexed basis `w_{k,a}` of `W_r` for each base r-matrix,
//! confirms the duality pairing against the diagonal basis, isotropy, the
//! subalgebra property, complementarity to the diagonal, and exact span
//! equality with the explicit subalgebras `W_1 = x^{-1} g[x^{-1}]`,
//! `W_2` (triangular decomposition) and `W_3 = g[x^{-1}] x [x] g`.
//!
//! Run with `cargo run --release --example lagrangian_subalgebras`.

use cybe::lagrangian::{
    build_w, check_complementarity, check_duality, check_isotropy, check_subalgebra,
    spans_equal, standard_w, standard_w_infinite,
};
use cybe::lie::LieAlgebra;
use cybe::series::tensor::StandardRMatrix;

fn main() {
    let algebra = LieAlgebra::sl(2).unwrap();
    let window = 5;
    for base in [1usize, 2, 3] {
        let r = StandardRMatrix::base(&algebra, base).unwrap();
        let w = build_w(&algebra, &r, window).unwrap();
        println!("W of r_{base} (m = {}):", w.m);
        for (k, a, elt) in w.iter().take(2 * algebra.dim) {
            let laurent: Vec<String> = elt
                .laurent
                .terms
                .iter()
                .map(|(d, c)| format!("x^{d} {:?}", c.coeffs.iter().map(cybe::rat::fmt_rat).collect::<Vec<_>>()))
                .collect();
            println!("  w_{{{k},{a}}} laurent: [{}]", laurent.join(", "));
        }
        let duality = check_duality(&algebra, &w);
        let isotropy = check_isotropy(&algebra, &w);
        let subalgebra = check_subalgebra(&algebra, &w);
        let complementary = check_complementarity(&algebra, &w).unwrap();
        println!(
            "  duality {} / isotropy {} / subalgebra {} (out of window: {}) / complementary {}",
            duality.passed(),
            isotropy.passed(),
            subalgebra.passed(),
            subalgebra.out_of_window,
            complementary
        );
        assert!(duality.passed() && isotropy.passed() && subalgebra.passed() && complementary);
        let standard = standard_w(&algebra, base, window).unwrap();
        let equal = spans_equal(&algebra, &w, &standard);
        println!("  span equals the explicit W_{base}: {equal}");
        assert!(equal);
    }
    // The infinite-flavor W_0 inside g (x) A(infinity).
    let w0 = standard_w_infinite(&algebra, 4);
    println!(
        "W_0 in g (x) A(infinity): {} generators I^a (x) a_j for j <= 4",
        w0.len()
    );
}

//! Trace extensions of F[[x]] and their normalization.
//!
//! `A(n, alpha)` pairs `F((x)) (+) F[x]/(x^n)` with a trace functional
//! making the diagonal copy of F[[x]] isotropic. The normalization finds a
//! new coordinate `u = x(1 + u_1 x + ...)` killing all traces `t(u^k)`
//! except the distinguished `t(u^{n-1}) = 1`, certified here by direct
//! series evaluation. The trivial extension `A(infinity)` with its
//! nilpotent tower is exercised alongside.
//!
//! Run with `cargo run --release --example trace_extensions`.

use cybe::doubles::{
    manin_pair_report, normalize_trace_extension, ExtensionElement, TraceExtension,
};
use cybe::rat::{rat, rint};
use cybe::series::ScalarSeries;

fn main() {
    // n = 3 with alpha_1 = 1: the first corrected coefficient is
    // u_1 = -alpha_{n-2}/(n-2) = -1.
    let extension = TraceExtension::finite(3, [(1i64, rint(1))], 6);
    let (u, report) = normalize_trace_extension(&extension, 6).unwrap();
    let coeffs: Vec<String> = u.terms().map(|(d, c)| format!("x^{d}: {}", cybe::rat::fmt_rat(c))).collect();
    println!("A(3, alpha_1 = 1): u = [{}]", coeffs.join(", "));
    println!("  all trace certificates hold: {}", report.normalized);
    assert!(report.normalized);
    for (k, value) in report.trace_certificates.iter().take(5) {
        println!("  t(u^{k}) = {value}");
    }

    // A denser example with negative alpha support.
    let extension = TraceExtension::finite(
        4,
        [(2i64, rat(-3, 5)), (0, rint(2)), (-3, rat(7, 2))],
        6,
    );
    let (_, report) = normalize_trace_extension(&extension, 6).unwrap();
    println!(
        "A(4, mixed alpha): normalized = {}, {} certificates checked",
        report.normalized,
        report.trace_certificates.len()
    );
    assert!(report.normalized);

    // Manin-pair axioms on the window for A(1, 0) and A(infinity).
    for (name, ext) in [
        ("A(1, 0)", TraceExtension::finite(1, [], 6)),
        ("A(infinity)", TraceExtension::Infinite),
    ] {
        let pair = manin_pair_report(&ext, 5).unwrap();
        println!(
            "{name}: isotropy {}, representability {}",
            pair.isotropy_ok, pair.representability_ok
        );
        assert!(pair.isotropy_ok && pair.representability_ok);
    }

    // Nilpotent arithmetic in A(infinity): a_i a_j = 0 and a_i x^j = a_{i-j}.
    let ext = TraceExtension::Infinite;
    let a2 = ExtensionElement::nilpotent_generator(2);
    let x1 = ExtensionElement::from_laurent(ScalarSeries::monomial(1, rint(1)));
    let shifted = ext.multiply(&a2, &x1).unwrap();
    println!(
        "A(infinity): a_2 x = a_1 (trace {}), a_2 a_2 = 0: {}",
        cybe::rat::fmt_rat(&ext.trace(&shifted).unwrap()),
        ext.multiply(&a2, &a2).unwrap().nilpotent.is_empty()
    );
}

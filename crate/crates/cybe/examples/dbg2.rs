use cybe::manifest::Manifest;
use cybe::series::tensor::skew_residual;

fn main() {
    let text = std::fs::read_to_string("/tmp/e2e/roundtrip.json").unwrap();
    let m = Manifest::parse(&text).unwrap();
    let r = m.rmatrix.unwrap();
    println!("s cap {:?}, terms {:?}", r.s.cap(), r.s.terms().collect::<Vec<_>>());
    println!("g caps {:?}, entries:", r.g.caps());
    for (k, v) in r.g.iter() {
        println!("  {:?} first: {:?}", k, v.iter().next());
    }
    let res = skew_residual(&m.algebra, &r, 4).unwrap();
    println!("skew residual entries:");
    for (k, v) in res.iter() {
        println!("  {:?} -> {:?}", k, v.iter().collect::<Vec<_>>());
    }
}

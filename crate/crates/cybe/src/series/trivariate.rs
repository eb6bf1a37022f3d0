//! Trivariate series with values in `g (x) g (x) g`.
//!
//! These hold residuals of the classical Yang-Baxter equation. The three
//! bracket combinators take two bivariate series `a(x, y)`, `b(x, y)` and
//! place them on a pair of the three tensor slots, commuting in the shared
//! slot:
//!
//!   [a^12, b^13]: bracket in slot 1, variables (x_a + x_b, y_a, y_b)
//!   [a^12, b^23]: bracket in slot 2, variables (x_a, y_a + x_b, y_b)
//!   [a^13, b^23]: bracket in slot 3, variables (x_a, x_b, y_a + y_b)
//!
//! Window bookkeeping for the convolved axis follows the same pollution
//! rule as scalar products. The non-convolved axes keep their caps.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::lie::LieAlgebra;
use crate::rat::Rat;
use crate::series::tensor::Tensor2Series;
use crate::series::Cap;

/// Sparse tensor in `g (x) g (x) g`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Tensor3 {
    entries: BTreeMap<(usize, usize, usize), Rat>,
}

impl Tensor3 {
    pub fn zero() -> Self {
        Tensor3::default()
    }

    pub fn add_to(&mut self, key: (usize, usize, usize), value: Rat) {
        if value.is_zero() {
            return;
        }
        let slot = self.entries.entry(key).or_insert_with(Rat::zero);
        *slot += value;
        if slot.is_zero() {
            self.entries.remove(&key);
        }
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> Rat {
        self.entries
            .get(&(a, b, c))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize, usize), &Rat)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut t = self.clone();
        for (k, v) in other.iter() {
            t.add_to(*k, v.clone());
        }
        t
    }

    pub fn neg(&self) -> Self {
        Tensor3 {
            entries: self.entries.iter().map(|(k, v)| (*k, -v)).collect(),
        }
    }

    /// Cyclic slot permutation `a (x) b (x) c -> b (x) c (x) a`.
    pub fn cycle(&self) -> Self {
        Tensor3 {
            entries: self
                .entries
                .iter()
                .map(|(&(a, b, c), v)| ((b, c, a), v.clone()))
                .collect(),
        }
    }
}

/// Sparse trivariate series, each axis with its own guaranteed cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tensor3Series {
    entries: BTreeMap<(i64, i64, i64), Tensor3>,
    caps: [Cap; 3],
}

impl Tensor3Series {
    pub fn zero() -> Self {
        Tensor3Series {
            entries: BTreeMap::new(),
            caps: [Cap::Exact; 3],
        }
    }

    pub fn with_caps(mut self, caps: [Cap; 3]) -> Self {
        self.caps = caps;
        self.prune();
        self
    }

    pub fn caps(&self) -> [Cap; 3] {
        self.caps
    }

    fn covers(&self, key: (i64, i64, i64)) -> bool {
        self.caps[0].covers(key.0) && self.caps[1].covers(key.1) && self.caps[2].covers(key.2)
    }

    pub fn add_to(&mut self, key: (i64, i64, i64), value: Tensor3) {
        if value.is_zero() || !self.covers(key) {
            return;
        }
        let slot = self.entries.entry(key).or_insert_with(Tensor3::zero);
        *slot = slot.add(&value);
        if slot.is_zero() {
            self.entries.remove(&key);
        }
    }

    fn prune(&mut self) {
        let caps = self.caps;
        self.entries.retain(|k, _| {
            caps[0].covers(k.0) && caps[1].covers(k.1) && caps[2].covers(k.2)
        });
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(i64, i64, i64), &Tensor3)> {
        self.entries.iter()
    }

    pub fn coeff(&self, key: (i64, i64, i64)) -> Tensor3 {
        self.entries.get(&key).cloned().unwrap_or_default()
    }

    pub fn is_zero_on_window(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn first_nonzero(&self) -> Option<((i64, i64, i64), (usize, usize, usize), Rat)> {
        self.entries.iter().next().map(|(&key, t)| {
            let (&idx, v) = t.iter().next().expect("stored tensors are nonzero");
            (key, idx, v.clone())
        })
    }

    pub fn mins(&self) -> Option<(i64, i64, i64)> {
        if self.entries.is_empty() {
            return None;
        }
        let mut mins = (i64::MAX, i64::MAX, i64::MAX);
        for (i, j, k) in self.entries.keys() {
            mins.0 = mins.0.min(*i);
            mins.1 = mins.1.min(*j);
            mins.2 = mins.2.min(*k);
        }
        Some(mins)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.caps = [
            self.caps[0].min(other.caps[0]),
            self.caps[1].min(other.caps[1]),
            self.caps[2].min(other.caps[2]),
        ];
        out.prune();
        for (k, v) in other.iter() {
            out.add_to(*k, v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Tensor3Series {
            entries: self.entries.iter().map(|(k, v)| (*k, v.neg())).collect(),
            caps: self.caps,
        }
    }

    pub fn truncate(&self, caps: [Cap; 3]) -> Self {
        self.clone().with_caps([
            self.caps[0].min(caps[0]),
            self.caps[1].min(caps[1]),
            self.caps[2].min(caps[2]),
        ])
    }

    /// `Alt(t) = t + cycle(t) + cycle^2(t)`, permuting tensor slots and
    /// degree axes together.
    pub fn alternate(&self) -> Self {
        let c1 = self.cycle();
        let c2 = c1.cycle();
        self.add(&c1).add(&c2)
    }

    /// Simultaneous cyclic permutation of slots and variables:
    /// the entry at `(i1, i2, i3)` with tensor `a (x) b (x) c` moves to
    /// `(i2, i3, i1)` with tensor `b (x) c (x) a`.
    pub fn cycle(&self) -> Self {
        let mut out = Tensor3Series {
            entries: BTreeMap::new(),
            caps: [self.caps[1], self.caps[2], self.caps[0]],
        };
        for (&(i1, i2, i3), t) in self.iter() {
            out.add_to((i2, i3, i1), t.cycle());
        }
        out
    }
}

/// Conservative validity caps for the three bracket placements, assuming
/// nothing about the inputs beyond their own rectangle caps. For inputs
/// with correlated supports (such as expansions of `s(y) Omega/(x-y)`,
/// where the Laurent depth is tied to the Taylor degree) the caller can
/// justify larger caps and pass them explicitly.
pub fn rectangle_caps(a: &Tensor2Series, b: &Tensor2Series) -> [[Cap; 3]; 3] {
    let conv_x = a
        .x_cap()
        .conv(a.x_effective_min(), b.x_cap(), b.x_effective_min());
    let conv_yx = a
        .y_cap()
        .conv(a.y_effective_min(), b.x_cap(), b.x_effective_min());
    let conv_y = a
        .y_cap()
        .conv(a.y_effective_min(), b.y_cap(), b.y_effective_min());
    [
        [conv_x, a.y_cap(), b.y_cap()],
        [a.x_cap(), conv_yx, b.y_cap()],
        [a.x_cap(), b.x_cap(), conv_y],
    ]
}

/// `[a^{12}, b^{13}]`: Lie bracket in slot 1, slot 2 from `a`'s second leg,
/// slot 3 from `b`'s second leg. `caps` is the exactness region the caller
/// guarantees for the result.
pub fn bracket_12_13(
    algebra: &LieAlgebra,
    a: &Tensor2Series,
    b: &Tensor2Series,
    caps: [Cap; 3],
) -> Tensor3Series {
    let mut out = Tensor3Series::zero().with_caps(caps);
    for (&(ia, ja), ta) in a.iter() {
        for (&(ib, jb), tb) in b.iter() {
            let key = (ia + ib, ja, jb);
            if !out.covers(key) {
                continue;
            }
            let mut t3 = Tensor3::zero();
            for (&(p, q), va) in ta.iter() {
                for (&(r, s), vb) in tb.iter() {
                    let factor = va * vb;
                    for (e, c) in algebra.bracket_basis(p, r) {
                        t3.add_to((*e, q, s), &factor * c);
                    }
                }
            }
            out.add_to(key, t3);
        }
    }
    out
}

/// `[a^{12}, b^{23}]`: bracket in slot 2 between `a`'s second leg and `b`'s
/// first leg.
pub fn bracket_12_23(
    algebra: &LieAlgebra,
    a: &Tensor2Series,
    b: &Tensor2Series,
    caps: [Cap; 3],
) -> Tensor3Series {
    let mut out = Tensor3Series::zero().with_caps(caps);
    for (&(ia, ja), ta) in a.iter() {
        for (&(ib, jb), tb) in b.iter() {
            let key = (ia, ja + ib, jb);
            if !out.covers(key) {
                continue;
            }
            let mut t3 = Tensor3::zero();
            for (&(p, q), va) in ta.iter() {
                for (&(r, s), vb) in tb.iter() {
                    let factor = va * vb;
                    for (e, c) in algebra.bracket_basis(q, r) {
                        t3.add_to((p, *e, s), &factor * c);
                    }
                }
            }
            out.add_to(key, t3);
        }
    }
    out
}

/// `[a^{13}, b^{23}]`: bracket in slot 3 between the two second legs.
pub fn bracket_13_23(
    algebra: &LieAlgebra,
    a: &Tensor2Series,
    b: &Tensor2Series,
    caps: [Cap; 3],
) -> Tensor3Series {
    let mut out = Tensor3Series::zero().with_caps(caps);
    for (&(ia, ja), ta) in a.iter() {
        for (&(ib, jb), tb) in b.iter() {
            let key = (ia, ib, ja + jb);
            if !out.covers(key) {
                continue;
            }
            let mut t3 = Tensor3::zero();
            for (&(p, q), va) in ta.iter() {
                for (&(r, s), vb) in tb.iter() {
                    let factor = va * vb;
                    for (e, c) in algebra.bracket_basis(q, s) {
                        t3.add_to((p, r, *e), &factor * c);
                    }
                }
            }
            out.add_to(key, t3);
        }
    }
    out
}

/// Embeds a `Tensor2Series` as slots (1,2) with a constant third slot
/// element `I_c x3^k` — used when expanding `(delta (x) 1) s`.
pub fn embed_12(
    series: &Tensor2Series,
    third_index: usize,
    third_degree: i64,
    scale: &Rat,
) -> Tensor3Series {
    let mut out = Tensor3Series::zero().with_caps([series.x_cap(), series.y_cap(), Cap::Exact]);
    for (&(i, j), t) in series.iter() {
        let mut t3 = Tensor3::zero();
        for (&(p, q), v) in t.iter() {
            t3.add_to((p, q, third_index), v * scale);
        }
        out.add_to((i, j, third_degree), t3);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{GElement, Tensor2};
    use crate::rat::rint;

    fn sl2() -> LieAlgebra {
        LieAlgebra::sl(2).unwrap()
    }

    /// Dense brute-force version of the three combinators, used as an
    /// independent oracle on small inputs.
    fn brute_bracket(
        algebra: &LieAlgebra,
        a: &Tensor2Series,
        b: &Tensor2Series,
        which: u8,
    ) -> BTreeMap<(i64, i64, i64), Tensor3> {
        let mut out: BTreeMap<(i64, i64, i64), Tensor3> = BTreeMap::new();
        let n = algebra.dim;
        for (&(ia, ja), ta) in a.iter() {
            for (&(ib, jb), tb) in b.iter() {
                for p in 0..n {
                    for q in 0..n {
                        let va = ta.get(p, q);
                        if va.is_zero() {
                            continue;
                        }
                        for r in 0..n {
                            for s in 0..n {
                                let vb = tb.get(r, s);
                                if vb.is_zero() {
                                    continue;
                                }
                                let factor = &va * &vb;
                                match which {
                                    0 => {
                                        for e in 0..n {
                                            let c = algebra.structure_constant(p, r, e);
                                            if !c.is_zero() {
                                                out.entry((ia + ib, ja, jb))
                                                    .or_insert_with(Tensor3::zero)
                                                    .add_to((e, q, s), &factor * &c);
                                            }
                                        }
                                    }
                                    1 => {
                                        for e in 0..n {
                                            let c = algebra.structure_constant(q, r, e);
                                            if !c.is_zero() {
                                                out.entry((ia, ja + ib, jb))
                                                    .or_insert_with(Tensor3::zero)
                                                    .add_to((p, e, s), &factor * &c);
                                            }
                                        }
                                    }
                                    _ => {
                                        for e in 0..n {
                                            let c = algebra.structure_constant(q, s, e);
                                            if !c.is_zero() {
                                                out.entry((ia, ib, ja + jb))
                                                    .or_insert_with(Tensor3::zero)
                                                    .add_to((p, r, e), &factor * &c);
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out.retain(|_, t| !t.is_zero());
        out
    }

    #[test]
    fn combinators_match_brute_force() {
        let g = sl2();
        let e = GElement::basis(3, 0);
        let h = GElement::basis(3, 1);
        let f = GElement::basis(3, 2);
        let mut a = Tensor2Series::zero();
        a.add_to((-1, 0), Tensor2::pure(&h, &e));
        a.add_to((0, 2), Tensor2::pure(&e, &f).scale(&rint(3)));
        a.add_to((2, 1), Tensor2::pure(&f, &h));
        let mut b = Tensor2Series::zero();
        b.add_to((0, 0), Tensor2::pure(&e, &e));
        b.add_to((-2, 1), Tensor2::pure(&f, &e).scale(&rint(-2)));
        b.add_to((1, 1), Tensor2::pure(&h, &h));

        let free = [Cap::Exact; 3];
        let got = [
            bracket_12_13(&g, &a, &b, free),
            bracket_12_23(&g, &a, &b, free),
            bracket_13_23(&g, &a, &b, free),
        ];
        for (which, series) in got.iter().enumerate() {
            let expected = brute_bracket(&g, &a, &b, which as u8);
            let collected: BTreeMap<_, _> =
                series.iter().map(|(k, v)| (*k, v.clone())).collect();
            assert_eq!(collected, expected, "combinator {which}");
        }
    }

    #[test]
    fn alternate_is_cyclic_sum() {
        // A single pure entry alternates into exactly its three cyclic
        // images: degrees and tensor slots move together.
        let mut t3 = Tensor3::zero();
        t3.add_to((0, 1, 2), rint(5));
        let mut t = Tensor3Series::zero();
        t.add_to((1, 2, 3), t3);
        let alt = t.alternate();
        assert_eq!(alt.coeff((1, 2, 3)).get(0, 1, 2), rint(5));
        assert_eq!(alt.coeff((2, 3, 1)).get(1, 2, 0), rint(5));
        assert_eq!(alt.coeff((3, 1, 2)).get(2, 0, 1), rint(5));
        assert_eq!(alt.iter().count(), 3);
    }
}

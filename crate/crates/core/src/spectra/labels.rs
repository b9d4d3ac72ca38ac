use std::cmp::Ordering;

use serde::Serialize;

use crate::linalg::C64;

use super::Kind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Sign {
    Minus,
    Plus,
    None,
}

impl Sign {
    pub fn as_str(&self) -> &'static str {
        match self {
            Sign::Minus => "-",
            Sign::Plus => "+",
            Sign::None => "none",
        }
    }
}

/// `(i, n, sign)`; `i = 0` marks the additional critical point near the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Label {
    pub i: u8,
    pub n: i64,
    pub sign: Sign,
}

impl Label {
    pub fn new(i: u8, n: i64, sign: Sign) -> Self {
        Label { i, n, sign }
    }

    fn key(&self) -> (i64, u8, Sign) {
        (self.n, self.i, self.sign)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledEigenvalue {
    pub value: C64,
    pub kind: Kind,
    pub label: Label,
    pub multiplicity: usize,
    pub residual: f64,
}

/// Lexicographic order: real part first, then imaginary part. Real parts closer
/// than `eps` to the first member of a run count as equal.
pub fn lex_sort<T, F: Fn(&T) -> C64>(items: &mut Vec<T>, eps: f64, key: F) {
    items.sort_by(|a, b| key(a).re.partial_cmp(&key(b).re).unwrap_or(Ordering::Equal));
    let mut start = 0;
    while start < items.len() {
        let r0 = key(&items[start]).re;
        let mut end = start + 1;
        while end < items.len() && key(&items[end]).re - r0 <= eps {
            end += 1;
        }
        items[start..end].sort_by(|a, b| key(a).im.partial_cmp(&key(b).im).unwrap_or(Ordering::Equal));
        start = end;
    }
}

pub fn lex_le(a: C64, b: C64, eps: f64) -> bool {
    if (a.re - b.re).abs() <= eps {
        a.im <= b.im
    } else {
        a.re < b.re
    }
}

/// Label slots of `B_N` in increasing lexicographic position.
pub fn chain(kind: Kind, big_n: usize) -> Vec<Label> {
    let n = big_n as i64;
    let mut base: Vec<(u8, i64)> = Vec::new();
    base.extend((-n..=-1).map(|k| (1, k)));
    base.extend((-n..=-1).map(|k| (2, k)));
    base.push((1, 0));
    base.push((2, 0));
    if kind == Kind::Critical {
        base.push((0, 0));
    }
    base.extend((1..=n).map(|k| (2, k)));
    base.extend((1..=n).map(|k| (1, k)));
    match kind {
        Kind::Periodic => {
            base.into_iter().flat_map(|(i, k)| [Label::new(i, k, Sign::Minus), Label::new(i, k, Sign::Plus)]).collect()
        }
        _ => base.into_iter().map(|(i, k)| Label::new(i, k, Sign::None)).collect(),
    }
}

/// Root slot: value, multiplicity of the root it belongs to, residual.
pub type Slot = (C64, usize, f64);

/// Assigns chain labels to the roots found in `B_N` (one slot per unit of multiplicity).
pub fn label_ball(kind: Kind, big_n: usize, mut slots: Vec<Slot>, eps: f64) -> Vec<LabeledEigenvalue> {
    lex_sort(&mut slots, eps, |s| s.0);
    let labels = chain(kind, big_n);
    assert_eq!(labels.len(), slots.len());
    let mut out: Vec<LabeledEigenvalue> = labels
        .iter()
        .zip(&slots)
        .map(|(l, s)| LabeledEigenvalue { value: s.0, kind, label: *l, multiplicity: s.1, residual: s.2 })
        .collect();
    let mid = 2 * big_n;
    if kind == Kind::Critical {
        // the origin-nearest of the three central slots is the extra root
        let trio = &mut out[mid..mid + 3];
        let extra = (0..3).min_by(|&a, &b| trio[a].value.norm().partial_cmp(&trio[b].value.norm()).unwrap()).unwrap();
        let mut rest: Vec<usize> = (0..3).filter(|&k| k != extra).collect();
        rest.sort_by(
            |&a, &b| if lex_le(trio[a].value, trio[b].value, eps) { Ordering::Less } else { Ordering::Greater },
        );
        let vals: Vec<LabeledEigenvalue> = trio.to_vec();
        trio[0] = LabeledEigenvalue { label: Label::new(1, 0, Sign::None), ..vals[rest[0]] };
        trio[1] = LabeledEigenvalue { label: Label::new(2, 0, Sign::None), ..vals[rest[1]] };
        trio[2] = LabeledEigenvalue { label: Label::new(0, 0, Sign::None), ..vals[extra] };
    }
    if kind == Kind::Periodic && big_n == 0 {
        // in B_0 the pair with extreme imaginary parts is taken as i = 2
        let by_im = |a: &usize, b: &usize| slots[*a].0.im.partial_cmp(&slots[*b].0.im).unwrap_or(Ordering::Equal);
        let lo = (0..4).min_by(by_im).unwrap();
        let hi = (0..4).filter(|&k| k != lo).max_by(by_im).unwrap();
        let mut two = vec![slots[lo], slots[hi]];
        let mut one: Vec<Slot> = (0..4).filter(|&k| k != lo && k != hi).map(|k| slots[k]).collect();
        lex_sort(&mut one, eps, |x| x.0);
        lex_sort(&mut two, eps, |x| x.0);
        let order = [(1u8, Sign::Minus), (1, Sign::Plus), (2, Sign::Minus), (2, Sign::Plus)];
        for (k, (s, (i, sg))) in one.iter().chain(&two).zip(order).enumerate() {
            out[k] =
                LabeledEigenvalue { value: s.0, kind, label: Label::new(i, 0, sg), multiplicity: s.1, residual: s.2 };
        }
    }
    out
}

/// Labels the roots found inside `D^i_n`.
pub fn label_disc(kind: Kind, i: u8, n: i64, mut slots: Vec<Slot>, eps: f64) -> Vec<LabeledEigenvalue> {
    lex_sort(&mut slots, eps, |s| s.0);
    let signs: Vec<Sign> = if kind == Kind::Periodic { vec![Sign::Minus, Sign::Plus] } else { vec![Sign::None] };
    slots
        .iter()
        .zip(signs)
        .map(|(s, sg)| LabeledEigenvalue {
            value: s.0,
            kind,
            label: Label::new(i, n, sg),
            multiplicity: s.1,
            residual: s.2,
        })
        .collect()
}

pub fn sort_by_label(v: &mut [LabeledEigenvalue]) {
    v.sort_by(|a, b| a.label.key().cmp(&b.label.key()));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn chain_lengths_match_counting_lemma() {
        for n in 0..5 {
            assert_eq!(chain(Kind::Dirichlet, n).len(), 2 * (2 * n + 1));
            assert_eq!(chain(Kind::Periodic, n).len(), 4 * (2 * n + 1));
            assert_eq!(chain(Kind::Critical, n).len(), 4 * n + 3);
        }
    }

    #[test]
    fn lex_sort_tolerates_noise_in_real_part() {
        let mut v = vec![c(1e-15, 2.0), c(-1e-15, -1.0), c(0.0, 0.5), c(-1.0, 0.0)];
        lex_sort(&mut v, 1e-9, |z| *z);
        assert_eq!(v, vec![c(-1.0, 0.0), c(-1e-15, -1.0), c(0.0, 0.5), c(1e-15, 2.0)]);
    }

    #[test]
    fn zero_potential_dirichlet_chain_labels() {
        use super::super::discs::zero_potential_eigenvalue as z0;
        let n = 2;
        let mut slots: Vec<Slot> = vec![(c(0.0, 0.0), 2, 0.0), (c(0.0, 0.0), 2, 0.0)];
        for k in 1..=n as i64 {
            for i in [1u8, 2] {
                for s in [-1, 1] {
                    slots.push((z0(i, s * k), 1, 0.0));
                }
            }
        }
        for l in label_ball(Kind::Dirichlet, n, slots, 1e-9) {
            let want = if l.label.n == 0 { c(0.0, 0.0) } else { z0(l.label.i, l.label.n) };
            assert!((l.value - want).norm() < 1e-15, "{:?}", l.label);
        }
    }

    #[test]
    fn b0_convention_pairs_conjugates_vertically() {
        let slots: Vec<Slot> =
            vec![(c(0.0, 0.3), 2, 0.0), (c(0.0, 0.3), 2, 0.0), (c(0.0, -0.3), 2, 0.0), (c(0.0, -0.3), 2, 0.0)];
        let out = label_ball(Kind::Periodic, 0, slots, 1e-9);
        let get = |i, s| out.iter().find(|l| l.label.i == i && l.label.sign == s).unwrap().value;
        assert_eq!(get(2, Sign::Minus), c(0.0, -0.3));
        assert_eq!(get(2, Sign::Plus), c(0.0, 0.3));
        let slots: Vec<Slot> =
            vec![(c(-0.4, 0.0), 1, 0.0), (c(0.4, 0.0), 1, 0.0), (c(0.0, -0.3), 1, 0.0), (c(0.0, 0.3), 1, 0.0)];
        let out = label_ball(Kind::Periodic, 0, slots, 1e-9);
        let get = |i, s| out.iter().find(|l| l.label.i == i && l.label.sign == s).unwrap().value;
        assert_eq!(get(1, Sign::Minus), c(-0.4, 0.0));
        assert_eq!(get(1, Sign::Plus), c(0.4, 0.0));
        assert_eq!(get(2, Sign::Plus), c(0.0, 0.3));
    }
}

use std::fmt;

use num_traits::Zero;

use crate::terms::{fmt_rational, rat, Rational};

/// Rational interval with independently open or closed endpoints.
///
/// Constructors normalise degenerate spans to [`Interval::Empty`], so a
/// `Span` always denotes a non-empty set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Interval {
    Empty,
    Span { lo: Rational, hi: Rational, lo_open: bool, hi_open: bool },
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational, lo_open: bool, hi_open: bool) -> Interval {
        if lo > hi || (lo == hi && (lo_open || hi_open)) {
            Interval::Empty
        } else {
            Interval::Span { lo, hi, lo_open, hi_open }
        }
    }

    pub fn closed(lo: Rational, hi: Rational) -> Interval {
        Interval::new(lo, hi, false, false)
    }

    pub fn point(v: Rational) -> Interval {
        Interval::closed(v.clone(), v)
    }

    /// `[c - r, c + r]`.
    pub fn around(c: &Rational, r: &Rational) -> Interval {
        Interval::closed(c - r, c + r)
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Interval::Empty)
    }

    pub fn lo(&self) -> Option<&Rational> {
        match self {
            Interval::Span { lo, .. } => Some(lo),
            Interval::Empty => None,
        }
    }

    pub fn hi(&self) -> Option<&Rational> {
        match self {
            Interval::Span { hi, .. } => Some(hi),
            Interval::Empty => None,
        }
    }

    pub fn lo_open(&self) -> bool {
        matches!(self, Interval::Span { lo_open: true, .. })
    }

    pub fn hi_open(&self) -> bool {
        matches!(self, Interval::Span { hi_open: true, .. })
    }

    pub fn contains(&self, v: &Rational) -> bool {
        match self {
            Interval::Empty => false,
            Interval::Span { lo, hi, lo_open, hi_open } => {
                let above = if *lo_open { v > lo } else { v >= lo };
                let below = if *hi_open { v < hi } else { v <= hi };
                above && below
            }
        }
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        match (self, other) {
            (
                Interval::Span { lo: l1, hi: h1, lo_open: lo1, hi_open: ho1 },
                Interval::Span { lo: l2, hi: h2, lo_open: lo2, hi_open: ho2 },
            ) => {
                let (lo, lo_open) = match l1.cmp(l2) {
                    std::cmp::Ordering::Greater => (l1.clone(), *lo1),
                    std::cmp::Ordering::Less => (l2.clone(), *lo2),
                    std::cmp::Ordering::Equal => (l1.clone(), *lo1 || *lo2),
                };
                let (hi, hi_open) = match h1.cmp(h2) {
                    std::cmp::Ordering::Less => (h1.clone(), *ho1),
                    std::cmp::Ordering::Greater => (h2.clone(), *ho2),
                    std::cmp::Ordering::Equal => (h1.clone(), *ho1 || *ho2),
                };
                Interval::new(lo, hi, lo_open, hi_open)
            }
            _ => Interval::Empty,
        }
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        match (self, other) {
            (Interval::Empty, x) | (x, Interval::Empty) => x.clone(),
            (
                Interval::Span { lo: l1, hi: h1, lo_open: lo1, hi_open: ho1 },
                Interval::Span { lo: l2, hi: h2, lo_open: lo2, hi_open: ho2 },
            ) => {
                let (lo, lo_open) = match l1.cmp(l2) {
                    std::cmp::Ordering::Less => (l1.clone(), *lo1),
                    std::cmp::Ordering::Greater => (l2.clone(), *lo2),
                    std::cmp::Ordering::Equal => (l1.clone(), *lo1 && *lo2),
                };
                let (hi, hi_open) = match h1.cmp(h2) {
                    std::cmp::Ordering::Greater => (h1.clone(), *ho1),
                    std::cmp::Ordering::Less => (h2.clone(), *ho2),
                    std::cmp::Ordering::Equal => (h1.clone(), *ho1 && *ho2),
                };
                Interval::new(lo, hi, lo_open, hi_open)
            }
        }
    }

    /// Minkowski sum `{a + b | a ∈ self, b ∈ other}`.
    pub fn add(&self, other: &Interval) -> Interval {
        match (self, other) {
            (
                Interval::Span { lo: l1, hi: h1, lo_open: lo1, hi_open: ho1 },
                Interval::Span { lo: l2, hi: h2, lo_open: lo2, hi_open: ho2 },
            ) => Interval::new(l1 + l2, h1 + h2, *lo1 || *lo2, *ho1 || *ho2),
            _ => Interval::Empty,
        }
    }

    pub fn shift(&self, d: &Rational) -> Interval {
        self.add(&Interval::point(d.clone()))
    }

    /// `self ⊕ [-r, r]`.
    pub fn widen(&self, r: &Rational) -> Interval {
        self.add(&Interval::around(&Rational::zero(), r))
    }

    /// `{k * x + c | x ∈ self}`.
    pub fn affine(&self, k: &Rational, c: &Rational) -> Interval {
        match self {
            Interval::Empty => Interval::Empty,
            Interval::Span { lo, hi, lo_open, hi_open } => {
                if k.is_zero() {
                    return Interval::point(c.clone());
                }
                let a = k * lo + c;
                let b = k * hi + c;
                if *k > Rational::zero() {
                    Interval::new(a, b, *lo_open, *hi_open)
                } else {
                    Interval::new(b, a, *hi_open, *lo_open)
                }
            }
        }
    }

    pub fn is_subset(&self, other: &Interval) -> bool {
        self.intersect(other) == *self
    }

    /// Part of `self` strictly above (`open`) or at least `theta`.
    pub fn above(&self, theta: &Rational, open: bool) -> Interval {
        match self {
            Interval::Empty => Interval::Empty,
            Interval::Span { hi, hi_open, .. } => {
                self.intersect(&Interval::new(theta.clone(), hi.clone(), open, *hi_open))
            }
        }
    }

    /// Part of `self` strictly below (`open`) or at most `theta`.
    pub fn below(&self, theta: &Rational, open: bool) -> Interval {
        match self {
            Interval::Empty => Interval::Empty,
            Interval::Span { lo, lo_open, .. } => {
                self.intersect(&Interval::new(lo.clone(), theta.clone(), *lo_open, open))
            }
        }
    }

    pub fn midpoint(&self) -> Option<Rational> {
        match self {
            Interval::Empty => None,
            Interval::Span { lo, hi, .. } => Some((lo + hi) / rat(2)),
        }
    }

    pub fn width(&self) -> Rational {
        match self {
            Interval::Empty => Rational::zero(),
            Interval::Span { lo, hi, .. } => hi - lo,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Empty => f.write_str("empty"),
            Interval::Span { lo, hi, lo_open, hi_open } => write!(
                f,
                "{}{}, {}{}",
                if *lo_open { '(' } else { '[' },
                fmt_rational(lo),
                fmt_rational(hi),
                if *hi_open { ')' } else { ']' }
            ),
        }
    }
}

/// Finite union of pairwise disjoint, non-adjacent intervals in ascending
/// order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IntervalSet(Vec<Interval>);

impl IntervalSet {
    pub fn empty() -> IntervalSet {
        IntervalSet(Vec::new())
    }

    pub fn from_interval(i: Interval) -> IntervalSet {
        IntervalSet::from_parts(vec![i])
    }

    pub fn from_parts(parts: Vec<Interval>) -> IntervalSet {
        let mut parts: Vec<Interval> = parts.into_iter().filter(|i| !i.is_empty()).collect();
        parts.sort_by(|a, b| {
            let (al, bl) = (a.lo().unwrap(), b.lo().unwrap());
            al.cmp(bl).then(a.lo_open().cmp(&b.lo_open()))
        });
        let mut out: Vec<Interval> = Vec::new();
        for p in parts {
            if let Some(last) = out.last_mut() {
                let touching = match last.hi().unwrap().cmp(p.lo().unwrap()) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Equal => !(last.hi_open() && p.lo_open()),
                    std::cmp::Ordering::Less => false,
                };
                if touching {
                    *last = last.hull(&p);
                    continue;
                }
            }
            out.push(p);
        }
        IntervalSet(out)
    }

    pub fn parts(&self) -> &[Interval] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: &Rational) -> bool {
        self.0.iter().any(|i| i.contains(v))
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::from_parts(self.0.iter().chain(other.0.iter()).cloned().collect())
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut parts = Vec::new();
        for a in &self.0 {
            for b in &other.0 {
                parts.push(a.intersect(b));
            }
        }
        IntervalSet::from_parts(parts)
    }

    pub fn intersect_interval(&self, i: &Interval) -> IntervalSet {
        self.intersect(&IntervalSet::from_interval(i.clone()))
    }

    /// `within \ self`.
    pub fn complement_within(&self, within: &Interval) -> IntervalSet {
        let Interval::Span { lo, hi, lo_open, hi_open } = within else {
            return IntervalSet::empty();
        };
        let mut gaps = Vec::new();
        let (mut cur, mut cur_open) = (lo.clone(), *lo_open);
        for p in self.intersect_interval(within).0 {
            gaps.push(Interval::new(cur.clone(), p.lo().unwrap().clone(), cur_open, !p.lo_open()));
            cur = p.hi().unwrap().clone();
            cur_open = !p.hi_open();
        }
        gaps.push(Interval::new(cur, hi.clone(), cur_open, *hi_open));
        IntervalSet::from_parts(gaps)
    }

    pub fn hull(&self) -> Interval {
        self.0.iter().fold(Interval::Empty, |acc, i| acc.hull(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::ratio;

    fn r(n: i64, d: i64) -> Rational {
        ratio(n, d)
    }

    #[test]
    fn degenerate_spans_are_empty() {
        assert!(Interval::new(rat(1), rat(1), true, false).is_empty());
        assert!(Interval::new(rat(2), rat(1), false, false).is_empty());
        assert!(!Interval::point(rat(1)).is_empty());
    }

    #[test]
    fn openness_through_operations() {
        let a = Interval::new(r(99, 10), r(115, 10), true, false);
        assert_eq!(a.to_string(), "(9.9, 11.5]");
        let shifted = a.add(&Interval::around(&rat(-1), &r(2, 5)));
        assert_eq!(shifted.to_string(), "(8.5, 10.9]");
        let b = Interval::closed(rat(10), rat(12));
        assert_eq!(a.intersect(&b).to_string(), "[10, 11.5]");
        assert_eq!(a.hull(&Interval::new(rat(8), r(99, 10), false, true)).to_string(), "[8, 11.5]");
        assert_eq!(a.affine(&rat(-1), &rat(0)).to_string(), "[-11.5, -9.9)");
    }

    #[test]
    fn half_lines() {
        let s = Interval::closed(rat(0), rat(20));
        assert_eq!(s.above(&rat(10), true).to_string(), "(10, 20]");
        assert_eq!(s.below(&rat(10), false).to_string(), "[0, 10]");
    }

    #[test]
    fn set_complement() {
        let s = Interval::closed(rat(0), rat(10));
        let set = IntervalSet::from_parts(vec![Interval::new(rat(2), rat(3), true, false), Interval::closed(rat(5), rat(6))]);
        let c = set.complement_within(&s);
        let text: Vec<String> = c.parts().iter().map(|i| i.to_string()).collect();
        assert_eq!(text, ["[0, 2]", "(3, 5)", "(6, 10]"]);
        assert_eq!(c.union(&set).parts(), &[s]);
    }
}

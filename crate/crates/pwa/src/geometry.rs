//! Exact rational intervals and axis-aligned boxes with open/closed ends.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

pub type Q = Rational64;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

/// A finite endpoint and whether it belongs to the interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Bound {
    pub value: Q,
    pub closed: bool,
}

impl Bound {
    pub fn closed(value: Q) -> Self {
        Bound {
            value,
            closed: true,
        }
    }

    pub fn open(value: Q) -> Self {
        Bound {
            value,
            closed: false,
        }
    }
}

/// An interval of the rational line; `None` endpoints are infinite.
///
/// Never empty: constructors return `None` instead.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Option<Bound>,
    pub hi: Option<Bound>,
}

/// Lower bounds ordered by how much they admit: a smaller key admits more.
fn cmp_lo(a: &Option<Bound>, b: &Option<Bound>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => x.value.cmp(&y.value).then(y.closed.cmp(&x.closed)),
    }
}

/// Upper bounds ordered by how much they admit: a larger key admits more.
fn cmp_hi(a: &Option<Bound>, b: &Option<Bound>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Greater,
        (Some(_), None) => Ordering::Less,
        (Some(x), Some(y)) => x.value.cmp(&y.value).then(x.closed.cmp(&y.closed)),
    }
}

fn flip(b: Bound) -> Bound {
    Bound {
        value: b.value,
        closed: !b.closed,
    }
}

impl Interval {
    pub fn new(lo: Option<Bound>, hi: Option<Bound>) -> Option<Self> {
        if let (Some(l), Some(h)) = (lo, hi) {
            match l.value.cmp(&h.value) {
                Ordering::Greater => return None,
                Ordering::Equal if !(l.closed && h.closed) => return None,
                _ => {}
            }
        }
        Some(Interval { lo, hi })
    }

    pub fn real_line() -> Self {
        Interval { lo: None, hi: None }
    }

    /// `[a, b]`, `(a, b]`, ... from explicit flags.
    pub fn between(a: Q, a_closed: bool, b: Q, b_closed: bool) -> Option<Self> {
        Self::new(
            Some(Bound {
                value: a,
                closed: a_closed,
            }),
            Some(Bound {
                value: b,
                closed: b_closed,
            }),
        )
    }

    pub fn point(v: Q) -> Self {
        Interval {
            lo: Some(Bound::closed(v)),
            hi: Some(Bound::closed(v)),
        }
    }

    pub fn contains(&self, v: Q) -> bool {
        let lo_ok = self
            .lo
            .is_none_or(|b| v > b.value || (b.closed && v == b.value));
        let hi_ok = self
            .hi
            .is_none_or(|b| v < b.value || (b.closed && v == b.value));
        lo_ok && hi_ok
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = if cmp_lo(&self.lo, &other.lo) == Ordering::Greater {
            self.lo
        } else {
            other.lo
        };
        let hi = if cmp_hi(&self.hi, &other.hi) == Ordering::Less {
            self.hi
        } else {
            other.hi
        };
        Interval::new(lo, hi)
    }

    pub fn is_subset(&self, other: &Interval) -> bool {
        cmp_lo(&self.lo, &other.lo) != Ordering::Less
            && cmp_hi(&self.hi, &other.hi) != Ordering::Greater
    }

    /// `self \ other` as at most two disjoint intervals.
    pub fn subtract(&self, other: &Interval) -> Vec<Interval> {
        let Some(common) = self.intersect(other) else {
            return vec![*self];
        };
        let mut out = Vec::new();
        if let Some(b) = common.lo {
            if let Some(left) = Interval::new(self.lo, Some(flip(b))) {
                out.push(left);
            }
        }
        if let Some(b) = common.hi {
            if let Some(right) = Interval::new(Some(flip(b)), self.hi) {
                out.push(right);
            }
        }
        out
    }

    /// `{c·v | v ∈ self}` for `c ≠ 0`; negative factors swap the ends.
    pub fn scale(&self, c: Q) -> Interval {
        assert!(!c.is_zero(), "scaling by zero collapses the interval");
        let mul = |b: Bound| Bound {
            value: b.value * c,
            closed: b.closed,
        };
        if c.is_positive() {
            Interval {
                lo: self.lo.map(mul),
                hi: self.hi.map(mul),
            }
        } else {
            Interval {
                lo: self.hi.map(mul),
                hi: self.lo.map(mul),
            }
        }
    }

    /// Some member, preferring the midpoint of a bounded interval.
    pub fn sample(&self) -> Q {
        match (self.lo, self.hi) {
            (Some(l), Some(h)) if l.value == h.value => l.value,
            (Some(l), Some(h)) => (l.value + h.value) / qi(2),
            (Some(l), None) => l.value + Q::one(),
            (None, Some(h)) => h.value - Q::one(),
            (None, None) => Q::zero(),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lo {
            None => write!(f, "(-inf")?,
            Some(b) => write!(f, "{}{}", if b.closed { '[' } else { '(' }, b.value)?,
        }
        write!(f, ",")?;
        match self.hi {
            None => write!(f, "+inf)"),
            Some(b) => write!(f, "{}{}", b.value, if b.closed { ']' } else { ')' }),
        }
    }
}

pub type Point = (Q, Q);

/// Product of two nonempty intervals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RationalBox {
    pub x: Interval,
    pub y: Interval,
}

impl RationalBox {
    pub fn new(x: Interval, y: Interval) -> Self {
        RationalBox { x, y }
    }

    pub fn plane() -> Self {
        RationalBox::new(Interval::real_line(), Interval::real_line())
    }

    pub fn contains(&self, p: Point) -> bool {
        self.x.contains(p.0) && self.y.contains(p.1)
    }

    pub fn intersect(&self, other: &RationalBox) -> Option<RationalBox> {
        Some(RationalBox::new(
            self.x.intersect(&other.x)?,
            self.y.intersect(&other.y)?,
        ))
    }

    pub fn is_subset(&self, other: &RationalBox) -> bool {
        self.x.is_subset(&other.x) && self.y.is_subset(&other.y)
    }

    /// `self \ other` as at most four disjoint boxes.
    pub fn subtract(&self, other: &RationalBox) -> Vec<RationalBox> {
        let Some(common) = self.intersect(other) else {
            return vec![*self];
        };
        let mut out: Vec<RationalBox> = self
            .x
            .subtract(&common.x)
            .into_iter()
            .map(|x| RationalBox::new(x, self.y))
            .collect();
        out.extend(
            self.y
                .subtract(&common.y)
                .into_iter()
                .map(|y| RationalBox::new(common.x, y)),
        );
        out
    }

    pub fn sample(&self) -> Point {
        (self.x.sample(), self.y.sample())
    }
}

impl fmt::Display for RationalBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.x, self.y)
    }
}

/// The part of `pieces` not covered by `cover`; empty iff contained.
pub fn uncovered(pieces: &[RationalBox], cover: &[RationalBox]) -> Vec<RationalBox> {
    let mut rest: Vec<RationalBox> = pieces.to_vec();
    for c in cover {
        rest = rest.iter().flat_map(|b| b.subtract(c)).collect();
        if rest.is_empty() {
            break;
        }
    }
    rest
}

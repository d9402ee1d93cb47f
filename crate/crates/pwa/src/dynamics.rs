//! The three-branch piecewise-linear map of the plane.

use crate::geometry::{q, qi, Bound, Interval, Point, RationalBox, Q};

/// A linear map `[[0, a], [b, 0]]`: `(x1, x2) ↦ (a·x2, b·x1)`.
///
/// Every branch matrix has this shape, so boxes map to boxes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SwapMap {
    pub a: Q,
    pub b: Q,
}

impl SwapMap {
    pub fn apply(&self, p: Point) -> Point {
        (self.a * p.1, self.b * p.0)
    }

    pub fn image(&self, r: &RationalBox) -> RationalBox {
        RationalBox::new(r.y.scale(self.a), r.x.scale(self.b))
    }

    /// `{p | apply(p) ∈ r}`.
    pub fn preimage(&self, r: &RationalBox) -> RationalBox {
        RationalBox::new(r.y.scale(self.b.recip()), r.x.scale(self.a.recip()))
    }

    pub fn matrix(&self) -> [[Q; 2]; 2] {
        [[qi(0), self.a], [self.b, qi(0)]]
    }
}

/// A branch: where it applies, as disjoint boxes, and its linear map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub domain: Vec<RationalBox>,
    pub map: SwapMap,
}

fn ray_from(v: Q, closed: bool) -> Interval {
    Interval::new(Some(Bound { value: v, closed }), None).unwrap()
}

fn ray_to(v: Q, closed: bool) -> Interval {
    Interval::new(None, Some(Bound { value: v, closed })).unwrap()
}

/// The branches in priority order; their domains partition the plane.
pub fn branches() -> [Branch; 3] {
    let zero = qi(0);
    [
        // x1 > 0, x2 >= 0
        Branch {
            domain: vec![RationalBox::new(
                ray_from(zero, false),
                ray_from(zero, true),
            )],
            map: SwapMap {
                a: qi(-2),
                b: qi(2),
            },
        },
        // x1 <= 0, x2 > 0
        Branch {
            domain: vec![RationalBox::new(ray_to(zero, true), ray_from(zero, false))],
            map: SwapMap {
                a: q(-1, 2),
                b: q(1, 2),
            },
        },
        // everything else: x2 < 0, or x1 <= 0 on the axis x2 = 0
        Branch {
            domain: vec![
                RationalBox::new(Interval::real_line(), ray_to(zero, false)),
                RationalBox::new(ray_to(zero, true), Interval::point(zero)),
            ],
            map: SwapMap {
                a: qi(-1),
                b: qi(1),
            },
        },
    ]
}

/// Index of the branch whose domain contains `p`.
pub fn branch_of(p: Point) -> usize {
    let zero = qi(0);
    if p.0 > zero && p.1 >= zero {
        0
    } else if p.0 <= zero && p.1 > zero {
        1
    } else {
        2
    }
}

/// One step of the dynamics.
pub fn apply_dynamics(p: Point) -> Point {
    branches()[branch_of(p)].map.apply(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_images() {
        assert_eq!(apply_dynamics((qi(1), qi(0))), (qi(0), qi(2)));
        assert_eq!(apply_dynamics((qi(0), qi(0))), (qi(0), qi(0)));
        assert_eq!(apply_dynamics((qi(-1), qi(1))), (q(-1, 2), q(-1, 2)));
        assert_eq!(apply_dynamics((qi(0), qi(-1))), (qi(1), qi(0)));
    }

    #[test]
    fn domains_agree_with_branch_of() {
        let bs = branches();
        for x in -6..=6 {
            for y in -6..=6 {
                let p = (q(x, 3), q(y, 3));
                let hits: Vec<usize> = (0..3)
                    .filter(|&k| bs[k].domain.iter().any(|d| d.contains(p)))
                    .collect();
                assert_eq!(hits, vec![branch_of(p)], "{p:?}");
            }
        }
    }

    #[test]
    fn image_and_preimage_are_inverse() {
        let m = branches()[1].map;
        let r = RationalBox::new(
            Interval::between(qi(-1), true, qi(0), true).unwrap(),
            Interval::between(qi(0), false, qi(1), true).unwrap(),
        );
        assert_eq!(m.preimage(&m.image(&r)), r);
        assert_eq!(m.image(&m.preimage(&r)), r);
    }
}

//! The nine regions of the plane and their outputs.
//!
//! The eight explicit regions are stored as disjoint box unions; `E` is the
//! complement of their union and is never materialized.

use crate::geometry::{q, qi, uncovered, Interval, Point, RationalBox, Q};

pub const IMPLICIT: &str = "E";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub name: String,
    pub boxes: Vec<RationalBox>,
}

impl Region {
    pub fn contains(&self, p: Point) -> bool {
        self.boxes.iter().any(|b| b.contains(p))
    }
}

/// The explicit regions; a point outside all of them lies in `E`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionLayout {
    pub regions: Vec<Region>,
}

fn iv(a: Q, ac: bool, b: Q, bc: bool) -> Interval {
    Interval::between(a, ac, b, bc).expect("nonempty interval")
}

fn bx(x: Interval, y: Interval) -> RationalBox {
    RationalBox::new(x, y)
}

impl RegionLayout {
    /// `A1 ∪ A2` is the unit square's quarter in `x1 > 0, x2 >= 0`, split at
    /// 1/2; the other quadrants follow the same pattern with their own
    /// boundary conventions and scales.
    pub fn standard() -> Self {
        let h = q(1, 2);
        let (z, one, two) = (qi(0), qi(1), qi(2));
        let (mh, m1, m2) = (-h, -one, -two);
        let region = |name: &str, boxes: Vec<RationalBox>| Region {
            name: name.to_owned(),
            boxes,
        };
        RegionLayout {
            regions: vec![
                // (0,1/2] x [0,1/2]
                region("A1", vec![bx(iv(z, false, h, true), iv(z, true, h, true))]),
                // (0,1]x[0,1] minus A1
                region(
                    "A2",
                    vec![
                        bx(iv(h, false, one, true), iv(z, true, one, true)),
                        bx(iv(z, false, h, true), iv(h, false, one, true)),
                    ],
                ),
                // [-1,0] x (0,1]
                region(
                    "B1",
                    vec![bx(iv(m1, true, z, true), iv(z, false, one, true))],
                ),
                // [-2,0]x(0,2] minus B1
                region(
                    "B2",
                    vec![
                        bx(iv(m2, true, m1, false), iv(z, false, two, true)),
                        bx(iv(m1, true, z, true), iv(one, false, two, true)),
                    ],
                ),
                // [-1/2,0) x [-1/2,0]
                region(
                    "C1",
                    vec![bx(iv(mh, true, z, false), iv(mh, true, z, true))],
                ),
                // [-1,0)x[-1,0] minus C1
                region(
                    "C2",
                    vec![
                        bx(iv(m1, true, mh, false), iv(m1, true, z, true)),
                        bx(iv(mh, true, z, false), iv(m1, true, mh, false)),
                    ],
                ),
                // [0,1/2] x [-1/2,0)
                region("D1", vec![bx(iv(z, true, h, true), iv(mh, true, z, false))]),
                // [0,1]x[-1,0) minus D1
                region(
                    "D2",
                    vec![
                        bx(iv(h, false, one, true), iv(m1, true, z, false)),
                        bx(iv(z, true, h, true), iv(m1, true, mh, false)),
                    ],
                ),
            ],
        }
    }

    /// The same layout with region `name` replaced by `boxes`.
    pub fn with_region(mut self, name: &str, boxes: Vec<RationalBox>) -> Self {
        let r = self
            .regions
            .iter_mut()
            .find(|r| r.name == name)
            .expect("known region");
        r.boxes = boxes;
        self
    }

    pub fn region(&self, name: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.regions
            .iter()
            .map(|r| r.name.as_str())
            .chain([IMPLICIT])
            .collect()
    }

    /// Every box of every explicit region.
    pub fn explicit_boxes(&self) -> Vec<RationalBox> {
        self.regions.iter().flat_map(|r| r.boxes.clone()).collect()
    }

    /// Name of the first explicit region containing `p`, else `E`.
    pub fn classify(&self, p: Point) -> &str {
        self.regions
            .iter()
            .find(|r| r.contains(p))
            .map_or(IMPLICIT, |r| r.name.as_str())
    }

    /// Pairs of distinct boxes (within or across regions) that overlap.
    pub fn overlaps(&self) -> Vec<(String, String, RationalBox)> {
        let tagged: Vec<(&str, &RationalBox)> = self
            .regions
            .iter()
            .flat_map(|r| r.boxes.iter().map(move |b| (r.name.as_str(), b)))
            .collect();
        let mut out = Vec::new();
        for i in 0..tagged.len() {
            for j in i + 1..tagged.len() {
                if let Some(common) = tagged[i].1.intersect(tagged[j].1) {
                    out.push((tagged[i].0.to_owned(), tagged[j].0.to_owned(), common));
                }
            }
        }
        out
    }

    /// True iff `pieces` lie inside the union of the explicit regions.
    pub fn covers(&self, pieces: &[RationalBox]) -> bool {
        uncovered(pieces, &self.explicit_boxes()).is_empty()
    }
}

/// Region of `p` under the standard layout.
pub fn classify_point(p: Point) -> String {
    RegionLayout::standard().classify(p).to_owned()
}

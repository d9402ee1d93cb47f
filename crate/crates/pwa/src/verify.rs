//! Exact proof that the region abstraction has the intended transitions, and
//! the finite quotient it induces.

use std::collections::BTreeSet;
use std::fmt;

use opacity_core::fixtures::{eq5_output, eq5_successor, EQ5_REGIONS};
use opacity_core::system::SystemError;
use opacity_core::{SystemDef, TransitionSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dynamics::{apply_dynamics, branches};
use crate::geometry::{q, uncovered, Interval, Point, RationalBox, Q};
use crate::regions::{RegionLayout, IMPLICIT};

pub const QUOTIENT_NAME: &str = "eq5-quotient";
pub const INPUT: &str = "u";
pub const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Debug, Error)]
pub enum PwaError {
    #[error("region {0} has no explicit boxes to map")]
    ImplicitRegion(String),
    #[error("unknown region {0}")]
    UnknownRegion(String),
    #[error("region transitions not verified:\n{0}")]
    Verification(TransitionDiagnosis),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// The image of `region` split by branch: each piece of the region lying in a
/// branch domain is mapped exactly.
pub fn region_image(
    layout: &RegionLayout,
    region: &str,
) -> Result<Vec<(usize, RationalBox)>, PwaError> {
    if region == IMPLICIT {
        return Err(PwaError::ImplicitRegion(region.to_owned()));
    }
    let r = layout
        .region(region)
        .ok_or_else(|| PwaError::UnknownRegion(region.to_owned()))?;
    let mut out = Vec::new();
    for b in &r.boxes {
        for (k, branch) in branches().iter().enumerate() {
            for d in &branch.domain {
                if let Some(piece) = b.intersect(d) {
                    out.push((k, branch.map.image(&piece)));
                }
            }
        }
    }
    Ok(out)
}

/// One mapped piece of a source region and what of it escapes the target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForwardPiece {
    pub branch: usize,
    pub image: RationalBox,
    pub escaped: Vec<RationalBox>,
}

/// `image(source) ⊆ target`, proved piecewise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForwardCertificate {
    pub source: String,
    pub target: String,
    pub pieces: Vec<ForwardPiece>,
}

impl ForwardCertificate {
    pub fn holds(&self) -> bool {
        self.pieces.iter().all(|p| p.escaped.is_empty())
    }

    /// A source point whose image leaves the target, with its branch.
    pub fn counterexample(&self) -> Option<(usize, Point, Point)> {
        self.pieces.iter().find_map(|p| {
            let bad = p.escaped.first()?.sample();
            let map = branches()[p.branch].map;
            let src = map.preimage(&RationalBox::new(
                Interval::point(bad.0),
                Interval::point(bad.1),
            ));
            Some((p.branch, src.sample(), bad))
        })
    }
}

/// For one branch and one explicit box `r`: the branch-restricted preimage of
/// `r` lies inside the explicit regions, so no point of `E` reaches `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreimageCertificate {
    pub branch: usize,
    pub target: String,
    pub preimage: Vec<RationalBox>,
    pub escaped: Vec<RationalBox>,
}

impl PreimageCertificate {
    pub fn holds(&self) -> bool {
        self.escaped.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionDiagnosis {
    pub forward: Vec<ForwardCertificate>,
    /// `image(A1)` and `B1` cover each other.
    pub a1_image_is_b1: bool,
    pub preimages: Vec<PreimageCertificate>,
    pub overlaps: Vec<(String, String, RationalBox)>,
}

impl TransitionDiagnosis {
    pub fn holds(&self) -> bool {
        self.overlaps.is_empty()
            && self.a1_image_is_b1
            && self.forward.iter().all(ForwardCertificate::holds)
            && self.preimages.iter().all(PreimageCertificate::holds)
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (a, b, common) in &self.overlaps {
            out.push(format!("regions {a} and {b} overlap on {common}"));
        }
        for c in &self.forward {
            if let Some((k, src, img)) = c.counterexample() {
                out.push(format!(
                    "image({}) not inside {}: branch {} maps ({}, {}) to ({}, {})",
                    c.source,
                    c.target,
                    k + 1,
                    src.0,
                    src.1,
                    img.0,
                    img.1
                ));
            }
        }
        if !self.a1_image_is_b1 {
            out.push("image(A1) differs from B1".to_owned());
        }
        for p in self.preimages.iter().filter(|p| !p.holds()) {
            let s = p.escaped[0].sample();
            out.push(format!(
                "branch {} sends E point ({}, {}) into {}",
                p.branch + 1,
                s.0,
                s.1,
                p.target
            ));
        }
        out
    }
}

impl fmt::Display for TransitionDiagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds() {
            return write!(
                f,
                "holds: {} forward containments, {} preimage certificates",
                self.forward.len(),
                self.preimages.len()
            );
        }
        write!(f, "fails")?;
        for line in self.failures() {
            write!(f, "\n  {line}")?;
        }
        Ok(())
    }
}

fn forward_certificate(
    layout: &RegionLayout,
    source: &str,
    target: &str,
) -> Result<ForwardCertificate, PwaError> {
    let cover = &layout
        .region(target)
        .ok_or_else(|| PwaError::UnknownRegion(target.to_owned()))?
        .boxes;
    let pieces = region_image(layout, source)?
        .into_iter()
        .map(|(branch, image)| ForwardPiece {
            branch,
            image,
            escaped: uncovered(&[image], cover),
        })
        .collect();
    Ok(ForwardCertificate {
        source: source.to_owned(),
        target: target.to_owned(),
        pieces,
    })
}

/// Proves every explicit transition and `E -> E` by exact box arithmetic.
pub fn verify_region_transitions(layout: &RegionLayout) -> Result<TransitionDiagnosis, PwaError> {
    let mut forward = Vec::new();
    for r in &layout.regions {
        forward.push(forward_certificate(
            layout,
            &r.name,
            eq5_successor(&r.name),
        )?);
    }

    let a1: Vec<RationalBox> = region_image(layout, "A1")?
        .into_iter()
        .map(|(_, b)| b)
        .collect();
    let b1 = &layout
        .region("B1")
        .ok_or_else(|| PwaError::UnknownRegion("B1".to_owned()))?
        .boxes;
    let a1_image_is_b1 = uncovered(&a1, b1).is_empty() && uncovered(b1, &a1).is_empty();

    let explicit = layout.explicit_boxes();
    let mut preimages = Vec::new();
    for (k, branch) in branches().iter().enumerate() {
        for r in &layout.regions {
            let back = r.boxes.iter().map(|b| branch.map.preimage(b));
            let preimage: Vec<RationalBox> = back
                .flat_map(|p| branch.domain.iter().filter_map(move |d| p.intersect(d)))
                .collect();
            let escaped = uncovered(&preimage, &explicit);
            preimages.push(PreimageCertificate {
                branch: k,
                target: r.name.clone(),
                preimage,
                escaped,
            });
        }
    }

    Ok(TransitionDiagnosis {
        forward,
        a1_image_is_b1,
        preimages,
        overlaps: layout.overlaps(),
    })
}

/// The nine-state quotient whose transitions are read off the certificates.
pub fn build_pwa_quotient(layout: &RegionLayout) -> Result<TransitionSystem, PwaError> {
    let diag = verify_region_transitions(layout)?;
    if !diag.holds() {
        return Err(PwaError::Verification(diag));
    }
    let mut def = SystemDef::new(QUOTIENT_NAME)
        .states(EQ5_REGIONS)
        .initial(EQ5_REGIONS)
        .secret(["A1"])
        .inputs([INPUT])
        .outputs(["1", "2", "3", "4", "5"]);
    for r in EQ5_REGIONS {
        def = def.map(r, eq5_output(r));
    }
    for c in &diag.forward {
        def = def.trans(c.source.as_str(), INPUT, c.target.as_str());
    }
    // every preimage certificate holds, so E only reaches E
    def = def.trans(IMPLICIT, INPUT, IMPLICIT);
    Ok(def.build()?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingException {
    pub point: Point,
    pub region: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingReport {
    pub samples: usize,
    pub visited: BTreeSet<String>,
    pub exceptions: Vec<SamplingException>,
}

/// Coordinates concentrated near the region boundaries, where conventions on
/// open and closed ends matter.
fn sample_coordinate(rng: &mut ChaCha8Rng) -> Q {
    const EDGES: [(i64, i64); 9] = [
        (0, 1),
        (1, 2),
        (-1, 2),
        (1, 1),
        (-1, 1),
        (2, 1),
        (-2, 1),
        (1, 4),
        (-1, 4),
    ];
    match rng.gen_range(0..4) {
        0 => {
            let (n, d) = EDGES[rng.gen_range(0..EDGES.len())];
            q(n, d)
        }
        1 => {
            let (n, d) = EDGES[rng.gen_range(0..EDGES.len())];
            let eps = q(rng.gen_range(-3..=3), 1024);
            q(n, d) + eps
        }
        _ => {
            let d = [1, 2, 3, 4, 6, 8, 16, 64][rng.gen_range(0..8)];
            q(rng.gen_range(-3 * d..=3 * d), d)
        }
    }
}

/// Checks `classify(f(p)) = successor(classify(p))` on seeded rational points.
pub fn sampling_consistency(layout: &RegionLayout, seed: u64, samples: usize) -> SamplingReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut visited = BTreeSet::new();
    let mut exceptions = Vec::new();
    for _ in 0..samples {
        let p = (sample_coordinate(&mut rng), sample_coordinate(&mut rng));
        let region = layout.classify(p);
        let expected = eq5_successor(region);
        let actual = layout.classify(apply_dynamics(p));
        visited.insert(region.to_owned());
        if actual != expected {
            exceptions.push(SamplingException {
                point: p,
                region: region.to_owned(),
                expected: expected.to_owned(),
                actual: actual.to_owned(),
            });
        }
    }
    SamplingReport {
        samples,
        visited,
        exceptions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::qi;
    use opacity_core::fixtures::eq5_quotient;

    fn boxes_of(layout: &RegionLayout, name: &str) -> Vec<RationalBox> {
        layout.region(name).unwrap().boxes.clone()
    }

    #[test]
    fn images_of_inner_regions() {
        let l = RegionLayout::standard();
        assert_eq!(
            region_image(&l, "A1").unwrap(),
            vec![(0, boxes_of(&l, "B1")[0])]
        );
        assert_eq!(
            region_image(&l, "B1").unwrap(),
            vec![(1, boxes_of(&l, "C1")[0])]
        );
        let d1 = region_image(&l, "D1").unwrap();
        assert_eq!(d1.len(), 1);
        assert_eq!(d1[0], (2, boxes_of(&l, "A1")[0]));
        assert!(matches!(
            region_image(&l, "E"),
            Err(PwaError::ImplicitRegion(_))
        ));
    }

    #[test]
    fn standard_layout_is_verified() {
        let d = verify_region_transitions(&RegionLayout::standard()).unwrap();
        assert!(d.holds(), "{d}");
        assert_eq!(d.forward.len(), 8);
        assert!(d.a1_image_is_b1);
        assert_eq!(d.preimages.len(), 3 * 8);
    }

    #[test]
    fn perturbed_a1_is_rejected() {
        let wide = RationalBox::new(
            Interval::between(qi(0), false, qi(1), true).unwrap(),
            Interval::between(qi(0), true, q(1, 2), true).unwrap(),
        );
        let l = RegionLayout::standard().with_region("A1", vec![wide]);
        let d = verify_region_transitions(&l).unwrap();
        assert!(!d.holds());
        let a1 = d.forward.iter().find(|c| c.source == "A1").unwrap();
        let (branch, src, img) = a1.counterexample().unwrap();
        assert_eq!(branch, 0);
        assert!(l.region("A1").unwrap().contains(src));
        assert!(!l.region("B1").unwrap().contains(img));
        assert!(d.to_string().contains("image(A1) not inside B1"));
        assert!(matches!(
            build_pwa_quotient(&l),
            Err(PwaError::Verification(_))
        ));
    }

    #[test]
    fn quotient_matches_fixture() {
        let sys = build_pwa_quotient(&RegionLayout::standard()).unwrap();
        assert_eq!(sys, eq5_quotient());
        assert_eq!(sys.num_states(), 9);
        assert_eq!(sys.num_transitions(), 9);
    }

    #[test]
    fn small_sample_has_no_exceptions() {
        let r = sampling_consistency(&RegionLayout::standard(), 7, 2_000);
        assert!(r.exceptions.is_empty(), "{:?}", r.exceptions.first());
        assert_eq!(r.visited.len(), 9);
    }
}

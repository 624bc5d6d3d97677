//! Deterministic symbolic grounder.
//!
//! The instruction is parsed to canonical slots and resolved to a part id
//! using the lexicon's task knowledge; the part is then located in the view
//! by transferring labels from the object's full-surface exemplar cloud:
//! the view is registered onto the exemplar with ICP and every view point
//! takes the label of its nearest exemplar point. The input view's own
//! labels, if any, are never read — the exemplar plus registration stands in
//! for a learned part segmenter.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geom::{icp_register, LabeledCloud, Point3, RigidPose, SpatialIndex};
use crate::grasp::RegionMask;
use crate::language::{parse_instruction, resolve_part, Lexicon};

/// ICP iteration cap for view-to-exemplar registration.
const ICP_MAX_ITERS: usize = 30;
const ICP_TOL: f64 = 1e-10;

/// Symbolic grounding back-end for one object.
#[derive(Clone, Debug)]
pub struct RuleGrounder {
    category: String,
    exemplar: LabeledCloud,
    /// part name → label value on the exemplar.
    part_labels: BTreeMap<String, u32>,
}

impl RuleGrounder {
    /// Builds a grounder from an object's labeled full-surface cloud and its
    /// part-name table.
    pub fn new(
        category: &str,
        exemplar: LabeledCloud,
        part_names: &BTreeMap<u32, String>,
    ) -> Result<RuleGrounder> {
        if exemplar.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let part_labels = part_names
            .iter()
            .map(|(&label, name)| (name.clone(), label))
            .collect();
        Ok(RuleGrounder {
            category: category.to_string(),
            exemplar,
            part_labels,
        })
    }

    pub fn category(&self) -> &str {
        &self.category
    }

    /// Resolves the instruction text to a part id, using this grounder's
    /// object category as the scene hint when the lexicon knows it.
    pub fn resolve(&self, text: &str, lexicon: &Lexicon) -> Result<String> {
        let slots = parse_instruction(text, lexicon);
        let hint = lexicon
            .is_object(&self.category)
            .then_some(self.category.as_str());
        resolve_part(&slots, hint, lexicon)
    }

    /// Predicted per-point labels: ICP-register the view onto the exemplar,
    /// then copy each point's nearest exemplar label.
    pub fn segment(&self, points: &[Point3]) -> Result<Vec<u32>> {
        let registration = icp_register(
            points,
            &self.exemplar.points,
            &RigidPose::identity(),
            ICP_MAX_ITERS,
            ICP_TOL,
        )?;
        let index = SpatialIndex::build(&self.exemplar.points);
        Ok(points
            .iter()
            .map(|p| {
                let moved = registration.pose.apply(p);
                let (idx, _) = index
                    .nearest_one(&moved)
                    .expect("exemplar verified non-empty");
                self.exemplar.labels[idx]
            })
            .collect())
    }

    /// Mask of segment entries matching the named part. A part the object
    /// does not have yields an empty mask rather than an error.
    pub fn mask_for_part(&self, segmentation: &[u32], part_id: &str) -> RegionMask {
        match self.part_labels.get(part_id) {
            Some(&label) => RegionMask::new(segmentation.iter().map(|&l| l == label).collect()),
            None => RegionMask::new(vec![false; segmentation.len()]),
        }
    }
}

/// Full symbolic path: parse, resolve, segment, select.
pub fn rule_ground(
    grounder: &RuleGrounder,
    points: &[Point3],
    text: &str,
    lexicon: &Lexicon,
) -> Result<RegionMask> {
    let part = grounder.resolve(text, lexicon)?;
    let segmentation = grounder.segment(points)?;
    Ok(grounder.mask_for_part(&segmentation, &part))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;
    use crate::language::Lexicon;
    use crate::shape::{
        look_at, make_shape, render_view, sample_omni, CameraIntrinsics,
    };

    fn iou(a: &RegionMask, b: &RegionMask) -> f64 {
        let mut inter = 0usize;
        let mut union = 0usize;
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            if *x && *y {
                inter += 1;
            }
            if *x || *y {
                union += 1;
            }
        }
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    fn mug_grounder() -> (RuleGrounder, LabeledCloud) {
        let mesh = make_shape("mug", &[], 21).unwrap();
        let exemplar = sample_omni(&mesh, 10_000, 33).unwrap();
        let camera = look_at(
            Point3::new(0.14, 0.1, 0.12),
            Point3::new(0.0, 0.0, 0.04),
        )
        .unwrap();
        let view = render_view(
            &mesh,
            &RigidPose::identity(),
            &camera,
            &CameraIntrinsics::default_desk(),
            4_096,
            5,
        )
        .unwrap();
        let grounder = RuleGrounder::new("mug", exemplar, &mesh.part_names).unwrap();
        (grounder, view)
    }

    #[test]
    fn mug_handle_grounds_with_high_overlap() {
        let (grounder, view) = mug_grounder();
        let lex = Lexicon::bundled();
        let mask = rule_ground(
            &grounder,
            &view.points,
            "grab the handle of the mug so i can drink",
            lex,
        )
        .unwrap();
        assert_eq!(mask.len(), view.len());
        // Ground truth from the generator's labels (never shown to the
        // grounder): label 1 is the handle.
        let truth = RegionMask::from_label(&view, 1);
        assert!(truth.count() > 0, "view must see the handle");
        let overlap = iou(&mask, &truth);
        assert!(overlap >= 0.9, "IoU {overlap}");
    }

    #[test]
    fn missing_parts_yield_empty_masks() {
        let (grounder, view) = mug_grounder();
        let lex = Lexicon::bundled();
        // "shade" resolves as an explicit part but mugs have none.
        let mask = rule_ground(
            &grounder,
            &view.points,
            "grab the shade of the mug so i can light up the room",
            lex,
        )
        .unwrap();
        assert_eq!(mask.len(), view.len());
        assert_eq!(mask.count(), 0);
    }

    #[test]
    fn truth_label_substitution_agrees_exactly() {
        // Swapping the predicted segmentation for the generator's labels must
        // reproduce the ground-truth mask bit for bit.
        let (grounder, view) = mug_grounder();
        let mask = grounder.mask_for_part(&view.labels, "handle");
        let truth = RegionMask::from_label(&view, 1);
        assert_eq!(mask.as_slice(), truth.as_slice());
    }

    #[test]
    fn unresolvable_instructions_propagate() {
        let exemplar = LabeledCloud::new(
            (0..40)
                .map(|i| Point3::new(i as f64 * 0.01, 0.0, 0.0))
                .collect(),
            vec![0; 40],
        )
        .unwrap();
        let mut names = BTreeMap::new();
        names.insert(0u32, "rail".to_string());
        // Category unknown to the lexicon: no scene hint is available.
        let grounder = RuleGrounder::new("widget", exemplar, &names).unwrap();
        let lex = Lexicon::bundled();
        let err = grounder.resolve("do the thing", lex).unwrap_err();
        assert!(matches!(err, Error::Unresolvable));
    }

    #[test]
    fn segmentation_survives_a_rigid_offset() {
        // A view shifted off the exemplar frame must be pulled back by the
        // registration step before labels transfer.
        let (grounder, view) = mug_grounder();
        let shift = Vec3::new(0.004, -0.003, 0.002);
        let moved: Vec<Point3> = view.points.iter().map(|p| *p + shift).collect();
        let seg = grounder.segment(&moved).unwrap();
        let mut agree = 0usize;
        for (predicted, truth) in seg.iter().zip(&view.labels) {
            if predicted == truth {
                agree += 1;
            }
        }
        let rate = agree as f64 / seg.len() as f64;
        assert!(rate >= 0.95, "label agreement {rate}");
    }
}

//! One grasp trial: ground an instruction on the observed cloud, sample
//! grasps inside the resulting region on the reference surface, pick one,
//! and judge it.
//!
//! Pipeline failures that stem from the data — an unresolvable instruction,
//! an empty grounded region, a sampler that found nothing — count as failed
//! trials rather than being dropped, so success rates carry no survivorship
//! bias. Contract violations (mismatched lengths, invalid configurations)
//! still propagate as errors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{LabeledCloud, Point3, SpatialIndex, Vec3};
use crate::grasp::{
    force_closure_label, sample_antipodal, score_candidates, select_grasp, GraspLabel,
    HandConfig, RegionMask, SamplerRules, Scorer, SelectionPolicy,
};
use crate::grounding::{ground, Grounder};
use crate::language::Lexicon;

/// Grounded masks transfer from the observed cloud to the reference surface
/// by nearest neighbor, but only within this distance (meters); reference
/// points with no observed point nearby stay unselected.
pub const MASK_TRANSFER_CAP: f64 = 0.010;

/// Where the sampler is allowed to draw seed points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingArea {
    /// Only the grounded region.
    Grounded,
    /// The whole object surface (part-agnostic baseline).
    Global,
}

/// One evaluable scene: the cloud the grounder sees, the denser labeled
/// reference surface the sampler and the oracle work on, reference normals,
/// and the part-label dictionary.
#[derive(Clone, Debug)]
pub struct TrialScene {
    pub observed: LabeledCloud,
    pub reference: LabeledCloud,
    pub normals: Vec<Vec3>,
    pub part_names: BTreeMap<u32, String>,
}

impl TrialScene {
    /// Numeric label for a part name, if the scene has that part.
    pub fn label_of(&self, part: &str) -> Option<u32> {
        self.part_names.iter().find(|(_, name)| name.as_str() == part).map(|(&l, _)| l)
    }

    /// Ground-truth mask for a part on the observed cloud.
    pub fn truth_mask_observed(&self, part: &str) -> Option<RegionMask> {
        self.label_of(part).map(|l| RegionMask::from_label(&self.observed, l))
    }
}

/// Per-trial pipeline knobs.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TrialConfig {
    pub hand: HandConfig,
    pub rules: SamplerRules,
    pub area: SamplingArea,
    pub policy: SelectionPolicy,
}

/// The two success booleans and the sampling effort of one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// The selected grasp's nearest-surface part equals the truth part.
    pub part_correct: bool,
    /// The force-closure oracle accepts the selected grasp.
    pub exec_success: bool,
    /// Sampler trials consumed (0 when sampling never ran).
    pub trials_used: usize,
}

impl TrialOutcome {
    fn failed(trials_used: usize) -> Self {
        TrialOutcome { part_correct: false, exec_success: false, trials_used }
    }
}

/// True for errors that express a legitimate empty-handed pipeline outcome
/// rather than a caller bug; these become failed trials.
fn is_pipeline_failure(err: &Error) -> bool {
    matches!(
        err,
        Error::Unresolvable
            | Error::UnknownId(_)
            | Error::EmptyRegion
            | Error::NoCandidates { .. }
            | Error::PartTooSmall { .. }
            | Error::TooFewPoints { .. }
            | Error::EmptyCloud
            | Error::EmptyResults
    )
}

/// Carries a mask from one cloud to another: each target point copies the
/// mask bit of its nearest source point, provided that neighbor lies within
/// `cap` meters.
pub fn transfer_mask(
    source: &[Point3],
    mask: &RegionMask,
    target: &[Point3],
    cap: f64,
) -> Result<RegionMask> {
    if mask.len() != source.len() {
        return Err(Error::LengthMismatch { lhs: mask.len(), rhs: source.len() });
    }
    if source.is_empty() {
        return Ok(RegionMask::new(vec![false; target.len()]));
    }
    let index = SpatialIndex::build(source);
    let bits = target
        .iter()
        .map(|p| match index.nearest_one(p) {
            Some((i, d2)) if d2.sqrt() <= cap => mask.get(i),
            _ => false,
        })
        .collect();
    Ok(RegionMask::new(bits))
}

/// Runs one full trial: grounding (for the grounded sampling area), region
/// transfer, constrained sampling, scoring, selection, and the two
/// judgments.
pub fn grasp_trial(
    scene: &TrialScene,
    instruction: &str,
    truth_part: &str,
    grounder: &(dyn Grounder + Sync),
    config: &TrialConfig,
    scorer: &dyn Scorer,
    lexicon: &Lexicon,
    seed: u64,
) -> Result<TrialOutcome> {
    let region = match config.area {
        SamplingArea::Global => RegionMask::full(scene.reference.len()),
        SamplingArea::Grounded => {
            match ground(grounder, &scene.observed.points, instruction, lexicon) {
                Ok(mask) => transfer_mask(
                    &scene.observed.points,
                    &mask,
                    &scene.reference.points,
                    MASK_TRANSFER_CAP,
                )?,
                Err(e) if is_pipeline_failure(&e) => return Ok(TrialOutcome::failed(0)),
                Err(e) => return Err(e),
            }
        }
    };
    run_region_trial(scene, &region, truth_part, config, scorer, seed)
}

/// Trial core once the sampling region is known; shared by [`grasp_trial`]
/// and the experiment runner (which grounds each case only once).
pub(crate) fn run_region_trial(
    scene: &TrialScene,
    region: &RegionMask,
    truth_part: &str,
    config: &TrialConfig,
    scorer: &dyn Scorer,
    seed: u64,
) -> Result<TrialOutcome> {
    let outcome = match sample_antipodal(
        &scene.reference,
        &scene.normals,
        region,
        &config.hand,
        &config.rules,
        seed,
    ) {
        Ok(o) => o,
        Err(Error::EmptyRegion) => return Ok(TrialOutcome::failed(0)),
        Err(Error::NoCandidates { trials }) => return Ok(TrialOutcome::failed(trials)),
        Err(e) => return Err(e),
    };

    let scores =
        score_candidates(&outcome.candidates, &scene.reference, &scene.normals, &config.hand, scorer)?;
    // Selection draws from a stream decoupled from the sampler's.
    let (_, chosen) = select_grasp(
        &outcome.candidates,
        &scores,
        config.policy,
        seed ^ 0x5e1e_c7a1_1d00_d1e5,
    )?;

    let part_correct =
        scene.part_names.get(&chosen.part_label).map(String::as_str) == Some(truth_part);
    let verdict = force_closure_label(&chosen, &scene.reference, &scene.normals, &config.hand)?;
    Ok(TrialOutcome {
        part_correct,
        exec_success: verdict == GraspLabel::Success,
        trials_used: outcome.trials_used,
    })
}

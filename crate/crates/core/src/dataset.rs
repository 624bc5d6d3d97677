//! Dataset assembly: one record per object — mesh, the 13-cloud observation
//! set, per-part labeled grasp sets, and the sentence list — plus the
//! on-disk tree layout
//! `<root>/<category>/<object_id>/{mesh.obj.json, omni.ply, p{0..2}_v{0..3}.ply,
//! grasps.json, sentences.json, manifest.json}`.
//!
//! Every artifact is a pure function of (category, index, base seed), so a
//! regenerated tree is byte-identical. Files carry no timestamps.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{TrialCase, TrialScene};
use crate::geom::{
    estimate_normals, fps_indices, orient_normals_away_from, LabeledCloud, RigidPose, Vec3,
};
use crate::grasp::{build_grasp_set, GraspCandidate, GraspLabel, GraspPose, GraspSet, HandConfig};
use crate::grounding::GroundingExample;
use crate::language::{generate_sentences, Instruction, Lexicon, Mode};
use crate::ply;
use crate::shape::{
    build_observation_set, make_shape, ObservationSet, Workspace, AZIMUTHS, CATALOG_VERSION,
    OMNI_POINTS, PLACEMENTS, VIEW_POINTS,
};

/// Labeled grasp candidates generated per part.
pub const GRASPS_PER_PART: usize = 60;

/// Surface density used for grasp-set construction and trial sampling: a
/// farthest-point subset of the omni cloud (normals still estimated at
/// full density). The collision oracle holds the hand at max aperture, so
/// all grasp admission happens at one agreed surface resolution.
pub const GRASP_CLOUD_POINTS: usize = 2048;

/// Per-object provenance: everything needed to regenerate or audit the
/// directory, and the placement poses that the PLY views do not carry.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectManifest {
    pub catalog_version: String,
    pub category: String,
    pub object_id: String,
    pub seed: u64,
    pub part_names: BTreeMap<u32, String>,
    pub placements: Vec<RigidPose>,
    pub omni_points: usize,
    pub view_points: usize,
    pub grasps_per_part: usize,
    pub positive_fraction: f64,
    pub sentence_count: usize,
}

/// One generated object with all of its derived artifacts.
#[derive(Clone, Debug)]
pub struct ObjectRecord {
    pub manifest: ObjectManifest,
    pub mesh: crate::shape::PartMesh,
    pub observations: ObservationSet,
    /// One labeled set per part, ascending part label.
    pub grasps: Vec<GraspSet>,
    pub sentences: Vec<Instruction>,
}

impl ObjectRecord {
    pub fn part_label(&self, name: &str) -> Option<u32> {
        self.mesh
            .part_names
            .iter()
            .find(|(_, n)| n.as_str() == name)
            .map(|(&l, _)| l)
    }

    /// Positive fraction over all parts' candidates.
    pub fn positive_fraction(&self) -> f64 {
        let total: usize = self.grasps.iter().map(|g| g.candidates.len()).sum();
        if total == 0 {
            return 0.0;
        }
        let positive: usize = self
            .grasps
            .iter()
            .flat_map(|g| &g.candidates)
            .filter(|c| c.label == GraspLabel::Success)
            .count();
        positive as f64 / total as f64
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const OBJECT_SEED_SALT: u64 = 0x6f62_6a65_6374_5f64;

/// Deterministic per-object seed from the dataset seed, the category name,
/// and the object's index within the category.
pub fn object_seed(base: u64, category: &str, index: usize) -> u64 {
    let mut s = splitmix(base ^ OBJECT_SEED_SALT);
    for &b in category.as_bytes() {
        s = splitmix(s ^ b as u64);
    }
    splitmix(s ^ index as u64)
}

/// Picks the affordance whose part ranking covers `part`, preferring the
/// affordances actually mapped for this category so fragment sentences stay
/// semantically coherent.
fn affordance_for_part(lexicon: &Lexicon, category: &str, part: &str) -> String {
    let ranks_part = |aff: &str| {
        lexicon
            .ranked_parts(aff)
            .is_some_and(|parts| parts.iter().any(|p| p == part))
    };
    let mapped: Vec<&str> = lexicon
        .affordance_ids()
        .into_iter()
        .filter(|a| lexicon.map_part(category, a).is_some())
        .collect();
    for &aff in &mapped {
        if ranks_part(aff) {
            return aff.to_string();
        }
    }
    for aff in lexicon.affordance_ids() {
        if ranks_part(aff) {
            return aff.to_string();
        }
    }
    mapped
        .first()
        .map(|a| a.to_string())
        .unwrap_or_else(|| lexicon.affordance_ids()[0].to_string())
}

/// Sentence set for one object: all seven modes for every
/// (affordance → part) pairing the lexicon maps for the category, plus
/// fragment and fully-specified sentences for any leftover parts so each
/// part class appears as a truth label.
fn object_sentences(
    lexicon: &Lexicon,
    category: &str,
    part_names: &BTreeMap<u32, String>,
    seed: u64,
) -> Result<Vec<Instruction>> {
    let mut sentences = Vec::new();
    let mut covered: Vec<&str> = Vec::new();
    let mut salt = 0u64;

    for aff in lexicon.affordance_ids() {
        let Some(part) = lexicon.map_part(category, aff) else {
            continue;
        };
        sentences.extend(generate_sentences(
            category,
            part,
            aff,
            &Mode::ALL,
            splitmix(seed ^ (0x3000 + salt)),
        )?);
        covered.push(part);
        salt += 1;
    }

    for part in part_names.values() {
        if covered.contains(&part.as_str()) {
            continue;
        }
        let aff = affordance_for_part(lexicon, category, part);
        sentences.extend(generate_sentences(
            category,
            part,
            &aff,
            &[Mode::PartObjectFragment, Mode::KnownAll],
            splitmix(seed ^ (0x3000 + salt)),
        )?);
        salt += 1;
    }
    Ok(sentences)
}

/// Generates one object end to end: mesh, observations, per-part grasp
/// sets labeled by the force-closure oracle, and sentences.
pub fn generate_object(
    category: &str,
    index: usize,
    base_seed: u64,
    hand: &HandConfig,
) -> Result<ObjectRecord> {
    let lexicon = Lexicon::bundled();
    let seed = object_seed(base_seed, category, index);
    let mesh = make_shape(category, &[], seed)?;
    let observations = build_observation_set(&mesh, &Workspace::default_desk(), seed)?;

    let omni = &observations.omni;
    let mut normals = estimate_normals(&omni.points, 16)?;
    orient_normals_away_from(&omni.points, &mut normals, &omni.centroid()?);

    let idx = fps_indices(omni, GRASP_CLOUD_POINTS, splitmix(seed ^ 0x9ca5))?;
    let grasp_cloud = omni.select(&idx);
    let grasp_normals: Vec<Vec3> = idx.iter().map(|&i| normals[i]).collect();

    let mut grasps = Vec::new();
    for &label in mesh.part_names.keys() {
        grasps.push(build_grasp_set(
            &grasp_cloud,
            &grasp_normals,
            label,
            hand,
            GRASPS_PER_PART,
            splitmix(seed ^ (0x4000 + label as u64)),
        )?);
    }

    let sentences = object_sentences(lexicon, category, &mesh.part_names, seed)?;

    let positive: usize = grasps
        .iter()
        .flat_map(|g| &g.candidates)
        .filter(|c| c.label == GraspLabel::Success)
        .count();
    let total: usize = grasps.iter().map(|g| g.candidates.len()).sum();

    let manifest = ObjectManifest {
        catalog_version: CATALOG_VERSION.to_string(),
        category: category.to_string(),
        object_id: format!("{category}_{index:04}"),
        seed,
        part_names: mesh.part_names.clone(),
        placements: observations.placements.clone(),
        omni_points: OMNI_POINTS,
        view_points: VIEW_POINTS,
        grasps_per_part: GRASPS_PER_PART,
        positive_fraction: if total == 0 { 0.0 } else { positive as f64 / total as f64 },
        sentence_count: sentences.len(),
    };

    Ok(ObjectRecord { manifest, mesh, observations, grasps, sentences })
}

/// One line of `grasps.json`; the pose serializes as the row-major
/// 12-number rigid-transform array.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraspFileRow {
    pose: GraspPose,
    contacts: [[f64; 3]; 2],
    part_label: u32,
    quality: f64,
    label: GraspLabel,
    seed: u64,
    trials_used: usize,
}

fn view_file_name(placement: usize, azimuth: usize) -> String {
    format!("p{placement}_v{azimuth}.ply")
}

/// Writes one object directory; returns its path. Rewriting the same
/// record produces byte-identical files.
pub fn write_object(record: &ObjectRecord, root: &Path) -> Result<PathBuf> {
    let dir = root.join(&record.manifest.category).join(&record.manifest.object_id);
    fs::create_dir_all(&dir)?;

    fs::write(dir.join("mesh.obj.json"), serde_json::to_string_pretty(&record.mesh)?)?;
    ply::write_cloud(&dir.join("omni.ply"), &record.observations.omni)?;
    for p in 0..PLACEMENTS {
        for a in 0..AZIMUTHS {
            ply::write_cloud(
                &dir.join(view_file_name(p, a)),
                &record.observations.views[p * AZIMUTHS + a],
            )?;
        }
    }

    let rows: Vec<GraspFileRow> = record
        .grasps
        .iter()
        .flat_map(|set| {
            set.candidates.iter().map(|c| GraspFileRow {
                pose: c.pose,
                contacts: [
                    [c.contact_left.x, c.contact_left.y, c.contact_left.z],
                    [c.contact_right.x, c.contact_right.y, c.contact_right.z],
                ],
                part_label: c.part_label,
                quality: c.quality,
                label: c.label,
                seed: set.seed,
                trials_used: set.trials_used,
            })
        })
        .collect();
    fs::write(dir.join("grasps.json"), serde_json::to_string_pretty(&rows)?)?;
    fs::write(dir.join("sentences.json"), serde_json::to_string_pretty(&record.sentences)?)?;
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&record.manifest)?)?;
    Ok(dir)
}

/// Reads one object directory back into a record.
pub fn load_object(dir: &Path) -> Result<ObjectRecord> {
    let manifest: ObjectManifest =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
    let mesh: crate::shape::PartMesh =
        serde_json::from_str(&fs::read_to_string(dir.join("mesh.obj.json"))?)?;
    let omni = ply::read_cloud(&dir.join("omni.ply"))?;
    let mut views = Vec::with_capacity(PLACEMENTS * AZIMUTHS);
    for p in 0..PLACEMENTS {
        for a in 0..AZIMUTHS {
            views.push(ply::read_cloud(&dir.join(view_file_name(p, a)))?);
        }
    }
    let observations =
        ObservationSet { omni, views, placements: manifest.placements.clone() };

    let rows: Vec<GraspFileRow> =
        serde_json::from_str(&fs::read_to_string(dir.join("grasps.json"))?)?;
    let mut sets: BTreeMap<u32, GraspSet> = BTreeMap::new();
    for row in rows {
        let set = sets.entry(row.part_label).or_insert_with(|| GraspSet {
            part_label: row.part_label,
            seed: row.seed,
            trials_used: row.trials_used,
            candidates: Vec::new(),
        });
        set.candidates.push(GraspCandidate {
            pose: row.pose,
            contact_left: crate::geom::Point3::new(
                row.contacts[0][0],
                row.contacts[0][1],
                row.contacts[0][2],
            ),
            contact_right: crate::geom::Point3::new(
                row.contacts[1][0],
                row.contacts[1][1],
                row.contacts[1][2],
            ),
            part_label: row.part_label,
            quality: row.quality,
            label: row.label,
        });
    }
    let grasps = sets.into_values().collect();

    let sentences: Vec<Instruction> =
        serde_json::from_str(&fs::read_to_string(dir.join("sentences.json"))?)?;

    Ok(ObjectRecord { manifest, mesh, observations, grasps, sentences })
}

/// All (category, object_id) directories under a dataset root, sorted.
pub fn dataset_ids(root: &Path) -> Result<Vec<(String, String)>> {
    let mut ids = Vec::new();
    for category_entry in sorted_dirs(root)? {
        let category = dir_name(&category_entry);
        for object_entry in sorted_dirs(&category_entry)? {
            ids.push((category.clone(), dir_name(&object_entry)));
        }
    }
    Ok(ids)
}

/// Loads every object under the root, sorted by (category, object_id).
pub fn load_dataset(root: &Path) -> Result<Vec<ObjectRecord>> {
    let mut records = Vec::new();
    for (category, object_id) in dataset_ids(root)? {
        records.push(load_object(&root.join(category).join(object_id))?);
    }
    Ok(records)
}

fn sorted_dirs(path: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs = Vec::new();
    for entry in fs::read_dir(path)? {
        let entry = entry?;
        if entry.file_type()?.is_dir() {
            dirs.push(entry.path());
        }
    }
    dirs.sort();
    Ok(dirs)
}

fn dir_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Builds the evaluation scene for a record: grounding runs on a
/// downsampled first partial view; sampling and judging run on a
/// downsampled omni reference whose normals come from the full-density
/// surface.
pub fn trial_scene(
    record: &ObjectRecord,
    observed_points: usize,
    reference_points: usize,
) -> Result<TrialScene> {
    let omni = &record.observations.omni;
    let mut normals = estimate_normals(&omni.points, 16)?;
    orient_normals_away_from(&omni.points, &mut normals, &omni.centroid()?);

    let idx = fps_indices(omni, reference_points, splitmix(record.manifest.seed ^ 0x5afe))?;
    let reference = omni.select(&idx);
    let ref_normals: Vec<Vec3> = idx.iter().map(|&i| normals[i]).collect();

    let view = &record.observations.views[0];
    let vidx = fps_indices(view, observed_points, splitmix(record.manifest.seed ^ 0x0b5e))?;
    let observed = view.select(&vidx);

    Ok(TrialScene {
        observed,
        reference,
        normals: ref_normals,
        part_names: record.mesh.part_names.clone(),
    })
}

/// Turns records into experiment cases: up to `limit_per_object` sentences
/// of the requested mode per object, each paired with that object's scene.
pub fn trial_cases(
    records: &[ObjectRecord],
    mode: Mode,
    limit_per_object: usize,
    observed_points: usize,
    reference_points: usize,
) -> Result<Vec<TrialCase>> {
    let mut cases = Vec::new();
    for record in records {
        let mut scene: Option<TrialScene> = None;
        let mut taken = 0usize;
        for sentence in &record.sentences {
            if sentence.mode != mode || taken >= limit_per_object {
                continue;
            }
            let truth_part = sentence.truth.part.clone().ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "sentence {:?} lacks a truth part",
                    sentence.text
                ))
            })?;
            if scene.is_none() {
                scene = Some(trial_scene(record, observed_points, reference_points)?);
            }
            cases.push(TrialCase {
                object_id: record.manifest.object_id.clone(),
                category: record.manifest.category.clone(),
                scene: scene.clone().unwrap(),
                instruction: sentence.text.clone(),
                truth_part,
            });
            taken += 1;
        }
    }
    Ok(cases)
}

/// Builds grounder training examples: each selected sentence pairs with one
/// partial view (cycling through the 12), downsampled to
/// `points_per_cloud`, with the truth mask taken from the view's labels.
pub fn grounding_examples(
    records: &[ObjectRecord],
    modes: &[Mode],
    points_per_cloud: usize,
) -> Result<Vec<GroundingExample>> {
    let mut examples = Vec::new();
    for record in records {
        let mut cursor = 0usize;
        for sentence in &record.sentences {
            if !modes.contains(&sentence.mode) {
                continue;
            }
            let truth_part = sentence.truth.part.as_deref().ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "sentence {:?} lacks a truth part",
                    sentence.text
                ))
            })?;
            let label = record.part_label(truth_part).ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "truth part {truth_part:?} is not a part of {}",
                    record.manifest.object_id
                ))
            })?;
            let view = &record.observations.views[cursor % record.observations.views.len()];
            let idx = fps_indices(
                view,
                points_per_cloud,
                splitmix(record.manifest.seed ^ (0x6000 + cursor as u64)),
            )?;
            let cloud = view.select(&idx);
            let mask = cloud.labels.iter().map(|&l| l == label).collect();
            examples.push(GroundingExample { points: cloud.points, text: sentence.text.clone(), mask });
            cursor += 1;
        }
    }
    Ok(examples)
}

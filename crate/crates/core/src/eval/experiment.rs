//! Experiment runner: a grid of (sampling area × selection policy) cells
//! evaluated over a shared list of trial cases, reduced into grounding and
//! grasping metrics with per-category breakdowns.
//!
//! Grounding runs once per case and its region is reused by every grid
//! cell. Trial seeds derive from (experiment seed, case index, cell), so a
//! parallel run over any number of workers reproduces the single-threaded
//! report bit for bit; the reduce walks cases in their given order.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::metrics::{grounding_metrics, GroundingMetrics, GroundingSample};
use crate::eval::trial::{
    run_region_trial, transfer_mask, SamplingArea, TrialConfig, TrialOutcome, TrialScene,
    MASK_TRANSFER_CAP,
};
use crate::grasp::{HandConfig, RegionMask, SamplerRules, Scorer, SelectionPolicy};
use crate::grounding::{ground, Grounder};
use crate::language::Lexicon;

/// One evaluable unit: a scene plus the instruction asked of it and the
/// part the instruction is truly about.
#[derive(Clone, Debug)]
pub struct TrialCase {
    pub object_id: String,
    pub category: String,
    pub scene: TrialScene,
    pub instruction: String,
    pub truth_part: String,
}

/// Grid and budget for one experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub hand: HandConfig,
    pub rules: SamplerRules,
    pub areas: Vec<SamplingArea>,
    pub policies: Vec<SelectionPolicy>,
    pub seed: u64,
    /// Worker threads for the case loop; results are identical for any
    /// value ≥ 1.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            hand: HandConfig::default(),
            rules: SamplerRules::default(),
            areas: vec![SamplingArea::Grounded, SamplingArea::Global],
            policies: vec![SelectionPolicy::HighestScore, SelectionPolicy::Random],
            seed: 0,
            jobs: 1,
        }
    }
}

/// Success rates and effort for one grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspMetrics {
    /// Fraction of trials where the grasp landed on the truth part AND held.
    pub part_specific_sr: f64,
    /// Fraction of trials where the grasp held, regardless of part.
    pub part_agnostic_sr: f64,
    /// Part-specific SR gain of highest-score over random selection within
    /// the same sampling area (0 when the grid lacks either policy).
    pub relative_increase: f64,
    /// Mean sampler trials per trial that actually sampled (0 if none did).
    pub trial_cost: f64,
}

/// One grid cell of the grasping table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraspRow {
    pub area: SamplingArea,
    pub policy: SelectionPolicy,
    pub metrics: GraspMetrics,
    pub per_category: BTreeMap<String, GraspMetrics>,
}

/// Full experiment result; serializes to the report JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub split_hash: String,
    pub seeds: BTreeMap<String, u64>,
    pub grounding: GroundingMetrics,
    pub grounding_per_category: BTreeMap<String, GroundingMetrics>,
    pub grasping: Vec<GraspRow>,
}

/// Everything computed for one case before the reduce.
struct CaseResult {
    sample: GroundingSample,
    outcomes: Vec<TrialOutcome>, // indexed area-major: area_idx * policies + policy_idx
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic per-trial seed from the experiment seed and the trial's
/// coordinates in the (case, area, policy) grid.
fn trial_seed(base: u64, case: usize, area: usize, policy: usize) -> u64 {
    let mut s = splitmix(base ^ 0x7472_6961_6c00_0001);
    s = splitmix(s ^ case as u64);
    s = splitmix(s ^ ((area as u64) << 32 | policy as u64));
    s
}

fn evaluate_case(
    case: &TrialCase,
    case_idx: usize,
    grounder: &(dyn Grounder + Sync),
    scorer: &(dyn Scorer + Sync),
    lexicon: &Lexicon,
    cfg: &ExperimentConfig,
) -> Result<CaseResult> {
    let scene = &case.scene;
    let truth = scene.truth_mask_observed(&case.truth_part).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "case {} names truth part {:?} which the scene lacks",
            case.object_id, case.truth_part
        ))
    })?;

    // Ground once; grounding failures yield an empty prediction, which both
    // scores as a miss and starves the grounded sampling area.
    let pred = match ground(grounder, &scene.observed.points, &case.instruction, lexicon) {
        Ok(mask) => mask,
        Err(_) => RegionMask::new(vec![false; scene.observed.len()]),
    };
    let grounded_region = transfer_mask(
        &scene.observed.points,
        &pred,
        &scene.reference.points,
        MASK_TRANSFER_CAP,
    )?;

    let mut outcomes = Vec::with_capacity(cfg.areas.len() * cfg.policies.len());
    for (ai, &area) in cfg.areas.iter().enumerate() {
        let region = match area {
            SamplingArea::Grounded => grounded_region.clone(),
            SamplingArea::Global => RegionMask::full(scene.reference.len()),
        };
        for (pi, &policy) in cfg.policies.iter().enumerate() {
            let trial_cfg =
                TrialConfig { hand: cfg.hand, rules: cfg.rules, area, policy };
            let outcome = run_region_trial(
                scene,
                &region,
                &case.truth_part,
                &trial_cfg,
                scorer,
                trial_seed(cfg.seed, case_idx, ai, pi),
            )?;
            outcomes.push(outcome);
        }
    }

    Ok(CaseResult {
        sample: GroundingSample {
            pred,
            truth,
            part_class: case.truth_part.clone(),
            object_class: case.category.clone(),
        },
        outcomes,
    })
}

fn aggregate(outcomes: &[&TrialOutcome]) -> GraspMetrics {
    let n = outcomes.len() as f64;
    let specific =
        outcomes.iter().filter(|o| o.part_correct && o.exec_success).count() as f64;
    let agnostic = outcomes.iter().filter(|o| o.exec_success).count() as f64;
    let sampled: Vec<usize> =
        outcomes.iter().filter(|o| o.trials_used >= 1).map(|o| o.trials_used).collect();
    let trial_cost = if sampled.is_empty() {
        0.0
    } else {
        sampled.iter().sum::<usize>() as f64 / sampled.len() as f64
    };
    GraspMetrics {
        part_specific_sr: specific / n,
        part_agnostic_sr: agnostic / n,
        relative_increase: 0.0, // filled once all cells exist
        trial_cost,
    }
}

/// Evaluates the full grid over the cases and reduces deterministically.
pub fn run_experiment(
    cases: &[TrialCase],
    grounder: &(dyn Grounder + Sync),
    scorer: &(dyn Scorer + Sync),
    lexicon: &Lexicon,
    split_hash: &str,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    if cases.is_empty() {
        return Err(Error::EmptyResults);
    }
    if cfg.areas.is_empty() || cfg.policies.is_empty() {
        return Err(Error::InvalidConfig("experiment grid must not be empty".into()));
    }
    if cfg.jobs == 0 {
        return Err(Error::InvalidConfig("jobs must be at least 1".into()));
    }

    // Case loop, optionally threaded; slot i only ever holds case i's
    // result, so the reduce order is independent of scheduling.
    let slots: Vec<Mutex<Option<Result<CaseResult>>>> =
        (0..cases.len()).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = cfg.jobs.min(cases.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cases.len() {
                    break;
                }
                let result = evaluate_case(&cases[i], i, grounder, scorer, lexicon, cfg);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });

    let mut results = Vec::with_capacity(cases.len());
    for slot in slots {
        results.push(slot.into_inner().unwrap().expect("worker covered every slot")?);
    }

    // Grounding reduce.
    let samples: Vec<GroundingSample> = results.iter().map(|r| r.sample.clone()).collect();
    let grounding = grounding_metrics(&samples)?;
    let mut by_category: BTreeMap<&str, Vec<GroundingSample>> = BTreeMap::new();
    for (case, result) in cases.iter().zip(&results) {
        by_category.entry(&case.category).or_default().push(result.sample.clone());
    }
    let mut grounding_per_category = BTreeMap::new();
    for (category, samples) in &by_category {
        grounding_per_category.insert(category.to_string(), grounding_metrics(samples)?);
    }

    // Grasping reduce, one row per grid cell.
    let n_policies = cfg.policies.len();
    let mut grasping = Vec::new();
    for (ai, &area) in cfg.areas.iter().enumerate() {
        for (pi, &policy) in cfg.policies.iter().enumerate() {
            let cell = ai * n_policies + pi;
            let all: Vec<&TrialOutcome> = results.iter().map(|r| &r.outcomes[cell]).collect();
            let metrics = aggregate(&all);
            let mut per_category = BTreeMap::new();
            for category in by_category.keys() {
                let subset: Vec<&TrialOutcome> = cases
                    .iter()
                    .zip(&results)
                    .filter(|(c, _)| c.category == *category)
                    .map(|(_, r)| &r.outcomes[cell])
                    .collect();
                per_category.insert(category.to_string(), aggregate(&subset));
            }
            grasping.push(GraspRow { area, policy, metrics, per_category });
        }
    }

    // Relative increase: highest-score SR minus random SR within each area,
    // stamped onto every row (and per-category cell) of that area.
    let find_sr = |rows: &[GraspRow], area: SamplingArea, policy: SelectionPolicy| {
        rows.iter()
            .find(|r| r.area == area && r.policy == policy)
            .map(|r| r.metrics.part_specific_sr)
    };
    for &area in &cfg.areas {
        let (Some(high), Some(rand)) = (
            find_sr(&grasping, area, SelectionPolicy::HighestScore),
            find_sr(&grasping, area, SelectionPolicy::Random),
        ) else {
            continue;
        };
        let increase = high - rand;
        for row in grasping.iter_mut().filter(|r| r.area == area) {
            row.metrics.relative_increase = increase;
        }
        // Per-category increases use that category's own SR pair.
        let categories: Vec<String> = by_category.keys().map(|c| c.to_string()).collect();
        for category in categories {
            let pair: Option<(f64, f64)> = {
                let get = |policy| {
                    grasping
                        .iter()
                        .find(|r| r.area == area && r.policy == policy)
                        .and_then(|r| r.per_category.get(&category))
                        .map(|m| m.part_specific_sr)
                };
                get(SelectionPolicy::HighestScore).zip(get(SelectionPolicy::Random))
            };
            if let Some((h, r)) = pair {
                for row in grasping.iter_mut().filter(|r| r.area == area) {
                    if let Some(m) = row.per_category.get_mut(&category) {
                        m.relative_increase = h - r;
                    }
                }
            }
        }
    }

    let mut seeds = BTreeMap::new();
    seeds.insert("experiment".to_string(), cfg.seed);

    Ok(ExperimentReport {
        config: cfg.clone(),
        split_hash: split_hash.to_string(),
        seeds,
        grounding,
        grounding_per_category,
        grasping,
    })
}

impl ExperimentReport {
    /// Pretty JSON; stable field order (maps are sorted) so identical runs
    /// serialize identically.
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Two aligned plain-text tables: grounding metrics by object category,
    /// then the grasping grid.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<14} {:>9} {:>13} {:>15} {:>17}\n",
            "category", "accuracy", "part-avg-iou", "object-avg-iou", "instance-avg-iou"
        ));
        let gline = |name: &str, m: &GroundingMetrics| {
            format!(
                "{:<14} {:>9.3} {:>13.3} {:>15.3} {:>17.3}\n",
                name, m.accuracy, m.part_avg_iou, m.object_avg_iou, m.instance_avg_iou
            )
        };
        for (category, m) in &self.grounding_per_category {
            out.push_str(&gline(category, m));
        }
        out.push_str(&gline("ALL", &self.grounding));
        out.push('\n');

        out.push_str(&format!(
            "{:<10} {:<14} {:>16} {:>16} {:>13} {:>11}\n",
            "area", "policy", "part-specific", "part-agnostic", "rel-increase", "trial-cost"
        ));
        for row in &self.grasping {
            out.push_str(&format!(
                "{:<10} {:<14} {:>16.3} {:>16.3} {:>13.3} {:>11.3}\n",
                format!("{:?}", row.area).to_lowercase(),
                match row.policy {
                    SelectionPolicy::HighestScore => "highest-score",
                    SelectionPolicy::Random => "random",
                },
                row.metrics.part_specific_sr,
                row.metrics.part_agnostic_sr,
                row.metrics.relative_increase,
                row.metrics.trial_cost,
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::trial::tests::mug_scene;
    use crate::grasp::AnalyticScorer;
    use crate::grounding::RuleGrounder;
    use crate::shape::{make_shape, sample_omni};

    fn cases() -> Vec<TrialCase> {
        let mut cases = Vec::new();
        for (k, seed) in [70u64, 71, 72].into_iter().enumerate() {
            let scene = mug_scene(seed);
            for (j, (text, part)) in [
                ("grab the handle of the mug so i can drink", "handle"),
                ("the body of the cup", "body"),
            ]
            .into_iter()
            .enumerate()
            {
                cases.push(TrialCase {
                    object_id: format!("mug_{k}{j}"),
                    category: "mug".into(),
                    scene: scene.clone(),
                    instruction: text.into(),
                    truth_part: part.into(),
                });
            }
        }
        cases
    }

    fn grounder() -> RuleGrounder {
        let mesh = make_shape("mug", &[], 70).unwrap();
        let omni = sample_omni(&mesh, 10_000, 700).unwrap();
        let idx = crate::geom::fps_indices(&omni, 1024, 701).unwrap();
        RuleGrounder::new("mug", omni.select(&idx), &mesh.part_names).unwrap()
    }

    #[test]
    fn reports_are_deterministic_and_job_count_invariant() {
        let cases = cases();
        let grounder = grounder();
        let lexicon = crate::language::Lexicon::bundled();
        let mut cfg = ExperimentConfig { seed: 5, ..ExperimentConfig::default() };

        let one = run_experiment(&cases, &grounder, &AnalyticScorer, lexicon, "h1", &cfg)
            .unwrap();
        cfg.jobs = 4;
        let four = run_experiment(&cases, &grounder, &AnalyticScorer, lexicon, "h1", &cfg)
            .unwrap();
        // jobs is part of the config echo; compare everything else.
        assert_eq!(one.grounding, four.grounding);
        assert_eq!(
            serde_json::to_string(&one.grasping).unwrap(),
            serde_json::to_string(&four.grasping).unwrap()
        );

        let again = run_experiment(&cases, &grounder, &AnalyticScorer, lexicon, "h1", &cfg)
            .unwrap();
        assert_eq!(four.to_json_string().unwrap(), again.to_json_string().unwrap());

        for row in &one.grasping {
            let m = row.metrics;
            assert!(m.part_specific_sr <= m.part_agnostic_sr + 1e-12);
            assert!((0.0..=1.0).contains(&m.part_specific_sr));
            assert!((0.0..=1.0).contains(&m.part_agnostic_sr));
            if m.trial_cost > 0.0 {
                assert!(m.trial_cost >= 1.0 && m.trial_cost <= 150.0);
            }
        }
        // The relative increase is the difference of the two policy rows.
        for &area in &one.config.areas {
            let sr = |policy| {
                one.grasping
                    .iter()
                    .find(|r| r.area == area && r.policy == policy)
                    .unwrap()
                    .metrics
                    .part_specific_sr
            };
            let want = sr(SelectionPolicy::HighestScore) - sr(SelectionPolicy::Random);
            for row in one.grasping.iter().filter(|r| r.area == area) {
                assert!((row.metrics.relative_increase - want).abs() < 1e-12);
            }
        }

        let table = one.to_table();
        assert!(table.contains("grounded"));
        assert!(table.contains("highest-score"));
        assert!(table.lines().count() >= 4 + one.grasping.len());
    }

    #[test]
    fn empty_inputs_are_rejected() {
        let lexicon = crate::language::Lexicon::bundled();
        let cfg = ExperimentConfig::default();
        assert!(matches!(
            run_experiment(&[], &grounder(), &AnalyticScorer, lexicon, "h", &cfg),
            Err(Error::EmptyResults)
        ));
        let bad = ExperimentConfig { areas: vec![], ..ExperimentConfig::default() };
        assert!(matches!(
            run_experiment(&cases()[..1], &grounder(), &AnalyticScorer, lexicon, "h", &bad),
            Err(Error::InvalidConfig(_))
        ));
    }
}

//! Trainable grounding back-end and the shared grounding interface.
//!
//! Training fuses the frozen language feature with each per-point feature
//! row (the language vector is repeated across the cloud), pushes the
//! concatenation through the perceptron, and optimizes binary cross-entropy
//! with adaptive-moment gradient descent. Runs are single-threaded with a
//! fixed accumulation order, so a seed pins the resulting weights bit for
//! bit.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point3;
use crate::grasp::RegionMask;
use crate::grounding::features::{
    featurize_language_with, featurize_points, D_LANG, D_POINT, PROJECTION_SEED,
};
use crate::grounding::mlp::{Adam, Mlp};
use crate::language::Lexicon;

/// Model-file format version.
pub const MODEL_VERSION: &str = "1.0.0";

/// One supervised grounding sample: an unlabeled view, the instruction text,
/// and the per-point truth mask.
#[derive(Clone, Debug)]
pub struct GroundingExample {
    pub points: Vec<Point3>,
    pub text: String,
    pub mask: Vec<bool>,
}

/// Training hyperparameters.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Hyper {
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
}

impl Default for Hyper {
    fn default() -> Hyper {
        Hyper {
            epochs: 160,
            batch: 128,
            learning_rate: 1e-3,
        }
    }
}

/// Provenance recorded inside a trained model file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainingManifest {
    pub hyper: Hyper,
    pub seed: u64,
    /// Content hash of the training data (points, text, masks).
    pub data_hash: String,
    pub examples: usize,
    pub rows: usize,
}

/// Learned grounder: projection seed, fusion perceptron, and provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainedGrounder {
    pub version: String,
    pub projection_seed: u64,
    pub mlp: Mlp,
    pub loss_curve: Vec<f64>,
    pub manifest: TrainingManifest,
}

/// Anything that turns (points, instruction text) into per-point
/// probabilities. Implementations never see ground-truth labels.
pub trait Grounder {
    fn probabilities(&self, points: &[Point3], text: &str, lexicon: &Lexicon)
        -> Result<Vec<f64>>;
}

/// Thresholds a grounder's probabilities at 0.5; exactly 0.5 counts as
/// positive.
pub fn ground<G: Grounder + ?Sized>(
    grounder: &G,
    points: &[Point3],
    text: &str,
    lexicon: &Lexicon,
) -> Result<RegionMask> {
    let probabilities = grounder.probabilities(points, text, lexicon)?;
    Ok(RegionMask::new(
        probabilities.iter().map(|&p| p >= 0.5).collect(),
    ))
}

impl Grounder for TrainedGrounder {
    fn probabilities(
        &self,
        points: &[Point3],
        text: &str,
        lexicon: &Lexicon,
    ) -> Result<Vec<f64>> {
        let point_features = featurize_points(points)?;
        let language = featurize_language_with(text, lexicon, self.projection_seed);
        let mut row = vec![0.0f64; D_LANG + D_POINT];
        row[..D_LANG].copy_from_slice(&language);
        Ok(point_features
            .iter()
            .map(|f| {
                row[D_LANG..].copy_from_slice(f);
                self.mlp.probability(&row)
            })
            .collect())
    }
}

impl Grounder for crate::grounding::rule::RuleGrounder {
    fn probabilities(
        &self,
        points: &[Point3],
        text: &str,
        lexicon: &Lexicon,
    ) -> Result<Vec<f64>> {
        let mask = crate::grounding::rule::rule_ground(self, points, text, lexicon)?;
        Ok(mask
            .as_slice()
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect())
    }
}

impl TrainedGrounder {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<TrainedGrounder> {
        let json = std::fs::read_to_string(path)?;
        let model: TrainedGrounder = serde_json::from_str(&json)?;
        if model.version != MODEL_VERSION {
            return Err(Error::MissingModel(format!(
                "model version {} unsupported (expected {MODEL_VERSION})",
                model.version
            )));
        }
        Ok(model)
    }
}

/// Trains the fusion perceptron on per-point rows built from every example.
pub fn train_grounder(
    dataset: &[GroundingExample],
    hyper: &Hyper,
    seed: u64,
    lexicon: &Lexicon,
) -> Result<TrainedGrounder> {
    if dataset.is_empty() {
        return Err(Error::ShapeMismatch("empty training set".into()));
    }
    if hyper.epochs == 0 || hyper.batch == 0 {
        return Err(Error::InvalidConfig(
            "epochs and batch size must be positive".into(),
        ));
    }
    let input_dim = D_LANG + D_POINT;
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for (i, example) in dataset.iter().enumerate() {
        if example.points.len() != example.mask.len() {
            return Err(Error::ShapeMismatch(format!(
                "example {i}: {} points but {} mask bits",
                example.points.len(),
                example.mask.len()
            )));
        }
        let features = featurize_points(&example.points)?;
        let language = featurize_language_with(&example.text, lexicon, PROJECTION_SEED);
        for (f, &m) in features.iter().zip(&example.mask) {
            xs.extend_from_slice(&language);
            xs.extend_from_slice(f);
            ys.push(if m { 1.0 } else { 0.0 });
        }
    }
    let rows = ys.len();

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut mlp = Mlp::new(input_dim, seed ^ 0x6d6c_7031);
    let mut adam = Adam::new(mlp.params.len(), hyper.learning_rate);
    let mut order: Vec<usize> = (0..rows).collect();
    let mut grad = vec![0.0f64; mlp.params.len()];
    let mut loss_curve = Vec::with_capacity(hyper.epochs);

    for _ in 0..hyper.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0f64;
        for batch in order.chunks(hyper.batch) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut batch_loss = 0.0f64;
            for &row in batch {
                let x = &xs[row * input_dim..(row + 1) * input_dim];
                batch_loss += mlp.accumulate_gradient(x, ys[row], &mut grad);
            }
            let inv = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g *= inv);
            adam.step(&mut mlp.params, &grad);
            epoch_loss += batch_loss;
        }
        loss_curve.push(epoch_loss / rows as f64);
    }

    Ok(TrainedGrounder {
        version: MODEL_VERSION.to_string(),
        projection_seed: PROJECTION_SEED,
        mlp,
        loss_curve,
        manifest: TrainingManifest {
            hyper: *hyper,
            seed,
            data_hash: hash_dataset(dataset),
            examples: dataset.len(),
            rows,
        },
    })
}

/// Order-sensitive content hash of the training data (splitmix-style mix of
/// point bits, text bytes, and mask bits), hex-encoded.
pub fn hash_dataset(dataset: &[GroundingExample]) -> String {
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    let mut absorb = |value: u64| {
        state ^= value;
        state = state.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        state ^= state >> 27;
        state = state.wrapping_mul(0x94D0_49BB_1331_11EB);
        state ^= state >> 31;
    };
    for example in dataset {
        for p in &example.points {
            absorb(p.x.to_bits());
            absorb(p.y.to_bits());
            absorb(p.z.to_bits());
        }
        for byte in example.text.as_bytes() {
            absorb(*byte as u64);
        }
        for &bit in &example.mask {
            absorb(bit as u64);
        }
        absorb(example.points.len() as u64);
    }
    format!("{state:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::Lexicon;

    /// Two well-separated slabs; the mask selects the upper one.
    fn blob_example(n_per: usize) -> GroundingExample {
        let mut points = Vec::new();
        let mut mask = Vec::new();
        let side = (n_per as f64).sqrt().ceil() as usize;
        for level in 0..2 {
            let z = level as f64 * 0.06;
            for i in 0..n_per {
                let gx = (i % side) as f64 * 0.003;
                let gy = (i / side) as f64 * 0.003;
                points.push(Point3::new(gx, gy, z + 0.0001 * (i % 3) as f64));
                mask.push(level == 1);
            }
        }
        GroundingExample {
            points,
            text: "grab the handle of the mug so i can drink".to_string(),
            mask,
        }
    }

    #[test]
    fn one_sample_memorization_reaches_low_loss() {
        let lex = Lexicon::bundled();
        let dataset = vec![blob_example(256)];
        let hyper = Hyper {
            epochs: 200,
            ..Hyper::default()
        };
        let model = train_grounder(&dataset, &hyper, 11, lex).unwrap();
        let final_loss = *model.loss_curve.last().unwrap();
        assert!(final_loss < 0.05, "final loss {final_loss}");
        assert!(final_loss < model.loss_curve[0]);

        // The memorized mask should be recovered nearly perfectly.
        let mask = ground(&model, &dataset[0].points, &dataset[0].text, lex).unwrap();
        let agree = mask
            .as_slice()
            .iter()
            .zip(&dataset[0].mask)
            .filter(|(a, b)| a == b)
            .count();
        assert!(agree as f64 / dataset[0].mask.len() as f64 > 0.98);
    }

    #[test]
    fn training_is_bit_deterministic() {
        let lex = Lexicon::bundled();
        let dataset = vec![blob_example(64)];
        let hyper = Hyper {
            epochs: 12,
            ..Hyper::default()
        };
        let a = train_grounder(&dataset, &hyper, 5, lex).unwrap();
        let b = train_grounder(&dataset, &hyper, 5, lex).unwrap();
        assert_eq!(a.mlp.params, b.mlp.params);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let c = train_grounder(&dataset, &hyper, 6, lex).unwrap();
        assert_ne!(a.mlp.params, c.mlp.params);
    }

    #[test]
    fn misaligned_masks_and_empty_sets_are_rejected() {
        let lex = Lexicon::bundled();
        assert!(matches!(
            train_grounder(&[], &Hyper::default(), 1, lex),
            Err(Error::ShapeMismatch(_))
        ));
        let mut example = blob_example(32);
        example.mask.pop();
        assert!(matches!(
            train_grounder(&[example], &Hyper::default(), 1, lex),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn boundary_probability_counts_as_positive() {
        // Zero weights give probability exactly 0.5 everywhere; the mask must
        // be all-positive under the documented boundary convention.
        let lex = Lexicon::bundled();
        let dataset = vec![blob_example(32)];
        let hyper = Hyper {
            epochs: 1,
            ..Hyper::default()
        };
        let mut model = train_grounder(&dataset, &hyper, 2, lex).unwrap();
        model.mlp.params.iter_mut().for_each(|p| *p = 0.0);
        let mask = ground(&model, &dataset[0].points, &dataset[0].text, lex).unwrap();
        assert_eq!(mask.count(), mask.len());
    }

    #[test]
    fn model_files_round_trip(){
        let lex = Lexicon::bundled();
        let dataset = vec![blob_example(48)];
        let hyper = Hyper {
            epochs: 4,
            ..Hyper::default()
        };
        let model = train_grounder(&dataset, &hyper, 3, lex).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grounder.json");
        model.save(&path).unwrap();
        let loaded = TrainedGrounder::load(&path).unwrap();
        assert_eq!(model.mlp.params, loaded.mlp.params);
        assert_eq!(model.manifest.data_hash, loaded.manifest.data_hash);
        // Version gate.
        let mut broken: TrainedGrounder = loaded.clone();
        broken.version = "0.0.1".into();
        broken.save(&path).unwrap();
        assert!(matches!(
            TrainedGrounder::load(&path),
            Err(Error::MissingModel(_))
        ));
    }
}

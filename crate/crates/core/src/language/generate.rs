//! Instruction synthesis with controlled information withholding.
//!
//! Every instruction is generated from a ground-truth (object, part,
//! affordance) triple, a sentence template, and a mode that decides which of
//! the three slots the text is allowed to reveal. A withheld slot is replaced
//! by a generic filler noun, never by any surface synonym of the withheld id,
//! so downstream consumers can rely on the text containing exactly the slots
//! the mode promises.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::language::lexicon::{Lexicon, SlotKind};
use crate::language::template::{
    TemplateBank, AFFORDANCE_SLOT, OBJECT_SLOT, PART_SLOT,
};

/// How much of the (object, part, affordance) triple the text reveals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Uniform mixture: each instruction realizes one of the six concrete
    /// modes below, recorded in [`Instruction::mode`].
    FullData,
    /// Object, part, and affordance all named.
    KnownAll,
    /// Part and affordance named; the object is blanked with a filler.
    PartKnownObjectUnknown,
    /// Object and affordance named; the part is blanked with a filler.
    PartUnknownObjectKnown,
    /// Only the affordance is named.
    PartUnknownObjectUnknown,
    /// Bare fragment `<part synonym> of <object synonym>`, no affordance.
    PartObjectFragment,
    /// Only the object is named; the ground-truth part becomes the object's
    /// preferred part, since the speaker left the choice to the robot.
    OneBestPart,
}

impl Mode {
    /// The six modes an instruction can actually realize.
    pub const CONCRETE: [Mode; 6] = [
        Mode::KnownAll,
        Mode::PartKnownObjectUnknown,
        Mode::PartUnknownObjectKnown,
        Mode::PartUnknownObjectUnknown,
        Mode::PartObjectFragment,
        Mode::OneBestPart,
    ];

    /// Every mode, including the mixture.
    pub const ALL: [Mode; 7] = [
        Mode::FullData,
        Mode::KnownAll,
        Mode::PartKnownObjectUnknown,
        Mode::PartUnknownObjectKnown,
        Mode::PartUnknownObjectUnknown,
        Mode::PartObjectFragment,
        Mode::OneBestPart,
    ];

    /// Which slots appear in the text: (object, part, affordance).
    pub fn slots_in_text(self) -> (bool, bool, bool) {
        match self {
            Mode::FullData => (true, true, true), // realized before use
            Mode::KnownAll => (true, true, true),
            Mode::PartKnownObjectUnknown => (false, true, true),
            Mode::PartUnknownObjectKnown => (true, false, true),
            Mode::PartUnknownObjectUnknown => (false, false, true),
            Mode::PartObjectFragment => (true, true, false),
            Mode::OneBestPart => (true, false, false),
        }
    }
}

/// Canonical ids recovered from, or recorded for, one instruction.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slots {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub object: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub part: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub affordance: Option<String>,
}

impl Slots {
    pub fn new(
        object: Option<&str>,
        part: Option<&str>,
        affordance: Option<&str>,
    ) -> Slots {
        Slots {
            object: object.map(str::to_string),
            part: part.map(str::to_string),
            affordance: affordance.map(str::to_string),
        }
    }
}

/// One generated sentence plus its provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Instruction {
    pub text: String,
    /// The realized concrete mode (never [`Mode::FullData`]).
    pub mode: Mode,
    /// Ground truth for all three slots, regardless of what the text reveals.
    pub truth: Slots,
    /// Bank id of the template used; 0 marks the fixed fragment form.
    pub template_id: u32,
    /// Seed of the batch this instruction came from.
    pub seed: u64,
}

/// Fragment instructions use this marker instead of a bank template id.
pub const FRAGMENT_TEMPLATE_ID: u32 = 0;

/// Generates one instruction per requested mode using the embedded lexicon
/// and template bank.
pub fn generate_sentences(
    object_id: &str,
    part_id: &str,
    affordance_id: &str,
    modes: &[Mode],
    seed: u64,
) -> Result<Vec<Instruction>> {
    generate_sentences_with(
        Lexicon::bundled(),
        TemplateBank::bundled(),
        object_id,
        part_id,
        affordance_id,
        modes,
        seed,
    )
}

/// [`generate_sentences`] against an explicit vocabulary and template bank.
pub fn generate_sentences_with(
    lexicon: &Lexicon,
    bank: &TemplateBank,
    object_id: &str,
    part_id: &str,
    affordance_id: &str,
    modes: &[Mode],
    seed: u64,
) -> Result<Vec<Instruction>> {
    if !lexicon.is_object(object_id) {
        return Err(Error::UnknownId(object_id.to_string()));
    }
    if !lexicon.is_part(part_id) {
        return Err(Error::UnknownId(part_id.to_string()));
    }
    if !lexicon.is_affordance(affordance_id) {
        return Err(Error::UnknownId(affordance_id.to_string()));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(modes.len());
    for &requested in modes {
        let mode = match requested {
            Mode::FullData => Mode::CONCRETE[rng.gen_range(0..Mode::CONCRETE.len())],
            concrete => concrete,
        };
        // The spoken part: when the speaker names no part at all, the ground
        // truth falls back to the object's preferred part.
        let truth_part = match mode {
            Mode::OneBestPart => lexicon
                .one_best_part(object_id)
                .expect("validated lexicon has a preferred part per object"),
            _ => part_id,
        };

        let (text, template_id) = if mode == Mode::PartObjectFragment {
            let part_surface = pick(&mut rng, lexicon.synonyms(truth_part)?);
            let object_surface = pick(&mut rng, lexicon.synonyms(object_id)?);
            (
                format!("{part_surface} of {object_surface}"),
                FRAGMENT_TEMPLATE_ID,
            )
        } else {
            let template = &bank.templates()[rng.gen_range(0..bank.templates().len())];
            let (show_object, show_part, show_affordance) = mode.slots_in_text();
            let object_surface = if show_object {
                pick(&mut rng, lexicon.synonyms(object_id)?)
            } else {
                pick(&mut rng, lexicon.fillers(SlotKind::Object))
            };
            let part_surface = if show_part {
                pick(&mut rng, lexicon.synonyms(truth_part)?)
            } else {
                pick(&mut rng, lexicon.fillers(SlotKind::Part))
            };
            let affordance_surface = if show_affordance {
                pick(&mut rng, lexicon.synonyms(affordance_id)?)
            } else {
                pick(&mut rng, lexicon.fillers(SlotKind::Affordance))
            };
            let text = template
                .text
                .replace(OBJECT_SLOT, object_surface)
                .replace(PART_SLOT, part_surface)
                .replace(AFFORDANCE_SLOT, affordance_surface);
            (text, template.id)
        };

        out.push(Instruction {
            text,
            mode,
            truth: Slots::new(Some(object_id), Some(truth_part), Some(affordance_id)),
            template_id,
            seed,
        });
    }
    Ok(out)
}

fn pick<'a>(rng: &mut ChaCha12Rng, items: &'a [String]) -> &'a str {
    items[rng.gen_range(0..items.len())].as_str()
}

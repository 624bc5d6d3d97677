//! Recovering canonical ids from instruction text and resolving the target
//! part from whatever slots the instruction revealed.

use crate::error::{Error, Result};
use crate::language::generate::Slots;
use crate::language::lexicon::{Lexicon, SlotKind};

/// Extracts canonical (object, part, affordance) ids from free text.
///
/// Matching is case-folded, punctuation-stripped, and longest-match over
/// whole-token runs, so `desk light` parses as a lamp rather than a table and
/// `handbag` never matches `bag`'s bare synonym. The first mention wins when
/// a slot is named more than once.
pub fn parse_instruction(text: &str, lexicon: &Lexicon) -> Slots {
    let mut slots = Slots::default();
    for (kind, id) in lexicon.scan(text) {
        let slot = match kind {
            SlotKind::Object => &mut slots.object,
            SlotKind::Part => &mut slots.part,
            SlotKind::Affordance => &mut slots.affordance,
        };
        if slot.is_none() {
            *slot = Some(id.to_string());
        }
    }
    slots
}

/// Decides which part an instruction asks for.
///
/// Preference order: an explicitly named part; the part taught for the
/// (object, affordance) pair; the top-ranked part for the affordance alone;
/// the object's single preferred part. `object_hint` stands in for the object
/// slot when the text did not name one (e.g. the scene is already known).
pub fn resolve_part(
    slots: &Slots,
    object_hint: Option<&str>,
    lexicon: &Lexicon,
) -> Result<String> {
    if let Some(part) = slots.part.as_deref() {
        if !lexicon.is_part(part) {
            return Err(Error::UnknownId(part.to_string()));
        }
        return Ok(part.to_string());
    }
    let object = slots.object.as_deref().or(object_hint);
    if let Some(id) = object {
        if !lexicon.is_object(id) {
            return Err(Error::UnknownId(id.to_string()));
        }
    }
    if let Some(id) = slots.affordance.as_deref() {
        if !lexicon.is_affordance(id) {
            return Err(Error::UnknownId(id.to_string()));
        }
    }
    if let (Some(object), Some(affordance)) = (object, slots.affordance.as_deref()) {
        if let Some(part) = lexicon.map_part(object, affordance) {
            return Ok(part.to_string());
        }
    }
    if let Some(affordance) = slots.affordance.as_deref() {
        if let Some(ranked) = lexicon.ranked_parts(affordance) {
            if let Some(part) = ranked.first() {
                return Ok(part.clone());
            }
        }
    }
    if let Some(object) = object {
        if let Some(part) = lexicon.one_best_part(object) {
            return Ok(part.to_string());
        }
    }
    Err(Error::Unresolvable)
}

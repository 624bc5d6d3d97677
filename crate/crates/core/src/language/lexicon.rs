//! Vocabulary shared by instruction generation and parsing.
//!
//! The lexicon maps canonical object, part, and affordance ids to surface
//! synonyms, and carries the task-knowledge tables used to decide which part
//! an instruction is asking for: a per-(object, affordance) part table, a
//! ranked part list per affordance, and a single preferred part per object.
//! It ships as versioned JSON embedded in the library so that generation and
//! parsing can never disagree about the vocabulary.
//!
//! Matching is token-based: surface terms are compared as sequences of
//! lowercase alphanumeric words, so `handbag` does not contain the term
//! `bag` and `lampshade` does not contain `lamp`. Filler nouns used to blank
//! out withheld slots are validated at load time to contain no surface term
//! of any id, which makes slot leakage structurally impossible.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Embedded vocabulary data (versioned JSON).
pub const LEXICON_JSON: &str = include_str!("../../data/lexicon.json");

/// Namespace a canonical id belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotKind {
    Object,
    Part,
    Affordance,
}

/// Splits text into lowercase alphanumeric tokens; everything else separates.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        let c = ch.to_ascii_lowercase();
        if c.is_ascii_alphanumeric() {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// True when `needle` occurs as a run of consecutive tokens in `haystack`.
pub(crate) fn contains_tokens(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

#[derive(Clone, Debug)]
struct Entry {
    id: String,
    synonyms: Vec<String>,
}

/// One surface form: the tokenized synonym plus the id it names.
#[derive(Clone, Debug)]
pub(crate) struct Term {
    pub tokens: Vec<String>,
    pub kind: SlotKind,
    pub id: String,
}

#[derive(Deserialize)]
struct RawEntry {
    id: String,
    synonyms: Vec<String>,
}

#[derive(Deserialize)]
struct RawMapRow {
    object: String,
    affordance: String,
    part: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLexicon {
    version: String,
    objects: Vec<RawEntry>,
    parts: Vec<RawEntry>,
    affordances: Vec<RawEntry>,
    affordance_map: Vec<RawMapRow>,
    affordance_ranking: BTreeMap<String, Vec<String>>,
    one_best_part: BTreeMap<String, String>,
    object_fillers: Vec<String>,
    part_fillers: Vec<String>,
    affordance_fillers: Vec<String>,
}

/// Validated vocabulary with task-knowledge tables.
#[derive(Clone, Debug)]
pub struct Lexicon {
    version: String,
    objects: Vec<Entry>,
    parts: Vec<Entry>,
    affordances: Vec<Entry>,
    terms: Vec<Term>,
    affordance_map: BTreeMap<(String, String), String>,
    affordance_ranking: BTreeMap<String, Vec<String>>,
    one_best_part: BTreeMap<String, String>,
    object_fillers: Vec<String>,
    part_fillers: Vec<String>,
    affordance_fillers: Vec<String>,
}

impl Lexicon {
    /// The library's embedded vocabulary.
    pub fn bundled() -> &'static Lexicon {
        static CACHE: OnceLock<Lexicon> = OnceLock::new();
        CACHE.get_or_init(|| {
            Lexicon::from_json(LEXICON_JSON).expect("embedded lexicon data is valid")
        })
    }

    /// Parses and validates a lexicon from its JSON serialization.
    pub fn from_json(json: &str) -> Result<Lexicon> {
        let raw: RawLexicon = serde_json::from_str(json)?;
        let objects = convert_entries(raw.objects)?;
        let parts = convert_entries(raw.parts)?;
        let affordances = convert_entries(raw.affordances)?;

        let mut ids = BTreeSet::new();
        for entry in objects.iter().chain(&parts).chain(&affordances) {
            if !ids.insert(entry.id.clone()) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate lexicon id `{}`",
                    entry.id
                )));
            }
        }

        let mut terms = Vec::new();
        let mut surfaces = BTreeSet::new();
        for (list, kind) in [
            (&objects, SlotKind::Object),
            (&parts, SlotKind::Part),
            (&affordances, SlotKind::Affordance),
        ] {
            for entry in list.iter() {
                for synonym in &entry.synonyms {
                    let tokens = tokenize(synonym);
                    if tokens.is_empty() {
                        return Err(Error::InvalidConfig(format!(
                            "synonym `{synonym}` of `{}` has no tokens",
                            entry.id
                        )));
                    }
                    if !surfaces.insert(tokens.clone()) {
                        return Err(Error::InvalidConfig(format!(
                            "surface term `{synonym}` maps to more than one id"
                        )));
                    }
                    terms.push(Term {
                        tokens,
                        kind,
                        id: entry.id.clone(),
                    });
                }
            }
        }

        let lexicon = Lexicon {
            version: raw.version,
            objects,
            parts,
            affordances,
            terms,
            affordance_map: raw
                .affordance_map
                .into_iter()
                .map(|row| ((row.object, row.affordance), row.part))
                .collect(),
            affordance_ranking: raw.affordance_ranking,
            one_best_part: raw.one_best_part,
            object_fillers: raw.object_fillers,
            part_fillers: raw.part_fillers,
            affordance_fillers: raw.affordance_fillers,
        };
        lexicon.validate()?;
        Ok(lexicon)
    }

    fn validate(&self) -> Result<()> {
        if self.objects.is_empty() || self.parts.is_empty() || self.affordances.is_empty() {
            return Err(Error::InvalidConfig(
                "lexicon needs objects, parts, and affordances".into(),
            ));
        }
        for ((object, affordance), part) in &self.affordance_map {
            if !self.is_object(object) || !self.is_affordance(affordance) || !self.is_part(part) {
                return Err(Error::InvalidConfig(format!(
                    "affordance map row ({object}, {affordance}) -> {part} references unknown ids"
                )));
            }
        }
        for entry in &self.affordances {
            let ranked = self.affordance_ranking.get(&entry.id).ok_or_else(|| {
                Error::InvalidConfig(format!("affordance `{}` has no part ranking", entry.id))
            })?;
            if ranked.is_empty() || ranked.iter().any(|p| !self.is_part(p)) {
                return Err(Error::InvalidConfig(format!(
                    "ranking for `{}` is empty or names unknown parts",
                    entry.id
                )));
            }
        }
        for key in self.affordance_ranking.keys() {
            if !self.is_affordance(key) {
                return Err(Error::InvalidConfig(format!(
                    "ranking entry `{key}` is not an affordance"
                )));
            }
        }
        for entry in &self.objects {
            match self.one_best_part.get(&entry.id) {
                Some(part) if self.is_part(part) => {}
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "object `{}` lacks a valid preferred part",
                        entry.id
                    )))
                }
            }
        }
        for key in self.one_best_part.keys() {
            if !self.is_object(key) {
                return Err(Error::InvalidConfig(format!(
                    "preferred-part entry `{key}` is not an object"
                )));
            }
        }
        for (fillers, what) in [
            (&self.object_fillers, "object"),
            (&self.part_fillers, "part"),
            (&self.affordance_fillers, "affordance"),
        ] {
            if fillers.is_empty() {
                return Err(Error::InvalidConfig(format!("no {what} fillers")));
            }
            for filler in fillers.iter() {
                let tokens = tokenize(filler);
                if tokens.is_empty() {
                    return Err(Error::InvalidConfig(format!(
                        "{what} filler `{filler}` has no tokens"
                    )));
                }
                for term in &self.terms {
                    if contains_tokens(&tokens, &term.tokens) {
                        return Err(Error::InvalidConfig(format!(
                            "{what} filler `{filler}` contains surface term of `{}`",
                            term.id
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn object_ids(&self) -> Vec<&str> {
        self.objects.iter().map(|e| e.id.as_str()).collect()
    }

    pub fn part_ids(&self) -> Vec<&str> {
        self.parts.iter().map(|e| e.id.as_str()).collect()
    }

    pub fn affordance_ids(&self) -> Vec<&str> {
        self.affordances.iter().map(|e| e.id.as_str()).collect()
    }

    /// Every canonical id in a stable order: objects, then parts, then
    /// affordances, each in file order.
    pub fn all_ids(&self) -> Vec<&str> {
        self.objects
            .iter()
            .chain(&self.parts)
            .chain(&self.affordances)
            .map(|e| e.id.as_str())
            .collect()
    }

    /// Namespace of a canonical id, if it exists.
    pub fn slot_of(&self, id: &str) -> Option<SlotKind> {
        for (list, kind) in [
            (&self.objects, SlotKind::Object),
            (&self.parts, SlotKind::Part),
            (&self.affordances, SlotKind::Affordance),
        ] {
            if list.iter().any(|e| e.id == id) {
                return Some(kind);
            }
        }
        None
    }

    pub fn is_object(&self, id: &str) -> bool {
        self.slot_of(id) == Some(SlotKind::Object)
    }

    pub fn is_part(&self, id: &str) -> bool {
        self.slot_of(id) == Some(SlotKind::Part)
    }

    pub fn is_affordance(&self, id: &str) -> bool {
        self.slot_of(id) == Some(SlotKind::Affordance)
    }

    /// Surface synonyms of a canonical id.
    pub fn synonyms(&self, id: &str) -> Result<&[String]> {
        self.objects
            .iter()
            .chain(&self.parts)
            .chain(&self.affordances)
            .find(|e| e.id == id)
            .map(|e| e.synonyms.as_slice())
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    /// Part taught for this (object, affordance) pair, if tabulated.
    pub fn map_part(&self, object: &str, affordance: &str) -> Option<&str> {
        self.affordance_map
            .get(&(object.to_string(), affordance.to_string()))
            .map(String::as_str)
    }

    /// Parts that serve an affordance, most preferred first.
    pub fn ranked_parts(&self, affordance: &str) -> Option<&[String]> {
        self.affordance_ranking
            .get(affordance)
            .map(Vec::as_slice)
    }

    /// The single preferred grasp part for an object.
    pub fn one_best_part(&self, object: &str) -> Option<&str> {
        self.one_best_part.get(object).map(String::as_str)
    }

    /// Generic nouns used to blank out a withheld slot.
    pub fn fillers(&self, kind: SlotKind) -> &[String] {
        match kind {
            SlotKind::Object => &self.object_fillers,
            SlotKind::Part => &self.part_fillers,
            SlotKind::Affordance => &self.affordance_fillers,
        }
    }

    pub(crate) fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// All vocabulary mentions in reading order, longest match first at each
    /// position; matched tokens are consumed so overlapping shorter terms do
    /// not double-report.
    pub fn scan(&self, text: &str) -> Vec<(SlotKind, &str)> {
        let tokens = tokenize(text);
        let mut found = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let mut best: Option<&Term> = None;
            for term in &self.terms {
                let n = term.tokens.len();
                if i + n > tokens.len() {
                    continue;
                }
                if term.tokens[..] == tokens[i..i + n]
                    && best.map_or(true, |b| n > b.tokens.len())
                {
                    best = Some(term);
                }
            }
            match best {
                Some(term) => {
                    found.push((term.kind, term.id.as_str()));
                    i += term.tokens.len();
                }
                None => i += 1,
            }
        }
        found
    }
}

fn convert_entries(raw: Vec<RawEntry>) -> Result<Vec<Entry>> {
    raw.into_iter()
        .map(|e| {
            if e.id.is_empty() {
                return Err(Error::InvalidConfig("empty lexicon id".into()));
            }
            if e.synonyms.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "id `{}` has no surface synonyms",
                    e.id
                )));
            }
            Ok(Entry {
                id: e.id,
                synonyms: e.synonyms,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::{make_shape, CATEGORIES};

    #[test]
    fn bundled_lexicon_loads_and_counts_match() {
        let lex = Lexicon::bundled();
        assert_eq!(lex.version(), "1.0.0");
        assert_eq!(lex.object_ids().len(), 8);
        assert_eq!(lex.part_ids().len(), 10);
        assert_eq!(lex.affordance_ids().len(), 8);
        assert_eq!(lex.all_ids().len(), 26);
    }

    #[test]
    fn catalog_and_lexicon_agree_on_names() {
        let lex = Lexicon::bundled();
        for category in CATEGORIES {
            assert!(lex.is_object(category), "category `{category}` missing");
            let mesh = make_shape(category, &[], 7).unwrap();
            for name in mesh.part_names.values() {
                assert!(lex.is_part(name), "part `{name}` of `{category}` missing");
            }
            // The preferred part and every tabulated/ranked part that can be
            // asked for on this object must exist on its mesh.
            let best = lex.one_best_part(category).unwrap();
            assert!(
                mesh.part_names.values().any(|n| n == best),
                "preferred part `{best}` is not on `{category}`"
            );
            for affordance in lex.affordance_ids() {
                if let Some(part) = lex.map_part(category, affordance) {
                    assert!(mesh.part_names.values().any(|n| n == part));
                }
            }
        }
    }

    #[test]
    fn scan_prefers_longest_match() {
        let lex = Lexicon::bundled();
        assert_eq!(lex.scan("pass the desk light"), vec![(SlotKind::Object, "lamp")]);
        assert_eq!(lex.scan("pass the desk"), vec![(SlotKind::Object, "table")]);
        // Single tokens do not match inside longer words.
        assert_eq!(lex.scan("my handbag"), vec![(SlotKind::Object, "bag")]);
        assert_eq!(lex.scan("the lampshade"), vec![(SlotKind::Part, "shade")]);
    }

    #[test]
    fn invalid_lexicons_are_rejected() {
        // Syntax error.
        assert!(Lexicon::from_json("{").is_err());
        // A filler that contains a surface term must be rejected.
        let leaky = LEXICON_JSON.replace(
            "\"object_fillers\": [\"thing\", \"object\", \"item\"]",
            "\"object_fillers\": [\"the mug\"]",
        );
        assert!(matches!(
            Lexicon::from_json(&leaky),
            Err(Error::InvalidConfig(_))
        ));
        // Dropping a preferred-part entry must be rejected.
        let missing = LEXICON_JSON.replace("\"guitar\": \"neck\",", "");
        assert!(matches!(
            Lexicon::from_json(&missing),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn tokenizer_folds_case_and_strips_punctuation() {
        assert_eq!(
            tokenize("Grab the MUG's handle, please!"),
            vec!["grab", "the", "mug", "s", "handle", "please"]
        );
        assert!(tokenize("  ... ").is_empty());
    }
}

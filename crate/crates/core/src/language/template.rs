//! Sentence templates for instruction generation.
//!
//! Templates are slotted English sentences with `{object}`, `{part}`, and
//! `{affordance}` placeholders, spanning five syntactic kinds so the
//! generated corpus is not a single fixed phrasing. They ship as versioned
//! JSON embedded in the library.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Embedded template bank (versioned JSON).
pub const TEMPLATES_JSON: &str = include_str!("../../data/templates.json");

/// Placeholder markers inside template text.
pub const OBJECT_SLOT: &str = "{object}";
pub const PART_SLOT: &str = "{part}";
pub const AFFORDANCE_SLOT: &str = "{affordance}";

/// Syntactic family of a template.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemplateKind {
    Imperative,
    Interrogative,
    Declarative,
    Conditional,
    Descriptive,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 5] = [
        TemplateKind::Imperative,
        TemplateKind::Interrogative,
        TemplateKind::Declarative,
        TemplateKind::Conditional,
        TemplateKind::Descriptive,
    ];
}

/// One slotted sentence form.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Template {
    pub id: u32,
    pub kind: TemplateKind,
    pub text: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBank {
    version: String,
    templates: Vec<Template>,
}

/// Validated collection of sentence templates.
#[derive(Clone, Debug)]
pub struct TemplateBank {
    version: String,
    templates: Vec<Template>,
}

/// Fewest templates a usable bank may carry.
pub const MIN_TEMPLATES: usize = 20;

impl TemplateBank {
    /// The library's embedded template bank.
    pub fn bundled() -> &'static TemplateBank {
        static CACHE: OnceLock<TemplateBank> = OnceLock::new();
        CACHE.get_or_init(|| {
            TemplateBank::from_json(TEMPLATES_JSON).expect("embedded template data is valid")
        })
    }

    /// Parses and validates a bank from its JSON serialization.
    pub fn from_json(json: &str) -> Result<TemplateBank> {
        let raw: RawBank = serde_json::from_str(json)?;
        let bank = TemplateBank {
            version: raw.version,
            templates: raw.templates,
        };
        bank.validate()?;
        Ok(bank)
    }

    fn validate(&self) -> Result<()> {
        if self.templates.len() < MIN_TEMPLATES {
            return Err(Error::InvalidConfig(format!(
                "template bank has {} entries, needs at least {MIN_TEMPLATES}",
                self.templates.len()
            )));
        }
        let mut ids = std::collections::BTreeSet::new();
        for template in &self.templates {
            if !ids.insert(template.id) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate template id {}",
                    template.id
                )));
            }
            for slot in [OBJECT_SLOT, PART_SLOT, AFFORDANCE_SLOT] {
                if template.text.matches(slot).count() != 1 {
                    return Err(Error::InvalidConfig(format!(
                        "template {} must contain `{slot}` exactly once",
                        template.id
                    )));
                }
            }
        }
        for kind in TemplateKind::ALL {
            if !self.templates.iter().any(|t| t.kind == kind) {
                return Err(Error::InvalidConfig(format!(
                    "template bank has no {kind:?} entry"
                )));
            }
        }
        Ok(())
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }
}

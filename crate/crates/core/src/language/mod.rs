//! Natural-language side of the planner: a versioned vocabulary, sentence
//! templates, instruction synthesis with controlled slot withholding, and
//! the reverse path from text back to a target part.

pub mod generate;
pub mod lexicon;
pub mod parse;
pub mod template;

pub use generate::{
    generate_sentences, generate_sentences_with, Instruction, Mode, Slots,
    FRAGMENT_TEMPLATE_ID,
};
pub use lexicon::{tokenize, Lexicon, SlotKind, LEXICON_JSON};
pub use parse::{parse_instruction, resolve_part};
pub use template::{
    Template, TemplateBank, TemplateKind, MIN_TEMPLATES, TEMPLATES_JSON,
};

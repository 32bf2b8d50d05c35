//! Robust frame parsing of free-form move descriptions.
//!
//! Grammars are recursive transition networks written as bracketed rules,
//! one parenthesized production per line and `;` closing each rule. Parsing
//! is partial: the start symbol is matched wherever it can be, unknown words
//! between the elements of a production are skipped, and a description may
//! yield several frames that [`merge_parses`] folds into one [`MoveFrame`].

mod frame;
mod grammar;
mod parser;

pub use frame::{
    coverage, frame_of, merge_parses, ActionFrame, Descriptor, FrameError, HoldClass, HoldFrame,
    MoveFrame, Shape, Size,
};
pub use grammar::{
    default_grammar, load_grammar, Element, Grammar, GrammarError, Rule, BASE_GRAMMAR,
    DEFAULT_GRAMMAR,
};
pub use parser::{
    parse_move, parse_tokens, render_parses, tokenize, FrameChild, FrameNode, FrameParse, FramePath,
};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// One element of a production: a run of literal words, or a reference to
/// another nonterminal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Element {
    Words(Vec<String>),
    Ref(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub productions: Vec<Vec<Element>>,
}

/// A recursive-transition-network grammar. Immutable once loaded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grammar {
    rules: Vec<Rule>,
    index: BTreeMap<String, usize>,
    start: usize,
    vocabulary: BTreeSet<String>,
    warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GrammarError {
    UndefinedNonterminal(String),
    DuplicateNonterminal(String),
    SyntaxError { line: usize, message: String },
    LeftRecursion(String),
    Empty,
}

impl GrammarError {
    pub fn code(&self) -> &'static str {
        match self {
            GrammarError::UndefinedNonterminal(_) => "UndefinedNonterminal",
            GrammarError::DuplicateNonterminal(_) => "DuplicateNonterminal",
            GrammarError::SyntaxError { .. } => "SyntaxError",
            GrammarError::LeftRecursion(_) => "LeftRecursion",
            GrammarError::Empty => "EmptyGrammar",
        }
    }
}

impl fmt::Display for GrammarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrammarError::UndefinedNonterminal(n) => {
                write!(f, "nonterminal [{n}] is referenced but never defined")
            }
            GrammarError::DuplicateNonterminal(n) => {
                write!(f, "nonterminal [{n}] is defined twice")
            }
            GrammarError::SyntaxError { line, message } => write!(f, "line {line}: {message}"),
            GrammarError::LeftRecursion(n) => write!(f, "nonterminal [{n}] is left-recursive"),
            GrammarError::Empty => write!(f, "grammar defines no nonterminals"),
        }
    }
}

impl core::error::Error for GrammarError {}

/// Leftover quoted-printable soft encoding such as `=20`.
fn is_transcription_junk(line: &str) -> bool {
    let b = line.as_bytes();
    b.len() == 3 && b[0] == b'=' && b[1].is_ascii_hexdigit() && b[2].is_ascii_hexdigit()
}

fn header_name(line: &str) -> Option<&str> {
    let inner = line.strip_prefix('[')?.strip_suffix(']')?;
    (!inner.is_empty() && !inner.contains(['[', ']']) && !inner.contains(char::is_whitespace))
        .then_some(inner)
}

enum RawElement {
    Words(Vec<String>),
    Ref(String),
}

fn parse_production(body: &str, line: usize) -> Result<Vec<RawElement>, GrammarError> {
    let mut out = Vec::new();
    let mut words: Vec<String> = Vec::new();
    for token in body.split_whitespace() {
        if token.starts_with('[') || token.ends_with(']') {
            let name = header_name(token).ok_or_else(|| GrammarError::SyntaxError {
                line,
                message: format!("malformed nonterminal reference {token:?}"),
            })?;
            if !words.is_empty() {
                out.push(RawElement::Words(core::mem::take(&mut words)));
            }
            out.push(RawElement::Ref(name.to_string()));
        } else if token.contains(['(', ')', ';']) {
            return Err(GrammarError::SyntaxError {
                line,
                message: format!("unexpected {token:?}"),
            });
        } else {
            words.push(token.to_lowercase());
        }
    }
    if !words.is_empty() {
        out.push(RawElement::Words(words));
    }
    if out.is_empty() {
        return Err(GrammarError::SyntaxError {
            line,
            message: "empty production".into(),
        });
    }
    Ok(out)
}

/// Parses the bracketed rule syntax:
///
/// ```text
/// [Hold]
///     ([HoldSize] [HoldType])
///     ([HoldType])
/// ;
/// ```
///
/// The start symbol is `[Move]` when defined, otherwise the first rule.
pub fn load_grammar(text: &str) -> Result<Grammar, GrammarError> {
    let mut raw: Vec<(String, Vec<Vec<RawElement>>)> = Vec::new();
    let mut index = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut open: Option<usize> = None;

    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if is_transcription_junk(line) {
            warnings.push(format!("line {line_no}: ignoring stray {line:?}"));
            continue;
        }
        if let Some(name) = header_name(line) {
            if open.is_some() {
                return Err(GrammarError::SyntaxError {
                    line: line_no,
                    message: format!("[{name}] starts before the previous rule's ';'"),
                });
            }
            if index.insert(name.to_string(), raw.len()).is_some() {
                return Err(GrammarError::DuplicateNonterminal(name.to_string()));
            }
            raw.push((name.to_string(), Vec::new()));
            open = Some(raw.len() - 1);
        } else if line == ";" {
            match open.take() {
                Some(r) if raw[r].1.is_empty() => {
                    return Err(GrammarError::SyntaxError {
                        line: line_no,
                        message: format!("[{}] has no productions", raw[r].0),
                    })
                }
                Some(_) => {}
                None => {
                    return Err(GrammarError::SyntaxError {
                        line: line_no,
                        message: "';' outside a rule".into(),
                    })
                }
            }
        } else if let Some(body) = line.strip_prefix('(').and_then(|l| l.strip_suffix(')')) {
            let r = open.ok_or_else(|| GrammarError::SyntaxError {
                line: line_no,
                message: "production outside a rule".into(),
            })?;
            raw[r].1.push(parse_production(body, line_no)?);
        } else {
            return Err(GrammarError::SyntaxError {
                line: line_no,
                message: format!("unrecognized line {line:?}"),
            });
        }
    }
    if let Some(r) = open {
        return Err(GrammarError::SyntaxError {
            line: text.lines().count(),
            message: format!("[{}] is missing its ';'", raw[r].0),
        });
    }
    if raw.is_empty() {
        return Err(GrammarError::Empty);
    }

    let mut vocabulary = BTreeSet::new();
    let mut rules = Vec::with_capacity(raw.len());
    for (name, productions) in raw {
        let mut resolved = Vec::with_capacity(productions.len());
        for production in productions {
            let mut elements = Vec::with_capacity(production.len());
            for el in production {
                elements.push(match el {
                    RawElement::Words(words) => {
                        vocabulary.extend(words.iter().cloned());
                        Element::Words(words)
                    }
                    RawElement::Ref(target) => Element::Ref(
                        *index
                            .get(&target)
                            .ok_or(GrammarError::UndefinedNonterminal(target))?,
                    ),
                });
            }
            resolved.push(elements);
        }
        rules.push(Rule {
            name,
            productions: resolved,
        });
    }

    let start = index.get("Move").copied().unwrap_or(0);
    let grammar = Grammar {
        rules,
        index,
        start,
        vocabulary,
        warnings,
    };
    grammar.check_left_recursion()?;
    Ok(grammar)
}

impl Grammar {
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.index.get(name).map(|&i| &self.rules[i])
    }

    pub(crate) fn rule_at(&self, i: usize) -> &Rule {
        &self.rules[i]
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn start_name(&self) -> &str {
        &self.rules[self.start].name
    }

    /// Non-fatal problems found while loading (e.g. skipped junk lines).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// True if some terminal contains this word.
    pub fn knows(&self, word: &str) -> bool {
        self.vocabulary.contains(word)
    }

    /// The literal productions of a rule made of single terminal runs.
    pub fn terminals(&self, name: &str) -> Vec<String> {
        self.rule(name)
            .map(|r| {
                r.productions
                    .iter()
                    .filter_map(|p| match p.as_slice() {
                        [Element::Words(w)] => Some(w.join(" ")),
                        _ => None,
                    })
                    .collect()
            })
            .unwrap_or_default()
    }

    fn check_left_recursion(&self) -> Result<(), GrammarError> {
        // 0 = unvisited, 1 = on stack, 2 = done
        fn visit(g: &Grammar, r: usize, state: &mut [u8]) -> Result<(), GrammarError> {
            match state[r] {
                1 => return Err(GrammarError::LeftRecursion(g.rules[r].name.clone())),
                2 => return Ok(()),
                _ => {}
            }
            state[r] = 1;
            for p in &g.rules[r].productions {
                if let Some(Element::Ref(next)) = p.first() {
                    visit(g, *next, state)?;
                }
            }
            state[r] = 2;
            Ok(())
        }
        let mut state = alloc::vec![0u8; self.rules.len()];
        for r in 0..self.rules.len() {
            visit(self, r, &mut state)?;
        }
        Ok(())
    }
}

/// The climbing grammar shipped as the default: the base grammar with
/// `large` added to `[ActionSizeBig]`.
pub const DEFAULT_GRAMMAR: &str = include_str!("../../grammars/climbing.gra");

/// The base climbing grammar, unmodified, including its stray `=20` line.
pub const BASE_GRAMMAR: &str = include_str!("../../grammars/base.gra");

pub fn default_grammar() -> Grammar {
    load_grammar(DEFAULT_GRAMMAR).expect("bundled grammar is valid")
}

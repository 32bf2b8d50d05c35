use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use super::grammar::{Element, Grammar};

/// Lowercases and splits a description into tokens.
///
/// Anything that is not alphanumeric or a hyphen separates tokens. A
/// hyphenated token the grammar does not know is re-split on its hyphens,
/// so "crimp-jug" becomes "crimp", "jug" while "micro-dick" stays whole.
pub fn tokenize(text: &str, grammar: &Grammar) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut out = Vec::new();
    for raw in lower.split(|c: char| !(c.is_alphanumeric() || c == '-')) {
        let token = raw.trim_matches('-');
        if token.is_empty() {
            continue;
        }
        if token.contains('-') && !grammar.knows(token) {
            out.extend(
                token
                    .split('-')
                    .filter(|p| !p.is_empty())
                    .map(ToString::to_string),
            );
        } else {
            out.push(token.to_string());
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrameChild {
    Node(FrameNode),
    Words {
        words: String,
        start: usize,
        len: usize,
    },
}

/// A matched nonterminal and what it matched, in input order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameNode {
    pub label: String,
    pub children: Vec<FrameChild>,
}

impl FrameNode {
    pub fn child(&self, label: &str) -> Option<&FrameNode> {
        self.nodes().find(|n| n.label == label)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &FrameNode> {
        self.children.iter().filter_map(|c| match c {
            FrameChild::Node(n) => Some(n),
            FrameChild::Words { .. } => None,
        })
    }

    /// First child node; the alternative a choice rule took.
    pub fn first_node(&self) -> Option<&FrameNode> {
        self.nodes().next()
    }

    pub fn contains_label(&self, label: &str) -> bool {
        self.label == label || self.nodes().any(|n| n.contains_label(label))
    }

    /// Matched words under this node, in order.
    pub fn words(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_words(&mut out);
        out
    }

    fn collect_words<'a>(&'a self, out: &mut Vec<&'a str>) {
        for c in &self.children {
            match c {
                FrameChild::Node(n) => n.collect_words(out),
                FrameChild::Words { words, .. } => out.push(words),
            }
        }
    }

    pub fn text(&self) -> String {
        self.words().join(" ")
    }

    fn collect_tokens(&self, out: &mut Vec<usize>) {
        for c in &self.children {
            match c {
                FrameChild::Node(n) => n.collect_tokens(out),
                FrameChild::Words { start, len, .. } => out.extend(*start..*start + *len),
            }
        }
    }

    fn collect_paths<'a>(
        &'a self,
        prefix: &mut Vec<(usize, &'a str)>,
        out: &mut Vec<FramePath<'a>>,
    ) {
        for (i, c) in self.children.iter().enumerate() {
            match c {
                FrameChild::Node(n) => {
                    prefix.push((i, &n.label));
                    n.collect_paths(prefix, out);
                    prefix.pop();
                }
                FrameChild::Words { words, .. } => {
                    out.push(FramePath {
                        steps: prefix.clone(),
                        words,
                    });
                }
            }
        }
    }
}

/// Root-to-leaf path: (child position, label) steps and the matched words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FramePath<'a> {
    pub steps: Vec<(usize, &'a str)>,
    pub words: &'a str,
}

impl FramePath<'_> {
    pub fn labels(&self) -> Vec<&str> {
        self.steps.iter().map(|(_, l)| *l).collect()
    }

    /// Dotted form, e.g. `[Move].[Hold].[HoldType].[HoldTypeT].rail`.
    pub fn dotted(&self) -> String {
        let mut s = String::new();
        for (_, label) in &self.steps {
            let _ = write!(s, "[{label}].");
        }
        s.push_str(self.words);
        s
    }
}

/// One match of the start symbol.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameParse {
    pub root: FrameNode,
    /// Token indices consumed by the match, ascending.
    pub tokens: Vec<usize>,
}

impl FrameParse {
    pub fn paths(&self) -> Vec<FramePath<'_>> {
        let mut out = Vec::new();
        let mut prefix = alloc::vec![(0, self.root.label.as_str())];
        self.root.collect_paths(&mut prefix, &mut out);
        out
    }
}

type Match = Option<(FrameNode, usize)>;

struct Matcher<'g> {
    grammar: &'g Grammar,
    tokens: &'g [String],
    memo: Vec<Option<Match>>,
}

impl Matcher<'_> {
    fn memo_slot(&self, rule: usize, pos: usize) -> usize {
        rule * (self.tokens.len() + 1) + pos
    }

    fn skippable(&self, pos: usize) -> bool {
        pos < self.tokens.len() && !self.grammar.knows(&self.tokens[pos])
    }

    /// Best match of `rule` starting exactly at `pos`: the production reaching
    /// furthest, earliest production on ties.
    fn rule_at(&mut self, rule: usize, pos: usize) -> Match {
        let slot = self.memo_slot(rule, pos);
        if let Some(m) = &self.memo[slot] {
            return m.clone();
        }
        let grammar = self.grammar;
        let mut best: Match = None;
        for production in &grammar.rule_at(rule).productions {
            if let Some((children, end)) = self.production_at(production, pos) {
                if best.as_ref().is_none_or(|(_, e)| end > *e) {
                    let label = grammar.rule_at(rule).name.clone();
                    best = Some((FrameNode { label, children }, end));
                }
            }
        }
        self.memo[slot] = Some(best.clone());
        best
    }

    /// The first element must start at `pos`; each later element is taken at
    /// the first position it matches after skipping only out-of-vocabulary tokens.
    fn production_at(
        &mut self,
        production: &[Element],
        pos: usize,
    ) -> Option<(Vec<FrameChild>, usize)> {
        let mut children = Vec::with_capacity(production.len());
        let mut cur = pos;
        for (i, element) in production.iter().enumerate() {
            let mut at = cur;
            loop {
                if let Some((child, end)) = self.element_at(element, at) {
                    children.push(child);
                    cur = end;
                    break;
                }
                if i == 0 || !self.skippable(at) {
                    return None;
                }
                at += 1;
            }
        }
        Some((children, cur))
    }

    fn element_at(&mut self, element: &Element, pos: usize) -> Option<(FrameChild, usize)> {
        match element {
            Element::Words(words) => {
                let end = pos + words.len();
                let hit = end <= self.tokens.len()
                    && self.tokens[pos..end].iter().zip(words).all(|(t, w)| t == w);
                hit.then(|| {
                    (
                        FrameChild::Words {
                            words: words.join(" "),
                            start: pos,
                            len: words.len(),
                        },
                        end,
                    )
                })
            }
            Element::Ref(rule) => self
                .rule_at(*rule, pos)
                .map(|(n, end)| (FrameChild::Node(n), end)),
        }
    }
}

/// Parses pre-tokenized input: scans left to right, taking the best
/// start-symbol match at the earliest position and resuming after it;
/// tokens no match covers are skipped.
pub fn parse_tokens(tokens: &[String], grammar: &Grammar) -> Vec<FrameParse> {
    let rules = grammar.rules().len();
    let mut matcher = Matcher {
        grammar,
        tokens,
        memo: alloc::vec![None; rules * (tokens.len() + 1)],
    };
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < tokens.len() {
        match matcher.rule_at(grammar.start(), pos) {
            Some((root, end)) => {
                let mut consumed = Vec::new();
                root.collect_tokens(&mut consumed);
                out.push(FrameParse {
                    root,
                    tokens: consumed,
                });
                pos = end;
            }
            None => pos += 1,
        }
    }
    out
}

/// All maximal non-overlapping frame matches in a move description, in input
/// order. An empty result means the description did not parse.
pub fn parse_move(text: &str, grammar: &Grammar) -> Vec<FrameParse> {
    parse_tokens(&tokenize(text, grammar), grammar)
}

/// Renders parses in the classic frame-parser listing format:
///
/// ```text
/// PARSE_0:
/// IsMove:[Move].[Hold].[HoldSize].[HoldSizeSmall].[HoldSizeSmallT].small
///        [HoldType].[HoldTypeT].jug
/// END_PARSE
/// ```
///
/// Each path after the first prints only the part below the deepest node it
/// shares with the previous path.
pub fn render_parses(parses: &[FrameParse], grammar: &Grammar) -> String {
    let frame = alloc::format!("Is{}:", grammar.start_name());
    let indent: String = core::iter::repeat_n(' ', frame.len()).collect();
    let mut out = String::from("PARSE_0:\n");
    for parse in parses {
        let paths = parse.paths();
        let mut previous: Option<&FramePath<'_>> = None;
        for path in &paths {
            let shared = previous.map_or(0, |p| {
                p.steps
                    .iter()
                    .zip(&path.steps)
                    .take_while(|(a, b)| a == b)
                    .count()
            });
            let tail = FramePath {
                steps: path.steps[shared..].to_vec(),
                words: path.words,
            };
            out.push_str(if previous.is_none() { &frame } else { &indent });
            out.push_str(&tail.dotted());
            out.push('\n');
            previous = Some(path);
        }
    }
    out.push_str("END_PARSE\n");
    out
}

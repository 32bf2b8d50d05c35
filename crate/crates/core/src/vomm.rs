//! Variable-order Markov models by decomposed context tree weighting.
//!
//! The alphabet is decomposed into a balanced binary tree over index ranges:
//! each internal node splits its range [lo, hi) at lo + ⌈(hi − lo)/2⌉, so a
//! symbol's path spells out its alphabet index order. Every internal node
//! owns a binary CTW model whose contexts are the previous `D` symbols, most recent first;
//! positions before the start of a sequence see a begin-of-sequence
//! sentinel. Leaves use the Krichevsky-Trofimov estimator.
//!
//! Models are static once trained: scoring and prediction condition on the
//! training counts and do not update. Block probabilities are computed in
//! closed form from counts, so a model depends only on the multiset of
//! (context, symbol) events, not on the order sequences were given in.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};
use core::fmt;

use serde::{Deserialize, Serialize};

pub const DEFAULT_ORDER: usize = 3;
pub const MAX_INSERTION: usize = 2;
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum VommError {
    EmptyCorpus,
    UnknownSymbol {
        seq: usize,
        pos: usize,
        symbol: String,
    },
    DuplicateSymbol(String),
    InvalidOrder(usize),
    JTooLarge(usize),
    VersionMismatch {
        found: u32,
        expected: u32,
    },
    CorruptFile(String),
}

impl VommError {
    pub fn code(&self) -> &'static str {
        match self {
            VommError::EmptyCorpus => "EmptyCorpus",
            VommError::UnknownSymbol { .. } => "UnknownSymbol",
            VommError::DuplicateSymbol(_) => "DuplicateSymbol",
            VommError::InvalidOrder(_) => "InvalidOrder",
            VommError::JTooLarge(_) => "JTooLarge",
            VommError::VersionMismatch { .. } => "VersionMismatch",
            VommError::CorruptFile(_) => "CorruptFile",
        }
    }
}

impl fmt::Display for VommError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VommError::EmptyCorpus => write!(f, "no symbols to train on"),
            VommError::UnknownSymbol { seq, pos, symbol } => {
                write!(
                    f,
                    "symbol {symbol:?} at sequence {seq}, position {pos} is not in the alphabet"
                )
            }
            VommError::DuplicateSymbol(s) => write!(f, "alphabet lists {s:?} twice"),
            VommError::InvalidOrder(d) => write!(f, "model order must be at least 1, got {d}"),
            VommError::JTooLarge(j) => {
                write!(f, "insertion length {j} outside 1..={MAX_INSERTION}")
            }
            VommError::VersionMismatch { found, expected } => {
                write!(f, "model format version {found}, expected {expected}")
            }
            VommError::CorruptFile(m) => write!(f, "corrupt model file: {m}"),
        }
    }
}

impl core::error::Error for VommError {}

/// ln of the KT block probability of a zeros and b ones.
fn kt_log(counts: [u64; 2]) -> f64 {
    let (a, b) = (counts[0] as f64, counts[1] as f64);
    libm::lgamma(a + 0.5) + libm::lgamma(b + 0.5) - libm::lgamma(a + b + 1.0) - libm::log(PI)
}

fn log_half_sum(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x > y { (x, y) } else { (y, x) };
    hi + libm::log1p(libm::exp(lo - hi)) - LN_2
}

#[derive(Clone, Debug, Default)]
struct CtNode {
    counts: [u64; 2],
    children: BTreeMap<u32, usize>,
    log_pw: f64,
}

#[derive(Clone, Debug)]
struct ContextTree {
    nodes: Vec<CtNode>,
}

impl ContextTree {
    fn new() -> Self {
        ContextTree {
            nodes: alloc::vec![CtNode::default()],
        }
    }

    fn add(&mut self, ctx: &[u32], bit: usize, times: u64) {
        let mut at = 0;
        self.nodes[at].counts[bit] += times;
        for &sym in ctx {
            at = match self.nodes[at].children.get(&sym) {
                Some(&next) => next,
                None => {
                    let next = self.nodes.len();
                    self.nodes.push(CtNode::default());
                    self.nodes[at].children.insert(sym, next);
                    next
                }
            };
            self.nodes[at].counts[bit] += times;
        }
    }

    fn finalize(&mut self, depth: usize) {
        self.finalize_node(0, depth);
    }

    fn finalize_node(&mut self, at: usize, remaining: usize) -> f64 {
        let log_pe = kt_log(self.nodes[at].counts);
        let log_pw = if remaining == 0 {
            log_pe
        } else {
            let kids: Vec<usize> = self.nodes[at].children.values().copied().collect();
            let children: f64 = kids
                .into_iter()
                .map(|c| self.finalize_node(c, remaining - 1))
                .sum();
            log_half_sum(log_pe, children)
        };
        self.nodes[at].log_pw = log_pw;
        log_pw
    }

    fn children_log(&self, at: usize) -> f64 {
        self.nodes[at]
            .children
            .values()
            .map(|&c| self.nodes[c].log_pw)
            .sum()
    }

    /// P(next bit = 1 | context): the ratio of weighted block probabilities
    /// with and without one more event, along the context path.
    fn p_one(&self, ctx: &[u32]) -> f64 {
        let mut path: Vec<Option<usize>> = Vec::with_capacity(ctx.len() + 1);
        path.push(Some(0));
        for &sym in ctx {
            let next = path
                .last()
                .copied()
                .flatten()
                .and_then(|n| self.nodes[n].children.get(&sym).copied());
            path.push(next);
        }
        let depth = ctx.len();
        let mut delta = [0.0f64; 2];
        for (bit, slot) in delta.iter_mut().enumerate() {
            let (mut child_old, mut child_new) = (0.0, 0.0);
            for d in (0..=depth).rev() {
                let (mut counts, old, kids) = match path[d] {
                    Some(n) => (
                        self.nodes[n].counts,
                        self.nodes[n].log_pw,
                        self.children_log(n),
                    ),
                    None => ([0, 0], 0.0, 0.0),
                };
                counts[bit] += 1;
                let log_pe = kt_log(counts);
                let new = if d == depth {
                    log_pe
                } else {
                    log_half_sum(log_pe, kids - child_old + child_new)
                };
                child_old = old;
                child_new = new;
            }
            *slot = child_new - child_old;
        }
        1.0 / (1.0 + libm::exp(delta[0] - delta[1]))
    }

    fn leaves(&self, depth: usize) -> Vec<LeafCounts> {
        let mut out = Vec::new();
        let mut ctx = Vec::new();
        self.collect_leaves(0, depth, &mut ctx, &mut out);
        out
    }

    fn collect_leaves(
        &self,
        at: usize,
        remaining: usize,
        ctx: &mut Vec<u32>,
        out: &mut Vec<LeafCounts>,
    ) {
        if remaining == 0 {
            out.push(LeafCounts {
                context: ctx.clone(),
                counts: self.nodes[at].counts,
            });
            return;
        }
        for (&sym, &child) in &self.nodes[at].children {
            ctx.push(sym);
            self.collect_leaves(child, remaining - 1, ctx, out);
            ctx.pop();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct LeafCounts {
    context: Vec<u32>,
    counts: [u64; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct TreeCounts {
    node: u32,
    leaves: Vec<LeafCounts>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    alphabet: Vec<String>,
    max_order: usize,
    trained_on: String,
    training_symbols: u64,
    trees: Vec<TreeCounts>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Likelihood {
    pub total_bits: f64,
    pub per_symbol_bits: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interpolation {
    pub insertion: Vec<String>,
    /// Bits of the insertion plus the scored suffix window, given the prefix.
    pub bits: f64,
    /// Bits of the same window with nothing inserted.
    pub baseline_bits: f64,
    /// Insertions scored, the empty one included.
    pub candidates: usize,
}

#[derive(Clone, Debug)]
pub struct VommModel {
    alphabet: Vec<String>,
    index: BTreeMap<String, u32>,
    max_order: usize,
    trained_on: String,
    training_symbols: u64,
    /// Per symbol, the (heap node, branch) decisions from the root down.
    paths: Vec<Vec<(usize, usize)>>,
    /// Indexed by heap position in the decomposition; `None` for leaves and
    /// unused slots.
    trees: Vec<Option<ContextTree>>,
}

fn split(lo: usize, hi: usize) -> usize {
    lo + (hi - lo).div_ceil(2)
}

fn decompose(
    lo: usize,
    hi: usize,
    heap: usize,
    trail: &mut Vec<(usize, usize)>,
    paths: &mut [Vec<(usize, usize)>],
    nodes: &mut Vec<usize>,
) {
    if hi - lo == 1 {
        paths[lo] = trail.clone();
        return;
    }
    nodes.push(heap);
    let mid = split(lo, hi);
    trail.push((heap, 0));
    decompose(lo, mid, 2 * heap, trail, paths, nodes);
    trail.pop();
    trail.push((heap, 1));
    decompose(mid, hi, 2 * heap + 1, trail, paths, nodes);
    trail.pop();
}

impl VommModel {
    /// An untrained model; every prediction is uniform over the decision bits.
    pub fn fresh<S: AsRef<str>>(alphabet: &[S], max_order: usize) -> Result<Self, VommError> {
        if max_order == 0 {
            return Err(VommError::InvalidOrder(max_order));
        }
        if alphabet.is_empty() {
            return Err(VommError::EmptyCorpus);
        }
        let mut index = BTreeMap::new();
        for (i, s) in alphabet.iter().enumerate() {
            if index.insert(String::from(s.as_ref()), i as u32).is_some() {
                return Err(VommError::DuplicateSymbol(s.as_ref().into()));
            }
        }
        let n = alphabet.len();
        let mut paths = alloc::vec![Vec::new(); n];
        let mut nodes = Vec::new();
        decompose(0, n, 1, &mut Vec::new(), &mut paths, &mut nodes);
        let mut trees = Vec::new();
        trees.resize_with(nodes.iter().max().map_or(1, |m| m + 1), || None);
        for node in nodes {
            trees[node] = Some(ContextTree::new());
        }
        Ok(VommModel {
            alphabet: alphabet.iter().map(|s| s.as_ref().into()).collect(),
            index,
            max_order,
            trained_on: "all".into(),
            training_symbols: 0,
            paths,
            trees,
        })
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn trained_on(&self) -> &str {
        &self.trained_on
    }

    pub fn set_trained_on(&mut self, tag: &str) {
        self.trained_on = tag.into();
    }

    pub fn training_symbols(&self) -> u64 {
        self.training_symbols
    }

    pub fn symbol_index(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).map(|&i| i as usize)
    }

    fn sentinel(&self) -> u32 {
        self.alphabet.len() as u32
    }

    fn encode<S: AsRef<str>>(&self, seq: usize, symbols: &[S]) -> Result<Vec<u32>, VommError> {
        symbols
            .iter()
            .enumerate()
            .map(|(pos, s)| {
                self.index
                    .get(s.as_ref())
                    .copied()
                    .ok_or_else(|| VommError::UnknownSymbol {
                        seq,
                        pos,
                        symbol: s.as_ref().into(),
                    })
            })
            .collect()
    }

    /// Context for the symbol after `history`: last D symbols, most recent
    /// first, padded with the sentinel.
    fn context(&self, history: &[u32]) -> Vec<u32> {
        let mut ctx: Vec<u32> = history.iter().rev().take(self.max_order).copied().collect();
        ctx.resize(self.max_order, self.sentinel());
        ctx
    }

    fn add_events(&mut self, seq: &[u32]) {
        for t in 0..seq.len() {
            let ctx = self.context(&seq[..t]);
            for &(node, bit) in &self.paths[seq[t] as usize] {
                if let Some(tree) = self.trees[node].as_mut() {
                    tree.add(&ctx, bit, 1);
                }
            }
        }
        self.training_symbols += seq.len() as u64;
    }

    fn finalize(&mut self) {
        let depth = self.max_order;
        for tree in self.trees.iter_mut().flatten() {
            tree.finalize(depth);
        }
    }

    fn symbol_prob(&self, ctx: &[u32], symbol: u32) -> f64 {
        let mut p = 1.0;
        for &(node, bit) in &self.paths[symbol as usize] {
            if let Some(tree) = &self.trees[node] {
                let one = tree.p_one(ctx);
                p *= if bit == 1 { one } else { 1.0 - one };
            }
        }
        p
    }

    fn distribution(&self, ctx: &[u32]) -> Vec<f64> {
        let n = self.alphabet.len();
        let mut out = alloc::vec![0.0; n];
        // push probability mass down the decomposition to the leaves
        let mut stack = alloc::vec![(0usize, n, 1usize, 1.0f64)];
        while let Some((lo, hi, heap, mass)) = stack.pop() {
            if hi - lo == 1 {
                out[lo] = mass;
                continue;
            }
            let one = self.trees[heap].as_ref().map_or(0.5, |t| t.p_one(ctx));
            let mid = split(lo, hi);
            stack.push((lo, mid, 2 * heap, mass * (1.0 - one)));
            stack.push((mid, hi, 2 * heap + 1, mass * one));
        }
        let total: f64 = out.iter().sum();
        out.iter_mut().for_each(|p| *p /= total);
        out
    }

    fn bits_of(&self, history: &[u32], seq: &[u32]) -> f64 {
        let mut all: Vec<u32> = history.to_vec();
        let mut bits = 0.0;
        for &s in seq {
            let ctx = self.context(&all);
            bits -= libm::log2(self.symbol_prob(&ctx, s));
            all.push(s);
        }
        bits
    }

    /// −log₂ P(sequence | model), the sequence starting from an empty history.
    pub fn likelihood<S: AsRef<str>>(&self, sequence: &[S]) -> Result<Likelihood, VommError> {
        let seq = self.encode(0, sequence)?;
        let total_bits = self.bits_of(&[], &seq);
        let per_symbol_bits = if seq.is_empty() {
            0.0
        } else {
            total_bits / seq.len() as f64
        };
        Ok(Likelihood {
            total_bits,
            per_symbol_bits,
        })
    }

    /// Bits of `sequence` following `history`.
    pub fn conditional_bits<S: AsRef<str>, T: AsRef<str>>(
        &self,
        history: &[S],
        sequence: &[T],
    ) -> Result<f64, VommError> {
        let h = self.encode(0, history)?;
        let s = self.encode(1, sequence)?;
        Ok(self.bits_of(&h, &s))
    }

    /// Next-symbol distribution in alphabet order; only the last D context
    /// symbols matter.
    pub fn predict<S: AsRef<str>>(&self, context: &[S]) -> Result<Vec<f64>, VommError> {
        let h = self.encode(0, context)?;
        Ok(self.distribution(&self.context(&h)))
    }

    /// Greedy continuation: the most probable next symbol each step, lowest
    /// alphabet index on ties.
    pub fn forward_simulate<S: AsRef<str>>(
        &self,
        context: &[S],
        length: usize,
    ) -> Result<Vec<String>, VommError> {
        self.simulate(context, length, argmax)
    }

    /// Sampled continuation; `uniform` must return values in [0, 1).
    pub fn forward_sample<S: AsRef<str>>(
        &self,
        context: &[S],
        length: usize,
        mut uniform: impl FnMut() -> f64,
    ) -> Result<Vec<String>, VommError> {
        self.simulate(context, length, |dist| {
            let u = uniform();
            let mut acc = 0.0;
            for (i, p) in dist.iter().enumerate() {
                acc += p;
                if u < acc {
                    return i;
                }
            }
            dist.len() - 1
        })
    }

    fn simulate<S: AsRef<str>>(
        &self,
        context: &[S],
        length: usize,
        mut choose: impl FnMut(&[f64]) -> usize,
    ) -> Result<Vec<String>, VommError> {
        let mut history = self.encode(0, context)?;
        let mut out = Vec::with_capacity(length);
        for _ in 0..length {
            let next = choose(&self.distribution(&self.context(&history)));
            out.push(self.alphabet[next].clone());
            history.push(next as u32);
        }
        Ok(out)
    }

    /// Exhaustive search for the insertion of at most `j_max` symbols between
    /// `prefix` and `suffix` that minimizes the bits of the joined sequence.
    ///
    /// Only the last D prefix symbols and the first D suffix symbols are
    /// scored; symbols further out contribute the same bits to every
    /// candidate. Ties go to the shorter insertion, then to the earlier one
    /// in alphabet order.
    pub fn interpolate<S: AsRef<str>, T: AsRef<str>>(
        &self,
        prefix: &[S],
        suffix: &[T],
        j_max: usize,
    ) -> Result<Interpolation, VommError> {
        if j_max == 0 || j_max > MAX_INSERTION {
            return Err(VommError::JTooLarge(j_max));
        }
        let pre = self.encode(0, prefix)?;
        let suf = self.encode(1, suffix)?;
        let d = self.max_order;
        let history = &pre[pre.len().saturating_sub(d)..];
        let window = &suf[..suf.len().min(d)];
        let n = self.alphabet.len() as u32;

        let mut scratch: Vec<u32> = Vec::with_capacity(j_max + window.len());
        let mut score = |insertion: &[u32]| {
            scratch.clear();
            scratch.extend_from_slice(insertion);
            scratch.extend_from_slice(window);
            self.bits_of(history, &scratch)
        };
        let baseline = score(&[]);
        let mut best: (Vec<u32>, f64) = (Vec::new(), baseline);
        let mut candidates = 1;
        let mut insertion: Vec<u32> = Vec::with_capacity(j_max);
        for len in 1..=j_max {
            // candidates in lexicographic alphabet order, last position fastest
            for code in 0..(n as usize).pow(len as u32) {
                insertion.clear();
                let mut rest = code;
                for _ in 0..len {
                    insertion.push((rest % n as usize) as u32);
                    rest /= n as usize;
                }
                insertion.reverse();
                candidates += 1;
                let bits = score(&insertion);
                if bits < best.1 {
                    best = (insertion.clone(), bits);
                }
            }
        }
        Ok(Interpolation {
            insertion: best
                .0
                .iter()
                .map(|&s| self.alphabet[s as usize].clone())
                .collect(),
            bits: best.1,
            baseline_bits: baseline,
            candidates,
        })
    }

    fn to_file(&self) -> ModelFile {
        let trees = self
            .trees
            .iter()
            .enumerate()
            .filter_map(|(node, t)| t.as_ref().map(|t| (node, t)))
            .map(|(node, t)| TreeCounts {
                node: node as u32,
                leaves: t.leaves(self.max_order),
            })
            .collect();
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            alphabet: self.alphabet.clone(),
            max_order: self.max_order,
            trained_on: self.trained_on.clone(),
            training_symbols: self.training_symbols,
            trees,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(&self.to_file()).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, VommError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| VommError::CorruptFile(format!("{e}")))?;
        let found = value.get("format_version").and_then(|v| v.as_u64());
        match found {
            Some(v) if v == MODEL_FORMAT_VERSION as u64 => {}
            Some(v) => {
                return Err(VommError::VersionMismatch {
                    found: v as u32,
                    expected: MODEL_FORMAT_VERSION,
                })
            }
            None => return Err(VommError::CorruptFile("missing format_version".into())),
        }
        let file: ModelFile =
            serde_json::from_value(value).map_err(|e| VommError::CorruptFile(format!("{e}")))?;
        let mut model = VommModel::fresh(&file.alphabet, file.max_order)?;
        model.trained_on = file.trained_on;
        model.training_symbols = file.training_symbols;
        let limit = model.sentinel();
        for tree in file.trees {
            let slot = model
                .trees
                .get_mut(tree.node as usize)
                .and_then(Option::as_mut)
                .ok_or_else(|| {
                    VommError::CorruptFile(format!("node {} is not a decision", tree.node))
                })?;
            for leaf in tree.leaves {
                if leaf.context.len() != file.max_order || leaf.context.iter().any(|&c| c > limit) {
                    return Err(VommError::CorruptFile("bad context".into()));
                }
                for bit in 0..2 {
                    if leaf.counts[bit] > 0 {
                        slot.add(&leaf.context, bit, leaf.counts[bit]);
                    }
                }
            }
        }
        model.finalize();
        Ok(model)
    }
}

fn argmax(dist: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in dist.iter().enumerate() {
        if p > dist[best] {
            best = i;
        }
    }
    best
}

/// Sorted distinct symbols of a corpus.
pub fn alphabet_of<S: AsRef<str>>(sequences: &[Vec<S>]) -> Vec<String> {
    let mut set: Vec<String> = sequences
        .iter()
        .flatten()
        .map(|s| String::from(s.as_ref()))
        .collect();
    set.sort();
    set.dedup();
    set
}

/// Trains a model of order `max_order` on `sequences` over a closed alphabet.
pub fn train<S: AsRef<str>, A: AsRef<str>>(
    sequences: &[Vec<S>],
    max_order: usize,
    alphabet: &[A],
) -> Result<VommModel, VommError> {
    let mut model = VommModel::fresh(alphabet, max_order)?;
    let encoded: Vec<Vec<u32>> = sequences
        .iter()
        .enumerate()
        .map(|(i, s)| model.encode(i, s))
        .collect::<Result<_, _>>()?;
    if encoded.iter().all(Vec::is_empty) {
        return Err(VommError::EmptyCorpus);
    }
    for seq in &encoded {
        model.add_events(seq);
    }
    model.finalize();
    Ok(model)
}

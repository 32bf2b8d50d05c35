use std::path::PathBuf;

use proptest::prelude::*;
use routevar_core::frameparse::{
    coverage, default_grammar, frame_of, load_grammar, parse_move, render_parses, tokenize,
    FrameChild, FrameNode, FrameParse, BASE_GRAMMAR,
};

const MOVES: &str = include_str!("fixtures/moves.txt");

fn corpus() -> Vec<&'static str> {
    MOVES
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .collect()
}

/// The seven example descriptions at the top of the corpus.
fn examples() -> Vec<&'static str> {
    corpus()[..7].to_vec()
}

fn dotted(parses: &[FrameParse]) -> Vec<String> {
    parses
        .iter()
        .flat_map(|p| p.paths().iter().map(|x| x.dotted()).collect::<Vec<_>>())
        .collect()
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden")
}

/// Golden listing plus merged frame per example; `ROUTEVAR_BLESS=1` rewrites them.
fn golden_text(text: &str) -> String {
    let g = default_grammar();
    let frame = frame_of(text, &g).unwrap();
    format!(
        "{}\n{}{}\n",
        text,
        render_parses(&parse_move(text, &g), &g),
        serde_json::to_string_pretty(&frame).unwrap()
    )
}

#[test]
fn examples_match_golden_files() {
    let bless = std::env::var_os("ROUTEVAR_BLESS").is_some();
    for (i, text) in examples().iter().enumerate() {
        let path = golden_dir().join(format!("example_{}.txt", i + 1));
        let got = golden_text(text);
        if bless {
            std::fs::create_dir_all(golden_dir()).unwrap();
            std::fs::write(&path, &got).unwrap();
        }
        let want =
            std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(got, want, "example {}", i + 1);
    }
}

#[test]
fn crimp_rail_hybrid() {
    let g = default_grammar();
    let frame = frame_of(examples()[0], &g).unwrap();
    assert_eq!(frame.hybrid, "right-right-angle-crimp-rail");
    let kinds: Vec<&str> = frame.holds.iter().map(|h| h.kind.as_str()).collect();
    assert_eq!(kinds, ["crimp", "rail"]);
}

#[test]
fn corpus_coverage() {
    let c = corpus();
    assert!(c.len() >= 100);
    let g = default_grammar();
    let cov = coverage(&c, &g);
    assert!(cov >= 0.95, "coverage {cov}");
    // the unextended base grammar covers it too; it only lacks "large" as an action size
    let base = load_grammar(BASE_GRAMMAR).unwrap();
    assert!(coverage(&c, &base) >= 0.95);
}

fn check_leaves(node: &FrameNode, tokens: &[String]) -> bool {
    node.children.iter().all(|c| match c {
        FrameChild::Node(n) => check_leaves(n, tokens),
        FrameChild::Words { words, start, len } => {
            tokens[*start..*start + *len].join(" ") == *words
        }
    })
}

#[test]
fn corpus_invariants() {
    let g = default_grammar();
    for text in corpus() {
        let parses = parse_move(text, &g);
        assert_eq!(parses, parse_move(text, &g));
        assert_eq!(
            dotted(&parses),
            dotted(&parse_move(&text.to_uppercase(), &g)),
            "{text}"
        );
        let spaced = text.split(' ').collect::<Vec<_>>().join("   ");
        assert_eq!(
            dotted(&parses),
            dotted(&parse_move(&format!("  {spaced} "), &g)),
            "{text}"
        );
        let tokens = tokenize(text, &g);
        for p in &parses {
            assert!(p.tokens.windows(2).all(|w| w[0] < w[1]));
            assert!(check_leaves(&p.root, &tokens), "{text}");
            assert_eq!(p.root.label, "Move");
        }
    }
}

#[test]
fn unknown_token_between_spans_keeps_both() {
    let g = default_grammar();
    for text in corpus() {
        let tokens = tokenize(text, &g);
        let parses = parse_move(text, &g);
        for pair in parses.windows(2) {
            let cut = *pair[0].tokens.last().unwrap() + 1;
            for at in cut..=pair[1].tokens[0] {
                let mut t = tokens.clone();
                t.insert(at, "zzqx".into());
                let again = parse_move(&t.join(" "), &g);
                assert_eq!(dotted(&again), dotted(&parses), "{text} @ {at}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_word_salad_invariants(idx in prop::collection::vec(0usize..1000, 0..12), upper in any::<bool>()) {
        let g = default_grammar();
        let vocab: Vec<&str> = corpus().iter().flat_map(|l| l.split_whitespace()).collect();
        let words: Vec<&str> = idx.iter().map(|&i| vocab[i % vocab.len()]).collect();
        let text = words.join(" ");
        let parses = parse_move(&text, &g);
        let other = if upper { text.to_uppercase() } else { text.replace(' ', "\t ") };
        prop_assert_eq!(dotted(&parses), dotted(&parse_move(&other, &g)));
        let tokens = tokenize(&text, &g);
        for p in &parses {
            prop_assert!(check_leaves(&p.root, &tokens));
        }
    }
}

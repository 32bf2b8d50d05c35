use std::collections::BTreeMap;

use proptest::prelude::*;
use routevar_core::frameparse::{
    default_grammar, frame_of, ActionFrame, Descriptor, HoldClass, HoldFrame, MoveFrame, Shape,
    Size,
};
use routevar_core::symbolize::{alphabet, extract_symbol, project, quality_booleans, SymbolSetId};

const MOVES: &str = include_str!("fixtures/moves.txt");

const KINDS: &[&str] = &[
    "jug",
    "crimp",
    "sloper",
    "pinch",
    "chicken head",
    "hand jam",
    "rail",
    "edge",
];
const SIZES: &[(&str, Size)] = &[
    ("big", Size::Big),
    ("small", Size::Small),
    ("not big", Size::Big),
    ("razor", Size::Small),
];
const SHAPES: &[(&str, Shape)] = &[
    ("right angle", Shape::Good),
    ("sloping", Shape::Bad),
    ("flat", Shape::Bad),
    ("vertical", Shape::Good),
];

fn hold() -> impl Strategy<Value = HoldFrame> {
    (
        0..KINDS.len(),
        prop::option::of(0..SIZES.len()),
        prop::option::of(0..SHAPES.len()),
    )
        .prop_map(|(k, s, h)| HoldFrame {
            kind: KINDS[k].into(),
            class: HoldClass::Plain,
            size: s.map(|i| Descriptor {
                class: SIZES[i].1,
                text: SIZES[i].0.into(),
                negated: SIZES[i].0.starts_with("not"),
            }),
            shape: h.map(|i| Descriptor {
                class: SHAPES[i].1,
                text: SHAPES[i].0.into(),
                negated: false,
            }),
        })
}

fn frame() -> impl Strategy<Value = MoveFrame> {
    let action = prop::option::of((
        any::<bool>(),
        any::<bool>(),
        prop::option::of(any::<bool>()),
    ))
    .prop_map(|a| {
        a.map(|(big_verb, cross, size)| ActionFrame {
            verb: if cross {
                "cross".into()
            } else {
                "reach".into()
            },
            verb_class: if big_verb { Size::Big } else { Size::Small },
            size: size.map(|b| Descriptor {
                class: if b { Size::Big } else { Size::Small },
                text: if b { "far".into() } else { "small".into() },
                negated: false,
            }),
            is_cross: cross,
        })
    });
    (action, prop::collection::vec(hold(), 0..4), any::<bool>()).prop_map(
        |(action, holds, is_match)| {
            let is_match = is_match || holds.is_empty();
            MoveFrame {
                action,
                holds,
                is_match,
                hybrid: String::new(),
            }
        },
    )
}

const PAIRS: &[(SymbolSetId, SymbolSetId)] = &[
    (SymbolSetId::S4, SymbolSetId::S3),
    (SymbolSetId::S4, SymbolSetId::S2),
    (SymbolSetId::S4, SymbolSetId::S1),
    (SymbolSetId::S3, SymbolSetId::S1),
    (SymbolSetId::S2, SymbolSetId::S1),
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn projection_commutes_with_extraction(f in frame()) {
        for &(fine, coarse) in PAIRS {
            let direct = extract_symbol(&f, coarse).unwrap();
            let projected = project(&extract_symbol(&f, fine).unwrap(), coarse).unwrap();
            prop_assert_eq!(&projected, &direct);
        }
        // S4 -> S2 -> S1 and S4 -> S3 -> S1 agree with S4 -> S1
        let s4 = extract_symbol(&f, SymbolSetId::S4).unwrap();
        let via2 = project(&project(&s4, SymbolSetId::S2).unwrap(), SymbolSetId::S1).unwrap();
        let via3 = project(&project(&s4, SymbolSetId::S3).unwrap(), SymbolSetId::S1).unwrap();
        prop_assert_eq!(&via2, &via3);
        for set in SymbolSetId::ALL {
            prop_assert_eq!(extract_symbol(&f, set).unwrap(), extract_symbol(&f, set).unwrap());
            prop_assert!(!extract_symbol(&f, set).unwrap().text.is_empty());
        }
    }

    #[test]
    fn good_is_a_strict_majority(f in frame()) {
        let pos = f.holds.iter().map(|h| h.size.as_ref().map_or(0, |d| (d.class == Size::Big) as i32) + h.shape.as_ref().map_or(0, |d| (d.class == Shape::Good) as i32)).sum::<i32>();
        let neg = f.holds.iter().map(|h| h.size.as_ref().map_or(0, |d| (d.class == Size::Small) as i32) + h.shape.as_ref().map_or(0, |d| (d.class == Shape::Bad) as i32)).sum::<i32>();
        prop_assert_eq!(quality_booleans(&f).is_good, pos > neg);
    }
}

fn fixture_frames() -> Vec<MoveFrame> {
    let g = default_grammar();
    MOVES
        .lines()
        .filter(|l| !l.starts_with('#'))
        .filter_map(|l| frame_of(l, &g).ok())
        .collect()
}

/// Builds the finer-to-coarser symbol map and checks it is a function.
fn projection_is_a_function(frames: &[MoveFrame], fine: SymbolSetId, coarse: SymbolSetId) -> bool {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for f in frames {
        let Ok(s) = extract_symbol(f, fine) else {
            continue;
        };
        let c = project(&s, coarse).unwrap().text;
        if map
            .insert(s.text.clone(), c.clone())
            .is_some_and(|old| old != c)
        {
            return false;
        }
    }
    true
}

#[test]
fn alphabet_sizes_follow_refinement() {
    let frames = fixture_frames();
    let size = |s| alphabet(&frames, s).len();
    let (s1, s2, s3, s4) = (
        size(SymbolSetId::S1),
        size(SymbolSetId::S2),
        size(SymbolSetId::S3),
        size(SymbolSetId::S4),
    );
    assert!(
        s1 <= s2 && s1 <= s3 && s2 <= s4 && s3 <= s4,
        "{s1} {s2} {s3} {s4}"
    );
    assert!(s1 < s4);
    for &(fine, coarse) in PAIRS {
        assert!(projection_is_a_function(&frames, fine, coarse));
    }
    let counts: usize = alphabet(&frames, SymbolSetId::S1)
        .iter()
        .map(|e| e.count)
        .sum();
    assert_eq!(counts, frames.len());
}

#[test]
fn alphabet_of_one_frame() {
    let g = default_grammar();
    let a = alphabet(&[frame_of("Small Jug", &g).unwrap()], SymbolSetId::S2);
    assert_eq!(a.len(), 1);
    assert_eq!((a[0].symbol.text.as_str(), a[0].count), ("jug-small", 1));
}

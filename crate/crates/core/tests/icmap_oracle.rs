mod common;

use common::oracles;
use routevar_core::chaos::{State3, VariationConfig, DEFAULT_IC_R};
use routevar_core::icmap::{build_map, effect_change, pick_ic, Axis, GridSpec, ICMap, MetricRange};

fn slice(n: usize, s: f64) -> GridSpec {
    GridSpec::slice_through(DEFAULT_IC_R, n, s, Axis::Z)
}

#[test]
fn default_preset_matches_straight_line_oracle() {
    let cfg = VariationConfig::default();
    for n in [1, 2, 10, 30, 60] {
        let got = effect_change(cfg.ic_v, &cfg, n).unwrap();
        let (effect, change) =
            oracles::effect_change(cfg.ic_r.to_array(), cfg.ic_v.to_array(), n, cfg.h);
        assert_eq!(got.effect, effect, "n={n}");
        assert!((got.change - change).abs() < 1e-12, "n={n}");
    }
    assert_eq!(effect_change(DEFAULT_IC_R, &cfg, 30).unwrap().effect, 0);
}

#[test]
fn small_grid_matches_single_calls() {
    let cfg = VariationConfig::default();
    let spec = slice(3, 0.1);
    let map = build_map(spec, &cfg, 30).unwrap();
    assert_eq!(map.cells.len(), 9);
    for (i, cell) in map.cells.iter().enumerate() {
        let (xi, yi) = (i / 3, i % 3);
        let ic = State3::new(
            -13.0 + 0.1 * (xi as f64 - 1.0),
            -12.0 + 0.1 * (yi as f64 - 1.0),
            52.0,
        );
        assert_eq!(cell.ic, ic);
        assert_eq!(*cell, effect_change(ic, &cfg, 30).unwrap());
        let (effect, change) =
            oracles::effect_change(DEFAULT_IC_R.to_array(), ic.to_array(), 30, cfg.h);
        assert_eq!((cell.effect, cell.change), (effect, change));
    }
    assert_eq!(map.cells[map.center_index()].effect, 0);
    let one = build_map(slice(1, 0.1), &cfg, 30).unwrap();
    assert_eq!(one.cells, [effect_change(DEFAULT_IC_R, &cfg, 30).unwrap()]);
}

fn landscape() -> ICMap {
    build_map(slice(50, 0.1), &VariationConfig::default(), 30).unwrap()
}

#[test]
fn landscape_spans_no_change_to_nearly_all() {
    let map = landscape();
    assert_eq!(map.cells.len(), 2500);
    assert!(map.cells.iter().any(|c| c.effect == 0));
    assert!(map.cells.iter().any(|c| c.effect as f64 >= 0.8 * 30.0));
    assert!(map.cells.iter().all(|c| c.effect > 0 || c.change == 0.0));
    assert!(map.cells.iter().all(|c| c.effect <= 30 && c.change <= 29.0));
    assert_eq!(map.cells[map.center_index()].effect, 0);
}

#[test]
fn pick_ic_against_filter_and_recomputation() {
    let map = landscape();
    let cfg = VariationConfig::default();
    let effect = MetricRange::new(0.9 * 30.0, 30.0);
    let picked = pick_ic(&map, effect, MetricRange::everything(), 25);
    assert!(!picked.is_empty());
    for c in &picked {
        let again = effect_change(c.cell.ic, &cfg, 30).unwrap();
        assert!(effect.contains(again.effect as f64));
        assert_eq!(again, c.cell);
    }
    // exhaustive filter oracle over a bounded range pair
    let (e, ch) = (MetricRange::new(10.0, 20.0), MetricRange::new(2.0, 5.0));
    let all = pick_ic(&map, e, ch, usize::MAX);
    let expected: Vec<usize> = map
        .cells
        .iter()
        .enumerate()
        .filter(|(_, c)| (10..=20).contains(&c.effect) && c.change >= 2.0 && c.change <= 5.0)
        .map(|(i, _)| i)
        .collect();
    let mut got: Vec<usize> = all.iter().map(|c| c.index).collect();
    for pair in all.windows(2) {
        assert!(
            pair[0].distance < pair[1].distance
                || (pair[0].distance == pair[1].distance && pair[0].index < pair[1].index)
        );
    }
    got.sort();
    assert_eq!(got, expected);
    let center = pick_ic(
        &map,
        MetricRange::new(0.0, 0.0),
        MetricRange::everything(),
        usize::MAX,
    );
    assert!(center.iter().any(|c| c.index == map.center_index()));
    assert_eq!(
        pick_ic(
            &map,
            MetricRange::everything(),
            MetricRange::everything(),
            7
        )
        .len(),
        7
    );
}

#[test]
fn save_load_round_trip() {
    let map = build_map(slice(10, 0.1), &VariationConfig::default(), 30).unwrap();
    let text = map.to_json();
    let back = ICMap::from_json(&text).unwrap();
    assert_eq!(back, map);
    assert_eq!(back.to_json(), text);
    let truncated = &text[..text.len() / 2];
    assert_eq!(
        ICMap::from_json(truncated).unwrap_err().code(),
        "CorruptFile"
    );
}

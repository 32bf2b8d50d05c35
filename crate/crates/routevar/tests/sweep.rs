use routevar::formats;
use routevar::sweep::{build_map_parallel, build_map_with_threads};
use routevar_core::chaos::{State3, VariationConfig};
use routevar_core::icmap::{build_map, effect_change, pick_ic, Axis, GridSpec, ICMap, MetricRange};

fn bits(map: &ICMap) -> Vec<(u64, u64, u64, usize, u64, bool)> {
    map.cells
        .iter()
        .map(|c| {
            (
                c.ic.x.to_bits(),
                c.ic.y.to_bits(),
                c.ic.z.to_bits(),
                c.effect,
                c.change.to_bits(),
                c.poisoned,
            )
        })
        .collect()
}

#[test]
fn parallel_build_is_bit_identical() {
    let cfg = VariationConfig::default();
    let spec = GridSpec::slice_through(cfg.ic_r, 50, 0.1, Axis::Z);
    let serial = build_map(spec, &cfg, 30).unwrap();
    for threads in [1, 3, 8] {
        let parallel = build_map_with_threads(spec, &cfg, 30, threads).unwrap();
        assert_eq!(bits(&parallel), bits(&serial), "{threads} threads");
        assert_eq!(parallel.to_json(), serial.to_json());
    }
    let cube = GridSpec {
        slice: None,
        n_per_axis: 7,
        ..spec
    };
    assert_eq!(
        bits(&build_map_parallel(cube, &cfg, 20).unwrap()),
        bits(&build_map(cube, &cfg, 20).unwrap())
    );
}

#[test]
fn saved_map_answers_like_the_original() {
    let cfg = VariationConfig::default();
    let spec = GridSpec::slice_through(cfg.ic_r, 100, 0.1, Axis::Z);
    let map = build_map_parallel(spec, &cfg, 30).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.json");
    formats::save_map(&map, &path).unwrap();
    let loaded = formats::load_map(&path).unwrap();
    assert_eq!(loaded, map);

    let queries = [
        (MetricRange::new(0.0, 0.0), MetricRange::everything(), 50),
        (MetricRange::new(27.0, 30.0), MetricRange::everything(), 40),
        (MetricRange::new(10.0, 20.0), MetricRange::new(2.0, 6.0), 25),
        (MetricRange::everything(), MetricRange::everything(), 10_000),
    ];
    for (effect, change, limit) in queries {
        let before = pick_ic(&map, effect, change, limit);
        let after = pick_ic(&loaded, effect, change, limit);
        assert_eq!(before, after);
        // every answer recomputed from scratch
        for c in after.iter().take(20) {
            let fresh = effect_change(c.cell.ic, &cfg, 30).unwrap();
            assert_eq!((fresh.effect, fresh.change), (c.cell.effect, c.cell.change));
            assert!(effect.contains(fresh.effect as f64) && change.contains(fresh.change));
        }
    }
    assert_eq!(
        pick_ic(
            &loaded,
            MetricRange::everything(),
            MetricRange::everything(),
            10_000
        )
        .len(),
        10_000
    );
}

#[test]
fn truncated_file_is_corrupt() {
    let cfg = VariationConfig::default();
    let map = build_map(
        GridSpec::slice_through(State3::new(-13.0, -12.0, 52.0), 5, 0.1, Axis::Z),
        &cfg,
        10,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.json");
    let text = map.to_json();
    std::fs::write(&path, &text[..text.len() - 10]).unwrap();
    let err = formats::load_map(&path).unwrap_err();
    assert_eq!(err.code, "CorruptFile");
    assert_eq!(err.status(), 422);
}

//! File IO for the core formats, plus CSV exports.

use std::fs;
use std::path::Path;

use routevar_core::chaos::{VariationConfig, VariationPlan};
use routevar_core::crdl::{parse_crdl, Route};
use routevar_core::frameparse::{default_grammar, load_grammar, Grammar};
use routevar_core::icmap::ICMap;
use routevar_core::symbolize::{AlphabetEntry, SymbolSetId};
use routevar_core::vomm::VommModel;

use crate::error::{Error, ErrorKind, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Loads a CRDL file; the route id is the file stem.
pub fn read_route(path: &Path) -> Result<Route> {
    let route = parse_crdl(&read_text(path)?).map_err(|e| Error::from(e).with_path(path))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(route.with_id(id))
}

pub fn read_plan(path: &Path) -> Result<VariationPlan> {
    serde_json::from_str(&read_text(path)?).map_err(|e| {
        Error::new(ErrorKind::Domain, "CorruptFile", format!("plan file: {e}")).with_path(path)
    })
}

pub fn read_config(path: &Path) -> Result<VariationConfig> {
    serde_json::from_str(&read_text(path)?).map_err(|e| {
        Error::new(
            ErrorKind::Validation,
            "InvalidConfig",
            format!("config file: {e}"),
        )
        .with_path(path)
    })
}

pub fn load_map(path: &Path) -> Result<ICMap> {
    ICMap::from_json(&read_text(path)?).map_err(|e| Error::from(e).with_path(path))
}

pub fn save_map(map: &ICMap, path: &Path) -> Result<()> {
    let mut text = map.to_json();
    text.push('\n');
    write_text(path, &text)
}

pub fn load_model(path: &Path) -> Result<VommModel> {
    VommModel::from_json(&read_text(path)?).map_err(|e| Error::from(e).with_path(path))
}

pub fn save_model(model: &VommModel, path: &Path) -> Result<()> {
    write_text(path, &model.to_json())
}

/// The bundled grammar, or the one at `path`.
pub fn grammar(path: Option<&Path>) -> Result<Grammar> {
    match path {
        None => Ok(default_grammar()),
        Some(p) => load_grammar(&read_text(p)?).map_err(|e| Error::from(e).with_path(p)),
    }
}

/// One row per cell: `ic_x,ic_y,ic_z,effect,change`. Poisoned cells are
/// written with empty metrics.
pub fn cells_csv(map: &ICMap) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["ic_x", "ic_y", "ic_z", "effect", "change"])
        .expect("in-memory write");
    for cell in &map.cells {
        let (effect, change) = if cell.poisoned {
            (String::new(), String::new())
        } else {
            (cell.effect.to_string(), cell.change.to_string())
        };
        w.write_record([
            cell.ic.x.to_string(),
            cell.ic.y.to_string(),
            cell.ic.z.to_string(),
            effect,
            change,
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// `symbol,set,count`, most frequent first.
pub fn alphabet_csv(entries: &[AlphabetEntry], set: SymbolSetId) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["symbol", "set", "count"])
        .expect("in-memory write");
    for e in entries {
        w.write_record([e.symbol.text.clone(), set.to_string(), e.count.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

#[cfg(test)]
mod tests {
    use super::*;
    use routevar_core::chaos::VariationConfig;
    use routevar_core::icmap::{build_map, Axis, GridSpec};

    #[test]
    fn csv_columns() {
        let cfg = VariationConfig::default();
        let map = build_map(GridSpec::slice_through(cfg.ic_r, 3, 0.1, Axis::Z), &cfg, 10).unwrap();
        let text = cells_csv(&map);
        let mut rows = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(
            rows.headers().unwrap(),
            vec!["ic_x", "ic_y", "ic_z", "effect", "change"]
        );
        let records: Vec<csv::StringRecord> = rows.records().map(|r| r.unwrap()).collect();
        assert_eq!(records.len(), 9);
        let center = &records[map.center_index()];
        assert_eq!(&center[3], "0");
        assert_eq!(center[0].parse::<f64>().unwrap(), cfg.ic_r.x);
    }

    #[test]
    fn crdl_error_carries_line_and_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.crdl");
        fs::write(&path, "---\nR jug\nQ crimp\n").unwrap();
        let err = read_route(&path).unwrap_err();
        assert_eq!(err.code, "BadHandToken");
        assert_eq!(err.detail["line"], 3);
        assert!(err.detail["path"].as_str().unwrap().ends_with("bad.crdl"));
    }
}

//! Free-set descriptors: `separable`, `ppt`, `ppt:{2}`, `pi:{{1,2},{3}}|{{1},{2,3}}`,
//! `hull:<path>` (a JSON file `{"states": [<state file>, ..]}`).

use std::path::Path;

use relent_core::{FreeSet, PartitionSet, SystemLayout};
use serde::Deserialize;

use crate::state_file::StateFile;
use crate::CliError;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HullFile {
    states: Vec<StateFile>,
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Factor indices in `{1,3}` form, 1-based on input.
fn parse_index_set(s: &str, parties: usize) -> Result<Vec<usize>, CliError> {
    let inner = s
        .trim()
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| usage(format!("expected {{i,j,..}}, got {s:?}")))?;
    inner
        .split(',')
        .map(|t| match t.trim().parse::<usize>() {
            Ok(i) if (1..=parties).contains(&i) => Ok(i - 1),
            _ => Err(usage(format!("bad factor index {t:?} for {parties} factors"))),
        })
        .collect()
}

/// `base` resolves relative hull paths (the manifest's directory).
pub fn parse_descriptor(desc: &str, layout: &SystemLayout, base: &Path) -> Result<FreeSet, CliError> {
    let parties = layout.parties();
    if desc == "separable" {
        return Ok(FreeSet::separable(layout.clone()));
    }
    if desc == "ppt" {
        return FreeSet::ppt(layout.clone(), vec![parties - 1]).map_err(usage);
    }
    if let Some(rest) = desc.strip_prefix("ppt:") {
        return FreeSet::ppt(layout.clone(), parse_index_set(rest, parties)?).map_err(usage);
    }
    if let Some(rest) = desc.strip_prefix("pi:") {
        let partitions = PartitionSet::parse(rest, parties).map_err(usage)?;
        return FreeSet::pi_separable(layout.clone(), partitions).map_err(usage);
    }
    if let Some(rest) = desc.strip_prefix("hull:") {
        let path = base.join(rest);
        let text = std::fs::read_to_string(&path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let hull: HullFile = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let vertices = hull.states.iter().map(StateFile::to_density).collect::<Result<Vec<_>, _>>()?;
        if let Some(v) = vertices.iter().find(|v| v.layout() != layout) {
            return Err(usage(format!("hull vertex dims {:?} differ from {:?}", v.layout().dims(), layout.dims())));
        }
        return FreeSet::hull(vertices).map_err(usage);
    }
    Err(usage(format!("unknown free-set descriptor {desc:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptors_round_trip_through_display() {
        let layout = SystemLayout::new(vec![2, 2, 2]).unwrap();
        let here = Path::new(".");
        for d in ["separable", "ppt:{3}", "ppt:{1,2}", "pi:{{1,2},{3}}|{{1},{2,3}}"] {
            assert_eq!(parse_descriptor(d, &layout, here).unwrap().to_string(), d);
        }
        assert_eq!(parse_descriptor("ppt", &layout, here).unwrap().to_string(), "ppt:{3}");
        for bad in ["sep", "ppt:{4}", "ppt:{}", "pi:{{1},{2}}", "hull:/nonexistent.json"] {
            assert!(parse_descriptor(bad, &layout, here).is_err(), "{bad}");
        }
    }
}

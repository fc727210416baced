//! User catalog files.
//!
//! A user catalog is a JSON array of entries with the same fields as the
//! built-in ones; expressions are strings in the expression grammar and
//! unknown fields are rejected:
//!
//! ```json
//! [{
//!   "id": "my-morse", "name": "Morse copy",
//!   "W": "A - B*exp(-x)", "variable": "x",
//!   "domain": {"lo": {"kind": "infinite"}, "hi": {"kind": "infinite"}},
//!   "constraints": ["A > 0", "B > 0"],
//!   "shift": {"param": "A", "sign": -1},
//!   "g": "-a^2", "energy": "A^2 - (A - n*hbar)^2",
//!   "class": "type-II",
//!   "defaults": {"A": 5, "B": 1},
//!   "ranges": {"A": [0.5, 6], "B": [0.2, 3]}
//! }]
//! ```

use std::path::Path;

use super::{CatalogError, Superpotential};

pub fn parse_user_catalog(text: &str) -> Result<Vec<Superpotential>, CatalogError> {
    let entries: Vec<Superpotential> = serde_json::from_str(text).map_err(|e| CatalogError::File(e.to_string()))?;
    for s in &entries {
        if s.shift.sign != 1 && s.shift.sign != -1 {
            return Err(CatalogError::File(format!("{}: shift sign must be 1 or -1", s.id)));
        }
    }
    Ok(entries)
}

pub fn load_user_catalog(path: &Path) -> Result<Vec<Superpotential>, CatalogError> {
    let text = std::fs::read_to_string(path).map_err(|e| CatalogError::File(format!("{}: {e}", path.display())))?;
    parse_user_catalog(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{get, Catalog};

    #[test]
    fn builtin_entries_round_trip_through_json() {
        let morse = get("morse").unwrap();
        let mut copy = morse.clone();
        copy.id = "my-morse".into();
        let text = serde_json::to_string(&vec![copy.clone()]).unwrap();
        assert_eq!(parse_user_catalog(&text).unwrap(), vec![copy]);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v = serde_json::to_value(vec![get("morse").unwrap()]).unwrap();
        v[0]["colour"] = "blue".into();
        let err = parse_user_catalog(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn duplicates_of_builtin_ids_are_rejected() {
        let entries = vec![get("morse").unwrap().clone()];
        assert!(matches!(Catalog::with_extra(entries), Err(CatalogError::DuplicateId(_))));
    }

    #[test]
    fn bad_expressions_are_reported() {
        let mut v = serde_json::to_value(vec![get("morse").unwrap()]).unwrap();
        v[0]["W"] = "A - tanh(".into();
        assert!(parse_user_catalog(&v.to_string()).is_err());
    }
}

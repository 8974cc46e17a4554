//! State files: `{"matrix": [[[re, im] x4] x4]}` (row-major) or
//! `{"family": {...}}`, each with an optional top-level `"depolarize": p`.

use std::path::Path;

use bellkey::linalg::{CMatrix4, C64};
use bellkey::states::{make_family, Family, FamilySpec, TwoQubitState};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    matrix: Option<[[[f64; 2]; 4]; 4]>,
    family: Option<Family>,
    depolarize: Option<f64>,
}

pub fn parse_state(text: &str) -> Result<TwoQubitState, CliError> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("malformed state file: {e}")))?;
    let state = match (file.matrix, file.family) {
        (Some(m), None) => {
            let rho = CMatrix4::from_fn(|i, j| C64::new(m[i][j][0], m[i][j][1]));
            let state = TwoQubitState::from_matrix(rho);
            match file.depolarize {
                Some(p) => state.depolarize(p)?,
                None => state,
            }
        }
        (None, Some(family)) => make_family(&FamilySpec { family, depolarize: file.depolarize })?,
        _ => {
            return Err(CliError::Usage("state file needs exactly one of `matrix` or `family`".into()));
        }
    };
    let report = state.validate();
    if !report.ok {
        return Err(CliError::Invalid(format!("invalid state: {}", report.violations().join("; "))));
    }
    Ok(state)
}

pub fn read_state(path: &Path) -> Result<TwoQubitState, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_state(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_forms() {
        assert!(parse_state(r#"{"family":{"variant":"bell","label":"psi-"}}"#).is_ok());
        assert!(parse_state(r#"{"family":{"variant":"werner","p":0.8},"depolarize":0.9}"#).is_ok());
        assert!(parse_state(r#"{"family":{"variant":"gisin","alpha":0.9,"mu":0.85}}"#).is_ok());
    }

    #[test]
    fn matrix_form() {
        let text = r#"{"matrix":[[[0.25,0],[0,0],[0,0],[0,0]],[[0,0],[0.25,0],[0,0],[0,0]],
                      [[0,0],[0,0],[0.25,0],[0,0]],[[0,0],[0,0],[0,0],[0.25,0]]]}"#;
        let s = parse_state(text).unwrap();
        assert_eq!(s, TwoQubitState::maximally_mixed());
    }

    #[test]
    fn malformed_inputs_are_usage_errors() {
        for text in [
            "not json",
            r#"{}"#,
            r#"{"family":{"variant":"qutrit"}}"#,
            r#"{"matrix":[[1]]}"#,
            r#"{"family":{"variant":"werner","p":0.5},"extra":1}"#,
        ] {
            assert!(matches!(parse_state(text), Err(CliError::Usage(_))), "{text}");
        }
    }

    #[test]
    fn bad_trace_names_invariant() {
        let text = r#"{"matrix":[[[0.225,0],[0,0],[0,0],[0,0]],[[0,0],[0.225,0],[0,0],[0,0]],
                      [[0,0],[0,0],[0.225,0],[0,0]],[[0,0],[0,0],[0,0],[0.225,0]]]}"#;
        match parse_state(text) {
            Err(CliError::Invalid(msg)) => assert!(msg.contains("trace"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }
}

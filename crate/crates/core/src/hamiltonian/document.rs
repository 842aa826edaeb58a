//! JSON document format for chain Hamiltonians.
//!
//! ```json
//! { "d": 2, "N": 3, "boundary": "open",
//!   "terms": [ { "site": 1, "matrix": [[[1.0, 0.0], ...], ...] } ],
//!   "preset": "tfim:g=1" }
//! ```
//!
//! Sites are 1-based in documents. `"scale"` is an optional extension
//! carrying the factor between stored couplings and physical units.

use serde::{Deserialize, Serialize};

use super::{Boundary, ChainHamiltonian, LocalTerm, Preset};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(rename = "N")]
    pub n: usize,
    pub boundary: Boundary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermDocument>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDocument {
    pub site: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl HamiltonianDocument {
    pub fn into_hamiltonian(self) -> Result<ChainHamiltonian> {
        if let Some(name) = &self.preset {
            let preset: Preset = name.parse()?;
            if self.terms.is_some() {
                return Err(Error::Schema("document has both \"preset\" and \"terms\"".into()));
            }
            if let Some(d) = self.d {
                if d != preset.local_dim() {
                    return Err(Error::Validation(format!(
                        "preset {name} has d = {}, document says {d}",
                        preset.local_dim()
                    )));
                }
            }
            if self.scale.is_some() {
                return Err(Error::Schema("\"scale\" is not allowed with a preset".into()));
            }
            return ChainHamiltonian::from_preset(preset, self.n, self.boundary);
        }
        let d = self
            .d
            .ok_or_else(|| Error::Schema("missing field \"d\"".into()))?;
        let dim = d * d;
        let mut terms = Vec::new();
        for t in self.terms.unwrap_or_default() {
            if t.site == 0 {
                return Err(Error::Validation("site indices are 1-based".into()));
            }
            if t.matrix.len() != dim || t.matrix.iter().any(|row| row.len() != dim) {
                return Err(Error::Schema(format!(
                    "matrix for site {} must be {dim}x{dim}",
                    t.site
                )));
            }
            let matrix = CMat::from_fn(dim, dim, |r, c| {
                let [re, im] = t.matrix[r][c];
                C64::new(re, im)
            });
            terms.push(LocalTerm {
                bond: t.site - 1,
                matrix,
            });
        }
        ChainHamiltonian::with_scale(d, self.n, self.boundary, terms, self.scale.unwrap_or(1.0))
    }

    pub fn from_hamiltonian(h: &ChainHamiltonian) -> Self {
        if let Some(p) = h.preset() {
            return HamiltonianDocument {
                d: Some(h.d()),
                n: h.n(),
                boundary: h.boundary(),
                terms: None,
                preset: Some(p.to_string()),
                scale: None,
            };
        }
        let terms = h
            .terms()
            .map(|(bond, m)| TermDocument {
                site: bond + 1,
                matrix: (0..m.nrows())
                    .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                    .collect(),
            })
            .collect();
        HamiltonianDocument {
            d: Some(h.d()),
            n: h.n(),
            boundary: h.boundary(),
            terms: Some(terms),
            preset: None,
            scale: (h.scale() != 1.0).then_some(h.scale()),
        }
    }
}

pub fn parse_hamiltonian(text: &str) -> Result<ChainHamiltonian> {
    let doc: HamiltonianDocument = serde_json::from_str(text)?;
    doc.into_hamiltonian()
}

pub fn serialize_hamiltonian(h: &ChainHamiltonian) -> String {
    serde_json::to_string_pretty(&HamiltonianDocument::from_hamiltonian(h))
        .expect("hamiltonian documents always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::presets::ops;
    use crate::linalg::kron;

    #[test]
    fn preset_document_generates_terms() {
        let h = parse_hamiltonian(r#"{"d": 2, "N": 3, "boundary": "open", "preset": "ising_zz"}"#)
            .unwrap();
        assert_eq!(h.bond_count(), 2);
        let zz = kron(&ops::z(), &ops::z());
        assert_eq!(h.term(0).unwrap(), &zz);
        assert_eq!(h.term(1).unwrap(), &zz);
    }

    #[test]
    fn explicit_terms_round_trip() {
        let text = r#"{"d": 2, "N": 2, "boundary": "open",
            "terms": [{"site": 1, "matrix": [
                [[0.5,0],[0,0],[0,0],[0,0]],
                [[0,0],[-0.5,0],[0,0.25],[0,0]],
                [[0,0],[0,-0.25],[-0.5,0],[0,0]],
                [[0,0],[0,0],[0,0],[0.5,0]]]}]}"#;
        let h = parse_hamiltonian(text).unwrap();
        let again = parse_hamiltonian(&serialize_hamiltonian(&h)).unwrap();
        assert_eq!(h, again);
    }

    #[test]
    fn non_hermitian_entry_is_validation_error() {
        let text = r#"{"d": 2, "N": 2, "boundary": "open",
            "terms": [{"site": 1, "matrix": [
                [[0,0],[0.3,0],[0,0],[0,0]],
                [[0,0],[0,0],[0,0],[0,0]],
                [[0,0],[0,0],[0,0],[0,0]],
                [[0,0],[0,0],[0,0],[0,0]]]}]}"#;
        assert!(matches!(parse_hamiltonian(text), Err(Error::Validation(_))));
    }

    #[test]
    fn malformed_documents_are_schema_errors() {
        for text in [
            "{",
            r#"{"N": 2, "boundary": "open"}"#,
            r#"{"d": 2, "N": 2, "boundary": "sideways"}"#,
            r#"{"d": 2, "N": 2, "boundary": "open", "terms": [{"site": 1, "matrix": [[[0,0]]]}]}"#,
            r#"{"d": 2, "N": 3, "boundary": "open", "preset": "nope"}"#,
        ] {
            assert!(
                matches!(parse_hamiltonian(text), Err(Error::Schema(_))),
                "expected schema error for {text}"
            );
        }
    }
}

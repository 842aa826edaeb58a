//! JSON form of solver output.

use serde::{Deserialize, Serialize};

use super::{BoundReport, MpsSolution, MpsState, SiteTensor};
use crate::error::{Error, Result};
use crate::linalg::C64;

pub const SOLUTION_SCHEMA: &str = "chaindp.mps-solution/1";

/// Tensors are nested as `site → physical index → row → column → [re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDocument {
    pub schema: String,
    pub energy: f64,
    pub dp_energy: f64,
    pub delta: Option<f64>,
    pub eps_rho: f64,
    pub eps_a: f64,
    pub bounds: BoundReport,
    pub bond_dim: usize,
    pub d: usize,
    pub tensors: Vec<Vec<Vec<Vec<[f64; 2]>>>>,
}

impl SolutionDocument {
    pub fn from_solution(s: &MpsSolution) -> Self {
        SolutionDocument {
            schema: SOLUTION_SCHEMA.to_string(),
            energy: s.energy,
            dp_energy: s.dp_energy,
            delta: s.delta,
            eps_rho: s.eps_rho,
            eps_a: s.eps_a,
            bounds: s.bounds,
            bond_dim: s.bond_dim,
            d: s.state.d(),
            tensors: tensors_to_nested(&s.state),
        }
    }

    /// The stored state, validated.
    pub fn state(&self) -> Result<MpsState> {
        let tensors = self
            .tensors
            .iter()
            .enumerate()
            .map(|(k, site)| {
                if site.len() != self.d {
                    return Err(Error::Schema(format!("site {k} has {} matrices, expected {}", site.len(), self.d)));
                }
                let dl = site[0].len();
                let dr = site[0].first().map_or(0, |r| r.len());
                let mut data = vec![C64::new(0.0, 0.0); self.d * dl * dr];
                for (i, m) in site.iter().enumerate() {
                    if m.len() != dl || m.iter().any(|r| r.len() != dr) {
                        return Err(Error::Schema(format!("site {k} matrix {i} is ragged")));
                    }
                    for (a, row) in m.iter().enumerate() {
                        for (b, z) in row.iter().enumerate() {
                            data[a * self.d * dr + i * dr + b] = C64::new(z[0], z[1]);
                        }
                    }
                }
                SiteTensor::new(self.d, dl, dr, data)
            })
            .collect::<Result<Vec<_>>>()?;
        MpsState::new(tensors)
    }
}

fn tensors_to_nested(m: &MpsState) -> Vec<Vec<Vec<Vec<[f64; 2]>>>> {
    m.tensors()
        .iter()
        .map(|t| {
            (0..t.d())
                .map(|i| {
                    (0..t.dl())
                        .map(|a| {
                            (0..t.dr())
                                .map(|b| {
                                    let z = t.get(i, a, b);
                                    [z.re, z.im]
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub fn serialize_solution(s: &MpsSolution) -> String {
    serde_json::to_string_pretty(&SolutionDocument::from_solution(s)).expect("plain data serializes")
}

pub fn parse_solution(text: &str) -> Result<SolutionDocument> {
    let doc: SolutionDocument = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    if doc.schema != SOLUTION_SCHEMA {
        return Err(Error::Schema(format!("unknown schema {:?}", doc.schema)));
    }
    Ok(doc)
}

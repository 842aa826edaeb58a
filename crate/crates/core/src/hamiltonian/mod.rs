//! Nearest-neighbour chain Hamiltonians.
//!
//! A [`ChainHamiltonian`] stores one optional two-site coupling per bond.
//! Couplings are kept with operator norm at most one; the physical
//! Hamiltonian is `scale · Σ_k H_{k,k+1}` and every energy reported by the
//! solvers is multiplied back by [`ChainHamiltonian::scale`].

mod document;
mod fold;
pub mod presets;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermiticity_defect, identity, kron, op_norm, CMat};

pub use document::{parse_hamiltonian, serialize_hamiltonian, HamiltonianDocument};
pub use fold::{fold_basis_index, fold_pbc};
pub use presets::Preset;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const NORM_SLACK: f64 = 1e-9;
pub const DIAGONAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// A two-site coupling on bond `bond` (0-based), acting on sites
/// `(bond, bond + 1 mod N)` in that tensor order.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTerm {
    pub bond: usize,
    pub matrix: CMat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainHamiltonian {
    d: usize,
    n: usize,
    boundary: Boundary,
    terms: BTreeMap<usize, CMat>,
    scale: f64,
    preset: Option<Preset>,
}

impl ChainHamiltonian {
    /// Validated construction from explicit couplings.
    ///
    /// Couplings whose norm lies in `(1, 1 + 1e-9]` are accepted; all terms
    /// are then divided by the largest norm and the factor is folded into
    /// the recorded scale.
    pub fn new(d: usize, n: usize, boundary: Boundary, terms: Vec<LocalTerm>) -> Result<Self> {
        Self::with_scale(d, n, boundary, terms, 1.0)
    }

    pub fn with_scale(
        d: usize,
        n: usize,
        boundary: Boundary,
        terms: Vec<LocalTerm>,
        scale: f64,
    ) -> Result<Self> {
        let map = Self::check_terms(d, n, boundary, terms)?;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Validation(format!("scale must be positive, got {scale}")));
        }
        let mut worst = 0.0f64;
        for (bond, m) in &map {
            let norm = op_norm(m);
            if norm > 1.0 + NORM_SLACK {
                return Err(Error::Validation(format!(
                    "term on site {} has operator norm {norm} > 1",
                    bond + 1
                )));
            }
            worst = worst.max(norm);
        }
        let mut h = ChainHamiltonian {
            d,
            n,
            boundary,
            terms: map,
            scale,
            preset: None,
        };
        if worst > 1.0 {
            h.rescale(worst);
        }
        Ok(h)
    }

    /// Construction from couplings of arbitrary norm; everything is rescaled
    /// to unit maximal norm.
    pub(crate) fn normalized(
        d: usize,
        n: usize,
        boundary: Boundary,
        terms: Vec<LocalTerm>,
        scale: f64,
    ) -> Result<Self> {
        let map = Self::check_terms(d, n, boundary, terms)?;
        let worst = map.values().map(op_norm).fold(0.0f64, f64::max);
        let mut h = ChainHamiltonian {
            d,
            n,
            boundary,
            terms: map,
            scale,
            preset: None,
        };
        if worst > 1.0 {
            h.rescale(worst);
        }
        Ok(h)
    }

    fn check_terms(
        d: usize,
        n: usize,
        boundary: Boundary,
        terms: Vec<LocalTerm>,
    ) -> Result<BTreeMap<usize, CMat>> {
        if d < 2 {
            return Err(Error::Validation(format!("local dimension must be >= 2, got {d}")));
        }
        if n < 2 {
            return Err(Error::Validation(format!("chain length must be >= 2, got {n}")));
        }
        let bonds = bond_count(n, boundary);
        let mut map = BTreeMap::new();
        for LocalTerm { bond, matrix } in terms {
            if bond >= bonds {
                return Err(Error::Validation(format!(
                    "site index {} outside 1..={bonds}",
                    bond + 1
                )));
            }
            if matrix.shape() != (d * d, d * d) {
                return Err(Error::Validation(format!(
                    "term on site {} has shape {:?}, expected {}x{}",
                    bond + 1,
                    matrix.shape(),
                    d * d,
                    d * d
                )));
            }
            if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Validation(format!("term on site {} is not finite", bond + 1)));
            }
            let defect = hermiticity_defect(&matrix);
            if defect > HERMITIAN_TOL {
                return Err(Error::Validation(format!(
                    "term on site {} is not Hermitian (defect {defect:.3e})",
                    bond + 1
                )));
            }
            if map.insert(bond, matrix).is_some() {
                return Err(Error::Validation(format!("duplicate term on site {}", bond + 1)));
            }
        }
        Ok(map)
    }

    fn rescale(&mut self, factor: f64) {
        for m in self.terms.values_mut() {
            *m = m.unscale(factor);
        }
        self.scale *= factor;
    }

    pub fn zero(d: usize, n: usize, boundary: Boundary) -> Result<Self> {
        Self::new(d, n, boundary, Vec::new())
    }

    pub fn from_preset(preset: Preset, n: usize, boundary: Boundary) -> Result<Self> {
        presets::build(preset, n, boundary)
    }

    pub(crate) fn set_preset(&mut self, preset: Preset) {
        self.preset = Some(preset);
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn preset(&self) -> Option<&Preset> {
        self.preset.as_ref()
    }

    pub fn bond_count(&self) -> usize {
        bond_count(self.n, self.boundary)
    }

    /// Sites coupled by `bond`.
    pub fn bond_sites(&self, bond: usize) -> (usize, usize) {
        (bond, (bond + 1) % self.n)
    }

    /// Stored (normalized) coupling on `bond`; `None` means zero.
    pub fn term(&self, bond: usize) -> Option<&CMat> {
        self.terms.get(&bond)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &CMat)> {
        self.terms.iter().map(|(&b, m)| (b, m))
    }

    pub fn local_terms(&self) -> Vec<LocalTerm> {
        self.terms
            .iter()
            .map(|(&bond, m)| LocalTerm {
                bond,
                matrix: m.clone(),
            })
            .collect()
    }

    /// Stored coupling multiplied back to physical units.
    pub fn physical_term(&self, bond: usize) -> Option<CMat> {
        self.terms.get(&bond).map(|m| m.scale(self.scale))
    }

    /// Whether all couplings commute pairwise (within `tol` in operator
    /// norm). Ground states of such chains are MPS of bond dimension `d²`.
    pub fn terms_commute(&self, tol: f64) -> bool {
        let d = self.d;
        let id = identity(d);
        let bonds = self.bond_count();
        if bonds < 2 {
            return true;
        }
        // Only couplings sharing a site can fail to commute.
        for bond in 0..bonds {
            let next = (bond + 1) % bonds;
            if self.boundary == Boundary::Open && next == 0 {
                continue;
            }
            if self.n == 2 {
                // both couplings act on the same pair of sites
                let (Some(a), Some(b)) = (self.term(0), self.term(1)) else {
                    return true;
                };
                let swap = swap_operator(d);
                let b = &swap * b * &swap;
                return op_norm(&(a * &b - &b * a)) <= tol;
            }
            let (Some(a), Some(b)) = (self.term(bond), self.term(next)) else {
                continue;
            };
            let left = kron(a, &id);
            let right = kron(&id, b);
            if op_norm(&(&left * &right - &right * &left)) > tol {
                return false;
            }
        }
        true
    }

    /// Bond dimension sufficient for the ground state of a commuting chain.
    pub fn commuting_bond_dimension(&self) -> usize {
        self.d * self.d
    }
}

pub(crate) fn bond_count(n: usize, boundary: Boundary) -> usize {
    match boundary {
        Boundary::Open => n - 1,
        Boundary::Periodic => n,
    }
}

/// Two-site swap `|a, b⟩ ↦ |b, a⟩`.
pub fn swap_operator(d: usize) -> CMat {
    let mut s = CMat::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            s[(b * d + a, a * d + b)] = crate::linalg::ONE;
        }
    }
    s
}

/// Per-bond real cost tables of a classical chain, `tables[k][i * d + j]`
/// is `h_{k,k+1}(i, j)` in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalChain {
    d: usize,
    n: usize,
    boundary: Boundary,
    tables: Vec<Vec<f64>>,
}

impl ClassicalChain {
    pub fn new(d: usize, n: usize, boundary: Boundary, tables: Vec<Vec<f64>>) -> Result<Self> {
        if d < 1 {
            return Err(Error::Validation("local dimension must be >= 1".into()));
        }
        if n < 2 {
            return Err(Error::Validation(format!("chain length must be >= 2, got {n}")));
        }
        let bonds = bond_count(n, boundary);
        if tables.len() != bonds {
            return Err(Error::Validation(format!(
                "expected {bonds} bond tables, got {}",
                tables.len()
            )));
        }
        for (k, t) in tables.iter().enumerate() {
            if t.len() != d * d {
                return Err(Error::Validation(format!("table {k} has {} entries", t.len())));
            }
            if t.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("table {k} has a non-finite entry")));
            }
        }
        Ok(ClassicalChain {
            d,
            n,
            boundary,
            tables,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }

    #[inline]
    pub fn cost(&self, bond: usize, i: usize, j: usize) -> f64 {
        self.tables[bond][i * self.d + j]
    }

    /// Copy with `c0` added to every entry of one table.
    pub fn shifted(&self, bond: usize, c0: f64) -> Self {
        let mut out = self.clone();
        for x in out.tables[bond].iter_mut() {
            *x += c0;
        }
        out
    }
}

/// Diagonal read-off of a Hamiltonian whose couplings are diagonal in the
/// computational product basis.
pub fn classicalize(h: &ChainHamiltonian) -> Result<ClassicalChain> {
    let d = h.d();
    let bonds = h.bond_count();
    let mut tables = vec![vec![0.0; d * d]; bonds];
    for (bond, m) in h.terms() {
        let mut worst = 0.0f64;
        for r in 0..d * d {
            for c in 0..d * d {
                if r != c {
                    worst = worst.max(m[(r, c)].norm());
                }
            }
        }
        if worst >= DIAGONAL_TOL {
            return Err(Error::NotDiagonal {
                bond,
                magnitude: worst,
            });
        }
        for (idx, slot) in tables[bond].iter_mut().enumerate() {
            *slot = h.scale() * m[(idx, idx)].re;
        }
    }
    ClassicalChain::new(d, h.n(), h.boundary(), tables)
}

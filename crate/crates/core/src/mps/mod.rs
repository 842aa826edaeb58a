//! Matrix product states in the gauge `Σ_i A_i A_i† = 1`, the boundary
//! recursion `ρ_{k+1} = Σ_i A_i† ρ_k A_i` with `ρ_1 = 1`, two-site energies
//! and exact MPS energies.
//!
//! Under this gauge the right environment of every site is the identity,
//! so `⟨χ|H_{k,k+1}|χ⟩` only needs `ρ_k` and the two site tensors.

mod cost;
mod export;
mod solver;
mod verify;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{Boundary, ChainHamiltonian};
use crate::linalg::{hermitian_eigen, neumaier_sum, polar_rows, random_gaussian, row_major, symmetrize, CMat, C64, ZERO};
use crate::nets::IsometryShape;

pub use cost::{estimate_cost, CostReport, CostValue};
pub use export::{parse_solution, serialize_solution, SolutionDocument, SOLUTION_SCHEMA};
pub use solver::{
    bond_dimensions, site_shapes, solve_mps, solve_mps_with_nets, BoundReport, MpsNets, MpsOptions,
    MpsSolution,
};
pub use verify::{
    random_perturbation, verify_overlap_bound, verify_rho_drift, OverlapReport, RhoDriftReport,
    RhoDriftStep,
};

/// Gauge tolerance of the invariants.
pub const GAUGE_TOL: f64 = 1e-9;
/// Relative singular value below which a bond is considered empty.
pub const RANK_TOL: f64 = 1e-12;

/// One site tensor, stored as the row-major `Dl × (d·Dr)` matrix
/// `[A_0 A_1 … A_{d−1}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteTensor {
    d: usize,
    dl: usize,
    dr: usize,
    data: Vec<C64>,
}

impl SiteTensor {
    pub fn new(d: usize, dl: usize, dr: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != d * dl * dr || d == 0 || dl == 0 || dr == 0 {
            return Err(Error::Dimension(format!(
                "site tensor data of length {} does not match d={d}, {dl}x{dr}",
                data.len()
            )));
        }
        Ok(SiteTensor { d, dl, dr, data })
    }

    /// From the `d` matrices `A_i`.
    pub fn from_matrices(mats: &[CMat]) -> Result<Self> {
        let d = mats.len();
        let (dl, dr) = mats.first().map(|m| m.shape()).ok_or_else(|| {
            Error::Dimension("site tensor needs at least one matrix".into())
        })?;
        if mats.iter().any(|m| m.shape() != (dl, dr)) {
            return Err(Error::Dimension("site matrices differ in shape".into()));
        }
        let mut data = vec![ZERO; d * dl * dr];
        for (i, m) in mats.iter().enumerate() {
            for a in 0..dl {
                for b in 0..dr {
                    data[a * d * dr + i * dr + b] = m[(a, b)];
                }
            }
        }
        Self::new(d, dl, dr, data)
    }

    pub fn from_joined(d: usize, m: &CMat) -> Result<Self> {
        if !m.ncols().is_multiple_of(d) {
            return Err(Error::Dimension("joined matrix width is not a multiple of d".into()));
        }
        Self::new(d, m.nrows(), m.ncols() / d, row_major(m))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dl(&self) -> usize {
        self.dl
    }

    pub fn dr(&self) -> usize {
        self.dr
    }

    pub fn shape(&self) -> IsometryShape {
        IsometryShape {
            dl: self.dl,
            dr: self.dr,
        }
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, a: usize, b: usize) -> C64 {
        self.data[a * self.d * self.dr + i * self.dr + b]
    }

    pub fn matrix(&self, i: usize) -> CMat {
        CMat::from_fn(self.dl, self.dr, |a, b| self.get(i, a, b))
    }

    /// `[A_0 … A_{d−1}]` as a `Dl × d·Dr` matrix.
    pub fn joined(&self) -> CMat {
        CMat::from_row_slice(self.dl, self.d * self.dr, &self.data)
    }

    /// `‖Σ_i A_i A_i† − 1‖` in Frobenius norm.
    pub fn gauge_defect(&self) -> f64 {
        let j = self.joined();
        (&j * j.adjoint() - CMat::identity(self.dl, self.dl)).norm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpsState {
    d: usize,
    tensors: Vec<SiteTensor>,
    gauge: bool,
}

impl MpsState {
    /// Validated chain of site tensors; `gauge` is set when every site
    /// satisfies the gauge condition.
    pub fn new(tensors: Vec<SiteTensor>) -> Result<Self> {
        let first = tensors
            .first()
            .ok_or_else(|| Error::Dimension("an MPS needs at least one site".into()))?;
        let d = first.d;
        if first.dl != 1 || tensors.last().map(|t| t.dr) != Some(1) {
            return Err(Error::Dimension("boundary bonds must have dimension 1".into()));
        }
        for (k, pair) in tensors.windows(2).enumerate() {
            if pair[0].dr != pair[1].dl {
                return Err(Error::Dimension(format!(
                    "bond {} joins dimensions {} and {}",
                    k + 1,
                    pair[0].dr,
                    pair[1].dl
                )));
            }
        }
        if tensors.iter().any(|t| t.d != d) {
            return Err(Error::Dimension("sites differ in local dimension".into()));
        }
        let gauge = tensors.iter().all(|t| t.gauge_defect() <= GAUGE_TOL);
        Ok(MpsState { d, tensors, gauge })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn tensors(&self) -> &[SiteTensor] {
        &self.tensors
    }

    pub fn tensor(&self, k: usize) -> &SiteTensor {
        &self.tensors[k]
    }

    pub fn is_canonical(&self) -> bool {
        self.gauge
    }

    /// Bond dimensions `D_1 … D_{N−1}`.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.len() - 1].iter().map(|t| t.dr).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Dense amplitudes, first site most significant.
    pub fn statevector(&self) -> Vec<C64> {
        // rows: partial configurations, columns: open right bond
        let mut acc = CMat::from_element(1, 1, C64::new(1.0, 0.0));
        for t in &self.tensors {
            let mut next = CMat::zeros(acc.nrows() * self.d, t.dr);
            for row in 0..acc.nrows() {
                for i in 0..self.d {
                    for b in 0..t.dr {
                        let mut s = ZERO;
                        for a in 0..t.dl {
                            s += acc[(row, a)] * t.get(i, a, b);
                        }
                        next[(row * self.d + i, b)] = s;
                    }
                }
            }
            acc = next;
        }
        acc.column(0).iter().copied().collect()
    }

    /// `⟨χ|χ⟩` by transfer contraction.
    pub fn norm_sqr(&self) -> f64 {
        overlap(self, self).re
    }
}

/// `⟨a|b⟩` by transfer contraction from the left.
pub fn overlap(a: &MpsState, b: &MpsState) -> C64 {
    let mut e = CMat::from_element(1, 1, C64::new(1.0, 0.0));
    for (ta, tb) in a.tensors.iter().zip(&b.tensors) {
        let mut next = CMat::zeros(ta.dr, tb.dr);
        for i in 0..ta.d {
            next += ta.matrix(i).adjoint() * &e * tb.matrix(i);
        }
        e = next;
    }
    e[(0, 0)]
}

/// A bond whose dimension was reduced by canonicalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BondReduction {
    /// Bond between sites `bond` and `bond + 1` (1-based).
    pub bond: usize,
    pub from: usize,
    pub to: usize,
}

/// Bring an MPS into the gauge `Σ_i A_i A_i† = 1` by thin SVDs sweeping
/// from the last site to the first. Fails if a bond carries numerically
/// zero weight beyond what its shape forces.
pub fn canonicalize(m: &MpsState) -> Result<MpsState> {
    let (out, reductions) = sweep(m)?;
    if let Some(r) = reductions.first() {
        return Err(Error::RankDeficiency {
            bond: r.bond,
            rank: r.to,
            expected: r.from,
        });
    }
    Ok(out)
}

/// As [`canonicalize`], dropping empty bond directions and reporting them.
pub fn canonicalize_truncated(m: &MpsState) -> Result<(MpsState, Vec<BondReduction>)> {
    sweep(m)
}

fn sweep(m: &MpsState) -> Result<(MpsState, Vec<BondReduction>)> {
    let d = m.d;
    let n = m.len();
    let mut tensors = m.tensors.clone();
    let mut reductions = Vec::new();
    for k in (1..n).rev() {
        let t = &tensors[k];
        let joined = t.joined();
        let svd = joined.svd(true, true);
        let u = svd.u.expect("u requested");
        let v_t = svd.v_t.expect("v_t requested");
        let s = &svd.singular_values;
        let s_max = s.iter().copied().fold(0.0, f64::max);
        if s_max == 0.0 {
            return Err(Error::RankDeficiency {
                bond: k,
                rank: 0,
                expected: t.dl.min(d * t.dr),
            });
        }
        // singular values come sorted in decreasing order
        let rank = s.iter().filter(|&&x| x > RANK_TOL * s_max).count();
        let structural = t.dl.min(d * t.dr);
        if rank < structural {
            reductions.push(BondReduction {
                bond: k,
                from: structural,
                to: rank,
            });
        }
        let right = v_t.rows(0, rank).into_owned();
        let us = u.columns(0, rank) * CMat::from_diagonal(&DVector::from_iterator(
            rank,
            s.iter().take(rank).map(|&x| C64::new(x, 0.0)),
        ));
        tensors[k] = SiteTensor::from_joined(d, &right)?;
        let left = &tensors[k - 1];
        let mats: Vec<CMat> = (0..d).map(|i| left.matrix(i) * &us).collect();
        tensors[k - 1] = SiteTensor::from_matrices(&mats)?;
    }
    let first = &mut tensors[0];
    let norm = first.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::RankDeficiency {
            bond: 0,
            rank: 0,
            expected: 1,
        });
    }
    first.data.iter_mut().for_each(|z| *z /= norm);
    reductions.reverse();
    Ok((
        MpsState {
            d,
            tensors,
            gauge: true,
        },
        reductions,
    ))
}

/// `ℛ(A, ρ) = Σ_i A_i† ρ A_i`, symmetrized.
pub fn advance_rho(a: &SiteTensor, rho: &CMat) -> Result<CMat> {
    if rho.shape() != (a.dl, a.dl) {
        return Err(Error::Dimension(format!(
            "boundary state is {}x{}, tensor has left dimension {}",
            rho.nrows(),
            rho.ncols(),
            a.dl
        )));
    }
    let mut out = CMat::zeros(a.dr, a.dr);
    for i in 0..a.d {
        let ai = a.matrix(i);
        out += ai.adjoint() * rho * ai;
    }
    Ok(symmetrize(&out))
}

/// `M = Σ_{ab,cd} ⟨ab|H|cd⟩ A_c B_d B_b† A_a†`, so that the energy of
/// `H` on the two sites is `tr(ρ M)`.
pub fn energy_operator(a: &SiteTensor, b: &SiteTensor, term: &CMat) -> Result<CMat> {
    let d = a.d;
    if b.d != d || a.dr != b.dl || term.shape() != (d * d, d * d) {
        return Err(Error::Dimension("tensors and term do not fit together".into()));
    }
    let bm: Vec<CMat> = (0..d).map(|i| b.matrix(i)).collect();
    let am: Vec<CMat> = (0..d).map(|i| a.matrix(i)).collect();
    let mut m = CMat::zeros(a.dl, a.dl);
    for x in 0..d {
        for c in 0..d {
            // X_{ca} = Σ_{b,d} H_{(a,b),(c,d)} B_d B_b†
            let mut xm = CMat::zeros(a.dr, a.dr);
            for y in 0..d {
                for w in 0..d {
                    let h = term[(x * d + y, c * d + w)];
                    if h != ZERO {
                        xm += (&bm[w] * bm[y].adjoint()) * h;
                    }
                }
            }
            m += &am[c] * xm * am[x].adjoint();
        }
    }
    Ok(m)
}

/// Energy of a two-site term given the boundary state `ρ_k`.
pub fn local_energy(a: &SiteTensor, b: &SiteTensor, rho: &CMat, term: &CMat) -> Result<f64> {
    if rho.shape() != (a.dl, a.dl) {
        return Err(Error::Dimension("boundary state does not match tensor".into()));
    }
    let m = energy_operator(a, b, term)?;
    let e = (rho * m).trace();
    assert!(e.im.abs() < 1e-10 * (1.0 + e.re.abs()), "local energy has imaginary part {}", e.im);
    Ok(e.re)
}

/// `Σ_k ⟨χ|H_{k,k+1}|χ⟩` in physical units, canonicalizing first if
/// needed.
pub fn evaluate_mps_energy(h: &ChainHamiltonian, m: &MpsState) -> Result<f64> {
    if h.boundary() != Boundary::Open {
        return Err(Error::Boundary);
    }
    if m.len() != h.n() || m.d() != h.d() {
        return Err(Error::Dimension(format!(
            "MPS with {} sites of dimension {} for a chain of {} sites of dimension {}",
            m.len(),
            m.d(),
            h.n(),
            h.d()
        )));
    }
    let canonical;
    let m = if m.is_canonical() {
        m
    } else {
        canonical = canonicalize(m)?;
        &canonical
    };
    let mut rho = CMat::from_element(1, 1, C64::new(1.0, 0.0));
    let mut parts = Vec::with_capacity(h.n());
    for k in 0..h.n() - 1 {
        if let Some(term) = h.term(k) {
            parts.push(local_energy(&m.tensors[k], &m.tensors[k + 1], &rho, term)?);
        }
        rho = advance_rho(&m.tensors[k], &rho)?;
    }
    Ok(h.scale() * neumaier_sum(parts))
}

/// Random gauge-satisfying MPS with bond dimensions `min(D, d^k, d^{N−k})`.
pub fn random_mps<R: Rng + ?Sized>(rng: &mut R, d: usize, n: usize, bond_dim: usize) -> MpsState {
    let dims = solver::bond_dimensions(d, n, bond_dim);
    let tensors = (0..n)
        .map(|k| {
            let dl = if k == 0 { 1 } else { dims[k - 1] };
            let dr = if k == n - 1 { 1 } else { dims[k] };
            let g = random_gaussian(rng, dl, d * dr);
            SiteTensor::from_joined(d, &polar_rows(&g)).expect("shape is consistent")
        })
        .collect();
    MpsState::new(tensors).expect("shapes are consistent")
}

/// MPS with i.i.d. complex Gaussian entries (not in gauge).
pub fn random_gaussian_mps<R: Rng + ?Sized>(rng: &mut R, d: usize, n: usize, bond_dim: usize) -> MpsState {
    let tensors = (0..n)
        .map(|k| {
            let dl = if k == 0 { 1 } else { bond_dim };
            let dr = if k == n - 1 { 1 } else { bond_dim };
            SiteTensor::from_joined(d, &random_gaussian(rng, dl, d * dr)).expect("shape")
        })
        .collect();
    MpsState::new(tensors).expect("shapes are consistent")
}

/// Product state as a bond dimension one MPS.
pub fn product_mps(vectors: &[Vec<C64>]) -> Result<MpsState> {
    let tensors = vectors
        .iter()
        .map(|v| SiteTensor::new(v.len(), 1, 1, v.clone()))
        .collect::<Result<Vec<_>>>()?;
    MpsState::new(tensors)
}

/// Valence-bond tensors of the spin-1 chain with projector couplings onto
/// total spin 2, basis `|+1⟩, |0⟩, |−1⟩`, with the boundary spins fixed to
/// the first basis vector; canonicalized.
pub fn aklt_mps(n: usize) -> Result<MpsState> {
    let s = |x: f64| C64::new(x, 0.0);
    let plus = CMat::from_row_slice(2, 2, &[ZERO, s((2.0f64 / 3.0).sqrt()), ZERO, ZERO]);
    let zero = CMat::from_row_slice(2, 2, &[s(-(1.0f64 / 3.0).sqrt()), ZERO, ZERO, s((1.0f64 / 3.0).sqrt())]);
    let minus = CMat::from_row_slice(2, 2, &[ZERO, ZERO, s(-(2.0f64 / 3.0).sqrt()), ZERO]);
    let bulk = [plus, zero, minus];
    let left = CMat::from_row_slice(1, 2, &[s(1.0), ZERO]);
    let right = CMat::from_row_slice(2, 1, &[s(1.0), ZERO]);
    let tensors = (0..n)
        .map(|k| {
            let mats: Vec<CMat> = bulk
                .iter()
                .map(|a| match k {
                    0 => &left * a,
                    _ if k == n - 1 => a * &right,
                    _ => a.clone(),
                })
                .collect();
            SiteTensor::from_matrices(&mats)
        })
        .collect::<Result<Vec<_>>>()?;
    canonicalize(&MpsState::new(tensors)?)
}

/// Embed a site tensor of shape `(Dl, Dr)` into a larger shape `(Dl', Dr')`
/// without changing the state it generates: the original block sits in the
/// top-left corner and `complement` (gauge-satisfying, shape
/// `(Dl' − Dl, Dr' − Dr)`) fills the remaining diagonal block. The last
/// site needs no complement: its extra rows are completed to an
/// orthonormal set. Returns `None` if the shapes do not allow it.
pub fn pad_tensor(a: &SiteTensor, to: IsometryShape, complement: Option<&SiteTensor>) -> Option<SiteTensor> {
    let d = a.d;
    let extra_l = to.dl.checked_sub(a.dl)?;
    let mut mats: Vec<CMat> = (0..d).map(|_| CMat::zeros(to.dl, to.dr)).collect();
    for (i, m) in mats.iter_mut().enumerate() {
        for r in 0..a.dl {
            for c in 0..a.dr {
                m[(r, c)] = a.get(i, r, c);
            }
        }
    }
    if extra_l > 0 && to.dr == 1 {
        // last site: extra rows are any orthonormal completion, they only
        // ever meet zero amplitude from the left
        let joined = a.joined();
        let proj = CMat::identity(d, d) - joined.adjoint() * &joined;
        let (values, vectors) = hermitian_eigen(&proj);
        if extra_l > d - a.dl || values[d - extra_l] < 0.5 {
            return None;
        }
        for r in 0..extra_l {
            let v = vectors.column(d - extra_l + r);
            for (i, m) in mats.iter_mut().enumerate() {
                m[(a.dl + r, 0)] = v[i].conj();
            }
        }
    } else if extra_l > 0 {
        let comp = complement?;
        if comp.d != d || comp.dl != extra_l {
            return None;
        }
        let col0 = a.dr;
        if col0 + comp.dr > to.dr {
            return None;
        }
        for (i, m) in mats.iter_mut().enumerate() {
            for r in 0..comp.dl {
                for c in 0..comp.dr {
                    m[(a.dl + r, col0 + c)] = comp.get(i, r, c);
                }
            }
        }
    }
    SiteTensor::from_matrices(&mats).ok()
}

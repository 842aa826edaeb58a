//! Dynamic programming over nets of site tensors and boundary states.
//!
//! Stage `k` holds the best energy of bonds `0..k` for every pair
//! (tensor of site `k`, boundary state `ρ_k`). A transition to tensor `β`
//! at site `k + 1` costs `tr(ρ_k M_{αβ})` and admits every net point within
//! `ε_ρ` of `ℛ(A_α, ρ_k)` as the next boundary state.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{canonicalize_truncated, evaluate_mps_energy, BondReduction, MpsState, SiteTensor};
use crate::error::{Error, Result};
use crate::hamiltonian::{Boundary, ChainHamiltonian};
use crate::linalg::{dot, HermitianBasis, CMat, C64, ZERO};
use crate::nets::{DensityNet, DensityTarget, EpsilonNet, IsometryNet, IsometryShape, NetConfig};

/// Bond dimensions `D_k = min(D, d^k, d^{N−k})` for `k = 1 … N−1`.
pub fn bond_dimensions(d: usize, n: usize, bond_dim: usize) -> Vec<usize> {
    let pow = |e: usize| {
        let mut p = 1usize;
        for _ in 0..e {
            p = p.saturating_mul(d);
            if p >= bond_dim {
                break;
            }
        }
        p
    };
    (1..n).map(|k| bond_dim.min(pow(k)).min(pow(n - k))).collect()
}

/// Shape of every site tensor for the given bond dimensions.
pub fn site_shapes(dims: &[usize]) -> Vec<IsometryShape> {
    let n = dims.len() + 1;
    (0..n)
        .map(|k| IsometryShape {
            dl: if k == 0 { 1 } else { dims[k - 1] },
            dr: if k == n - 1 { 1 } else { dims[k] },
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct MpsOptions {
    pub bond_dim: usize,
    /// Requested accuracy; sets `ε_ρ = δ/N²` and `ε_A = δ²/(64N³d)` (in
    /// units of the Hamiltonian scale) unless overridden.
    pub delta: Option<f64>,
    pub eps_rho: Option<f64>,
    pub eps_a: Option<f64>,
    pub nets: NetConfig,
    /// Memory allowed for reusing edge weights between stages that share a
    /// term and both nets.
    pub edge_cache_bytes: usize,
}

impl MpsOptions {
    pub fn new(bond_dim: usize) -> Self {
        MpsOptions {
            bond_dim,
            delta: None,
            eps_rho: None,
            eps_a: None,
            nets: NetConfig::default(),
            edge_cache_bytes: 1 << 30,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_epsilons(mut self, eps_rho: f64, eps_a: f64) -> Self {
        self.eps_rho = Some(eps_rho);
        self.eps_a = Some(eps_a);
        self
    }

    pub fn with_nets(mut self, nets: NetConfig) -> Self {
        self.nets = nets;
        self
    }
}

/// Nets used by the solver.
#[derive(Debug, Clone)]
pub struct MpsNets {
    /// One net per site, shaped like that site's tensor.
    pub isometry: Vec<Arc<IsometryNet>>,
    /// Nets for `ρ_2 … ρ_{N−1}` (`ρ_1 = 1` and `ρ_N` is never used).
    pub density: Vec<Arc<DensityNet>>,
    /// Admission radius of the boundary-state constraint.
    pub radius: f64,
}

impl MpsNets {
    /// Build nets for every site shape, sharing equal shapes.
    pub fn build(
        d: usize,
        n: usize,
        bond_dim: usize,
        eps_rho: f64,
        eps_a: f64,
        config: &NetConfig,
    ) -> Result<MpsNets> {
        let dims = bond_dimensions(d, n, bond_dim);
        let mut iso: HashMap<IsometryShape, Arc<IsometryNet>> = HashMap::new();
        let mut isometry = Vec::with_capacity(n);
        for shape in site_shapes(&dims) {
            let net = match iso.get(&shape) {
                Some(net) => net.clone(),
                None => {
                    let net = Arc::new(IsometryNet::build(d, shape, eps_a, config)?);
                    log::info!("isometry net {shape:?} at ε = {eps_a}: {} points", net.len());
                    iso.insert(shape, net.clone());
                    net
                }
            };
            isometry.push(net);
        }
        let mut dens: HashMap<usize, Arc<DensityNet>> = HashMap::new();
        let mut density = Vec::new();
        for &dim in dims.iter().take(n.saturating_sub(2)) {
            let net = match dens.get(&dim) {
                Some(net) => net.clone(),
                None => {
                    let net = Arc::new(DensityNet::build(dim, eps_rho, DensityTarget::UnitTrace, config)?);
                    log::info!("density net D = {dim} at ε = {eps_rho}: {} points", net.len());
                    dens.insert(dim, net.clone());
                    net
                }
            };
            density.push(net);
        }
        Ok(MpsNets {
            isometry,
            density,
            radius: eps_rho,
        })
    }

    pub fn eps_a(&self) -> f64 {
        self.isometry.iter().map(|n| n.epsilon()).fold(0.0, f64::max)
    }
}

/// Error budgets implied by the net radii, in physical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `½N²ε_ρ`.
    pub delta_rho: f64,
    /// `4N^{3/2}√(dε_A)`.
    pub delta_a: f64,
    pub total: f64,
}

impl BoundReport {
    pub fn new(n: usize, d: usize, eps_rho: f64, eps_a: f64, scale: f64) -> Self {
        let n = n as f64;
        let delta_rho = scale * 0.5 * n * n * eps_rho;
        let delta_a = scale * 4.0 * n.powf(1.5) * (d as f64 * eps_a).sqrt();
        BoundReport {
            delta_rho,
            delta_a,
            total: delta_rho + delta_a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpsSolution {
    /// Exact energy of the returned state.
    pub energy: f64,
    /// Optimum of the table, which uses the snapped boundary states.
    pub dp_energy: f64,
    pub state: MpsState,
    pub bond_dim: usize,
    pub delta: Option<f64>,
    pub eps_rho: f64,
    pub eps_a: f64,
    pub bounds: BoundReport,
    pub isometry_net_sizes: Vec<usize>,
    pub density_net_sizes: Vec<usize>,
    /// Reachable (tensor, boundary state) pairs per site.
    pub table_sizes: Vec<usize>,
    /// Transitions dropped because no net point was within `ε_ρ`.
    pub dropped: u64,
    pub bond_reductions: Vec<BondReduction>,
}

/// Net radii for `δ` in physical units.
fn prescribed_epsilons(h: &ChainHamiltonian, delta: f64) -> (f64, f64) {
    let n = h.n() as f64;
    let delta = delta / h.scale();
    let eps_rho = delta / (n * n);
    let eps_a = delta * delta / (64.0 * n.powi(3) * h.d() as f64);
    (eps_rho.min(2.0), eps_a.min(2.0))
}

pub fn solve_mps(h: &ChainHamiltonian, options: &MpsOptions) -> Result<MpsSolution> {
    check_chain(h, options.bond_dim)?;
    let prescribed = match options.delta {
        Some(delta) if delta > 0.0 && delta.is_finite() => Some(prescribed_epsilons(h, delta)),
        Some(delta) => return Err(Error::Validation(format!("delta must be positive, got {delta}"))),
        None => None,
    };
    let eps_rho = options.eps_rho.or(prescribed.map(|p| p.0));
    let eps_a = options.eps_a.or(prescribed.map(|p| p.1));
    let (Some(eps_rho), Some(eps_a)) = (eps_rho, eps_a) else {
        return Err(Error::Validation("give delta or both net radii".into()));
    };
    let nets = MpsNets::build(h.d(), h.n(), options.bond_dim, eps_rho, eps_a, &options.nets)?;
    let mut solution = solve_mps_with_nets(h, &nets, options.edge_cache_bytes)?;
    solution.delta = options.delta;
    Ok(solution)
}

fn check_chain(h: &ChainHamiltonian, bond_dim: usize) -> Result<()> {
    if h.boundary() != Boundary::Open {
        return Err(Error::Boundary);
    }
    if bond_dim == 0 {
        return Err(Error::Validation("bond dimension must be at least 1".into()));
    }
    Ok(())
}

/// Run the table over explicitly given nets.
pub fn solve_mps_with_nets(h: &ChainHamiltonian, nets: &MpsNets, edge_cache_bytes: usize) -> Result<MpsSolution> {
    check_chain(h, 1)?;
    let (d, n) = (h.d(), h.n());
    if nets.isometry.len() != n || nets.density.len() != n.saturating_sub(2) {
        return Err(Error::Dimension(format!(
            "need {n} tensor nets and {} boundary-state nets",
            n.saturating_sub(2)
        )));
    }
    for (k, pair) in nets.isometry.windows(2).enumerate() {
        if pair[0].d() != d || pair[0].shape().dr != pair[1].shape().dl {
            return Err(Error::Dimension(format!("tensor nets of sites {k} and {} do not chain", k + 1)));
        }
    }
    if nets.isometry[0].shape().dl != 1 || nets.isometry[n - 1].shape().dr != 1 {
        return Err(Error::Dimension("boundary tensor nets must have outer dimension 1".into()));
    }
    for (j, net) in nets.density.iter().enumerate() {
        if net.dim() != nets.isometry[j + 1].shape().dl {
            return Err(Error::Dimension(format!("boundary-state net {j} has the wrong dimension")));
        }
    }
    if nets.isometry.iter().any(|net| net.is_empty()) || nets.density.iter().any(|net| net.is_empty()) {
        return Err(Error::EmptyNet);
    }

    let unit = Stage0::new();
    let tensors: Vec<Vec<SiteTensor>> = nets
        .isometry
        .iter()
        .map(|net| {
            (0..net.len())
                .map(|i| {
                    let s = net.shape();
                    SiteTensor::new(d, s.dl, s.dr, net.point(i).to_vec())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let canonical_term: Vec<Option<usize>> = (0..n - 1)
        .map(|k| {
            let t = h.term(k)?;
            (0..=k).find(|&j| h.term(j) == Some(t))
        })
        .collect();

    let mut cache: HashMap<(usize, usize, usize), Arc<Vec<f64>>> = HashMap::new();
    let mut stages: Vec<StageTable> = Vec::with_capacity(n);
    stages.push(StageTable {
        rows: tensors[0].len(),
        cols: 1,
        entries: vec![(0.0, u32::MAX, u32::MAX); tensors[0].len()],
    });
    let mut dropped = 0u64;
    for k in 0..n - 1 {
        let prev = &stages[k];
        let src_net = if k == 0 { None } else { Some(&*nets.density[k - 1]) };
        let dst_net = nets.density.get(k).map(|n| &**n);
        let rho_coords = |r: usize| -> &[f64] {
            match src_net {
                Some(net) => net.coords(r),
                None => &unit.coords,
            }
        };
        // reachable sources, ascending in (α, r)
        let sources: Vec<(u32, u32)> = (0..prev.rows)
            .flat_map(|a| (0..prev.cols).map(move |r| (a as u32, r as u32)))
            .filter(|&(a, r)| prev.get(a as usize, r as usize).0.is_finite())
            .collect();
        let succ: Vec<Vec<u32>> = sources
            .par_iter()
            .map(|&(a, r)| match dst_net {
                Some(net) => {
                    let rho = match src_net {
                        Some(s) => s.matrix(r as usize),
                        None => CMat::from_element(1, 1, C64::new(1.0, 0.0)),
                    };
                    let next = super::advance_rho(&tensors[k][a as usize], &rho).expect("shapes checked");
                    let c = net.basis().coords(&next);
                    net.within(&c, nets.radius).into_iter().map(|i| i as u32).collect()
                }
                None => vec![0],
            })
            .collect();
        dropped += succ.iter().filter(|s| s.is_empty()).count() as u64;

        let dl = tensors[k][0].dl();
        let width = dl * dl;
        let src_len = tensors[k].len();
        let weights: Weights = match canonical_term[k] {
            None => Weights::Zero,
            Some(t) => {
                let bytes = src_len * tensors[k + 1].len() * width * 8;
                let key = (
                    t,
                    Arc::as_ptr(&nets.isometry[k]) as usize,
                    Arc::as_ptr(&nets.isometry[k + 1]) as usize,
                );
                if let Some(w) = cache.get(&key) {
                    Weights::Cached(w.clone())
                } else if bytes <= edge_cache_bytes && shares_later(&canonical_term, nets, k) {
                    let term = h.term(k).expect("term present");
                    let all: Vec<f64> = (0..tensors[k + 1].len())
                        .into_par_iter()
                        .flat_map_iter(|b| column(&tensors[k], &tensors[k + 1][b], term))
                        .collect();
                    let all = Arc::new(all);
                    cache.insert(key, all.clone());
                    Weights::Cached(all)
                } else {
                    Weights::OnTheFly
                }
            }
        };

        let next_cols = dst_net.map_or(1, |net| net.len());
        let term = h.term(k);
        let columns: Vec<Vec<(f64, u32, u32)>> = (0..tensors[k + 1].len())
            .into_par_iter()
            .map(|b| {
                let local;
                let coords: Option<&[f64]> = match &weights {
                    Weights::Zero => None,
                    Weights::Cached(all) => {
                        let stride = src_len * width;
                        Some(&all[b * stride..(b + 1) * stride])
                    }
                    Weights::OnTheFly => {
                        local = column(&tensors[k], &tensors[k + 1][b], term.expect("term present"));
                        Some(&local)
                    }
                };
                let mut best = vec![(f64::INFINITY, u32::MAX, u32::MAX); next_cols];
                for (&(a, r), next) in sources.iter().zip(&succ) {
                    if next.is_empty() {
                        continue;
                    }
                    let w = match coords {
                        None => 0.0,
                        Some(c) => dot(rho_coords(r as usize), &c[a as usize * width..(a as usize + 1) * width]),
                    };
                    let v = prev.get(a as usize, r as usize).0 + w;
                    for &r2 in next {
                        let slot = &mut best[r2 as usize];
                        if v < slot.0 {
                            *slot = (v, a, r);
                        }
                    }
                }
                best
            })
            .collect();
        let rows = columns.len();
        stages.push(StageTable {
            rows,
            cols: next_cols,
            entries: columns.concat(),
        });
        log::debug!("site {} done: {} sources, {} dropped", k + 1, sources.len(), dropped);
    }

    let last = &stages[n - 1];
    let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
    for a in 0..last.rows {
        for r in 0..last.cols {
            let v = last.get(a, r).0;
            if v < best.0 {
                best = (v, a, r);
            }
        }
    }
    if !best.0.is_finite() {
        return Err(Error::EmptyNet);
    }
    let mut path = vec![0usize; n];
    let (mut a, mut r) = (best.1, best.2);
    for k in (0..n).rev() {
        path[k] = a;
        if k > 0 {
            let e = stages[k].get(a, r);
            a = e.1 as usize;
            r = e.2 as usize;
        }
    }
    let chosen: Vec<SiteTensor> = path.iter().enumerate().map(|(k, &a)| tensors[k][a].clone()).collect();
    let raw = MpsState::new(chosen)?;
    let (state, bond_reductions) = canonicalize_truncated(&raw)?;
    let energy = evaluate_mps_energy(h, &state)?;
    let eps_a = nets.eps_a();
    Ok(MpsSolution {
        energy,
        dp_energy: h.scale() * best.0,
        state,
        bond_dim: raw.max_bond_dim(),
        delta: None,
        eps_rho: nets.radius,
        eps_a,
        bounds: BoundReport::new(n, d, nets.radius, eps_a, h.scale()),
        isometry_net_sizes: nets.isometry.iter().map(|n| n.len()).collect(),
        density_net_sizes: nets.density.iter().map(|n| n.len()).collect(),
        table_sizes: stages
            .iter()
            .map(|s| s.entries.iter().filter(|e| e.0.is_finite()).count())
            .collect(),
        dropped,
        bond_reductions,
    })
}

struct Stage0 {
    coords: Vec<f64>,
}

impl Stage0 {
    fn new() -> Self {
        Stage0 {
            coords: HermitianBasis::new(1).coords(&CMat::from_element(1, 1, C64::new(1.0, 0.0))),
        }
    }
}

struct StageTable {
    rows: usize,
    cols: usize,
    /// `(value, previous tensor, previous boundary state)`, row-major.
    entries: Vec<(f64, u32, u32)>,
}

impl StageTable {
    fn get(&self, a: usize, r: usize) -> (f64, u32, u32) {
        self.entries[a * self.cols + r]
    }
}

enum Weights {
    Zero,
    Cached(Arc<Vec<f64>>),
    OnTheFly,
}

/// Whether a later stage reuses this stage's term and nets.
fn shares_later(canonical_term: &[Option<usize>], nets: &MpsNets, k: usize) -> bool {
    (k + 1..canonical_term.len()).any(|j| {
        canonical_term[j] == canonical_term[k]
            && Arc::ptr_eq(&nets.isometry[j], &nets.isometry[k])
            && Arc::ptr_eq(&nets.isometry[j + 1], &nets.isometry[k + 1])
    })
}

/// Coordinates of `M_{αβ}` for every `α`, concatenated.
fn column(src: &[SiteTensor], b: &SiteTensor, term: &CMat) -> Vec<f64> {
    let d = b.d();
    let (mid, dl) = (b.dl(), src[0].dl());
    // X_{ca} = Σ_{x,w} ⟨a x|H|c w⟩ B_w B_x†, stored [c][a][s][t]
    let mut x = vec![ZERO; d * d * mid * mid];
    for c in 0..d {
        for a in 0..d {
            let block = &mut x[(c * d + a) * mid * mid..(c * d + a + 1) * mid * mid];
            for y in 0..d {
                for w in 0..d {
                    let h = term[(a * d + y, c * d + w)];
                    if h == ZERO {
                        continue;
                    }
                    for s in 0..mid {
                        for t in 0..mid {
                            let mut acc = ZERO;
                            for e in 0..b.dr() {
                                acc += b.get(w, s, e) * b.get(y, t, e).conj();
                            }
                            block[s * mid + t] += h * acc;
                        }
                    }
                }
            }
        }
    }
    let basis = HermitianBasis::new(dl);
    let width = dl * dl;
    let mut out = vec![0.0; src.len() * width];
    let mut y = vec![ZERO; d * dl * mid];
    let mut m = vec![ZERO; dl * dl];
    for (alpha, a) in src.iter().enumerate() {
        // Y_a[p][t] = Σ_c Σ_s A_c[p][s] X_{ca}[s][t]
        y.iter_mut().for_each(|z| *z = ZERO);
        for ai in 0..d {
            for c in 0..d {
                let block = &x[(c * d + ai) * mid * mid..(c * d + ai + 1) * mid * mid];
                for p in 0..dl {
                    for s in 0..mid {
                        let v = a.get(c, p, s);
                        if v == ZERO {
                            continue;
                        }
                        for t in 0..mid {
                            y[(ai * dl + p) * mid + t] += v * block[s * mid + t];
                        }
                    }
                }
            }
        }
        // M[p][q] = Σ_a Σ_t Y_a[p][t] conj(A_a[q][t])
        for p in 0..dl {
            for q in 0..dl {
                let mut acc = ZERO;
                for ai in 0..d {
                    for t in 0..mid {
                        acc += y[(ai * dl + p) * mid + t] * a.get(ai, q, t).conj();
                    }
                }
                m[p * dl + q] = acc;
            }
        }
        basis.coords_slice(&m, &mut out[alpha * width..(alpha + 1) * width]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mps::{energy_operator, random_mps};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bond_dimensions_saturate() {
        assert_eq!(bond_dimensions(2, 6, 8), vec![2, 4, 8, 4, 2]);
        assert_eq!(bond_dimensions(2, 4, 2), vec![2, 2, 2]);
        assert_eq!(bond_dimensions(3, 3, 1), vec![1, 1]);
        assert_eq!(bond_dimensions(4, 2, 16), vec![4]);
    }

    #[test]
    fn column_matches_energy_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_mps(&mut rng, 2, 4, 2);
        let g = crate::linalg::random_gaussian(&mut rng, 4, 4);
        let term = &g + g.adjoint();
        let basis = HermitianBasis::new(2);
        let src = vec![m.tensor(1).clone()];
        let got = column(&src, m.tensor(2), &term);
        let want = basis.coords(&energy_operator(m.tensor(1), m.tensor(2), &term).unwrap());
        for (x, y) in got.iter().zip(&want) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    fn coarse() -> NetConfig {
        NetConfig {
            certify_samples: 0,
            ..NetConfig::uncached()
        }
    }

    #[test]
    fn zero_hamiltonian_gives_zero() {
        let h = ChainHamiltonian::zero(2, 4, Boundary::Open).unwrap();
        let options = MpsOptions::new(2).with_epsilons(0.5, 1.8).with_nets(coarse());
        let s = solve_mps(&h, &options).unwrap();
        assert_eq!(s.energy, 0.0);
        assert_eq!(s.dp_energy, 0.0);
    }

    #[test]
    fn product_ansatz_finds_ising_optimum() {
        let h = ChainHamiltonian::from_preset(crate::hamiltonian::Preset::IsingZz, 3, Boundary::Open).unwrap();
        let options = MpsOptions::new(1).with_epsilons(0.5, 0.3).with_nets(coarse());
        let s = solve_mps(&h, &options).unwrap();
        assert!(s.energy <= -2.0 + s.bounds.total);
        assert!(s.energy >= -2.0 - 1e-12);
        assert!(s.state.is_canonical());
    }

    #[test]
    fn small_sandwich() {
        let h = ChainHamiltonian::from_preset(crate::hamiltonian::Preset::Tfim { g: 1.0 }, 4, Boundary::Open).unwrap();
        let options = MpsOptions::new(2).with_epsilons(0.5, 1.6).with_nets(coarse());
        let s = solve_mps(&h, &options).unwrap();
        let exact = crate::oracles::exact_diagonalize(&h).unwrap().ground_energy;
        assert!(s.energy >= exact - 1e-9);
        assert!((s.energy - evaluate_mps_energy(&h, &s.state).unwrap()).abs() < 1e-10);
        assert!((s.energy - s.dp_energy).abs() <= s.bounds.delta_rho + 1e-9);
    }

    #[test]
    fn periodic_chain_is_rejected() {
        let h = ChainHamiltonian::from_preset(crate::hamiltonian::Preset::IsingZz, 4, Boundary::Periodic).unwrap();
        let options = MpsOptions::new(1).with_epsilons(0.5, 0.5).with_nets(coarse());
        assert!(matches!(solve_mps(&h, &options), Err(Error::Boundary)));
    }
}

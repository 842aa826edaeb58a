//! Single-site alternating minimization of the MPS energy, written against
//! dense statevectors so that it shares no code path with the net solver
//! beyond the tensor containers.

use rayon::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{apply_hamiltonian, hilbert_dim, DEFAULT_DIM_CEILING};
use crate::error::{Error, Result};
use crate::hamiltonian::{Boundary, ChainHamiltonian};
use crate::linalg::{hermitian_eigen, symmetrize, CMat, C64, ZERO};
use crate::mps::{bond_dimensions, canonicalize, canonicalize_truncated, MpsState, SiteTensor};

#[derive(Debug, Clone)]
pub struct AlsOptions {
    pub bond_dim: usize,
    pub restarts: usize,
    /// Maximum number of left-right-left sweeps per restart.
    pub sweeps: usize,
    pub seed: u64,
    /// Relative energy change per sweep below which a restart counts as
    /// converged.
    pub tol: f64,
    pub dim_ceiling: u64,
}

impl AlsOptions {
    pub fn new(bond_dim: usize) -> Self {
        AlsOptions {
            bond_dim,
            restarts: 8,
            sweeps: 30,
            seed: 0xa15,
            tol: 1e-10,
            dim_ceiling: DEFAULT_DIM_CEILING,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlsRestart {
    pub seed: u64,
    pub energy: f64,
    pub sweeps: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlsResult {
    pub energy: f64,
    pub state: MpsState,
    pub bond_dim: usize,
    /// Seed of the restart that produced `state`.
    pub seed: u64,
    pub restarts: Vec<AlsRestart>,
    /// Set when the best restart was still moving after the last sweep.
    pub convergence_warning: Option<String>,
}

/// Best of `restarts` single-site sweeping runs from random starts.
pub fn als_baseline(h: &ChainHamiltonian, options: &AlsOptions) -> Result<AlsResult> {
    if h.boundary() != Boundary::Open {
        return Err(Error::Boundary);
    }
    if options.bond_dim == 0 || options.restarts == 0 {
        return Err(Error::Validation("bond dimension and restarts must be positive".into()));
    }
    let dim = hilbert_dim(h.d(), h.n()).unwrap_or(u64::MAX);
    if dim > options.dim_ceiling {
        return Err(Error::Size {
            size: dim,
            ceiling: options.dim_ceiling,
        });
    }
    let runs: Vec<(AlsRestart, MpsState)> = (0..options.restarts)
        .into_par_iter()
        .map(|r| {
            let seed = options.seed.wrapping_add(r as u64);
            run(h, options, seed)
        })
        .collect::<Result<_>>()?;
    let (best, state) = runs
        .iter()
        .min_by(|a, b| a.0.energy.total_cmp(&b.0.energy))
        .map(|(r, s)| (r.clone(), s.clone()))
        .expect("at least one restart");
    let convergence_warning = (!best.converged).then(|| {
        format!(
            "relative energy change above {} after {} sweeps",
            options.tol, options.sweeps
        )
    });
    Ok(AlsResult {
        energy: best.energy,
        state,
        bond_dim: options.bond_dim,
        seed: best.seed,
        restarts: runs.into_iter().map(|(r, _)| r).collect(),
        convergence_warning,
    })
}

fn run(h: &ChainHamiltonian, options: &AlsOptions, seed: u64) -> Result<(AlsRestart, MpsState)> {
    let (d, n) = (h.d(), h.n());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = bond_dimensions(d, n, options.bond_dim);
    let tensors = (0..n)
        .map(|k| {
            let dl = if k == 0 { 1 } else { dims[k - 1] };
            let dr = if k == n - 1 { 1 } else { dims[k] };
            SiteTensor::from_joined(d, &crate::linalg::random_gaussian(&mut rng, dl, d * dr))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut state = canonicalize(&MpsState::new(tensors)?)?;
    let mut energy = f64::INFINITY;
    let order: Vec<usize> = (0..n).chain((0..n.saturating_sub(1)).rev()).collect();
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < options.sweeps {
        let before = energy;
        for &k in &order {
            let (next, e) = update_site(h, &state, k)?;
            // each update minimizes over a space containing the current
            // tensor, so the energy cannot rise
            assert!(
                e <= energy + 1e-9 * (1.0 + energy.abs()),
                "local update raised the energy from {energy} to {e}"
            );
            state = next;
            energy = e.min(energy);
        }
        sweeps += 1;
        if (before - energy).abs() <= options.tol * energy.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    Ok((
        AlsRestart {
            seed,
            energy,
            sweeps,
            converged,
        },
        state,
    ))
}

/// Minimize over the tensor of site `k` with every other tensor fixed.
fn update_site(h: &ChainHamiltonian, state: &MpsState, k: usize) -> Result<(MpsState, f64)> {
    let (d, n) = (state.d(), state.len());
    let t = state.tensor(k);
    let (dl, dr) = (t.dl(), t.dr());
    let left = contract_left(state, k);
    let right = contract_right(state, k);
    let (nl, nr) = (left.nrows(), right.ncols());
    let m = dl * d * dr;
    let dim = nl * d * nr;
    // column x = (a, i, b) is the state with site k replaced by e_x
    let mut phi = CMat::zeros(dim, m);
    for a in 0..dl {
        for i in 0..d {
            for b in 0..dr {
                let x = a * d * dr + i * dr + b;
                for l in 0..nl {
                    let la = left[(l, a)];
                    if la == ZERO {
                        continue;
                    }
                    for r in 0..nr {
                        phi[((l * d + i) * nr + r, x)] = la * right[(b, r)];
                    }
                }
            }
        }
    }
    let mut hphi = CMat::zeros(dim, m);
    for x in 0..m {
        let col: Vec<C64> = phi.column(x).iter().copied().collect();
        for (row, v) in apply_hamiltonian(h, &col).into_iter().enumerate() {
            hphi[(row, x)] = v;
        }
    }
    let heff = symmetrize(&(phi.adjoint() * &hphi));
    let neff = symmetrize(&(phi.adjoint() * &phi));
    // whiten the norm matrix, dropping its kernel
    let (nvals, nvecs) = hermitian_eigen(&neff);
    let top = nvals.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..m).filter(|&j| nvals[j] > 1e-12 * top).collect();
    let w = CMat::from_fn(m, keep.len(), |r, c| nvecs[(r, keep[c])] / nvals[keep[c]].sqrt());
    let reduced = symmetrize(&(w.adjoint() * &heff * &w));
    let (vals, vecs) = hermitian_eigen(&reduced);
    let coeffs = &w * vecs.column(0);
    let tensor = SiteTensor::new(d, dl, dr, coeffs.iter().copied().collect())?;
    let mut tensors = state.tensors().to_vec();
    tensors[k] = tensor;
    debug_assert_eq!(n, tensors.len());
    // a degenerate local optimum may leave a bond direction unused; the
    // state is unchanged when that direction is dropped
    let (next, _) = canonicalize_truncated(&MpsState::new(tensors)?)?;
    Ok((next, vals[0]))
}

/// Amplitudes of sites `0..k` with the open bond as columns.
fn contract_left(state: &MpsState, k: usize) -> CMat {
    let d = state.d();
    let mut acc = CMat::from_element(1, 1, C64::new(1.0, 0.0));
    for t in &state.tensors()[..k] {
        let mut next = CMat::zeros(acc.nrows() * d, t.dr());
        for row in 0..acc.nrows() {
            for i in 0..d {
                for b in 0..t.dr() {
                    let mut s = ZERO;
                    for a in 0..t.dl() {
                        s += acc[(row, a)] * t.get(i, a, b);
                    }
                    next[(row * d + i, b)] = s;
                }
            }
        }
        acc = next;
    }
    acc
}

/// Amplitudes of sites `k+1..N` with the open bond as rows.
fn contract_right(state: &MpsState, k: usize) -> CMat {
    let d = state.d();
    let mut acc = CMat::from_element(1, 1, C64::new(1.0, 0.0));
    for t in state.tensors()[k + 1..].iter().rev() {
        let mut next = CMat::zeros(t.dl(), d * acc.ncols());
        for a in 0..t.dl() {
            for i in 0..d {
                for col in 0..acc.ncols() {
                    let mut s = ZERO;
                    for b in 0..t.dr() {
                        s += t.get(i, a, b) * acc[(b, col)];
                    }
                    next[(a, i * acc.ncols() + col)] = s;
                }
            }
        }
        acc = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Preset;
    use crate::oracles::exact_diagonalize;

    #[test]
    fn full_rank_reaches_ground_state() {
        let h = ChainHamiltonian::from_preset(Preset::Tfim { g: 1.0 }, 4, Boundary::Open).unwrap();
        let r = als_baseline(&h, &AlsOptions::new(4)).unwrap();
        let exact = exact_diagonalize(&h).unwrap().ground_energy;
        assert!((r.energy - exact).abs() < 1e-7, "{} vs {exact}", r.energy);
    }

    #[test]
    fn zero_hamiltonian() {
        let h = ChainHamiltonian::zero(2, 4, Boundary::Open).unwrap();
        let r = als_baseline(&h, &AlsOptions::new(2)).unwrap();
        assert!(r.energy.abs() < 1e-12);
    }

    #[test]
    fn energy_matches_state() {
        let h = ChainHamiltonian::from_preset(Preset::Heisenberg, 5, Boundary::Open).unwrap();
        let r = als_baseline(&h, &AlsOptions::new(2)).unwrap();
        let e = crate::mps::evaluate_mps_energy(&h, &r.state).unwrap();
        assert!((r.energy - e).abs() < 1e-9);
    }
}

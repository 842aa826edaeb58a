//! δ-optimal product states by dynamic programming over a pure-state net.
//!
//! With every site restricted to the same net of projectors `{P_α}`, the
//! bond energy `⟨ψ_α ψ_β|H|ψ_α ψ_β⟩ = tr[H (P_α ⊗ P_β)]` becomes the
//! bilinear form `u_α·G u_β` in Hermitian-basis coordinates `u`, and the
//! chain is solved exactly over the net like a classical chain.
//!
//! The minimization over `α` for each `β` prunes whole clusters of net
//! points using `u_α·w ≥ c·w − r‖w‖` for a cluster with centre `c` and
//! radius `r`; this is exact, only the order of work changes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{Boundary, ChainHamiltonian};
use crate::linalg::{dot, kron, neumaier_sum, CMat, HermitianBasis, C64};
use crate::nets::{EpsilonNet, NetConfig, StateNet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductState {
    vectors: Vec<Vec<C64>>,
}

impl ProductState {
    pub fn new(vectors: Vec<Vec<C64>>) -> Result<Self> {
        for v in &vectors {
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::Norm(norm));
            }
        }
        Ok(ProductState { vectors })
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Computational basis state `|i_1 … i_N⟩`.
    pub fn basis(d: usize, configuration: &[usize]) -> Self {
        let vectors = configuration
            .iter()
            .map(|&i| {
                let mut v = vec![C64::new(0.0, 0.0); d];
                v[i] = C64::new(1.0, 0.0);
                v
            })
            .collect();
        ProductState { vectors }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanFieldSolution {
    /// Energy of `state`, re-evaluated directly.
    pub energy: f64,
    /// Optimum found by the dynamic program.
    pub dp_energy: f64,
    pub state: ProductState,
    /// Net index chosen at every site.
    pub configuration: Vec<usize>,
    pub delta: f64,
    pub net_epsilon: f64,
    pub net_size: usize,
    /// Reachable table entries per site.
    pub table_stats: Vec<usize>,
}

fn two_site_expectation(term: &CMat, a: &[C64], b: &[C64]) -> C64 {
    let d = a.len();
    let mut psi = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            psi[i * d + j] = a[i] * b[j];
        }
    }
    let mut total = C64::new(0.0, 0.0);
    for r in 0..d * d {
        let row: C64 = (0..d * d).map(|c| term[(r, c)] * psi[c]).sum();
        total += psi[r].conj() * row;
    }
    total
}

/// Sum of two-site expectation values, including the wrap bond for
/// periodic chains.
pub fn evaluate_product_energy(h: &ChainHamiltonian, s: &ProductState) -> Result<f64> {
    if s.len() != h.n() {
        return Err(Error::Dimension(format!(
            "product state has {} sites, chain has {}",
            s.len(),
            h.n()
        )));
    }
    if let Some(v) = s.vectors.iter().find(|v| v.len() != h.d()) {
        return Err(Error::Dimension(format!(
            "site vector of length {}, local dimension is {}",
            v.len(),
            h.d()
        )));
    }
    let parts = h.terms().map(|(bond, term)| {
        let (i, j) = h.bond_sites(bond);
        two_site_expectation(term, &s.vectors[i], &s.vectors[j]).re
    });
    Ok(h.scale() * neumaier_sum(parts))
}

/// `ε = δ / (2N·scale)`: with stored couplings of norm at most one, each
/// bond moves by at most twice the trace distance per site, so the net
/// optimum is within `δ` of the product-state optimum in physical units.
pub fn mean_field_epsilon(h: &ChainHamiltonian, delta: f64) -> f64 {
    delta / (2.0 * h.n() as f64 * h.scale())
}

pub fn solve_mean_field(h: &ChainHamiltonian, delta: f64) -> Result<MeanFieldSolution> {
    solve_mean_field_with_config(h, delta, &NetConfig::default())
}

pub fn solve_mean_field_with_config(
    h: &ChainHamiltonian,
    delta: f64,
    config: &NetConfig,
) -> Result<MeanFieldSolution> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Validation(format!("delta must be positive, got {delta}")));
    }
    let eps = mean_field_epsilon(h, delta).min(2.0);
    let net = StateNet::build(h.d(), eps, config)?;
    solve_mean_field_on_net(h, &net, delta)
}

/// Exact optimum over product states drawn from `net`.
pub fn solve_mean_field_on_net(h: &ChainHamiltonian, net: &StateNet, delta: f64) -> Result<MeanFieldSolution> {
    if net.d() != h.d() {
        return Err(Error::Dimension(format!(
            "net over C^{} for a chain with d = {}",
            net.d(),
            h.d()
        )));
    }
    if net.is_empty() {
        return Err(Error::EmptyNet);
    }
    let problem = Problem::new(h, net);
    let n = h.n();
    let (dp_value, configuration, table_stats) = match h.boundary() {
        Boundary::Open => {
            let run = problem.run(None);
            let last = argmin(&run.energies[n - 1]);
            (
                run.energies[n - 1][last],
                backtrack(&run.backpointers, last),
                run.reachable(),
            )
        }
        Boundary::Periodic => {
            let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
            for first in 0..net.len() {
                let run = problem.run(Some(first));
                let totals: Vec<f64> = (0..net.len())
                    .map(|a| run.energies[n - 1][a] + problem.cost(n - 1, a, first))
                    .collect();
                let last = argmin(&totals);
                let config = backtrack(&run.backpointers, last);
                let better = best.as_ref().is_none_or(|(v, c, _)| {
                    totals[last] < *v || (totals[last] == *v && config.iter().rev().lt(c.iter().rev()))
                });
                if better {
                    best = Some((totals[last], config, run.reachable()));
                }
            }
            best.expect("net is non-empty")
        }
    };
    let state = ProductState {
        vectors: configuration.iter().map(|&a| net.point(a).to_vec()).collect(),
    };
    let energy = evaluate_product_energy(h, &state)?;
    Ok(MeanFieldSolution {
        energy,
        dp_energy: h.scale() * dp_value,
        state,
        configuration,
        delta,
        net_epsilon: net.epsilon(),
        net_size: net.len(),
        table_stats,
    })
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

fn backtrack(backpointers: &[Vec<u32>], last: usize) -> Vec<usize> {
    let n = backpointers.len();
    let mut config = vec![0; n];
    config[n - 1] = last;
    for k in (1..n).rev() {
        config[k - 1] = backpointers[k][config[k]] as usize;
    }
    config
}

struct Run {
    energies: Vec<Vec<f64>>,
    backpointers: Vec<Vec<u32>>,
}

impl Run {
    fn reachable(&self) -> Vec<usize> {
        self.energies
            .iter()
            .map(|e| e.iter().filter(|x| x.is_finite()).count())
            .collect()
    }
}

/// Net coordinates, per-bond coupling forms and the cluster tree.
struct Problem {
    n: usize,
    /// `len × m` Hermitian coordinates of the net projectors.
    u: Vec<f64>,
    m: usize,
    len: usize,
    /// Per bond, `m × m` row-major `G`; `None` for an absent coupling.
    forms: Vec<Option<Vec<f64>>>,
    clusters: Vec<Cluster>,
}

struct Cluster {
    members: Vec<u32>,
    centre: Vec<f64>,
    radius: f64,
}

impl Problem {
    fn new(h: &ChainHamiltonian, net: &StateNet) -> Self {
        let d = h.d();
        let basis = HermitianBasis::new(d);
        let m = d * d;
        let len = net.len();
        let mut u = Vec::with_capacity(len * m);
        for p in net.points() {
            let proj = CMat::from_fn(d, d, |r, c| p[r] * p[c].conj());
            u.extend(basis.coords(&proj));
        }
        let elements: Vec<CMat> = (0..m)
            .map(|k| {
                let mut e = vec![0.0; m];
                e[k] = 1.0;
                basis.matrix(&e)
            })
            .collect();
        let forms = (0..h.bond_count())
            .map(|bond| {
                h.term(bond).map(|term| {
                    let mut g = vec![0.0; m * m];
                    for a in 0..m {
                        for b in 0..m {
                            let k = kron(&elements[a], &elements[b]);
                            g[a * m + b] = (term * k).trace().re;
                        }
                    }
                    g
                })
            })
            .collect();
        let leaf = ((len as f64).sqrt().ceil() as usize).max(16);
        let mut clusters = Vec::new();
        split((0..len as u32).collect(), &u, m, leaf, &mut clusters);
        Problem {
            n: h.n(),
            u,
            m,
            len,
            forms,
            clusters,
        }
    }

    fn coords(&self, a: usize) -> &[f64] {
        &self.u[a * self.m..(a + 1) * self.m]
    }

    fn cost(&self, bond: usize, a: usize, b: usize) -> f64 {
        match &self.forms[bond] {
            None => 0.0,
            Some(g) => dot(self.coords(a), &self.apply(g, b)),
        }
    }

    /// `G u_b`.
    fn apply(&self, g: &[f64], b: usize) -> Vec<f64> {
        let ub = self.coords(b);
        (0..self.m).map(|r| dot(&g[r * self.m..(r + 1) * self.m], ub)).collect()
    }

    fn run(&self, first: Option<usize>) -> Run {
        let mut energies = Vec::with_capacity(self.n);
        let mut backpointers = Vec::with_capacity(self.n);
        let start = match first {
            None => vec![0.0; self.len],
            Some(a) => {
                let mut e = vec![f64::INFINITY; self.len];
                e[a] = 0.0;
                e
            }
        };
        energies.push(start);
        backpointers.push(vec![0; self.len]);
        for bond in 0..self.n - 1 {
            let prev = &energies[bond];
            let (e, b) = self.step(bond, prev);
            energies.push(e);
            backpointers.push(b);
        }
        Run {
            energies,
            backpointers,
        }
    }

    /// `E'(β) = min_α E(α) + u_α·G u_β`, ties to the lowest `α`.
    fn step(&self, bond: usize, prev: &[f64]) -> (Vec<f64>, Vec<u32>) {
        let Some(g) = &self.forms[bond] else {
            let a = argmin(prev);
            return (vec![prev[a]; self.len], vec![a as u32; self.len]);
        };
        let cluster_min: Vec<f64> = self
            .clusters
            .iter()
            .map(|c| c.members.iter().map(|&a| prev[a as usize]).fold(f64::INFINITY, f64::min))
            .collect();
        let results: Vec<(f64, u32)> = (0..self.len)
            .into_par_iter()
            .map(|b| {
                let w = self.apply(g, b);
                let w_norm = dot(&w, &w).sqrt();
                let mut order: Vec<(f64, usize)> = self
                    .clusters
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| cluster_min[*i].is_finite())
                    .map(|(i, c)| {
                        let lb = cluster_min[i] + dot(&c.centre, &w) - c.radius * w_norm;
                        (lb - 1e-12 * (1.0 + lb.abs()), i)
                    })
                    .collect();
                order.sort_by(|x, y| x.0.total_cmp(&y.0));
                let mut best = (f64::INFINITY, u32::MAX);
                for (lb, i) in order {
                    if lb > best.0 {
                        break;
                    }
                    for &a in &self.clusters[i].members {
                        let e = prev[a as usize];
                        if !e.is_finite() {
                            continue;
                        }
                        let v = e + dot(self.coords(a as usize), &w);
                        if v < best.0 || (v == best.0 && a < best.1) {
                            best = (v, a);
                        }
                    }
                }
                best
            })
            .collect();
        (results.iter().map(|r| r.0).collect(), results.iter().map(|r| r.1).collect())
    }
}

/// Median splits along the widest coordinate until clusters hold at most
/// `leaf` points.
fn split(members: Vec<u32>, u: &[f64], m: usize, leaf: usize, out: &mut Vec<Cluster>) {
    let coord = |a: u32, k: usize| u[a as usize * m + k];
    if members.len() <= leaf {
        let mut centre = vec![0.0; m];
        for &a in &members {
            for (k, c) in centre.iter_mut().enumerate() {
                *c += coord(a, k);
            }
        }
        centre.iter_mut().for_each(|c| *c /= members.len() as f64);
        let radius = members
            .iter()
            .map(|&a| (0..m).map(|k| (coord(a, k) - centre[k]).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        // guard the bound against rounding in the centre
        out.push(Cluster {
            members,
            centre,
            radius: radius * (1.0 + 1e-12) + 1e-15,
        });
        return;
    }
    let widest = (0..m)
        .max_by(|&x, &y| {
            let spread = |k: usize| {
                let (lo, hi) = members
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| {
                        (lo.min(coord(a, k)), hi.max(coord(a, k)))
                    });
                hi - lo
            };
            spread(x).total_cmp(&spread(y))
        })
        .expect("m >= 1");
    let mut sorted = members;
    sorted.sort_by(|&a, &b| coord(a, widest).total_cmp(&coord(b, widest)).then(a.cmp(&b)));
    let right = sorted.split_off(sorted.len() / 2);
    split(sorted, u, m, leaf, out);
    split(right, u, m, leaf, out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{LocalTerm, Preset};
    use crate::oracles::{product_statevector, statevector_expectation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quick() -> NetConfig {
        NetConfig {
            certify_samples: 0,
            ..NetConfig::uncached()
        }
    }

    #[test]
    fn basis_state_energy() {
        let h = ChainHamiltonian::from_preset(Preset::IsingZz, 3, Boundary::Open).unwrap();
        let s = ProductState::basis(2, &[0, 1, 0]);
        assert_eq!(evaluate_product_energy(&h, &s).unwrap(), -2.0);
        let zero = ChainHamiltonian::zero(2, 3, Boundary::Open).unwrap();
        assert_eq!(evaluate_product_energy(&zero, &s).unwrap(), 0.0);
    }

    #[test]
    fn dimension_errors() {
        let h = ChainHamiltonian::from_preset(Preset::IsingZz, 3, Boundary::Open).unwrap();
        assert!(matches!(
            evaluate_product_energy(&h, &ProductState::basis(2, &[0, 1])),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            evaluate_product_energy(&h, &ProductState::basis(3, &[0, 1, 2])),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn matches_statevector_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for boundary in [Boundary::Open, Boundary::Periodic] {
            let terms = (0..5)
                .filter(|&k| boundary == Boundary::Periodic || k < 4)
                .map(|bond| {
                    let g = crate::linalg::random_gaussian(&mut rng, 4, 4);
                    LocalTerm {
                        bond,
                        matrix: (&g + g.adjoint()).scale(0.1),
                    }
                })
                .collect();
            let h = ChainHamiltonian::new(2, 5, boundary, terms).unwrap();
            let vectors: Vec<Vec<C64>> =
                (0..5).map(|_| crate::linalg::random_unit_vector(&mut rng, 2)).collect();
            let psi = product_statevector(&vectors);
            let s = ProductState::new(vectors).unwrap();
            let direct = evaluate_product_energy(&h, &s).unwrap();
            assert!((direct - statevector_expectation(&h, &psi).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn ising_reaches_classical_optimum() {
        let h = ChainHamiltonian::from_preset(Preset::IsingZz, 3, Boundary::Open).unwrap();
        let s = solve_mean_field_with_config(&h, 0.2, &quick()).unwrap();
        assert!(s.energy <= -2.0 + 0.2);
        assert!((s.energy - s.dp_energy).abs() < 1e-10);
    }

    #[test]
    fn zero_hamiltonian_gives_zero() {
        let h = ChainHamiltonian::zero(2, 4, Boundary::Periodic).unwrap();
        let s = solve_mean_field_with_config(&h, 1.0, &quick()).unwrap();
        assert_eq!(s.energy, 0.0);
    }

    #[test]
    fn pruned_step_matches_brute_force() {
        let h = ChainHamiltonian::from_preset(Preset::Heisenberg, 3, Boundary::Open).unwrap();
        let net = StateNet::build(2, 0.3, &quick()).unwrap();
        let p = Problem::new(&h, &net);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let prev: Vec<f64> = (0..net.len()).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        let (e, b) = p.step(0, &prev);
        for beta in (0..net.len()).step_by(7) {
            let mut best = (f64::INFINITY, 0);
            for (a, &pa) in prev.iter().enumerate() {
                let v = pa + p.cost(0, a, beta);
                if v < best.0 {
                    best = (v, a);
                }
            }
            assert!((e[beta] - best.0).abs() < 1e-12);
            assert_eq!(b[beta] as usize, best.1);
        }
    }
}

//! Independent ground-truth engines: dense exact diagonalization, a
//! matrix-free Lanczos eigensolver, exhaustive classical search, dense
//! statevector expectations, a single-site alternating MPS baseline and a
//! coordinate-descent search for the best product state.

mod als;
mod product;

use nalgebra::{DMatrix, DVector};

use crate::classical::ClassicalSolution;
use crate::error::{Error, Result};
use crate::hamiltonian::{ChainHamiltonian, ClassicalChain};
use crate::linalg::{CMat, C64, ZERO};

pub use als::{als_baseline, AlsOptions, AlsRestart, AlsResult};
pub use product::{product_state_optimum, ProductOptimum};

pub const DEFAULT_DIM_CEILING: u64 = 4096;
pub const EXHAUSTIVE_CEILING: u64 = 1_000_000;

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub ground_energy: f64,
    pub ground_vector: Vec<C64>,
    /// `E₁ − E₀`, zero for a degenerate ground level.
    pub gap: f64,
}

/// `d^N`, or `None` on overflow.
pub fn hilbert_dim(d: usize, n: usize) -> Option<u64> {
    (d as u64).checked_pow(n as u32)
}

fn checked_dim(h: &ChainHamiltonian, ceiling: u64) -> Result<usize> {
    let size = hilbert_dim(h.d(), h.n()).unwrap_or(u64::MAX);
    if size > ceiling {
        return Err(Error::Size { size, ceiling });
    }
    Ok(size as usize)
}

/// `H|ψ⟩` by applying every coupling directly to the amplitudes.
pub fn apply_hamiltonian(h: &ChainHamiltonian, psi: &[C64]) -> Vec<C64> {
    let (d, n) = (h.d(), h.n());
    let mut out = vec![ZERO; psi.len()];
    let stride = |site: usize| d.pow((n - 1 - site) as u32);
    for (bond, term) in h.terms() {
        let (s1, s2) = h.bond_sites(bond);
        let (t1, t2) = (stride(s1), stride(s2));
        for (idx, &amp) in psi.iter().enumerate() {
            if amp == ZERO {
                continue;
            }
            let a = (idx / t1) % d;
            let b = (idx / t2) % d;
            let base = idx - a * t1 - b * t2;
            let col = a * d + b;
            for c in 0..d {
                for e in 0..d {
                    let w = term[(c * d + e, col)];
                    if w != ZERO {
                        out[base + c * t1 + e * t2] += w * amp;
                    }
                }
            }
        }
    }
    let s = h.scale();
    out.iter_mut().for_each(|z| *z *= s);
    out
}

/// Dense `d^N × d^N` matrix of the physical Hamiltonian.
pub fn dense_hamiltonian(h: &ChainHamiltonian, ceiling: u64) -> Result<CMat> {
    let dim = checked_dim(h, ceiling)?;
    let mut m = CMat::zeros(dim, dim);
    let mut basis = vec![ZERO; dim];
    for col in 0..dim {
        basis[col] = C64::new(1.0, 0.0);
        let image = apply_hamiltonian(h, &basis);
        for (row, z) in image.into_iter().enumerate() {
            m[(row, col)] = z;
        }
        basis[col] = ZERO;
    }
    Ok(m)
}

pub fn exact_diagonalize(h: &ChainHamiltonian) -> Result<SpectrumResult> {
    exact_diagonalize_with_ceiling(h, DEFAULT_DIM_CEILING)
}

/// Lowest eigenpair and gap by full dense diagonalization. Real
/// Hamiltonians use the real symmetric solver.
pub fn exact_diagonalize_with_ceiling(h: &ChainHamiltonian, ceiling: u64) -> Result<SpectrumResult> {
    let m = dense_hamiltonian(h, ceiling)?;
    let dim = m.nrows();
    let (values, ground): (Vec<f64>, Vec<C64>) = if m.iter().all(|z| z.im == 0.0) {
        let real = DMatrix::from_fn(dim, dim, |r, c| m[(r, c)].re);
        let eig = real.symmetric_eigen();
        let lowest = eig.eigenvalues.argmin().0;
        let v = eig.eigenvectors.column(lowest).iter().map(|&x| C64::new(x, 0.0)).collect();
        (eig.eigenvalues.iter().copied().collect(), v)
    } else {
        let eig = m.symmetric_eigen();
        let lowest = eig.eigenvalues.argmin().0;
        let v = eig.eigenvectors.column(lowest).iter().copied().collect();
        (eig.eigenvalues.iter().copied().collect(), v)
    };
    let mut sorted = values;
    sorted.sort_by(f64::total_cmp);
    let gap = if sorted.len() > 1 { sorted[1] - sorted[0] } else { 0.0 };
    Ok(SpectrumResult {
        ground_energy: sorted[0],
        ground_vector: ground,
        gap,
    })
}

/// Ground energy by matrix-free Lanczos with full reorthogonalization.
/// Shares no code path with the dense solver beyond `apply_hamiltonian`.
pub fn lanczos_ground_energy(h: &ChainHamiltonian, ceiling: u64, tol: f64) -> Result<f64> {
    let dim = checked_dim(h, ceiling)?;
    let mut v: Vec<C64> = (0..dim)
        .map(|i| C64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.05))
        .collect();
    normalize(&mut v);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut previous = f64::INFINITY;
    for step in 0..dim {
        let mut w = apply_hamiltonian(h, &v);
        let a = inner(&v, &w).re;
        basis.push(v.clone());
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let c = inner(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let lowest = t.symmetric_eigenvalues().min();
        if norm < 1e-12 || step + 1 == dim || (previous - lowest).abs() < tol {
            return Ok(lowest);
        }
        previous = lowest;
        beta.push(norm);
        v = w.into_iter().map(|z| z / norm).collect();
    }
    unreachable!("loop returns by the final step")
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn normalize(v: &mut [C64]) {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
}

/// `⟨ψ|H|ψ⟩` for a normalized dense state.
pub fn statevector_expectation(h: &ChainHamiltonian, psi: &[C64]) -> Result<f64> {
    let dim = hilbert_dim(h.d(), h.n()).unwrap_or(u64::MAX);
    if psi.len() as u64 != dim {
        return Err(Error::Dimension(format!(
            "state has {} amplitudes, chain needs {dim}",
            psi.len()
        )));
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Norm(norm));
    }
    let value = inner(psi, &apply_hamiltonian(h, psi));
    let tol = 1e-10 * (1.0 + value.re.abs());
    assert!(value.im.abs() < tol, "expectation has imaginary part {}", value.im);
    Ok(value.re)
}

/// Product-state amplitudes `⊗_k v_k`, first site most significant.
pub fn product_statevector(vectors: &[Vec<C64>]) -> Vec<C64> {
    let mut psi = vec![C64::new(1.0, 0.0)];
    for v in vectors {
        psi = psi.iter().flat_map(|&a| v.iter().map(move |&b| a * b)).collect();
    }
    psi
}

/// Brute-force minimum over all `d^N` configurations with the tie-break of
/// [`crate::classical::solve_classical`]: among optimal configurations the
/// one that is smallest reading from the last site backwards.
pub fn exhaustive_classical(c: &ClassicalChain) -> Result<ClassicalSolution> {
    let (d, n) = (c.d(), c.n());
    let size = hilbert_dim(d, n).unwrap_or(u64::MAX);
    if size > EXHAUSTIVE_CEILING {
        return Err(Error::Size {
            size,
            ceiling: EXHAUSTIVE_CEILING,
        });
    }
    let bonds = c.tables().len();
    let mut config = vec![0usize; n];
    let mut best: Option<ClassicalSolution> = None;
    // odometer with site 0 fastest: visits configurations in increasing
    // reverse-lexicographic order, so keeping strict improvements only
    // realizes the tie-break
    loop {
        let mut energy = 0.0;
        for k in 0..bonds {
            energy += c.cost(k, config[k], config[(k + 1) % n]);
        }
        if best.as_ref().is_none_or(|b| energy < b.energy) {
            best = Some(ClassicalSolution {
                energy,
                configuration: config.clone(),
            });
        }
        let mut site = 0;
        loop {
            if site == n {
                return Ok(best.expect("at least one configuration"));
            }
            config[site] += 1;
            if config[site] < d {
                break;
            }
            config[site] = 0;
            site += 1;
        }
    }
}

/// Dense vector helper for tests: `DVector` view of amplitudes.
pub fn as_dvector(psi: &[C64]) -> DVector<C64> {
    DVector::from_column_slice(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{Boundary, Preset};

    #[test]
    fn ising_ring_and_chain_ground_energies() {
        let h = ChainHamiltonian::from_preset(Preset::IsingZz, 3, Boundary::Open).unwrap();
        assert!((exact_diagonalize(&h).unwrap().ground_energy + 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_hamiltonian_has_zero_gap() {
        let h = ChainHamiltonian::zero(2, 4, Boundary::Open).unwrap();
        let s = exact_diagonalize(&h).unwrap();
        assert_eq!(s.ground_energy, 0.0);
        assert_eq!(s.gap, 0.0);
    }

    #[test]
    fn size_ceiling_is_enforced() {
        let h = ChainHamiltonian::from_preset(Preset::Tfim { g: 1.0 }, 13, Boundary::Open).unwrap();
        assert!(matches!(exact_diagonalize(&h), Err(Error::Size { .. })));
    }

    #[test]
    fn residual_is_small() {
        let h = ChainHamiltonian::from_preset(Preset::Heisenberg, 6, Boundary::Periodic).unwrap();
        let s = exact_diagonalize(&h).unwrap();
        let hv = apply_hamiltonian(&h, &s.ground_vector);
        let r: f64 = hv
            .iter()
            .zip(&s.ground_vector)
            .map(|(a, b)| (a - b * s.ground_energy).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(r < 1e-10);
    }

    #[test]
    fn statevector_checks_norm_and_dimension() {
        let h = ChainHamiltonian::from_preset(Preset::IsingZz, 2, Boundary::Open).unwrap();
        let bad = vec![C64::new(1.0, 0.0); 3];
        assert!(matches!(statevector_expectation(&h, &bad), Err(Error::Dimension(_))));
        let unnormalized = vec![C64::new(1.0, 0.0); 4];
        assert!(matches!(statevector_expectation(&h, &unnormalized), Err(Error::Norm(_))));
        let mut basis = vec![ZERO; 4];
        basis[1] = C64::new(1.0, 0.0);
        assert_eq!(statevector_expectation(&h, &basis).unwrap(), -1.0);
    }

    #[test]
    fn exhaustive_single_bond() {
        let c = ClassicalChain::new(2, 2, Boundary::Open, vec![vec![5.0, 1.0, 7.0, 3.0]]).unwrap();
        let s = exhaustive_classical(&c).unwrap();
        assert_eq!(s.energy, 1.0);
        assert_eq!(s.configuration, vec![0, 1]);
    }
}

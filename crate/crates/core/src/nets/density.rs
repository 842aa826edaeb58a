//! Nets over density matrices in the trace norm.
//!
//! Points are stored as coordinates in the orthonormal Hermitian basis of
//! [`HermitianBasis`], in which the Frobenius norm is Euclidean and
//! `tr(XY)` is a dot product.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lattice::{Grid, Shell};
use super::{certify, check_epsilon, derive_seed, within_cardinality_bound};
use super::{Certification, EpsilonNet, NetConfig};
use crate::error::{Error, Result};
use crate::linalg::{
    dist2, hermitian_eigen, project_capped_simplex, project_simplex, random_gaussian, CMat,
    HermitianBasis, C64,
};

/// Which set of density matrices a net covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityTarget {
    /// Positive semidefinite with trace at most one.
    SubUnitTrace,
    /// Positive semidefinite with trace exactly one.
    UnitTrace,
}

#[derive(Debug, Clone)]
pub struct DensityNet {
    dim: usize,
    epsilon: f64,
    target: DensityTarget,
    basis: HermitianBasis,
    /// Row-major `len × dim²` coordinates.
    coords: Vec<f64>,
    certification: Certification,
    /// Spatial index with cell size `epsilon`, built on first use.
    index: OnceLock<Grid>,
}

/// Coordinates used for spatial hashing (the constant trace coordinate
/// of unit-trace sets carries no information).
fn hashed_coords(dim: usize, target: DensityTarget) -> Vec<usize> {
    let n = dim * dim;
    match target {
        DensityTarget::SubUnitTrace => (0..n.min(3)).collect(),
        DensityTarget::UnitTrace => (1..n.min(4)).collect(),
    }
}

fn hash_key(c: &[f64], hashed: &[usize]) -> [f64; 3] {
    let mut k = [0.0; 3];
    for (slot, &i) in k.iter_mut().zip(hashed) {
        *slot = c[i];
    }
    k
}

pub fn build_density_net(dim: usize, epsilon: f64) -> Result<DensityNet> {
    DensityNet::build(dim, epsilon, DensityTarget::SubUnitTrace, &NetConfig::default())
}

impl DensityNet {
    pub fn build(
        dim: usize,
        epsilon: f64,
        target: DensityTarget,
        config: &NetConfig,
    ) -> Result<DensityNet> {
        check_epsilon(epsilon)?;
        if dim == 0 {
            return Err(Error::Dimension("density matrices need dimension >= 1".into()));
        }
        let basis = HermitianBasis::new(dim);
        let key = format!(
            "density|v{}|D={dim}|{target:?}|eps={:016x}|f={:016x}|seed={}|certify={}",
            super::cache::FORMAT_VERSION,
            epsilon.to_bits(),
            config.lattice_fraction.to_bits(),
            config.seed,
            config.certify_samples
        );
        let (coords, certification) = super::cache::cached(config.cache_dir.as_deref(), &key, || {
            let mut net = DensityNet {
                dim,
                epsilon,
                target,
                basis: basis.clone(),
                coords: lattice_points(&basis, epsilon, target, config)?,
                certification: Certification::default(),
                index: OnceLock::new(),
            };
            if config.certify_samples > 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "density-certify"));
                let samples: Vec<Vec<f64>> = (0..config.certify_samples)
                    .map(|_| net.basis.coords(&random_density(&mut rng, dim, target)))
                    .collect();
                net.certification = certify(&net, &samples, epsilon);
            }
            Ok((net.coords, net.certification))
        })?;
        let net = DensityNet {
            dim,
            epsilon,
            target,
            basis,
            coords,
            certification,
            index: OnceLock::new(),
        };
        assert!(
            within_cardinality_bound(net.len(), 3.0, epsilon, dim * dim),
            "density net of {} points exceeds (3/ε)^(D²)",
            net.len()
        );
        Ok(net)
    }

    /// Net made of given matrices, without covering guarantee.
    pub fn from_points(dim: usize, epsilon: f64, target: DensityTarget, points: &[CMat]) -> DensityNet {
        let basis = HermitianBasis::new(dim);
        let coords = points.iter().flat_map(|m| basis.coords(m)).collect();
        DensityNet {
            dim,
            epsilon,
            target,
            basis,
            coords,
            certification: Certification::default(),
            index: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn target(&self) -> DensityTarget {
        self.target
    }

    pub fn basis(&self) -> &HermitianBasis {
        &self.basis
    }

    pub fn coords(&self, index: usize) -> &[f64] {
        let n = self.dim * self.dim;
        &self.coords[index * n..(index + 1) * n]
    }

    pub fn matrix(&self, index: usize) -> CMat {
        self.basis.matrix(self.coords(index))
    }

    pub fn certification(&self) -> Certification {
        self.certification
    }

    /// Trace distance between two coordinate vectors.
    pub fn coord_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.basis.trace_norm(&diff)
    }

    /// Nearest point to a matrix given as such.
    pub fn nearest_matrix(&self, m: &CMat) -> Result<(usize, f64)> {
        self.nearest(&self.basis.coords(m))
    }
}

impl EpsilonNet for DensityNet {
    type Point = [f64];

    fn len(&self) -> usize {
        self.coords.len() / (self.dim * self.dim)
    }

    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn distance(&self, index: usize, point: &[f64]) -> f64 {
        self.coord_distance(self.coords(index), point)
    }

    /// `‖X‖₁ ≥ ‖X‖_F`.
    fn lower_bound(&self, index: usize, point: &[f64]) -> f64 {
        dist2(self.coords(index), point).sqrt()
    }

    fn within(&self, point: &[f64], radius: f64) -> Vec<usize> {
        if radius > self.epsilon {
            let hits = (0..self.len())
                .filter_map(|i| {
                    let dist = self.distance(i, point);
                    (dist <= radius).then_some((dist, i))
                })
                .collect::<Vec<_>>();
            return sorted_indices(hits);
        }
        let hashed = hashed_coords(self.dim, self.target);
        let grid = self.index.get_or_init(|| {
            let mut g = Grid::new(self.epsilon);
            for i in 0..self.len() {
                g.insert(hash_key(self.coords(i), &hashed), i as u32);
            }
            g
        });
        let mut hits = Vec::new();
        grid.any_near(hash_key(point, &hashed), |id| {
            let i = id as usize;
            if self.lower_bound(i, point) <= radius {
                let dist = self.distance(i, point);
                if dist <= radius {
                    hits.push((dist, i));
                }
            }
            false
        });
        sorted_indices(hits)
    }
}

fn sorted_indices(mut hits: Vec<(f64, usize)>) -> Vec<usize> {
    hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    hits.into_iter().map(|(_, i)| i).collect()
}

/// Random density matrix: Hilbert–Schmidt distributed spectrum shape,
/// sometimes pure, with uniform trace for the sub-unit target.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize, target: DensityTarget) -> CMat {
    let rank = if rng.random_bool(0.2) { 1 } else { dim };
    let g = random_gaussian(rng, dim, rank);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let scale = match target {
        DensityTarget::UnitTrace => 1.0,
        DensityTarget::SubUnitTrace => rng.random_range(0.0..=1.0),
    };
    m.unscale(tr).scale(scale)
}

/// Euclidean projection of Hermitian coordinates onto the target set.
pub(crate) fn project(basis: &HermitianBasis, coords: &[f64], target: DensityTarget) -> Vec<f64> {
    let project_values = |v: &[f64]| match target {
        DensityTarget::SubUnitTrace => project_capped_simplex(v, 1.0),
        DensityTarget::UnitTrace => project_simplex(v, 1.0),
    };
    match basis.dim() {
        1 => vec![project_values(&[coords[0]])[0]],
        2 => {
            // X = (c₀ I + v·σ)/√2, eigenvalues (c₀ ± |v|)/√2 with fixed
            // eigenvectors, so only the two eigenvalues move
            let s = std::f64::consts::SQRT_2;
            let r = (coords[1] * coords[1] + coords[2] * coords[2] + coords[3] * coords[3]).sqrt();
            let p = project_values(&[(coords[0] + r) / s, (coords[0] - r) / s]);
            let c0 = (p[0] + p[1]) / s;
            let r_new = (p[0] - p[1]) / s;
            let f = if r > 0.0 { r_new / r } else { 0.0 };
            vec![c0, coords[1] * f, coords[2] * f, coords[3] * f]
        }
        _ => {
            let (values, vectors) = hermitian_eigen(&basis.matrix(coords));
            let p = project_values(&values);
            let diag = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                p.len(),
                p.iter().map(|&x| C64::new(x, 0.0)),
            ));
            basis.coords(&(&vectors * diag * vectors.adjoint()))
        }
    }
}

/// Lattice in Hermitian coordinates, projected onto the target set.
///
/// A target matrix `X` has a lattice point within Euclidean distance `r`;
/// projection onto the convex target is non-expansive, so the projected
/// point is within Frobenius distance `r` and trace distance `√D·r` of `X`.
fn lattice_points(
    basis: &HermitianBasis,
    epsilon: f64,
    target: DensityTarget,
    config: &NetConfig,
) -> Result<Vec<f64>> {
    let dim = basis.dim();
    let n = dim * dim;
    let f = config.lattice_fraction;
    let sqrt_d = (dim as f64).sqrt();
    let c0_unit = 1.0 / sqrt_d;
    let maximally_mixed = {
        let mut c = vec![0.0; n];
        c[0] = c0_unit;
        c
    };
    // any single point is within the diameter 2 of the whole set
    if (target == DensityTarget::UnitTrace && dim == 1) || epsilon >= 2.0 {
        return Ok(maximally_mixed);
    }
    // lattice dimensions: all coordinates, or the traceless ones
    let (free, first_nonneg, r_norm) = match target {
        DensityTarget::SubUnitTrace => (n, true, 1.0),
        DensityTarget::UnitTrace => (n - 1, false, (1.0 - 1.0 / dim as f64).sqrt()),
    };
    let r = f * epsilon / sqrt_d;
    let spacing = 2.0 * r / (free as f64).sqrt();
    let shell = Shell {
        dims: free,
        spacing,
        r_min: 0.0,
        r_max: r_norm + r,
        first_nonneg,
    };
    let separation = (1.0 - f) * epsilon;
    let mut grid = Grid::new(separation);
    let hashed = hashed_coords(dim, target);
    let key = |c: &[f64]| hash_key(c, &hashed);
    let mut kept: Vec<f64> = Vec::new();
    let mut count = 0usize;
    let offer = |c: Vec<f64>, kept: &mut Vec<f64>, grid: &mut Grid, count: &mut usize| {
        let k = key(&c);
        let covered = grid.any_near(k, |id| {
            let id = id as usize;
            let diff: Vec<f64> = kept[id * n..(id + 1) * n].iter().zip(&c).map(|(a, b)| a - b).collect();
            dist2(&kept[id * n..(id + 1) * n], &c) <= separation * separation
                && basis.trace_norm(&diff) <= separation
        });
        if !covered {
            grid.insert(k, *count as u32);
            kept.extend_from_slice(&c);
            *count += 1;
        }
    };
    offer(maximally_mixed, &mut kept, &mut grid, &mut count);
    shell.for_each(config.max_points, |x| {
        let c: Vec<f64> = match target {
            DensityTarget::SubUnitTrace => x.to_vec(),
            DensityTarget::UnitTrace => std::iter::once(c0_unit).chain(x.iter().copied()).collect(),
        };
        let p = project(basis, &c, target);
        offer(p, &mut kept, &mut grid, &mut count);
    })?;
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;

    fn quick() -> NetConfig {
        NetConfig {
            certify_samples: 2000,
            ..NetConfig::uncached()
        }
    }

    #[test]
    fn scalar_nets() {
        let unit = DensityNet::build(1, 0.3, DensityTarget::UnitTrace, &quick()).unwrap();
        assert_eq!(unit.len(), 1);
        assert_eq!(unit.coords(0), &[1.0]);
        let sub = DensityNet::build(1, 0.3, DensityTarget::SubUnitTrace, &quick()).unwrap();
        assert_eq!(sub.coords(0), &[1.0]);
        assert!(sub.certification().certified());
    }

    #[test]
    fn qubit_nets_are_psd_and_certified() {
        for target in [DensityTarget::UnitTrace, DensityTarget::SubUnitTrace] {
            let net = DensityNet::build(2, 0.5, target, &quick()).unwrap();
            assert!(net.certification().certified(), "{target:?} {:?}", net.certification());
            for i in 0..net.len() {
                let ev = hermitian_eigenvalues(&net.matrix(i));
                assert!(ev[0] > -1e-10);
                let tr: f64 = ev.iter().sum();
                assert!(tr <= 1.0 + 1e-10);
                if target == DensityTarget::UnitTrace {
                    assert!((tr - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn projection_matches_general_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let b2 = HermitianBasis::new(2);
        for target in [DensityTarget::UnitTrace, DensityTarget::SubUnitTrace] {
            for _ in 0..50 {
                let c: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
                let fast = project(&b2, &c, target);
                let (values, vectors) = hermitian_eigen(&b2.matrix(&c));
                let p = match target {
                    DensityTarget::UnitTrace => project_simplex(&values, 1.0),
                    DensityTarget::SubUnitTrace => project_capped_simplex(&values, 1.0),
                };
                let diag = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                    2,
                    p.iter().map(|&x| C64::new(x, 0.0)),
                ));
                let slow = b2.coords(&(&vectors * diag * vectors.adjoint()));
                assert!(dist2(&fast, &slow).sqrt() < 1e-12);
            }
        }
    }
}

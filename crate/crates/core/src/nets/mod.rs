//! ε-nets over pure states, density matrices and isometries.
//!
//! Lattice nets (states, densities) are covering by construction: the
//! lattice spacing is chosen so that snapping to the lattice and projecting
//! back onto the target set costs at most `f·ε`, and greedy deduplication
//! at separation `(1 − f)·ε` keeps every discarded candidate within reach of
//! a kept point. Isometry nets are grown greedily from seeded Haar-random
//! candidates. All nets are additionally certified by sampling.

mod cache;
mod density;
mod isometry;
mod lattice;
mod state;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use density::{build_density_net, DensityNet, DensityTarget};
pub use isometry::{
    build_isometry_net, isometry_distance, random_isometry, BoundaryShape, IsometryNet, IsometryShape,
};
pub use density::random_density;
pub use state::{build_state_net, pure_state_distance, StateNet};

/// Environment variable naming the net cache directory.
pub const CACHE_DIR_ENV: &str = "CHAINDP_CACHE_DIR";

#[derive(Debug, Clone)]
pub struct NetConfig {
    /// Ceiling on candidate and net point counts.
    pub max_points: u64,
    pub seed: u64,
    /// Number of random samples for covering certification (0 skips it).
    pub certify_samples: usize,
    /// Share `f` of the radius spent on lattice snapping.
    pub lattice_fraction: f64,
    /// Consecutive rejected candidates after which isometry nets stop
    /// growing.
    pub stall: usize,
    pub cache_dir: Option<PathBuf>,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            max_points: 10_000_000,
            seed: 0x5eed,
            certify_samples: 10_000,
            lattice_fraction: 0.25,
            stall: 2000,
            cache_dir: std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from),
        }
    }
}

impl NetConfig {
    pub fn uncached() -> Self {
        NetConfig {
            cache_dir: None,
            ..Default::default()
        }
    }
}

/// Outcome of covering certification by random sampling.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Certification {
    pub samples: usize,
    pub misses: usize,
    pub max_distance: f64,
}

impl Certification {
    pub fn certified(&self) -> bool {
        self.samples > 0 && self.misses == 0
    }
}

/// A finite point set with covering radius `epsilon` in its own metric.
pub trait EpsilonNet: Sync {
    type Point: ?Sized + Sync;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn epsilon(&self) -> f64;

    fn distance(&self, index: usize, point: &Self::Point) -> f64;

    /// Cheap lower bound on `distance`, used to skip points.
    fn lower_bound(&self, index: usize, point: &Self::Point) -> f64 {
        self.distance(index, point)
    }

    /// Closest point; ties go to the lowest index.
    fn nearest(&self, point: &Self::Point) -> Result<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.len() {
            if let Some((_, b)) = best {
                if self.lower_bound(i, point) >= b {
                    continue;
                }
            }
            let dist = self.distance(i, point);
            if best.is_none_or(|(_, b)| dist < b) {
                best = Some((i, dist));
            }
        }
        best.ok_or(Error::EmptyNet)
    }

    /// All indices within `radius`, ascending by distance then index.
    fn within(&self, point: &Self::Point, radius: f64) -> Vec<usize> {
        let mut hits: Vec<(f64, usize)> = (0..self.len())
            .filter(|&i| self.lower_bound(i, point) <= radius)
            .filter_map(|i| {
                let dist = self.distance(i, point);
                (dist <= radius).then_some((dist, i))
            })
            .collect();
        hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        hits.into_iter().map(|(_, i)| i).collect()
    }
}

/// Nearest distances of `samples` to the net, counted against `radius`.
pub fn certify<N, P>(net: &N, samples: &[P], radius: f64) -> Certification
where
    N: EpsilonNet,
    P: std::borrow::Borrow<N::Point> + Sync,
{
    let distances: Vec<f64> = samples
        .par_iter()
        .map(|s| net.nearest(s.borrow()).map(|(_, d)| d).unwrap_or(f64::INFINITY))
        .collect();
    Certification {
        samples: samples.len(),
        misses: distances.iter().filter(|&&d| d > radius).count(),
        max_distance: distances.iter().copied().fold(0.0, f64::max),
    }
}

/// `len ≤ max(1, (c/ε)^dims)`, compared in log space.
pub fn within_cardinality_bound(len: usize, c: f64, epsilon: f64, dims: usize) -> bool {
    let log_bound = (dims as f64 * (c / epsilon).ln()).max(0.0);
    (len as f64).ln() <= log_bound + 1e-9
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Validation(format!("net radius must be positive, got {epsilon}")));
    }
    Ok(())
}

/// Deterministic per-net seed derived from the configured seed and the
/// net parameters.
pub(crate) fn derive_seed(base: u64, tag: &str) -> u64 {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(format!("{base}|{tag}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

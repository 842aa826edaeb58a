//! Nets over gauge-satisfying site tensors in the per-matrix operator
//! norm `max_i ‖A_i − B_i‖∞`, modulo a global phase.
//!
//! A site tensor with bond dimensions `(Dl, Dr)` is stored as the row-major
//! `Dl × (d·Dr)` matrix `[A_0 A_1 … A_{d−1}]`; the gauge condition
//! `Σ_i A_i A_i† = 1` says its rows are orthonormal.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{certify, check_epsilon, derive_seed, within_cardinality_bound};
use super::{Certification, EpsilonNet, NetConfig};
use crate::error::{Error, Result};
use crate::linalg::{fix_phase, op_norm_slice, polar_rows, random_gaussian, row_major, C64, ZERO};

const BATCH: usize = 64;

/// Left and right bond dimension of a site tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IsometryShape {
    pub dl: usize,
    pub dr: usize,
}

impl IsometryShape {
    pub fn interior(bond_dim: usize) -> Self {
        IsometryShape {
            dl: bond_dim,
            dr: bond_dim,
        }
    }

    pub fn first_site(bond_dim: usize) -> Self {
        IsometryShape { dl: 1, dr: bond_dim }
    }

    pub fn last_site(bond_dim: usize) -> Self {
        IsometryShape { dl: bond_dim, dr: 1 }
    }

    /// Real parameter count `2·d·Dl·Dr`.
    pub fn real_params(&self, d: usize) -> usize {
        2 * d * self.dl * self.dr
    }
}

#[derive(Debug, Clone)]
pub struct IsometryNet {
    d: usize,
    shape: IsometryShape,
    epsilon: f64,
    /// Row-major point matrices, each `Dl·d·Dr` entries.
    data: Vec<C64>,
    certification: Certification,
}

/// Position of a site tensor in the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryShape {
    Interior,
    FirstSite,
    LastSite,
}

impl BoundaryShape {
    pub fn shape(self, bond_dim: usize) -> IsometryShape {
        match self {
            BoundaryShape::Interior => IsometryShape::interior(bond_dim),
            BoundaryShape::FirstSite => IsometryShape::first_site(bond_dim),
            BoundaryShape::LastSite => IsometryShape::last_site(bond_dim),
        }
    }
}

pub fn build_isometry_net(
    d: usize,
    bond_dim: usize,
    epsilon: f64,
    boundary_shape: BoundaryShape,
) -> Result<IsometryNet> {
    IsometryNet::build(d, boundary_shape.shape(bond_dim), epsilon, &NetConfig::default())
}

/// Per-matrix operator-norm distance after aligning the global phase of
/// `b` to `a` (the Frobenius-optimal phase).
pub fn isometry_distance(a: &[C64], b: &[C64], d: usize, shape: IsometryShape) -> f64 {
    let inner: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let phase = if inner.norm() > 0.0 { inner.conj() / inner.norm() } else { C64::new(1.0, 0.0) };
    let (dl, dr) = (shape.dl, shape.dr);
    let mut block = vec![ZERO; dl * dr];
    let mut worst = 0.0f64;
    for i in 0..d {
        for r in 0..dl {
            for c in 0..dr {
                let idx = r * d * dr + i * dr + c;
                block[r * dr + c] = a[idx] - phase * b[idx];
            }
        }
        worst = worst.max(op_norm_slice(&block, dl, dr));
    }
    worst
}

/// Lower bound on [`isometry_distance`] from the aligned Frobenius
/// distance.
fn aligned_frobenius(a: &[C64], b: &[C64]) -> f64 {
    let inner: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    (na + nb - 2.0 * inner.norm()).max(0.0).sqrt()
}

/// Haar-random gauge-satisfying tensor in phase-fixed form.
pub fn random_isometry<R: rand::Rng + ?Sized>(rng: &mut R, d: usize, shape: IsometryShape) -> Vec<C64> {
    let g = random_gaussian(rng, shape.dl, d * shape.dr);
    let mut v = row_major(&polar_rows(&g));
    fix_phase(&mut v, 1e-12);
    v
}

impl IsometryNet {
    pub fn build(d: usize, shape: IsometryShape, epsilon: f64, config: &NetConfig) -> Result<IsometryNet> {
        check_epsilon(epsilon)?;
        if d == 0 || shape.dl == 0 || shape.dr == 0 {
            return Err(Error::Dimension("isometry nets need positive dimensions".into()));
        }
        if shape.dl > d * shape.dr {
            return Err(Error::Dimension(format!(
                "a {}x{} tensor with d = {d} cannot satisfy the gauge condition",
                shape.dl, shape.dr
            )));
        }
        let key = format!(
            "isometry|v{}|d={d}|dl={}|dr={}|eps={:016x}|seed={}|stall={}|certify={}",
            super::cache::FORMAT_VERSION,
            shape.dl,
            shape.dr,
            epsilon.to_bits(),
            config.seed,
            config.stall,
            config.certify_samples
        );
        let (flat, certification) = super::cache::cached(config.cache_dir.as_deref(), &key, || {
            let mut net = IsometryNet {
                d,
                shape,
                epsilon,
                data: greedy_points(d, shape, epsilon, config)?,
                certification: Certification::default(),
            };
            if config.certify_samples > 0 {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &format!("isometry-certify|{key}")));
                let samples: Vec<Vec<C64>> = (0..config.certify_samples)
                    .map(|_| random_isometry(&mut rng, d, shape))
                    .collect();
                net.certification = certify(&net, &samples, epsilon);
            }
            Ok((net.data.iter().flat_map(|z| [z.re, z.im]).collect(), net.certification))
        })?;
        let data = flat.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect();
        let net = IsometryNet {
            d,
            shape,
            epsilon,
            data,
            certification,
        };
        assert!(
            within_cardinality_bound(net.len(), 3.0, epsilon, shape.real_params(d)),
            "isometry net of {} points exceeds (3/ε)^(2dDlDr)",
            net.len()
        );
        Ok(net)
    }

    /// Net made of given tensors (row-major `Dl × d·Dr`), without covering
    /// guarantee.
    pub fn from_points(d: usize, shape: IsometryShape, epsilon: f64, points: &[Vec<C64>]) -> IsometryNet {
        let size = shape.dl * d * shape.dr;
        assert!(points.iter().all(|p| p.len() == size));
        IsometryNet {
            d,
            shape,
            epsilon,
            data: points.concat(),
            certification: Certification::default(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn shape(&self) -> IsometryShape {
        self.shape
    }

    pub fn point_len(&self) -> usize {
        self.shape.dl * self.d * self.shape.dr
    }

    pub fn point(&self, index: usize) -> &[C64] {
        let n = self.point_len();
        &self.data[index * n..(index + 1) * n]
    }

    pub fn certification(&self) -> Certification {
        self.certification
    }
}

impl EpsilonNet for IsometryNet {
    type Point = [C64];

    fn len(&self) -> usize {
        self.data.len() / self.point_len()
    }

    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn distance(&self, index: usize, point: &[C64]) -> f64 {
        isometry_distance(self.point(index), point, self.d, self.shape)
    }

    fn lower_bound(&self, index: usize, point: &[C64]) -> f64 {
        let rank = self.shape.dl.min(self.shape.dr) as f64;
        aligned_frobenius(self.point(index), point) / (self.d as f64 * rank).sqrt()
    }
}

/// Canonical single point: rows `e_0 … e_{Dl−1}`.
fn canonical_point(d: usize, shape: IsometryShape) -> Vec<C64> {
    let cols = d * shape.dr;
    let mut v = vec![ZERO; shape.dl * cols];
    for r in 0..shape.dl {
        v[r * cols + r] = C64::new(1.0, 0.0);
    }
    v
}

/// Greedy packing at separation `ε/2` from seeded Haar candidates, stopped
/// after `config.stall` consecutive rejections.
fn greedy_points(d: usize, shape: IsometryShape, epsilon: f64, config: &NetConfig) -> Result<Vec<C64>> {
    let trivial = shape.dl * d * shape.dr == 1 || (shape.dl == 1 && d * shape.dr == 1);
    if trivial || epsilon >= 2.0 {
        return Ok(canonical_point(d, shape));
    }
    let size = shape.dl * d * shape.dr;
    // packing estimate (2/ε)^m with m the real dimension of the tensor
    // manifold modulo phase; it undercounts the greedy output, so it only
    // rejects hopeless requests
    let manifold_dim = shape.real_params(d) - shape.dl * shape.dl - 1;
    let estimate = (2.0 / epsilon).powi(manifold_dim as i32);
    if estimate > config.max_points as f64 {
        return Err(Error::Budget {
            required: estimate.min(u64::MAX as f64) as u64,
            ceiling: config.max_points,
        });
    }
    let separation = epsilon / 2.0;
    let rank = shape.dl.min(shape.dr) as f64;
    let lb_scale = (d as f64 * rank).sqrt();
    let seed = derive_seed(config.seed, &format!("isometry|d={d}|{shape:?}|{}", epsilon.to_bits()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept: Vec<C64> = Vec::new();
    let mut stall = 0usize;
    let close = |a: &[C64], b: &[C64]| {
        aligned_frobenius(a, b) / lb_scale <= separation && isometry_distance(a, b, d, shape) <= separation
    };
    while stall < config.stall {
        let batch: Vec<Vec<C64>> = (0..BATCH).map(|_| random_isometry(&mut rng, d, shape)).collect();
        let count = kept.len() / size;
        let covered: Vec<bool> = batch
            .par_iter()
            .map(|c| (0..count).any(|k| close(&kept[k * size..(k + 1) * size], c)))
            .collect();
        let batch_start = count;
        for (c, covered) in batch.into_iter().zip(covered) {
            if stall >= config.stall {
                break;
            }
            let now = kept.len() / size;
            let hit = covered || (batch_start..now).any(|k| close(&kept[k * size..(k + 1) * size], &c));
            if hit {
                stall += 1;
            } else {
                stall = 0;
                kept.extend_from_slice(&c);
                if (kept.len() / size) as u64 > config.max_points {
                    return Err(Error::Budget {
                        required: (kept.len() / size) as u64,
                        ceiling: config.max_points,
                    });
                }
            }
        }
    }
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMat;

    fn quick() -> NetConfig {
        NetConfig {
            certify_samples: 1000,
            stall: 300,
            ..NetConfig::uncached()
        }
    }

    #[test]
    fn points_satisfy_gauge() {
        let shape = IsometryShape::interior(2);
        let net = IsometryNet::build(2, shape, 1.6, &quick()).unwrap();
        for k in 0..net.len() {
            let m = CMat::from_row_slice(2, 4, net.point(k));
            let defect = (&m * m.adjoint() - CMat::identity(2, 2)).norm();
            assert!(defect < 1e-9);
        }
    }

    #[test]
    fn trivial_shapes() {
        let one = IsometryNet::build(1, IsometryShape::interior(1), 0.1, &quick()).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.point(0), &[C64::new(1.0, 0.0)]);
        let coarse = IsometryNet::build(2, IsometryShape::interior(2), 2.0, &quick()).unwrap();
        assert_eq!(coarse.len(), 1);
        assert!(coarse.certification().certified());
    }

    #[test]
    fn phase_does_not_change_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let shape = IsometryShape::interior(2);
        let a = random_isometry(&mut rng, 2, shape);
        let rotated: Vec<C64> = a.iter().map(|z| z * C64::from_polar(1.0, 0.7)).collect();
        assert!(isometry_distance(&a, &rotated, 2, shape) < 1e-12);
    }

    #[test]
    fn bad_shape_is_rejected() {
        assert!(matches!(
            IsometryNet::build(2, IsometryShape::last_site(3), 0.5, &quick()),
            Err(Error::Dimension(_))
        ));
    }
}

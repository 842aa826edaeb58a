//! Nets over pure states `|ψ⟩⟨ψ|` in the trace norm.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::lattice::{Grid, Shell};
use super::{certify, check_epsilon, derive_seed, within_cardinality_bound};
use super::{Certification, EpsilonNet, NetConfig};
use crate::error::Result;
use crate::linalg::{random_unit_vector, C64, ZERO};

#[derive(Debug, Clone)]
pub struct StateNet {
    d: usize,
    epsilon: f64,
    points: Vec<Vec<C64>>,
    certification: Certification,
}

/// `‖ψψ† − φφ†‖₁ = 2√(1 − |⟨ψ|φ⟩|²)` for unit vectors, with
/// `1 − |⟨ψ|φ⟩|²` written as `Σ_{j<k} |ψ_j φ_k − ψ_k φ_j|²` so that equal
/// states give exactly zero.
pub fn pure_state_distance(a: &[C64], b: &[C64]) -> f64 {
    let mut s = 0.0;
    for j in 0..a.len() {
        for k in (j + 1)..a.len() {
            s += (a[j] * b[k] - a[k] * b[j]).norm_sqr();
        }
    }
    2.0 * s.sqrt()
}

/// Three projector coordinates, scaled so that their Euclidean distance is
/// at most the trace distance divided by √2.
fn hash_coords(v: &[C64]) -> [f64; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = v[0] * v[1].conj();
    [s * (v[0].norm_sqr() - v[1].norm_sqr()), 2.0 * s * x.re, 2.0 * s * x.im]
}

pub fn build_state_net(d: usize, epsilon: f64) -> Result<StateNet> {
    StateNet::build(d, epsilon, &NetConfig::default())
}

impl StateNet {
    pub fn build(d: usize, epsilon: f64, config: &NetConfig) -> Result<StateNet> {
        check_epsilon(epsilon)?;
        let dim = d.max(1);
        let key = format!(
            "state|v{}|d={dim}|eps={:016x}|f={:016x}|seed={}|certify={}",
            super::cache::FORMAT_VERSION,
            epsilon.to_bits(),
            config.lattice_fraction.to_bits(),
            config.seed,
            config.certify_samples
        );
        let (flat, certification) = super::cache::cached(config.cache_dir.as_deref(), &key, || {
            let points = if dim == 1 || epsilon >= 2.0 {
                let mut e0 = vec![ZERO; dim];
                e0[0] = C64::new(1.0, 0.0);
                vec![e0]
            } else {
                lattice_points(dim, epsilon, config)?
            };
            let mut net = StateNet {
                d: dim,
                epsilon,
                points,
                certification: Certification::default(),
            };
            if config.certify_samples > 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "state-certify"));
                let samples: Vec<Vec<C64>> = (0..config.certify_samples)
                    .map(|_| random_unit_vector(&mut rng, dim))
                    .collect();
                net.certification = certify(&net, &samples, epsilon);
            }
            let flat = net.points.iter().flatten().flat_map(|z| [z.re, z.im]).collect();
            Ok((flat, net.certification))
        })?;
        let points = flat
            .chunks_exact(2 * dim)
            .map(|p| p.chunks_exact(2).map(|z| C64::new(z[0], z[1])).collect())
            .collect();
        let net = StateNet {
            d: dim,
            epsilon,
            points,
            certification,
        };
        assert!(
            within_cardinality_bound(net.len(), 5.0, epsilon, 2 * dim),
            "state net of {} points exceeds (5/ε)^(2d)",
            net.len()
        );
        Ok(net)
    }

    /// Net made of given unit vectors, without covering guarantee.
    pub fn from_points(d: usize, epsilon: f64, points: Vec<Vec<C64>>) -> StateNet {
        assert!(points.iter().all(|p| p.len() == d));
        StateNet {
            d,
            epsilon,
            points,
            certification: Certification::default(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn points(&self) -> &[Vec<C64>] {
        &self.points
    }

    pub fn point(&self, index: usize) -> &[C64] {
        &self.points[index]
    }

    pub fn certification(&self) -> Certification {
        self.certification
    }

    pub fn recertify(&mut self, samples: &[Vec<C64>]) -> Certification {
        self.certification = certify(self, samples, self.epsilon);
        self.certification
    }
}

/// Lattice over the phase representative `(Re ψ₀ ≥ 0, ψ₁, …)` in `2d − 1`
/// real coordinates. A lattice point within `r` of `ψ` normalizes to a
/// vector within `2r` of it, hence within trace distance `4r`.
fn lattice_points(d: usize, epsilon: f64, config: &NetConfig) -> Result<Vec<Vec<C64>>> {
    let f = config.lattice_fraction;
    let dims = 2 * d - 1;
    let spacing = f * epsilon / (2.0 * (dims as f64).sqrt());
    let r = spacing * (dims as f64).sqrt() / 2.0;
    let shell = Shell {
        dims,
        spacing,
        r_min: 1.0 - r,
        r_max: 1.0 + r,
        first_nonneg: true,
    };
    let separation = (1.0 - f) * epsilon;
    let mut grid = Grid::new(separation * std::f64::consts::FRAC_1_SQRT_2);
    let mut kept: Vec<Vec<C64>> = Vec::new();
    let mut overflow = false;
    shell.for_each(config.max_points, |x| {
        if overflow {
            return;
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = Vec::with_capacity(d);
        v.push(C64::new(x[0] / norm, 0.0));
        for k in 1..d {
            v.push(C64::new(x[2 * k - 1] / norm, x[2 * k] / norm));
        }
        let h = hash_coords(&v);
        let covered = grid.any_near(h, |id| pure_state_distance(&kept[id as usize], &v) <= separation);
        if !covered {
            grid.insert(h, kept.len() as u32);
            kept.push(v);
            overflow = kept.len() as u64 > config.max_points;
        }
    })?;
    if overflow {
        return Err(crate::error::Error::Budget {
            required: kept.len() as u64,
            ceiling: config.max_points,
        });
    }
    Ok(kept)
}

impl EpsilonNet for StateNet {
    type Point = [C64];

    fn len(&self) -> usize {
        self.points.len()
    }

    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn distance(&self, index: usize, point: &[C64]) -> f64 {
        pure_state_distance(&self.points[index], point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> NetConfig {
        NetConfig {
            certify_samples: 2000,
            ..NetConfig::uncached()
        }
    }

    #[test]
    fn trivial_nets_have_one_point() {
        assert_eq!(StateNet::build(1, 0.1, &quick()).unwrap().len(), 1);
        let n = StateNet::build(2, 2.0, &quick()).unwrap();
        assert_eq!(n.len(), 1);
        assert!(n.certification().certified());
    }

    #[test]
    fn qubit_net_certifies() {
        let n = StateNet::build(2, 0.5, &quick()).unwrap();
        assert!(n.certification().certified(), "{:?}", n.certification());
        assert!(n.points().iter().all(|p| (crate::linalg::frob_slice(p) - 1.0).abs() < 1e-12));
    }

    #[test]
    fn nearest_of_net_point_is_itself() {
        let n = StateNet::build(3, 1.2, &quick()).unwrap();
        for i in [0, n.len() / 2, n.len() - 1] {
            let (j, dist) = n.nearest(n.point(i)).unwrap();
            assert_eq!(j, i);
            assert_eq!(dist, 0.0);
        }
    }
}

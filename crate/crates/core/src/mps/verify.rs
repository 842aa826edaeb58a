//! Numerical checks of the error bounds behind the net solver.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{advance_rho, energy_operator, evaluate_mps_energy, overlap, MpsState, SiteTensor};
use crate::error::{Error, Result};
use crate::hamiltonian::ChainHamiltonian;
use crate::linalg::{kron, op_norm, polar_rows, random_gaussian, trace_norm_hermitian, CMat, C64};
use crate::nets::{DensityNet, EpsilonNet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoDriftStep {
    /// Site index `k` (1-based) of `ρ_k`.
    pub site: usize,
    /// `‖ρ̃_k − ρ_k‖₁`.
    pub drift: f64,
    /// `(k − 1) ε_ρ`.
    pub bound: f64,
    /// Distance of the snap that produced `ρ̃_k`.
    pub snap: f64,
    /// Energy difference of the bond `(k, k+1)` between the two
    /// recursions, in units of the stored term.
    pub energy_deviation: f64,
    /// `(k − 1) ε_ρ ‖H_k‖∞`.
    pub energy_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoDriftReport {
    pub eps_rho: f64,
    pub steps: Vec<RhoDriftStep>,
    pub max_drift: f64,
    /// Largest mismatch between the direct energy and the isometry form
    /// `W†(Hᵀ ⊗ 1)W`.
    pub rewrite_mismatch: f64,
    pub passed: bool,
}

/// Run the exact recursion `ρ_{k+1} = ℛ(A_k, ρ_k)` next to the snapped one
/// `ρ̃_{k+1} = 𝒩(ℛ(A_k, ρ̃_k))` and compare them against `(k − 1) ε_ρ`.
pub fn verify_rho_drift(
    h: &ChainHamiltonian,
    m: &MpsState,
    net: &DensityNet,
    eps_rho: f64,
) -> Result<RhoDriftReport> {
    if !m.is_canonical() {
        return Err(Error::Precondition("tensors must satisfy the gauge condition".into()));
    }
    if m.len() != h.n() || m.d() != h.d() {
        return Err(Error::Dimension("MPS does not match the chain".into()));
    }
    let dims = m.bond_dims();
    if dims.iter().any(|&b| b != net.dim()) {
        return Err(Error::Dimension(format!(
            "all bonds must have the net dimension {}",
            net.dim()
        )));
    }
    let tol = 1e-10;
    let one = CMat::from_element(1, 1, C64::new(1.0, 0.0));
    let (mut exact, mut snapped) = (one.clone(), one);
    let mut steps = Vec::with_capacity(m.len());
    let mut rewrite_mismatch = 0.0f64;
    let mut snap = 0.0;
    for k in 0..m.len() {
        let site = k + 1;
        let drift = trace_norm_hermitian(&(&snapped - &exact));
        let bound = k as f64 * eps_rho;
        let (mut energy_deviation, mut energy_bound) = (0.0, 0.0);
        if k + 1 < m.len() {
            if let Some(term) = h.term(k) {
                let (a, b) = (m.tensor(k), m.tensor(k + 1));
                let op = energy_operator(a, b, term)?;
                let e_exact = (&exact * &op).trace().re;
                let e_snapped = (&snapped * &op).trace().re;
                let w = isometry_form(a, b, term);
                rewrite_mismatch = rewrite_mismatch
                    .max(((&exact * &w).trace().re - e_exact).abs())
                    .max(((&snapped * &w).trace().re - e_snapped).abs());
                energy_deviation = (e_exact - e_snapped).abs();
                energy_bound = bound * op_norm(term);
            }
        }
        steps.push(RhoDriftStep {
            site,
            drift,
            bound,
            snap,
            energy_deviation,
            energy_bound,
        });
        if k + 1 < m.len() {
            exact = advance_rho(m.tensor(k), &exact)?;
            let next = advance_rho(m.tensor(k), &snapped)?;
            let (idx, dist) = net.nearest(&net.basis().coords(&next))?;
            snapped = net.matrix(idx);
            snap = dist;
        }
    }
    let max_drift = steps.iter().map(|s| s.drift).fold(0.0, f64::max);
    let passed = rewrite_mismatch <= tol
        && steps
            .iter()
            .all(|s| s.drift <= s.bound + tol && s.energy_deviation <= s.energy_bound + tol);
    Ok(RhoDriftReport {
        eps_rho,
        steps,
        max_drift,
        rewrite_mismatch,
        passed,
    })
}

/// `W†(Hᵀ ⊗ 1)W` with the isometry `W = Σ_{cw} |cw⟩ ⊗ (A_c B_w)†`.
fn isometry_form(a: &SiteTensor, b: &SiteTensor, term: &CMat) -> CMat {
    let d = a.d();
    let dl = a.dl();
    let dr = b.dr();
    let mut w = CMat::zeros(d * d * dr, dl);
    for c in 0..d {
        for x in 0..d {
            let p = (a.matrix(c) * b.matrix(x)).adjoint();
            let row0 = (c * d + x) * dr;
            w.view_mut((row0, 0), (dr, dl)).copy_from(&p);
        }
    }
    let big = kron(&term.transpose(), &CMat::identity(dr, dr));
    w.adjoint() * big * w
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub eps_a: f64,
    /// `max_{k,i} ‖Ã_i^k − A_i^k‖∞`.
    pub max_perturbation: f64,
    pub overlap: f64,
    /// `1 − 2Ndε_A`.
    pub overlap_bound: f64,
    pub energy_difference: f64,
    /// `4N^{3/2}√(dε_A)` in physical units.
    pub energy_bound: f64,
    pub passed: bool,
}

/// Compare a gauge-satisfying MPS with a gauge-satisfying perturbation of
/// it whose site matrices move by at most `ε_A` in operator norm.
pub fn verify_overlap_bound(
    h: &ChainHamiltonian,
    m: &MpsState,
    perturbed: &MpsState,
    eps_a: f64,
) -> Result<OverlapReport> {
    let n = m.len() as f64;
    let d = m.d() as f64;
    if eps_a.is_nan() || eps_a < 0.0 || 2.0 * n * d * eps_a > 1.0 {
        return Err(Error::Precondition(format!("2Ndε_A = {} exceeds 1", 2.0 * n * d * eps_a)));
    }
    if !m.is_canonical() || !perturbed.is_canonical() {
        return Err(Error::Precondition("both states must satisfy the gauge condition".into()));
    }
    if m.len() != perturbed.len()
        || m.d() != perturbed.d()
        || m.tensors().iter().zip(perturbed.tensors()).any(|(a, b)| a.shape() != b.shape())
    {
        return Err(Error::Dimension("states have different shapes".into()));
    }
    let mut max_perturbation = 0.0f64;
    for (a, b) in m.tensors().iter().zip(perturbed.tensors()) {
        for i in 0..a.d() {
            max_perturbation = max_perturbation.max(op_norm(&(b.matrix(i) - a.matrix(i))));
        }
    }
    if max_perturbation > eps_a * (1.0 + 1e-12) + 1e-15 {
        return Err(Error::Precondition(format!(
            "perturbation {max_perturbation} exceeds ε_A = {eps_a}"
        )));
    }
    let ov = overlap(m, perturbed).norm();
    let overlap_bound = 1.0 - 2.0 * n * d * eps_a;
    let energy_difference = (evaluate_mps_energy(h, m)? - evaluate_mps_energy(h, perturbed)?).abs();
    let energy_bound = h.scale() * 4.0 * n.powf(1.5) * (d * eps_a).sqrt();
    let tol = 1e-10;
    Ok(OverlapReport {
        eps_a,
        max_perturbation,
        overlap: ov,
        overlap_bound,
        energy_difference,
        energy_bound,
        passed: ov >= overlap_bound - tol && energy_difference <= energy_bound + tol,
    })
}

/// Gauge-satisfying perturbation of `m` whose site matrices move by at
/// most `eps_a` in operator norm: each site is replaced by the polar
/// factor of `A + tG` for Gaussian `G`, with `t` shrunk until the bound
/// holds.
pub fn random_perturbation<R: Rng + ?Sized>(rng: &mut R, m: &MpsState, eps_a: f64) -> Result<MpsState> {
    let tensors = m
        .tensors()
        .iter()
        .map(|a| {
            let joined = a.joined();
            let g = random_gaussian(rng, a.dl(), a.d() * a.dr());
            let mut t = eps_a / g.norm().max(f64::MIN_POSITIVE);
            loop {
                let candidate = SiteTensor::from_joined(a.d(), &polar_rows(&(&joined + g.scale(t))))?;
                let dist = (0..a.d())
                    .map(|i| op_norm(&(candidate.matrix(i) - a.matrix(i))))
                    .fold(0.0, f64::max);
                if dist <= eps_a || t < 1e-300 {
                    return Ok(candidate);
                }
                t *= 0.5;
            }
        })
        .collect::<Result<Vec<_>>>()?;
    MpsState::new(tensors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{Boundary, Preset};
    use crate::mps::random_mps;
    use crate::nets::{DensityTarget, NetConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_perturbation_is_exact() {
        let h = ChainHamiltonian::from_preset(Preset::Tfim { g: 1.0 }, 6, Boundary::Open).unwrap();
        let m = random_mps(&mut ChaCha8Rng::seed_from_u64(1), 2, 6, 2);
        let r = verify_overlap_bound(&h, &m, &m, 0.01).unwrap();
        assert!((r.overlap - 1.0).abs() < 1e-12);
        assert!(r.energy_difference < 1e-12);
        assert!(r.passed);
        assert!(matches!(verify_overlap_bound(&h, &m, &m, 0.1), Err(Error::Precondition(_))));
    }

    #[test]
    fn drift_starts_at_zero() {
        let h = ChainHamiltonian::from_preset(Preset::Heisenberg, 5, Boundary::Open).unwrap();
        let m = random_mps(&mut ChaCha8Rng::seed_from_u64(2), 2, 5, 2);
        let config = NetConfig {
            certify_samples: 0,
            ..NetConfig::uncached()
        };
        let net = DensityNet::build(2, 0.5, DensityTarget::UnitTrace, &config).unwrap();
        let r = verify_rho_drift(&h, &m, &net, 0.5).unwrap();
        assert_eq!(r.steps[0].drift, 0.0);
        assert!(r.steps[1].drift <= 0.5 + 1e-12);
        assert!(r.rewrite_mismatch < 1e-12);
        assert!(r.passed, "{r:?}");
    }
}

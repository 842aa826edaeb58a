//! Named Hamiltonians: `ising_zz`, `tfim:g=<float>`, `heisenberg`, `aklt`.

use std::fmt;
use std::str::FromStr;

use super::{bond_count, Boundary, ChainHamiltonian, LocalTerm};
use crate::error::{Error, Result};
use crate::linalg::{identity, kron, CMat};

/// Single-site operators.
pub mod ops {
    use crate::linalg::{CMat, C64};

    pub fn x() -> CMat {
        CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
    }

    pub fn y() -> CMat {
        CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)])
    }

    pub fn z() -> CMat {
        CMat::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)])
    }

    /// Spin-1 operators `(Sx, Sy, Sz)` in the basis `|+1⟩, |0⟩, |−1⟩`.
    pub fn spin1() -> (CMat, CMat, CMat) {
        let s = std::f64::consts::SQRT_2;
        let mut plus = CMat::zeros(3, 3);
        plus[(0, 1)] = C64::new(s, 0.0);
        plus[(1, 2)] = C64::new(s, 0.0);
        let minus = plus.adjoint();
        let sx = (&plus + &minus).scale(0.5);
        let sy = (&plus - &minus) * C64::new(0.0, -0.5);
        let mut sz = CMat::zeros(3, 3);
        sz[(0, 0)] = C64::new(1.0, 0.0);
        sz[(2, 2)] = C64::new(-1.0, 0.0);
        (sx, sy, sz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// `Σ Z⊗Z`.
    IsingZz,
    /// `−Σ Z⊗Z − g Σ X`, the field split evenly over the bonds touching
    /// each site.
    Tfim { g: f64 },
    /// `Σ S·S` for spin 1/2.
    Heisenberg,
    /// Spin-1 chain with couplings equal to the projector onto total spin 2.
    Aklt,
}

impl Preset {
    pub fn local_dim(&self) -> usize {
        match self {
            Preset::Aklt => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::IsingZz => write!(f, "ising_zz"),
            Preset::Tfim { g } => write!(f, "tfim:g={g}"),
            Preset::Heisenberg => write!(f, "heisenberg"),
            Preset::Aklt => write!(f, "aklt"),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ising_zz" => Ok(Preset::IsingZz),
            "heisenberg" => Ok(Preset::Heisenberg),
            "aklt" => Ok(Preset::Aklt),
            _ => {
                let g = s
                    .strip_prefix("tfim:g=")
                    .ok_or_else(|| Error::Schema(format!("unknown preset {s:?}")))?;
                let g: f64 = g
                    .parse()
                    .map_err(|_| Error::Schema(format!("bad field strength in preset {s:?}")))?;
                if !g.is_finite() {
                    return Err(Error::Schema(format!("bad field strength in preset {s:?}")));
                }
                Ok(Preset::Tfim { g })
            }
        }
    }
}

pub(super) fn build(preset: Preset, n: usize, boundary: Boundary) -> Result<ChainHamiltonian> {
    if n < 2 {
        return Err(Error::Validation(format!("chain length must be >= 2, got {n}")));
    }
    let bonds = bond_count(n, boundary);
    let term_for = |bond: usize| -> CMat {
        match preset {
            Preset::IsingZz => kron(&ops::z(), &ops::z()),
            Preset::Heisenberg => heisenberg_term(),
            Preset::Aklt => aklt_term(),
            Preset::Tfim { g } => {
                let (left, right) = (bond, (bond + 1) % n);
                let weight = |site: usize| 1.0 / site_degree(site, n, boundary) as f64;
                let id = identity(2);
                let zz = kron(&ops::z(), &ops::z());
                let xl = kron(&ops::x(), &id);
                let xr = kron(&id, &ops::x());
                -(zz + xl.scale(g * weight(left)) + xr.scale(g * weight(right)))
            }
        }
    };
    let terms = (0..bonds)
        .map(|bond| LocalTerm {
            bond,
            matrix: term_for(bond),
        })
        .collect();
    let mut h = ChainHamiltonian::normalized(preset.local_dim(), n, boundary, terms, 1.0)?;
    h.set_preset(preset);
    Ok(h)
}

fn site_degree(site: usize, n: usize, boundary: Boundary) -> usize {
    match boundary {
        Boundary::Periodic => 2,
        Boundary::Open => {
            if site == 0 || site == n - 1 {
                1
            } else {
                2
            }
        }
    }
}

fn heisenberg_term() -> CMat {
    (kron(&ops::x(), &ops::x()) + kron(&ops::y(), &ops::y()) + kron(&ops::z(), &ops::z()))
        .scale(0.25)
}

/// Projector onto total spin 2 of two spin-1 sites,
/// `P₂ = ½ S·S + ⅙ (S·S)² + ⅓`.
pub fn aklt_term() -> CMat {
    let (sx, sy, sz) = ops::spin1();
    let ss = kron(&sx, &sx) + kron(&sy, &sy) + kron(&sz, &sz);
    let ss2 = &ss * &ss;
    ss.scale(0.5) + ss2.scale(1.0 / 6.0) + identity(9).scale(1.0 / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, op_norm};

    #[test]
    fn ising_zz_terms_are_zz() {
        let h = build(Preset::IsingZz, 3, Boundary::Open).unwrap();
        assert_eq!(h.bond_count(), 2);
        let zz = kron(&ops::z(), &ops::z());
        for bond in 0..2 {
            assert_eq!(h.term(bond).unwrap(), &zz);
        }
        assert_eq!(h.scale(), 1.0);
    }

    #[test]
    fn aklt_term_is_rank_five_projector() {
        let p = aklt_term();
        assert!((&p * &p - &p).norm() < 1e-12);
        let ev = hermitian_eigenvalues(&p);
        let ones = ev.iter().filter(|&&x| (x - 1.0).abs() < 1e-10).count();
        assert_eq!(ones, 5);
    }

    #[test]
    fn tfim_terms_are_normalized() {
        let h = build(Preset::Tfim { g: 1.0 }, 5, Boundary::Open).unwrap();
        let worst = h.terms().map(|(_, m)| op_norm(m)).fold(0.0, f64::max);
        assert!((worst - 1.0).abs() < 1e-12);
        assert!(h.scale() > 1.0);
    }

    #[test]
    fn preset_names_round_trip() {
        for name in ["ising_zz", "heisenberg", "aklt", "tfim:g=1.5", "tfim:g=2"] {
            let p: Preset = name.parse().unwrap();
            let again: Preset = p.to_string().parse().unwrap();
            assert_eq!(p, again);
        }
        assert!("tfim:h=1".parse::<Preset>().is_err());
    }
}

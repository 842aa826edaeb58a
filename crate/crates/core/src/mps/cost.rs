//! Operation counts of the net solvers as exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values with more decimal digits than this are reported by logarithm only.
const MAX_EXACT_DIGITS: f64 = 200_000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostValue {
    pub log10: f64,
    /// Scientific notation with seven significant digits.
    pub decimal: String,
    /// Exact value as `p` or `p/q`, absent when too long.
    pub exact: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub n: u64,
    pub d: u64,
    pub bond_dim: u64,
    pub delta: f64,
    /// `N d⁴ (10N/δ)^{4d}`.
    pub mean_field: CostValue,
    /// `N d⁴ D³ [3^{2d+1} 2^{12d} N^{6d+2} d^{2d} / δ³]^{2D²}`.
    pub mps: CostValue,
    /// `(10N/δ)^{2d}`.
    pub state_net: CostValue,
    /// `(3N²/δ)^{D²}`.
    pub density_net: CostValue,
    /// `(192 N³ d/δ²)^{2dD²}`.
    pub isometry_net: CostValue,
}

pub fn estimate_cost(n: u64, d: u64, bond_dim: u64, delta: f64) -> Result<CostReport> {
    if n == 0 || d == 0 || bond_dim == 0 {
        return Err(Error::Validation("N, d and D must be positive".into()));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Validation(format!("delta must be positive, got {delta}")));
    }
    let dl = BigRational::from_float(delta).expect("finite");
    let int = |x: u64| BigRational::from_integer(BigInt::from(x));
    let (nr, dr, br) = (int(n), int(d), int(bond_dim));
    let big = |e: u64| -> Result<u32> {
        u32::try_from(e).map_err(|_| Error::Validation("exponent too large".into()))
    };
    let d4 = pow(&dr, 4);
    let e_mf = big(4 * d)?;
    let state_base = int(10) * &nr / &dl;
    let mean_field = Term::new(&nr * &d4, state_base.clone(), e_mf);
    let inner = pow(&int(3), 2 * d as u32 + 1)
        * pow(&int(2), big(12 * d)?)
        * pow(&nr, big(6 * d + 2)?)
        * pow(&dr, big(2 * d)?)
        / pow(&dl, 3);
    let mps = Term::new(&nr * &d4 * pow(&br, 3), inner, big(2 * bond_dim * bond_dim)?);
    let state_net = Term::new(int(1), state_base, big(2 * d)?);
    let density_net = Term::new(int(1), int(3) * &nr * &nr / &dl, big(bond_dim * bond_dim)?);
    let isometry_net = Term::new(
        int(1),
        int(192) * pow(&nr, 3) * &dr / (&dl * &dl),
        big(2 * d * bond_dim * bond_dim)?,
    );
    Ok(CostReport {
        n,
        d,
        bond_dim,
        delta,
        mean_field: mean_field.value(),
        mps: mps.value(),
        state_net: state_net.value(),
        density_net: density_net.value(),
        isometry_net: isometry_net.value(),
    })
}

/// `prefactor · base^exponent`.
struct Term {
    prefactor: BigRational,
    base: BigRational,
    exponent: u32,
}

impl Term {
    fn new(prefactor: BigRational, base: BigRational, exponent: u32) -> Self {
        Term {
            prefactor,
            base,
            exponent,
        }
    }

    fn value(&self) -> CostValue {
        let log10 = log10_rational(&self.prefactor) + self.exponent as f64 * log10_rational(&self.base);
        let exact = (log10.abs() < MAX_EXACT_DIGITS).then(|| {
            let v = &self.prefactor * pow(&self.base, self.exponent);
            if v.is_integer() {
                v.numer().to_string()
            } else {
                format!("{}/{}", v.numer(), v.denom())
            }
        });
        CostValue {
            log10,
            decimal: scientific(log10),
            exact,
        }
    }
}

fn pow(x: &BigRational, e: u32) -> BigRational {
    num_traits::pow(x.clone(), e as usize)
}

fn log10_int(x: &BigInt) -> f64 {
    let s = x.abs().to_string();
    if s.len() <= 15 {
        return x.abs().to_f64().expect("small").log10();
    }
    let head: f64 = s[..15].parse().expect("digits");
    head.log10() + (s.len() - 15) as f64
}

fn log10_rational(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    if x.is_one() {
        return 0.0;
    }
    log10_int(x.numer()) - log10_int(x.denom())
}

fn scientific(log10: f64) -> String {
    let mut exp = log10.floor();
    let mut mantissa = 10f64.powf(log10 - exp);
    if format!("{mantissa:.6}").starts_with("10") {
        mantissa /= 10.0;
        exp += 1.0;
    }
    format!("{mantissa:.6}e{exp}")
}

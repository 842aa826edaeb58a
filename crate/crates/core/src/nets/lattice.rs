//! Cubic lattice enumeration inside spherical shells and a coarse grid for
//! greedy deduplication.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Lattice `s·ℤⁿ` restricted to `r_min ≤ ‖x‖ ≤ r_max`, optionally to
/// `x₀ ≥ 0`.
pub(crate) struct Shell {
    pub dims: usize,
    pub spacing: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub first_nonneg: bool,
}

fn unit_ball_volume(n: usize) -> f64 {
    // V_n = π^{n/2} / Γ(n/2 + 1), by the two-step recursion V_n = 2π/n V_{n−2}
    let mut v = if n.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if n.is_multiple_of(2) { 2 } else { 3 };
    while k <= n {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

impl Shell {
    /// Volume estimate of the number of lattice points.
    pub fn estimated_count(&self) -> f64 {
        let n = self.dims as i32;
        let mut vol = unit_ball_volume(self.dims)
            * ((self.r_max + self.spacing).powi(n) - (self.r_min - self.spacing).max(0.0).powi(n));
        if self.first_nonneg {
            vol *= 0.5;
        }
        vol / self.spacing.powi(n)
    }

    /// Visit every lattice point in the shell in a fixed order. Fails with
    /// a budget error once more than `ceiling` points have been produced.
    pub fn for_each(&self, ceiling: u64, mut visit: impl FnMut(&[f64])) -> Result<()> {
        if self.estimated_count() > ceiling as f64 {
            return Err(Error::Budget {
                required: self.estimated_count().min(u64::MAX as f64) as u64,
                ceiling,
            });
        }
        let mut point = vec![0.0; self.dims];
        let mut count = 0u64;
        self.recurse(1, 0.0, &mut point, &mut count, ceiling, &mut visit)
    }

    fn recurse(
        &self,
        dim: usize,
        q: f64,
        point: &mut [f64],
        count: &mut u64,
        ceiling: u64,
        visit: &mut impl FnMut(&[f64]),
    ) -> Result<()> {
        let s = self.spacing;
        let slack = 1e-12;
        let r2_max = self.r_max * self.r_max;
        if dim == self.dims {
            // solve for the first coordinate
            let hi = (r2_max - q).max(0.0).sqrt() + slack;
            let lo2 = self.r_min * self.r_min - q;
            let lo = if lo2 > 0.0 { (lo2.sqrt() - slack).max(0.0) } else { 0.0 };
            let i_max = (hi / s).floor() as i64;
            let i_lo = (lo / s).ceil() as i64;
            let range: Box<dyn Iterator<Item = i64>> = if self.first_nonneg {
                Box::new(i_lo..=i_max)
            } else {
                Box::new((-i_max..=i_max).filter(move |i| i.abs() >= i_lo))
            };
            for i in range {
                point[0] = i as f64 * s;
                *count += 1;
                if *count > ceiling {
                    return Err(Error::Budget {
                        required: *count,
                        ceiling,
                    });
                }
                visit(point);
            }
            return Ok(());
        }
        let room = (r2_max - q).max(0.0).sqrt() + slack;
        let i_max = (room / s).floor() as i64;
        for i in -i_max..=i_max {
            let x = i as f64 * s;
            point[dim] = x;
            self.recurse(dim + 1, q + x * x, point, count, ceiling, visit)?;
        }
        Ok(())
    }
}

/// Spatial hash on (up to) three coordinates with cell size equal to the
/// search radius, so that any point within that radius lies in one of the
/// 27 surrounding cells.
#[derive(Debug, Clone)]
pub(crate) struct Grid {
    cell: f64,
    cells: HashMap<[i64; 3], Vec<u32>>,
}

impl Grid {
    pub fn new(cell: f64) -> Self {
        Grid {
            cell,
            cells: HashMap::new(),
        }
    }

    fn key(&self, x: [f64; 3]) -> [i64; 3] {
        x.map(|v| (v / self.cell).floor() as i64)
    }

    pub fn insert(&mut self, x: [f64; 3], id: u32) {
        let k = self.key(x);
        self.cells.entry(k).or_default().push(id);
    }

    /// Ids in the neighbouring cells; stops early when `f` returns true.
    pub fn any_near(&self, x: [f64; 3], mut f: impl FnMut(u32) -> bool) -> bool {
        let k = self.key(x);
        for a in -1..=1 {
            for b in -1..=1 {
                for c in -1..=1 {
                    if let Some(ids) = self.cells.get(&[k[0] + a, k[1] + b, k[2] + c]) {
                        if ids.iter().any(|&id| f(id)) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(4) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn shell_matches_brute_force() {
        let shell = Shell {
            dims: 3,
            spacing: 0.2,
            r_min: 0.7,
            r_max: 1.1,
            first_nonneg: true,
        };
        let mut seen = Vec::new();
        shell.for_each(1_000_000, |p| seen.push(p.to_vec())).unwrap();
        let mut brute = 0;
        for i in 0..=6 {
            for j in -6..=6 {
                for k in -6..=6 {
                    let r = ((i * i + j * j + k * k) as f64).sqrt() * 0.2;
                    if (0.7 - 1e-12..=1.1 + 1e-12).contains(&r) {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(seen.len(), brute);
        assert!(seen.iter().all(|p| p[0] >= 0.0));
    }

    #[test]
    fn budget_is_enforced() {
        let shell = Shell {
            dims: 4,
            spacing: 0.01,
            r_min: 0.0,
            r_max: 1.0,
            first_nonneg: false,
        };
        assert!(matches!(shell.for_each(1000, |_| {}), Err(Error::Budget { .. })));
    }
}

//! Exact ground states of classical chains by left-to-right dynamic
//! programming over the boundary spin.
//!
//! `E_1(i) = 0`, `E_k(i) = min_j [E_{k−1}(j) + h_{k−1,k}(j, i)]`, and the
//! ground energy is `min_i E_N(i)`. Periodic chains additionally index every
//! table by the first spin so that the wrap bond can be added at the end.
//!
//! Degenerate minima are resolved deterministically: every back-pointer
//! takes the smallest minimizing spin value and the final site takes the
//! smallest value, which selects the optimal configuration that is smallest
//! when read from the last site towards the first.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{Boundary, ClassicalChain};
use crate::linalg::neumaier_sum;

/// Work per site above which the minimization runs in parallel.
const PARALLEL_WORK: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSolution {
    pub energy: f64,
    pub configuration: Vec<usize>,
}

/// Per-site DP tables.
///
/// For open chains `energies[k][i]` is `E_{k+1}(i)`; for periodic chains the
/// entry `energies[k][first * d + i]` additionally fixes the first spin.
/// `backpointers` mirrors the layout and stores the minimizing spin of the
/// previous site (unused at site 0).
#[derive(Debug, Clone)]
pub struct ClassicalDpTable {
    pub d: usize,
    pub periodic: bool,
    pub energies: Vec<Vec<f64>>,
    pub backpointers: Vec<Vec<u32>>,
}

/// Fill the tables for an open chain started from `start` (the table of
/// site 0).
fn forward(c: &ClassicalChain, start: Vec<f64>) -> (Vec<Vec<f64>>, Vec<Vec<u32>>) {
    let d = c.d();
    let n = c.n();
    let mut energies = Vec::with_capacity(n);
    let mut backpointers = Vec::with_capacity(n);
    energies.push(start);
    backpointers.push(vec![0; d]);
    for k in 1..n {
        let prev = &energies[k - 1];
        let bond = k - 1;
        let best = |i: usize| -> (f64, u32) {
            let mut best = (f64::INFINITY, 0u32);
            for (j, &e) in prev.iter().enumerate() {
                let w = e + c.cost(bond, j, i);
                if w < best.0 {
                    best = (w, j as u32);
                }
            }
            best
        };
        let row: Vec<(f64, u32)> = if d * d >= PARALLEL_WORK {
            (0..d).into_par_iter().map(best).collect()
        } else {
            (0..d).map(best).collect()
        };
        energies.push(row.iter().map(|r| r.0).collect());
        backpointers.push(row.iter().map(|r| r.1).collect());
    }
    (energies, backpointers)
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

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Reverse-lexicographic comparison (last site most significant).
fn reverse_lex_less(a: &[usize], b: &[usize]) -> bool {
    a.iter().rev().lt(b.iter().rev())
}

pub fn classical_dp_table(c: &ClassicalChain) -> ClassicalDpTable {
    let d = c.d();
    match c.boundary() {
        Boundary::Open => {
            let (energies, backpointers) = forward(c, vec![0.0; d]);
            ClassicalDpTable {
                d,
                periodic: false,
                energies,
                backpointers,
            }
        }
        Boundary::Periodic => {
            let runs: Vec<_> = (0..d)
                .map(|first| {
                    let mut start = vec![f64::INFINITY; d];
                    start[first] = 0.0;
                    forward(c, start)
                })
                .collect();
            let n = c.n();
            let mut energies = vec![Vec::with_capacity(d * d); n];
            let mut backpointers = vec![Vec::with_capacity(d * d); n];
            for (e, b) in runs {
                for k in 0..n {
                    energies[k].extend_from_slice(&e[k]);
                    backpointers[k].extend_from_slice(&b[k]);
                }
            }
            ClassicalDpTable {
                d,
                periodic: true,
                energies,
                backpointers,
            }
        }
    }
}

/// Exact minimum of the chain energy and a configuration attaining it.
pub fn solve_classical(c: &ClassicalChain) -> ClassicalSolution {
    let table = classical_dp_table(c);
    let d = c.d();
    let n = c.n();
    if !table.periodic {
        let last = argmin(&table.energies[n - 1]);
        return ClassicalSolution {
            energy: table.energies[n - 1][last],
            configuration: backtrack(&table.backpointers, last),
        };
    }
    let wrap = n - 1;
    let mut best: Option<ClassicalSolution> = None;
    for first in 0..d {
        let row = &table.energies[n - 1][first * d..(first + 1) * d];
        let totals: Vec<f64> = (0..d).map(|i| row[i] + c.cost(wrap, i, first)).collect();
        let last = argmin(&totals);
        let energy = totals[last];
        let pointers: Vec<Vec<u32>> = table
            .backpointers
            .iter()
            .map(|b| b[first * d..(first + 1) * d].to_vec())
            .collect();
        let configuration = backtrack(&pointers, last);
        let better = match &best {
            None => true,
            Some(b) => {
                energy < b.energy
                    || (energy == b.energy && reverse_lex_less(&configuration, &b.configuration))
            }
        };
        if better {
            best = Some(ClassicalSolution {
                energy,
                configuration,
            });
        }
    }
    best.expect("d >= 1")
}

/// Sum of bond costs of `configuration`, including the wrap bond for
/// periodic chains.
pub fn evaluate_classical(c: &ClassicalChain, configuration: &[usize]) -> Result<f64> {
    if configuration.len() != c.n() {
        return Err(Error::Length {
            expected: c.n(),
            got: configuration.len(),
        });
    }
    if let Some((site, &value)) = configuration.iter().enumerate().find(|(_, &v)| v >= c.d()) {
        return Err(Error::Range {
            site,
            value,
            d: c.d(),
        });
    }
    let n = c.n();
    let bonds = c.tables().len();
    Ok(neumaier_sum(
        (0..bonds).map(|k| c.cost(k, configuration[k], configuration[(k + 1) % n])),
    ))
}

//! Small dense complex linear algebra shared by the solvers.
//!
//! Hot loops work on row-major `&[C64]` slices; everything else goes through
//! `nalgebra::DMatrix`. Hermitian matrices are frequently carried in real
//! coordinates with respect to an orthonormal (Hilbert-Schmidt) Hermitian
//! basis, so that `tr(XY)` becomes a plain dot product.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn symmetrize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Largest singular value of a row-major `rows × cols` block.
pub fn op_norm_slice(data: &[C64], rows: usize, cols: usize) -> f64 {
    debug_assert_eq!(data.len(), rows * cols);
    if rows == 1 || cols == 1 {
        return frob_slice(data);
    }
    if rows == 2 || cols == 2 {
        // Gram matrix on the 2-dimensional side.
        let (g00, g11, g01) = if rows == 2 {
            let (r0, r1) = data.split_at(cols);
            let g00: f64 = r0.iter().map(|z| z.norm_sqr()).sum();
            let g11: f64 = r1.iter().map(|z| z.norm_sqr()).sum();
            let g01: C64 = r0.iter().zip(r1).map(|(a, b)| a * b.conj()).sum();
            (g00, g11, g01)
        } else {
            let mut g00 = 0.0;
            let mut g11 = 0.0;
            let mut g01 = ZERO;
            for r in 0..rows {
                let a = data[r * 2];
                let b = data[r * 2 + 1];
                g00 += a.norm_sqr();
                g11 += b.norm_sqr();
                g01 += a.conj() * b;
            }
            (g00, g11, g01)
        };
        let half_tr = 0.5 * (g00 + g11);
        let half_diff = 0.5 * (g00 - g11);
        let lam = half_tr + (half_diff * half_diff + g01.norm_sqr()).sqrt();
        return lam.max(0.0).sqrt();
    }
    let m = CMat::from_row_slice(rows, cols, data);
    op_norm(&m)
}

pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows() <= 2 || m.ncols() <= 2 {
        let data: Vec<C64> = row_major(m);
        return op_norm_slice(&data, m.nrows(), m.ncols());
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |a, &b| a.max(b))
}

pub fn frob_slice(data: &[C64]) -> f64 {
    data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn row_major(m: &CMat) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMat) -> f64 {
    match m.nrows() {
        0 => 0.0,
        1 => m[(0, 0)].re.abs(),
        _ => hermitian_eigenvalues(m).iter().map(|x| x.abs()).sum(),
    }
}

/// Nearest matrix with orthonormal rows (in every unitarily invariant norm),
/// `M = U S V† ↦ U V†`. Requires `rows ≤ cols`.
pub fn polar_rows(m: &CMat) -> CMat {
    assert!(m.nrows() <= m.ncols(), "polar_rows needs rows <= cols");
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    u * v_t
}

pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

/// Haar-random unit vector in `C^n`.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = frob_slice(&v);
        if norm > 1e-8 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Multiply by the unit phase that makes the first coordinate with
/// magnitude above `tol` real and non-negative.
pub fn fix_phase(data: &mut [C64], tol: f64) {
    if let Some(z) = data.iter().find(|z| z.norm() > tol) {
        let phase = z.conj() / z.norm();
        for x in data.iter_mut() {
            *x *= phase;
        }
    }
}

/// Euclidean projection onto `{x ≥ 0, Σx = total}`.
pub fn project_simplex(values: &[f64], total: f64) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        cumulative += v;
        let t = (cumulative - total) / (i + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    values.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// Euclidean projection onto `{x ≥ 0, Σx ≤ total}`.
pub fn project_capped_simplex(values: &[f64], total: f64) -> Vec<f64> {
    let clipped: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= total {
        clipped
    } else {
        project_simplex(values, total)
    }
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Orthonormal Hermitian basis of `D × D` matrices under the
/// Hilbert-Schmidt inner product.
///
/// Coordinate order: `tr(X)/√D`, then the `D − 1` traceless diagonal
/// directions, then for each `j < k` the pair `(√2 Re X_jk, √2 Im X_jk)`.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    /// `diag[m][j]`: diagonal entry `j` of diagonal basis element `m`.
    diag: Vec<Vec<f64>>,
    pairs: Vec<(usize, usize)>,
}

impl HermitianBasis {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1);
        let mut diag = vec![vec![1.0 / (dim as f64).sqrt(); dim]];
        for k in 1..dim {
            let norm = ((k * (k + 1)) as f64).sqrt();
            let mut h = vec![0.0; dim];
            for v in h.iter_mut().take(k) {
                *v = 1.0 / norm;
            }
            h[k] = -(k as f64) / norm;
            diag.push(h);
        }
        let mut pairs = Vec::new();
        for j in 0..dim {
            for k in (j + 1)..dim {
                pairs.push((j, k));
            }
        }
        HermitianBasis { dim, diag, pairs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.dim * self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinates of the Hermitian part of a row-major `dim × dim` matrix.
    pub fn coords_slice(&self, m: &[C64], out: &mut [f64]) {
        let n = self.dim;
        debug_assert_eq!(m.len(), n * n);
        for (slot, h) in out.iter_mut().zip(&self.diag) {
            *slot = (0..n).map(|j| h[j] * m[j * n + j].re).sum();
        }
        let s2 = std::f64::consts::SQRT_2;
        for (p, &(j, k)) in self.pairs.iter().enumerate() {
            // average with the mirrored entry so that tiny anti-Hermitian
            // residue is discarded consistently
            let z = 0.5 * (m[j * n + k] + m[k * n + j].conj());
            out[n + 2 * p] = s2 * z.re;
            out[n + 2 * p + 1] = s2 * z.im;
        }
    }

    pub fn coords(&self, m: &CMat) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.coords_slice(&row_major(m), &mut out);
        out
    }

    pub fn matrix(&self, coords: &[f64]) -> CMat {
        let n = self.dim;
        let mut m = CMat::zeros(n, n);
        for (c, h) in coords.iter().zip(&self.diag) {
            for j in 0..n {
                m[(j, j)] += C64::new(c * h[j], 0.0);
            }
        }
        let inv_s2 = std::f64::consts::FRAC_1_SQRT_2;
        for (p, &(j, k)) in self.pairs.iter().enumerate() {
            let z = C64::new(coords[n + 2 * p] * inv_s2, coords[n + 2 * p + 1] * inv_s2);
            m[(j, k)] = z;
            m[(k, j)] = z.conj();
        }
        m
    }

    /// Trace norm of the Hermitian matrix with the given coordinates.
    pub fn trace_norm(&self, coords: &[f64]) -> f64 {
        match self.dim {
            1 => coords[0].abs(),
            2 => {
                // X = c0 I/√2 + v·σ/√2 with eigenvalues (c0 ± |v|)/√2
                let c0 = coords[0];
                let v = (coords[1] * coords[1] + coords[2] * coords[2] + coords[3] * coords[3])
                    .sqrt();
                std::f64::consts::SQRT_2 * c0.abs().max(v)
            }
            _ => trace_norm_hermitian(&self.matrix(coords)),
        }
    }

    pub fn trace(&self, coords: &[f64]) -> f64 {
        coords[0] * (self.dim as f64).sqrt()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
        let g = random_gaussian(rng, n, n);
        symmetrize(&g)
    }

    #[test]
    fn basis_round_trip_and_inner_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4 {
            let basis = HermitianBasis::new(n);
            let x = random_hermitian(&mut rng, n);
            let y = random_hermitian(&mut rng, n);
            let cx = basis.coords(&x);
            let cy = basis.coords(&y);
            let back = basis.matrix(&cx);
            assert!((&back - &x).norm() < 1e-12);
            let tr = (&x * &y).trace().re;
            assert!((dot(&cx, &cy) - tr).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_norm_closed_forms_match_eigen() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=3 {
            let basis = HermitianBasis::new(n);
            for _ in 0..20 {
                let x = random_hermitian(&mut rng, n);
                let direct = trace_norm_hermitian(&x);
                assert!((basis.trace_norm(&basis.coords(&x)) - direct).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn op_norm_fast_paths_match_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (r, c) in [(1, 3), (3, 1), (2, 2), (2, 5), (5, 2), (3, 3)] {
            let m = random_gaussian(&mut rng, r, c);
            let svd_max = m
                .clone()
                .svd(false, false)
                .singular_values
                .iter()
                .fold(0.0f64, |a, &b| a.max(b));
            assert!((op_norm_slice(&row_major(&m), r, c) - svd_max).abs() < 1e-10);
        }
    }

    #[test]
    fn polar_rows_gives_orthonormal_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_gaussian(&mut rng, 2, 6);
        let p = polar_rows(&m);
        assert!((&p * p.adjoint() - identity(2)).norm() < 1e-12);
    }

    #[test]
    fn simplex_projections() {
        let p = project_simplex(&[0.5, 0.7, -0.2], 1.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p.iter().all(|&x| x >= 0.0));
        assert_eq!(project_capped_simplex(&[0.2, -0.1], 1.0), vec![0.2, 0.0]);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let values = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(neumaier_sum(values), 2.0);
    }
}

//! Dense complex linear algebra over small Hilbert spaces.
//!
//! Composite indices are row-major and subsystem-1-major: for subsystem
//! dimensions `(d_1, ..., d_k)` the basis state `|i_1 i_2 ... i_k>` sits at flat
//! index `((i_1 * d_2 + i_2) * d_3 + i_3) ...`. So `|110>` on three qubits is
//! index 6, and `kron(a, b)` places `(i, j)` at `i * b.rows + j`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{GmeError, Result};

/// Absolute, entrywise tolerance used to accept a matrix as hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense row-major matrix of complex scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(GmeError::Shape(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(GmeError::Shape(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(pos) = entries
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(GmeError::Validation(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be non-empty");
        Self {
            rows,
            cols,
            entries: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.entries[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.entries[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    /// `|v><w|` for two vectors.
    pub fn outer(v: &[Complex64], w: &[Complex64]) -> Self {
        Self::from_fn(v.len(), w.len(), |i, j| v[i] * w[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.cols + col]
    }

    #[inline]
    pub(crate) fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.cols + col] = value;
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(GmeError::Shape(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    /// Largest entrywise deviation `max |a - a^dagger|`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Largest entrywise distance to another matrix of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Indices `(row, col)` of entries whose modulus exceeds `tol`.
    pub fn nonzero_positions(&self, tol: f64) -> Vec<(usize, usize)> {
        (0..self.rows * self.cols)
            .filter(|&k| self.entries[k].norm() > tol)
            .map(|k| (k / self.cols, k % self.cols))
            .collect()
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(GmeError::Shape(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.entries[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ai in 0..a.rows {
        for aj in 0..a.cols {
            let x = a.get(ai, aj);
            if x == ZERO {
                continue;
            }
            for bi in 0..b.rows {
                for bj in 0..b.cols {
                    out.set(ai * b.rows + bi, aj * b.cols + bj, x * b.get(bi, bj));
                }
            }
        }
    }
    out
}

/// Kronecker product of a non-empty sequence, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> Option<ComplexMatrix> {
    factors.into_iter().fold(None, |acc, m| match acc {
        None => Some(m.clone()),
        Some(acc) => Some(kron(&acc, m)),
    })
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.cols, a.rows, |i, j| a.get(j, i).conj())
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return Err(GmeError::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = ComplexMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let x = a.get(i, k);
            if x == ZERO {
                continue;
            }
            for j in 0..b.cols {
                out.entries[i * b.cols + j] += x * b.get(k, j);
            }
        }
    }
    Ok(out)
}

pub fn trace(a: &ComplexMatrix) -> Result<Complex64> {
    if !a.is_square() {
        return Err(GmeError::Shape(format!(
            "trace of non-square {}x{} matrix",
            a.rows, a.cols
        )));
    }
    Ok((0..a.rows).map(|i| a.get(i, i)).sum())
}

/// `Tr(obs * rho)`, evaluated without forming the product.
pub fn expectation(rho: &ComplexMatrix, obs: &ComplexMatrix) -> Result<Complex64> {
    if !rho.is_square() || !obs.is_square() || rho.rows != obs.rows {
        return Err(GmeError::Shape(format!(
            "expectation needs square matrices of equal size, got {}x{} and {}x{}",
            rho.rows, rho.cols, obs.rows, obs.cols
        )));
    }
    let n = rho.rows;
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            let o = obs.get(i, j);
            if o != ZERO {
                acc += o * rho.get(j, i);
            }
        }
    }
    Ok(acc)
}

/// Spectral decomposition of a hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Unitary whose columns are the matching eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<HermitianEigen> {
    let dev = h.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(GmeError::Validation(format!(
            "matrix is not hermitian (max |h - h^dagger| = {dev:e})"
        )));
    }
    let eig = h.to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..h.rows).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vectors = ComplexMatrix::from_nalgebra(&eig.eigenvectors);
    Ok(HermitianEigen {
        eigenvalues: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        eigenvectors: ComplexMatrix::from_fn(h.rows, h.rows, |i, j| vectors.get(i, order[j])),
    })
}

impl HermitianEigen {
    /// `exp(-i t h) v` from the stored decomposition.
    pub fn evolve(&self, t: f64, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.eigenvalues.len();
        if v.len() != n {
            return Err(GmeError::Shape(format!(
                "state of length {} for {n}-dimensional generator",
                v.len()
            )));
        }
        let u = &self.eigenvectors;
        let coords: Vec<Complex64> = (0..n)
            .map(|k| {
                let overlap: Complex64 = (0..n).map(|i| u.get(i, k).conj() * v[i]).sum();
                overlap * Complex64::from_polar(1.0, -self.eigenvalues[k] * t)
            })
            .collect();
        Ok((0..n)
            .map(|i| (0..n).map(|k| u.get(i, k) * coords[k]).sum())
            .collect())
    }
}

/// `exp(-i t h) v` via the eigendecomposition of `h`.
pub fn hermitian_evolve(h: &ComplexMatrix, t: f64, v: &[Complex64]) -> Result<Vec<Complex64>> {
    if !t.is_finite() {
        return Err(GmeError::Validation(format!(
            "evolution time must be finite, got {t}"
        )));
    }
    if v.len() != h.rows {
        return Err(GmeError::Shape(format!(
            "state of length {} for {}x{} generator",
            v.len(),
            h.rows,
            h.cols
        )));
    }
    hermitian_eigen(h)?.evolve(t, v)
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `<v|w>`.
pub fn inner(v: &[Complex64], w: &[Complex64]) -> Complex64 {
    v.iter().zip(w).map(|(a, b)| a.conj() * b).sum()
}

/// Digits of flat `index` in the mixed radix `dims` (subsystem-1-major).
pub fn multi_index(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (slot, &d) in digits.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    digits
}

/// Flat index of the sub-register `sites` read from full `digits`.
pub fn sub_index(digits: &[usize], sites: &[usize], dims: &[usize]) -> usize {
    sites.iter().fold(0, |acc, &s| acc * dims[s] + digits[s])
}

/// Tensor product of operators living on disjoint groups of sites.
///
/// Each block's matrix is indexed by its sites in the order given, which need
/// not be contiguous or sorted. Sites not covered by any block get identity.
pub fn kron_on_sites(
    dims: &[usize],
    blocks: &[(&[usize], &ComplexMatrix)],
) -> Result<ComplexMatrix> {
    let mut seen = vec![false; dims.len()];
    for (sites, m) in blocks {
        let block_dim: usize = sites
            .iter()
            .map(|&s| dims.get(s).copied().unwrap_or(0))
            .product();
        for &s in sites.iter() {
            if s >= dims.len() {
                return Err(GmeError::Index {
                    index: s,
                    dim: dims.len(),
                });
            }
            if seen[s] {
                return Err(GmeError::Validation(format!(
                    "site {s} appears in more than one block"
                )));
            }
            seen[s] = true;
        }
        if m.rows != block_dim || m.cols != block_dim {
            return Err(GmeError::Shape(format!(
                "block on sites {sites:?} needs a {block_dim}x{block_dim} matrix, got {}x{}",
                m.rows, m.cols
            )));
        }
    }
    let total: usize = dims.iter().product();
    let digits: Vec<Vec<usize>> = (0..total).map(|i| multi_index(i, dims)).collect();
    let free: Vec<usize> = (0..dims.len()).filter(|&s| !seen[s]).collect();
    let mut out = ComplexMatrix::zeros(total, total);
    for i in 0..total {
        for j in 0..total {
            if free.iter().any(|&s| digits[i][s] != digits[j][s]) {
                continue;
            }
            let mut x = ONE;
            for (sites, m) in blocks {
                x *= m.get(
                    sub_index(&digits[i], sites, dims),
                    sub_index(&digits[j], sites, dims),
                );
                if x == ZERO {
                    break;
                }
            }
            out.set(i, j, x);
        }
    }
    Ok(out)
}

/// Product vector `psi_S (x) psi_T` for a split of the sites into two groups.
pub fn product_vector_on_sites(
    dims: &[usize],
    blocks: &[(&[usize], &[Complex64])],
) -> Vec<Complex64> {
    let total: usize = dims.iter().product();
    (0..total)
        .map(|i| {
            let digits = multi_index(i, dims);
            blocks
                .iter()
                .map(|(sites, v)| v[sub_index(&digits, sites, dims)])
                .product()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sigma_minus() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn kron_identity_and_neutral() {
        assert_eq!(
            kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)),
            ComplexMatrix::identity(4)
        );
        let m =
            ComplexMatrix::new(2, 3, (0..6).map(|k| c(k as f64, -(k as f64))).collect()).unwrap();
        assert_eq!(kron(&ComplexMatrix::identity(1), &m), m);
    }

    #[test]
    fn kron_sigma_minus_pair_is_single_entry() {
        let k = kron(&sigma_minus(), &sigma_minus());
        assert_eq!(k.nonzero_positions(0.0), vec![(0, 3)]);
        assert_eq!(k.get(0, 3), ONE);
    }

    #[test]
    fn adjoint_examples() {
        let sp = ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(adjoint(&sigma_minus()), sp);
        assert_eq!(
            adjoint(&ComplexMatrix::identity(3)),
            ComplexMatrix::identity(3)
        );
        let lower =
            ComplexMatrix::from_real(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let raise =
            ComplexMatrix::from_real(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(adjoint(&lower), raise);
    }

    #[test]
    fn matmul_ladder_algebra() {
        let sm = sigma_minus();
        let sp = adjoint(&sm);
        assert_eq!(
            matmul(&sm, &sp).unwrap(),
            ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap()
        );
        assert_eq!(
            matmul(&sp, &sm).unwrap(),
            ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 0.0, 1.0]).unwrap()
        );
        let lower =
            ComplexMatrix::from_real(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let n = matmul(&adjoint(&lower), &lower).unwrap();
        assert_eq!(
            n,
            ComplexMatrix::from_real(3, 3, &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]).unwrap()
        );
    }

    #[test]
    fn matmul_shape_error() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(matches!(matmul(&a, &a), Err(GmeError::Shape(_))));
    }

    #[test]
    fn trace_examples() {
        assert_eq!(trace(&ComplexMatrix::identity(4)).unwrap(), c(4.0, 0.0));
        assert_eq!(trace(&sigma_minus()).unwrap(), ZERO);
        let mut ket = vec![ZERO; 8];
        ket[0b101] = ONE;
        assert_eq!(trace(&ComplexMatrix::outer(&ket, &ket)).unwrap(), ONE);
        assert!(matches!(
            trace(&ComplexMatrix::zeros(2, 3)),
            Err(GmeError::Shape(_))
        ));
    }

    #[test]
    fn expectation_examples() {
        let rho = ComplexMatrix::identity(8).scale(c(1.0 / 8.0, 0.0));
        assert!((expectation(&rho, &ComplexMatrix::identity(8)).unwrap() - ONE).norm() < 1e-15);
        let mut ket = vec![ZERO; 8];
        ket[0b111] = ONE;
        let proj = ComplexMatrix::outer(&ket, &ket);
        // A^dagger A B B^dagger C^dagger C for A = B = C = sigma_minus is |101><101|;
        // with B -> B^dagger B it becomes |111><111|.
        let n1 = ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 0.0, 1.0]).unwrap();
        let obs = kron_all([&n1, &n1, &n1]).unwrap();
        assert_eq!(expectation(&proj, &obs).unwrap(), ONE);
        assert!(expectation(&proj, &ComplexMatrix::identity(4)).is_err());
    }

    #[test]
    fn rejects_non_finite_and_bad_lengths() {
        assert!(ComplexMatrix::new(1, 2, vec![ONE]).is_err());
        assert!(ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexMatrix::new(0, 1, vec![]).is_err());
    }

    #[test]
    fn evolve_zero_time_and_diagonal() {
        let h = ComplexMatrix::from_real(3, 3, &[0.5, 0.0, 0.0, 0.0, -1.25, 0.0, 0.0, 0.0, 2.0])
            .unwrap();
        let v = vec![c(0.6, 0.0), c(0.0, 0.8), ZERO];
        let out = hermitian_evolve(&h, 0.0, &v).unwrap();
        for (a, b) in out.iter().zip(&v) {
            assert!((a - b).norm() < 1e-14);
        }
        let t = 1.7;
        let e1 = vec![ZERO, ONE, ZERO];
        let out = hermitian_evolve(&h, t, &e1).unwrap();
        assert!((out[1] - Complex64::from_polar(1.0, 1.25 * t)).norm() < 1e-14);
        assert!(out[0].norm() < 1e-14 && out[2].norm() < 1e-14);
    }

    #[test]
    fn evolve_rejects_non_hermitian() {
        assert!(matches!(
            hermitian_evolve(&sigma_minus(), 1.0, &[ONE, ZERO]),
            Err(GmeError::Validation(_))
        ));
    }

    #[test]
    fn evolve_two_level_rabi() {
        // h = sigma_x: exp(-i t sigma_x)|0> = cos t |0> - i sin t |1>
        let h = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let t = 0.9;
        let out = hermitian_evolve(&h, t, &[ONE, ZERO]).unwrap();
        assert!((out[0] - c(t.cos(), 0.0)).norm() < 1e-14);
        assert!((out[1] - c(0.0, -t.sin())).norm() < 1e-14);
    }

    #[test]
    fn kron_on_sites_matches_kron_for_contiguous_blocks() {
        let a = ComplexMatrix::new(
            2,
            2,
            vec![c(1.0, 2.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.5, 0.5)],
        )
        .unwrap();
        let b = ComplexMatrix::from_fn(6, 6, |i, j| c((i * 6 + j) as f64, (i as f64) - (j as f64)));
        let dims = [2, 2, 3];
        let direct = kron(&a, &b);
        let via = kron_on_sites(&dims, &[(&[0], &a), (&[1, 2], &b)]).unwrap();
        assert!(direct.max_abs_diff(&via) < 1e-15);
        // swapping the order of sites within a block is a permutation of b's indices
        let swapped = kron_on_sites(&[2, 2], &[(&[1, 0], &kron(&a, &sigma_minus()))]).unwrap();
        assert!(swapped.max_abs_diff(&kron(&sigma_minus(), &a)) < 1e-15);
    }

    #[test]
    fn kron_on_sites_rejects_overlap() {
        let a = sigma_minus();
        assert!(kron_on_sites(&[2, 2], &[(&[0], &a), (&[0], &a)]).is_err());
    }

    fn arb_matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), rows * cols).prop_map(move |v| {
            ComplexMatrix::new(rows, cols, v.into_iter().map(|(r, i)| c(r, i)).collect()).unwrap()
        })
    }

    fn arb_hermitian(n: usize) -> impl Strategy<Value = ComplexMatrix> {
        arb_matrix(n, n).prop_map(|m| m.add(&adjoint(&m)).unwrap().scale(c(0.5, 0.0)))
    }

    proptest! {
        #[test]
        fn kron_is_associative(a in arb_matrix(2, 3), b in arb_matrix(3, 2), c in arb_matrix(2, 2)) {
            let left = kron(&kron(&a, &b), &c);
            let right = kron(&a, &kron(&b, &c));
            prop_assert!(left.max_abs_diff(&right) < 1e-14);
        }

        #[test]
        fn adjoint_involution_and_trace_cyclic(a in arb_matrix(3, 4), b in arb_matrix(4, 3)) {
            prop_assert_eq!(adjoint(&adjoint(&a)), a.clone());
            let ab = trace(&matmul(&a, &b).unwrap()).unwrap();
            let ba = trace(&matmul(&b, &a).unwrap()).unwrap();
            prop_assert!((ab - ba).norm() < 1e-12);
        }

        #[test]
        fn evolution_preserves_norm(h in arb_hermitian(5), t in -10.0..10.0f64,
                                    v in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 5)) {
            let v: Vec<Complex64> = v.into_iter().map(|(r, i)| c(r, i)).collect();
            prop_assume!(norm(&v) > 1e-3);
            let out = hermitian_evolve(&h, t, &v).unwrap();
            prop_assert!((norm(&out) - norm(&v)).abs() < 1e-10);
        }
    }
}

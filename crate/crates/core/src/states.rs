//! Pure states, density matrices and the random biseparable ensemble.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{GmeError, Result};
use crate::tensor::{self, expectation, hermitian_eigen, ComplexMatrix};

/// Tolerance on the density-matrix invariants (hermiticity, unit trace, positivity).
pub const DENSITY_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-12;

/// Subsystem dimensions of a composite system, each at least 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HilbertDims(Vec<usize>);

impl HilbertDims {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if dims.is_empty() {
            return Err(GmeError::Validation(
                "at least one subsystem is required".into(),
            ));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(GmeError::Validation(format!(
                "subsystem dimension {d} is below 2"
            )));
        }
        Ok(Self(dims))
    }

    /// `n` copies of dimension `d`.
    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn parties(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Flat index of a basis occupation tuple.
    pub fn flat_index(&self, occupation: &[usize]) -> Result<usize> {
        if occupation.len() != self.0.len() {
            return Err(GmeError::Shape(format!(
                "occupation {occupation:?} has {} entries for {} subsystems",
                occupation.len(),
                self.0.len()
            )));
        }
        occupation.iter().zip(&self.0).try_fold(0, |acc, (&i, &d)| {
            if i >= d {
                Err(GmeError::Index { index: i, dim: d })
            } else {
                Ok(acc * d + i)
            }
        })
    }

    pub fn occupation(&self, index: usize) -> Vec<usize> {
        tensor::multi_index(index, &self.0)
    }
}

/// Anything on which the witnesses can take expectation values.
pub trait QuantumState {
    fn dims(&self) -> &HilbertDims;

    /// `Tr(O rho)` for an arbitrary operator on the full space.
    fn expectation(&self, obs: &ComplexMatrix) -> Result<Complex64>;

    /// `Tr((F_1 (x) ... (x) F_k) rho)` without materialising the tensor product.
    fn product_expectation(&self, factors: &[&ComplexMatrix]) -> Result<Complex64>;
}

fn check_factors(dims: &HilbertDims, factors: &[&ComplexMatrix]) -> Result<()> {
    if factors.len() != dims.parties() {
        return Err(GmeError::Shape(format!(
            "{} factors for {} subsystems",
            factors.len(),
            dims.parties()
        )));
    }
    for (k, (f, &d)) in factors.iter().zip(dims.as_slice()).enumerate() {
        if f.rows() != d || f.cols() != d {
            return Err(GmeError::Shape(format!(
                "factor {k} is {}x{} but subsystem {k} has dimension {d}",
                f.rows(),
                f.cols()
            )));
        }
    }
    Ok(())
}

/// Calls `visit(row, col, value)` for every nonzero entry of the tensor product.
fn for_each_product_entry(
    dims: &[usize],
    factors: &[&ComplexMatrix],
    mut visit: impl FnMut(usize, usize, Complex64),
) {
    let nonzero: Vec<Vec<(usize, usize, Complex64)>> = factors
        .iter()
        .map(|f| {
            f.nonzero_positions(0.0)
                .into_iter()
                .map(|(i, j)| (i, j, f.get(i, j)))
                .collect()
        })
        .collect();
    if nonzero.iter().any(Vec::is_empty) {
        return;
    }
    let mut cursor = vec![0usize; factors.len()];
    loop {
        let mut row = 0;
        let mut col = 0;
        let mut value = Complex64::new(1.0, 0.0);
        for (k, &c) in cursor.iter().enumerate() {
            let (i, j, v) = nonzero[k][c];
            row = row * dims[k] + i;
            col = col * dims[k] + j;
            value *= v;
        }
        visit(row, col, value);
        // odometer, last factor fastest
        let mut k = factors.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            cursor[k] += 1;
            if cursor[k] < nonzero[k].len() {
                break;
            }
            cursor[k] = 0;
        }
    }
}

/// Normalised state vector on a composite system.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: HilbertDims,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Normalises `amplitudes`; fails if they are all zero.
    pub fn new(dims: HilbertDims, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != dims.total() {
            return Err(GmeError::Shape(format!(
                "{} amplitudes for total dimension {}",
                amplitudes.len(),
                dims.total()
            )));
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(GmeError::Validation("non-finite amplitude".into()));
        }
        let n = tensor::norm(&amplitudes);
        if n == 0.0 {
            return Err(GmeError::DegenerateState);
        }
        let amplitudes = amplitudes.into_iter().map(|z| z / n).collect();
        Ok(Self { dims, amplitudes })
    }

    pub fn basis(dims: HilbertDims, occupation: &[usize]) -> Result<Self> {
        let idx = dims.flat_index(occupation)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); dims.total()];
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(Self {
            dims,
            amplitudes: amps,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, occupation: &[usize]) -> Result<Complex64> {
        Ok(self.amplitudes[self.dims.flat_index(occupation)?])
    }

    pub fn norm(&self) -> f64 {
        tensor::norm(&self.amplitudes)
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            dims: self.dims.clone(),
            matrix: self.projector(),
        }
    }
}

impl QuantumState for PureState {
    fn dims(&self) -> &HilbertDims {
        &self.dims
    }

    fn expectation(&self, obs: &ComplexMatrix) -> Result<Complex64> {
        let applied = obs.apply(&self.amplitudes)?;
        if obs.rows() != self.amplitudes.len() {
            return Err(GmeError::Shape(
                "observable does not match state dimension".into(),
            ));
        }
        Ok(tensor::inner(&self.amplitudes, &applied))
    }

    fn product_expectation(&self, factors: &[&ComplexMatrix]) -> Result<Complex64> {
        check_factors(&self.dims, factors)?;
        let psi = &self.amplitudes;
        let mut acc = Complex64::new(0.0, 0.0);
        for_each_product_entry(self.dims.as_slice(), factors, |i, j, v| {
            acc += psi[i].conj() * v * psi[j];
        });
        Ok(acc)
    }
}

/// `sum_k coefficient_k |occupation_k>`, normalised. Repeated occupations add up.
pub fn superposition(dims: &HilbertDims, terms: &[(Complex64, Vec<usize>)]) -> Result<PureState> {
    let mut amps = vec![Complex64::new(0.0, 0.0); dims.total()];
    for (coef, occ) in terms {
        amps[dims.flat_index(occ)?] += coef;
    }
    PureState::new(dims.clone(), amps)
}

/// Hermitian, unit-trace, positive semidefinite matrix on a composite system.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: HilbertDims,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity, trace and the minimum eigenvalue against [`DENSITY_TOL`].
    pub fn new(dims: HilbertDims, matrix: ComplexMatrix) -> Result<Self> {
        let total = dims.total();
        if matrix.rows() != total || matrix.cols() != total {
            return Err(GmeError::Shape(format!(
                "{}x{} matrix for total dimension {total}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let dev = matrix.hermitian_deviation();
        if dev > DENSITY_TOL {
            return Err(GmeError::Validation(format!(
                "density matrix not hermitian (deviation {dev:e})"
            )));
        }
        let tr = tensor::trace(&matrix)?;
        if (tr - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(GmeError::Validation(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        let min = hermitian_eigen(&matrix)?.eigenvalues[0];
        if min < -DENSITY_TOL {
            return Err(GmeError::Validation(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(Self { dims, matrix })
    }

    pub fn maximally_mixed(dims: HilbertDims) -> Self {
        let d = dims.total();
        let matrix = ComplexMatrix::identity(d).scale(Complex64::new(1.0 / d as f64, 0.0));
        Self { dims, matrix }
    }

    /// Convex combination `sum w_k |psi_k><psi_k|`; weights are normalised by their sum.
    pub fn mixture(components: &[(f64, PureState)]) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| GmeError::Validation("mixture needs at least one component".into()))?;
        let dims = first.1.dims.clone();
        let total_weight: f64 = components.iter().map(|(w, _)| *w).sum();
        if components
            .iter()
            .any(|(w, _)| !(w.is_finite() && *w >= 0.0))
            || total_weight <= 0.0
        {
            return Err(GmeError::Validation(
                "mixture weights must be nonnegative with positive sum".into(),
            ));
        }
        let d = dims.total();
        let mut matrix = ComplexMatrix::zeros(d, d);
        for (w, psi) in components {
            if psi.dims != dims {
                return Err(GmeError::Shape(
                    "mixture components have different dimensions".into(),
                ));
            }
            accumulate_projector(&mut matrix, psi.amplitudes(), w / total_weight);
        }
        Ok(Self { dims, matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix)
            .map(|e| e.eigenvalues)
            .unwrap_or_default()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(f64::NAN)
    }
}

fn accumulate_projector(matrix: &mut ComplexMatrix, v: &[Complex64], weight: f64) {
    for i in 0..v.len() {
        for j in 0..v.len() {
            let z = matrix.get(i, j) + v[i] * v[j].conj() * weight;
            matrix.set(i, j, z);
        }
    }
}

impl QuantumState for DensityMatrix {
    fn dims(&self) -> &HilbertDims {
        &self.dims
    }

    fn expectation(&self, obs: &ComplexMatrix) -> Result<Complex64> {
        expectation(&self.matrix, obs)
    }

    fn product_expectation(&self, factors: &[&ComplexMatrix]) -> Result<Complex64> {
        check_factors(&self.dims, factors)?;
        let rho = &self.matrix;
        let mut acc = Complex64::new(0.0, 0.0);
        for_each_product_entry(self.dims.as_slice(), factors, |i, j, v| {
            acc += v * rho.get(j, i);
        });
        Ok(acc)
    }
}

impl From<&PureState> for DensityMatrix {
    fn from(psi: &PureState) -> Self {
        psi.to_density()
    }
}

/// `s |psi><psi| + (1 - s) I / D`.
pub fn white_noise_mix(psi: &PureState, s: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&s) {
        return Err(GmeError::Validation(format!(
            "noise weight s = {s} outside [0, 1]"
        )));
    }
    let d = psi.dims.total();
    let mut matrix = ComplexMatrix::identity(d).scale(Complex64::new((1.0 - s) / d as f64, 0.0));
    accumulate_projector(&mut matrix, psi.amplitudes(), s);
    Ok(DensityMatrix {
        dims: psi.dims.clone(),
        matrix,
    })
}

/// A split of the subsystems into two nonempty blocks.
///
/// Stored canonically: `block` is the sorted block containing subsystem 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bipartition {
    parties: usize,
    block: Vec<usize>,
    rest: Vec<usize>,
}

impl Bipartition {
    pub fn new(parties: usize, block: &[usize]) -> Result<Self> {
        let mut inside = vec![false; parties];
        for &s in block {
            if s >= parties {
                return Err(GmeError::Index {
                    index: s,
                    dim: parties,
                });
            }
            inside[s] = true;
        }
        let count = inside.iter().filter(|&&b| b).count();
        if count == 0 || count == parties {
            return Err(GmeError::Validation(format!(
                "bipartition block {block:?} must be a nonempty proper subset of {parties} subsystems"
            )));
        }
        if !inside[0] {
            inside.iter_mut().for_each(|b| *b = !*b);
        }
        let block = (0..parties).filter(|&s| inside[s]).collect();
        let rest = (0..parties).filter(|&s| !inside[s]).collect();
        Ok(Self {
            parties,
            block,
            rest,
        })
    }

    /// Parses labels such as `a|bc` or `0|12`.
    pub fn parse(parties: usize, label: &str) -> Result<Self> {
        let (left, right) = label
            .split_once('|')
            .ok_or_else(|| GmeError::Parse(format!("bipartition `{label}` lacks `|`")))?;
        let sites = |s: &str| -> Result<Vec<usize>> {
            s.trim()
                .chars()
                .map(|ch| match ch {
                    'a'..='z' => Ok(ch as usize - 'a' as usize),
                    '0'..='9' => Ok(ch as usize - '0' as usize),
                    _ => Err(GmeError::Parse(format!(
                        "bad subsystem `{ch}` in `{label}`"
                    ))),
                })
                .collect()
        };
        let left = sites(left)?;
        let right = sites(right)?;
        let mut all: Vec<usize> = left.iter().chain(&right).copied().collect();
        all.sort_unstable();
        if all != (0..parties).collect::<Vec<_>>() {
            return Err(GmeError::Validation(format!(
                "bipartition `{label}` does not cover {parties} subsystems exactly once"
            )));
        }
        Self::new(parties, &left)
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    /// Sorted block containing subsystem 0.
    pub fn block(&self) -> &[usize] {
        &self.block
    }

    /// Sorted complement of [`Self::block`].
    pub fn rest(&self) -> &[usize] {
        &self.rest
    }

    pub fn contains(&self, site: usize) -> bool {
        self.block.contains(&site)
    }

    /// Every bipartition of `parties` subsystems: singletons first, then pairs and so on,
    /// lexicographic within a size.
    pub fn all(parties: usize) -> Vec<Self> {
        let mut out: Vec<Self> = (1..(1usize << parties) - 1)
            .filter(|mask| mask & 1 == 1)
            .map(|mask| {
                let block: Vec<usize> = (0..parties).filter(|s| mask >> s & 1 == 1).collect();
                Self::new(parties, &block).expect("mask is a proper subset")
            })
            .collect();
        out.sort_by_key(|p| {
            let small = p.smaller_side();
            (small.len(), small.to_vec())
        });
        out
    }

    fn smaller_side(&self) -> &[usize] {
        if self.rest.len() < self.block.len() {
            &self.rest
        } else {
            &self.block
        }
    }
}

fn site_letters(sites: &[usize]) -> String {
    sites.iter().map(|&s| (b'a' + s as u8) as char).collect()
}

impl fmt::Display for Bipartition {
    /// Smaller block first; ties put the block holding `a` first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (first, second) = if self.rest.len() < self.block.len() {
            (&self.rest, &self.block)
        } else {
            (&self.block, &self.rest)
        };
        write!(f, "{}|{}", site_letters(first), site_letters(second))
    }
}

/// Normalised vector of i.i.d. standard complex gaussians (Haar-distributed).
pub fn haar_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let n = tensor::norm(&v);
        if n > 1e-300 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

/// Uniform weights on the probability simplex, from normalised `-ln U` draws.
pub fn simplex_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        raw.iter().map(|x| x / total).collect()
    } else {
        vec![1.0 / n as f64; n]
    }
}

/// Random convex mixture of states each separable across one of `partitions`.
///
/// Every component draws its bipartition uniformly from `partitions` and is a
/// product of Haar-random pure states on the two blocks.
pub fn random_biseparable_with<R: Rng + ?Sized>(
    dims: &HilbertDims,
    partitions: &[Bipartition],
    mixture_size: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if partitions.is_empty() {
        return Err(GmeError::Validation(
            "at least one bipartition is required".into(),
        ));
    }
    if mixture_size == 0 {
        return Err(GmeError::Validation(
            "mixture_size must be at least 1".into(),
        ));
    }
    if let Some(p) = partitions.iter().find(|p| p.parties != dims.parties()) {
        return Err(GmeError::Validation(format!(
            "bipartition {p} is for {} subsystems, state has {}",
            p.parties,
            dims.parties()
        )));
    }
    let d = dims.as_slice();
    let weights = simplex_weights(mixture_size, rng);
    let total = dims.total();
    let mut matrix = ComplexMatrix::zeros(total, total);
    for w in weights {
        let part = &partitions[rng.random_range(0..partitions.len())];
        let dim_of = |sites: &[usize]| sites.iter().map(|&s| d[s]).product::<usize>();
        let left = haar_vector(dim_of(part.block()), rng);
        let right = haar_vector(dim_of(part.rest()), rng);
        let psi =
            tensor::product_vector_on_sites(d, &[(part.block(), &left), (part.rest(), &right)]);
        accumulate_projector(&mut matrix, &psi, w);
    }
    DensityMatrix::new(dims.clone(), matrix)
}

/// Seeded form of [`random_biseparable_with`] (ChaCha8 stream).
pub fn random_biseparable(
    dims: &HilbertDims,
    partitions: &[Bipartition],
    mixture_size: usize,
    seed: u64,
) -> Result<DensityMatrix> {
    random_biseparable_with(
        dims,
        partitions,
        mixture_size,
        &mut ChaCha8Rng::seed_from_u64(seed),
    )
}

/// Checks the unit-norm invariant of a raw amplitude vector.
pub fn is_normalized(v: &[Complex64]) -> bool {
    (tensor::norm(v) - 1.0).abs() <= NORM_TOL
}

//! Single-subsystem operators and their tensor assembly.
//!
//! Bosonic operators live on `span{|0>, ..., |cutoff>}`. Dynamics that start
//! in `|N, 0, 0>` never leave occupations `<= N`, so cutoff `N` is exact there.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{GmeError, Result};
use crate::states::{haar_vector, HilbertDims};
use crate::tensor::{self, ComplexMatrix};

/// A square, possibly non-hermitian operator on one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    matrix: ComplexMatrix,
}

impl LocalOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(GmeError::Shape(format!(
                "local operator must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    /// `|u><v|`.
    pub fn rank_one(u: &[Complex64], v: &[Complex64]) -> Result<Self> {
        if u.len() != v.len() || u.is_empty() {
            return Err(GmeError::Shape(format!(
                "rank-one operator from vectors of length {} and {}",
                u.len(),
                v.len()
            )));
        }
        Ok(Self {
            matrix: ComplexMatrix::outer(u, v),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: tensor::adjoint(&self.matrix),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            matrix: self.matrix.scale(factor),
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.matrix.is_hermitian(tensor::HERMITIAN_TOL)
    }

    /// `O^dagger O`.
    pub fn dagger_times_self(&self) -> ComplexMatrix {
        tensor::matmul(&tensor::adjoint(&self.matrix), &self.matrix).expect("square")
    }

    /// `O O^dagger`.
    pub fn self_times_dagger(&self) -> ComplexMatrix {
        tensor::matmul(&self.matrix, &tensor::adjoint(&self.matrix)).expect("square")
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.matrix.apply(v)
    }

    fn sum(dim: usize, terms: impl IntoIterator<Item = Self>) -> Result<Self> {
        terms.into_iter().try_fold(
            Self {
                matrix: ComplexMatrix::zeros(dim, dim),
            },
            |acc, t| {
                Ok(Self {
                    matrix: acc.matrix.add(&t.matrix)?,
                })
            },
        )
    }
}

/// `|i><j|` on a `dim`-level system.
pub fn ketbra(dim: usize, i: usize, j: usize) -> Result<LocalOperator> {
    for idx in [i, j] {
        if idx >= dim {
            return Err(GmeError::Index { index: idx, dim });
        }
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    m.set(i, j, Complex64::new(1.0, 0.0));
    Ok(LocalOperator { matrix: m })
}

/// Qubit lowering operator `|0><1|`.
pub fn sigma_minus() -> LocalOperator {
    ketbra(2, 0, 1).expect("in range")
}

/// `|0><1| + |1><2|` when lowering, its adjoint when raising.
pub fn qutrit_ladder(raising: bool) -> LocalOperator {
    let lower =
        LocalOperator::sum(3, [ketbra(3, 0, 1).unwrap(), ketbra(3, 1, 2).unwrap()]).unwrap();
    if raising {
        lower.adjoint()
    } else {
        lower
    }
}

/// Truncated annihilation operator on `span{|0>, ..., |cutoff>}`.
pub fn boson_annihilation(cutoff: usize) -> Result<LocalOperator> {
    if cutoff < 1 {
        return Err(GmeError::Validation(
            "boson cutoff must be at least 1".into(),
        ));
    }
    let dim = cutoff + 1;
    let m = ComplexMatrix::from_fn(dim, dim, |r, c| {
        if c >= 1 && r == c - 1 {
            Complex64::new((c as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(LocalOperator { matrix: m })
}

/// Block operators `(A_n, B_n, C_n)` for the pair `{|N-n, n, n>, |N-n-1, n+1, n+1>}`.
///
/// `A_n = |N-n-1><N-n|`, `B_n = C_n = |n><n+1|`, each on an `N + 1`-level mode.
pub fn block_ops(total: usize, n: usize) -> Result<(LocalOperator, LocalOperator, LocalOperator)> {
    if total < 2 || !total.is_multiple_of(2) {
        return Err(GmeError::Validation(format!(
            "photon number N = {total} must be even and at least 2"
        )));
    }
    if !n.is_multiple_of(2) || n + 2 > total {
        return Err(GmeError::Validation(format!(
            "block index n = {n} must be even with n <= N - 2 = {}",
            total - 2
        )));
    }
    let dim = total + 1;
    let a = ketbra(dim, total - n - 1, total - n)?;
    let b = ketbra(dim, n, n + 1)?;
    Ok((a, b.clone(), b))
}

/// `sum_{n even} A_n` (mode a) or `sum_{n even} B_n` (modes b, c) for photon number `total`.
pub fn block_sum(total: usize, mode_a: bool) -> Result<LocalOperator> {
    let blocks: Vec<_> = (0..=total.saturating_sub(2))
        .step_by(2)
        .map(|n| block_ops(total, n))
        .collect::<Result<_>>()?;
    LocalOperator::sum(
        total + 1,
        blocks
            .into_iter()
            .map(|(a, b, _)| if mode_a { a } else { b }),
    )
}

/// One local factor per subsystem together with which factors enter adjointed.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeObservable {
    dims: HilbertDims,
    factors: Vec<LocalOperator>,
    dagger_mask: Vec<bool>,
}

impl CompositeObservable {
    pub fn new(
        dims: &HilbertDims,
        factors: &[LocalOperator],
        dagger_mask: &[bool],
    ) -> Result<Self> {
        check_arity(dims, factors)?;
        if dagger_mask.len() != factors.len() {
            return Err(GmeError::Shape(format!(
                "dagger mask of length {} for {} factors",
                dagger_mask.len(),
                factors.len()
            )));
        }
        Ok(Self {
            dims: dims.clone(),
            factors: factors.to_vec(),
            dagger_mask: dagger_mask.to_vec(),
        })
    }

    /// Factors with the mask applied.
    pub fn effective_factors(&self) -> Vec<LocalOperator> {
        self.factors
            .iter()
            .zip(&self.dagger_mask)
            .map(|(f, &d)| if d { f.adjoint() } else { f.clone() })
            .collect()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let eff = self.effective_factors();
        tensor::kron_all(eff.iter().map(LocalOperator::matrix)).expect("at least one factor")
    }

    pub fn dims(&self) -> &HilbertDims {
        &self.dims
    }
}

pub(crate) fn check_arity(dims: &HilbertDims, factors: &[LocalOperator]) -> Result<()> {
    if factors.len() != dims.parties() {
        return Err(GmeError::Shape(format!(
            "{} factors for {} subsystems",
            factors.len(),
            dims.parties()
        )));
    }
    for (k, (f, &d)) in factors.iter().zip(dims.as_slice()).enumerate() {
        if f.dim() != d {
            return Err(GmeError::Shape(format!(
                "factor {k} has dimension {} but subsystem {k} has {d}",
                f.dim()
            )));
        }
    }
    Ok(())
}

/// Tensor product of `factors`, each adjointed where `dagger_mask` is set.
pub fn compose(
    dims: &HilbertDims,
    factors: &[LocalOperator],
    dagger_mask: &[bool],
) -> Result<ComplexMatrix> {
    Ok(CompositeObservable::new(dims, factors, dagger_mask)?.matrix())
}

/// Textual description of a local operator, as accepted on the command line.
///
/// `block_sum N` is the summed mode-a block operator at the first subsystem and
/// the summed b/c block operator elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OperatorSpec {
    SigmaMinus,
    KetBra { dim: usize, i: usize, j: usize },
    QutritLower,
    QutritRaise,
    BosonAnnihilate { cutoff: usize },
    BlockSum { total: usize },
}

impl OperatorSpec {
    /// Builds the operator for the subsystem at `position` with dimension `dim`.
    pub fn build(&self, position: usize, dim: usize) -> Result<LocalOperator> {
        let op = match *self {
            Self::SigmaMinus => sigma_minus(),
            Self::KetBra { dim: d, i, j } => ketbra(d, i, j)?,
            Self::QutritLower => qutrit_ladder(false),
            Self::QutritRaise => qutrit_ladder(true),
            Self::BosonAnnihilate { cutoff } => boson_annihilation(cutoff)?,
            Self::BlockSum { total } => block_sum(total, position == 0)?,
        };
        if op.dim() != dim {
            return Err(GmeError::Shape(format!(
                "operator `{self}` has dimension {} but subsystem {position} has {dim}",
                op.dim()
            )));
        }
        Ok(op)
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SigmaMinus => write!(f, "sigma_minus"),
            Self::KetBra { i, j, .. } => write!(f, "ketbra {i} {j}"),
            Self::QutritLower => write!(f, "qutrit_lower"),
            Self::QutritRaise => write!(f, "qutrit_raise"),
            Self::BosonAnnihilate { cutoff } => write!(f, "boson_annihilate {cutoff}"),
            Self::BlockSum { total } => write!(f, "block_sum {total}"),
        }
    }
}

/// Parses a single factor. `ketbra i j` needs the subsystem dimension, so
/// its `dim` is left as 0 here and filled in by [`parse_operator_list`].
impl FromStr for OperatorSpec {
    type Err = GmeError;

    fn from_str(s: &str) -> Result<Self> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let num = |w: &str| -> Result<usize> {
            w.parse().map_err(|_| {
                GmeError::Parse(format!(
                    "expected a nonnegative integer in `{s}`, got `{w}`"
                ))
            })
        };
        match words.as_slice() {
            ["sigma_minus"] => Ok(Self::SigmaMinus),
            ["qutrit_lower"] => Ok(Self::QutritLower),
            ["qutrit_raise"] => Ok(Self::QutritRaise),
            ["ketbra", i, j] => Ok(Self::KetBra {
                dim: 0,
                i: num(i)?,
                j: num(j)?,
            }),
            ["boson_annihilate", c] => Ok(Self::BosonAnnihilate { cutoff: num(c)? }),
            ["block_sum", n] => Ok(Self::BlockSum { total: num(n)? }),
            _ => Err(GmeError::Parse(format!("unknown operator `{s}`"))),
        }
    }
}

/// Parses a dagger pattern such as `d--`: one character per subsystem, `d` daggered, `-` plain.
pub fn parse_dagger_pattern(pattern: &str) -> Result<Vec<bool>> {
    pattern
        .chars()
        .map(|ch| match ch {
            'd' | 'D' => Ok(true),
            '-' => Ok(false),
            _ => Err(GmeError::Parse(format!(
                "bad character `{ch}` in dagger pattern `{pattern}`"
            ))),
        })
        .collect()
}

/// Builds one operator per subsystem from textual specs.
pub fn parse_operator_list(dims: &HilbertDims, specs: &[String]) -> Result<Vec<LocalOperator>> {
    if specs.len() != dims.parties() {
        return Err(GmeError::Shape(format!(
            "{} operators for {} subsystems",
            specs.len(),
            dims.parties()
        )));
    }
    specs
        .iter()
        .zip(dims.as_slice())
        .enumerate()
        .map(|(pos, (text, &d))| {
            let spec = match text.parse::<OperatorSpec>()? {
                OperatorSpec::KetBra { i, j, .. } => OperatorSpec::KetBra { dim: d, i, j },
                other => other,
            };
            spec.build(pos, d)
        })
        .collect()
}

/// `|u><v|` with independent Haar-random unit vectors `u`, `v`.
pub fn random_rank_one<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> LocalOperator {
    let u = haar_vector(dim, rng);
    let v = haar_vector(dim, rng);
    LocalOperator::rank_one(&u, &v).expect("equal lengths")
}

/// `(G + G^dagger) / 2` for a complex Gaussian matrix `G`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> LocalOperator {
    let g: Vec<Complex64> = haar_vector(dim * dim, rng)
        .into_iter()
        .map(|z| z * (dim as f64))
        .collect();
    let g = ComplexMatrix::new(dim, dim, g).expect("square");
    LocalOperator {
        matrix: g
            .add(&tensor::adjoint(&g))
            .expect("same shape")
            .scale(Complex64::new(0.5, 0.0)),
    }
}

/// One random rank-one operator per subsystem.
pub fn random_rank_one_ops<R: Rng + ?Sized>(dims: &HilbertDims, rng: &mut R) -> Vec<LocalOperator> {
    dims.as_slice()
        .iter()
        .map(|&d| random_rank_one(d, rng))
        .collect()
}

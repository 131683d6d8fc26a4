//! Sufficient conditions for bipartite entanglement and for genuine
//! tripartite / quadripartite entanglement.
//!
//! Every condition has the shape `lhs <= f(rhs_terms)`, with one right-hand
//! term per bipartition of the parties. States separable across a bipartition
//! (or mixtures of such states over different bipartitions) satisfy the
//! sum form `lhs <= sum(rhs_terms)`. A violation therefore certifies genuine
//! multipartite entanglement. A non-violation proves nothing: the conditions
//! are sufficient, never necessary.
//!
//! The verdict in [`WitnessReport::violated`] uses the max form
//! `lhs <= max(rhs_terms)`, which is tighter and detects more states. For
//! mixtures drawn at random from the biseparable set it has never been seen to
//! fail, but specially phase-aligned biseparable mixtures can exceed it by up
//! to a factor `sqrt(#bipartitions)` (see `tests/max_form_bound.rs`). Use
//! [`WitnessReport::violated_sum_form`] when a certificate must hold for every
//! biseparable state.
//!
//! Dagger-form conditions build the right-hand operators from one rule: the
//! daggered factor `X` always contributes `X^dagger X`; any other factor
//! contributes `Y Y^dagger` when it shares a block with the daggered party and
//! `Y^dagger Y` otherwise. For three parties with `A` daggered this gives
//! `A^dagger A B B^dagger C^dagger C` (c|ab), `A^dagger A B^dagger B C C^dagger`
//! (b|ac) and `A^dagger A B^dagger B C^dagger C` (a|bc).
//!
//! The product-form tripartite bound is the symmetric one,
//! `sqrt(<A^dagger A> <B^dagger B C^dagger C>)` and its two permutations.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GmeError, Result};
use crate::local_ops::{check_arity, LocalOperator};
use crate::states::{Bipartition, QuantumState};
use crate::tensor::{self, ComplexMatrix};

/// Default absolute tolerance on the violation margin.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhsTerm {
    pub label: String,
    pub value: f64,
}

/// Outcome of evaluating one condition on one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub lhs: f64,
    pub rhs_terms: Vec<RhsTerm>,
    pub rhs_sum: f64,
    pub rhs_max: f64,
    /// `lhs - rhs_max`.
    pub margin: f64,
    /// `margin > tolerance`.
    pub violated: bool,
    pub tolerance: f64,
}

pub const CSV_HEADER: &str = "lhs,rhs_max,rhs_sum,margin,violated";

impl WitnessReport {
    pub fn new(lhs: f64, rhs_terms: Vec<RhsTerm>, tolerance: f64) -> Self {
        let rhs_sum = rhs_terms.iter().map(|t| t.value).sum();
        let rhs_max = rhs_terms.iter().map(|t| t.value).fold(0.0, f64::max);
        let margin = lhs - rhs_max;
        Self {
            lhs,
            rhs_terms,
            rhs_sum,
            rhs_max,
            margin,
            violated: margin > tolerance,
            tolerance,
        }
    }

    /// `lhs - rhs_sum`.
    pub fn sum_margin(&self) -> f64 {
        self.lhs - self.rhs_sum
    }

    pub fn violated_sum_form(&self) -> bool {
        self.sum_margin() > self.tolerance
    }

    pub fn term(&self, label: &str) -> Option<f64> {
        self.rhs_terms
            .iter()
            .find(|t| t.label == label)
            .map(|t| t.value)
    }

    /// `lhs,rhs_max,rhs_sum,margin,violated` with 17 significant digits.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            fmt_float(self.lhs),
            fmt_float(self.rhs_max),
            fmt_float(self.rhs_sum),
            fmt_float(self.margin),
            self.violated
        )
    }
}

/// Round-trip float formatting used in every CSV the crate writes.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// An operator on a group of subsystems, indexed by those sites in the given order.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    pub sites: Vec<usize>,
    pub matrix: ComplexMatrix,
}

impl BlockOperator {
    pub fn new(sites: Vec<usize>, matrix: ComplexMatrix) -> Self {
        Self { sites, matrix }
    }

    /// Tensor product of `ops[s]` over `sites`, in that order.
    pub fn from_locals(sites: &[usize], ops: &[LocalOperator]) -> Result<Self> {
        let factors: Vec<&ComplexMatrix> = sites
            .iter()
            .map(|&s| {
                ops.get(s)
                    .map(LocalOperator::matrix)
                    .ok_or(GmeError::Index {
                        index: s,
                        dim: ops.len(),
                    })
            })
            .collect::<Result<_>>()?;
        let matrix =
            tensor::kron_all(factors).ok_or_else(|| GmeError::Validation("empty block".into()))?;
        Ok(Self {
            sites: sites.to_vec(),
            matrix,
        })
    }

    fn adjoint(&self) -> ComplexMatrix {
        tensor::adjoint(&self.matrix)
    }

    fn dagger_times_self(&self) -> ComplexMatrix {
        tensor::matmul(&self.adjoint(), &self.matrix).expect("square block")
    }
}

/// Evaluates conditions at a fixed violation tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluator {
    pub tolerance: f64,
}

impl Default for Evaluator {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl Evaluator {
    pub fn new(tolerance: f64) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance >= 0.0) {
            return Err(GmeError::Validation(format!(
                "tolerance must be finite and nonnegative, got {tolerance}"
            )));
        }
        Ok(Self { tolerance })
    }

    /// Real part of an expectation that must be nonnegative, clamped at 0 within tolerance.
    fn positive(&self, value: Complex64, label: &str) -> Result<f64> {
        if value.re < -self.tolerance {
            return Err(GmeError::NumericalConsistency {
                label: label.to_string(),
                value: value.re,
            });
        }
        Ok(value.re.max(0.0))
    }

    fn positive_product<S: QuantumState + ?Sized>(
        &self,
        state: &S,
        factors: &[ComplexMatrix],
        label: &str,
    ) -> Result<f64> {
        let refs: Vec<&ComplexMatrix> = factors.iter().collect();
        self.positive(state.product_expectation(&refs)?, label)
    }

    fn check_blocks<S: QuantumState + ?Sized>(
        &self,
        state: &S,
        l: &BlockOperator,
        m: &BlockOperator,
    ) -> Result<Bipartition> {
        let n = state.dims().parties();
        let mut seen = vec![false; n];
        for &s in l.sites.iter().chain(&m.sites) {
            if s >= n {
                return Err(GmeError::Index { index: s, dim: n });
            }
            if seen[s] {
                return Err(GmeError::Validation(format!(
                    "blocks overlap at subsystem {s}"
                )));
            }
            seen[s] = true;
        }
        if seen.iter().any(|&b| !b) {
            return Err(GmeError::Validation(
                "blocks must cover every subsystem".into(),
            ));
        }
        Bipartition::new(n, &l.sites)
    }

    /// `|<L^dagger M>| <= <L^dagger L M^dagger M>^(1/2)` for states separable across the blocks.
    pub fn bipartite_cond_one<S: QuantumState + ?Sized>(
        &self,
        state: &S,
        l: &BlockOperator,
        m: &BlockOperator,
    ) -> Result<WitnessReport> {
        let part = self.check_blocks(state, l, m)?;
        let dims = state.dims().as_slice();
        let ld = l.adjoint();
        let lhs = state
            .expectation(&tensor::kron_on_sites(
                dims,
                &[(&l.sites, &ld), (&m.sites, &m.matrix)],
            )?)?
            .norm();
        let (ll, mm) = (l.dagger_times_self(), m.dagger_times_self());
        let label = part.to_string();
        let joint = tensor::kron_on_sites(dims, &[(&l.sites, &ll), (&m.sites, &mm)])?;
        let rhs = self.positive(state.expectation(&joint)?, &label)?.sqrt();
        Ok(WitnessReport::new(
            lhs,
            vec![RhsTerm { label, value: rhs }],
            self.tolerance,
        ))
    }

    /// `|<L M>| <= (<L^dagger L> <M^dagger M>)^(1/2)` for states separable across the blocks.
    pub fn bipartite_cond_two<S: QuantumState + ?Sized>(
        &self,
        state: &S,
        l: &BlockOperator,
        m: &BlockOperator,
    ) -> Result<WitnessReport> {
        let part = self.check_blocks(state, l, m)?;
        let dims = state.dims().as_slice();
        let lhs = state
            .expectation(&tensor::kron_on_sites(
                dims,
                &[(&l.sites, &l.matrix), (&m.sites, &m.matrix)],
            )?)?
            .norm();
        let label = part.to_string();
        let ll = self.positive(
            state.expectation(&tensor::kron_on_sites(
                dims,
                &[(&l.sites, &l.dagger_times_self())],
            )?)?,
            &label,
        )?;
        let mm = self.positive(
            state.expectation(&tensor::kron_on_sites(
                dims,
                &[(&m.sites, &m.dagger_times_self())],
            )?)?,
            &label,
        )?;
        Ok(WitnessReport::new(
            lhs,
            vec![RhsTerm {
                label,
                value: (ll * mm).sqrt(),
            }],
            self.tolerance,
        ))
    }

    /// Dagger-form condition on any number of parties with `ops[daggered]` adjointed.
    pub fn dagger_form<S: QuantumState + ?Sized>(
        &self,
        state: &S,
        ops: &[LocalOperator],
        daggered: usize,
    ) -> Result<WitnessReport> {
        let dims = state.dims();
        check_arity(dims, ops)?;
        let n = ops.len();
        if n < 2 {
            return Err(GmeError::Validation(
                "dagger-form condition needs at least two subsystems".into(),
            ));
        }
        if daggered >= n {
            return Err(GmeError::Index {
                index: daggered,
                dim: n,
            });
        }
        let lhs_factors: Vec<ComplexMatrix> = ops
            .iter()
            .enumerate()
            .map(|(k, op)| {
                if k == daggered {
                    op.adjoint().matrix().clone()
                } else {
                    op.matrix().clone()
                }
            })
            .collect();
        let refs: Vec<&ComplexMatrix> = lhs_factors.iter().collect();
        let lhs = state.product_expectation(&refs)?.norm();

        let dd: Vec<ComplexMatrix> = ops.iter().map(LocalOperator::dagger_times_self).collect();
        let ddag: Vec<ComplexMatrix> = ops.iter().map(LocalOperator::self_times_dagger).collect();
        let terms = Bipartition::all(n)
            .into_iter()
            .map(|part| {
                let with_daggered = |k: usize| part.contains(k) == part.contains(daggered);
                let factors: Vec<ComplexMatrix> = (0..n)
                    .map(|k| {
                        if k != daggered && with_daggered(k) {
                            ddag[k].clone()
                        } else {
                            dd[k].clone()
                        }
                    })
                    .collect();
                let label = part.to_string();
                let value = self.positive_product(state, &factors, &label)?.sqrt();
                Ok(RhsTerm { label, value })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WitnessReport::new(lhs, terms, self.tolerance))
    }

    /// Product-form condition `|<A B C ...>|` against
    /// `sqrt(<prod_S X^dagger X> <prod_T X^dagger X>)` per bipartition `S|T`.
    pub fn product_form<S: QuantumState + ?Sized>(
        &self,
        state: &S,
        ops: &[LocalOperator],
    ) -> Result<WitnessReport> {
        let dims = state.dims();
        check_arity(dims, ops)?;
        let n = ops.len();
        if n < 2 {
            return Err(GmeError::Validation(
                "product-form condition needs at least two subsystems".into(),
            ));
        }
        let plain: Vec<&ComplexMatrix> = ops.iter().map(LocalOperator::matrix).collect();
        let lhs = state.product_expectation(&plain)?.norm();
        let dd: Vec<ComplexMatrix> = ops.iter().map(LocalOperator::dagger_times_self).collect();
        let ids: Vec<ComplexMatrix> = dims
            .as_slice()
            .iter()
            .map(|&d| ComplexMatrix::identity(d))
            .collect();
        let terms = Bipartition::all(n)
            .into_iter()
            .map(|part| {
                let label = part.to_string();
                let side = |inside: bool| -> Vec<ComplexMatrix> {
                    (0..n)
                        .map(|k| {
                            if part.contains(k) == inside {
                                dd[k].clone()
                            } else {
                                ids[k].clone()
                            }
                        })
                        .collect()
                };
                let left = self.positive_product(state, &side(true), &label)?;
                let right = self.positive_product(state, &side(false), &label)?;
                Ok(RhsTerm {
                    label,
                    value: (left * right).sqrt(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WitnessReport::new(lhs, terms, self.tolerance))
    }

    fn require_parties<S: QuantumState + ?Sized>(state: &S, n: usize, what: &str) -> Result<()> {
        let got = state.dims().parties();
        if got != n {
            return Err(GmeError::Validation(format!(
                "{what} needs {n} subsystems, state has {got}"
            )));
        }
        Ok(())
    }

    pub fn tri_product<S: QuantumState + ?Sized>(
        &self,
        state: &S,
        a: &LocalOperator,
        b: &LocalOperator,
        c: &LocalOperator,
    ) -> Result<WitnessReport> {
        Self::require_parties(state, 3, "tri_product")?;
        self.product_form(state, &[a.clone(), b.clone(), c.clone()])
    }

    pub fn tri_dagger<S: QuantumState + ?Sized>(
        &self,
        state: &S,
        a: &LocalOperator,
        b: &LocalOperator,
        c: &LocalOperator,
    ) -> Result<WitnessReport> {
        Self::require_parties(state, 3, "tri_dagger")?;
        self.dagger_form(state, &[a.clone(), b.clone(), c.clone()], 0)
    }

    pub fn quad_dagger<S: QuantumState + ?Sized>(
        &self,
        state: &S,
        a: &LocalOperator,
        b: &LocalOperator,
        c: &LocalOperator,
        d: &LocalOperator,
    ) -> Result<WitnessReport> {
        Self::require_parties(state, 4, "quad_dagger")?;
        self.dagger_form(state, &[a.clone(), b.clone(), c.clone(), d.clone()], 0)
    }
}

pub fn bipartite_cond_one<S: QuantumState + ?Sized>(
    state: &S,
    l: &BlockOperator,
    m: &BlockOperator,
) -> Result<WitnessReport> {
    Evaluator::default().bipartite_cond_one(state, l, m)
}

pub fn bipartite_cond_two<S: QuantumState + ?Sized>(
    state: &S,
    l: &BlockOperator,
    m: &BlockOperator,
) -> Result<WitnessReport> {
    Evaluator::default().bipartite_cond_two(state, l, m)
}

pub fn tri_product<S: QuantumState + ?Sized>(
    state: &S,
    a: &LocalOperator,
    b: &LocalOperator,
    c: &LocalOperator,
) -> Result<WitnessReport> {
    Evaluator::default().tri_product(state, a, b, c)
}

pub fn tri_dagger<S: QuantumState + ?Sized>(
    state: &S,
    a: &LocalOperator,
    b: &LocalOperator,
    c: &LocalOperator,
) -> Result<WitnessReport> {
    Evaluator::default().tri_dagger(state, a, b, c)
}

pub fn quad_dagger<S: QuantumState + ?Sized>(
    state: &S,
    a: &LocalOperator,
    b: &LocalOperator,
    c: &LocalOperator,
    d: &LocalOperator,
) -> Result<WitnessReport> {
    Evaluator::default().quad_dagger(state, a, b, c, d)
}

/// Which inequality to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Bi1,
    Bi2,
    TriProduct,
    TriDagger,
    QuadDagger,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Self::Bi1,
        Self::Bi2,
        Self::TriProduct,
        Self::TriDagger,
        Self::QuadDagger,
    ];

    /// Required subsystem count, if fixed.
    pub fn parties(self) -> Option<usize> {
        match self {
            Self::Bi1 | Self::Bi2 => None,
            Self::TriProduct | Self::TriDagger => Some(3),
            Self::QuadDagger => Some(4),
        }
    }

    pub fn is_dagger_form(self) -> bool {
        matches!(self, Self::TriDagger | Self::QuadDagger)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Bi1 => "bi1",
            Self::Bi2 => "bi2",
            Self::TriProduct => "tri-product",
            Self::TriDagger => "tri-dagger",
            Self::QuadDagger => "quad-dagger",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Condition {
    type Err = GmeError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|c| c.name() == norm)
            .ok_or_else(|| GmeError::Parse(format!("unknown condition `{s}` (expected bi1, bi2, tri-product, tri-dagger, quad-dagger)")))
    }
}

/// A condition together with how per-subsystem operators are arranged in it.
///
/// For `bi1`/`bi2` the operators on `l_sites` form `L` and the rest form `M`
/// (default: subsystem 0 against everything else). For dagger forms
/// `daggered` selects the adjointed factor (default 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub condition: Condition,
    pub l_sites: Option<Vec<usize>>,
    pub daggered: usize,
    pub evaluator: Evaluator,
}

impl Witness {
    pub fn new(condition: Condition) -> Self {
        Self {
            condition,
            l_sites: None,
            daggered: 0,
            evaluator: Evaluator::default(),
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        self.evaluator = Evaluator::new(tolerance)?;
        Ok(self)
    }

    /// Sites whose operators form `L` in the bipartite conditions.
    pub fn with_l_sites(mut self, sites: Vec<usize>) -> Self {
        self.l_sites = Some(sites);
        self
    }

    /// Checks a dagger pattern against the condition and adopts it.
    ///
    /// Dagger forms need exactly one `d`; `tri-product` and `bi2` need none;
    /// `bi1` takes the daggered sites as the `L` block.
    pub fn with_dagger_pattern(mut self, mask: &[bool]) -> Result<Self> {
        let daggered: Vec<usize> = mask
            .iter()
            .enumerate()
            .filter(|(_, &d)| d)
            .map(|(k, _)| k)
            .collect();
        match self.condition {
            Condition::TriDagger | Condition::QuadDagger => {
                if daggered.len() != 1 {
                    return Err(GmeError::Validation(format!(
                        "{} needs exactly one daggered factor in the pattern",
                        self.condition
                    )));
                }
                self.daggered = daggered[0];
            }
            Condition::TriProduct | Condition::Bi2 => {
                if !daggered.is_empty() {
                    return Err(GmeError::Validation(format!(
                        "{} takes no daggered factors",
                        self.condition
                    )));
                }
            }
            Condition::Bi1 => {
                if !daggered.is_empty() {
                    Bipartition::new(mask.len(), &daggered)?;
                    self.l_sites = Some(daggered);
                }
            }
        }
        Ok(self)
    }

    /// The default dagger pattern for this witness on `parties` subsystems.
    pub fn dagger_pattern(&self, parties: usize) -> Vec<bool> {
        match self.condition {
            Condition::TriDagger | Condition::QuadDagger => {
                (0..parties).map(|k| k == self.daggered).collect()
            }
            Condition::Bi1 => {
                let (l, _) = self.blocks(parties);
                (0..parties).map(|k| l.contains(&k)).collect()
            }
            _ => vec![false; parties],
        }
    }

    fn blocks(&self, parties: usize) -> (Vec<usize>, Vec<usize>) {
        let l = self.l_sites.clone().unwrap_or_else(|| vec![0]);
        let m = (0..parties).filter(|s| !l.contains(s)).collect();
        (l, m)
    }

    pub fn evaluate<S: QuantumState + ?Sized>(
        &self,
        state: &S,
        ops: &[LocalOperator],
    ) -> Result<WitnessReport> {
        let n = state.dims().parties();
        if let Some(want) = self.condition.parties() {
            if n != want {
                return Err(GmeError::Validation(format!(
                    "{} needs {want} subsystems, state has {n}",
                    self.condition
                )));
            }
        } else if n < 2 {
            return Err(GmeError::Validation(format!(
                "{} needs at least two subsystems",
                self.condition
            )));
        }
        check_arity(state.dims(), ops)?;
        let ev = &self.evaluator;
        match self.condition {
            Condition::Bi1 | Condition::Bi2 => {
                let (l_sites, m_sites) = self.blocks(n);
                Bipartition::new(n, &l_sites)?;
                let l = BlockOperator::from_locals(&l_sites, ops)?;
                let m = BlockOperator::from_locals(&m_sites, ops)?;
                if self.condition == Condition::Bi1 {
                    ev.bipartite_cond_one(state, &l, &m)
                } else {
                    ev.bipartite_cond_two(state, &l, &m)
                }
            }
            Condition::TriProduct => ev.product_form(state, ops),
            Condition::TriDagger | Condition::QuadDagger => {
                ev.dagger_form(state, ops, self.daggered)
            }
        }
    }

    /// The bipartitions whose separable states this witness is sound against.
    pub fn sound_against(&self, parties: usize) -> Vec<Bipartition> {
        match self.condition {
            Condition::Bi1 | Condition::Bi2 => {
                let (l, _) = self.blocks(parties);
                Bipartition::new(parties, &l).into_iter().collect()
            }
            _ => Bipartition::all(parties),
        }
    }
}

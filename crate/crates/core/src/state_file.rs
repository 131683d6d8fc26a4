//! JSON formats for states and operator lists used by the command line.
//!
//! State file:
//!
//! ```json
//! { "dims": [2, 2, 2], "kind": "pure",
//!   "terms": [{"occupation": [0, 1, 1], "re": 1.0, "im": 0.0},
//!             {"occupation": [1, 0, 0], "re": 1.0}] }
//! ```
//!
//! `kind` is `pure`, `white_noise` (with `s` and `terms`) or `mixture`
//! (with `components: [{weight, terms}]`). Amplitudes are normalised on load.
//!
//! Operator file: `{"factors": ["sigma_minus", ...], "dagger": "d--"}`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GmeError, Result};
use crate::local_ops::{parse_dagger_pattern, parse_operator_list, LocalOperator};
use crate::states::{
    superposition, white_noise_mix, DensityMatrix, HilbertDims, PureState, QuantumState,
};
use crate::tensor::ComplexMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Pure,
    WhiteNoise,
    Mixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub occupation: Vec<usize>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub weight: f64,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub kind: StateKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<Term>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<Component>>,
}

/// A state read from disk: kept as a vector when it is pure.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl LoadedState {
    pub fn to_density(&self) -> DensityMatrix {
        match self {
            Self::Pure(p) => p.to_density(),
            Self::Mixed(m) => m.clone(),
        }
    }
}

impl QuantumState for LoadedState {
    fn dims(&self) -> &HilbertDims {
        match self {
            Self::Pure(p) => p.dims(),
            Self::Mixed(m) => m.dims(),
        }
    }

    fn expectation(&self, obs: &ComplexMatrix) -> Result<Complex64> {
        match self {
            Self::Pure(p) => p.expectation(obs),
            Self::Mixed(m) => m.expectation(obs),
        }
    }

    fn product_expectation(&self, factors: &[&ComplexMatrix]) -> Result<Complex64> {
        match self {
            Self::Pure(p) => p.product_expectation(factors),
            Self::Mixed(m) => m.product_expectation(factors),
        }
    }
}

fn pure_from_terms(dims: &HilbertDims, terms: &[Term]) -> Result<PureState> {
    if terms.is_empty() {
        return Err(GmeError::Validation("state has no terms".into()));
    }
    let terms: Vec<(Complex64, Vec<usize>)> = terms
        .iter()
        .map(|t| (Complex64::new(t.re, t.im), t.occupation.clone()))
        .collect();
    superposition(dims, &terms)
}

impl StateFile {
    pub fn pure(dims: Vec<usize>, terms: Vec<Term>) -> Self {
        Self {
            dims,
            kind: StateKind::Pure,
            terms,
            s: None,
            components: None,
        }
    }

    pub fn build(&self) -> Result<LoadedState> {
        let dims = HilbertDims::new(self.dims.clone())?;
        match self.kind {
            StateKind::Pure => Ok(LoadedState::Pure(pure_from_terms(&dims, &self.terms)?)),
            StateKind::WhiteNoise => {
                let s = self
                    .s
                    .ok_or_else(|| GmeError::Validation("white_noise state needs `s`".into()))?;
                let psi = pure_from_terms(&dims, &self.terms)?;
                Ok(LoadedState::Mixed(white_noise_mix(&psi, s)?))
            }
            StateKind::Mixture => {
                let comps = self
                    .components
                    .as_ref()
                    .filter(|c| !c.is_empty())
                    .ok_or_else(|| {
                        GmeError::Validation("mixture state needs `components`".into())
                    })?;
                let parts = comps
                    .iter()
                    .map(|c| Ok((c.weight, pure_from_terms(&dims, &c.terms)?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(LoadedState::Mixed(DensityMatrix::mixture(&parts)?))
            }
        }
    }

    /// The underlying pure state of a `pure` or `white_noise` file.
    pub fn pure_part(&self) -> Result<PureState> {
        match self.kind {
            StateKind::Mixture => Err(GmeError::Validation(
                "expected a pure or white_noise state".into(),
            )),
            _ => pure_from_terms(&HilbertDims::new(self.dims.clone())?, &self.terms),
        }
    }
}

pub fn parse_state(json: &str) -> Result<StateFile> {
    serde_json::from_str(json).map_err(|e| GmeError::Parse(format!("state file: {e}")))
}

pub fn read_state_file(path: &Path) -> Result<StateFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| GmeError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_state(&text)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpsFile {
    pub factors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dagger: Option<String>,
}

impl OpsFile {
    /// Inline form: factors separated by `;`, e.g. `sigma_minus;sigma_minus;ketbra 0 1`.
    pub fn inline(text: &str) -> Result<Self> {
        let factors: Vec<String> = text.split(';').map(|s| s.trim().to_string()).collect();
        if factors.iter().any(String::is_empty) {
            return Err(GmeError::Parse(format!("empty factor in `{text}`")));
        }
        Ok(Self {
            factors,
            dagger: None,
        })
    }

    pub fn operators(&self, dims: &HilbertDims) -> Result<Vec<LocalOperator>> {
        parse_operator_list(dims, &self.factors)
    }

    pub fn dagger_mask(&self) -> Result<Option<Vec<bool>>> {
        self.dagger.as_deref().map(parse_dagger_pattern).transpose()
    }
}

pub fn parse_ops(json: &str) -> Result<OpsFile> {
    serde_json::from_str(json).map_err(|e| GmeError::Parse(format!("operator file: {e}")))
}

/// Reads `arg` as an operator file if such a path exists, otherwise as the inline form.
pub fn load_ops(arg: &str) -> Result<OpsFile> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GmeError::Parse(format!("cannot read {}: {e}", path.display())))?;
        parse_ops(&text)
    } else {
        OpsFile::inline(arg)
    }
}

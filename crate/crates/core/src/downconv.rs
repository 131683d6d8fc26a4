//! Trilinear down-conversion `H = w1 a^dag a + w2 b^dag b + w3 c^dag c + g (a^dag b c + a b^dag c^dag)`
//! started from `|N, 0, 0>`.
//!
//! `2 N_a + N_b + N_c` commutes with `H`, so the state stays in
//! `span{|N-n, n, n> : n = 0..=N}` and is evolved there exactly. Frequencies are
//! kept explicit; set them to zero for the interaction picture.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{GmeError, Result};
use crate::local_ops::{block_ops, block_sum, boson_annihilation, LocalOperator};
use crate::states::{HilbertDims, PureState};
use crate::tensor::{self, hermitian_eigen, ComplexMatrix, HermitianEigen};
use crate::witness::{fmt_float, Evaluator, WitnessReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DownConversionParams {
    /// Initial pump photon number `N` (even, at least 2).
    pub photons: usize,
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
    pub g: f64,
}

impl DownConversionParams {
    pub fn new(photons: usize, omega1: f64, omega2: f64, omega3: f64, g: f64) -> Result<Self> {
        if photons < 2 || !photons.is_multiple_of(2) {
            return Err(GmeError::Validation(format!(
                "photon number N = {photons} must be even and at least 2"
            )));
        }
        if ![omega1, omega2, omega3, g].iter().all(|x| x.is_finite()) {
            return Err(GmeError::Validation(
                "frequencies and coupling must be finite".into(),
            ));
        }
        Ok(Self {
            photons,
            omega1,
            omega2,
            omega3,
            g,
        })
    }

    /// Resonant interaction picture: all frequencies zero.
    pub fn interaction(photons: usize, g: f64) -> Result<Self> {
        Self::new(photons, 0.0, 0.0, 0.0, g)
    }

    /// Dimensions of the truncated three-mode space, cutoff `N` on each mode.
    pub fn full_dims(&self) -> HilbertDims {
        HilbertDims::uniform(3, self.photons + 1).expect("N >= 2")
    }
}

/// Amplitudes `c_n` of `|N-n, n, n>` at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceAmplitudes {
    pub photons: usize,
    pub time: f64,
    pub amplitudes: Vec<Complex64>,
}

impl SubspaceAmplitudes {
    pub fn new(photons: usize, time: f64, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != photons + 1 {
            return Err(GmeError::Shape(format!(
                "{} amplitudes for N = {photons}",
                amplitudes.len()
            )));
        }
        if (tensor::norm(&amplitudes) - 1.0).abs() > 1e-10 {
            return Err(GmeError::Validation(
                "subspace amplitudes must have unit norm".into(),
            ));
        }
        Ok(Self {
            photons,
            time,
            amplitudes,
        })
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        tensor::norm(&self.amplitudes)
    }

    /// The state embedded in the `(N+1)^3`-dimensional truncated space.
    pub fn to_full_state(&self) -> PureState {
        let n = self.photons;
        let dims = HilbertDims::uniform(3, n + 1).expect("N >= 2");
        let mut amps = vec![Complex64::new(0.0, 0.0); dims.total()];
        for (k, &c) in self.amplitudes.iter().enumerate() {
            amps[dims.flat_index(&[n - k, k, k]).expect("in range")] = c;
        }
        PureState::new(dims, amps).expect("unit norm")
    }
}

/// `H` on the conserved sector, basis `|N-n, n, n>`.
pub fn subspace_hamiltonian(p: &DownConversionParams) -> ComplexMatrix {
    let n_tot = p.photons;
    let mut h = ComplexMatrix::zeros(n_tot + 1, n_tot + 1);
    for n in 0..=n_tot {
        let diag = p.omega1 * (n_tot - n) as f64 + (p.omega2 + p.omega3) * n as f64;
        h.set(n, n, Complex64::new(diag, 0.0));
        if n < n_tot {
            let coupling = p.g * ((n_tot - n) as f64).sqrt() * (n + 1) as f64;
            h.set(n + 1, n, Complex64::new(coupling, 0.0));
            h.set(n, n + 1, Complex64::new(coupling, 0.0));
        }
    }
    h
}

/// `H` on the full truncated space with cutoff `N` on every mode.
pub fn full_hamiltonian(p: &DownConversionParams) -> ComplexMatrix {
    let a = boson_annihilation(p.photons).expect("N >= 2");
    let id = ComplexMatrix::identity(p.photons + 1);
    let number = a.dagger_times_self();
    let ad = tensor::adjoint(a.matrix());
    let k3 = |x: &ComplexMatrix, y: &ComplexMatrix, z: &ComplexMatrix| {
        tensor::kron(&tensor::kron(x, y), z)
    };
    let real = |x: f64| Complex64::new(x, 0.0);
    let free = k3(&number, &id, &id)
        .scale(real(p.omega1))
        .add(&k3(&id, &number, &id).scale(real(p.omega2)))
        .and_then(|m| m.add(&k3(&id, &id, &number).scale(real(p.omega3))))
        .expect("same shape");
    let hop = k3(&ad, a.matrix(), a.matrix());
    let interaction = hop
        .add(&tensor::adjoint(&hop))
        .expect("same shape")
        .scale(real(p.g));
    free.add(&interaction).expect("same shape")
}

/// `2 N_a + N_b + N_c` on the full truncated space.
pub fn conserved_charge(photons: usize) -> ComplexMatrix {
    let d = photons + 1;
    let dims = [d, d, d];
    let diag: Vec<Complex64> = (0..d * d * d)
        .map(|i| {
            let o = tensor::multi_index(i, &dims);
            Complex64::new((2 * o[0] + o[1] + o[2]) as f64, 0.0)
        })
        .collect();
    ComplexMatrix::from_diagonal(&diag)
}

/// Reusable spectral decomposition of the sector Hamiltonian.
#[derive(Debug, Clone)]
pub struct Propagator {
    params: DownConversionParams,
    eigen: HermitianEigen,
}

impl Propagator {
    pub fn new(params: DownConversionParams) -> Result<Self> {
        let eigen = hermitian_eigen(&subspace_hamiltonian(&params))?;
        Ok(Self { params, eigen })
    }

    pub fn params(&self) -> &DownConversionParams {
        &self.params
    }

    pub fn evolve(&self, t: f64) -> Result<SubspaceAmplitudes> {
        if !t.is_finite() {
            return Err(GmeError::Validation(format!(
                "time must be finite, got {t}"
            )));
        }
        let mut start = vec![Complex64::new(0.0, 0.0); self.params.photons + 1];
        start[0] = Complex64::new(1.0, 0.0);
        let amplitudes = if t == 0.0 {
            start
        } else {
            self.eigen.evolve(t, &start)?
        };
        Ok(SubspaceAmplitudes {
            photons: self.params.photons,
            time: t,
            amplitudes,
        })
    }
}

/// `c(t) = exp(-i t H_sector) e_0`.
pub fn evolve(p: &DownConversionParams, t: f64) -> Result<SubspaceAmplitudes> {
    Propagator::new(*p)?.evolve(t)
}

/// Summed block operators `(sum A_n, sum B_n, sum C_n)` over even `n <= N - 2`.
pub fn summed_block_ops(photons: usize) -> Result<[LocalOperator; 3]> {
    let a = block_sum(photons, true)?;
    let b = block_sum(photons, false)?;
    Ok([a, b.clone(), b])
}

/// Dagger-form witness with the summed block operators on the embedded state.
///
/// `lhs = |sum_{n even} c_n^* c_{n+1}|`; the right-hand terms vanish on the
/// whole sector and are evaluated, not assumed. `c_N` pairs with nothing.
pub fn downconv_witness(amps: &SubspaceAmplitudes) -> Result<WitnessReport> {
    downconv_witness_with(&Evaluator::default(), amps)
}

pub fn downconv_witness_with(ev: &Evaluator, amps: &SubspaceAmplitudes) -> Result<WitnessReport> {
    let [a, b, c] = summed_block_ops(amps.photons)?;
    ev.tri_dagger(&amps.to_full_state(), &a, &b, &c)
}

/// Witness built from the single pair `{|N-n, n, n>, |N-n-1, n+1, n+1>}`.
pub fn block_witness(amps: &SubspaceAmplitudes, n: usize) -> Result<WitnessReport> {
    let (a, b, c) = block_ops(amps.photons, n)?;
    Evaluator::default().tri_dagger(&amps.to_full_state(), &a, &b, &c)
}

/// Uniform grid `start, start + step, ...` up to and including `stop` (within rounding).
pub fn time_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 || stop < start {
        return Err(GmeError::Validation(format!(
            "bad time grid start={start} stop={stop} step={step}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub amplitudes: SubspaceAmplitudes,
    pub report: WitnessReport,
}

/// Evolves and evaluates the summed witness on every grid point; rows keep grid order.
pub fn sweep(ev: &Evaluator, p: &DownConversionParams, times: &[f64]) -> Result<Vec<SweepRow>> {
    let prop = Propagator::new(*p)?;
    times
        .par_iter()
        .map(|&t| {
            let amplitudes = prop.evolve(t)?;
            let report = downconv_witness_with(ev, &amplitudes)?;
            Ok(SweepRow { amplitudes, report })
        })
        .collect()
}

/// `t,|c_0|^2,...,|c_N|^2,norm,witness_lhs,violated`, where `norm` is the sum of the populations.
pub fn csv_header(photons: usize) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((0..=photons).map(|n| format!("|c_{n}|^2")));
    cols.push("norm".into());
    cols.push("witness_lhs".into());
    cols.push("violated".into());
    cols.join(",")
}

pub fn csv_row(row: &SweepRow) -> String {
    let mut cols = vec![fmt_float(row.amplitudes.time)];
    let pops = row.amplitudes.populations();
    let norm: f64 = pops.iter().sum();
    cols.extend(pops.into_iter().map(fmt_float));
    cols.push(fmt_float(norm));
    cols.push(fmt_float(row.report.lhs));
    cols.push(row.report.violated.to_string());
    cols.join(",")
}

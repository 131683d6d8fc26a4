//! Multi-start Nelder-Mead search over rank-one local operators `|u><v|`.
//!
//! Each unit vector in `C^d` is described by `2d - 2` real numbers: `d - 1`
//! hyperspherical angles for the moduli and `d - 1` relative phases, with the
//! first component kept real. The objective is the violation margin of a
//! [`Witness`], which is non-smooth where right-hand terms cross, hence the
//! simplex search.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GmeError, Result};
use crate::local_ops::LocalOperator;
use crate::states::QuantumState;
use crate::witness::{Witness, WitnessReport};

/// Unit vector from `2 * dim - 2` angles: `dim - 1` polar then `dim - 1` phases.
pub fn unit_vector(params: &[f64], dim: usize) -> Vec<Complex64> {
    assert_eq!(params.len(), 2 * dim - 2, "parameter count");
    let (polar, phases) = params.split_at(dim - 1);
    let mut out = Vec::with_capacity(dim);
    let mut sin_prod = 1.0;
    for k in 0..dim {
        let r = if k + 1 < dim {
            sin_prod * polar[k].cos()
        } else {
            sin_prod
        };
        if k + 1 < dim {
            sin_prod *= polar[k].sin();
        }
        let phase = if k == 0 { 0.0 } else { phases[k - 1] };
        out.push(Complex64::from_polar(r, phase));
    }
    out
}

/// Removes the global phase: the first nonzero component becomes real and positive.
pub fn canonical_phase(v: &[Complex64]) -> Vec<Complex64> {
    match v.iter().find(|z| z.norm() > 1e-15) {
        Some(z) => {
            let rot = z.conj() / z.norm();
            v.iter().map(|x| x * rot).collect()
        }
        None => v.to_vec(),
    }
}

/// Operator `|u><v|` per subsystem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOneParams {
    pub factors: Vec<RankOneFactor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOneFactor {
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

impl RankOneParams {
    fn from_flat(flat: &[f64], dims: &[usize]) -> Self {
        let mut offset = 0;
        let factors = dims
            .iter()
            .map(|&d| {
                let n = 2 * d - 2;
                let u = canonical_phase(&unit_vector(&flat[offset..offset + n], d));
                let v = canonical_phase(&unit_vector(&flat[offset + n..offset + 2 * n], d));
                offset += 2 * n;
                RankOneFactor { u, v }
            })
            .collect();
        Self { factors }
    }

    pub fn operators(&self) -> Vec<LocalOperator> {
        self.factors
            .iter()
            .map(|f| LocalOperator::rank_one(&f.u, &f.v).expect("equal lengths"))
            .collect()
    }
}

/// Best operators found, with the report from re-evaluating exactly those operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_params: RankOneParams,
    pub best_report: WitnessReport,
    pub evaluations: usize,
    pub seed: u64,
    pub best_restart: usize,
}

struct Simplex {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

/// Minimises `f` from `x0` within `budget` evaluations. Returns `(x, f(x), evaluations)`.
///
/// Runs repeated Nelder-Mead passes from the incumbent, shrinking the initial
/// simplex whenever a pass stops improving.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    budget: usize,
) -> (Vec<f64>, f64, usize) {
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let y = f(x);
        if y.is_nan() {
            f64::INFINITY
        } else {
            y
        }
    };
    let mut best_x = x0.to_vec();
    let mut best_f = eval(&best_x, &mut evals);
    if x0.is_empty() {
        return (best_x, best_f, evals);
    }
    let mut scale = step;
    while evals < budget && scale > 1e-10 {
        let (x, fx) = nelder_mead_pass(&mut eval, &best_x, best_f, scale, budget, &mut evals);
        if fx < best_f - 1e-15 {
            best_x = x;
            best_f = fx;
        } else {
            scale *= 0.1;
        }
    }
    (best_x, best_f, evals)
}

fn nelder_mead_pass(
    eval: &mut impl FnMut(&[f64], &mut usize) -> f64,
    x0: &[f64],
    f0: f64,
    step: f64,
    budget: usize,
    evals: &mut usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut s = Simplex {
        points: vec![x0.to_vec()],
        values: vec![f0],
    };
    for i in 0..n {
        if *evals >= budget {
            return (x0.to_vec(), f0);
        }
        let mut p = x0.to_vec();
        p[i] += step;
        s.values.push(eval(&p, evals));
        s.points.push(p);
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    while *evals < budget {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| s.values[a].total_cmp(&s.values[b]));
        s.points = order.iter().map(|&k| s.points[k].clone()).collect();
        s.values = order.iter().map(|&k| s.values[k]).collect();

        let spread = s.values[n] - s.values[0];
        let size = s.points[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&s.points[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.abs() <= 1e-15 * (1.0 + s.values[0].abs()) && size < 1e-9 || size < 1e-12 {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| s.points[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64)
            .collect();
        let towards = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&s.points[n])
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };
        let xr = towards(alpha);
        let fr = eval(&xr, evals);
        if fr < s.values[0] {
            let xe = towards(gamma);
            let fe = eval(&xe, evals);
            if fe < fr {
                s.points[n] = xe;
                s.values[n] = fe;
            } else {
                s.points[n] = xr;
                s.values[n] = fr;
            }
        } else if fr < s.values[n - 1] {
            s.points[n] = xr;
            s.values[n] = fr;
        } else {
            let (xc, fc) = if fr < s.values[n] {
                let xc = towards(rho);
                let fc = eval(&xc, evals);
                (xc, fc)
            } else {
                let xc = towards(-rho);
                let fc = eval(&xc, evals);
                (xc, fc)
            };
            if fc < s.values[n].min(fr) {
                s.points[n] = xc;
                s.values[n] = fc;
            } else {
                let best = s.points[0].clone();
                for k in 1..=n {
                    if *evals >= budget {
                        break;
                    }
                    let p: Vec<f64> = best
                        .iter()
                        .zip(&s.points[k])
                        .map(|(b, x)| b + sigma * (x - b))
                        .collect();
                    s.values[k] = eval(&p, evals);
                    s.points[k] = p;
                }
            }
        }
    }
    let k = (0..=n)
        .min_by(|&a, &b| s.values[a].total_cmp(&s.values[b]))
        .expect("nonempty");
    (s.points[k].clone(), s.values[k])
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Maximises the violation margin of `witness` on `state` over rank-one local operators.
///
/// Restart `k` always draws its starting point from stream `k` of the seeded
/// generator, so adding restarts never changes earlier ones. Ties between
/// restarts go to the lowest index.
pub fn optimize<S: QuantumState + Sync + ?Sized>(
    state: &S,
    witness: &Witness,
    restarts: usize,
    budget: usize,
    seed: u64,
) -> Result<OptimizationResult> {
    if budget < 1 {
        return Err(GmeError::Validation(
            "evaluation budget must be at least 1".into(),
        ));
    }
    if restarts < 1 {
        return Err(GmeError::Validation(
            "at least one restart is required".into(),
        ));
    }
    let dims = state.dims().as_slice().to_vec();
    if let Some(want) = witness.condition.parties() {
        if dims.len() != want {
            return Err(GmeError::Validation(format!(
                "{} needs {want} subsystems, state has {}",
                witness.condition,
                dims.len()
            )));
        }
    }
    let n_params: usize = dims.iter().map(|d| 4 * d - 4).sum();
    let objective = |x: &[f64]| -> f64 {
        let ops = RankOneParams::from_flat(x, &dims).operators();
        match witness.evaluate(state, &ops) {
            Ok(r) => -r.margin,
            Err(_) => f64::INFINITY,
        }
    };
    // fail early on structural errors rather than silently returning +inf everywhere
    witness.evaluate(
        state,
        &RankOneParams::from_flat(&vec![0.3; n_params], &dims).operators(),
    )?;

    let runs: Vec<(usize, Vec<f64>, f64, usize)> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = restart_rng(seed, k);
            let x0: Vec<f64> = (0..n_params)
                .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                .collect();
            let (x, fx, evals) = nelder_mead(objective, &x0, 0.5, budget);
            (k, x, fx, evals)
        })
        .collect();
    let evaluations = runs.iter().map(|r| r.3).sum();
    let (best_restart, best_x, _, _) = runs
        .into_iter()
        .reduce(|a, b| if b.2 < a.2 { b } else { a })
        .expect("restarts >= 1");
    let best_params = RankOneParams::from_flat(&best_x, &dims);
    let best_report = witness.evaluate(state, &best_params.operators())?;
    Ok(OptimizationResult {
        best_params,
        best_report,
        evaluations,
        seed,
        best_restart,
    })
}

//! Riemannian gradient descent on `O(n_1) × ⋯ × O(n_d)` for the pattern
//! distance `f(Q) = dist(Qᵀ·T, V)² = Σ_{i∈I} [Qᵀ·T]_i²`.
//!
//! Tangent vectors at `Q_k` are stored in Lie-algebra coordinates: the
//! Riemannian gradient is `Q_k Ω_k` with `Ω_k = skew(Q_kᵀ G_k)`. Steps are
//! retracted with a sign-fixed QR factorization and accepted by Armijo
//! backtracking, with a Barzilai–Borwein guess for the first trial step.
//! With a shared matrix, descent alternates with grid searches over plane
//! rotations until neither makes progress.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{qr_positive, skew};
use crate::pattern::{pattern_v, pattern_vdiag, pattern_vsym, PatternIndexSet};
use crate::random::haar_orthogonal;
use crate::tensor::{flatten, group_action, DenseTensor, OrthTuple};

/// Orthogonality slack accepted by [`objective`]; larger drift means the
/// optimizer left the manifold.
pub const DRIFT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ObjectiveSpec {
    target: DenseTensor,
    pattern: PatternIndexSet,
    symmetric: bool,
}

impl ObjectiveSpec {
    pub fn new(target: DenseTensor, pattern: PatternIndexSet, symmetric: bool) -> Result<Self> {
        if target.shape() != pattern.shape() {
            return Err(Error::ShapeMismatch {
                left: target.shape().to_vec(),
                right: pattern.shape().to_vec(),
            });
        }
        if symmetric && target.shape().iter().any(|&n| n != target.shape()[0]) {
            return Err(Error::InvalidShape {
                shape: target.shape().to_vec(),
                reason: "a shared orthogonal matrix needs equal dimensions".into(),
            });
        }
        Ok(ObjectiveSpec {
            target,
            pattern,
            symmetric,
        })
    }

    /// Structured objective: `V`, or `V_sym` with a shared `Q`.
    pub fn structured(target: DenseTensor, symmetric: bool) -> Result<Self> {
        let pattern = if symmetric {
            pattern_vsym(target.shape()[0], target.order())?
        } else {
            pattern_v(target.shape())?
        };
        Self::new(target, pattern, symmetric)
    }

    /// Odeco objective: the diagonal pattern `V_diag`.
    pub fn odeco(target: DenseTensor, symmetric: bool) -> Result<Self> {
        let pattern = pattern_vdiag(target.shape())?;
        Self::new(target, pattern, symmetric)
    }

    pub fn target(&self) -> &DenseTensor {
        &self.target
    }

    pub fn pattern(&self) -> &PatternIndexSet {
        &self.pattern
    }

    pub fn symmetric(&self) -> bool {
        self.symmetric
    }

    fn scaled(&self, c: f64) -> ObjectiveSpec {
        ObjectiveSpec {
            target: self.target.scale(c),
            pattern: self.pattern.clone(),
            symmetric: self.symmetric,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    /// Stop once the Riemannian gradient norm of `f / ‖T‖²` drops below this.
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub initial_step: f64,
    pub starts: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iters: 2000,
            grad_tol: 1e-9,
            armijo_c: 1e-4,
            backtrack: 0.5,
            initial_step: 1.0,
            starts: 20,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.grad_tol > 0.0
            && self.armijo_c > 0.0
            && self.armijo_c < 1.0
            && self.backtrack > 0.0
            && self.backtrack < 1.0
            && self.initial_step > 0.0;
        if !positive || self.starts == 0 || self.max_iters == 0 {
            return Err(Error::InvalidArgument(format!(
                "optimizer settings must be positive (armijo c and backtrack in (0,1), starts >= 1): {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartRecord {
    pub start: usize,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after every accepted iterate, starting point included.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct OptResult {
    pub q: OrthTuple,
    pub objective: f64,
    pub relative_distance: f64,
    pub iterations: usize,
    pub converged: bool,
    pub best_start: usize,
    pub starts: Vec<StartRecord>,
}

/// `(Q_1ᵀ, …, Q_dᵀ)·T` with orthogonality left unchecked.
fn pulled_back(mats: &[DMatrix<f64>], spec: &ObjectiveSpec) -> DenseTensor {
    let transposed: Vec<DMatrix<f64>> = mats.iter().map(|q| q.transpose()).collect();
    group_action(&transposed, &spec.target).expect("shapes validated by ObjectiveSpec")
}

fn check_tuple(mats: &[DMatrix<f64>], spec: &ObjectiveSpec) -> Result<()> {
    if mats.len() != spec.target.order() {
        return Err(Error::InvalidArgument(format!(
            "{} matrices for an order-{} objective",
            mats.len(),
            spec.target.order()
        )));
    }
    for (k, q) in mats.iter().enumerate() {
        let n = spec.target.shape()[k];
        if q.nrows() != n || q.ncols() != n {
            return Err(Error::ModeMismatch {
                mode: k,
                expected: n,
                found: q.nrows(),
            });
        }
    }
    Ok(())
}

/// Polynomial objective evaluated at arbitrary (not necessarily orthogonal)
/// matrices. Used for finite-difference checks.
pub fn objective_unchecked(mats: &[DMatrix<f64>], spec: &ObjectiveSpec) -> Result<f64> {
    check_tuple(mats, spec)?;
    spec.pattern.distance_sq(&pulled_back(mats, spec))
}

pub fn objective(q: &OrthTuple, spec: &ObjectiveSpec) -> Result<f64> {
    for (k, m) in q.matrices().iter().enumerate() {
        let defect = (m.transpose() * m - DMatrix::identity(m.nrows(), m.ncols())).amax();
        if defect > DRIFT_TOLERANCE {
            return Err(Error::NotOrthogonal { mode: k, defect });
        }
    }
    objective_unchecked(q.matrices(), spec)
}

/// Per-mode Euclidean gradients `G_k = 2 Z_(k) R_(k)ᵀ`, where `R` is the
/// pulled-back tensor restricted to the forced coordinates and `Z` is the
/// tensor pulled back in every mode except `k`.
pub fn euclidean_gradient(mats: &[DMatrix<f64>], spec: &ObjectiveSpec) -> Result<Vec<DMatrix<f64>>> {
    check_tuple(mats, spec)?;
    let residual = spec.pattern.project_complement(&pulled_back(mats, spec))?;
    let d = mats.len();
    let transposed: Vec<DMatrix<f64>> = mats.iter().map(|q| q.transpose()).collect();
    (0..d)
        .map(|k| {
            let mut partial = transposed.clone();
            let n = spec.target.shape()[k];
            partial[k] = DMatrix::identity(n, n);
            let z = group_action(&partial, &spec.target)?;
            Ok(flatten(&z, k)? * flatten(&residual, k)?.transpose() * 2.0)
        })
        .collect()
}

/// Gradient with respect to a single `Q` shared by every mode.
pub fn shared_gradient(q: &DMatrix<f64>, spec: &ObjectiveSpec) -> Result<DMatrix<f64>> {
    let mats = vec![q.clone(); spec.target.order()];
    let grads = euclidean_gradient(&mats, spec)?;
    let n = q.nrows();
    Ok(grads.into_iter().fold(DMatrix::zeros(n, n), |acc, g| acc + g))
}

/// Lie-algebra coordinates `skew(Q_kᵀ G_k)` of the Riemannian gradient.
pub fn lie_gradient(q: &OrthTuple, egrad: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    q.matrices()
        .iter()
        .zip(egrad)
        .map(|(qk, gk)| skew(&(qk.transpose() * gk)))
        .collect()
}

/// Tangent projection `Q_k skew(Q_kᵀ G_k)` of a Euclidean gradient.
pub fn riemannian_gradient(q: &OrthTuple, egrad: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    q.matrices()
        .iter()
        .zip(lie_gradient(q, egrad))
        .map(|(qk, w)| qk * w)
        .collect()
}

/// QR retraction of `Q_k + step · Q_k Ω_k` in every mode.
pub fn retract(q: &OrthTuple, lie_direction: &[DMatrix<f64>], step: f64) -> Result<OrthTuple> {
    let mats = q
        .matrices()
        .iter()
        .zip(lie_direction)
        .map(|(qk, w)| qr_positive(&(qk + qk * w * step)).ok_or(Error::RankDeficient))
        .collect::<Result<Vec<_>>>()?;
    Ok(OrthTuple::from_matrices_unchecked(mats))
}

/// One gradient step of length `step` against the Euclidean gradient.
/// Rank-deficient retractions halve the step until one succeeds.
pub fn riemannian_step(q: &OrthTuple, egrad: &[DMatrix<f64>], step: f64) -> Result<OrthTuple> {
    let dir: Vec<DMatrix<f64>> = lie_gradient(q, egrad).into_iter().map(|w| -w).collect();
    let mut t = step;
    for _ in 0..60 {
        match retract(q, &dir, t) {
            Ok(next) => return Ok(next),
            Err(Error::RankDeficient) => t *= 0.5,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RankDeficient)
}

fn frob_sq(ms: &[DMatrix<f64>]) -> f64 {
    ms.iter().map(|m| m.norm_squared()).sum()
}

fn frob_dot(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

struct Evaluated {
    value: f64,
    lie: Vec<DMatrix<f64>>,
}

fn evaluate(q: &OrthTuple, spec: &ObjectiveSpec) -> Result<Evaluated> {
    let value = objective_unchecked(q.matrices(), spec)?;
    let lie = if spec.symmetric {
        let g = shared_gradient(&q.matrices()[0], spec)?;
        vec![skew(&(q.matrices()[0].transpose() * g))]
    } else {
        lie_gradient(q, &euclidean_gradient(q.matrices(), spec)?)
    };
    Ok(Evaluated { value, lie })
}

/// Objective values at or below this (relative to `‖T‖²`) are exact fits.
const EXACT_FIT: f64 = 1e-30;

/// Outcome of one run of Riemannian gradient descent.
struct Phase {
    value: f64,
    converged: bool,
    iterations: usize,
}

fn expand(q: &OrthTuple, spec: &ObjectiveSpec) -> OrthTuple {
    if spec.symmetric {
        OrthTuple::replicated(&q.matrices()[0], spec.target.order())
    } else {
        q.clone()
    }
}

fn gradient_phase(
    q: &mut OrthTuple,
    spec: &ObjectiveSpec,
    config: &OptimizerConfig,
    budget: usize,
    history: &mut Vec<f64>,
) -> Result<Phase> {
    let mut current = evaluate(&expand(q, spec), spec)?;
    let mut step = config.initial_step;
    let mut prev: Option<(f64, Vec<DMatrix<f64>>)> = None;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < budget {
        let gnorm_sq = frob_sq(&current.lie);
        if gnorm_sq.sqrt() <= config.grad_tol || current.value <= EXACT_FIT {
            converged = true;
            break;
        }
        if let Some((t_prev, lie_prev)) = &prev {
            let y: Vec<DMatrix<f64>> = current.lie.iter().zip(lie_prev).map(|(a, b)| a - b).collect();
            let s_dot_y = -t_prev * frob_dot(lie_prev, &y);
            let s_dot_s = t_prev * t_prev * frob_sq(lie_prev);
            step = if s_dot_y > 0.0 {
                (s_dot_s / s_dot_y).clamp(1e-8, 1e8)
            } else {
                (2.0 * t_prev).min(1e8)
            };
        }
        let dir: Vec<DMatrix<f64>> = current.lie.iter().map(|w| -w).collect();
        let mut t = step;
        let mut accepted = None;
        while t > 1e-20 {
            if let Ok(next) = retract(q, &dir, t) {
                let value = objective_unchecked(expand(&next, spec).matrices(), spec)?;
                if value <= current.value - config.armijo_c * t * gnorm_sq {
                    accepted = Some((next, t));
                    break;
                }
            }
            t *= config.backtrack;
        }
        let Some((next, t)) = accepted else {
            // No decrease is representable at this precision.
            converged = gnorm_sq.sqrt() <= config.grad_tol.sqrt();
            break;
        };
        *q = next;
        let lie_prev = std::mem::take(&mut current.lie);
        current = evaluate(&expand(q, spec), spec)?;
        history.push(current.value);
        prev = Some((t, lie_prev));
        iterations += 1;
    }
    if frob_sq(&current.lie).sqrt() <= config.grad_tol {
        converged = true;
    }
    Ok(Phase {
        value: current.value,
        converged,
        iterations,
    })
}

/// Number of angles tried per plane rotation of a shared matrix.
const SHARED_ANGLES: usize = 64;

/// One sweep over the planes `(a, b)` of the shared matrix, each rotated to
/// the best angle on a grid over the half circle. Unlike a gradient step
/// this can leave the basin of a spurious local minimum.
fn shared_rotation_sweep(q: &mut OrthTuple, spec: &ObjectiveSpec) -> Result<f64> {
    let d = spec.target.order();
    let mut m = q.matrices()[0].clone();
    let mut best = objective_unchecked(&vec![m.clone(); d], spec)?;
    let n = m.nrows();
    for a in 0..n {
        for b in a + 1..n {
            let mut pick = None;
            for step in 1..SHARED_ANGLES {
                let theta = std::f64::consts::PI * step as f64 / SHARED_ANGLES as f64;
                let (sn, cs) = theta.sin_cos();
                let mut trial = m.clone();
                for row in 0..n {
                    let (qa, qb) = (m[(row, a)], m[(row, b)]);
                    trial[(row, a)] = cs * qa + sn * qb;
                    trial[(row, b)] = -sn * qa + cs * qb;
                }
                let value = objective_unchecked(&vec![trial.clone(); d], spec)?;
                if value < best {
                    best = value;
                    pick = Some(trial);
                }
            }
            if let Some(trial) = pick {
                m = trial;
            }
        }
    }
    *q = OrthTuple::from_matrices_unchecked(vec![m]);
    Ok(best)
}

/// Cap on alternations between gradient descent and rotation sweeps in the
/// shared-matrix case.
const MAX_SWEEP_ROUNDS: usize = 50;

fn descend(start: usize, q0: OrthTuple, spec: &ObjectiveSpec, config: &OptimizerConfig) -> Result<(OrthTuple, StartRecord)> {
    // Symmetric mode carries a single matrix during the iteration.
    let mut q = if spec.symmetric {
        OrthTuple::from_matrices_unchecked(vec![q0.matrices()[0].clone()])
    } else {
        q0
    };
    let mut history = vec![objective_unchecked(expand(&q, spec).matrices(), spec)?];
    let mut iterations = 0;
    let mut phase;
    let mut rounds = 0;
    loop {
        phase = gradient_phase(&mut q, spec, config, config.max_iters - iterations, &mut history)?;
        iterations += phase.iterations;
        let done = phase.value <= EXACT_FIT || rounds == MAX_SWEEP_ROUNDS || iterations >= config.max_iters;
        if !spec.symmetric || done {
            break;
        }
        let mut trial = q.clone();
        let value = shared_rotation_sweep(&mut trial, spec)?;
        if !(value < phase.value * (1.0 - 1e-9)) {
            break;
        }
        q = trial;
        history.push(value);
        rounds += 1;
    }
    let record = StartRecord {
        start,
        objective: phase.value,
        iterations,
        converged: phase.converged,
        history,
    };
    Ok((expand(&q, spec), record))
}

fn random_start(spec: &ObjectiveSpec, seed: u64, start: usize) -> OrthTuple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start as u64);
    if spec.symmetric {
        let q = haar_orthogonal(spec.target.shape()[0], &mut rng);
        OrthTuple::replicated(&q, spec.target.order())
    } else {
        OrthTuple::from_matrices_unchecked(
            spec.target
                .shape()
                .iter()
                .map(|&n| haar_orthogonal(n, &mut rng))
                .collect(),
        )
    }
}

/// Best of `config.starts` descents: the identity followed by Haar-random
/// starting points.
pub fn minimize(spec: &ObjectiveSpec, config: &OptimizerConfig) -> Result<OptResult> {
    minimize_with_starts(spec, config, &[])
}

/// As [`minimize`], additionally descending from each of `warm` (run before
/// the identity and random starts, which keep their indices shifted).
pub fn minimize_with_starts(spec: &ObjectiveSpec, config: &OptimizerConfig, warm: &[OrthTuple]) -> Result<OptResult> {
    config.validate()?;
    for w in warm {
        check_tuple(w.matrices(), spec)?;
    }
    let norm = spec.target.norm();
    let shape = spec.target.shape().to_vec();
    if norm == 0.0 {
        let q = OrthTuple::identity(&shape);
        return Ok(OptResult {
            q,
            objective: 0.0,
            relative_distance: 0.0,
            iterations: 0,
            converged: true,
            best_start: 0,
            starts: vec![StartRecord {
                start: 0,
                objective: 0.0,
                iterations: 0,
                converged: true,
                history: vec![0.0],
            }],
        });
    }
    let normalized = spec.scaled(1.0 / norm);
    let mut initial: Vec<OrthTuple> = warm.to_vec();
    initial.push(OrthTuple::identity(&shape));
    for s in 1..config.starts {
        initial.push(random_start(spec, config.seed, s));
    }

    let runs = initial
        .into_par_iter()
        .enumerate()
        .map(|(i, q0)| descend(i, q0, &normalized, config))
        .collect::<Result<Vec<_>>>()?;

    let scale = norm * norm;
    let mut records = Vec::with_capacity(runs.len());
    let mut best: Option<(usize, OrthTuple)> = None;
    for (i, (q, mut rec)) in runs.into_iter().enumerate() {
        rec.objective *= scale;
        for h in rec.history.iter_mut() {
            *h *= scale;
        }
        let better = match &best {
            None => true,
            Some((b, _)) => rec.objective < records.get(*b).map(|r: &StartRecord| r.objective).unwrap_or(f64::INFINITY),
        };
        if better {
            best = Some((i, q));
        }
        records.push(rec);
    }
    let (best_start, q) = best.expect("at least one start");
    let rec = &records[best_start];
    let objective = rec.objective.max(0.0);
    Ok(OptResult {
        q,
        objective,
        relative_distance: (objective.sqrt() / norm).min(1.0),
        iterations: rec.iterations,
        converged: rec.converged,
        best_start,
        starts: records,
    })
}

/// Minimized relative distances to the structured set and to the odeco set.
/// The structured search is also started from the odeco optimum, which is
/// feasible for it, so the first value never exceeds the second.
#[derive(Debug, Clone)]
pub struct DistanceComparison {
    pub structured: OptResult,
    pub odeco: OptResult,
}

pub fn compare_with_odeco(target: &DenseTensor, symmetric: bool, config: &OptimizerConfig) -> Result<DistanceComparison> {
    let odeco_spec = ObjectiveSpec::odeco(target.clone(), symmetric)?;
    let odeco = minimize(&odeco_spec, config)?;
    let spec = ObjectiveSpec::structured(target.clone(), symmetric)?;
    let structured = minimize_with_starts(&spec, config, std::slice::from_ref(&odeco.q))?;
    Ok(DistanceComparison { structured, odeco })
}

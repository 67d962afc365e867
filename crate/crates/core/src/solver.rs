//! Multistart Riemannian Newton solver for billiard trajectories, with
//! Morse-index classification and count verification against the
//! topological lower bounds.
//!
//! Each start is seeded deterministically from `(seed, start index)`:
//! even-indexed starts perturb a planar equal-arc chain (cycling through
//! the `n + 1` winding branches), odd-indexed starts are fully random.
//! Newton iterates in tangent frames with damped steps and a radial
//! retraction back to the surface; converged configurations are
//! deduplicated up to a coordinate tolerance and sorted by functional
//! value. Runs are reproducible: the same inputs and seed yield the same
//! report regardless of thread count.

use crate::configspace::{ConfigError, Configuration, FD_STEP};
use crate::geometry::{GeometryError, SurfacePoint, SurfaceSpec};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

/// Tuning knobs for [`find_critical_points`] and [`newton_refine`].
#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Number of seeded starts.
    pub starts: usize,
    /// Base RNG seed; start `i` uses stream `i + 1` of this seed.
    pub seed: u64,
    /// Convergence threshold on the reflection residual.
    pub newton_tol: f64,
    /// Iteration cap per start.
    pub max_iters: usize,
    /// Trajectories whose points differ by at most this (max over
    /// coordinates) are considered the same critical point.
    pub dedup_tol: f64,
    /// Hessian eigenvalues at most this in magnitude flag degeneracy.
    pub degenerate_eig_tol: f64,
    /// Use the finite-difference Hessian instead of the analytic one.
    pub hessian_fd: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            starts: 300,
            seed: 0,
            newton_tol: 1e-12,
            max_iters: 100,
            dedup_tol: 1e-6,
            degenerate_eig_tol: 1e-8,
            hessian_fd: false,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.starts == 0 {
            return Err(SolveError::InvalidOptions("starts must be positive".into()));
        }
        if !(self.newton_tol > 0.0 && self.newton_tol.is_finite()) {
            return Err(SolveError::InvalidOptions(
                "newton_tol must be positive and finite".into(),
            ));
        }
        if self.max_iters == 0 {
            return Err(SolveError::InvalidOptions(
                "max_iters must be positive".into(),
            ));
        }
        if !(self.dedup_tol > 0.0 && self.dedup_tol.is_finite()) {
            return Err(SolveError::InvalidOptions(
                "dedup_tol must be positive and finite".into(),
            ));
        }
        if !(self.degenerate_eig_tol >= 0.0 && self.degenerate_eig_tol.is_finite()) {
            return Err(SolveError::InvalidOptions(
                "degenerate_eig_tol must be nonnegative and finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Why a single Newton start failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailReason {
    /// Consecutive points fell within the configuration validity
    /// tolerance.
    Collision,
    /// No damped step decreased the residual (or iterates left the
    /// representable domain).
    Diverged,
    /// The Hessian solve produced no usable step.
    SingularHessian,
    /// The iteration cap was reached before convergence.
    MaxIterations,
}

impl std::fmt::Display for FailReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            FailReason::Collision => "collision",
            FailReason::Diverged => "diverged",
            FailReason::SingularHessian => "singular_hessian",
            FailReason::MaxIterations => "max_iterations",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("start failed ({reason}) after {iterations} iterations")]
pub struct RefineFailure {
    pub reason: FailReason,
    pub iterations: usize,
}

/// Hessian spectrum summary at a configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MorseData {
    /// Number of negative eigenvalues.
    pub index: usize,
    /// Whether some eigenvalue is within the degeneracy tolerance of zero.
    pub degenerate: bool,
    /// Smallest absolute eigenvalue.
    pub min_abs_eig: f64,
}

/// A converged critical configuration with its classification.
#[derive(Clone, Debug)]
pub struct CriticalTrajectory {
    pub config: Configuration,
    /// Value of the length functional (negated total chord length).
    pub value: f64,
    /// Reflection residual at convergence.
    pub residual: f64,
    pub morse_index: usize,
    pub degenerate: bool,
    pub min_abs_eig: f64,
    pub epsilon_product: f64,
}

/// Result of a multistart run.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    /// Deduplicated critical trajectories, sorted by value.
    pub trajectories: Vec<CriticalTrajectory>,
    pub attempted: usize,
    pub converged: usize,
    /// Failed starts tallied by reason.
    pub failures: BTreeMap<String, usize>,
    /// Set when no start converged.
    pub warning: Option<String>,
}

impl SolveOutcome {
    /// All found critical points nondegenerate.
    pub fn generic(&self) -> bool {
        self.trajectories.iter().all(|t| !t.degenerate)
    }
}

/// Critical-point count verdict against the topological bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountVerdict {
    pub count: usize,
    pub bound: usize,
    pub generic: bool,
    pub holds: bool,
}

/// Topological lower bound on the number of billiard trajectories with
/// `n` reflections on an `m`-dimensional sphere-like surface: `n + 1` for
/// odd `m` or in the generic (nondegenerate) case, `floor((n+1)/2) + 1`
/// otherwise.
pub fn lower_bound(m: usize, n: usize, generic: bool) -> usize {
    if generic || m % 2 == 1 {
        n + 1
    } else {
        (n + 1) / 2 + 1
    }
}

/// Eigenvalue classification of the Hessian at `config`.
pub fn morse_data(config: &Configuration, opts: &SolveOptions) -> Result<MorseData, GeometryError> {
    let frames = config.tangent_frames()?;
    let h = if opts.hessian_fd {
        config.riemannian_hessian_fd(&frames, FD_STEP)?
    } else {
        config.riemannian_hessian(&frames)?
    };
    let sym = (&h + h.transpose()) * 0.5;
    let eigenvalues = sym.symmetric_eigenvalues();
    let index = eigenvalues
        .iter()
        .filter(|&&e| e < -opts.degenerate_eig_tol)
        .count();
    let min_abs_eig = eigenvalues
        .iter()
        .fold(f64::INFINITY, |acc, e| acc.min(e.abs()));
    Ok(MorseData {
        index,
        degenerate: min_abs_eig <= opts.degenerate_eig_tol,
        min_abs_eig,
    })
}

fn classify(
    config: Configuration,
    residual: f64,
    opts: &SolveOptions,
) -> Result<CriticalTrajectory, RefineFailure> {
    let value = config.length_functional();
    let epsilon_product = config.epsilon_product();
    let morse = morse_data(&config, opts).map_err(|_| RefineFailure {
        reason: FailReason::Diverged,
        iterations: 0,
    })?;
    Ok(CriticalTrajectory {
        config,
        value,
        residual,
        morse_index: morse.index,
        degenerate: morse.degenerate,
        min_abs_eig: morse.min_abs_eig,
        epsilon_product,
    })
}

/// Applies the frame-coordinate step `lambda * delta` and retracts.
fn apply_step(
    config: &Configuration,
    frames: &[Vec<DVector<f64>>],
    delta: &DVector<f64>,
    lambda: f64,
) -> Option<Configuration> {
    let m = config.surface().m;
    let mut moved = Vec::with_capacity(config.n());
    for (i, point) in config.points().iter().enumerate() {
        let mut p = point.coords().clone();
        for (a, e) in frames[i].iter().enumerate() {
            p += e * (lambda * delta[i * m + a]);
        }
        moved.push(config.surface().retract(&p).ok()?);
    }
    Configuration::new(
        config.surface().clone(),
        config.a().clone(),
        config.b().clone(),
        moved,
    )
    .ok()
}

/// Damped Newton iteration from `config` until the reflection residual
/// drops below `opts.newton_tol`.
pub fn newton_refine(
    config: &Configuration,
    opts: &SolveOptions,
) -> Result<CriticalTrajectory, RefineFailure> {
    let fail = |reason: FailReason, iterations: usize| RefineFailure { reason, iterations };

    if !config.is_well_separated() {
        return Err(fail(FailReason::Collision, 0));
    }
    let mut current = config.clone();
    let mut residual = current
        .reflection_residual()
        .map_err(|_| fail(FailReason::Diverged, 0))?;
    let mut iterations = 0;

    loop {
        if residual <= opts.newton_tol {
            return classify(current, residual, opts);
        }
        if iterations >= opts.max_iters {
            return Err(fail(FailReason::MaxIterations, iterations));
        }

        let frames = current
            .tangent_frames()
            .map_err(|_| fail(FailReason::Diverged, iterations))?;
        let gradient = current
            .frame_gradient(&frames)
            .map_err(|_| fail(FailReason::Diverged, iterations))?;
        let hessian = if opts.hessian_fd {
            current.riemannian_hessian_fd(&frames, FD_STEP)
        } else {
            current.riemannian_hessian(&frames)
        }
        .map_err(|_| fail(FailReason::Diverged, iterations))?;

        let delta = hessian
            .lu()
            .solve(&(-&gradient))
            .filter(|d| d.iter().all(|v| v.is_finite()))
            .ok_or_else(|| fail(FailReason::SingularHessian, iterations))?;

        // Damping: halve until the residual decreases.
        let mut accepted = None;
        let mut lambda = 1.0;
        for _ in 0..=30 {
            if let Some(candidate) = apply_step(&current, &frames, &delta, lambda) {
                if let Ok(cand_residual) = candidate.reflection_residual() {
                    if cand_residual.is_finite() && cand_residual < residual {
                        accepted = Some((candidate, cand_residual));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        let Some((next, next_residual)) = accepted else {
            return Err(fail(FailReason::Diverged, iterations));
        };
        if !next.is_well_separated() {
            return Err(fail(FailReason::Collision, iterations));
        }
        current = next;
        residual = next_residual;
        iterations += 1;
    }
}

fn gaussian(dim: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Planar equal-arc seed on winding branch `k`, with a random tilt of the
/// chain plane. With zero tilt on the round sphere this is exactly the
/// closed-form trajectory.
fn planar_seed(
    surface: &SurfaceSpec,
    a: &SurfacePoint,
    b: &SurfacePoint,
    n: usize,
    branch: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Configuration> {
    let a_dir = a.coords().normalize();
    let b_dir = b.coords().normalize();
    let k = branch % (n + 1);

    let mut w = &b_dir - &a_dir * b_dir.dot(&a_dir);
    if w.norm() < 1e-8 {
        // Endpoint directions (anti)parallel: pick any transverse plane.
        let g = gaussian(surface.ambient_dim(), rng);
        w = &g - &a_dir * g.dot(&a_dir);
        if w.norm() < 1e-8 {
            return None;
        }
    }
    let mut e2 = w.normalize();
    let noise = gaussian(surface.ambient_dim(), rng);
    let tangent_noise = &noise - &a_dir * noise.dot(&a_dir);
    if tangent_noise.norm() > 1e-12 {
        let eta = 0.3 * rng.random::<f64>();
        let tilted = &e2 + tangent_noise.normalize() * eta;
        let re_orthogonalized = &tilted - &a_dir * tilted.dot(&a_dir);
        if re_orthogonalized.norm() > 1e-8 {
            e2 = re_orthogonalized.normalize();
        }
    }

    let mut phi = b_dir.dot(&e2).atan2(b_dir.dot(&a_dir));
    if phi <= 1e-6 {
        phi += 2.0 * PI;
    }
    let alpha = (phi + 2.0 * PI * k as f64) / (n as f64 + 1.0);
    let mut points = Vec::with_capacity(n);
    for j in 1..=n {
        let t = alpha * j as f64;
        let dir = &a_dir * t.cos() + &e2 * t.sin();
        points.push(surface.retract(&dir).ok()?);
    }
    Configuration::new(surface.clone(), a.clone(), b.clone(), points).ok()
}

/// Uniformly random seed with a minimum-gap rejection loop.
fn random_seed(
    surface: &SurfaceSpec,
    a: &SurfacePoint,
    b: &SurfacePoint,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Configuration> {
    let min_axis = surface.axes.iter().cloned().fold(f64::INFINITY, f64::min);
    let gap = 0.05 * min_axis;
    let mut points: Vec<SurfacePoint> = Vec::with_capacity(n);
    for i in 0..n {
        let mut accepted = None;
        for _ in 0..100 {
            let v = gaussian(surface.ambient_dim(), rng);
            if v.norm() < 1e-6 {
                continue;
            }
            let Ok(p) = surface.retract(&v) else { continue };
            let prev = if i == 0 {
                a.coords()
            } else {
                points[i - 1].coords()
            };
            let clear_of_prev = (p.coords() - prev).norm() > gap;
            let clear_of_b = i + 1 < n || (p.coords() - b.coords()).norm() > gap;
            if clear_of_prev && clear_of_b {
                accepted = Some(p);
                break;
            }
        }
        points.push(accepted?);
    }
    Configuration::new(surface.clone(), a.clone(), b.clone(), points).ok()
}

fn seed_configuration(
    surface: &SurfaceSpec,
    a: &SurfacePoint,
    b: &SurfacePoint,
    n: usize,
    start: usize,
    opts: &SolveOptions,
) -> Option<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(start as u64 + 1);
    if start % 2 == 0 {
        if let Some(config) = planar_seed(surface, a, b, n, start / 2, &mut rng) {
            return Some(config);
        }
    }
    random_seed(surface, a, b, n, &mut rng)
}

/// Total order on trajectories: by value, then lexicographically by
/// point coordinates. Used for deterministic sorting and representatives.
fn trajectory_order(x: &CriticalTrajectory, y: &CriticalTrajectory) -> Ordering {
    x.value.total_cmp(&y.value).then_with(|| {
        let xs = x.config.points();
        let ys = y.config.points();
        for (p, q) in xs.iter().zip(ys) {
            for (pa, qa) in p.coords().iter().zip(q.coords().iter()) {
                let ord = pa.total_cmp(qa);
                if ord != Ordering::Equal {
                    return ord;
                }
            }
        }
        Ordering::Equal
    })
}

/// Max-coordinate distance between the reflection points of two
/// trajectories of the same shape.
fn trajectory_distance(x: &CriticalTrajectory, y: &CriticalTrajectory) -> f64 {
    let mut dist: f64 = 0.0;
    for (p, q) in x.config.points().iter().zip(y.config.points()) {
        for (pa, qa) in p.coords().iter().zip(q.coords().iter()) {
            dist = dist.max((pa - qa).abs());
        }
    }
    dist
}

/// Collapses trajectories within `tol` of each other (transitively) to a
/// canonical representative each; the result is sorted by value and is
/// independent of input order.
pub fn deduplicate(trajectories: Vec<CriticalTrajectory>, tol: f64) -> Vec<CriticalTrajectory> {
    let n = trajectories.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if trajectory_distance(&trajectories[i], &trajectories[j]) <= tol {
                let ri = find(&mut parent, i);
                let rj = find(&mut parent, j);
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut representative: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        let entry = representative.entry(root).or_insert(i);
        if trajectory_order(&trajectories[i], &trajectories[*entry]) == Ordering::Less {
            *entry = i;
        }
    }
    let mut kept: Vec<CriticalTrajectory> = representative
        .into_values()
        .map(|i| trajectories[i].clone())
        .collect();
    kept.sort_by(trajectory_order);
    kept
}

/// Runs `opts.starts` seeded Newton starts in parallel and collects the
/// deduplicated critical trajectories.
pub fn find_critical_points(
    surface: &SurfaceSpec,
    a: &SurfacePoint,
    b: &SurfacePoint,
    n: usize,
    opts: &SolveOptions,
) -> Result<SolveOutcome, SolveError> {
    opts.validate()?;
    surface.validate()?;
    surface.check_point(a)?;
    surface.check_point(b)?;
    if n == 0 {
        return Err(SolveError::Config(ConfigError::NoReflections));
    }
    if (a.coords() - b.coords()).norm() == 0.0 {
        return Err(SolveError::Config(ConfigError::EndpointsCoincide));
    }

    let results: Vec<Result<CriticalTrajectory, String>> = (0..opts.starts)
        .into_par_iter()
        .map(
            |start| match seed_configuration(surface, a, b, n, start, opts) {
                None => Err("seed_exhausted".to_owned()),
                Some(config) => newton_refine(&config, opts).map_err(|e| e.reason.to_string()),
            },
        )
        .collect();

    let mut converged = Vec::new();
    let mut failures: BTreeMap<String, usize> = BTreeMap::new();
    for result in results {
        match result {
            Ok(trajectory) => converged.push(trajectory),
            Err(reason) => *failures.entry(reason).or_insert(0) += 1,
        }
    }
    let converged_count = converged.len();
    let trajectories = deduplicate(converged, opts.dedup_tol);
    let warning = (converged_count == 0).then(|| "no start converged; try more starts".to_owned());
    Ok(SolveOutcome {
        trajectories,
        attempted: opts.starts,
        converged: converged_count,
        failures,
        warning,
    })
}

/// Checks the found count against [`lower_bound`].
pub fn verify_count(outcome: &SolveOutcome, m: usize, n: usize) -> CountVerdict {
    let generic = outcome.generic();
    let bound = lower_bound(m, n, generic);
    let count = outcome.trajectories.len();
    CountVerdict {
        count,
        bound,
        generic,
        holds: count >= bound,
    }
}

/// One trajectory as it appears in the report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub points: Vec<Vec<f64>>,
    pub value: f64,
    pub residual: f64,
    pub morse_index: usize,
    pub degenerate: bool,
    pub epsilon_product: f64,
}

/// Serializable summary of a solve run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub surface: SurfaceSpec,
    pub n: usize,
    pub count: usize,
    pub bound: usize,
    pub generic: bool,
    pub trajectories: Vec<TrajectoryRecord>,
}

/// Builds the report for a finished run.
pub fn solve_report(surface: &SurfaceSpec, n: usize, outcome: &SolveOutcome) -> SolveReport {
    let verdict = verify_count(outcome, surface.m, n);
    SolveReport {
        surface: surface.clone(),
        n,
        count: verdict.count,
        bound: verdict.bound,
        generic: verdict.generic,
        trajectories: outcome
            .trajectories
            .iter()
            .map(|t| TrajectoryRecord {
                points: t.config.points().iter().map(|p| p.to_vec()).collect(),
                value: t.value,
                residual: t.residual,
                morse_index: t.morse_index,
                degenerate: t.degenerate,
                epsilon_product: t.epsilon_product,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::sphere_trajectories;
    use approx::assert_relative_eq;

    fn sphere_endpoints(phi: f64) -> (SurfaceSpec, SurfacePoint, SurfacePoint) {
        let surface = SurfaceSpec::sphere(2).unwrap();
        let a = surface.point_from_coords(&[1.0, 0.0, 0.0]).unwrap();
        let b = surface
            .point_from_coords(&[phi.cos(), phi.sin(), 0.0])
            .unwrap();
        (surface, a, b)
    }

    fn quick_opts(starts: usize) -> SolveOptions {
        SolveOptions {
            starts,
            ..SolveOptions::default()
        }
    }

    #[test]
    fn lower_bound_table() {
        assert_eq!(lower_bound(3, 5, false), 6);
        assert_eq!(lower_bound(2, 5, false), 4);
        assert_eq!(lower_bound(2, 5, true), 6);
        assert_eq!(lower_bound(4, 6, false), 4);
        assert_eq!(lower_bound(5, 1, false), 2);
    }

    #[test]
    fn refine_accepts_oracle_start_unchanged() {
        let (_, a, b) = sphere_endpoints(PI / 2.0);
        let opts = SolveOptions::default();
        for trajectory in sphere_trajectories(a.coords(), b.coords(), 3).unwrap() {
            let config = trajectory.configuration(a.coords(), b.coords()).unwrap();
            let before: Vec<Vec<f64>> = config.points().iter().map(SurfacePoint::to_vec).collect();
            let refined = newton_refine(&config, &opts).unwrap();
            assert!(refined.residual <= opts.newton_tol);
            for (p, q) in refined.config.points().iter().zip(&before) {
                for (pa, qa) in p.to_vec().iter().zip(q) {
                    assert!((pa - qa).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn refine_converges_from_perturbed_start() {
        let (surface, a, b) = sphere_endpoints(2.0);
        let opts = SolveOptions::default();
        let trajectory = &sphere_trajectories(a.coords(), b.coords(), 2).unwrap()[1];
        let exact = trajectory.configuration(a.coords(), b.coords()).unwrap();
        // Nudge every reflection point off the great circle.
        let moved: Vec<SurfacePoint> = exact
            .points()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut v = p.coords().clone();
                v[2] += 0.05 * (i as f64 + 1.0);
                surface.retract(&v).unwrap()
            })
            .collect();
        let start = Configuration::new(surface.clone(), a.clone(), b.clone(), moved).unwrap();
        let refined = newton_refine(&start, &opts).unwrap();
        assert!(refined.residual <= opts.newton_tol);
        assert_relative_eq!(
            refined.value,
            -trajectory.total_length(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn refine_reports_collision_on_merged_start() {
        let surface = SurfaceSpec::sphere(2).unwrap();
        let a = surface.point_from_coords(&[0.0, 0.0, 1.0]).unwrap();
        let b = surface.point_from_coords(&[0.0, 1.0, 0.0]).unwrap();
        let x1 = surface.point_from_coords(&[1.0, 0.0, 0.0]).unwrap();
        let close = surface
            .retract(&DVector::from_vec(vec![1.0, 1e-10, 0.0]))
            .unwrap();
        let config = Configuration::new(surface, a, b, vec![x1, close]).unwrap();
        let err = newton_refine(&config, &SolveOptions::default()).unwrap_err();
        assert_eq!(err.reason, FailReason::Collision);
        assert_eq!(err.iterations, 0);
    }

    #[test]
    fn finds_both_trajectories_for_one_reflection() {
        let (surface, a, b) = sphere_endpoints(PI / 2.0);
        let outcome = find_critical_points(&surface, &a, &b, 1, &quick_opts(40)).unwrap();
        assert_eq!(outcome.trajectories.len(), 2);
        // Sorted by value: the long branch (k = 1) is the minimum.
        let long = &outcome.trajectories[0];
        let short = &outcome.trajectories[1];
        assert_relative_eq!(
            long.value,
            -4.0 * (5.0 * PI / 8.0).sin(),
            max_relative = 1e-10
        );
        assert_relative_eq!(short.value, -4.0 * (PI / 8.0).sin(), max_relative = 1e-10);
        assert_eq!(long.morse_index, 0);
        assert_eq!(short.morse_index, 1);
        assert!(!long.degenerate && !short.degenerate);
        let verdict = verify_count(&outcome, 2, 1);
        assert!(verdict.holds && verdict.generic);
        assert_eq!(verdict.bound, 2);
    }

    #[test]
    fn ellipsoid_meets_generic_bound() {
        let surface = SurfaceSpec::ellipsoid(vec![1.0, 1.15, 0.9]).unwrap();
        let a = surface
            .retract(&DVector::from_vec(vec![0.9, 0.2, -0.3]))
            .unwrap();
        let b = surface
            .retract(&DVector::from_vec(vec![-0.4, 0.8, 0.5]))
            .unwrap();
        let outcome = find_critical_points(&surface, &a, &b, 1, &quick_opts(60)).unwrap();
        let verdict = verify_count(&outcome, 2, 1);
        assert!(verdict.generic, "degenerate point on ellipsoid run");
        assert!(
            verdict.holds,
            "found {} trajectories, need {}",
            verdict.count, verdict.bound
        );
        for t in &outcome.trajectories {
            assert!(t.residual <= 1e-12);
            assert!(t.epsilon_product > 0.0);
        }
    }

    #[test]
    fn dedup_collapses_nearby_trajectories() {
        let (_, a, b) = sphere_endpoints(PI / 3.0);
        let opts = SolveOptions::default();
        let trajectory = &sphere_trajectories(a.coords(), b.coords(), 1).unwrap()[0];
        let config = trajectory.configuration(a.coords(), b.coords()).unwrap();
        let refined = newton_refine(&config, &opts).unwrap();
        let mut clone = refined.clone();
        // A perturbation below tolerance must merge; the canonical
        // representative is order-independent.
        clone.value += 1e-9;
        let one = deduplicate(vec![refined.clone(), clone.clone()], opts.dedup_tol);
        assert_eq!(one.len(), 1);
        let other = deduplicate(vec![clone, refined], opts.dedup_tol);
        assert_eq!(other.len(), 1);
        assert_eq!(one[0].value, other[0].value);
        // Idempotence.
        let again = deduplicate(one.clone(), opts.dedup_tol);
        assert_eq!(again.len(), 1);
    }

    #[test]
    fn solve_is_deterministic() {
        let (surface, a, b) = sphere_endpoints(1.0);
        let opts = quick_opts(30);
        let run = || {
            let outcome = find_critical_points(&surface, &a, &b, 2, &opts).unwrap();
            serde_json::to_string(&solve_report(&surface, 2, &outcome)).unwrap()
        };
        assert_eq!(run(), run());
        // A different seed still finds the same critical set (values match
        // to solver tolerance) even though the path to it differs.
        let reseeded = find_critical_points(
            &surface,
            &a,
            &b,
            2,
            &SolveOptions {
                seed: 12345,
                ..quick_opts(30)
            },
        )
        .unwrap();
        let baseline = find_critical_points(&surface, &a, &b, 2, &opts).unwrap();
        assert_eq!(reseeded.trajectories.len(), baseline.trajectories.len());
        for (x, y) in reseeded.trajectories.iter().zip(&baseline.trajectories) {
            assert_relative_eq!(x.value, y.value, max_relative = 1e-9);
        }
    }

    #[test]
    fn report_shape() {
        let (surface, a, b) = sphere_endpoints(PI / 2.0);
        let outcome = find_critical_points(&surface, &a, &b, 1, &quick_opts(20)).unwrap();
        let report = solve_report(&surface, 1, &outcome);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.starts_with("{\"surface\":{\"kind\":\"sphere\""));
        for key in [
            "\"n\":",
            "\"count\":",
            "\"bound\":",
            "\"generic\":",
            "\"trajectories\":",
            "\"points\":",
            "\"value\":",
            "\"residual\":",
            "\"morse_index\":",
            "\"degenerate\":",
            "\"epsilon_product\":",
        ] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
    }

    #[test]
    fn invalid_options_are_rejected() {
        let (surface, a, b) = sphere_endpoints(1.0);
        for bad in [
            SolveOptions {
                starts: 0,
                ..SolveOptions::default()
            },
            SolveOptions {
                newton_tol: -1.0,
                ..SolveOptions::default()
            },
            SolveOptions {
                max_iters: 0,
                ..SolveOptions::default()
            },
            SolveOptions {
                dedup_tol: 0.0,
                ..SolveOptions::default()
            },
        ] {
            assert!(matches!(
                find_critical_points(&surface, &a, &b, 1, &bad),
                Err(SolveError::InvalidOptions(_))
            ));
        }
        assert!(matches!(
            find_critical_points(&surface, &a, &b, 0, &SolveOptions::default()),
            Err(SolveError::Config(ConfigError::NoReflections))
        ));
    }
}

//! Closed-form reference answers used to validate the numerical solver.
//!
//! On a round sphere every billiard trajectory between two non-antipodal
//! points lies on the great circle through them and divides its arc into
//! equal steps: with endpoint angle `phi` in `(0, pi)` there are exactly
//! `n + 1` trajectories, one per winding branch `k = 0..n`, with step
//! angle `alpha_k = (phi + 2 pi k) / (n + 1)`.
//!
//! On the circle the analogous count is about components of the
//! configuration domain rather than critical points: the domain splits
//! into `n + 1` contractible pieces. A brute-force grid count over the
//! angular coordinates cross-checks the closed form.

use crate::configspace::{ConfigError, Configuration};
use crate::geometry::SurfaceSpec;
use nalgebra::DVector;
use std::f64::consts::PI;
use thiserror::Error;

/// Angular tolerance: endpoint pairs closer than this to equal or
/// antipodal are rejected.
pub const ANGLE_TOL: f64 = 1e-9;

/// Tolerance on `| |p| - 1 |` for endpoints handed to the sphere oracle.
pub const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("endpoints must share a dimension of at least 2, got {a} and {b}")]
    BadDimensions { a: usize, b: usize },
    #[error("endpoint is not on the unit sphere: |p| = {norm}")]
    NotOnSphere { norm: f64 },
    #[error("endpoints coincide")]
    EqualEndpoints,
    #[error("endpoints are antipodal; the great circle through them is not unique")]
    AntipodalEndpoints,
    #[error("reflection count must be at least 1")]
    NoReflections,
}

/// One closed-form sphere trajectory: branch index, step angle, and the
/// reflection points.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereTrajectory {
    /// Winding branch, `0..=n`.
    pub k: usize,
    /// Step angle `(phi + 2 pi k) / (n + 1)`.
    pub alpha: f64,
    /// The `n` reflection points on the great circle through `A` and `B`.
    pub points: Vec<DVector<f64>>,
}

impl SphereTrajectory {
    /// Total chord length `(n + 1) * 2 sin(alpha / 2)`; the functional
    /// value of the trajectory is its negation.
    pub fn total_length(&self) -> f64 {
        (self.points.len() as f64 + 1.0) * 2.0 * (self.alpha / 2.0).sin()
    }

    /// Packages the trajectory as a configuration on the unit sphere.
    pub fn configuration(
        &self,
        a: &DVector<f64>,
        b: &DVector<f64>,
    ) -> Result<Configuration, ConfigError> {
        let surface = SurfaceSpec::sphere(a.len() - 1).map_err(ConfigError::Geometry)?;
        let points = self
            .points
            .iter()
            .map(|p| surface.retract(p))
            .collect::<Result<Vec<_>, _>>()
            .map_err(ConfigError::Geometry)?;
        let a = surface.retract(a).map_err(ConfigError::Geometry)?;
        let b = surface.retract(b).map_err(ConfigError::Geometry)?;
        Configuration::new(surface, a, b, points)
    }
}

/// All `n + 1` billiard trajectories with `n` reflections from `a` to `b`
/// on the unit sphere, ordered by branch index `k`.
pub fn sphere_trajectories(
    a: &DVector<f64>,
    b: &DVector<f64>,
    n: usize,
) -> Result<Vec<SphereTrajectory>, OracleError> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(OracleError::BadDimensions {
            a: a.len(),
            b: b.len(),
        });
    }
    if n == 0 {
        return Err(OracleError::NoReflections);
    }
    for p in [a, b] {
        let norm = p.norm();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(OracleError::NotOnSphere { norm });
        }
    }

    // Orthonormal frame of the great circle: e1 = a, e2 toward b.
    let cos_phi = a.dot(b);
    let w = b - a * cos_phi;
    let sin_phi = w.norm();
    let phi = sin_phi.atan2(cos_phi);
    if phi <= ANGLE_TOL {
        return Err(OracleError::EqualEndpoints);
    }
    if PI - phi <= ANGLE_TOL {
        return Err(OracleError::AntipodalEndpoints);
    }
    let e2 = w / sin_phi;

    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let alpha = (phi + 2.0 * PI * k as f64) / (n as f64 + 1.0);
        let points = (1..=n)
            .map(|j| {
                let t = alpha * j as f64;
                a * t.cos() + &e2 * t.sin()
            })
            .collect();
        out.push(SphereTrajectory { k, alpha, points });
    }
    Ok(out)
}

/// Number of connected components of the circle's configuration domain
/// with `n` reflections: the angular coordinates live in an open cube cut
/// by `n` parallel hyperplanes, leaving `n + 1` contractible pieces.
pub fn circle_component_count(n: usize) -> Result<usize, OracleError> {
    if n == 0 {
        return Err(OracleError::NoReflections);
    }
    Ok(n + 1)
}

/// Brute-force check of [`circle_component_count`]: counts connected
/// components of the grid graph on cube cells, joining neighbors whose
/// center segment crosses none of the cutting hyperplanes
/// `t_1 + ... + t_n = psi + k`, `k = 0..n-1`. `psi` in `(0, 1)` is the
/// normalized endpoint angle; `grid` is the number of cells per axis.
pub fn circle_component_count_bruteforce(
    n: usize,
    psi: f64,
    grid: usize,
) -> Result<usize, OracleError> {
    if n == 0 {
        return Err(OracleError::NoReflections);
    }
    assert!(psi > 0.0 && psi < 1.0, "psi must lie in (0, 1)");
    assert!(grid >= 2, "grid too coarse");

    let cells = grid.pow(n as u32);
    // Distance of a cell-center coordinate sum from the nearest wall.
    let wall_gap = |sum: f64| -> f64 {
        (0..n)
            .map(|k| (sum - psi - k as f64).abs())
            .fold(f64::INFINITY, f64::min)
    };
    let center_sum = |cell: usize| -> f64 {
        let mut rest = cell;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += (rest % grid) as f64 + 0.5;
            rest /= grid;
        }
        sum / grid as f64
    };

    // Skip cells whose center sits on (or numerically at) a wall.
    let margin = 1e-7;
    let alive: Vec<bool> = (0..cells)
        .map(|c| wall_gap(center_sum(c)) > margin)
        .collect();

    let mut parent: Vec<usize> = (0..cells).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    let crosses_wall = |sum_a: f64, sum_b: f64| -> bool {
        (0..n).any(|k| {
            let wall = psi + k as f64;
            (sum_a - wall) * (sum_b - wall) < 0.0
        })
    };

    for cell in 0..cells {
        if !alive[cell] {
            continue;
        }
        let sum_a = center_sum(cell);
        // Neighbor with +1 along each axis.
        let mut stride = 1;
        let mut rest = cell;
        for _ in 0..n {
            let coord = rest % grid;
            if coord + 1 < grid {
                let neighbor = cell + stride;
                if alive[neighbor] {
                    let sum_b = center_sum(neighbor);
                    if !crosses_wall(sum_a, sum_b) {
                        let ra = find(&mut parent, cell);
                        let rb = find(&mut parent, neighbor);
                        if ra != rb {
                            parent[ra] = rb;
                        }
                    }
                }
            }
            stride *= grid;
            rest /= grid;
        }
    }

    let mut roots = std::collections::BTreeSet::new();
    for (cell, &kept) in alive.iter().enumerate() {
        if kept {
            roots.insert(find(&mut parent, cell));
        }
    }
    Ok(roots.len())
}

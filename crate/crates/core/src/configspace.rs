//! Configurations of reflection points between two fixed endpoints on a
//! convex surface, and the length functional whose critical points are
//! billiard trajectories.
//!
//! A configuration is a chain `A, x_1, ..., x_n, B` with all points on the
//! surface and consecutive points distinct. The functional is the negated
//! total chord length `L = -sum |x_i - x_{i+1}|`; a configuration is
//! critical exactly when, at every reflection point, the sum of the unit
//! vectors toward its two neighbors is normal to the surface (the
//! reflection law).
//!
//! Derivatives are taken along the radial retraction: gradients are
//! tangential projections, and the Hessian is the second derivative of
//! `t -> L(retract(x + t e))` in deterministic orthonormal tangent frames.

use crate::geometry::{GeometryError, SurfacePoint, SurfaceSpec};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Separations at or below this are numerically unreliable: derivative
/// formulas divide by chord lengths. The solver treats crossing this
/// threshold as a failed start.
pub const VALIDITY_TOL: f64 = 1e-9;

/// Step used by the finite-difference Hessian fallback.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("a configuration needs at least one reflection point")]
    NoReflections,
    #[error("endpoints coincide")]
    EndpointsCoincide,
    #[error("consecutive chain points {index} and {} coincide", index + 1)]
    CoincidentPoints { index: usize },
}

/// A chain `A, x_1, ..., x_n, B` on one surface.
///
/// Invariants: every point satisfies the surface equation within the
/// geometry tolerance, `A != B`, and consecutive chain points are
/// distinct. Distinctness here is exact; see [`VALIDITY_TOL`] for the
/// numerical threshold the solver enforces on top.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    surface: SurfaceSpec,
    a: SurfacePoint,
    b: SurfacePoint,
    points: Vec<SurfacePoint>,
}

/// Serialization shape: `{"A": [...], "B": [...], "points": [[...], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConfigurationDto {
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl Configuration {
    pub fn new(
        surface: SurfaceSpec,
        a: SurfacePoint,
        b: SurfacePoint,
        points: Vec<SurfacePoint>,
    ) -> Result<Self, ConfigError> {
        surface.validate()?;
        if points.is_empty() {
            return Err(ConfigError::NoReflections);
        }
        surface.check_point(&a)?;
        surface.check_point(&b)?;
        for p in &points {
            surface.check_point(p)?;
        }
        if (a.coords() - b.coords()).norm() == 0.0 {
            return Err(ConfigError::EndpointsCoincide);
        }
        let config = Configuration {
            surface,
            a,
            b,
            points,
        };
        for i in 0..=config.n() {
            if config.segment_length(i) == 0.0 {
                return Err(ConfigError::CoincidentPoints { index: i });
            }
        }
        Ok(config)
    }

    /// Builds a configuration from raw coordinate lists, checking surface
    /// membership.
    pub fn from_dto(surface: SurfaceSpec, dto: &ConfigurationDto) -> Result<Self, ConfigError> {
        let a = surface.point_from_coords(&dto.a)?;
        let b = surface.point_from_coords(&dto.b)?;
        let points = dto
            .points
            .iter()
            .map(|p| surface.point_from_coords(p))
            .collect::<Result<Vec<_>, _>>()?;
        Configuration::new(surface, a, b, points)
    }

    pub fn to_dto(&self) -> ConfigurationDto {
        ConfigurationDto {
            a: self.a.to_vec(),
            b: self.b.to_vec(),
            points: self.points.iter().map(SurfacePoint::to_vec).collect(),
        }
    }

    pub fn surface(&self) -> &SurfaceSpec {
        &self.surface
    }

    pub fn a(&self) -> &SurfacePoint {
        &self.a
    }

    pub fn b(&self) -> &SurfacePoint {
        &self.b
    }

    pub fn points(&self) -> &[SurfacePoint] {
        &self.points
    }

    /// Number of reflection points.
    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// The full chain `A, x_1, ..., x_n, B` (length `n + 2`).
    pub fn chain(&self) -> Vec<&SurfacePoint> {
        let mut chain = Vec::with_capacity(self.n() + 2);
        chain.push(&self.a);
        chain.extend(self.points.iter());
        chain.push(&self.b);
        chain
    }

    /// `|chain[i] - chain[i + 1]|` for `i = 0..=n`.
    fn segment_length(&self, i: usize) -> f64 {
        let chain = self.chain();
        (chain[i].coords() - chain[i + 1].coords()).norm()
    }

    /// Smallest chord length in the chain.
    pub fn min_separation(&self) -> f64 {
        (0..=self.n())
            .map(|i| self.segment_length(i))
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether all chords clear [`VALIDITY_TOL`].
    pub fn is_well_separated(&self) -> bool {
        self.min_separation() > VALIDITY_TOL
    }

    /// Negated total chord length `-sum_i |x_i - x_{i+1}|`.
    pub fn length_functional(&self) -> f64 {
        -(0..=self.n()).map(|i| self.segment_length(i)).sum::<f64>()
    }

    /// Product of all chord lengths (the quantity bounded below by the
    /// epsilon cutoff that carves out the solver's working domain).
    pub fn epsilon_product(&self) -> f64 {
        (0..=self.n()).map(|i| self.segment_length(i)).product()
    }

    /// Ambient gradients of the functional at each reflection point:
    /// `-(unit(x_i - x_{i-1}) + unit(x_i - x_{i+1}))`.
    fn ambient_gradients(&self) -> Vec<DVector<f64>> {
        let chain = self.chain();
        ambient_gradients_raw(&chain.iter().map(|p| p.coords().clone()).collect::<Vec<_>>())
    }

    /// Riemannian gradient at each reflection point: the tangential part
    /// of the ambient gradient.
    pub fn riemannian_gradient(&self) -> Result<Vec<DVector<f64>>, GeometryError> {
        let ambient = self.ambient_gradients();
        let mut out = Vec::with_capacity(self.n());
        for (i, g) in ambient.into_iter().enumerate() {
            let nu = self.surface.unit_normal(&self.points[i])?;
            out.push(&g - &nu * g.dot(&nu));
        }
        Ok(out)
    }

    /// Largest tangential defect of the reflection law over all reflection
    /// points; zero exactly at critical configurations.
    pub fn reflection_residual(&self) -> Result<f64, GeometryError> {
        Ok(self
            .riemannian_gradient()?
            .iter()
            .map(|g| g.norm())
            .fold(0.0, f64::max))
    }

    /// Deterministic orthonormal tangent frames at the reflection points.
    pub fn tangent_frames(&self) -> Result<Vec<Vec<DVector<f64>>>, GeometryError> {
        self.points
            .iter()
            .map(|p| self.surface.tangent_frame(p))
            .collect()
    }

    /// Riemannian gradient flattened into frame coordinates, entry
    /// `(i - 1) * m + a` for point `i`, frame vector `a`.
    pub fn frame_gradient(
        &self,
        frames: &[Vec<DVector<f64>>],
    ) -> Result<DVector<f64>, GeometryError> {
        let m = self.surface.m;
        let ambient = self.ambient_gradients();
        let mut g = DVector::zeros(self.n() * m);
        for i in 0..self.n() {
            for (a, e) in frames[i].iter().enumerate() {
                // Frame vectors are tangent, so the ambient gradient's
                // normal part drops out in the dot product.
                g[i * m + a] = ambient[i].dot(e);
            }
        }
        Ok(g)
    }

    /// Analytic Hessian of `L` along the retraction, in the given frames.
    ///
    /// Diagonal blocks combine the ambient chord Hessian with the
    /// second-order term of the radial retraction; mixed blocks have no
    /// retraction correction because the retraction is exact to first
    /// order on tangent vectors.
    pub fn riemannian_hessian(
        &self,
        frames: &[Vec<DVector<f64>>],
    ) -> Result<DMatrix<f64>, GeometryError> {
        let m = self.surface.m;
        let n = self.n();
        let chain = self.chain();
        let ambient = self.ambient_gradients();
        let mut h = DMatrix::zeros(n * m, n * m);

        // Projected chord Hessian: u^T (I - e e^T) v / len.
        let chord = |e: &DVector<f64>, len: f64, u: &DVector<f64>, v: &DVector<f64>| {
            (u.dot(v) - e.dot(u) * e.dot(v)) / len
        };

        for i in 1..=n {
            let x = chain[i].coords();
            let prev = chain[i - 1].coords();
            let next = chain[i + 1].coords();
            let d_prev = x - prev;
            let d_next = x - next;
            let (l_prev, l_next) = (d_prev.norm(), d_next.norm());
            let e_prev = d_prev / l_prev;
            let e_next = d_next / l_next;
            let g_dot_x = ambient[i - 1].dot(x);

            for a in 0..m {
                let ea = &frames[i - 1][a];
                for b in a..m {
                    let eb = &frames[i - 1][b];
                    let block = -(chord(&e_prev, l_prev, ea, eb) + chord(&e_next, l_next, ea, eb));
                    let correction = self.surface.quadratic_form(ea, eb) * g_dot_x;
                    let value = block - correction;
                    h[((i - 1) * m + a, (i - 1) * m + b)] = value;
                    h[((i - 1) * m + b, (i - 1) * m + a)] = value;
                }
            }

            if i < n {
                for a in 0..m {
                    let ea = &frames[i - 1][a];
                    for b in 0..m {
                        let eb = &frames[i][b];
                        let value = chord(&e_next, l_next, ea, eb);
                        h[((i - 1) * m + a, i * m + b)] = value;
                        h[(i * m + b, (i - 1) * m + a)] = value;
                    }
                }
            }
        }
        Ok(h)
    }

    /// Gradient of `t -> L(retract(x + sum t e))` at the given frame
    /// offsets: the ambient gradient pulled back through the retraction
    /// differential. At zero offsets this equals [`Self::frame_gradient`].
    pub fn pullback_frame_gradient(
        &self,
        frames: &[Vec<DVector<f64>>],
        offsets: &DVector<f64>,
    ) -> Result<DVector<f64>, GeometryError> {
        let m = self.surface.m;
        let n = self.n();
        assert_eq!(offsets.len(), n * m);
        // Pre-retraction ambient points and the retracted chain.
        let mut pre = Vec::with_capacity(n);
        let mut chain = Vec::with_capacity(n + 2);
        chain.push(self.a.coords().clone());
        for i in 0..n {
            let mut p = self.points[i].coords().clone();
            for (a, e) in frames[i].iter().enumerate() {
                p += e * offsets[i * m + a];
            }
            chain.push(self.surface.retract(&p)?.coords().clone());
            pre.push(p);
        }
        chain.push(self.b.coords().clone());

        let ambient = ambient_gradients_raw(&chain);
        let mut g = DVector::zeros(n * m);
        for i in 0..n {
            for (a, e) in frames[i].iter().enumerate() {
                let de = self.surface.retraction_differential(&pre[i], e);
                g[i * m + a] = ambient[i].dot(&de);
            }
        }
        Ok(g)
    }

    /// Central-difference Hessian along the retraction, symmetrized. Used
    /// both as the analytic Hessian's test oracle and as the runtime
    /// fallback selected by the solver's options.
    pub fn riemannian_hessian_fd(
        &self,
        frames: &[Vec<DVector<f64>>],
        step: f64,
    ) -> Result<DMatrix<f64>, GeometryError> {
        let dim = self.n() * self.surface.m;
        let mut h = DMatrix::zeros(dim, dim);
        let mut offsets = DVector::zeros(dim);
        for col in 0..dim {
            offsets[col] = step;
            let plus = self.pullback_frame_gradient(frames, &offsets)?;
            offsets[col] = -step;
            let minus = self.pullback_frame_gradient(frames, &offsets)?;
            offsets[col] = 0.0;
            h.set_column(col, &((plus - minus) / (2.0 * step)));
        }
        Ok((&h + h.transpose()) * 0.5)
    }
}

/// Ambient gradients of the length functional at the interior points of a
/// raw chain (no surface structure involved).
fn ambient_gradients_raw(chain: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let n = chain.len() - 2;
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let d_prev = &chain[i] - &chain[i - 1];
        let d_next = &chain[i] - &chain[i + 1];
        out.push(-(d_prev.normalize() + d_next.normalize()));
    }
    out
}

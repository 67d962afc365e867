//! Strictly convex quadric hypersurfaces (spheres and axis-aligned
//! ellipsoids) embedded in Euclidean space, with the retraction and
//! tangent-space machinery the solver needs.
//!
//! A surface of intrinsic dimension `m` lives in `R^{m+1}` and is cut out
//! by `sum_k (x_k / a_k)^2 = 1`. Points are retracted onto it radially:
//! `p -> p / sqrt(sum_k (p_k / a_k)^2)`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum residual accepted when adopting externally supplied coordinates
/// as a surface point. Retraction itself lands well below this.
pub const ON_SURFACE_TOL: f64 = 1e-10;

/// Threshold under which a candidate tangent-frame vector is treated as
/// linearly dependent and skipped.
const FRAME_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("ambient dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("surface dimension must be at least 1, got {0}")]
    DimensionTooSmall(usize),
    #[error("axes must be finite and positive: {0:?}")]
    InvalidAxes(Vec<f64>),
    #[error("sphere axes must all be 1, got {0:?}")]
    NonUnitSphereAxes(Vec<f64>),
    #[error("point is off the surface: residual {residual:e}")]
    OffSurface { residual: f64 },
    #[error("point cannot be retracted (zero or non-finite)")]
    DegeneratePoint,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Sphere,
    Ellipsoid,
}

/// A sphere or axis-aligned ellipsoid of intrinsic dimension `m` in
/// `R^{m+1}`, with semi-axes `axes` (all 1 for the sphere).
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub kind: SurfaceKind,
    pub m: usize,
    pub axes: Vec<f64>,
}

impl SurfaceSpec {
    /// The unit sphere of intrinsic dimension `m`.
    pub fn sphere(m: usize) -> Result<Self, GeometryError> {
        let spec = SurfaceSpec {
            kind: SurfaceKind::Sphere,
            m,
            axes: vec![1.0; m + 1],
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The ellipsoid with the given semi-axes (`m = axes.len() - 1`).
    pub fn ellipsoid(axes: Vec<f64>) -> Result<Self, GeometryError> {
        if axes.len() < 2 {
            return Err(GeometryError::DimensionTooSmall(
                axes.len().saturating_sub(1),
            ));
        }
        let spec = SurfaceSpec {
            kind: SurfaceKind::Ellipsoid,
            m: axes.len() - 1,
            axes,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the structural invariants; deserialized specs must pass
    /// through here before use.
    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.m < 1 {
            return Err(GeometryError::DimensionTooSmall(self.m));
        }
        if self.axes.len() != self.m + 1 {
            return Err(GeometryError::DimensionMismatch {
                expected: self.m + 1,
                got: self.axes.len(),
            });
        }
        if self.axes.iter().any(|a| !a.is_finite() || *a <= 0.0) {
            return Err(GeometryError::InvalidAxes(self.axes.clone()));
        }
        if self.kind == SurfaceKind::Sphere && self.axes.iter().any(|a| *a != 1.0) {
            return Err(GeometryError::NonUnitSphereAxes(self.axes.clone()));
        }
        Ok(())
    }

    /// Ambient dimension `m + 1`.
    pub fn ambient_dim(&self) -> usize {
        self.m + 1
    }

    fn check_dim(&self, v: &DVector<f64>) -> Result<(), GeometryError> {
        if v.len() != self.ambient_dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.ambient_dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Defining-function residual `sum_k (p_k / a_k)^2 - 1`; zero exactly
    /// on the surface.
    pub fn surface_residual(&self, p: &DVector<f64>) -> Result<f64, GeometryError> {
        self.check_dim(p)?;
        let mut sum = 0.0;
        for k in 0..p.len() {
            let t = p[k] / self.axes[k];
            sum += t * t;
        }
        Ok(sum - 1.0)
    }

    /// The bilinear form `Q(u, v) = sum_k u_k v_k / a_k^2` whose unit level
    /// set is the surface. For the sphere this is the dot product.
    pub fn quadratic_form(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let mut sum = 0.0;
        for k in 0..u.len() {
            sum += u[k] * v[k] / (self.axes[k] * self.axes[k]);
        }
        sum
    }

    /// Radial retraction `p -> p / sqrt(Q(p, p))` onto the surface.
    pub fn retract(&self, p: &DVector<f64>) -> Result<SurfacePoint, GeometryError> {
        self.check_dim(p)?;
        let rho = self.quadratic_form(p, p).sqrt();
        if !rho.is_finite() || rho < 1e-12 {
            return Err(GeometryError::DegeneratePoint);
        }
        Ok(SurfacePoint { coords: p / rho })
    }

    /// Adopts coordinates as a surface point if their residual is within
    /// `ON_SURFACE_TOL`.
    pub fn point_from_coords(&self, coords: &[f64]) -> Result<SurfacePoint, GeometryError> {
        let v = DVector::from_column_slice(coords);
        let residual = self.surface_residual(&v)?;
        if residual.abs() > ON_SURFACE_TOL {
            return Err(GeometryError::OffSurface { residual });
        }
        Ok(SurfacePoint { coords: v })
    }

    /// Checks a point against this surface (used when a point constructed
    /// for one spec enters computations for another).
    pub fn check_point(&self, p: &SurfacePoint) -> Result<(), GeometryError> {
        let residual = self.surface_residual(&p.coords)?;
        if residual.abs() > ON_SURFACE_TOL {
            return Err(GeometryError::OffSurface { residual });
        }
        Ok(())
    }

    /// Outward unit normal at a surface point: `normalize(p_k / a_k^2)`.
    pub fn unit_normal(&self, p: &SurfacePoint) -> Result<DVector<f64>, GeometryError> {
        self.check_point(p)?;
        let mut v = DVector::zeros(p.coords.len());
        for k in 0..v.len() {
            v[k] = p.coords[k] / (self.axes[k] * self.axes[k]);
        }
        let norm = v.norm();
        debug_assert!(norm > 0.0);
        Ok(v / norm)
    }

    /// Deterministic orthonormal tangent frame at a surface point:
    /// Gram-Schmidt over the coordinate axes with the normal removed,
    /// keeping the first `m` independent directions.
    pub fn tangent_frame(&self, p: &SurfacePoint) -> Result<Vec<DVector<f64>>, GeometryError> {
        let normal = self.unit_normal(p)?;
        for tol in [FRAME_TOL, 1e-12] {
            let mut frame: Vec<DVector<f64>> = Vec::with_capacity(self.m);
            for axis in 0..self.ambient_dim() {
                let mut v = DVector::zeros(self.ambient_dim());
                v[axis] = 1.0;
                v -= &normal * normal[axis];
                for b in &frame {
                    let c = b.dot(&v);
                    v -= b * c;
                }
                let norm = v.norm();
                if norm > tol {
                    frame.push(v / norm);
                }
                if frame.len() == self.m {
                    return Ok(frame);
                }
            }
        }
        // Unreachable for valid surface points; kept as a hard failure.
        Err(GeometryError::DegeneratePoint)
    }

    /// Differential of the retraction at an arbitrary ambient point `p`
    /// (not necessarily on the surface), applied to `w`.
    pub fn retraction_differential(&self, p: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let rho = self.quadratic_form(p, p).sqrt();
        let qpw = self.quadratic_form(p, w);
        w / rho - p * (qpw / (rho * rho * rho))
    }
}

/// A point lying on a specific surface, with residual at most
/// [`ON_SURFACE_TOL`] (retraction lands near machine precision).
#[derive(Clone, PartialEq, Debug)]
pub struct SurfacePoint {
    coords: DVector<f64>,
}

impl SurfacePoint {
    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.coords.iter().copied().collect()
    }
}

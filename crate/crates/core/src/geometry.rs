//! Background geometries whose Ricci flow is known in closed form.
//!
//! * Flat circle / symmetric flat torus: `Ric ≡ 0`, the metric is static.
//! * Round 2-sphere of initial radius `r₀`, latitude-symmetric fields:
//!   `g(t) = s(t)·g_unit` with `s(t) = r₀² - 2t`, which solves
//!   `∂_t g = -2 Ric` exactly and goes extinct at `t = r₀²/2`.
//!
//! Fields are 1D arrays over the grid coordinate (`x ∈ [0, L)` periodic,
//! or colatitude `θ ∈ [0, π]` including both poles).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Minimum number of grid points.
pub const MIN_POINTS: usize = 16;

/// Grid points within this many spacings of a pole are excluded from sups.
pub const POLE_MASK_SPACINGS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModelKind {
    FlatCircle { length: f64 },
    /// Flat 2-torus with fields varying along one coordinate only.
    FlatTorus { length: f64 },
    ShrinkingSphere { r0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    pub spacing: f64,
    pub periodic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldModel {
    kind: ModelKind,
    grid: GridSpec,
    coords: Vec<f64>,
    stencil: Option<SphereStencil>,
}

impl ManifoldModel {
    pub fn flat_circle(length: f64, points: usize) -> Result<Self> {
        Self::new(ModelKind::FlatCircle { length }, points)
    }

    pub fn flat_torus(length: f64, points: usize) -> Result<Self> {
        Self::new(ModelKind::FlatTorus { length }, points)
    }

    pub fn shrinking_sphere(r0: f64, points: usize) -> Result<Self> {
        Self::new(ModelKind::ShrinkingSphere { r0 }, points)
    }

    pub fn new(kind: ModelKind, points: usize) -> Result<Self> {
        if points < MIN_POINTS {
            return Err(LabError::geometry(format!(
                "grid needs at least {MIN_POINTS} points, got {points}"
            )));
        }
        let grid = match kind {
            ModelKind::FlatCircle { length } | ModelKind::FlatTorus { length } => {
                if !(length.is_finite() && length > 0.0) {
                    return Err(LabError::geometry(format!("circle length must be > 0, got {length}")));
                }
                GridSpec {
                    points,
                    spacing: length / points as f64,
                    periodic: true,
                }
            }
            ModelKind::ShrinkingSphere { r0 } => {
                if !(r0.is_finite() && r0 > 0.0) {
                    return Err(LabError::geometry(format!("sphere radius must be > 0, got {r0}")));
                }
                GridSpec {
                    points,
                    spacing: PI / (points - 1) as f64,
                    periodic: false,
                }
            }
        };
        let coords = (0..points)
            .map(|i| {
                if !grid.periodic && i == points - 1 {
                    PI
                } else {
                    i as f64 * grid.spacing
                }
            })
            .collect();
        let stencil = (!grid.periodic).then(|| SphereStencil::new(points, grid.spacing));
        Ok(Self {
            kind,
            grid,
            coords,
            stencil,
        })
    }

    /// Same geometry at a different resolution.
    pub fn with_points(&self, points: usize) -> Result<Self> {
        Self::new(self.kind, points)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.grid.points
    }

    pub fn is_empty(&self) -> bool {
        self.grid.points == 0
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing
    }

    pub fn is_flat(&self) -> bool {
        !matches!(self.kind, ModelKind::ShrinkingSphere { .. })
    }

    /// Manifold dimension `n`.
    pub fn dimension(&self) -> usize {
        match self.kind {
            ModelKind::FlatCircle { .. } => 1,
            ModelKind::FlatTorus { .. } | ModelKind::ShrinkingSphere { .. } => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::FlatCircle { .. } => "flat-circle",
            ModelKind::FlatTorus { .. } => "flat-torus",
            ModelKind::ShrinkingSphere { .. } => "sphere",
        }
    }

    /// Extinction time (`+∞` for flat models).
    pub fn extinction_time(&self) -> f64 {
        match self.kind {
            ModelKind::ShrinkingSphere { r0 } => 0.5 * r0 * r0,
            _ => f64::INFINITY,
        }
    }

    /// Conformal factor `s(t)` of the metric relative to the unit model.
    pub fn metric_scale(&self, t: f64) -> Result<f64> {
        match self.kind {
            ModelKind::ShrinkingSphere { r0 } => {
                let scale = r0 * r0 - 2.0 * t;
                if scale <= 0.0 {
                    Err(LabError::Extinction { t, scale })
                } else {
                    Ok(scale)
                }
            }
            _ => Ok(1.0),
        }
    }

    /// `|Ric|` with respect to `g(t)`.
    pub fn ricci_bound(&self, t: f64) -> Result<f64> {
        match self.kind {
            ModelKind::ShrinkingSphere { .. } => Ok(1.0 / self.metric_scale(t)?),
            _ => Ok(0.0),
        }
    }

    /// `sup_{[0, T]} |Ric|`; the sphere's bound grows with `t`.
    pub fn run_ricci_bound(&self, horizon: f64) -> Result<f64> {
        self.ricci_bound(horizon)
    }

    fn check_field(&self, field: &[f64]) -> Result<()> {
        if field.len() != self.len() {
            return Err(LabError::usage(format!(
                "field has {} values, grid has {}",
                field.len(),
                self.len()
            )));
        }
        if field.iter().any(|v| !v.is_finite()) {
            return Err(LabError::domain("field contains non-finite values"));
        }
        Ok(())
    }

    /// Discrete Laplace–Beltrami operator of `g(t)`.
    ///
    /// Flat: periodic three-point stencil. Sphere: conservative form of
    /// `(1/s)(f_θθ + cot θ f_θ)` with exact cap volumes at the poles; at a
    /// pole this reduces to `4(f₁ - f₀)/(h² s)`, the reflected-ghost stencil
    /// for `2 f_θθ/s`.
    pub fn laplacian(&self, field: &[f64], t: f64) -> Result<Vec<f64>> {
        self.check_field(field)?;
        let mut out = vec![0.0; self.len()];
        self.laplacian_into(field, t, &mut out)?;
        Ok(out)
    }

    pub(crate) fn laplacian_into(&self, f: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        let n = self.len();
        let h = self.grid.spacing;
        if self.grid.periodic {
            let inv = 1.0 / (h * h);
            for i in 0..n {
                let (l, r) = (f[(i + n - 1) % n], f[(i + 1) % n]);
                out[i] = (r - 2.0 * f[i] + l) * inv;
            }
            return Ok(());
        }
        let s = self.metric_scale(t)?;
        let stencil = self.sphere_stencil();
        for i in 0..n {
            let left = if i > 0 { stencil.face[i - 1] * (f[i] - f[i - 1]) } else { 0.0 };
            let right = if i + 1 < n { stencil.face[i] * (f[i + 1] - f[i]) } else { 0.0 };
            out[i] = (right - left) / (h * stencil.volume[i] * s);
        }
        Ok(())
    }

    /// Coordinate derivative by central differences (zero at the poles).
    pub fn coordinate_derivative(&self, field: &[f64]) -> Result<Vec<f64>> {
        self.check_field(field)?;
        let mut out = vec![0.0; self.len()];
        self.derivative_into(field, &mut out);
        Ok(out)
    }

    pub(crate) fn derivative_into(&self, f: &[f64], out: &mut [f64]) {
        let n = self.len();
        let inv = 0.5 / self.grid.spacing;
        if self.grid.periodic {
            for i in 0..n {
                out[i] = (f[(i + 1) % n] - f[(i + n - 1) % n]) * inv;
            }
        } else {
            out[0] = 0.0;
            out[n - 1] = 0.0;
            for i in 1..n - 1 {
                out[i] = (f[i + 1] - f[i - 1]) * inv;
            }
        }
    }

    /// Inverse metric factor `g^{θθ}` (or `g^{xx}`) at time `t`.
    pub fn inverse_metric(&self, t: f64) -> Result<f64> {
        Ok(1.0 / self.metric_scale(t)?)
    }

    /// `|∇f|²_{g(t)}`.
    pub fn gradient_sq(&self, field: &[f64], t: f64) -> Result<Vec<f64>> {
        let d = self.coordinate_derivative(field)?;
        let ginv = self.inverse_metric(t)?;
        Ok(d.into_iter().map(|v| v * v * ginv).collect())
    }

    /// `g(t)(∇f, ∇h)` pointwise.
    pub fn gradient_dot(&self, f: &[f64], other: &[f64], t: f64) -> Result<Vec<f64>> {
        let df = self.coordinate_derivative(f)?;
        let dh = self.coordinate_derivative(other)?;
        let ginv = self.inverse_metric(t)?;
        Ok(df.iter().zip(&dh).map(|(a, b)| a * b * ginv).collect())
    }

    /// Riemannian volume of each grid cell at time `t`, up to the constant
    /// factor of the symmetric directions (`2π` on the sphere, the torus width).
    pub fn volume_weights(&self, t: f64) -> Result<Vec<f64>> {
        if self.grid.periodic {
            return Ok(vec![self.grid.spacing; self.len()]);
        }
        let s = self.metric_scale(t)?;
        let stencil = self.sphere_stencil();
        Ok(stencil.volume.iter().map(|v| v * s).collect())
    }

    /// Grid points used for sups: everything on flat models, all but the
    /// points within three spacings of a pole on the sphere.
    pub fn interior_mask(&self) -> Vec<bool> {
        if self.grid.periodic {
            return vec![true; self.len()];
        }
        let margin = POLE_MASK_SPACINGS * self.grid.spacing * (1.0 - 1e-9);
        self.coords
            .iter()
            .map(|&th| th >= margin && PI - th >= margin)
            .collect()
    }

    /// Distance `d(x, x₀, t)` between coordinates. On the sphere `x₀` must be
    /// a pole (`0` or `π`).
    pub fn distance(&self, x: f64, x0: f64, t: f64) -> Result<f64> {
        match self.kind {
            ModelKind::FlatCircle { length } | ModelKind::FlatTorus { length } => {
                let d = (x - x0).rem_euclid(length);
                Ok(d.min(length - d))
            }
            ModelKind::ShrinkingSphere { .. } => {
                if !(x0 == 0.0 || x0 == PI) {
                    return Err(LabError::geometry(
                        "sphere distances are only defined from a pole (x0 = 0 or pi)",
                    ));
                }
                Ok(self.metric_scale(t)?.sqrt() * (x - x0).abs())
            }
        }
    }

    /// Distances from `x₀` to every grid point.
    pub fn distances_from(&self, x0: f64, t: f64) -> Result<Vec<f64>> {
        self.coords.iter().map(|&x| self.distance(x, x0, t)).collect()
    }

    /// Largest radius `ρ` for which the ball around `x₀` is a geodesic ball
    /// on this model (half the circle, the full colatitude range).
    pub fn injectivity_scale(&self, t: f64) -> Result<f64> {
        match self.kind {
            ModelKind::FlatCircle { length } | ModelKind::FlatTorus { length } => Ok(0.5 * length),
            ModelKind::ShrinkingSphere { .. } => Ok(self.metric_scale(t)?.sqrt() * PI),
        }
    }

    fn sphere_stencil(&self) -> &SphereStencil {
        self.stencil.as_ref().expect("latitude grids carry a stencil")
    }
}

/// `sin θ` at cell faces and `∫ sin θ dθ` over each cell.
#[derive(Debug, Clone, PartialEq)]
struct SphereStencil {
    face: Vec<f64>,
    volume: Vec<f64>,
}

impl SphereStencil {
    fn new(n: usize, h: f64) -> Self {
        let face = (0..n - 1).map(|i| ((i as f64 + 0.5) * h).sin()).collect();
        let volume = (0..n)
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { (i as f64 - 0.5) * h };
                let hi = if i == n - 1 { PI } else { (i as f64 + 0.5) * h };
                lo.cos() - hi.cos()
            })
            .collect();
        Self { face, volume }
    }
}

impl LabError {
    pub(crate) fn geometry(msg: impl Into<String>) -> Self {
        Self::Geometry(msg.into())
    }
}

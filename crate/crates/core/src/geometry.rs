//! Antenna coordinate sets: actual arrays and candidate grids for linear,
//! planar and circular geometries in 3D.
//!
//! Convention: arrays live in planes orthogonal to the z axis (the boresight).
//! The transmit plane sits at z = 0 and the receive plane is translated to
//! z = D when a channel is built, so the transmit distance is a single scalar.

use crate::error::{Error, Result};
use crate::fmt::fmt_sig;

/// A point in 3D space, coordinates in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn origin() -> Self {
        Point3::new(0.0, 0.0, 0.0)
    }

    /// Euclidean distance to another point.
    pub fn distance(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// An ordered set of distinct antenna positions.
///
/// Point order is part of the value: selection indices refer to it, so it is
/// kept deterministic by every generator in this module.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayLayout {
    points: Vec<Point3>,
    label: String,
}

impl ArrayLayout {
    /// Build a layout, checking that it is nonempty, finite and free of
    /// duplicate positions.
    pub fn new(points: Vec<Point3>, label: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidSpec("layout has no points".into()));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "non-finite coordinate ({}, {}, {})",
                p.x, p.y, p.z
            )));
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i].distance(&points[j]) < 1e-12 {
                    return Err(Error::InvalidSpec(format!(
                        "duplicate points at indices {i} and {j}"
                    )));
                }
            }
        }
        Ok(ArrayLayout {
            points,
            label: label.into(),
        })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Largest pairwise distance; 0 for a single point.
    pub fn aperture(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                best = best.max(self.points[i].distance(&self.points[j]));
            }
        }
        best
    }

    /// Smallest pairwise distance. Undefined for fewer than two points.
    pub fn min_spacing(&self) -> Result<f64> {
        if self.points.len() < 2 {
            return Err(Error::UndefinedSpacing);
        }
        let mut best = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                best = best.min(self.points[i].distance(&self.points[j]));
            }
        }
        Ok(best)
    }

    /// Does the layout respect the half-wavelength mutual-coupling limit?
    /// Vacuously true for a single antenna.
    pub fn check_spacing(&self, lambda: f64) -> bool {
        match self.min_spacing() {
            Ok(s) => s >= lambda / 2.0,
            Err(_) => true,
        }
    }

    /// Plain-text coordinate listing: one "x y z" line per antenna, meters.
    pub fn coord_text(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            out.push_str(&fmt_sig(p.x));
            out.push(' ');
            out.push_str(&fmt_sig(p.y));
            out.push(' ');
            out.push_str(&fmt_sig(p.z));
            out.push('\n');
        }
        out
    }
}

/// Grid family of a candidate-location generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridGeometry {
    Linear,
    Planar,
    Circular,
}

/// Plane orientation: unit normal plus an in-plane rotation angle (radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    pub normal: [f64; 3],
    pub rotation: f64,
}

impl Default for Orientation {
    fn default() -> Self {
        Orientation {
            normal: [0.0, 0.0, 1.0],
            rotation: 0.0,
        }
    }
}

impl Orientation {
    /// Orthonormal in-plane axes (u, v) for this orientation.
    ///
    /// The reference axis is x (or y when the normal is nearly x), rotated
    /// in-plane by `rotation`; deterministic for reproducible point order.
    fn in_plane_axes(&self) -> Result<([f64; 3], [f64; 3])> {
        let n = self.normal;
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidSpec("orientation normal must be nonzero".into()));
        }
        let n = [n[0] / norm, n[1] / norm, n[2] / norm];
        let r = if n[0].abs() < 0.9 {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        };
        let dot = r[0] * n[0] + r[1] * n[1] + r[2] * n[2];
        let mut u = [r[0] - dot * n[0], r[1] - dot * n[1], r[2] - dot * n[2]];
        let un = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        u = [u[0] / un, u[1] / un, u[2] / un];
        let v = [
            n[1] * u[2] - n[2] * u[1],
            n[2] * u[0] - n[0] * u[2],
            n[0] * u[1] - n[1] * u[0],
        ];
        let (c, s) = (self.rotation.cos(), self.rotation.sin());
        let ur = [
            c * u[0] + s * v[0],
            c * u[1] + s * v[1],
            c * u[2] + s * v[2],
        ];
        let vr = [
            -s * u[0] + c * v[0],
            -s * u[1] + c * v[1],
            -s * u[2] + c * v[2],
        ];
        Ok((ur, vr))
    }
}

/// Candidate-grid description.
///
/// `counts`/`spacing` carry one entry for linear and circular grids and two
/// for planar ones. For circular grids `spacing[0]` is the circle radius;
/// arc neighbors are still validated through chord distances.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub geometry: GridGeometry,
    pub counts: Vec<usize>,
    pub spacing: Vec<f64>,
    pub center: Point3,
    pub orientation: Orientation,
}

impl GridSpec {
    pub fn linear(count: usize, spacing: f64) -> Self {
        GridSpec {
            geometry: GridGeometry::Linear,
            counts: vec![count],
            spacing: vec![spacing],
            center: Point3::origin(),
            orientation: Orientation::default(),
        }
    }

    pub fn planar(counts: [usize; 2], spacing: [f64; 2]) -> Self {
        GridSpec {
            geometry: GridGeometry::Planar,
            counts: counts.to_vec(),
            spacing: spacing.to_vec(),
            center: Point3::origin(),
            orientation: Orientation::default(),
        }
    }

    pub fn circular(count: usize, radius: f64) -> Self {
        GridSpec {
            geometry: GridGeometry::Circular,
            counts: vec![count],
            spacing: vec![radius],
            center: Point3::origin(),
            orientation: Orientation::default(),
        }
    }

    pub fn with_center(mut self, center: Point3) -> Self {
        self.center = center;
        self
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    fn validate(&self) -> Result<()> {
        let arity = match self.geometry {
            GridGeometry::Planar => 2,
            _ => 1,
        };
        if self.counts.len() != arity || self.spacing.len() != arity {
            return Err(Error::InvalidSpec(format!(
                "{:?} grid needs {arity} count/spacing entries",
                self.geometry
            )));
        }
        if self.counts.iter().any(|&c| c < 1) {
            return Err(Error::InvalidSpec("grid counts must be >= 1".into()));
        }
        if self.spacing.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidSpec("grid spacing must be positive".into()));
        }
        if !self.center.is_finite() {
            return Err(Error::InvalidSpec("grid center must be finite".into()));
        }
        Ok(())
    }
}

/// Centered offsets `(i - (n-1)/2) * s` for one grid axis.
fn axis_offsets(n: usize, s: f64) -> Vec<f64> {
    let mid = (n as f64 - 1.0) / 2.0;
    (0..n).map(|i| (i as f64 - mid) * s).collect()
}

fn add(center: &Point3, axis: &[f64; 3], t: f64) -> Point3 {
    Point3::new(
        center.x + t * axis[0],
        center.y + t * axis[1],
        center.z + t * axis[2],
    )
}

/// Generate the candidate locations described by `spec`.
///
/// Linear grids run along the oriented in-plane axis, planar grids are
/// row-major rectangular lattices, and circular grids list points in
/// increasing angle. Output order is deterministic.
pub fn generate_grid(spec: &GridSpec) -> Result<ArrayLayout> {
    spec.validate()?;
    let (u, v) = spec.orientation.in_plane_axes()?;
    let points = match spec.geometry {
        GridGeometry::Linear => axis_offsets(spec.counts[0], spec.spacing[0])
            .iter()
            .map(|&t| add(&spec.center, &u, t))
            .collect::<Vec<_>>(),
        GridGeometry::Planar => {
            let us = axis_offsets(spec.counts[0], spec.spacing[0]);
            let vs = axis_offsets(spec.counts[1], spec.spacing[1]);
            let mut pts = Vec::with_capacity(us.len() * vs.len());
            for &a in &us {
                for &b in &vs {
                    let p = add(&spec.center, &u, a);
                    pts.push(add(&p, &v, b));
                }
            }
            pts
        }
        GridGeometry::Circular => {
            let n = spec.counts[0];
            let r = spec.spacing[0];
            (0..n)
                .map(|k| {
                    let ang = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    let p = add(&spec.center, &u, r * ang.cos());
                    add(&p, &v, r * ang.sin())
                })
                .collect()
        }
    };
    ArrayLayout::new(points, format!("{:?}", spec.geometry).to_lowercase())
}

/// Number of candidate locations for a grid `eta` times finer than an
/// `n`-element uniform array: `eta * (n - 1) + 1`.
pub fn candidate_count(n: usize, eta: usize) -> usize {
    assert!(n >= 2, "candidate_count needs n >= 2");
    assert!(eta >= 1, "candidate_count needs eta >= 1");
    eta * (n - 1) + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LAMBDA_62GHZ: f64 = 299_792_458.0 / 62e9;

    fn rotate(p: &Point3, yaw: f64, pitch: f64, roll: f64, shift: &Point3) -> Point3 {
        // z-y-x Euler rotation followed by a translation
        let (cy, sy) = (yaw.cos(), yaw.sin());
        let (cp, sp) = (pitch.cos(), pitch.sin());
        let (cr, sr) = (roll.cos(), roll.sin());
        let (x1, y1, z1) = (cy * p.x - sy * p.y, sy * p.x + cy * p.y, p.z);
        let (x2, y2, z2) = (cp * x1 + sp * z1, y1, -sp * x1 + cp * z1);
        let (x3, y3, z3) = (x2, cr * y2 - sr * z2, sr * y2 + cr * z2);
        Point3::new(x3 + shift.x, y3 + shift.y, z3 + shift.z)
    }

    #[test]
    fn linear_grid_16_over_one_meter() {
        let g = generate_grid(&GridSpec::linear(16, 1.0 / 15.0)).unwrap();
        assert_eq!(g.len(), 16);
        assert!((g.aperture() - 1.0).abs() < 1e-12);
        // collinear along x, centered
        for p in g.points() {
            assert_eq!(p.y, 0.0);
            assert_eq!(p.z, 0.0);
        }
        let mean_x: f64 = g.points().iter().map(|p| p.x).sum::<f64>() / 16.0;
        assert!(mean_x.abs() < 1e-15);
    }

    #[test]
    fn single_point_grid_is_degenerate() {
        let g = generate_grid(&GridSpec::linear(1, 0.5)).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.points()[0], Point3::origin());
        assert_eq!(g.aperture(), 0.0);
        assert!(matches!(g.min_spacing(), Err(Error::UndefinedSpacing)));
    }

    #[test]
    fn linear_grid_aperture_from_spacing() {
        let g = generate_grid(&GridSpec::linear(4, 0.3335)).unwrap();
        assert!((g.aperture() - 1.0005).abs() < 1e-12);
    }

    #[test]
    fn zero_or_negative_spacing_rejected() {
        assert!(generate_grid(&GridSpec::linear(4, 0.0)).is_err());
        assert!(generate_grid(&GridSpec::linear(4, -0.1)).is_err());
    }

    #[test]
    fn planar_unit_square_aperture_is_diagonal() {
        let g = generate_grid(&GridSpec::planar([2, 2], [1.0, 1.0])).unwrap();
        assert_eq!(g.len(), 4);
        assert!((g.aperture() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn planar_grid_is_row_major() {
        let g = generate_grid(&GridSpec::planar([2, 3], [1.0, 0.5])).unwrap();
        // first row (u offset -0.5) sweeps v ascending
        let p = g.points();
        assert!(p[0].y < p[1].y && p[1].y < p[2].y);
        assert!((p[0].x - p[2].x).abs() < 1e-15);
        assert!(p[3].x > p[0].x);
    }

    #[test]
    fn circular_grid_radius_and_order() {
        let g = generate_grid(&GridSpec::circular(6, 2.0)).unwrap();
        assert_eq!(g.len(), 6);
        for p in g.points() {
            let r = (p.x * p.x + p.y * p.y).sqrt();
            assert!((r - 2.0).abs() < 1e-12);
        }
        // chord between neighbors: 2 r sin(pi/n)
        let chord = 2.0 * 2.0 * (std::f64::consts::PI / 6.0).sin();
        assert!((g.min_spacing().unwrap() - chord).abs() < 1e-12);
        // increasing angle
        let angles: Vec<f64> = g.points().iter().map(|p| p.y.atan2(p.x)).collect();
        assert!(angles[1] > angles[0]);
    }

    #[test]
    fn min_spacing_against_half_wavelength() {
        let g = generate_grid(&GridSpec::linear(16, 1.0 / 15.0)).unwrap();
        let s = g.min_spacing().unwrap();
        assert!((s - 1.0 / 15.0).abs() < 1e-12);
        assert!(g.check_spacing(LAMBDA_62GHZ), "0.067 m >= lambda/2 at 62 GHz");

        let close = ArrayLayout::new(
            vec![Point3::origin(), Point3::new(0.001, 0.0, 0.0)],
            "too close",
        )
        .unwrap();
        assert!(!close.check_spacing(LAMBDA_62GHZ));
    }

    #[test]
    fn fine_grid_for_eta_8_still_passes_spacing() {
        // 25 points over 1 m: pitch 1/24 m
        let g = generate_grid(&GridSpec::linear(25, 1.0 / 24.0)).unwrap();
        assert!((g.min_spacing().unwrap() - 0.0416666666667).abs() < 1e-9);
        assert!(g.check_spacing(LAMBDA_62GHZ));
    }

    #[test]
    fn candidate_count_formula() {
        assert_eq!(candidate_count(4, 5), 16);
        assert_eq!(candidate_count(4, 8), 25);
        assert_eq!(candidate_count(4, 1), 4);
    }

    #[test]
    fn duplicate_points_rejected() {
        let r = ArrayLayout::new(vec![Point3::origin(), Point3::origin()], "dup");
        assert!(matches!(r, Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn rigid_motion_leaves_aperture_and_spacing_unchanged() {
        let g = generate_grid(&GridSpec::planar([3, 4], [0.2, 0.35])).unwrap();
        let (ap, ms) = (g.aperture(), g.min_spacing().unwrap());
        let cases = [
            (0.3, -1.2, 2.5, Point3::new(4.0, -2.0, 7.5)),
            (1.57, 0.5, -0.9, Point3::new(-1.0, 0.0, 100.0)),
            (-2.8, 2.2, 0.01, Point3::new(0.0, 55.0, -3.0)),
        ];
        for (yaw, pitch, roll, shift) in cases {
            let moved: Vec<Point3> = g
                .points()
                .iter()
                .map(|p| rotate(p, yaw, pitch, roll, &shift))
                .collect();
            let m = ArrayLayout::new(moved, "moved").unwrap();
            assert!((m.aperture() - ap).abs() < 1e-9);
            assert!((m.min_spacing().unwrap() - ms).abs() < 1e-9);
        }
    }

    #[test]
    fn grid_generation_is_deterministic() {
        let spec = GridSpec::circular(9, 1.5).with_orientation(Orientation {
            normal: [0.3, -0.4, 0.87],
            rotation: 0.7,
        });
        assert_eq!(generate_grid(&spec).unwrap(), generate_grid(&spec).unwrap());
    }

    #[test]
    fn coord_text_round_trips() {
        let g = generate_grid(&GridSpec::linear(4, 0.3335)).unwrap();
        let text = g.coord_text();
        assert_eq!(text.lines().count(), 4);
        for (line, p) in text.lines().zip(g.points()) {
            let vals: Vec<f64> = line.split(' ').map(|t| t.parse().unwrap()).collect();
            assert_eq!(vals.len(), 3);
            assert!((vals[0] - p.x).abs() <= 1e-9 * p.x.abs().max(1.0));
        }
    }

    proptest! {
        #[test]
        fn linear_aperture_is_count_minus_one_times_spacing(
            n in 2usize..40,
            s in 1e-4f64..10.0,
        ) {
            let g = generate_grid(&GridSpec::linear(n, s)).unwrap();
            let expect = (n - 1) as f64 * s;
            prop_assert!((g.aperture() - expect).abs() <= 1e-12 * expect);
        }

        #[test]
        fn candidate_grid_spacing_reproduces_parent_aperture(
            n in 2usize..8,
            eta in 1usize..10,
            d in 1e-3f64..1.0,
        ) {
            // a grid eta times finer than an n-element array of pitch d
            // spans the same aperture
            let nf = candidate_count(n, eta);
            let g = generate_grid(&GridSpec::linear(nf, d / eta as f64)).unwrap();
            let expect = (n - 1) as f64 * d;
            prop_assert!((g.aperture() - expect).abs() <= 1e-9 * expect);
        }
    }
}

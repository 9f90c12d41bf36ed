//! Continuous camera-motion paths that get rasterized into blur kernels.
//!
//! Three generators are provided:
//!
//! - a hand-tremor model: a 2D stochastic damped oscillator (8-12 Hz
//!   resonance) on top of a slowly wandering drift, integrated at 1 kHz over
//!   the exposure;
//! - a six-point spline: uniform Catmull-Rom through six control points drawn
//!   in a square grid;
//! - a linear 3D model: a camera translating with random velocity and
//!   acceleration, projected onto the image plane.
//!
//! All positions are in pixels. Absolute placement is irrelevant because the
//! rasterizer re-centers every path.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// An ordered polyline of at least two finite points.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    points: Vec<Point>,
    /// Exposure time in seconds, only set by the tremor model.
    duration: Option<f64>,
}

impl Trajectory {
    /// A single-point path is stored as two coincident points.
    pub fn new(mut points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("empty trajectory".into()));
        }
        if points.len() == 1 {
            points.push(points[0]);
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidParameter(
                "trajectory has non-finite coordinates".into(),
            ));
        }
        Ok(Self {
            points,
            duration: None,
        })
    }

    pub fn with_duration(mut self, seconds: f64) -> Self {
        self.duration = Some(seconds);
        self
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn duration(&self) -> Option<f64> {
        self.duration
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(w[1])).sum()
    }

    /// Axis-aligned bounds as `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.points {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    pub fn bbox_diagonal(&self) -> f64 {
        let (lo, hi) = self.bounds();
        lo.dist(hi)
    }

    /// Arc-length weighted centroid; the point average for zero-length paths.
    pub fn centroid(&self) -> Point {
        let mut total = 0.0;
        let mut acc = Point::default();
        for w in self.points.windows(2) {
            let len = w[0].dist(w[1]);
            acc.x += len * 0.5 * (w[0].x + w[1].x);
            acc.y += len * 0.5 * (w[0].y + w[1].y);
            total += len;
        }
        if total > 0.0 {
            Point::new(acc.x / total, acc.y / total)
        } else {
            let n = self.points.len() as f64;
            let sx: f64 = self.points.iter().map(|p| p.x).sum();
            let sy: f64 = self.points.iter().map(|p| p.y).sum();
            Point::new(sx / n, sy / n)
        }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Trajectory {
        Trajectory {
            points: self
                .points
                .iter()
                .map(|p| Point::new(p.x + dx, p.y + dy))
                .collect(),
            duration: self.duration,
        }
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Parameters of the hand-tremor model. Exposure is the only per-call input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TremorParams {
    /// Resonance is drawn uniformly from this band for each trajectory.
    pub min_freq_hz: f64,
    pub max_freq_hz: f64,
    pub damping_ratio: f64,
    /// Stationary standard deviation of the oscillator position, per axis.
    pub amplitude_px: f64,
    /// Standard deviation of the initial drift velocity, per axis.
    pub drift_speed_px_s: f64,
    /// Diffusion of the drift velocity, in px/s per sqrt(s).
    pub drift_diffusion: f64,
    pub sample_rate_hz: f64,
}

impl Default for TremorParams {
    fn default() -> Self {
        Self {
            min_freq_hz: 8.0,
            max_freq_hz: 12.0,
            damping_ratio: 0.2,
            amplitude_px: 1.0,
            drift_speed_px_s: 40.0,
            drift_diffusion: 80.0,
            sample_rate_hz: 1000.0,
        }
    }
}

impl TremorParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.min_freq_hz > 0.0
            && self.max_freq_hz >= self.min_freq_hz
            && self.damping_ratio > 0.0
            && self.amplitude_px >= 0.0
            && self.drift_speed_px_s >= 0.0
            && self.drift_diffusion >= 0.0
            && self.sample_rate_hz > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid tremor parameters {self:?}"
            )))
        }
    }
}

pub fn sample_tremor_trajectory<R: Rng + ?Sized>(exposure: f64, rng: &mut R) -> Result<Trajectory> {
    sample_tremor_trajectory_with(exposure, &TremorParams::default(), rng)
}

pub fn sample_tremor_trajectory_with<R: Rng + ?Sized>(
    exposure: f64,
    params: &TremorParams,
    rng: &mut R,
) -> Result<Trajectory> {
    if !(exposure > 0.0) || !exposure.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "exposure must be positive, got {exposure}"
        )));
    }
    params.validate()?;

    let steps = ((exposure * params.sample_rate_hz).ceil() as usize).max(1);
    let dt = exposure / steps as f64;
    let freq = if params.max_freq_hz > params.min_freq_hz {
        rng.random_range(params.min_freq_hz..params.max_freq_hz)
    } else {
        params.min_freq_hz
    };
    let omega = 2.0 * std::f64::consts::PI * freq;
    let zeta = params.damping_ratio;
    // Stationary law of dv = (-2 zeta omega v - omega^2 x) dt + sigma dW:
    // var(x) = sigma^2 / (4 zeta omega^3), var(v) = omega^2 var(x).
    let sigma = params.amplitude_px * (4.0 * zeta * omega.powi(3)).sqrt();
    let vel_std = params.amplitude_px * omega;

    let mut pos = [0.0f64; 2];
    let mut vel = [0.0f64; 2];
    let mut drift_pos = [0.0f64; 2];
    let mut drift_vel = [0.0f64; 2];
    for axis in 0..2 {
        pos[axis] = params.amplitude_px * normal(rng);
        vel[axis] = vel_std * normal(rng);
        drift_vel[axis] = params.drift_speed_px_s * normal(rng);
    }

    let sqrt_dt = dt.sqrt();
    let mut points = Vec::with_capacity(steps + 1);
    points.push(Point::new(pos[0] + drift_pos[0], pos[1] + drift_pos[1]));
    for _ in 0..steps {
        for axis in 0..2 {
            // Semi-implicit Euler-Maruyama: velocity first, then position.
            let accel = -2.0 * zeta * omega * vel[axis] - omega * omega * pos[axis];
            vel[axis] += accel * dt + sigma * sqrt_dt * normal(rng);
            pos[axis] += vel[axis] * dt;
            drift_vel[axis] += params.drift_diffusion * sqrt_dt * normal(rng);
            drift_pos[axis] += drift_vel[axis] * dt;
        }
        points.push(Point::new(pos[0] + drift_pos[0], pos[1] + drift_pos[1]));
    }

    // The oscillator offset at t=0 is a constant translation; remove it so the
    // path starts at the origin and collapses to a point as exposure -> 0.
    let origin = points[0];
    let points = points
        .into_iter()
        .map(|p| Point::new(p.x - origin.x, p.y - origin.y))
        .collect();
    Ok(Trajectory::new(points)?.with_duration(exposure))
}

pub const SPLINE_CONTROL_POINTS: usize = 6;
const SPLINE_SAMPLES_PER_SEGMENT: usize = 32;

/// Six control points uniform in `[0, grid)^2`, interpolated by Catmull-Rom.
pub fn sample_spline_trajectory<R: Rng + ?Sized>(rng: &mut R, grid: usize) -> Result<Trajectory> {
    if grid < 3 {
        return Err(Error::InvalidParameter(format!(
            "spline grid must be >= 3, got {grid}"
        )));
    }
    let g = grid as f64;
    let control: Vec<Point> = (0..SPLINE_CONTROL_POINTS)
        .map(|_| Point::new(rng.random_range(0.0..g), rng.random_range(0.0..g)))
        .collect();
    catmull_rom_path(&control, SPLINE_SAMPLES_PER_SEGMENT)
}

/// Evaluates the uniform Catmull-Rom spline through `control`, with the end
/// points duplicated as phantom neighbours.
pub fn catmull_rom_path(control: &[Point], samples_per_segment: usize) -> Result<Trajectory> {
    if control.len() < 2 {
        return Err(Error::InvalidParameter(
            "spline needs at least two control points".into(),
        ));
    }
    let samples_per_segment = samples_per_segment.max(1);
    let n = control.len();
    let at = |i: isize| control[i.clamp(0, n as isize - 1) as usize];

    let mut points = Vec::with_capacity((n - 1) * samples_per_segment + 1);
    for seg in 0..n - 1 {
        let s = seg as isize;
        let (p0, p1, p2, p3) = (at(s - 1), at(s), at(s + 1), at(s + 2));
        for j in 0..samples_per_segment {
            let t = j as f64 / samples_per_segment as f64;
            points.push(catmull_rom(p0, p1, p2, p3, t));
        }
    }
    points.push(control[n - 1]);
    Trajectory::new(points)
}

pub(crate) fn catmull_rom(p0: Point, p1: Point, p2: Point, p3: Point, t: f64) -> Point {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let m1 = Point::new(0.5 * (p2.x - p0.x), 0.5 * (p2.y - p0.y));
    let m2 = Point::new(0.5 * (p3.x - p1.x), 0.5 * (p3.y - p1.y));
    Point::new(
        h00 * p1.x + h10 * m1.x + h01 * p2.x + h11 * m2.x,
        h00 * p1.y + h10 * m1.y + h01 * p2.y + h11 * m2.y,
    )
}

/// Parameters of the linear 3D camera-motion model.
///
/// The camera looks at a point at `depth` on the optical axis. Lateral
/// quantities are expressed in pixels at that depth, so the projection of a
/// camera offset `(X, Y, Z)` is `(X, Y) * depth / (depth - Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Linear3dParams {
    pub steps: usize,
    /// Standard deviation of the initial lateral velocity (px per exposure).
    pub velocity_std_px: f64,
    /// Standard deviation of the initial axial velocity (fraction of depth per exposure).
    pub depth_velocity_std: f64,
    /// Standard deviation of the per-step lateral acceleration (px per exposure^2).
    pub accel_std_px: f64,
    pub depth_accel_std: f64,
    pub depth: f64,
}

impl Default for Linear3dParams {
    fn default() -> Self {
        Self::for_kernel_size(33)
    }
}

impl Linear3dParams {
    /// Defaults scaled so that typical paths span about a third of the window.
    pub fn for_kernel_size(size: usize) -> Self {
        let k = size as f64;
        Self {
            steps: 64,
            velocity_std_px: k / 6.0,
            depth_velocity_std: 0.05,
            accel_std_px: k / 3.0,
            depth_accel_std: 0.1,
            depth: 1.0,
        }
    }
}

/// A 3D camera path: initial velocity plus one acceleration per step.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraMotion {
    pub velocity: [f64; 3],
    pub accelerations: Vec<[f64; 3]>,
}

impl CameraMotion {
    pub fn constant_velocity(velocity: [f64; 3], steps: usize) -> Self {
        Self {
            velocity,
            accelerations: vec![[0.0; 3]; steps],
        }
    }

    /// Integrates the piecewise-linear path over unit time.
    pub fn positions(&self) -> Vec<[f64; 3]> {
        let steps = self.accelerations.len().max(1);
        let dt = 1.0 / steps as f64;
        let mut p = [0.0f64; 3];
        let mut v = self.velocity;
        let mut out = Vec::with_capacity(steps + 1);
        out.push(p);
        for i in 0..steps {
            for axis in 0..3 {
                p[axis] += v[axis] * dt;
            }
            if let Some(a) = self.accelerations.get(i) {
                for axis in 0..3 {
                    v[axis] += a[axis] * dt;
                }
            }
            out.push(p);
        }
        out
    }
}

pub fn project_camera_motion(motion: &CameraMotion, depth: f64) -> Result<Trajectory> {
    if !(depth > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "depth must be positive, got {depth}"
        )));
    }
    let points = motion
        .positions()
        .into_iter()
        .map(|[x, y, z]| {
            let denom = depth - z;
            if denom <= 1e-6 * depth {
                return Err(Error::InvalidParameter(
                    "camera moved through the scene plane".into(),
                ));
            }
            let s = depth / denom;
            Ok(Point::new(x * s, y * s))
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(points)
}

pub fn sample_linear3d_trajectory<R: Rng + ?Sized>(rng: &mut R) -> Result<Trajectory> {
    sample_linear3d_trajectory_with(&Linear3dParams::default(), rng)
}

pub fn sample_linear3d_trajectory_with<R: Rng + ?Sized>(
    params: &Linear3dParams,
    rng: &mut R,
) -> Result<Trajectory> {
    if params.steps == 0 {
        return Err(Error::InvalidParameter(
            "linear3d needs at least one step".into(),
        ));
    }
    let velocity = [
        params.velocity_std_px * normal(rng),
        params.velocity_std_px * normal(rng),
        params.depth * params.depth_velocity_std * normal(rng),
    ];
    let accelerations = (0..params.steps)
        .map(|_| {
            [
                params.accel_std_px * normal(rng),
                params.accel_std_px * normal(rng),
                params.depth * params.depth_accel_std * normal(rng),
            ]
        })
        .collect();
    let motion = CameraMotion {
        velocity,
        accelerations,
    };
    project_camera_motion(&motion, params.depth)
}

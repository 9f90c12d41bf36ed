use super::trajectory::{Point, Trajectory};
use super::{center_kernel, BlurKernel};
use crate::error::{Error, Result};

/// Arc-length spacing between deposited samples, in pixels.
const SAMPLE_SPACING: f64 = 0.02;

/// Adds `weight` at `p` to a `size x size` grid with bilinear splatting.
/// Returns `false` (and deposits nothing) when any tap falls outside.
pub fn splat_bilinear(grid: &mut [f64], size: usize, p: Point, weight: f64) -> bool {
    let x0 = p.x.floor();
    let y0 = p.y.floor();
    let fx = p.x - x0;
    let fy = p.y - y0;
    let last = (size - 1) as f64;
    if x0 < 0.0 || y0 < 0.0 || x0 > last || y0 > last {
        return false;
    }
    if (fx > 0.0 && x0 + 1.0 > last) || (fy > 0.0 && y0 + 1.0 > last) {
        return false;
    }
    let (xi, yi) = (x0 as usize, y0 as usize);
    let taps = [
        (0, 0, (1.0 - fx) * (1.0 - fy)),
        (1, 0, fx * (1.0 - fy)),
        (0, 1, (1.0 - fx) * fy),
        (1, 1, fx * fy),
    ];
    for (ox, oy, t) in taps {
        if t > 0.0 {
            grid[(yi + oy) * size + xi + ox] += weight * t;
        }
    }
    true
}

/// Deposits the trajectory as-is (no re-centering) with uniform weight per
/// unit arc length, then normalizes to unit sum.
///
/// Each polyline segment gets `ceil(len / spacing)` equal sub-intervals and a
/// sample at every sub-interval midpoint. A zero-length path deposits its
/// first point.
pub fn rasterize_kernel_uncentered(traj: &Trajectory, size: usize) -> Result<BlurKernel> {
    if size.is_multiple_of(2) || size < 1 {
        return Err(Error::InvalidParameter(format!(
            "kernel size must be odd, got {size}"
        )));
    }
    let mut grid = vec![0.0; size * size];
    let overflow = || Error::KernelOverflow {
        extent: traj.bbox_diagonal(),
        size,
    };

    let total = traj.length();
    if total <= 0.0 {
        if !splat_bilinear(&mut grid, size, traj.points()[0], 1.0) {
            return Err(overflow());
        }
    } else {
        for w in traj.points().windows(2) {
            let len = w[0].dist(w[1]);
            if len <= 0.0 {
                continue;
            }
            let n = (len / SAMPLE_SPACING).ceil().max(1.0) as usize;
            let weight = len / total / n as f64;
            for i in 0..n {
                let t = (i as f64 + 0.5) / n as f64;
                let p = Point::new(
                    w[0].x + t * (w[1].x - w[0].x),
                    w[0].y + t * (w[1].y - w[0].y),
                );
                if !splat_bilinear(&mut grid, size, p, weight) {
                    return Err(overflow());
                }
            }
        }
    }
    BlurKernel::new(size, grid)?.normalized()
}

/// Rasterizes a trajectory into a canonical `size x size` kernel.
///
/// The path is translated so its arc-length centroid lands on the window
/// center, deposited by [`rasterize_kernel_uncentered`], and finally
/// re-centered on its center of mass.
///
/// Fails with [`Error::KernelOverflow`] when the centered path leaves the
/// window; callers may resample or use a larger size.
pub fn rasterize_kernel(traj: &Trajectory, size: usize) -> Result<BlurKernel> {
    let centroid = traj.centroid();
    let c = (size / 2) as f64;
    let centered = traj.translated(c - centroid.x, c - centroid.y);
    let k = rasterize_kernel_uncentered(&centered, size)?;
    Ok(center_kernel(&k))
}

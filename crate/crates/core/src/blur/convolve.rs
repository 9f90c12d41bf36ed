//! 2D convolution with boundary extension, via a direct spatial loop or FFT.
//!
//! Both backends compute the true convolution `(k * u)(y, x) =
//! sum_{dy,dx} k(r + dy, r + dx) u(y - dy, x - dx)` over an image extended
//! by the kernel radius `r`, and accumulate in `f64`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::kernel::BlurKernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// `aaa|abcd|ddd`
    #[default]
    Replicate,
    /// `cb|abcd|cb` (mirror, edge sample not repeated)
    Reflect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Auto,
    Direct,
    Fft,
}

#[inline]
fn extend_index(i: isize, n: usize, boundary: Boundary) -> usize {
    let last = n as isize - 1;
    match boundary {
        Boundary::Replicate => i.clamp(0, last) as usize,
        Boundary::Reflect => {
            if last == 0 {
                return 0;
            }
            let period = 2 * last;
            let mut j = i.rem_euclid(period);
            if j > last {
                j = period - j;
            }
            j as usize
        }
    }
}

/// Extends a plane by `pad` samples on every side.
pub(crate) fn pad_plane(
    plane: &[f64],
    h: usize,
    w: usize,
    pad: usize,
    boundary: Boundary,
) -> Vec<f64> {
    let (hp, wp) = (h + 2 * pad, w + 2 * pad);
    let cols: Vec<usize> = (0..wp)
        .map(|x| extend_index(x as isize - pad as isize, w, boundary))
        .collect();
    let mut out = Vec::with_capacity(hp * wp);
    for y in 0..hp {
        let sy = extend_index(y as isize - pad as isize, h, boundary);
        let row = &plane[sy * w..(sy + 1) * w];
        out.extend(cols.iter().map(|&sx| row[sx]));
    }
    out
}

fn check_fits(h: usize, w: usize, k: &BlurKernel) -> Result<()> {
    if k.size() > h.min(w) {
        return Err(Error::InvalidParameter(format!(
            "{}x{} kernel is larger than the {h}x{w} image",
            k.size(),
            k.size()
        )));
    }
    Ok(())
}

/// Direct spatial convolution of a single plane.
pub fn convolve_plane_direct(
    plane: &[f64],
    h: usize,
    w: usize,
    k: &BlurKernel,
    boundary: Boundary,
) -> Vec<f64> {
    let size = k.size();
    let r = k.radius();
    let wp = w + 2 * r;
    let padded = pad_plane(plane, h, w, r, boundary);
    // Flipped taps, skipping zeros: motion kernels are sparse.
    let taps: Vec<(usize, usize, f64)> = (0..size)
        .flat_map(|a| (0..size).map(move |b| (a, b)))
        .filter_map(|(a, b)| {
            let wgt = k.at(a, b);
            (wgt != 0.0).then_some((size - 1 - a, size - 1 - b, wgt))
        })
        .collect();

    let mut out = vec![0.0; h * w];
    for (oy, ox, wgt) in taps {
        for y in 0..h {
            let src = &padded[(y + oy) * wp + ox..(y + oy) * wp + ox + w];
            let dst = &mut out[y * w..(y + 1) * w];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += wgt * s;
            }
        }
    }
    out
}

/// Smallest `n >= min` whose only prime factors are 2, 3 and 5.
fn smooth_len(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut m = n;
        for p in [2, 3, 5] {
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        if m == 1 {
            return n;
        }
        n += 1;
    }
}

type PlanKey = (usize, bool);
type PlanCache = RwLock<HashMap<PlanKey, Arc<dyn Fft<f64>>>>;

fn plan_cache() -> &'static PlanCache {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let key = (len, inverse);
    if let Some(p) = plan_cache().read().unwrap().get(&key) {
        return Arc::clone(p);
    }
    let mut cache = plan_cache().write().unwrap();
    Arc::clone(cache.entry(key).or_insert_with(|| {
        let dir = if inverse {
            FftDirection::Inverse
        } else {
            FftDirection::Forward
        };
        FftPlanner::new().plan_fft(len, dir)
    }))
}

thread_local! {
    static SPARE: RefCell<Vec<Vec<Complex<f64>>>> = const { RefCell::new(Vec::new()) };
}

/// Spare transform buffers kept per thread. Fresh multi-megabyte
/// allocations are returned to the OS on free and page-faulted back in on
/// every pair, which costs more than the transforms themselves.
const MAX_SPARE: usize = 12;

/// A zeroed buffer of `len` samples, recycled when possible.
fn buffer(len: usize) -> Vec<Complex<f64>> {
    let mut v = SPARE.with(|s| s.borrow_mut().pop()).unwrap_or_default();
    v.clear();
    v.resize(len, Complex::default());
    v
}

pub(crate) fn recycle(v: Vec<Complex<f64>>) {
    SPARE.with(|s| {
        let mut s = s.borrow_mut();
        if s.len() < MAX_SPARE {
            s.push(v);
        }
    });
}

/// A real input of a transform.
pub(crate) enum Field<'a> {
    /// An `h x w` plane extended by `pad` and placed at the origin.
    Padded {
        plane: &'a [f64],
        h: usize,
        w: usize,
        pad: usize,
        boundary: Boundary,
    },
    /// A kernel centered at `(pad, pad)`.
    Kernel(&'a BlurKernel, usize),
}

/// A 2D transform of fixed size, rows then columns.
#[derive(Clone)]
pub(crate) struct Fft2d {
    pub h: usize,
    pub w: usize,
}

impl Fft2d {
    /// Transform size able to hold a linear convolution over `h x w` padded
    /// by `pad` without wrap-around in the region that is read back.
    pub fn for_padded(h: usize, w: usize, pad: usize) -> Self {
        Self {
            h: smooth_len(h + 2 * pad),
            w: smooth_len(w + 2 * pad),
        }
    }

    fn len(&self) -> usize {
        self.h * self.w
    }

    fn run(&self, buf: &mut [Complex<f64>], inverse: bool) {
        let row = plan(self.w, inverse);
        let col = plan(self.h, inverse);
        let mut scratch = vec![
            Complex::default();
            row.get_inplace_scratch_len()
                .max(col.get_inplace_scratch_len())
        ];
        row.process_with_scratch(buf, &mut scratch);
        // Columns in blocks of adjacent columns, gathered into contiguous
        // lines so one batched call transforms the whole block.
        const B: usize = 16;
        let (h, w) = (self.h, self.w);
        let mut lines = vec![Complex::default(); B * h];
        for x0 in (0..w).step_by(B) {
            let nb = B.min(w - x0);
            for y in 0..h {
                for (j, v) in buf[y * w + x0..][..nb].iter().enumerate() {
                    lines[j * h + y] = *v;
                }
            }
            col.process_with_scratch(&mut lines[..nb * h], &mut scratch);
            for y in 0..h {
                for (j, v) in buf[y * w + x0..][..nb].iter_mut().enumerate() {
                    *v = lines[j * h + y];
                }
            }
        }
    }

    /// Writes `field` into the real (`imag == false`) or imaginary parts of
    /// a zeroed buffer.
    fn place(&self, field: &Field<'_>, buf: &mut [Complex<f64>], imag: bool) {
        let put = |c: &mut Complex<f64>, v: f64| {
            if imag {
                c.im = v;
            } else {
                c.re = v;
            }
        };
        match *field {
            Field::Padded {
                plane,
                h,
                w,
                pad,
                boundary,
            } => {
                let cols: Vec<usize> = (0..w + 2 * pad)
                    .map(|x| extend_index(x as isize - pad as isize, w, boundary))
                    .collect();
                for y in 0..h + 2 * pad {
                    let sy = extend_index(y as isize - pad as isize, h, boundary);
                    let src = &plane[sy * w..(sy + 1) * w];
                    for (c, &sx) in buf[y * self.w..].iter_mut().zip(&cols) {
                        put(c, src[sx]);
                    }
                }
            }
            Field::Kernel(k, pad) => {
                let (n, off) = (k.size(), pad - k.radius());
                for a in 0..n {
                    let dst = &mut buf[(a + off) * self.w + off..][..n];
                    for (c, &v) in dst.iter_mut().zip(&k.weights()[a * n..(a + 1) * n]) {
                        put(c, v);
                    }
                }
            }
        }
    }

    /// Spectra of real fields, two per complex transform: `a + ib` is
    /// transformed once and split using the Hermitian symmetry of each part.
    /// Hand the results back with [`recycle`] when done.
    pub fn spectra(&self, fields: &[Field<'_>]) -> Vec<Vec<Complex<f64>>> {
        let (h, w) = (self.h, self.w);
        let mut out = Vec::with_capacity(fields.len());
        for pair in fields.chunks(2) {
            let mut z = buffer(self.len());
            self.place(&pair[0], &mut z, false);
            if let Some(b) = pair.get(1) {
                self.place(b, &mut z, true);
            }
            self.run(&mut z, false);
            if pair.len() == 1 {
                out.push(z);
                continue;
            }
            let mut sa = buffer(self.len());
            let mut sb = buffer(self.len());
            for y in 0..h {
                let row = &z[y * w..][..w];
                let mirror = &z[((h - y) % h) * w..][..w];
                let (ra, rb) = (&mut sa[y * w..][..w], &mut sb[y * w..][..w]);
                for x in 0..w {
                    let zk = row[x];
                    let zn = mirror[if x == 0 { 0 } else { w - x }].conj();
                    ra[x] = (zk + zn) * 0.5;
                    // (zk - zn) / 2i
                    let d = zk - zn;
                    rb[x] = Complex::new(d.im * 0.5, -d.re * 0.5);
                }
            }
            recycle(z);
            out.push(sa);
            out.push(sb);
        }
        out
    }

    /// `lhs .* rhs` in a recycled buffer.
    pub fn product(&self, lhs: &[Complex<f64>], rhs: &[Complex<f64>]) -> Vec<Complex<f64>> {
        let mut p = buffer(self.len());
        for ((p, a), b) in p.iter_mut().zip(lhs).zip(rhs) {
            *p = a * b;
        }
        p
    }

    /// Inverse transforms of spectra of real fields, two per complex
    /// transform, cropped to the `h x w` output of a convolution whose input
    /// was padded by `pad`. `sink(j, y, row)` receives row `y` of output `j`.
    /// Consumes and recycles the spectra.
    pub fn real_inverses_into(
        &self,
        spectra: Vec<Vec<Complex<f64>>>,
        h: usize,
        w: usize,
        pad: usize,
        mut sink: impl FnMut(usize, usize, &[f64]),
    ) {
        let scale = 1.0 / self.len() as f64;
        let mut row_buf = vec![0.0; w];
        let mut it = spectra.into_iter().enumerate();
        while let Some((j, mut z)) = it.next() {
            let paired = match it.next() {
                Some((_, q)) => {
                    for (p, q) in z.iter_mut().zip(&q) {
                        *p += Complex::new(-q.im, q.re);
                    }
                    recycle(q);
                    true
                }
                None => false,
            };
            self.run(&mut z, true);
            for y in 0..h {
                let row = &z[(y + 2 * pad) * self.w + 2 * pad..][..w];
                for (o, c) in row_buf.iter_mut().zip(row) {
                    *o = c.re * scale;
                }
                sink(j, y, &row_buf);
                if paired {
                    for (o, c) in row_buf.iter_mut().zip(row) {
                        *o = c.im * scale;
                    }
                    sink(j + 1, y, &row_buf);
                }
            }
            recycle(z);
        }
    }

    /// [`Fft2d::real_inverses_into`] collected into planes.
    pub fn real_inverses(
        &self,
        spectra: Vec<Vec<Complex<f64>>>,
        h: usize,
        w: usize,
        pad: usize,
    ) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; h * w]; spectra.len()];
        self.real_inverses_into(spectra, h, w, pad, |j, y, row| {
            out[j][y * w..(y + 1) * w].copy_from_slice(row);
        });
        out
    }
}

/// FFT convolution of several planes, each with its own kernel, sharing
/// transforms between pairs of real fields.
pub(crate) fn convolve_planes_fft(
    jobs: &[(&[f64], &BlurKernel)],
    h: usize,
    w: usize,
    boundary: Boundary,
) -> Vec<Vec<f64>> {
    let pad = jobs.iter().map(|(_, k)| k.radius()).max().unwrap_or(0);
    let fft = Fft2d::for_padded(h, w, pad);
    let fields: Vec<Field<'_>> = jobs
        .iter()
        .flat_map(|&(plane, k)| {
            [
                Field::Padded {
                    plane,
                    h,
                    w,
                    pad,
                    boundary,
                },
                Field::Kernel(k, pad),
            ]
        })
        .collect();
    let spectra = fft.spectra(&fields);
    let mut products = Vec::with_capacity(jobs.len());
    let mut it = spectra.into_iter();
    while let (Some(img), Some(ker)) = (it.next(), it.next()) {
        products.push(fft.product(&img, &ker));
        recycle(img);
        recycle(ker);
    }
    fft.real_inverses(products, h, w, pad)
}

/// FFT convolution of a single plane.
pub fn convolve_plane_fft(
    plane: &[f64],
    h: usize,
    w: usize,
    k: &BlurKernel,
    boundary: Boundary,
) -> Vec<f64> {
    convolve_planes_fft(&[(plane, k)], h, w, boundary)
        .pop()
        .expect("one job")
}

/// Picks the backend for a kernel of `size` on an `h x w` plane.
pub(crate) fn resolve_backend(backend: Backend, h: usize, w: usize, size: usize) -> Backend {
    match backend {
        Backend::Auto => {
            let n = ((h + size) * (w + size)) as f64;
            if (size * size) as f64 <= 16.0 * n.log2() {
                Backend::Direct
            } else {
                Backend::Fft
            }
        }
        other => other,
    }
}

pub fn convolve_plane(
    plane: &[f64],
    h: usize,
    w: usize,
    k: &BlurKernel,
    boundary: Boundary,
    backend: Backend,
) -> Result<Vec<f64>> {
    if plane.len() != h * w {
        return Err(Error::shape(format!("{h}x{w} plane"), plane.len()));
    }
    check_fits(h, w, k)?;
    Ok(match resolve_backend(backend, h, w, k.size()) {
        Backend::Fft => convolve_plane_fft(plane, h, w, k, boundary),
        _ => convolve_plane_direct(plane, h, w, k, boundary),
    })
}

/// Convolves every channel of `img` with `k`, choosing the backend by size.
pub fn convolve(img: &Image, k: &BlurKernel, boundary: Boundary) -> Result<Image> {
    convolve_with(img, k, boundary, Backend::Auto)
}

pub fn convolve_with(
    img: &Image,
    k: &BlurKernel,
    boundary: Boundary,
    backend: Backend,
) -> Result<Image> {
    let (h, w, channels) = img.dims();
    check_fits(h, w, k)?;
    let mut out = Image::zeros(h, w, channels);
    for c in 0..channels {
        let plane = convolve_plane(&img.plane(c), h, w, k, boundary, backend)?;
        out.set_plane(c, &plane);
    }
    Ok(out)
}

//! Fan-beam forward projection, its adjoint, and filtered back-projection.
//!
//! The forward operator uses Joseph's method: rays are sampled at unit steps
//! along their dominant axis, interpolating linearly between the two pixels
//! straddling the ray in the cross axis, each sample weighted by the
//! physical step length. The adjoint runs the identical traversal with the
//! roles of read and write swapped, so the pair is an exact matrix
//! transpose.
//!
//! Reconstruction is the standard flat-detector fan-beam FBP: cosine
//! pre-weighting of each channel, ramp filtering along the channel axis
//! (zero-padded FFT convolution with the closed-form discrete ramp kernel),
//! then backprojection with the 1/U^2 magnification weight.
//!
//! Everything here is a pure function of immutable inputs. Work is split
//! across threads in fixed chunks with a fixed reduction order per output
//! element, so results do not depend on thread count.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::FanBeamGeometry;

/// Square 2D attenuation map, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub size: usize,
    pub pixel_spacing: f64,
    pub data: Vec<f64>,
}

impl Image {
    pub fn zeros(size: usize, pixel_spacing: f64) -> Self {
        Image {
            size,
            pixel_spacing,
            data: vec![0.0; size * size],
        }
    }

    /// Validates length and finiteness.
    pub fn new(size: usize, pixel_spacing: f64, data: Vec<f64>) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("image size must be >= 1"));
        }
        if data.len() != size * size {
            return Err(Error::mismatch(format!(
                "image data length {} != {size}x{size}",
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("image contains non-finite values"));
        }
        Ok(Image {
            size,
            pixel_spacing,
            data,
        })
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.size + col]
    }

    #[inline]
    pub fn at_mut(&mut self, row: usize, col: usize) -> &mut f64 {
        &mut self.data[row * self.size + col]
    }
}

/// Measurement array: one row of detector readings per view.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    pub n_views: usize,
    pub n_detectors: usize,
    pub data: Vec<f64>,
}

impl Sinogram {
    pub fn zeros(n_views: usize, n_detectors: usize) -> Self {
        Sinogram {
            n_views,
            n_detectors,
            data: vec![0.0; n_views * n_detectors],
        }
    }

    pub fn new(n_views: usize, n_detectors: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_views * n_detectors {
            return Err(Error::mismatch(format!(
                "sinogram data length {} != {n_views}x{n_detectors}",
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("sinogram contains non-finite values"));
        }
        Ok(Sinogram {
            n_views,
            n_detectors,
            data,
        })
    }

    #[inline]
    pub fn row(&self, view: usize) -> &[f64] {
        &self.data[view * self.n_detectors..(view + 1) * self.n_detectors]
    }

    #[inline]
    pub fn at(&self, view: usize, channel: usize) -> f64 {
        self.data[view * self.n_detectors + channel]
    }

    pub fn matches(&self, geom: &FanBeamGeometry) -> Result<()> {
        if self.n_views != geom.n_views || self.n_detectors != geom.n_detectors {
            return Err(Error::mismatch(format!(
                "sinogram is {}x{}, geometry expects {}x{}",
                self.n_views, self.n_detectors, geom.n_views, geom.n_detectors
            )));
        }
        Ok(())
    }
}

fn check_image(image: &Image, geom: &FanBeamGeometry) -> Result<()> {
    if image.size != geom.image_size {
        return Err(Error::mismatch(format!(
            "image size {} != geometry image_size {}",
            image.size, geom.image_size
        )));
    }
    if image.pixel_spacing != geom.pixel_spacing {
        return Err(Error::mismatch(format!(
            "image pixel_spacing {} != geometry pixel_spacing {}",
            image.pixel_spacing, geom.pixel_spacing
        )));
    }
    Ok(())
}

/// Walks one ray with Joseph sampling, invoking `visit(pixel_index, weight)`
/// for every (pixel, path-weight) pair. Endpoints are in pixel-index
/// coordinates (pixel centers at integers); `step` is the physical length
/// of a unit step along the dominant axis divided by that axis step, i.e.
/// weights already carry the physical path length.
///
/// The forward projector and its adjoint both run exactly this traversal,
/// which is what makes them exact transposes of one another.
#[inline]
fn walk_ray(sx: f64, sy: f64, px: f64, py: f64, n: usize, spacing: f64, mut visit: impl FnMut(usize, f64)) {
    let dx = px - sx;
    let dy = py - sy;
    let nf = n as f64;
    if dx.abs() >= dy.abs() {
        // x-driven: one sample per integer column k, interpolated in y
        let slope = dy / dx;
        let step = spacing * (1.0 + slope * slope).sqrt();
        // cross coordinate at column k: f(k) = sy + (k - sx) * slope
        // keep only k where f in (-1, n) and k in [0, n)
        let (mut kmin, mut kmax) = (0usize, n - 1);
        if slope != 0.0 {
            let k_at = |f: f64| (f - sy) / slope + sx;
            let (ka, kb) = (k_at(-1.0), k_at(nf));
            let (lo, hi) = if ka <= kb { (ka, kb) } else { (kb, ka) };
            kmin = lo.ceil().max(0.0) as usize;
            kmax = hi.floor().min(nf - 1.0).max(0.0) as usize;
            if lo > nf - 1.0 || hi < 0.0 {
                return;
            }
        } else if sy <= -1.0 || sy >= nf {
            return;
        }
        let mut f = sy + (kmin as f64 - sx) * slope;
        for k in kmin..=kmax {
            let j0 = f.floor();
            let w1 = f - j0;
            let j = j0 as isize;
            if j >= 0 && (j as usize) < n {
                visit(j as usize * n + k, (1.0 - w1) * step);
            }
            let j1 = j + 1;
            if j1 >= 0 && (j1 as usize) < n && w1 != 0.0 {
                visit(j1 as usize * n + k, w1 * step);
            }
            f += slope;
        }
    } else {
        // y-driven: one sample per integer row k, interpolated in x
        let slope = dx / dy;
        let step = spacing * (1.0 + slope * slope).sqrt();
        let k_at = |f: f64| (f - sx) / slope + sy;
        let (mut kmin, mut kmax) = (0usize, n - 1);
        if slope != 0.0 {
            let (ka, kb) = (k_at(-1.0), k_at(nf));
            let (lo, hi) = if ka <= kb { (ka, kb) } else { (kb, ka) };
            if lo > nf - 1.0 || hi < 0.0 {
                return;
            }
            kmin = lo.ceil().max(0.0) as usize;
            kmax = hi.floor().min(nf - 1.0).max(0.0) as usize;
        } else if sx <= -1.0 || sx >= nf {
            return;
        }
        let mut f = sx + (kmin as f64 - sy) * slope;
        for k in kmin..=kmax {
            let j0 = f.floor();
            let w1 = f - j0;
            let j = j0 as isize;
            if j >= 0 && (j as usize) < n {
                visit(k * n + j as usize, (1.0 - w1) * step);
            }
            let j1 = j + 1;
            if j1 >= 0 && (j1 as usize) < n && w1 != 0.0 {
                visit(k * n + j1 as usize, w1 * step);
            }
            f += slope;
        }
    }
}

/// Source and detector-element positions for every channel of one view, in
/// pixel-index coordinates.
struct ViewRays {
    sx: f64,
    sy: f64,
    // detector element c sits at d0 + c * dstep (2-vectors)
    d0x: f64,
    d0y: f64,
    dsx: f64,
    dsy: f64,
}

fn view_rays(geom: &FanBeamGeometry, view: usize) -> ViewRays {
    let beta = std::f64::consts::TAU * view as f64 / geom.n_views as f64;
    let (sin_b, cos_b) = beta.sin_cos();
    let ps = geom.pixel_spacing;
    let ctr = (geom.image_size as f64 - 1.0) / 2.0;
    let to_idx = |x: f64, y: f64| (x / ps + ctr, y / ps + ctr);
    let (sx, sy) = to_idx(geom.source_to_iso * cos_b, geom.source_to_iso * sin_b);
    let u0 = -(geom.n_detectors as f64 - 1.0) / 2.0 * geom.detector_spacing;
    let (d0x, d0y) = to_idx(
        -geom.iso_to_detector * cos_b - u0 * sin_b,
        -geom.iso_to_detector * sin_b + u0 * cos_b,
    );
    let (dsx, dsy) = (
        -geom.detector_spacing * sin_b / ps,
        geom.detector_spacing * cos_b / ps,
    );
    ViewRays {
        sx,
        sy,
        d0x,
        d0y,
        dsx,
        dsy,
    }
}

/// Line integrals of the image along every (view, channel) ray.
pub fn forward_project(image: &Image, geom: &FanBeamGeometry) -> Result<Sinogram> {
    check_image(image, geom)?;
    let n = geom.image_size;
    let nd = geom.n_detectors;
    let mut sino = Sinogram::zeros(geom.n_views, nd);
    let img = image.data.as_slice();
    sino.data
        .par_chunks_mut(nd)
        .enumerate()
        .for_each(|(v, row)| {
            let rays = view_rays(geom, v);
            for (c, out) in row.iter_mut().enumerate() {
                let px = rays.d0x + c as f64 * rays.dsx;
                let py = rays.d0y + c as f64 * rays.dsy;
                let mut acc = 0.0;
                walk_ray(rays.sx, rays.sy, px, py, n, geom.pixel_spacing, |idx, w| {
                    acc += img[idx] * w;
                });
                *out = acc;
            }
        });
    Ok(sino)
}

// Views per parallel work unit in the adjoint. Fixed (not derived from the
// thread count) so the reduction order, and hence the output bits, never
// change with parallelism.
const ADJOINT_CHUNK: usize = 64;

/// Exact linear adjoint of [`forward_project`]: the same Joseph traversal
/// with reads and writes swapped.
pub fn backproject(sino: &Sinogram, geom: &FanBeamGeometry) -> Result<Image> {
    sino.matches(geom)?;
    let n = geom.image_size;
    let nd = geom.n_detectors;
    let views: Vec<usize> = (0..geom.n_views).collect();
    let partials: Vec<Vec<f64>> = views
        .chunks(ADJOINT_CHUNK)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|chunk| {
            let mut acc = vec![0.0; n * n];
            for &v in chunk {
                let rays = view_rays(geom, v);
                let row = sino.row(v);
                for (c, &q) in row.iter().enumerate() {
                    if q == 0.0 {
                        continue;
                    }
                    let px = rays.d0x + c as f64 * rays.dsx;
                    let py = rays.d0y + c as f64 * rays.dsy;
                    walk_ray(rays.sx, rays.sy, px, py, n, geom.pixel_spacing, |idx, w| {
                        acc[idx] += q * w;
                    });
                }
            }
            acc
        })
        .collect();
    let mut out = Image::zeros(n, geom.pixel_spacing);
    for part in partials {
        for (o, p) in out.data.iter_mut().zip(part) {
            *o += p;
        }
    }
    Ok(out)
}

/// Discrete ramp kernel values h(0..len) for a given sample spacing `s`:
/// h(0) = 1/(4 s^2), h(n) = -1/(pi n s)^2 for odd n, 0 for even n > 0.
pub fn ramp_kernel(len: usize, spacing: f64) -> Vec<f64> {
    let mut h = vec![0.0; len];
    if len == 0 {
        return h;
    }
    h[0] = 1.0 / (4.0 * spacing * spacing);
    for (j, v) in h.iter_mut().enumerate().skip(1).step_by(2) {
        let d = std::f64::consts::PI * j as f64 * spacing;
        *v = -1.0 / (d * d);
    }
    h
}

/// Convolves a detector row with the discrete ramp kernel. Zero-padded FFT
/// convolution: the padded length is the next power of two >= 2*len, so the
/// circular product equals the linear convolution exactly. Output length
/// equals input length; a length-1 row is returned unchanged.
pub fn ramp_filter_row(row: &[f64], spacing: f64) -> Vec<f64> {
    if row.len() < 2 {
        return row.to_vec();
    }
    let n = row.len();
    let padded = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::new();
    let kernel_fft = ramp_kernel_fft(n, padded, spacing, &mut planner);
    let fft = planner.plan_fft_forward(padded);
    let ifft = planner.plan_fft_inverse(padded);
    let mut buf: Vec<Complex<f64>> = row
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(padded)
        .collect();
    fft.process(&mut buf);
    for (b, k) in buf.iter_mut().zip(&kernel_fft) {
        *b *= k;
    }
    ifft.process(&mut buf);
    let norm = 1.0 / padded as f64;
    buf[..n].iter().map(|c| c.re * norm).collect()
}

/// FFT of the symmetric ramp kernel laid out circularly over `padded` bins.
fn ramp_kernel_fft(
    n: usize,
    padded: usize,
    spacing: f64,
    planner: &mut FftPlanner<f64>,
) -> Vec<Complex<f64>> {
    let h = ramp_kernel(n, spacing);
    let mut k = vec![Complex::new(0.0, 0.0); padded];
    k[0] = Complex::new(h[0], 0.0);
    for j in 1..n {
        k[j] = Complex::new(h[j], 0.0);
        k[padded - j] = Complex::new(h[j], 0.0);
    }
    let fft = planner.plan_fft_forward(padded);
    fft.process(&mut k);
    k
}

/// Flat-detector fan-beam filtered back-projection with a pure ramp filter.
///
/// Per view: multiply channel c by `D_sd / sqrt(D_sd^2 + u_c^2)`, ramp
/// filter along the channel axis, then backproject with the `1/U^2` weight,
/// where `U` is the source distance of the pixel along the central ray
/// normalized by `source_to_iso`. The overall scale folds in the angular
/// step `2*pi/n_views`, the detector sample spacing, the half factor of the
/// full-rotation parameterization and the rebinning of the detector onto
/// the virtual detector plane through the isocenter.
pub fn fbp(sino: &Sinogram, geom: &FanBeamGeometry) -> Result<Image> {
    sino.matches(geom)?;
    let n = geom.image_size;
    let nd = geom.n_detectors;
    let nv = geom.n_views;
    let d_sd = geom.source_to_detector();
    let d_si = geom.source_to_iso;
    let s_u = geom.detector_spacing;
    let c_half = (nd as f64 - 1.0) / 2.0;

    // cosine weight, then ramp filter each view
    let padded = (2 * nd).next_power_of_two();
    let mut planner = FftPlanner::new();
    let kernel_fft = ramp_kernel_fft(nd, padded, s_u, &mut planner);
    let fft = planner.plan_fft_forward(padded);
    let ifft = planner.plan_fft_inverse(padded);
    let cosw: Vec<f64> = (0..nd)
        .map(|c| {
            let u = (c as f64 - c_half) * s_u;
            d_sd / (d_sd * d_sd + u * u).sqrt()
        })
        .collect();
    let mut filtered = vec![0.0; nv * nd];
    filtered
        .par_chunks_mut(nd)
        .enumerate()
        .for_each(|(v, out)| {
            let row = sino.row(v);
            let mut buf: Vec<Complex<f64>> = (0..padded)
                .map(|c| {
                    if c < nd {
                        Complex::new(row[c] * cosw[c], 0.0)
                    } else {
                        Complex::new(0.0, 0.0)
                    }
                })
                .collect();
            fft.process(&mut buf);
            for (b, k) in buf.iter_mut().zip(&kernel_fft) {
                *b *= k;
            }
            ifft.process(&mut buf);
            let norm = 1.0 / padded as f64;
            for (o, c) in out.iter_mut().zip(&buf[..nd]) {
                *o = c.re * norm;
            }
        });

    // backproject, gathering per pixel so each output is a fixed-order sum
    let trig: Vec<(f64, f64)> = (0..nv)
        .map(|v| (std::f64::consts::TAU * v as f64 / nv as f64).sin_cos())
        .collect();
    let scale = (std::f64::consts::TAU / nv as f64) * s_u * d_sd / (2.0 * d_si);
    let ctr = (n as f64 - 1.0) / 2.0;
    let ps = geom.pixel_spacing;
    let mut img = Image::zeros(n, ps);
    img.data.par_chunks_mut(n).enumerate().for_each(|(r, row)| {
        let y = (r as f64 - ctr) * ps;
        for (c, out) in row.iter_mut().enumerate() {
            let x = (c as f64 - ctr) * ps;
            let mut acc = 0.0;
            for (v, &(sin_b, cos_b)) in trig.iter().enumerate() {
                let denom = d_si - x * cos_b - y * sin_b;
                if denom <= 1e-12 * d_si {
                    continue;
                }
                let recip = 1.0 / denom;
                let u = d_sd * (y * cos_b - x * sin_b) * recip;
                let cidx = u / s_u + c_half;
                if cidx < 0.0 || cidx > nd as f64 - 1.0 {
                    continue;
                }
                let i0 = (cidx as usize).min(nd - 2);
                let frac = cidx - i0 as f64;
                let frow = &filtered[v * nd..(v + 1) * nd];
                let q = frow[i0] + frac * (frow[i0 + 1] - frow[i0]);
                let w = d_si * recip;
                acc += q * w * w;
            }
            *out = acc * scale;
        }
    });
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn norm(a: &[f64]) -> f64 {
        dot(a, a).sqrt()
    }

    /// Independent dense sampling oracle: march from source to detector in
    /// 0.1-pixel steps, bilinearly interpolating the image.
    fn ray_march(image: &Image, geom: &FanBeamGeometry, view: usize, channel: usize) -> f64 {
        let (s, d) = geom.ray_endpoints(view, channel).unwrap();
        let n = image.size;
        let ps = image.pixel_spacing;
        let ctr = (n as f64 - 1.0) / 2.0;
        let len = ((d[0] - s[0]).powi(2) + (d[1] - s[1]).powi(2)).sqrt();
        let step = 0.1 * ps;
        let n_steps = (len / step).ceil() as usize;
        let dt = len / n_steps as f64;
        let mut acc = 0.0;
        for i in 0..n_steps {
            let t = (i as f64 + 0.5) / n_steps as f64;
            let x = s[0] + t * (d[0] - s[0]);
            let y = s[1] + t * (d[1] - s[1]);
            let fx = x / ps + ctr;
            let fy = y / ps + ctr;
            let (ix, iy) = (fx.floor(), fy.floor());
            let (wx, wy) = (fx - ix, fy - iy);
            let mut sample = 0.0;
            for (dj, wj) in [(0isize, 1.0 - wy), (1, wy)] {
                for (di, wi) in [(0isize, 1.0 - wx), (1, wx)] {
                    let (col, row) = (ix as isize + di, iy as isize + dj);
                    if col >= 0 && (col as usize) < n && row >= 0 && (row as usize) < n {
                        sample += wi * wj * image.at(row as usize, col as usize);
                    }
                }
            }
            acc += sample * dt;
        }
        acc
    }

    /// Perpendicular distance from the isocenter to a (view, channel) ray.
    fn ray_iso_distance(geom: &FanBeamGeometry, view: usize, channel: usize) -> f64 {
        let (s, d) = geom.ray_endpoints(view, channel).unwrap();
        let len = ((d[0] - s[0]).powi(2) + (d[1] - s[1]).powi(2)).sqrt();
        ((d[0] - s[0]) * (-s[1]) - (d[1] - s[1]) * (-s[0])).abs() / len
    }

    #[test]
    fn zero_image_projects_to_zero() {
        let geom = FanBeamGeometry::scaled_to(64).unwrap();
        let img = Image::zeros(64, 1.0);
        let sino = forward_project(&img, &geom).unwrap();
        assert!(sino.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let geom = FanBeamGeometry::scaled_to(64).unwrap();
        let img = Image::zeros(32, 1.0);
        assert!(forward_project(&img, &geom).is_err());
        let sino = Sinogram::zeros(3, 5);
        assert!(backproject(&sino, &geom).is_err());
        assert!(fbp(&sino, &geom).is_err());
    }

    #[test]
    fn disk_central_ray_matches_chord() {
        let geom = FanBeamGeometry::default();
        let disk = synth::disk_phantom(512, 1.0, 100.0, 0.5).unwrap();
        let sino = forward_project(&disk, &geom).unwrap();
        // channel 340 passes through the isocenter: chord = 2 * 0.5 * 100
        let v = sino.at(0, 340);
        assert!(
            (v - 100.0).abs() <= 1.0,
            "central ray {v}, expected 100 within 1%"
        );
        // agreement with the dense-marching oracle on a few channels
        for c in [300, 340, 380] {
            let m = ray_march(&disk, &geom, 0, c);
            let j = sino.at(0, c);
            assert!(
                (j - m).abs() <= 0.01 * m.abs().max(1.0),
                "channel {c}: joseph {j} vs march {m}"
            );
        }
    }

    #[test]
    fn disk_analytic_chords_off_center() {
        let geom = FanBeamGeometry::default();
        let (radius, mu) = (100.0, 0.5);
        let disk = synth::disk_phantom(512, 1.0, radius, mu).unwrap();
        let sino = forward_project(&disk, &geom).unwrap();
        for c in (240..=440).step_by(10) {
            let d = ray_iso_distance(&geom, 17, c);
            if d > 0.9 * radius {
                continue;
            }
            let chord = 2.0 * mu * (radius * radius - d * d).sqrt();
            let got = sino.at(17, c);
            assert!(
                (got - chord).abs() <= 0.01 * chord,
                "channel {c}: got {got}, chord {chord}"
            );
        }
    }

    #[test]
    fn centered_disk_rows_rotation_invariant() {
        let geom = FanBeamGeometry::scaled_to(256).unwrap();
        let disk = synth::disk_phantom(256, 1.0, 50.0, 0.5).unwrap();
        let sino = forward_project(&disk, &geom).unwrap();
        let row0 = sino.row(0);
        let max0 = row0.iter().cloned().fold(0.0, f64::max);
        for v in (1..geom.n_views).step_by(37) {
            let row = sino.row(v);
            let max_dev = row
                .iter()
                .zip(row0)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(
                max_dev <= 1e-3 * max0,
                "view {v}: max deviation {max_dev} vs {max0}"
            );
        }
    }

    #[test]
    fn forward_is_linear() {
        let geom = FanBeamGeometry::scaled_to(32).unwrap();
        let mut rng = crate::rng::SplitMix64::new(5);
        let a = Image::new(32, 1.0, (0..32 * 32).map(|_| rng.next_f64()).collect()).unwrap();
        let b = Image::new(32, 1.0, (0..32 * 32).map(|_| rng.next_f64()).collect()).unwrap();
        let combo = Image::new(
            32,
            1.0,
            a.data
                .iter()
                .zip(&b.data)
                .map(|(x, y)| 2.5 * x - 1.25 * y)
                .collect(),
        )
        .unwrap();
        let (sa, sb, sc) = (
            forward_project(&a, &geom).unwrap(),
            forward_project(&b, &geom).unwrap(),
            forward_project(&combo, &geom).unwrap(),
        );
        let scale = sa.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in 0..sc.data.len() {
            let expect = 2.5 * sa.data[i] - 1.25 * sb.data[i];
            assert!((sc.data[i] - expect).abs() <= 1e-6 * scale.max(1.0));
        }
    }

    #[test]
    fn zero_sinogram_backprojects_to_zero() {
        let geom = FanBeamGeometry::scaled_to(32).unwrap();
        let sino = Sinogram::zeros(geom.n_views, geom.n_detectors);
        let img = backproject(&sino, &geom).unwrap();
        assert!(img.data.iter().all(|&v| v == 0.0));
        let rec = fbp(&sino, &geom).unwrap();
        assert!(rec.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn adjoint_identity_64() {
        let geom = FanBeamGeometry::scaled_to(64).unwrap();
        let mut rng = crate::rng::SplitMix64::new(11);
        for _ in 0..5 {
            let x = Image::new(
                64,
                1.0,
                (0..64 * 64).map(|_| rng.next_f64() - 0.5).collect(),
            )
            .unwrap();
            let y = Sinogram::new(
                geom.n_views,
                geom.n_detectors,
                (0..geom.n_views * geom.n_detectors)
                    .map(|_| rng.next_f64() - 0.5)
                    .collect(),
            )
            .unwrap();
            let ax = forward_project(&x, &geom).unwrap();
            let bty = backproject(&y, &geom).unwrap();
            let lhs = dot(&ax.data, &y.data);
            let rhs = dot(&x.data, &bty.data);
            let defect = (lhs - rhs).abs() / (norm(&ax.data) * norm(&y.data) + 1e-30);
            assert!(defect <= 1e-3, "adjoint defect {defect}");
        }
    }

    #[test]
    fn one_hot_backprojection_stays_on_ray_footprint() {
        let geom = FanBeamGeometry::scaled_to(32).unwrap();
        let (view, channel) = (7, geom.n_detectors / 2);
        let mut sino = Sinogram::zeros(geom.n_views, geom.n_detectors);
        sino.data[view * geom.n_detectors + channel] = 1.0;
        let img = backproject(&sino, &geom).unwrap();
        // every touched pixel must lie within ~1.5 px of the ray line
        let (s, d) = geom.ray_endpoints(view, channel).unwrap();
        let len = ((d[0] - s[0]).powi(2) + (d[1] - s[1]).powi(2)).sqrt();
        let ctr = (32.0 - 1.0) / 2.0;
        let mut touched = 0;
        for r in 0..32 {
            for c in 0..32 {
                if img.at(r, c) != 0.0 {
                    touched += 1;
                    let (x, y) = ((c as f64 - ctr), (r as f64 - ctr));
                    let dist =
                        ((d[0] - s[0]) * (s[1] - y) - (d[1] - s[1]) * (s[0] - x)).abs() / len;
                    assert!(dist <= 1.5, "pixel ({r},{c}) off-ray at distance {dist}");
                }
            }
        }
        assert!(touched > 0);
    }

    #[test]
    fn far_corner_blob_misses_distant_rays() {
        let geom = FanBeamGeometry::scaled_to(64).unwrap();
        let mut img = Image::zeros(64, 1.0);
        *img.at_mut(2, 2) = 1.0; // far corner pixel
        let sino = forward_project(&img, &geom).unwrap();
        let ctr = (64.0 - 1.0) / 2.0;
        let (bx, by) = ((2.0 - ctr), (2.0 - ctr));
        for v in (0..geom.n_views).step_by(11) {
            for c in (0..geom.n_detectors).step_by(7) {
                let (s, d) = geom.ray_endpoints(v, c).unwrap();
                let len = ((d[0] - s[0]).powi(2) + (d[1] - s[1]).powi(2)).sqrt();
                let dist =
                    ((d[0] - s[0]) * (s[1] - by) - (d[1] - s[1]) * (s[0] - bx)).abs() / len;
                if dist > 2.0 {
                    assert_eq!(sino.at(v, c), 0.0, "ray ({v},{c}) at distance {dist}");
                }
            }
        }
    }

    #[test]
    fn ramp_kernel_values() {
        let s = 2.0;
        let h = ramp_kernel(6, s);
        assert_eq!(h[0], 1.0 / 16.0);
        assert_eq!(h[2], 0.0);
        assert_eq!(h[4], 0.0);
        let pi = std::f64::consts::PI;
        assert!((h[1] - (-1.0 / (pi * 2.0).powi(2))).abs() < 1e-15);
        assert!((h[3] - (-1.0 / (pi * 3.0 * 2.0).powi(2))).abs() < 1e-15);
    }

    /// Direct O(n^2) convolution reference.
    fn conv_direct(row: &[f64], spacing: f64) -> Vec<f64> {
        let n = row.len();
        let h = ramp_kernel(n, spacing);
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|m| row[m] * h[i.abs_diff(m)])
                    .sum()
            })
            .collect()
    }

    #[test]
    fn ramp_impulse_reproduces_kernel() {
        let n = 37;
        let mut row = vec![0.0; n];
        row[0] = 1.0;
        let out = ramp_filter_row(&row, 2.0);
        let h = ramp_kernel(n, 2.0);
        for i in 0..n {
            assert!((out[i] - h[i]).abs() <= 1e-10, "lag {i}");
        }
        // impulse in the middle: symmetric kernel around it
        let mut row = vec![0.0; n];
        row[18] = 1.0;
        let out = ramp_filter_row(&row, 2.0);
        for i in 0..n {
            assert!((out[i] - h[i.abs_diff(18)]).abs() <= 1e-10);
        }
    }

    #[test]
    fn ramp_constant_row_matches_direct_convolution() {
        let row = vec![3.5; 64];
        let got = ramp_filter_row(&row, 2.0);
        let want = conv_direct(&row, 2.0);
        for i in 0..row.len() {
            assert!((got[i] - want[i]).abs() <= 1e-6, "index {i}");
        }
    }

    #[test]
    fn ramp_is_linear() {
        let mut rng = crate::rng::SplitMix64::new(2);
        let r1: Vec<f64> = (0..48).map(|_| rng.next_f64()).collect();
        let r2: Vec<f64> = (0..48).map(|_| rng.next_f64()).collect();
        let combo: Vec<f64> = r1.iter().zip(&r2).map(|(a, b)| 2.0 * a - 3.0 * b).collect();
        let (f1, f2, fc) = (
            ramp_filter_row(&r1, 1.0),
            ramp_filter_row(&r2, 1.0),
            ramp_filter_row(&combo, 1.0),
        );
        for i in 0..48 {
            assert!((fc[i] - (2.0 * f1[i] - 3.0 * f2[i])).abs() <= 1e-10);
        }
    }

    #[test]
    fn ramp_degenerate_lengths() {
        assert_eq!(ramp_filter_row(&[5.0], 1.0), vec![5.0]);
        assert!(ramp_filter_row(&[], 1.0).is_empty());
    }

    #[test]
    fn fbp_disk_recovers_interior_value() {
        let geom = FanBeamGeometry::default();
        let disk = synth::disk_phantom(512, 1.0, 100.0, 0.5).unwrap();
        let sino = forward_project(&disk, &geom).unwrap();
        let rec = fbp(&sino, &geom).unwrap();
        let mut mean = 0.0;
        for r in 251..261 {
            for c in 251..261 {
                mean += rec.at(r, c);
            }
        }
        mean /= 100.0;
        assert!(
            (0.49..=0.51).contains(&mean),
            "central block mean {mean}, expected within [0.49, 0.51]"
        );
    }

    #[test]
    fn fbp_roundtrip_shepp_logan_128() {
        let geom = FanBeamGeometry::scaled_to(128).unwrap();
        let phantom = synth::shepp_logan(128).unwrap();
        let sino = forward_project(&phantom, &geom).unwrap();
        let rec = fbp(&sino, &geom).unwrap();
        let ctr = (128.0 - 1.0) / 2.0;
        let r_max = 0.9 * 64.0;
        let (mut num, mut den) = (0.0, 0.0);
        for r in 0..128 {
            for c in 0..128 {
                let (dy, dx) = (r as f64 - ctr, c as f64 - ctr);
                if (dx * dx + dy * dy).sqrt() <= r_max {
                    num += (rec.at(r, c) - phantom.at(r, c)).powi(2);
                    den += phantom.at(r, c).powi(2);
                }
            }
        }
        let rel = (num / den).sqrt();
        assert!(rel <= 0.06, "interior relative L2 error {rel}");
    }
}

//! Gradients, the Gaussian-smoothed structure tensor, its closed-form eigen
//! system and the uniform/edge/corner pixel classification.
//!
//! Conventions: x is the column direction, y the row direction; every
//! convolution extends the image by replication at the borders.

use crate::interp::StbParams;
use crate::raster::RasterImage;
use crate::{Error, Result};

/// Horizontal/vertical derivative estimates plus the gradient magnitude
/// normalized to [0,100] over the image (all zeros for a constant image).
#[derive(Debug, Clone)]
pub struct GradientField {
    pub width: usize,
    pub height: usize,
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
    pub gmag_norm: Vec<f64>,
}

/// Mask pair used for the derivative estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientMask {
    /// Central differences (±1/2), the default.
    #[default]
    Central,
    /// 3×3 Sobel masks scaled by 1/8 so both options stay on derivative scale.
    Sobel,
}

/// Per-pixel symmetric 2×2 tensor components.
#[derive(Debug, Clone)]
pub struct TensorField {
    pub width: usize,
    pub height: usize,
    pub t11: Vec<f64>,
    pub t12: Vec<f64>,
    pub t22: Vec<f64>,
    pub sigma: f64,
}

/// Eigenvalues (d ≤ dperp) and the unit tangent eigenvector per pixel.
/// The tangent belongs to the smaller eigenvalue and points along the edge;
/// the normal direction is its 90° rotation and is not stored.
#[derive(Debug, Clone)]
pub struct EigenField {
    pub width: usize,
    pub height: usize,
    pub d: Vec<f64>,
    pub dperp: Vec<f64>,
    pub tangent_x: Vec<f64>,
    pub tangent_y: Vec<f64>,
}

impl EigenField {
    #[inline]
    pub fn tangent(&self, row: usize, col: usize) -> (f64, f64) {
        let k = row * self.width + col;
        (self.tangent_x[k], self.tangent_y[k])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelClass {
    Uniform,
    Edge,
    Corner,
}

#[derive(Debug, Clone)]
pub struct PixelClassMap {
    pub width: usize,
    pub height: usize,
    pub classes: Vec<PixelClass>,
}

impl PixelClassMap {
    #[inline]
    pub fn class(&self, row: usize, col: usize) -> PixelClass {
        self.classes[row * self.width + col]
    }

    /// Debug visualization: Uniform=0, Edge=128, Corner=255.
    pub fn to_image(&self) -> RasterImage {
        let data = self
            .classes
            .iter()
            .map(|c| match c {
                PixelClass::Uniform => 0.0,
                PixelClass::Edge => 128.0 / 255.0,
                PixelClass::Corner => 1.0,
            })
            .collect();
        RasterImage::new(self.width, self.height, 1, data).expect("valid by construction")
    }
}

#[inline]
fn clamp_idx(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

/// Derivative estimates with replicate boundary handling.
pub fn compute_gradients(image: &RasterImage, mask: GradientMask) -> Result<GradientField> {
    if image.channels() != 1 {
        return Err(Error::Parameter("gradients require a single-channel image".into()));
    }
    let (w, h) = (image.width(), image.height());
    if w < 2 || h < 2 {
        return Err(Error::Dimension(format!("image {w}x{h} too small for gradients")));
    }
    let px = |r: isize, c: isize| image.at(clamp_idx(r, h), clamp_idx(c, w));
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for r in 0..h {
        for c in 0..w {
            let (ri, ci) = (r as isize, c as isize);
            let (dx, dy) = match mask {
                GradientMask::Central => (
                    (px(ri, ci + 1) - px(ri, ci - 1)) / 2.0,
                    (px(ri + 1, ci) - px(ri - 1, ci)) / 2.0,
                ),
                GradientMask::Sobel => (
                    ((px(ri - 1, ci + 1) - px(ri - 1, ci - 1))
                        + 2.0 * (px(ri, ci + 1) - px(ri, ci - 1))
                        + (px(ri + 1, ci + 1) - px(ri + 1, ci - 1)))
                        / 8.0,
                    ((px(ri + 1, ci - 1) - px(ri - 1, ci - 1))
                        + 2.0 * (px(ri + 1, ci) - px(ri - 1, ci))
                        + (px(ri + 1, ci + 1) - px(ri - 1, ci + 1)))
                        / 8.0,
                ),
            };
            gx[r * w + c] = dx;
            gy[r * w + c] = dy;
        }
    }
    let mag: Vec<f64> = gx.iter().zip(&gy).map(|(x, y)| x.hypot(*y)).collect();
    let max = mag.iter().cloned().fold(0.0, f64::max);
    let gmag_norm = if max > 0.0 {
        mag.iter().map(|m| 100.0 * m / max).collect()
    } else {
        mag
    };
    Ok(GradientField { width: w, height: h, gx, gy, gmag_norm })
}

/// Samples exp(−x²/2σ²) at integer offsets in [−r, r] with r = ceil(3σ),
/// normalized to sum to 1.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0) {
        return Err(Error::Parameter(format!("sigma must be > 0, got {sigma}")));
    }
    let r = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    Ok(k)
}

/// Separable 2-D convolution (rows then columns) with replicate extension.
/// The kernel is assumed normalized and of odd length.
pub fn smooth(field: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    debug_assert_eq!(field.len(), width * height);
    let r = (kernel.len() / 2) as isize;
    let mut rows = vec![0.0; field.len()];
    for i in 0..height {
        let base = i * width;
        for j in 0..width {
            let mut acc = 0.0;
            for (t, kv) in kernel.iter().enumerate() {
                let jj = clamp_idx(j as isize + t as isize - r, width);
                acc += kv * field[base + jj];
            }
            rows[base + j] = acc;
        }
    }
    let mut out = vec![0.0; field.len()];
    for j in 0..width {
        for i in 0..height {
            let mut acc = 0.0;
            for (t, kv) in kernel.iter().enumerate() {
                let ii = clamp_idx(i as isize + t as isize - r, height);
                acc += kv * rows[ii * width + j];
            }
            out[i * width + j] = acc;
        }
    }
    out
}

/// Gaussian-smoothed outer products of the gradient:
/// t11 = gx²⊛G, t12 = gx·gy⊛G, t22 = gy²⊛G.
pub fn compute_structure_tensor(grads: &GradientField, sigma: f64) -> Result<TensorField> {
    let kernel = gaussian_kernel(sigma)?;
    let (w, h) = (grads.width, grads.height);
    let sq = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x * y).collect()
    };
    Ok(TensorField {
        width: w,
        height: h,
        t11: smooth(&sq(&grads.gx, &grads.gx), w, h, &kernel),
        t12: smooth(&sq(&grads.gx, &grads.gy), w, h, &kernel),
        t22: smooth(&sq(&grads.gy, &grads.gy), w, h, &kernel),
        sigma,
    })
}

/// Closed-form eigen system of each symmetric 2×2 tensor.
///
/// The tangent is the raw eigenvector of the smaller eigenvalue,
/// `(t22 − t11 + disc, −2·t12)`, normalized. When that vector degenerates to
/// (numerically) zero the tangent falls back to the weaker-gradient axis:
/// (1,0) when t11 ≤ t22, else (0,1). Tangent sign is not normalized; every
/// consumer uses |dot| so sign is immaterial.
pub fn eigen_decompose(tensor: &TensorField) -> Result<EigenField> {
    let n = tensor.t11.len();
    let mut d = vec![0.0; n];
    let mut dperp = vec![0.0; n];
    let mut tx = vec![0.0; n];
    let mut ty = vec![0.0; n];
    for k in 0..n {
        let (t11, t12, t22) = (tensor.t11[k], tensor.t12[k], tensor.t22[k]);
        let trace = t11 + t22;
        let det = t11 * t22 - t12 * t12;
        let tol = 1e-9 * (1.0 + trace * trace);
        if t11 < -tol || t22 < -tol || det < -tol {
            return Err(Error::Numerical(format!(
                "structure tensor not PSD at pixel {k}: t11={t11} t12={t12} t22={t22}"
            )));
        }
        let disc = ((t22 - t11) * (t22 - t11) + 4.0 * t12 * t12).sqrt();
        d[k] = 0.5 * (trace - disc);
        dperp[k] = 0.5 * (trace + disc);
        let vx = t22 - t11 + disc;
        let vy = -2.0 * t12;
        let norm = vx.hypot(vy);
        if norm < 1e-12 * trace.max(1.0) {
            if t11 <= t22 {
                tx[k] = 1.0;
            } else {
                ty[k] = 1.0;
            }
        } else {
            tx[k] = vx / norm;
            ty[k] = vy / norm;
        }
    }
    Ok(EigenField {
        width: tensor.width,
        height: tensor.height,
        d,
        dperp,
        tangent_x: tx,
        tangent_y: ty,
    })
}

/// Uniform where the normalized gradient magnitude falls below the threshold;
/// among the rest, a corner needs both a smaller eigenvalue well above zero
/// (relative to the largest dperp in the image) and an eigenvalue ratio above
/// the corner ratio. Everything else is an edge pixel.
pub fn classify_pixels(
    grads: &GradientField,
    eig: &EigenField,
    params: &StbParams,
) -> PixelClassMap {
    let dperp_max = eig.dperp.iter().cloned().fold(0.0, f64::max);
    let classes = grads
        .gmag_norm
        .iter()
        .enumerate()
        .map(|(k, g)| {
            // a threshold at the top of the scale disables the edge path
            // entirely, including the pixels that attain exactly 100
            if *g < params.threshold || params.threshold >= 100.0 {
                PixelClass::Uniform
            } else {
                let ratio = if eig.dperp[k] > 0.0 { eig.d[k] / eig.dperp[k] } else { 0.0 };
                if eig.d[k] > params.corner_abs * dperp_max && ratio > params.corner_ratio {
                    PixelClass::Corner
                } else {
                    PixelClass::Edge
                }
            }
        })
        .collect();
    PixelClassMap { width: grads.width, height: grads.height, classes }
}

/// Full analysis chain for a single-channel image.
pub fn analyze(image: &RasterImage, params: &StbParams) -> Result<(EigenField, PixelClassMap)> {
    let grads = compute_gradients(image, params.gradient_mask)?;
    let tensor = compute_structure_tensor(&grads, params.sigma)?;
    let eig = eigen_decompose(&tensor)?;
    let classes = classify_pixels(&grads, &eig, params);
    Ok((eig, classes))
}

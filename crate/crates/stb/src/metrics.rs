//! Quality measures: MSE, PSNR, edge PSNR over Sobel magnitude maps, and the
//! structural similarity index.

use crate::raster::RasterImage;
use crate::{Error, Result};

/// Flat bundle of the measures for one image pair.
///
/// Serializes to a flat JSON object; infinite PSNR values are encoded as the
/// string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub mse: f64,
    pub psnr_db: f64,
    pub epsnr_db: f64,
    pub ssim: f64,
    pub pixel_count: usize,
}

fn json_db(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else {
        serde_json::json!("inf")
    }
}

impl MetricReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "mse": self.mse,
            "psnr_db": json_db(self.psnr_db),
            "epsnr_db": json_db(self.epsnr_db),
            "ssim": self.ssim,
            "pixel_count": self.pixel_count,
        })
    }
}

fn check_same_shape(x: &RasterImage, y: &RasterImage) -> Result<()> {
    if x.width() != y.width() || x.height() != y.height() || x.channels() != y.channels() {
        return Err(Error::Metric(format!(
            "shape mismatch: {}x{}x{} vs {}x{}x{}",
            x.width(),
            x.height(),
            x.channels(),
            y.width(),
            y.height(),
            y.channels()
        )));
    }
    Ok(())
}

/// Mean of squared per-sample differences.
pub fn mse(x: &RasterImage, y: &RasterImage) -> Result<f64> {
    check_same_shape(x, y)?;
    let n = x.data().len() as f64;
    Ok(x.data()
        .iter()
        .zip(y.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
}

#[inline]
fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

/// 10·log10(L²/MSE); +∞ when the images are identical.
pub fn psnr(x: &RasterImage, y: &RasterImage, peak: f64) -> Result<f64> {
    Ok(psnr_from_mse(mse(x, y)?, peak))
}

/// Gradient magnitude from the standard (unnormalized) 3×3 Sobel masks with
/// replicate boundaries.
pub fn sobel_magnitude(image: &RasterImage) -> Result<Vec<f64>> {
    if image.channels() != 1 {
        return Err(Error::Metric("sobel_magnitude expects a single-channel image".into()));
    }
    let (w, h) = (image.width(), image.height());
    if w < 3 || h < 3 {
        return Err(Error::Dimension(format!("image {w}x{h} too small for Sobel")));
    }
    let px = |r: isize, c: isize| {
        image.at(
            r.clamp(0, h as isize - 1) as usize,
            c.clamp(0, w as isize - 1) as usize,
        )
    };
    let mut out = vec![0.0; w * h];
    for r in 0..h as isize {
        for c in 0..w as isize {
            // row/column differences grouped so constant regions cancel exactly
            let gx = (px(r - 1, c + 1) - px(r - 1, c - 1))
                + 2.0 * (px(r, c + 1) - px(r, c - 1))
                + (px(r + 1, c + 1) - px(r + 1, c - 1));
            let gy = (px(r + 1, c - 1) - px(r - 1, c - 1))
                + 2.0 * (px(r + 1, c) - px(r - 1, c))
                + (px(r + 1, c + 1) - px(r - 1, c + 1));
            out[r as usize * w + c as usize] = gx.hypot(gy);
        }
    }
    Ok(out)
}

/// PSNR between the Sobel magnitude maps of the two images. The peak is the
/// maximum magnitude of the first (original) image's map, which makes the
/// measure asymmetric in its arguments.
pub fn epsnr(original: &RasterImage, reconstructed: &RasterImage) -> Result<f64> {
    check_same_shape(original, reconstructed)?;
    let ex = sobel_magnitude(original)?;
    let ey = sobel_magnitude(reconstructed)?;
    let n = ex.len() as f64;
    let m = ex.iter().zip(&ey).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n;
    let peak = ex.iter().cloned().fold(0.0, f64::max);
    Ok(psnr_from_mse(m, peak))
}

/// Valid-position separable convolution with a symmetric 1-D kernel; output
/// shrinks by the kernel radius on every side.
fn valid_filter(field: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let k = kernel.len();
    let (ow, oh) = (width - k + 1, height - k + 1);
    let mut rows = vec![0.0; ow * height];
    for i in 0..height {
        for j in 0..ow {
            let mut acc = 0.0;
            for (t, kv) in kernel.iter().enumerate() {
                acc += kv * field[i * width + j + t];
            }
            rows[i * ow + j] = acc;
        }
    }
    let mut out = vec![0.0; ow * oh];
    for i in 0..oh {
        for j in 0..ow {
            let mut acc = 0.0;
            for (t, kv) in kernel.iter().enumerate() {
                acc += kv * rows[(i + t) * ow + j];
            }
            out[i * ow + j] = acc;
        }
    }
    out
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01; // (0.01·L)², L = 1
const SSIM_C2: f64 = 0.03 * 0.03;

/// Mean structural similarity over an 11×11 Gaussian window (σ = 1.5),
/// evaluated at every fully-valid window position.
pub fn ssim(x: &RasterImage, y: &RasterImage) -> Result<f64> {
    check_same_shape(x, y)?;
    if x.channels() != 1 {
        return Err(Error::Metric("ssim expects single-channel images".into()));
    }
    let (w, h) = (x.width(), x.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::Dimension(format!(
            "image {w}x{h} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )));
    }
    let r = (SSIM_WINDOW / 2) as isize;
    let mut kernel: Vec<f64> = (-r..=r)
        .map(|t| (-(t * t) as f64 / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let sum: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|v| *v /= sum);

    let xd = x.data();
    let yd = y.data();
    let prod = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p * q).collect() };
    let mu_x = valid_filter(xd, w, h, &kernel);
    let mu_y = valid_filter(yd, w, h, &kernel);
    let m_xx = valid_filter(&prod(xd, xd), w, h, &kernel);
    let m_yy = valid_filter(&prod(yd, yd), w, h, &kernel);
    let m_xy = valid_filter(&prod(xd, yd), w, h, &kernel);

    let mut acc = 0.0;
    for k in 0..mu_x.len() {
        let (mx, my) = (mu_x[k], mu_y[k]);
        let var_x = m_xx[k] - mx * mx;
        let var_y = m_yy[k] - my * my;
        let cov = m_xy[k] - mx * my;
        acc += ((2.0 * mx * my + SSIM_C1) * (2.0 * cov + SSIM_C2))
            / ((mx * mx + my * my + SSIM_C1) * (var_x + var_y + SSIM_C2));
    }
    Ok(acc / mu_x.len() as f64)
}

/// All measures for one (original, reconstructed) grayscale pair with L = 1.
pub fn report(original: &RasterImage, reconstructed: &RasterImage) -> Result<MetricReport> {
    let m = mse(original, reconstructed)?;
    Ok(MetricReport {
        mse: m,
        psnr_db: psnr_from_mse(m, 1.0),
        epsnr_db: epsnr(original, reconstructed)?,
        ssim: ssim(original, reconstructed)?,
        pixel_count: original.data().len(),
    })
}

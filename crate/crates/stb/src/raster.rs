//! Image container, PGM/PNG file I/O and the experiment-preparation
//! transforms (luma conversion, naive decimation, noise injection, cropping).
//!
//! Intensities live on the real [0,1] scale internally; 8-bit files are
//! mapped by division by 255 on load and `round(v * 255)` on save.

use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_distr::Distribution;

use crate::{Error, Result};

/// Row-major, channel-interleaved grid of intensities in [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl RasterImage {
    /// Builds an image from raw samples. `data.len()` must equal
    /// `width * height * channels`, every sample must be in [0,1] and
    /// `channels` must be 1 or 3.
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension("image dimensions must be >= 1".into()));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Parameter(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::Dimension(format!(
                "data length {} does not match {}x{}x{}",
                data.len(),
                width,
                height,
                channels
            )));
        }
        if data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Parameter("intensity outside [0,1]".into()));
        }
        Ok(Self { width, height, channels, data })
    }

    /// Single-channel image filled by `f(row, col)`; values are clamped to [0,1].
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let data = (0..width * height)
            .map(|k| f(k / width, k % width).clamp(0.0, 1.0))
            .collect();
        Self { width, height, channels: 1, data }
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Sample at (row, col, channel).
    #[inline]
    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[(row * self.width + col) * self.channels + channel]
    }

    /// Single-channel shorthand for [`get`](Self::get).
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        debug_assert_eq!(self.channels, 1);
        self.data[row * self.width + col]
    }

    /// Luma conversion. 3-channel input collapses to 0.299R + 0.587G + 0.114B;
    /// single-channel input is returned unchanged.
    pub fn to_grayscale(&self) -> RasterImage {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(3)
            .map(|p| (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]).clamp(0.0, 1.0))
            .collect();
        RasterImage { width: self.width, height: self.height, channels: 1, data }
    }

    /// Decimation without an anti-aliasing prefilter: keeps rows and columns
    /// 0, factor, 2·factor, … so the retained lattice reproduces the source
    /// exactly. Output dimensions are `ceil(dim / factor)`.
    pub fn naive_downsample(&self, factor: usize) -> Result<RasterImage> {
        if factor < 2 {
            return Err(Error::Parameter(format!("downsample factor must be >= 2, got {factor}")));
        }
        if self.width < factor || self.height < factor {
            return Err(Error::Dimension(format!(
                "image {}x{} smaller than downsample factor {}",
                self.width, self.height, factor
            )));
        }
        let ow = self.width.div_ceil(factor);
        let oh = self.height.div_ceil(factor);
        let mut data = Vec::with_capacity(ow * oh * self.channels);
        for r in 0..oh {
            for c in 0..ow {
                for ch in 0..self.channels {
                    data.push(self.get(r * factor, c * factor, ch));
                }
            }
        }
        Ok(RasterImage { width: ow, height: oh, channels: self.channels, data })
    }

    /// Adds an independent N(0, variance) sample to every intensity, then
    /// clamps back to [0,1]. The same seed always yields the same output.
    pub fn add_gaussian_noise(&self, variance: f64, seed: u64) -> Result<RasterImage> {
        if variance < 0.0 {
            return Err(Error::Parameter(format!("noise variance must be >= 0, got {variance}")));
        }
        if variance == 0.0 {
            return Ok(self.clone());
        }
        let normal = rand_distr::Normal::new(0.0, variance.sqrt())
            .map_err(|e| Error::Parameter(format!("bad noise distribution: {e}")))?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data = self
            .data
            .iter()
            .map(|v| (v + normal.sample(&mut rng)).clamp(0.0, 1.0))
            .collect();
        Ok(RasterImage { width: self.width, height: self.height, channels: self.channels, data })
    }

    /// Top-left `rows`×`cols` sub-image.
    pub fn crop(&self, rows: usize, cols: usize) -> Result<RasterImage> {
        if rows == 0 || cols == 0 || rows > self.height || cols > self.width {
            return Err(Error::Dimension(format!(
                "cannot crop {}x{} out of {}x{}",
                rows, cols, self.height, self.width
            )));
        }
        let mut data = Vec::with_capacity(rows * cols * self.channels);
        for r in 0..rows {
            let start = r * self.width * self.channels;
            data.extend_from_slice(&self.data[start..start + cols * self.channels]);
        }
        Ok(RasterImage { width: cols, height: rows, channels: self.channels, data })
    }

    /// 8-bit quantization used by the writers: round half up, clamp to [0,255].
    pub fn to_bytes(&self) -> Vec<u8> {
        self.data.iter().map(|v| quantize(*v)).collect()
    }
}

#[inline]
fn quantize(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Loads a PGM (P2/P5, maxval 255) or PNG (8-bit gray/RGB) file.
pub fn load_image(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    match extension(path)?.as_str() {
        "pgm" => load_pgm(path),
        "png" => load_png(path),
        other => Err(Error::UnsupportedFormat(format!("unknown extension .{other}"))),
    }
}

/// Saves as PGM (single channel, binary P5) or PNG depending on the extension.
pub fn save_image(image: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match extension(path)?.as_str() {
        "pgm" => save_pgm(image, path),
        "png" => save_png(image, path),
        other => Err(Error::UnsupportedFormat(format!("unknown extension .{other}"))),
    }
}

fn extension(path: &Path) -> Result<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .ok_or_else(|| Error::UnsupportedFormat(format!("no file extension on {}", path.display())))
}

fn pgm_err(reason: impl Into<String>) -> Error {
    Error::Decode { format: "PGM".into(), reason: reason.into() }
}

fn load_pgm(path: &Path) -> Result<RasterImage> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut cursor = 0usize;

    let magic = next_token(&bytes, &mut cursor).ok_or_else(|| pgm_err("missing magic number"))?;
    let binary = match magic.as_str() {
        "P2" => false,
        "P5" => true,
        other => return Err(pgm_err(format!("unsupported magic {other}"))),
    };
    let width: usize = parse_header_int(&bytes, &mut cursor, "width")?;
    let height: usize = parse_header_int(&bytes, &mut cursor, "height")?;
    let maxval: usize = parse_header_int(&bytes, &mut cursor, "maxval")?;
    if maxval != 255 {
        return Err(pgm_err(format!("only maxval 255 supported, got {maxval}")));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| pgm_err("dimension overflow"))?;

    let samples: Vec<u8> = if binary {
        // exactly one whitespace byte separates the header from raster data
        let raster = &bytes[cursor..];
        if raster.len() < n {
            return Err(pgm_err(format!("expected {n} raster bytes, found {}", raster.len())));
        }
        raster[..n].to_vec()
    } else {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let v: usize = parse_header_int(&bytes, &mut cursor, "sample")?;
            if v > maxval {
                return Err(pgm_err(format!("sample {v} exceeds maxval {maxval}")));
            }
            out.push(v as u8);
        }
        out
    };
    let data = samples.iter().map(|b| *b as f64 / 255.0).collect();
    RasterImage::new(width, height, 1, data)
}

/// Reads the next whitespace-delimited token, skipping `#` comment lines.
/// For binary PGM, leaves the cursor one byte past the token's terminator.
fn next_token(bytes: &[u8], cursor: &mut usize) -> Option<String> {
    loop {
        while *cursor < bytes.len() && bytes[*cursor].is_ascii_whitespace() {
            *cursor += 1;
        }
        if *cursor < bytes.len() && bytes[*cursor] == b'#' {
            while *cursor < bytes.len() && bytes[*cursor] != b'\n' {
                *cursor += 1;
            }
            continue;
        }
        break;
    }
    if *cursor >= bytes.len() {
        return None;
    }
    let start = *cursor;
    while *cursor < bytes.len() && !bytes[*cursor].is_ascii_whitespace() {
        *cursor += 1;
    }
    let token = String::from_utf8_lossy(&bytes[start..*cursor]).into_owned();
    if *cursor < bytes.len() {
        *cursor += 1; // consume the single terminating whitespace byte
    }
    Some(token)
}

fn parse_header_int(bytes: &[u8], cursor: &mut usize, what: &str) -> Result<usize> {
    next_token(bytes, cursor)
        .ok_or_else(|| pgm_err(format!("truncated header: missing {what}")))?
        .parse()
        .map_err(|_| pgm_err(format!("invalid {what}")))
}

fn save_pgm(image: &RasterImage, path: &Path) -> Result<()> {
    if image.channels != 1 {
        return Err(Error::UnsupportedFormat(
            "PGM stores single-channel images only; convert to grayscale or use PNG".into(),
        ));
    }
    let mut f = std::fs::File::create(path)?;
    write!(f, "P5\n{} {}\n255\n", image.width, image.height)?;
    f.write_all(&image.to_bytes())?;
    Ok(())
}

fn load_png(path: &Path) -> Result<RasterImage> {
    let decoded = image::ImageReader::open(path)?
        .decode()
        .map_err(|e| Error::Decode { format: "PNG".into(), reason: e.to_string() })?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    let (channels, bytes): (usize, Vec<u8>) = match decoded {
        image::DynamicImage::ImageLuma8(buf) => (1, buf.into_raw()),
        image::DynamicImage::ImageRgb8(buf) => (3, buf.into_raw()),
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "PNG color type {:?}; only 8-bit grayscale and RGB are supported",
                other.color()
            )))
        }
    };
    let data = bytes.iter().map(|b| *b as f64 / 255.0).collect();
    RasterImage::new(width, height, channels, data)
}

fn save_png(image: &RasterImage, path: &Path) -> Result<()> {
    let bytes = image.to_bytes();
    let (w, h) = (image.width as u32, image.height as u32);
    let save_err = |e: image::ImageError| Error::Decode { format: "PNG".into(), reason: e.to_string() };
    match image.channels {
        1 => image::GrayImage::from_raw(w, h, bytes)
            .expect("buffer sized by construction")
            .save(path)
            .map_err(save_err),
        _ => image::RgbImage::from_raw(w, h, bytes)
            .expect("buffer sized by construction")
            .save(path)
            .map_err(save_err),
    }
}

/// Noise stream for image `index` of a benchmark run seeded with `seed`.
pub fn derive_image_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

//! Benchmark harness: for every corpus image, downsample by 2, optionally add
//! Gaussian noise to the downsampled image, reconstruct with each requested
//! method and measure against the (cropped) original.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::interp::{bilinear_upscale, stb_upscale, StbParams};
use crate::metrics::{self, MetricReport};
use crate::raster::{self, RasterImage};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Stb,
    Bilinear,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Stb => "stb",
            Method::Bilinear => "bilinear",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stb" => Ok(Method::Stb),
            "bilinear" => Ok(Method::Bilinear),
            other => Err(Error::Parameter(format!("unknown method '{other}'"))),
        }
    }
}

/// One benchmark run over a corpus of image files.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub corpus: Vec<PathBuf>,
    pub params: StbParams,
    /// Variance of the zero-mean Gaussian noise added to the downsampled
    /// image, on the [0,1] scale. 0 disables noise.
    pub noise_variance: f64,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// When set, the per-image classification map is dumped as a PGM here.
    pub dump_classes_dir: Option<PathBuf>,
}

/// One (image, method) result. `report` is absent when the image failed.
#[derive(Debug, Clone)]
pub struct BenchmarkRow {
    pub image: String,
    pub method: String,
    pub report: Option<MetricReport>,
    pub wall_time: f64,
    pub error: Option<String>,
}

/// Crops `original` down to `target`'s dimensions when each axis is larger by
/// at most one pixel; anything else is a metric error.
pub fn crop_to_match(original: &RasterImage, target_h: usize, target_w: usize) -> Result<RasterImage> {
    let ok = |orig: usize, t: usize| orig == t || orig == t + 1;
    if !ok(original.height(), target_h) || !ok(original.width(), target_w) {
        return Err(Error::Metric(format!(
            "original {}x{} incompatible with reconstruction {}x{} (only a 1-pixel top-left crop is applied)",
            original.height(),
            original.width(),
            target_h,
            target_w
        )));
    }
    original.crop(target_h, target_w)
}

fn image_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn process_image(spec: &ExperimentSpec, index: usize, path: &Path) -> Result<Vec<BenchmarkRow>> {
    let label = image_label(path);
    let original = raster::load_image(path)?.to_grayscale();
    let lr = original.naive_downsample(2)?;
    let lr = if spec.noise_variance > 0.0 {
        lr.add_gaussian_noise(spec.noise_variance, raster::derive_image_seed(spec.seed, index))?
    } else {
        lr
    };
    if let Some(dir) = &spec.dump_classes_dir {
        let (_, classes) = crate::tensor::analyze(&lr, &spec.params)?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        raster::save_image(&classes.to_image(), dir.join(format!("{stem}.classes.pgm")))?;
    }
    let mut rows = Vec::with_capacity(spec.methods.len());
    for method in &spec.methods {
        let start = Instant::now();
        let hr = match method {
            Method::Stb => stb_upscale(&lr, &spec.params)?,
            Method::Bilinear => bilinear_upscale(&lr)?,
        };
        let wall_time = start.elapsed().as_secs_f64();
        let reference = crop_to_match(&original, hr.height(), hr.width())?;
        let report = metrics::report(&reference, &hr)?;
        rows.push(BenchmarkRow {
            image: label.clone(),
            method: method.name().into(),
            report: Some(report),
            wall_time,
            error: None,
        });
    }
    Ok(rows)
}

/// Runs the benchmark. Images may be processed concurrently; rows come back
/// in corpus order then method order, and every noise stream depends only on
/// (seed, image index) so threading never changes the metric values. A failed
/// image yields error rows for each requested method and the run continues.
pub fn run_benchmark(spec: &ExperimentSpec) -> Result<Vec<BenchmarkRow>> {
    if spec.corpus.is_empty() {
        return Err(Error::Parameter("benchmark corpus is empty".into()));
    }
    spec.params.validate()?;
    if spec.methods.is_empty() {
        return Err(Error::Parameter("no methods requested".into()));
    }
    let per_image: Vec<Vec<BenchmarkRow>> = spec
        .corpus
        .par_iter()
        .enumerate()
        .map(|(index, path)| {
            process_image(spec, index, path).unwrap_or_else(|e| {
                let label = image_label(path);
                spec.methods
                    .iter()
                    .map(|m| BenchmarkRow {
                        image: label.clone(),
                        method: m.name().into(),
                        report: None,
                        wall_time: 0.0,
                        error: Some(e.to_string()),
                    })
                    .collect()
            })
        })
        .collect();
    Ok(per_image.into_iter().flatten().collect())
}

/// True when every row carries a report.
pub fn all_succeeded(rows: &[BenchmarkRow]) -> bool {
    rows.iter().all(|r| r.error.is_none())
}

fn fmt_metric(v: f64) -> String {
    // f64 Display renders infinities as "inf", matching the report schema
    format!("{v}")
}

/// CSV with header `image,method,mse,psnr_db,epsnr_db,ssim,time_sec`.
/// Failed rows leave the metric fields empty.
pub fn write_csv(rows: &[BenchmarkRow], out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["image", "method", "mse", "psnr_db", "epsnr_db", "ssim", "time_sec"])
        .map_err(csv_err)?;
    for row in rows {
        let record = match &row.report {
            Some(rep) => [
                row.image.clone(),
                row.method.clone(),
                fmt_metric(rep.mse),
                fmt_metric(rep.psnr_db),
                fmt_metric(rep.epsnr_db),
                fmt_metric(rep.ssim),
                fmt_metric(row.wall_time),
            ],
            None => [
                row.image.clone(),
                row.method.clone(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ],
        };
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn rows_to_json(rows: &[BenchmarkRow]) -> serde_json::Value {
    serde_json::Value::Array(
        rows.iter()
            .map(|row| match (&row.report, &row.error) {
                (Some(rep), _) => {
                    let mut obj = rep.to_json();
                    let map = obj.as_object_mut().expect("report is an object");
                    map.insert("image".into(), serde_json::json!(row.image));
                    map.insert("method".into(), serde_json::json!(row.method));
                    map.insert("time_sec".into(), serde_json::json!(row.wall_time));
                    obj
                }
                (None, err) => serde_json::json!({
                    "image": row.image,
                    "method": row.method,
                    "error": err.clone().unwrap_or_default(),
                }),
            })
            .collect(),
    )
}

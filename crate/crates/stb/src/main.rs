//! Command-line front end: upscale a single image, evaluate a reconstruction
//! against its original, or benchmark a corpus.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stb::bench::{self, ExperimentSpec, Method};
use stb::interp::{self, StbParams, WeightAnchor};
use stb::metrics;
use stb::raster;
use stb::tensor::GradientMask;

#[derive(Parser)]
#[command(name = "stb", about = "Structure-tensor-based edge-directed 2x image upscaling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, ValueEnum)]
enum MaskArg {
    Central,
    Sobel,
}

#[derive(Clone, ValueEnum)]
enum AnchorArg {
    Site,
    Nearest,
}

#[derive(Clone, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Gaussian scale of the structure-tensor smoothing (pixels)
    #[arg(long, default_value_t = 2.0)]
    sigma: f64,
    /// Neighborhood half-size for the edge-directed average
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Distance-decay rate of the weight
    #[arg(long, default_value_t = 5.0)]
    beta: f64,
    /// Alignment-gain rate of the weight
    #[arg(long, default_value_t = 10.0)]
    gamma: f64,
    /// Uniform-region threshold on the [0,100] gradient scale
    #[arg(long, default_value_t = 20.0)]
    threshold: f64,
    /// Corner rule: minimum eigenvalue ratio
    #[arg(long, default_value_t = 0.5)]
    corner_ratio: f64,
    /// Corner rule: minimum smaller eigenvalue relative to the largest dperp
    #[arg(long, default_value_t = 0.01)]
    corner_abs: f64,
    /// Gradient mask pair
    #[arg(long, value_enum, default_value = "central")]
    mask: MaskArg,
    /// Weight anchor: the interpolation site itself or its nearest pixel
    #[arg(long, value_enum, default_value = "site")]
    anchor: AnchorArg,
}

impl ParamArgs {
    fn to_params(&self) -> StbParams {
        StbParams {
            sigma: self.sigma,
            d: self.d,
            beta: self.beta,
            gamma: self.gamma,
            threshold: self.threshold,
            corner_ratio: self.corner_ratio,
            corner_abs: self.corner_abs,
            gradient_mask: match self.mask {
                MaskArg::Central => GradientMask::Central,
                MaskArg::Sobel => GradientMask::Sobel,
            },
            anchor: match self.anchor {
                AnchorArg::Site => WeightAnchor::Site,
                AnchorArg::Nearest => WeightAnchor::Nearest,
            },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Upscale one image by a factor of 2
    Upscale {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Keep three channels, sharing one luma-derived tangent field
        #[arg(long)]
        rgb: bool,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Print the quality metrics of a reconstruction against its original
    Evaluate {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        reconstructed: PathBuf,
    },
    /// Downsample, reconstruct and measure every image in a corpus directory
    Benchmark {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        noise_variance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated list: stb,bilinear
        #[arg(long, value_delimiter = ',', default_value = "stb,bilinear")]
        methods: Vec<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        /// Report file path
        #[arg(long)]
        out: PathBuf,
        /// Also write each image's classification map next to the report
        #[arg(long)]
        dump_classes: bool,
        #[command(flatten)]
        params: ParamArgs,
    },
}

fn configure_threads() {
    // STB_THREADS caps the worker count; 0 or unset means automatic
    if let Ok(v) = std::env::var("STB_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn list_corpus(dir: &PathBuf) -> stb::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref(),
                Some("pgm") | Some("png")
            )
        })
        .collect();
    files.sort();
    Ok(files)
}

fn run() -> stb::Result<bool> {
    let cli = Cli::parse();
    configure_threads();
    match cli.command {
        Command::Upscale { input, output, rgb, params } => {
            let params = params.to_params();
            let img = raster::load_image(&input)?;
            let hr = if rgb && img.channels() == 3 {
                interp::stb_upscale_rgb(&img, &params)?
            } else {
                interp::stb_upscale(&img.to_grayscale(), &params)?
            };
            raster::save_image(&hr, &output)?;
            Ok(true)
        }
        Command::Evaluate { original, reconstructed } => {
            let orig = raster::load_image(&original)?.to_grayscale();
            let recon = raster::load_image(&reconstructed)?.to_grayscale();
            let orig = bench::crop_to_match(&orig, recon.height(), recon.width())?;
            let report = metrics::report(&orig, &recon)?;
            println!("{}", serde_json::to_string_pretty(&report.to_json()).expect("valid json"));
            Ok(true)
        }
        Command::Benchmark {
            corpus,
            noise_variance,
            seed,
            methods,
            format,
            out,
            dump_classes,
            params,
        } => {
            let methods = methods
                .iter()
                .map(|m| m.parse::<Method>())
                .collect::<stb::Result<Vec<_>>>()?;
            let spec = ExperimentSpec {
                corpus: list_corpus(&corpus)?,
                params: params.to_params(),
                noise_variance,
                seed,
                methods,
                dump_classes_dir: dump_classes.then(|| {
                    out.parent().map(|p| p.to_path_buf()).unwrap_or_else(|| PathBuf::from("."))
                }),
            };
            let rows = bench::run_benchmark(&spec)?;
            match format {
                FormatArg::Csv => {
                    let file = std::fs::File::create(&out)?;
                    bench::write_csv(&rows, file)?;
                }
                FormatArg::Json => {
                    let json = bench::rows_to_json(&rows);
                    std::fs::write(&out, serde_json::to_string_pretty(&json).expect("valid json"))?;
                }
            }
            for row in rows.iter().filter(|r| r.error.is_some()) {
                eprintln!("{}: {}", row.image, row.error.as_deref().unwrap_or(""));
            }
            Ok(bench::all_succeeded(&rows))
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

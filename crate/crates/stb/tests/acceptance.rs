//! End-to-end acceptance suite. Each test prints one PASS line with the
//! measured values; run with `cargo test --test acceptance -- --nocapture`
//! to see them.

use std::time::Instant;

use stb::bench::{self, ExperimentSpec, Method};
use stb::interp::{bilinear_upscale, stb_upscale, StbParams};
use stb::metrics;
use stb::raster::{self, RasterImage};

const LENA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/lena_gray.pgm");

fn lcg(state: &mut u64) -> f64 {
    *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (*state >> 11) as f64 / (1u64 << 53) as f64
}

fn random_image(state: &mut u64, min: usize, max: usize) -> RasterImage {
    let span = (max - min) as f64;
    let w = min + (lcg(state) * span) as usize;
    let h = min + (lcg(state) * span) as usize;
    let data = (0..w * h).map(|_| lcg(state)).collect();
    RasterImage::new(w, h, 1, data).unwrap()
}

/// Anti-aliased 45° edge used by the edge-advantage criterion.
fn diag_edge(n: usize) -> RasterImage {
    RasterImage::from_fn(n, n, |r, c| {
        let signed = (c as f64 - r as f64) / std::f64::consts::SQRT_2;
        (signed / 2.0 + 0.5).clamp(0.0, 1.0)
    })
}

fn downsample_reconstruct(orig: &RasterImage, params: &StbParams) -> (f64, f64) {
    let lr = orig.naive_downsample(2).unwrap();
    let hr_stb = stb_upscale(&lr, params).unwrap();
    let hr_bil = bilinear_upscale(&lr).unwrap();
    let reference = orig.crop(hr_stb.height(), hr_stb.width()).unwrap();
    (
        metrics::psnr(&reference, &hr_stb, 1.0).unwrap(),
        metrics::psnr(&reference, &hr_bil, 1.0).unwrap(),
    )
}

#[test]
fn criterion_01_lattice_passthrough_bit_exact() {
    let start = Instant::now();
    let mut state = 0x5EED_0001u64;
    for _ in 0..50 {
        let lr = random_image(&mut state, 8, 64);
        let hr = stb_upscale(&lr, &StbParams::default()).unwrap();
        for r in 0..lr.height() {
            for c in 0..lr.width() {
                assert_eq!(hr.at(2 * r, 2 * c), lr.at(r, c));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "took {elapsed:.2}s");
    println!("criterion 01 lattice passthrough: PASS ({elapsed:.2}s for 50 images)");
}

#[test]
fn criterion_02_constant_reproduction() {
    for (w, h) in [(8, 8), (13, 9), (16, 32), (33, 17), (64, 64)] {
        let lr = RasterImage::constant(w, h, 0.6180339887);
        let hr = stb_upscale(&lr, &StbParams::default()).unwrap();
        for v in hr.data() {
            assert!((v - 0.6180339887).abs() < 1e-12, "{w}x{h}: got {v}");
        }
    }
    println!("criterion 02 constant reproduction: PASS (5 sizes, 1e-12)");
}

#[test]
fn criterion_03_eigen_oracle() {
    use stb::tensor::{eigen_decompose, TensorField};
    let start = Instant::now();
    let mut state = 0x5EED_0003u64;
    for _ in 0..1000 {
        let (a, b) = (lcg(&mut state) - 0.5, lcg(&mut state) - 0.5);
        let (c, d) = (lcg(&mut state) - 0.5, lcg(&mut state) - 0.5);
        // Mᵀ M is PSD by construction
        let (t11, t12, t22) = (a * a + c * c, a * b + c * d, b * b + d * d);
        let field = TensorField {
            width: 1,
            height: 1,
            t11: vec![t11],
            t12: vec![t12],
            t22: vec![t22],
            sigma: 1.0,
        };
        let e = eigen_decompose(&field).unwrap();
        // quadratic-formula oracle on the characteristic polynomial
        let trace = t11 + t22;
        let det = t11 * t22 - t12 * t12;
        let disc = (trace * trace - 4.0 * det).max(0.0).sqrt();
        assert!((e.d[0] - (trace - disc) / 2.0).abs() < 1e-9);
        assert!((e.dperp[0] - (trace + disc) / 2.0).abs() < 1e-9);
        let (vx, vy) = e.tangent(0, 0);
        let rx = t11 * vx + t12 * vy - e.d[0] * vx;
        let ry = t12 * vx + t22 * vy - e.d[0] * vy;
        assert!(rx.hypot(ry) <= 1e-9, "eigen equation residual");
        assert!(((e.d[0] + e.dperp[0]) - trace).abs() <= 1e-9 * (1.0 + trace));
        assert!((e.d[0] * e.dperp[0] - det).abs() <= 1e-9 * (1.0 + trace * trace));
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "took {elapsed:.2}s");
    println!("criterion 03 eigen oracle: PASS (1000 tensors, {elapsed:.3}s)");
}

#[test]
fn criterion_04_bilinear_equivalence_at_full_threshold() {
    let params = StbParams { threshold: 100.0, ..StbParams::default() };
    let mut state = 0x5EED_0004u64;
    for _ in 0..20 {
        let lr = random_image(&mut state, 8, 48);
        let a = stb_upscale(&lr, &params).unwrap();
        let b = bilinear_upscale(&lr).unwrap();
        assert_eq!(a.data(), b.data());
    }
    println!("criterion 04 bilinear equivalence at T=100: PASS (20 images, exact)");
}

#[test]
fn criterion_05_edge_advantage() {
    let orig = diag_edge(64);
    let (psnr_stb, psnr_bil) = downsample_reconstruct(&orig, &StbParams::default());
    let margin = psnr_stb - psnr_bil;
    assert!(margin >= 0.5, "stb {psnr_stb:.2} dB vs bilinear {psnr_bil:.2} dB");
    println!(
        "criterion 05 edge advantage: PASS (stb {psnr_stb:.2} dB, bilinear {psnr_bil:.2} dB, margin {margin:.2} dB)"
    );
}

#[test]
fn criterion_06_desk_scale_reproduction() {
    let start = Instant::now();
    let orig = raster::load_image(LENA).unwrap();
    let lr = orig.naive_downsample(2).unwrap();
    let hr = stb_upscale(&lr, &StbParams::default()).unwrap();
    let reference = orig.crop(hr.height(), hr.width()).unwrap();
    let psnr = metrics::psnr(&reference, &hr, 1.0).unwrap();
    let ssim = metrics::ssim(&reference, &hr).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    assert!((psnr - 33.99).abs() <= 2.0, "psnr {psnr:.3} dB outside 33.99±2.0");
    assert!((ssim - 0.9147).abs() <= 0.03, "ssim {ssim:.4} outside 0.9147±0.03");
    assert!(elapsed < 30.0, "took {elapsed:.2}s");
    println!(
        "criterion 06 desk-scale reproduction: PASS (psnr {psnr:.2} dB in 33.99±2.0, ssim {ssim:.4} in 0.9147±0.03, {elapsed:.2}s)"
    );
}

#[test]
fn criterion_07_noise_robustness() {
    let orig = raster::load_image(LENA).unwrap();
    let lr = orig.naive_downsample(2).unwrap();
    let noisy = lr.add_gaussian_noise(0.001, 1).unwrap();
    let hr_stb = stb_upscale(&noisy, &StbParams::default()).unwrap();
    let hr_bil = bilinear_upscale(&noisy).unwrap();
    let reference = orig.crop(hr_stb.height(), hr_stb.width()).unwrap();
    let psnr_stb = metrics::psnr(&reference, &hr_stb, 1.0).unwrap();
    let psnr_bil = metrics::psnr(&reference, &hr_bil, 1.0).unwrap();
    assert!((psnr_stb - 30.17).abs() <= 2.0, "psnr {psnr_stb:.3} dB outside 30.17±2.0");
    assert!(psnr_stb >= psnr_bil, "stb {psnr_stb:.3} dB below bilinear {psnr_bil:.3} dB");
    println!(
        "criterion 07 noise robustness: PASS (stb {psnr_stb:.2} dB in 30.17±2.0, bilinear {psnr_bil:.2} dB)"
    );
}

#[test]
fn criterion_08_single_thread_performance() {
    let orig = raster::load_image(LENA).unwrap();
    let lr = orig.crop(256, 256).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let params = StbParams { threshold: 0.0, ..StbParams::default() }; // worst case: edge path everywhere
    let (elapsed, hr) = pool.install(|| {
        let start = Instant::now();
        let hr = stb_upscale(&lr, &params).unwrap();
        (start.elapsed().as_secs_f64(), hr)
    });
    assert_eq!((hr.width(), hr.height()), (511, 511));
    assert!(elapsed < 1.0, "256→511 took {elapsed:.3}s single-threaded");
    println!("criterion 08 performance: PASS (256x256 → 511x511 in {elapsed:.3}s, 1 thread)");
}

#[test]
fn criterion_09_metric_self_tests() {
    let x = RasterImage::constant(16, 16, 0.5);
    let y = RasterImage::constant(16, 16, 0.6);
    assert!((metrics::mse(&x, &y).unwrap() - 0.01).abs() < 1e-15);
    assert!((metrics::psnr(&x, &y, 1.0).unwrap() - 20.0).abs() < 1e-9);
    assert_eq!(metrics::psnr(&x, &x, 1.0).unwrap(), f64::INFINITY);
    let tex = RasterImage::from_fn(24, 24, |r, c| {
        0.5 + 0.3 * (r as f64 * 0.7).sin() * (c as f64 * 0.9).cos()
    });
    assert!((metrics::ssim(&tex, &tex).unwrap() - 1.0).abs() < 1e-12);
    let report = metrics::report(&tex, &tex).unwrap();
    assert_eq!(report.to_json()["psnr_db"], serde_json::json!("inf"));
    println!("criterion 09 metric self-tests: PASS");
}

#[test]
fn criterion_10_benchmark_determinism_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let orig = raster::load_image(LENA).unwrap();
    raster::save_image(&orig.crop(96, 96).unwrap(), dir.path().join("a.pgm")).unwrap();
    raster::save_image(&diag_edge(64), dir.path().join("b.pgm")).unwrap();

    let run = |threads: usize| -> Vec<bench::BenchmarkRow> {
        // rayon's global pool cannot be resized in-process; use a scoped pool
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            bench::run_benchmark(&ExperimentSpec {
                corpus: vec![dir.path().join("a.pgm"), dir.path().join("b.pgm")],
                params: StbParams::default(),
                noise_variance: 0.001,
                seed: 99,
                methods: vec![Method::Stb, Method::Bilinear],
                dump_classes_dir: None,
            })
            .unwrap()
        })
    };
    let metric_columns = |rows: &[bench::BenchmarkRow]| -> String {
        let mut buf = Vec::new();
        bench::write_csv(rows, &mut buf).unwrap();
        String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|l| {
                // drop the trailing time_sec column
                let cut = l.rfind(',').unwrap();
                l[..cut].to_string()
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    let single = metric_columns(&run(1));
    let multi = metric_columns(&run(4));
    let again = metric_columns(&run(4));
    assert_eq!(single, multi, "thread count changed metric bytes");
    assert_eq!(multi, again, "repeat run changed metric bytes");
    println!("criterion 10 benchmark determinism: PASS (byte-identical metrics, 1 vs 4 threads)");
}

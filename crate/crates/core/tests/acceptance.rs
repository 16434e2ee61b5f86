//! Acceptance criteria, one line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report is always
//! printed. Exits non-zero if any gating criterion fails; throughput (C10)
//! is reported but not gating.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use primgen::analysis::{
    dataset_spectrum, filter_similarity, fit_slope, spectrum_distance, spectrum_of_images, MagnitudeScale, WeightTensor,
};
use primgen::generator::{generate_dataset, render_image, DatasetManifest, GeneratorConfig};
use primgen::rng::Stream;
use primgen::shapes::{decay_cap, sample_shape, FillMode, PixelRect, ShapeKind, ShapeSpec, SizePolicy, Variant};
use primgen::spectrum::{forward_fft2, inverse_fft2, ExponentRange, RealField};
use primgen::ImageBuffer;
use rayon::prelude::*;

/// Self-consistency SSIM floor for two disjoint 500-image PrimitivesPS
/// draws at 128². Calibration run (seeds 1 and 2): 0.9936.
const SELF_SSIM_FLOOR: f64 = 0.90;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn primgen(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_primgen"))
        .args(args)
        .env_remove("PRIMGEN_WORKERS")
        .output()
        .expect("primgen binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

// C1 -------------------------------------------------------------------------

fn spectral_law() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (a, tol)) in [(0.5, 0.2), (1.0, 0.2), (2.0, 0.2), (3.0, 0.3)].into_iter().enumerate() {
        let dir = tmp.path().join(format!("a{i}"));
        let a_s = a.to_string();
        let seed = (100 + i).to_string();
        let g = primgen(&[
            "generate", "--variant", "pink-noise", "--a-min", &a_s, "--a-max", &a_s, "--count", "64",
            "--resolution", "256", "--seed", &seed, "--out", path_str(&dir),
        ]);
        if g.status.code() != Some(0) {
            return outcome(false, format!("generate failed: {}", String::from_utf8_lossy(&g.stderr)));
        }
        let o = primgen(&["analyze-slope", "--dataset", path_str(&dir)]);
        if o.status.code() != Some(0) {
            return outcome(false, format!("analyze-slope failed: {}", String::from_utf8_lossy(&o.stderr)));
        }
        let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        let est = report["exponent"].as_f64().unwrap();
        let ok = (est - a).abs() <= tol;
        pass &= ok;
        let mut part = format!("a={a}: â={est:.3} (±{tol}){}", if ok { "" } else { " FAIL" });
        if !ok {
            // Same images before 8-bit quantization, for diagnosis only.
            let range = ExponentRange::new(a, a).unwrap();
            let cfg = GeneratorConfig {
                variant: Variant::PinkNoise,
                resolution: 256,
                count: 64,
                seed: 100 + i as u64,
                a_range: range,
                ..Default::default()
            };
            let float: Vec<ImageBuffer> = (0..64).map(|k| render_image(&cfg, k).unwrap().synthesis.image).collect();
            let f = fit_slope(&spectrum_of_images(&float, MagnitudeScale::Log).unwrap()).unwrap().exponent;
            part.push_str(&format!(" [unquantized â={f:.3}]"));
        }
        parts.push(part);
    }
    outcome(pass, parts.join("; "))
}

// C2 -------------------------------------------------------------------------

fn decay_schedule() -> Outcome {
    let (total, res) = (100usize, 256usize);
    let cap0 = decay_cap(0, total, res);
    if cap0 != 51.2 {
        return outcome(false, format!("cap(0) = {cap0}, expected 51.2"));
    }
    let mut rng = Stream::from_seed(2);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..100_000 {
        let n = i % total;
        let shape = sample_shape(n, total, SizePolicy::Decay, res, &ShapeKind::ALL, &mut rng);
        let bound = (51.2 * (total - n) as f64 / total as f64).max(1.0);
        for s in shape.size {
            worst = worst.max(s - bound);
            if s > bound || s < 1.0 {
                return outcome(false, format!("n={n}: size {s} outside [1, {bound}]"));
            }
        }
    }
    outcome(true, format!("10^5 draws within cap; cap(0)=51.2; max(size − cap)={worst:.4}"))
}

// C3 -------------------------------------------------------------------------

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut snapshots = Vec::new();
    for workers in ["1", "2", "8"] {
        let dir = tmp.path().join(format!("w{workers}"));
        let o = primgen(&["generate", "--count", "64", "--seed", "7", "--workers", workers, "--out", path_str(&dir)]);
        if o.status.code() != Some(0) {
            return outcome(false, format!("workers={workers}: {}", String::from_utf8_lossy(&o.stderr)));
        }
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
            .collect();
        files.sort();
        snapshots.push(files);
    }
    let files = snapshots[0].len();
    let same = snapshots.windows(2).all(|w| w[0] == w[1]);
    outcome(same && files == 65, format!("{files} files per run, identical across workers 1/2/8: {same}"))
}

// C4 -------------------------------------------------------------------------

fn fft_correctness() -> Outcome {
    let mut worst_roundtrip = 0.0f64;
    let mut worst_parseval = 0.0f64;
    for seed in 0..100 {
        let mut s = Stream::from_seed(seed);
        let field = RealField::new(256, (0..256 * 256).map(|_| s.uniform(-1.0, 1.0)).collect()).unwrap();
        let spectrum = forward_fft2(&field);
        let back = inverse_fft2(&spectrum).field;
        let err = field.data().iter().zip(back.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let energy: f64 = field.data().iter().map(|v| v * v).sum();
        let freq: f64 = spectrum.data().iter().map(|c| c.norm_sqr()).sum::<f64>() / (256.0 * 256.0);
        worst_roundtrip = worst_roundtrip.max(err);
        worst_parseval = worst_parseval.max(((energy - freq) / energy).abs());
    }
    outcome(
        worst_roundtrip < 1e-6 && worst_parseval < 1e-6,
        format!("max roundtrip error {worst_roundtrip:.2e}, max Parseval rel. error {worst_parseval:.2e} (limit 1e-6)"),
    )
}

// C5 -------------------------------------------------------------------------

fn rasterizer_area() -> Outcome {
    let res = 256usize;
    let mut rng = Stream::from_seed(5);
    let mut worst = [0.0f64; 3];
    let mut fails = 0;
    for i in 0..1000 {
        let kind = ShapeKind::ALL[i % 3];
        let mut size = [rng.uniform(16.0, 96.0), rng.uniform(16.0, 96.0)];
        if kind == ShapeKind::Line && size[0] < size[1] {
            size.swap(0, 1);
        }
        let orientation = rng.uniform(0.0, PI);
        let probe = ShapeSpec {
            kind,
            center: [0.0, 0.0],
            size,
            orientation,
            fill: FillMode::Monotone { color: [1.0; 3] },
        };
        // Half extents from a shape at the origin, then a center that keeps
        // the whole shape on the canvas.
        let reach = size[0].hypot(size[1]) / 2.0 + 1.0;
        let center = [rng.uniform(reach, res as f64 - reach), rng.uniform(reach, res as f64 - reach)];
        let shape = ShapeSpec { center, ..probe };
        let mut count = 0usize;
        shape.for_each_pixel(res, res, |_, _| count += 1);
        let rel = (count as f64 - shape.area()).abs() / shape.area();
        let (slot, tol) = match kind {
            ShapeKind::Ellipse => (0, 0.03),
            ShapeKind::Rectangle => (1, 0.03),
            ShapeKind::Line => (2, 0.10),
        };
        worst[slot] = worst[slot].max(rel);
        if rel > tol {
            fails += 1;
        }
    }
    outcome(
        fails == 0,
        format!(
            "worst rel. error ellipse {:.4}, rectangle {:.4} (≤0.03), line {:.4} (≤0.10); {fails} failures",
            worst[0], worst[1], worst[2]
        ),
    )
}

// C6 -------------------------------------------------------------------------

fn saliency_prior() -> Outcome {
    let res = 128usize;
    let cfg = GeneratorConfig {
        variant: Variant::PrimitivesPS,
        resolution: res,
        count: 10_000,
        seed: 6,
        ..Default::default()
    };
    let (lo, hi) = (res as f64 / 3.0, 2.0 * res as f64 / 3.0);
    let cell = PixelRect::central_cell(res);
    let violations: usize = (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let rec = render_image(&cfg, i).unwrap().record.saliency.unwrap();
            let [cx, cy] = rec.shape.center;
            let central = (lo..=hi).contains(&cx) && (lo..=hi).contains(&cy);
            usize::from(!central || !rec.bounding_box.intersects(&cell))
        })
        .sum();
    outcome(violations == 0, format!("10000 PrimitivesPS images at 128²: {violations} violations"))
}

// C7 / C9 --------------------------------------------------------------------

struct Datasets {
    _tmp: tempfile::TempDir,
    root: std::path::PathBuf,
}

impl Datasets {
    fn new() -> Self {
        let tmp = tempfile::tempdir().unwrap();
        Datasets {
            root: tmp.path().to_path_buf(),
            _tmp: tmp,
        }
    }

    /// 500 images at 128² written to disk and read back as a dataset.
    fn stats(&self, variant: Variant, seed: u64) -> primgen::analysis::SpectrumStats {
        let dir = self.root.join(format!("{variant}-{seed}"));
        if !dir.join("manifest.json").exists() {
            let cfg = GeneratorConfig {
                variant,
                resolution: 128,
                count: 500,
                seed,
                ..Default::default()
            };
            generate_dataset(&cfg, &dir, workers()).unwrap();
        }
        dataset_spectrum(&dir, MagnitudeScale::Log1p).unwrap()
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn spectrum_similarity(data: &Datasets) -> (Outcome, f64) {
    let a = data.stats(Variant::PrimitivesPS, 1);
    let b = data.stats(Variant::PrimitivesPS, 2);
    let self_a = spectrum_distance(&a, &a).unwrap();
    let ab = spectrum_distance(&a, &b).unwrap();
    let ba = spectrum_distance(&b, &a).unwrap();
    let identity = (self_a.ssim - 1.0).abs() <= 1e-9 && self_a.l1 == 0.0 && self_a.l2 == 0.0;
    let symmetric = ab.ssim == ba.ssim && ab.l1 == ba.l1 && ab.l2 == ba.l2;
    let consistent = ab.ssim >= SELF_SSIM_FLOOR;
    (
        outcome(
            identity && symmetric && consistent,
            format!(
                "self-SSIM {:.12}, symmetric {symmetric}, disjoint draws SSIM {:.4} (≥ {SELF_SSIM_FLOOR}), L1 {:.4}, L2 {:.4}",
                self_a.ssim, ab.ssim, ab.l1, ab.l2
            ),
        ),
        ab.ssim,
    )
}

fn variant_differentiation(data: &Datasets, ps_self: f64) -> Outcome {
    let pn1 = data.stats(Variant::PinkNoise, 1);
    let pn2 = data.stats(Variant::PinkNoise, 2);
    let pr1 = data.stats(Variant::Primitives, 1);
    let pr2 = data.stats(Variant::Primitives, 2);
    let cross = spectrum_distance(&pn1, &pr1).unwrap().ssim;
    let pn_self = spectrum_distance(&pn1, &pn2).unwrap().ssim;
    let pr_self = spectrum_distance(&pr1, &pr2).unwrap().ssim;
    outcome(
        cross < pn_self && cross < pr_self && cross < ps_self,
        format!(
            "PinkNoise vs Primitives SSIM {cross:.4} < self SSIM PinkNoise {pn_self:.4}, Primitives {pr_self:.4}, PrimitivesPS {ps_self:.4}"
        ),
    )
}

// C8 -------------------------------------------------------------------------

fn filter_diversity() -> Outcome {
    let mut s = Stream::from_seed(8);
    let v: Vec<f64> = (0..27).map(|_| s.standard_normal()).collect();
    let neg: Vec<f64> = v.iter().map(|x| -x).collect();
    let same = filter_similarity(&WeightTensor::new([2, 3, 3, 3], [v.clone(), v.clone()].concat()).unwrap()).unwrap().mean;
    let anti = filter_similarity(&WeightTensor::new([2, 3, 3, 3], [v.clone(), neg].concat()).unwrap()).unwrap().mean;

    let normal: Vec<f64> = (0..32 * 1024).map(|_| s.standard_normal()).collect();
    let tensor = WeightTensor::new([32, 16, 8, 8], normal).unwrap();
    let random = filter_similarity(&tensor).unwrap().mean;

    let mut worst_scale = 0.0f64;
    for trial in 0..20 {
        let mut scaled = tensor.clone();
        let k = s.uniform(1e-3, 1e3);
        let o = trial % 32;
        scaled.data_mut()[o * 1024..(o + 1) * 1024].iter_mut().for_each(|x| *x *= k);
        worst_scale = worst_scale.max((filter_similarity(&scaled).unwrap().mean - random).abs());
    }
    let pass = (same - 1.0).abs() < 1e-12
        && (anti + 1.0).abs() < 1e-12
        && (-0.05..=0.05).contains(&random)
        && worst_scale <= 1e-12;
    outcome(
        pass,
        format!("identical {same:.15}, antipodal {anti:.15}, 32 iid normal (dim 1024) {random:.5}, max scale drift {worst_scale:.1e}"),
    )
}

// C10 ------------------------------------------------------------------------

fn throughput() -> (Outcome, bool) {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = GeneratorConfig {
        count: 1000,
        seed: 10,
        ..Default::default()
    };
    let start = Instant::now();
    generate_dataset(&cfg, tmp.path(), workers()).unwrap();
    let elapsed = start.elapsed();
    let manifest = DatasetManifest::read(tmp.path()).unwrap();
    let decoded = manifest
        .images
        .par_iter()
        .filter(|r| {
            ImageBuffer::read_png(&tmp.path().join(&r.filename)).is_ok_and(|img| img.width() == 256 && img.height() == 256)
        })
        .count();
    let fast = elapsed < Duration::from_secs(120);
    (
        outcome(
            decoded == 1000,
            format!(
                "1000 PrimitivesPS 256² in {:.1}s on {} worker(s) (soft target <120s on 4 cores: {}); {decoded}/1000 decode as 256×256 RGB",
                elapsed.as_secs_f64(),
                workers(),
                if fast { "met" } else { "missed" }
            ),
        ),
        fast,
    )
}

fn main() {
    let mut failures = 0;
    let mut report = |id: &str, name: &str, limit: Duration, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = run();
        let t = start.elapsed();
        let in_time = t <= limit;
        let pass = o.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "[{}] {id} {name}: {} ({:.1}s, limit {}s{})",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            t.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { ", exceeded" }
        );
    };
    let secs = Duration::from_secs;

    report("C1", "spectral law", secs(120), &mut spectral_law);
    report("C2", "decay schedule", secs(5), &mut decay_schedule);
    report("C3", "determinism across workers", secs(60), &mut determinism);
    report("C4", "FFT correctness", secs(30), &mut fft_correctness);
    report("C5", "rasterizer area", secs(30), &mut rasterizer_area);
    report("C6", "saliency prior", secs(600), &mut saliency_prior);
    let data = Datasets::new();
    let mut ps_self = f64::NAN;
    report("C7", "spectrum similarity metric", secs(300), &mut || {
        let (o, s) = spectrum_similarity(&data);
        ps_self = s;
        o
    });
    report("C8", "filter diversity metric", secs(5), &mut filter_diversity);
    report("C9", "variant differentiation", secs(300), &mut || variant_differentiation(&data, ps_self));

    let start = Instant::now();
    let (o, fast) = throughput();
    if !o.pass {
        failures += 1;
    }
    println!(
        "[{}] C10 throughput (soft): {} ({:.1}s)",
        match (o.pass, fast) {
            (false, _) => "FAIL",
            (true, true) => "PASS",
            (true, false) => "SOFT",
        },
        o.detail,
        start.elapsed().as_secs_f64()
    );

    if failures > 0 {
        println!("{failures} acceptance criterion/criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}

//! Acceptance suite: one test per criterion, each printing a PASS line
//! (run with `cargo test -p precis-cli --test acceptance -- --nocapture`).
//!
//! The heavy criteria share one measured sweep of the bundled lenet_toy
//! network over the default 192-format design space.

use precis_core::costmodel::default_tables;
use precis_core::inference::{
    accumulation_trace, evaluate_accuracy, Dataset, Evaluator, LayerDef, NetworkDef,
};
use precis_core::model_io::{load_mnist, load_network, read_weights, write_weights};
use precis_core::numeric::NumericFormat;
use precis_core::search::{
    enumerate_design_space, exhaustive_search_space, fast_search_space, fit_accuracy_model,
    last_layer_r2, measure_design_space, select_samples, DesignSpaceConfig, MeasuredFormat,
    SampleSelection,
};
use precis_core::Tensor;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

const TARGET: f64 = 0.99;
const SAMPLES: usize = 10;

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
}

fn bundled_dataset() -> Dataset {
    load_mnist(
        &fixture("mnist_synth/test-images-idx3-ubyte"),
        &fixture("mnist_synth/test-labels-idx1-ubyte"),
    )
    .expect("bundled dataset loads")
}

fn lenet() -> NetworkDef {
    load_network(&fixture("lenet_toy.toml")).expect("lenet_toy loads")
}

fn mlp() -> NetworkDef {
    load_network(&fixture("mlp_toy.toml")).expect("mlp_toy loads")
}

/// Measured sweep of lenet_toy over the default space, shared by the
/// accuracy-model and search criteria.
fn lenet_sweep() -> &'static [MeasuredFormat] {
    static SWEEP: OnceLock<Vec<MeasuredFormat>> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let net = lenet();
        let dataset = bundled_dataset();
        let samples = select_samples(&dataset, SampleSelection::FirstN(SAMPLES));
        let space = enumerate_design_space(&DesignSpaceConfig::default()).unwrap();
        measure_design_space(&net, &samples, &dataset, &space, &default_tables(), 1).unwrap()
    })
}

/// Brute-force nearest-toward-zero reference over the enumerated values.
fn oracle_truncate(values: &[f64], x: f64) -> f64 {
    let a = x.abs();
    let nonneg: Vec<f64> = values.iter().copied().filter(|v| *v >= 0.0).collect();
    let idx = nonneg.partition_point(|&v| v <= a);
    let magnitude = nonneg[idx - 1];
    if x < 0.0 && magnitude != 0.0 {
        -magnitude
    } else {
        magnitude
    }
}

#[test]
fn criterion_1_quantizer_oracle_equivalence() {
    let started = Instant::now();
    let mut formats = Vec::new();
    for e in 1..=4u32 {
        for m in 0..=5u32 {
            formats.push(NumericFormat::float(m, e).unwrap());
        }
    }
    for i in 0..=5u32 {
        for f in 0..=5u32 {
            if i + f >= 1 {
                formats.push(NumericFormat::fixed(i, f).unwrap());
            }
        }
    }
    let mut checked = 0u64;
    for fmt in &formats {
        let values = fmt.enumerate_values().unwrap();
        let max = fmt.max_value();
        let step = 4.0 * max / 10_000.0;
        for i in 0..=10_000 {
            let x = -2.0 * max + step * i as f64;
            let got = fmt.quantize(x).unwrap();
            let want = oracle_truncate(&values, x);
            assert_eq!(
                got.to_bits(),
                want.to_bits(),
                "{fmt}: quantize({x}) = {got}, oracle = {want}"
            );
            checked += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "oracle sweep took {elapsed:?}, budget is one minute"
    );
    println!(
        "ACCEPTANCE 1 quantizer-oracle-equivalence: PASS \
         ({} formats, {checked} points, {elapsed:?})",
        formats.len()
    );
}

#[test]
fn criterion_2_costmodel_paper_anchors() {
    let tables = default_tables();
    let m7e6: NumericFormat = "float:m7e6".parse().unwrap();
    let m8e6: NumericFormat = "float:m8e6".parse().unwrap();
    let checks = [
        ("speedup(float:m7e6)", tables.speedup(&m7e6), 7.2),
        ("energy(float:m7e6)", tables.energy_savings(&m7e6), 3.4),
        ("speedup(float:m8e6)", tables.speedup(&m8e6), 5.7),
        ("energy(float:m8e6)", tables.energy_savings(&m8e6), 3.0),
    ];
    for (what, got, want) in checks {
        assert!(
            (got - want).abs() <= 0.05,
            "{what} = {got}, want {want} within 0.05"
        );
    }
    assert_eq!(tables.speedup(&NumericFormat::Baseline), 1.0);
    assert_eq!(tables.energy_savings(&NumericFormat::Baseline), 1.0);
    println!("ACCEPTANCE 2 costmodel-paper-anchors: PASS (7.2/3.4, 5.7/3.0, baseline 1.0)");
}

/// Fully-connected single-unit network over `n` inputs with the given weights.
fn fc_probe_net(weights_row: Vec<f64>) -> NetworkDef {
    let n = weights_row.len();
    let mut weights = HashMap::new();
    weights.insert(
        "fc.w".to_string(),
        Tensor::new(vec![1, n], weights_row).unwrap(),
    );
    NetworkDef::new(
        vec![LayerDef::FullyConnected {
            units: 1,
            weight: "fc.w".into(),
            bias: None,
        }],
        weights,
        vec![n],
        None,
    )
    .unwrap()
}

#[test]
fn criterion_3_accumulation_mechanisms() {
    // Fixed-point saturation: 100 contributions of +4.0 pin the running sum
    // at 2^8 - 2^-8 once 64 inputs have accumulated.
    let net = fc_probe_net(vec![2.0; 100]);
    let input = Tensor::new(vec![100], vec![2.0; 100]).unwrap();
    let fixed: NumericFormat = "fixed:i8f8".parse().unwrap();
    let trace = accumulation_trace(&net, &input, 0, 0, fixed).unwrap();
    let max = 255.99609375;
    assert_eq!(trace[62].running_sum, 252.0);
    for record in &trace[63..] {
        assert_eq!(record.running_sum, max, "saturation plateau broken");
    }

    // Floating-point absorption: once the running sum reaches 256 in a
    // 2-mantissa-bit format the value spacing there is 64, so +4.0
    // contributions vanish and the sum stops growing.
    let mut row = vec![1.0; 100];
    row[0] = 64.0;
    let net = fc_probe_net(row);
    let input = Tensor::new(vec![100], vec![4.0; 100]).unwrap();
    let float: NumericFormat = "float:m2e14".parse().unwrap();
    match float {
        NumericFormat::Float(f) => assert_eq!(f.ulp(256.0), 64.0),
        _ => unreachable!(),
    }
    let trace = accumulation_trace(&net, &input, 0, 0, float).unwrap();
    for record in &trace {
        assert_eq!(record.running_sum, 256.0, "absorption plateau broken");
    }
    assert_eq!(trace[99].exact_running_sum, 256.0 + 99.0 * 4.0);
    println!(
        "ACCEPTANCE 3 accumulation-mechanisms: PASS \
         (fixed plateau {max}, float absorption at 256 with ulp 64)"
    );
}

/// Plain single-precision forward pass, written independently of the
/// engine's quantized path: straightforward f32 loops per layer.
fn reference_forward_f32(net: &NetworkDef, input: &Tensor) -> Vec<Vec<f32>> {
    let weights: HashMap<&str, (Vec<usize>, Vec<f32>)> = net
        .weights()
        .iter()
        .map(|(name, t)| {
            let data: Vec<f32> = t.data().iter().map(|&v| v as f32).collect();
            (name.as_str(), (t.shape().to_vec(), data))
        })
        .collect();
    let mut shape = input.shape().to_vec();
    let mut current: Vec<f32> = input.data().iter().map(|&v| v as f32).collect();
    let mut activations = Vec::new();
    for layer in net.layers() {
        match layer {
            LayerDef::Conv2d {
                out_channels,
                kernel,
                stride,
                padding,
                weight,
                bias,
            } => {
                let (c, h, w) = (shape[0], shape[1], shape[2]);
                let (wt_shape, wt) = &weights[weight.as_str()];
                assert_eq!(wt_shape[1], c);
                let bias = bias.as_ref().map(|b| &weights[b.as_str()].1);
                let oh = (h + 2 * padding.0 - kernel.0) / stride.0 + 1;
                let ow = (w + 2 * padding.1 - kernel.1) / stride.1 + 1;
                let mut out = vec![0.0f32; out_channels * oh * ow];
                for o in 0..*out_channels {
                    for oy in 0..oh {
                        for ox in 0..ow {
                            let mut acc = 0.0f32;
                            for ci in 0..c {
                                for ky in 0..kernel.0 {
                                    for kx in 0..kernel.1 {
                                        let iy = (oy * stride.0 + ky) as isize - padding.0 as isize;
                                        let ix = (ox * stride.1 + kx) as isize - padding.1 as isize;
                                        let xv = if iy >= 0
                                            && (iy as usize) < h
                                            && ix >= 0
                                            && (ix as usize) < w
                                        {
                                            current[(ci * h + iy as usize) * w + ix as usize]
                                        } else {
                                            0.0
                                        };
                                        let wv =
                                            wt[((o * c + ci) * kernel.0 + ky) * kernel.1 + kx];
                                        acc += wv * xv;
                                    }
                                }
                            }
                            if let Some(b) = bias {
                                acc += b[o];
                            }
                            out[(o * oh + oy) * ow + ox] = acc;
                        }
                    }
                }
                shape = vec![*out_channels, oh, ow];
                current = out;
            }
            LayerDef::FullyConnected {
                units,
                weight,
                bias,
            } => {
                let (_, wt) = &weights[weight.as_str()];
                let bias = bias.as_ref().map(|b| &weights[b.as_str()].1);
                let n = current.len();
                let mut out = vec![0.0f32; *units];
                for (u, slot) in out.iter_mut().enumerate() {
                    let mut acc = 0.0f32;
                    for i in 0..n {
                        acc += wt[u * n + i] * current[i];
                    }
                    if let Some(b) = bias {
                        acc += b[u];
                    }
                    *slot = acc;
                }
                shape = vec![*units];
                current = out;
            }
            LayerDef::Relu => {
                for v in &mut current {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            LayerDef::MaxPool { window, stride } => {
                let (c, h, w) = (shape[0], shape[1], shape[2]);
                let oh = (h - window.0) / stride.0 + 1;
                let ow = (w - window.1) / stride.1 + 1;
                let mut out = vec![0.0f32; c * oh * ow];
                for ch in 0..c {
                    for oy in 0..oh {
                        for ox in 0..ow {
                            let mut best = f32::NEG_INFINITY;
                            for wy in 0..window.0 {
                                for wx in 0..window.1 {
                                    let v = current
                                        [(ch * h + oy * stride.0 + wy) * w + ox * stride.1 + wx];
                                    if v > best {
                                        best = v;
                                    }
                                }
                            }
                            out[(ch * oh + oy) * ow + ox] = best;
                        }
                    }
                }
                shape = vec![c, oh, ow];
                current = out;
            }
            LayerDef::AvgPool { .. } => unreachable!("not used by the bundled networks"),
            LayerDef::Softmax => {
                let max = current.iter().copied().fold(f32::NEG_INFINITY, f32::max);
                let exps: Vec<f32> = current.iter().map(|&v| (v - max).exp()).collect();
                let sum: f32 = exps.iter().sum();
                current = exps.iter().map(|&e| e / sum).collect();
            }
            LayerDef::Flatten => {
                shape = vec![current.len()];
            }
        }
        activations.push(current.clone());
    }
    activations
}

#[test]
fn criterion_4_baseline_fidelity() {
    let net = lenet();
    let dataset = bundled_dataset();
    assert!(dataset.len() >= 100, "need 100 bundled inputs");
    let evaluator = Evaluator::new(&net, NumericFormat::Baseline).unwrap();
    for input in &dataset.inputs[..100] {
        let engine = evaluator.forward(input).unwrap();
        let reference = reference_forward_f32(&net, input);
        assert_eq!(engine.len(), reference.len());
        for (layer, (e, r)) in engine.iter().zip(&reference).enumerate() {
            assert_eq!(e.len(), r.len());
            for (index, (&ev, &rv)) in e.data().iter().zip(r).enumerate() {
                assert_eq!(
                    (ev as f32).to_bits(),
                    rv.to_bits(),
                    "layer {layer} element {index}: engine {ev} vs reference {rv}"
                );
            }
        }
    }

    // Truncation to the single-precision layout classifies identically.
    let truncated: NumericFormat = "float:m23e8b127".parse().unwrap();
    let baseline_acc = evaluate_accuracy(&net, NumericFormat::Baseline, &dataset, 1).unwrap();
    let truncated_acc = evaluate_accuracy(&net, truncated, &dataset, 1).unwrap();
    assert_eq!(truncated_acc / baseline_acc, 1.0);
    println!(
        "ACCEPTANCE 4 baseline-fidelity: PASS \
         (100 inputs bit-for-bit, m23e8b127 normalized accuracy 1.0)"
    );
}

#[test]
fn criterion_5_search_equivalence() {
    // Cross-network setup: the accuracy model is fitted on the lenet_toy
    // sweep and drives the search on mlp_toy.
    let pairs: Vec<(f64, f64)> = lenet_sweep()
        .iter()
        .map(|m| (m.r2, m.normalized_accuracy))
        .collect();
    let model = fit_accuracy_model(&pairs).unwrap();

    let net = mlp();
    let dataset = bundled_dataset();
    let samples = select_samples(&dataset, SampleSelection::FirstN(SAMPLES));
    let space = enumerate_design_space(&DesignSpaceConfig::default()).unwrap();
    let tables = default_tables();

    let exhaustive =
        exhaustive_search_space(&net, &dataset, &space, &tables, TARGET, 1).unwrap();
    assert!(!exhaustive.fallback, "exhaustive search found no format");
    assert_eq!(exhaustive.validation_passes, space.len());

    let fast = fast_search_space(
        &net, &samples, &dataset, &model, &space, &tables, TARGET, 2, 1,
    )
    .unwrap();
    assert!(fast.point.evaluated);
    assert_eq!(
        fast.point.format, exhaustive.point.format,
        "fast search (refine 2) must match the exhaustive oracle"
    );
    assert!(
        fast.validation_passes <= 2,
        "fast search used {} validation passes",
        fast.validation_passes
    );
    assert!(
        exhaustive.point.speedup >= fast.point.speedup,
        "oracle dominance violated"
    );

    // One refinement step never returns a format that violates the target.
    let one = fast_search_space(
        &net, &samples, &dataset, &model, &space, &tables, TARGET, 1, 1,
    )
    .unwrap();
    let baseline_acc = evaluate_accuracy(&net, NumericFormat::Baseline, &dataset, 1).unwrap();
    let post_hoc =
        evaluate_accuracy(&net, one.point.format, &dataset, 1).unwrap() / baseline_acc;
    assert!(
        post_hoc >= TARGET,
        "refine=1 returned {} with post-hoc normalized accuracy {post_hoc}",
        one.point.format
    );

    println!(
        "ACCEPTANCE 5 search-equivalence: PASS \
         (both searches pick {}, fast used {} of {} validation passes; \
         refine=1 pick {} holds at {post_hoc:.4})",
        exhaustive.point.format,
        fast.validation_passes,
        exhaustive.validation_passes,
        one.point.format
    );
}

#[test]
fn criterion_6_accuracy_model_quality() {
    let pairs: Vec<(f64, f64)> = lenet_sweep()
        .iter()
        .map(|m| (m.r2, m.normalized_accuracy))
        .collect();
    let model = fit_accuracy_model(&pairs).unwrap();
    assert!(
        model.fit_correlation >= 0.8,
        "fit correlation {} below 0.8",
        model.fit_correlation
    );
    println!(
        "ACCEPTANCE 6 accuracy-model-quality: PASS (fit correlation {:.4} over {} pairs)",
        model.fit_correlation,
        pairs.len()
    );
}

mod property_suites {
    use super::*;
    use precis_core::costmodel::{CostEntry, CostTable};
    use precis_core::model_io::load_cifar10;
    use precis_core::numeric::FormatKind;

    /// Small deterministic generator for the randomized quantizer checks.
    struct Lcg(u64);

    impl Lcg {
        fn next_u64(&mut self) -> u64 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            self.0
        }

        fn pick(&mut self, bound: u64) -> u64 {
            self.next_u64() % bound
        }

        fn finite_f64(&mut self) -> f64 {
            loop {
                let v = f64::from_bits(self.next_u64());
                if v.is_finite() {
                    return v;
                }
            }
        }
    }

    fn random_format(rng: &mut Lcg) -> NumericFormat {
        match rng.pick(3) {
            0 => NumericFormat::float(rng.pick(17) as u32, 1 + rng.pick(8) as u32).unwrap(),
            1 => loop {
                let (i, f) = (rng.pick(17) as u32, rng.pick(17) as u32);
                if i + f >= 1 {
                    break NumericFormat::fixed(i, f).unwrap();
                }
            },
            _ => NumericFormat::Baseline,
        }
    }

    fn quantizer_randomized_properties() -> u64 {
        let mut rng = Lcg(0x5eed_cafe);
        let mut cases = 0u64;
        for _ in 0..120_000 {
            let fmt = random_format(&mut rng);
            let x = rng.finite_f64();
            let y = rng.finite_f64();
            let qx = fmt.quantize(x).unwrap();
            // Idempotence.
            assert_eq!(fmt.quantize(qx).unwrap().to_bits(), qx.to_bits(), "{fmt} at {x}");
            // Sign symmetry.
            let qn = fmt.quantize(-x).unwrap();
            assert_eq!(qx.abs().to_bits(), qn.abs().to_bits(), "{fmt} at {x}");
            // Monotonicity.
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            assert!(
                fmt.quantize(lo).unwrap() <= fmt.quantize(hi).unwrap(),
                "{fmt} between {lo} and {hi}"
            );
            // Truncation bound (Baseline rounds to nearest and is exempt).
            if !matches!(fmt, NumericFormat::Baseline) && x.abs() <= fmt.max_value() {
                assert!(qx.abs() <= x.abs(), "{fmt} at {x}");
            }
            cases += 1;
        }
        cases
    }

    fn round_trip_all_enumerable() -> u64 {
        let mut cases = 0u64;
        for e in 1..=8u32 {
            for m in 0..=10u32 {
                if 1 + e + m > 12 {
                    continue;
                }
                cases += round_trip_one(&NumericFormat::float(m, e).unwrap());
            }
        }
        for i in 0..=10u32 {
            for f in 0..=10u32 {
                if i + f >= 1 && i + f < 12 {
                    cases += round_trip_one(&NumericFormat::fixed(i, f).unwrap());
                }
            }
        }
        cases
    }

    fn round_trip_one(fmt: &NumericFormat) -> u64 {
        let values = fmt.enumerate_values().unwrap();
        for &v in &values {
            let pattern = fmt.encode(v).unwrap();
            assert_eq!(fmt.decode(&pattern).unwrap().to_bits(), v.to_bits(), "{fmt}: {v}");
        }
        values.len() as u64
    }

    fn weight_container_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("roundtrip.weights");
        let mut rng = Lcg(0xbeef);
        let mut entries = Vec::new();
        for index in 0..8 {
            let len = 1 + rng.pick(64) as usize;
            let data: Vec<f64> = (0..len)
                .map(|_| (rng.finite_f64() as f32).clamp(-1e30, 1e30) as f64)
                .map(|v| if v.is_finite() { v } else { 0.0 })
                .collect();
            entries.push((
                format!("tensor{index}"),
                Tensor::new(vec![len], data).unwrap(),
            ));
        }
        write_weights(&path, &entries).unwrap();
        let loaded = read_weights(&path).unwrap();
        assert_eq!(loaded.len(), entries.len());
        for ((an, at), (bn, bt)) in entries.iter().zip(&loaded) {
            assert_eq!(an, bn);
            assert_eq!(at.shape(), bt.shape());
            for (x, y) in at.data().iter().zip(bt.data()) {
                assert_eq!((*x as f32).to_bits(), (*y as f32).to_bits());
            }
        }
    }

    fn loader_malformed_totality() {
        let dir = tempfile::tempdir().unwrap();
        // Every corruption of a weight container must produce a structured
        // error, never a panic or a partial load.
        let good_container = {
            let path = dir.path().join("good.weights");
            let entries = vec![("w".to_string(), Tensor::new(vec![2], vec![1.0, 2.0]).unwrap())];
            write_weights(&path, &entries).unwrap();
            std::fs::read(&path).unwrap()
        };
        let container_path = dir.path().join("bad.weights");
        for cut in 0..good_container.len() {
            std::fs::write(&container_path, &good_container[..cut]).unwrap();
            assert!(read_weights(&container_path).is_err(), "truncation at {cut}");
        }
        for (offset, value) in [(0usize, b'X'), (8, 0xff), (14, 9)] {
            let mut bytes = good_container.clone();
            bytes[offset] = value;
            std::fs::write(&container_path, &bytes).unwrap();
            read_weights(&container_path).err();
        }

        // MNIST: bad magic, truncations, count mismatch, bad labels.
        let images_path = dir.path().join("imgs");
        let labels_path = dir.path().join("lbls");
        let mut images = Vec::new();
        images.extend_from_slice(&0x803u32.to_be_bytes());
        images.extend_from_slice(&2u32.to_be_bytes());
        images.extend_from_slice(&2u32.to_be_bytes());
        images.extend_from_slice(&2u32.to_be_bytes());
        images.extend_from_slice(&[0, 64, 128, 255, 1, 2, 3, 4]);
        let mut labels = Vec::new();
        labels.extend_from_slice(&0x801u32.to_be_bytes());
        labels.extend_from_slice(&2u32.to_be_bytes());
        labels.extend_from_slice(&[3, 7]);
        std::fs::write(&images_path, &images).unwrap();
        std::fs::write(&labels_path, &labels).unwrap();
        assert!(load_mnist(&images_path, &labels_path).is_ok());
        for cut in 0..images.len() {
            std::fs::write(&images_path, &images[..cut]).unwrap();
            assert!(load_mnist(&images_path, &labels_path).is_err(), "image cut {cut}");
        }
        std::fs::write(&images_path, &images).unwrap();
        for cut in 0..labels.len() {
            std::fs::write(&labels_path, &labels[..cut]).unwrap();
            assert!(load_mnist(&images_path, &labels_path).is_err(), "label cut {cut}");
        }
        let mut bad_label = labels.clone();
        bad_label[9] = 10;
        std::fs::write(&labels_path, &bad_label).unwrap();
        assert!(load_mnist(&images_path, &labels_path).is_err());

        // CIFAR: size not a record multiple, label out of range.
        let batch = dir.path().join("batch.bin");
        std::fs::write(&batch, vec![0u8; 3072]).unwrap();
        assert!(load_cifar10(&batch).is_err());
        let mut record = vec![11u8];
        record.extend(std::iter::repeat_n(0, 3072));
        std::fs::write(&batch, &record).unwrap();
        assert!(load_cifar10(&batch).is_err());
    }

    fn r2_bounds_and_baseline() {
        let net = mlp();
        let dataset = bundled_dataset();
        let samples = select_samples(&dataset, SampleSelection::FirstN(SAMPLES));
        assert_eq!(
            last_layer_r2(&net, &samples, NumericFormat::Baseline).unwrap(),
            1.0
        );
        let space = enumerate_design_space(&DesignSpaceConfig::default()).unwrap();
        for fmt in space.iter().step_by(16) {
            let r2 = last_layer_r2(&net, &samples, *fmt).unwrap();
            assert!((0.0..=1.0).contains(&r2), "{fmt}: r2 {r2}");
        }
    }

    fn cost_table_monotonicity() {
        let tables = default_tables();
        for (kind, table) in [(FormatKind::Float, &tables.float), (FormatKind::Fixed, &tables.fixed)] {
            let mut last = f64::INFINITY;
            for width in 2..=40u32 {
                let fmt = match kind {
                    FormatKind::Float => {
                        if width < 3 {
                            continue;
                        }
                        let e = 1 + (width - 2).min(8);
                        NumericFormat::float(width - 1 - e, e).unwrap()
                    }
                    FormatKind::Fixed => {
                        NumericFormat::fixed(1, width - 2).ok().unwrap_or(NumericFormat::fixed(1, 1).unwrap())
                    }
                };
                if fmt.total_bits() != width {
                    continue;
                }
                let speedup = table.speedup(&fmt).unwrap();
                assert!(speedup <= last + 1e-12, "{kind:?} width {width}");
                last = speedup;
            }
        }
        // Entry validation: unsorted and nonpositive tables are refused.
        let entry = |w: u32, r: f64| CostEntry {
            total_bits: w,
            delay_ratio: r,
            area_ratio: r,
            energy_ratio: r,
        };
        assert!(CostTable::new(FormatKind::Float, vec![entry(9, 0.5), entry(8, 1.0)]).is_err());
        assert!(CostTable::new(FormatKind::Float, vec![entry(8, -0.5), entry(32, 1.0)]).is_err());
    }

    fn cli_determinism() {
        let bin = env!("CARGO_BIN_EXE_precis");
        let dir = tempfile::tempdir().unwrap();
        let data = format!(
            "mnist:{},{}",
            fixture("mnist_synth/test-images-idx3-ubyte").display(),
            fixture("mnist_synth/test-labels-idx1-ubyte").display()
        );
        let strip_duration = |raw: &[u8]| {
            let mut v: serde_json::Value = serde_json::from_slice(raw).unwrap();
            v.as_object_mut().unwrap().remove("duration_ms");
            serde_json::to_string(&v).unwrap()
        };
        let run = |args: &[&str]| {
            let out = std::process::Command::new(bin)
                .args(args)
                .output()
                .expect("runs");
            assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
            strip_duration(&out.stdout)
        };
        let net = fixture("lenet_toy.toml");
        let eval_args = [
            "eval", "--json",
            "--net", net.to_str().unwrap(),
            "--data", &data,
            "--format", "fixed:i3f5",
            "--limit", "40",
        ];
        assert_eq!(run(&eval_args), run(&eval_args), "eval output must be byte-identical");

        let out_a = dir.path().join("a.csv");
        let out_b = dir.path().join("b.csv");
        for out in [&out_a, &out_b] {
            run(&[
                "sweep", "--json",
                "--net", net.to_str().unwrap(),
                "--data", &data,
                "--space", "float:m1-2,e1-2",
                "--limit", "20",
                "--out", out.to_str().unwrap(),
            ]);
        }
        assert_eq!(
            std::fs::read(&out_a).unwrap(),
            std::fs::read(&out_b).unwrap(),
            "sweep files must be byte-identical"
        );
    }

    #[test]
    fn criterion_7_property_suites() {
        let cases = quantizer_randomized_properties();
        assert!(cases >= 100_000);
        let round_trips = round_trip_all_enumerable();
        weight_container_round_trip();
        loader_malformed_totality();
        r2_bounds_and_baseline();
        cost_table_monotonicity();
        cli_determinism();
        println!(
            "ACCEPTANCE 7 property-suites: PASS \
             ({cases} randomized quantizer cases, {round_trips} round-trips, \
             container/loader/r2/cost/CLI checks)"
        );
    }
}

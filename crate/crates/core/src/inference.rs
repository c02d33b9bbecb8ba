//! DNN forward pass in which every arithmetic operation is performed under a
//! chosen [`NumericFormat`], plus accuracy metrics and the accumulation-trace
//! probe.
//!
//! Weights and the input are quantized once into the active format before a
//! pass, mirroring storage in custom-precision hardware. Every multiply and
//! add inside convolution and fully-connected layers then goes through
//! [`NumericFormat::mac`], accumulating serially in a fixed canonical order:
//! input channel outermost, then kernel row, then kernel column. The bias is
//! added last as a single quantized add. ReLU and pooling compare quantized
//! values exactly and introduce no new quantization events. Softmax runs in
//! baseline (single) precision: it only rescales scores monotonically, and
//! running it in a narrow format could overflow the exponentials.

use crate::error::{Error, Result};
use crate::numeric::NumericFormat;
use crate::tensor::Tensor;
use rayon::prelude::*;
use std::collections::HashMap;

/// One layer of a network, with its structural parameters and the names of
/// the weight tensors it consumes.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerDef {
    Conv2d {
        out_channels: usize,
        kernel: (usize, usize),
        stride: (usize, usize),
        padding: (usize, usize),
        weight: String,
        bias: Option<String>,
    },
    FullyConnected {
        units: usize,
        weight: String,
        bias: Option<String>,
    },
    Relu,
    MaxPool {
        window: (usize, usize),
        stride: (usize, usize),
    },
    AvgPool {
        window: (usize, usize),
        stride: (usize, usize),
    },
    Softmax,
    Flatten,
}

impl LayerDef {
    pub fn kind(&self) -> &'static str {
        match self {
            LayerDef::Conv2d { .. } => "conv2d",
            LayerDef::FullyConnected { .. } => "fully_connected",
            LayerDef::Relu => "relu",
            LayerDef::MaxPool { .. } => "max_pool",
            LayerDef::AvgPool { .. } => "avg_pool",
            LayerDef::Softmax => "softmax",
            LayerDef::Flatten => "flatten",
        }
    }
}

/// An ordered stack of layers plus the named weight tensors they reference.
#[derive(Debug, Clone)]
pub struct NetworkDef {
    layers: Vec<LayerDef>,
    weights: HashMap<String, Tensor>,
    input_shape: Vec<usize>,
    channel_mean: Option<Vec<f64>>,
    layer_shapes: Vec<Vec<usize>>,
}

impl NetworkDef {
    /// Builds a network and validates it: every referenced tensor must exist
    /// with a consistent shape, and layer input/output shapes must chain from
    /// `input_shape` to a final vector of class scores.
    pub fn new(
        layers: Vec<LayerDef>,
        weights: HashMap<String, Tensor>,
        input_shape: Vec<usize>,
        channel_mean: Option<Vec<f64>>,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Network {
                layer: "input".into(),
                reason: "network has no layers".into(),
            });
        }
        if input_shape.is_empty() || input_shape.contains(&0) {
            return Err(Error::Network {
                layer: "input".into(),
                reason: format!("invalid input shape {input_shape:?}"),
            });
        }
        if let Some(mean) = &channel_mean {
            if mean.len() != input_shape[0] {
                return Err(Error::Network {
                    layer: "input".into(),
                    reason: format!(
                        "channel mean has {} entries for {} channels",
                        mean.len(),
                        input_shape[0]
                    ),
                });
            }
        }
        let mut layer_shapes = Vec::with_capacity(layers.len());
        let mut shape = input_shape.clone();
        for (index, layer) in layers.iter().enumerate() {
            shape = infer_shape(index, layer, &shape, &weights)?;
            layer_shapes.push(shape.clone());
        }
        let final_shape = layer_shapes.last().unwrap();
        if final_shape.len() != 1 {
            return Err(Error::Network {
                layer: layer_name(layers.len() - 1, layers.last().unwrap()),
                reason: format!("final layer must produce a score vector, got {final_shape:?}"),
            });
        }
        Ok(Self {
            layers,
            weights,
            input_shape,
            channel_mean,
            layer_shapes,
        })
    }

    pub fn layers(&self) -> &[LayerDef] {
        &self.layers
    }

    pub fn weights(&self) -> &HashMap<String, Tensor> {
        &self.weights
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn channel_mean(&self) -> Option<&[f64]> {
        self.channel_mean.as_deref()
    }

    /// Output shape of each layer, in order.
    pub fn layer_shapes(&self) -> &[Vec<usize>] {
        &self.layer_shapes
    }

    pub fn class_count(&self) -> usize {
        self.layer_shapes.last().unwrap()[0]
    }

    /// Index of the layer holding pre-softmax class scores: the layer before
    /// a trailing softmax, or the final layer when there is none.
    pub fn score_layer_index(&self) -> usize {
        let last = self.layers.len() - 1;
        if matches!(self.layers[last], LayerDef::Softmax) && last > 0 {
            last - 1
        } else {
            last
        }
    }

    fn subtract_mean(&self, input: &Tensor) -> Tensor {
        match &self.channel_mean {
            None => input.clone(),
            Some(mean) => {
                let channel_len: usize = input.shape()[1..].iter().product();
                let mut out = input.clone();
                for (c, &m) in mean.iter().enumerate() {
                    for v in &mut out.data_mut()[c * channel_len..(c + 1) * channel_len] {
                        *v -= m;
                    }
                }
                out
            }
        }
    }
}

fn layer_name(index: usize, layer: &LayerDef) -> String {
    format!("#{index} {}", layer.kind())
}

fn infer_shape(
    index: usize,
    layer: &LayerDef,
    input: &[usize],
    weights: &HashMap<String, Tensor>,
) -> Result<Vec<usize>> {
    let name = || layer_name(index, layer);
    let fail = |reason: String| Error::Network {
        layer: name(),
        reason,
    };
    let lookup = |tensor: &str| {
        weights
            .get(tensor)
            .ok_or_else(|| Error::MissingTensor(tensor.to_string()))
    };
    match layer {
        LayerDef::Conv2d {
            out_channels,
            kernel,
            stride,
            padding,
            weight,
            bias,
        } => {
            let [c, h, w] = *input else {
                return Err(fail(format!("expected [C,H,W] input, got {input:?}")));
            };
            let wt = lookup(weight)?;
            let expected = [*out_channels, c, kernel.0, kernel.1];
            if wt.shape() != expected {
                return Err(fail(format!(
                    "weight {weight:?} has shape {:?}, expected {expected:?}",
                    wt.shape()
                )));
            }
            if let Some(bias) = bias {
                let bt = lookup(bias)?;
                if bt.shape() != [*out_channels] {
                    return Err(fail(format!(
                        "bias {bias:?} has shape {:?}, expected [{out_channels}]",
                        bt.shape()
                    )));
                }
            }
            if stride.0 == 0 || stride.1 == 0 {
                return Err(fail("stride must be positive".into()));
            }
            let ph = h + 2 * padding.0;
            let pw = w + 2 * padding.1;
            if ph < kernel.0 || pw < kernel.1 {
                return Err(fail(format!(
                    "kernel {kernel:?} larger than padded input {ph}x{pw}"
                )));
            }
            Ok(vec![
                *out_channels,
                (ph - kernel.0) / stride.0 + 1,
                (pw - kernel.1) / stride.1 + 1,
            ])
        }
        LayerDef::FullyConnected {
            units,
            weight,
            bias,
        } => {
            let [n] = *input else {
                return Err(fail(format!(
                    "expected flat input (did you forget a flatten layer?), got {input:?}"
                )));
            };
            let wt = lookup(weight)?;
            if wt.shape() != [*units, n] {
                return Err(fail(format!(
                    "weight {weight:?} has shape {:?}, expected [{units}, {n}]",
                    wt.shape()
                )));
            }
            if let Some(bias) = bias {
                let bt = lookup(bias)?;
                if bt.shape() != [*units] {
                    return Err(fail(format!(
                        "bias {bias:?} has shape {:?}, expected [{units}]",
                        bt.shape()
                    )));
                }
            }
            Ok(vec![*units])
        }
        LayerDef::Relu => Ok(input.to_vec()),
        LayerDef::MaxPool { window, stride } | LayerDef::AvgPool { window, stride } => {
            let [c, h, w] = *input else {
                return Err(fail(format!("expected [C,H,W] input, got {input:?}")));
            };
            if window.0 == 0 || window.1 == 0 || stride.0 == 0 || stride.1 == 0 {
                return Err(fail("window and stride must be positive".into()));
            }
            if h < window.0 || w < window.1 {
                return Err(fail(format!("window {window:?} larger than input {h}x{w}")));
            }
            Ok(vec![
                c,
                (h - window.0) / stride.0 + 1,
                (w - window.1) / stride.1 + 1,
            ])
        }
        LayerDef::Softmax => {
            let [n] = *input else {
                return Err(fail(format!("expected a score vector, got {input:?}")));
            };
            Ok(vec![n])
        }
        LayerDef::Flatten => Ok(vec![input.iter().product()]),
    }
}

/// A network bound to a numeric format, with weights pre-quantized.
pub struct Evaluator<'a> {
    net: &'a NetworkDef,
    fmt: NumericFormat,
    weights: HashMap<&'a str, Tensor>,
}

impl<'a> Evaluator<'a> {
    pub fn new(net: &'a NetworkDef, fmt: NumericFormat) -> Result<Self> {
        let mut weights = HashMap::with_capacity(net.weights.len());
        for (name, tensor) in &net.weights {
            weights.insert(name.as_str(), tensor.quantized(&fmt)?);
        }
        Ok(Self { net, fmt, weights })
    }

    pub fn format(&self) -> &NumericFormat {
        &self.fmt
    }

    /// Runs the forward pass and returns every layer's activation tensor.
    pub fn forward(&self, input: &Tensor) -> Result<Vec<Tensor>> {
        let quantized = self.quantized_input(input)?;
        let mut activations = Vec::with_capacity(self.net.layers.len());
        let mut current = quantized;
        for layer in &self.net.layers {
            current = self.eval_layer(layer, &current);
            activations.push(current.clone());
        }
        Ok(activations)
    }

    /// Final-layer class scores.
    pub fn scores(&self, input: &Tensor) -> Result<Tensor> {
        Ok(self.forward(input)?.pop().unwrap())
    }

    /// Pre-softmax class scores.
    pub fn pre_softmax_scores(&self, input: &Tensor) -> Result<Tensor> {
        let mut activations = self.forward(input)?;
        Ok(activations.swap_remove(self.net.score_layer_index()))
    }

    fn quantized_input(&self, input: &Tensor) -> Result<Tensor> {
        if input.shape() != self.net.input_shape {
            return Err(Error::Network {
                layer: "input".into(),
                reason: format!(
                    "input shape {:?} does not match network input {:?}",
                    input.shape(),
                    self.net.input_shape
                ),
            });
        }
        self.net.subtract_mean(input).quantized(&self.fmt)
    }

    fn eval_layer(&self, layer: &LayerDef, x: &Tensor) -> Tensor {
        match layer {
            LayerDef::Conv2d {
                out_channels,
                kernel,
                stride,
                padding,
                weight,
                bias,
            } => {
                let (c, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2]);
                let wt = &self.weights[weight.as_str()];
                let bt = bias.as_ref().map(|b| &self.weights[b.as_str()]);
                let oh = (h + 2 * padding.0 - kernel.0) / stride.0 + 1;
                let ow = (w + 2 * padding.1 - kernel.1) / stride.1 + 1;
                let mut out = Tensor::zeros(vec![*out_channels, oh, ow]);
                for o in 0..*out_channels {
                    for oy in 0..oh {
                        for ox in 0..ow {
                            let acc = conv_neuron(
                                &self.fmt,
                                x.data(),
                                (c, h, w),
                                wt.data(),
                                bt.map(|b| b.data()[o]),
                                *kernel,
                                *stride,
                                *padding,
                                (o, oy, ox),
                                |_, _| {},
                            );
                            out.data_mut()[(o * oh + oy) * ow + ox] = acc;
                        }
                    }
                }
                out
            }
            LayerDef::FullyConnected {
                units,
                weight,
                bias,
            } => {
                let wt = &self.weights[weight.as_str()];
                let bt = bias.as_ref().map(|b| &self.weights[b.as_str()]);
                let n = x.len();
                let mut out = Tensor::zeros(vec![*units]);
                for u in 0..*units {
                    let acc = fc_neuron(
                        &self.fmt,
                        x.data(),
                        &wt.data()[u * n..(u + 1) * n],
                        bt.map(|b| b.data()[u]),
                        |_, _| {},
                    );
                    out.data_mut()[u] = acc;
                }
                out
            }
            LayerDef::Relu => {
                let mut out = x.clone();
                for v in out.data_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
                out
            }
            LayerDef::MaxPool { window, stride } => {
                self.pool(x, *window, *stride, |fmt, values| {
                    let mut best = values[0];
                    for &v in &values[1..] {
                        if v > best {
                            best = v;
                        }
                    }
                    let _ = fmt;
                    best
                })
            }
            LayerDef::AvgPool { window, stride } => {
                let count = (window.0 * window.1) as f64;
                self.pool(x, *window, *stride, move |fmt, values| {
                    let mut sum = 0.0;
                    for &v in values {
                        sum = fmt.qadd(sum, v);
                    }
                    fmt.quantize(sum / count).expect("finite average")
                })
            }
            LayerDef::Softmax => {
                Tensor::new(x.shape().to_vec(), softmax_baseline(x.data())).expect("finite softmax")
            }
            LayerDef::Flatten => x.flattened(),
        }
    }

    fn pool(
        &self,
        x: &Tensor,
        window: (usize, usize),
        stride: (usize, usize),
        reduce: impl Fn(&NumericFormat, &[f64]) -> f64,
    ) -> Tensor {
        let (c, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2]);
        let oh = (h - window.0) / stride.0 + 1;
        let ow = (w - window.1) / stride.1 + 1;
        let mut out = Tensor::zeros(vec![c, oh, ow]);
        let mut values = Vec::with_capacity(window.0 * window.1);
        for ch in 0..c {
            for oy in 0..oh {
                for ox in 0..ow {
                    values.clear();
                    for wy in 0..window.0 {
                        for wx in 0..window.1 {
                            let iy = oy * stride.0 + wy;
                            let ix = ox * stride.1 + wx;
                            values.push(x.data()[(ch * h + iy) * w + ix]);
                        }
                    }
                    out.data_mut()[(ch * oh + oy) * ow + ox] = reduce(&self.fmt, &values);
                }
            }
        }
        out
    }
}

/// Serial accumulation of one convolution output neuron in canonical order,
/// invoking `on_step` with the running sum after every MAC (padded positions
/// contribute a quantized zero and still count as a step). The bias, when
/// present, is one final quantized add and one final step.
#[allow(clippy::too_many_arguments)]
fn conv_neuron(
    fmt: &NumericFormat,
    x: &[f64],
    dims: (usize, usize, usize),
    weights: &[f64],
    bias: Option<f64>,
    kernel: (usize, usize),
    stride: (usize, usize),
    padding: (usize, usize),
    neuron: (usize, usize, usize),
    mut on_step: impl FnMut(usize, f64),
) -> f64 {
    let (c, h, w) = dims;
    let (o, oy, ox) = neuron;
    let mut acc = 0.0;
    let mut step = 0;
    for ci in 0..c {
        for ky in 0..kernel.0 {
            for kx in 0..kernel.1 {
                let iy = (oy * stride.0 + ky) as isize - padding.0 as isize;
                let ix = (ox * stride.1 + kx) as isize - padding.1 as isize;
                let xv = if iy >= 0 && (iy as usize) < h && ix >= 0 && (ix as usize) < w {
                    x[(ci * h + iy as usize) * w + ix as usize]
                } else {
                    0.0
                };
                let wv = weights[((o * c + ci) * kernel.0 + ky) * kernel.1 + kx];
                acc = fmt.mac(acc, wv, xv);
                on_step(step, acc);
                step += 1;
            }
        }
    }
    if let Some(b) = bias {
        acc = fmt.qadd(acc, b);
        on_step(step, acc);
    }
    acc
}

/// Serial accumulation of one fully-connected output unit.
fn fc_neuron(
    fmt: &NumericFormat,
    x: &[f64],
    weights: &[f64],
    bias: Option<f64>,
    mut on_step: impl FnMut(usize, f64),
) -> f64 {
    let mut acc = 0.0;
    for (i, (&wv, &xv)) in weights.iter().zip(x).enumerate() {
        acc = fmt.mac(acc, wv, xv);
        on_step(i, acc);
    }
    if let Some(b) = bias {
        acc = fmt.qadd(acc, b);
        on_step(x.len(), acc);
    }
    acc
}

/// Softmax evaluated in baseline (single) precision with max subtraction.
/// Inputs outside single-precision range are clamped to the widest finite
/// magnitude first.
fn softmax_baseline(scores: &[f64]) -> Vec<f64> {
    let xs: Vec<f32> = scores
        .iter()
        .map(|&v| v.clamp(-(f32::MAX as f64), f32::MAX as f64) as f32)
        .collect();
    let max = xs.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let exps: Vec<f32> = xs.iter().map(|&v| (v - max).exp()).collect();
    let sum: f32 = exps.iter().sum();
    exps.iter().map(|&e| f64::from(e / sum)).collect()
}

/// Runs the forward pass of `net` on one input under `fmt` and returns every
/// layer's activations. One-shot form of [`Evaluator::forward`]; evaluating
/// many inputs under one format is cheaper through a reused [`Evaluator`].
pub fn forward(net: &NetworkDef, input: &Tensor, fmt: NumericFormat) -> Result<Vec<Tensor>> {
    Evaluator::new(net, fmt)?.forward(input)
}

/// Running quantized sum of one neuron after each accumulation step, paired
/// with the same step under baseline arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub running_sum: f64,
    pub exact_running_sum: f64,
}

/// Serialized accumulation of one neuron's inputs under `fmt`, paired with
/// the baseline running sum. The final record equals that neuron's
/// pre-activation output under [`Evaluator::forward`].
pub fn accumulation_trace(
    net: &NetworkDef,
    input: &Tensor,
    layer_index: usize,
    neuron_index: usize,
    fmt: NumericFormat,
) -> Result<Vec<TraceRecord>> {
    let layer = net.layers.get(layer_index).ok_or_else(|| {
        Error::Index(format!(
            "layer index {layer_index} out of range for {} layers",
            net.layers.len()
        ))
    })?;
    if !matches!(
        layer,
        LayerDef::Conv2d { .. } | LayerDef::FullyConnected { .. }
    ) {
        return Err(Error::Index(format!(
            "layer {} is {}, traces need conv2d or fully_connected",
            layer_index,
            layer.kind()
        )));
    }
    let out_len: usize = net.layer_shapes[layer_index].iter().product();
    if neuron_index >= out_len {
        return Err(Error::Index(format!(
            "neuron index {neuron_index} out of range for {out_len} outputs"
        )));
    }

    let custom = Evaluator::new(net, fmt)?;
    let baseline = Evaluator::new(net, NumericFormat::Baseline)?;
    let custom_in = layer_input(&custom, input, layer_index)?;
    let baseline_in = layer_input(&baseline, input, layer_index)?;

    let custom_steps = neuron_steps(&custom, layer, &custom_in, neuron_index);
    let baseline_steps = neuron_steps(&baseline, layer, &baseline_in, neuron_index);
    debug_assert_eq!(custom_steps.len(), baseline_steps.len());
    Ok(custom_steps
        .into_iter()
        .zip(baseline_steps)
        .enumerate()
        .map(|(step, (running_sum, exact_running_sum))| TraceRecord {
            step,
            running_sum,
            exact_running_sum,
        })
        .collect())
}

fn layer_input(evaluator: &Evaluator, input: &Tensor, layer_index: usize) -> Result<Tensor> {
    if layer_index == 0 {
        evaluator.quantized_input(input)
    } else {
        let mut activations = evaluator.forward(input)?;
        Ok(activations.swap_remove(layer_index - 1))
    }
}

fn neuron_steps(
    evaluator: &Evaluator,
    layer: &LayerDef,
    x: &Tensor,
    neuron_index: usize,
) -> Vec<f64> {
    let mut steps = Vec::new();
    match layer {
        LayerDef::Conv2d {
            out_channels: _,
            kernel,
            stride,
            padding,
            weight,
            bias,
        } => {
            let (c, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2]);
            let wt = &evaluator.weights[weight.as_str()];
            let ph = (h + 2 * padding.0 - kernel.0) / stride.0 + 1;
            let pw = (w + 2 * padding.1 - kernel.1) / stride.1 + 1;
            let o = neuron_index / (ph * pw);
            let oy = (neuron_index / pw) % ph;
            let ox = neuron_index % pw;
            let bias_value = bias
                .as_ref()
                .map(|b| evaluator.weights[b.as_str()].data()[o]);
            conv_neuron(
                &evaluator.fmt,
                x.data(),
                (c, h, w),
                wt.data(),
                bias_value,
                *kernel,
                *stride,
                *padding,
                (o, oy, ox),
                |_, sum| steps.push(sum),
            );
        }
        LayerDef::FullyConnected { weight, bias, .. } => {
            let wt = &evaluator.weights[weight.as_str()];
            let n = x.len();
            let bias_value = bias
                .as_ref()
                .map(|b| evaluator.weights[b.as_str()].data()[neuron_index]);
            fc_neuron(
                &evaluator.fmt,
                x.data(),
                &wt.data()[neuron_index * n..(neuron_index + 1) * n],
                bias_value,
                |_, sum| steps.push(sum),
            );
        }
        _ => unreachable!("validated by accumulation_trace"),
    }
    steps
}

/// A labeled set of inputs.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub inputs: Vec<Tensor>,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn new(inputs: Vec<Tensor>, labels: Vec<usize>) -> Result<Self> {
        if inputs.len() != labels.len() {
            return Err(Error::Metric(format!(
                "{} inputs but {} labels",
                inputs.len(),
                labels.len()
            )));
        }
        Ok(Self { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// The first `n` examples (all of them if `n` is larger).
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            inputs: self.inputs[..n].to_vec(),
            labels: self.labels[..n].to_vec(),
        }
    }
}

/// Fraction of inputs whose true label is among the `k` highest scores.
/// Ties are broken toward the lower class index, deterministically.
pub fn top_k_accuracy(scores: &[Tensor], labels: &[usize], k: usize) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Metric(format!(
            "{} score vectors but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.is_empty() {
        return Err(Error::Metric("no scores".into()));
    }
    let classes = scores[0].len();
    if k < 1 || k > classes {
        return Err(Error::Metric(format!(
            "k={k} out of range for {classes} classes"
        )));
    }
    let mut correct = 0usize;
    for (s, &label) in scores.iter().zip(labels) {
        if s.len() != classes {
            return Err(Error::Metric("inconsistent score vector lengths".into()));
        }
        if label >= classes {
            return Err(Error::Metric(format!(
                "label {label} out of range for {classes} classes"
            )));
        }
        let data = s.data();
        let target = data[label];
        let rank = data
            .iter()
            .enumerate()
            .filter(|&(j, &v)| v > target || (v == target && j < label))
            .count();
        if rank < k {
            correct += 1;
        }
    }
    Ok(correct as f64 / labels.len() as f64)
}

/// Custom-precision accuracy divided by baseline accuracy.
pub fn normalized_accuracy(custom: f64, baseline: f64) -> Result<f64> {
    if baseline <= 0.0 {
        return Err(Error::Metric(format!(
            "baseline accuracy must be positive, got {baseline}"
        )));
    }
    Ok(custom / baseline)
}

/// Top-k accuracy of `net` under `fmt` over a dataset. Inputs are evaluated
/// in parallel; per-neuron accumulation stays serial by contract.
pub fn evaluate_accuracy(
    net: &NetworkDef,
    fmt: NumericFormat,
    dataset: &Dataset,
    k: usize,
) -> Result<f64> {
    let evaluator = Evaluator::new(net, fmt)?;
    let scores: Vec<Tensor> = dataset
        .inputs
        .par_iter()
        .map(|input| evaluator.scores(input))
        .collect::<Result<_>>()?;
    top_k_accuracy(&scores, &dataset.labels, k)
}

/// Pre-softmax score vectors of `net` under `fmt` for each input, in order.
pub fn collect_pre_softmax(
    net: &NetworkDef,
    fmt: NumericFormat,
    inputs: &[Tensor],
) -> Result<Vec<Tensor>> {
    let evaluator = Evaluator::new(net, fmt)?;
    inputs
        .par_iter()
        .map(|input| evaluator.pre_softmax_scores(input))
        .collect()
}

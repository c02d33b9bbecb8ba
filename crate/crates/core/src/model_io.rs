//! Bit-exact loading of networks, weights, and benchmark datasets.
//!
//! Weights live in a self-defined container (magic `PRECISW1`) of named
//! little-endian single-precision tensors. Networks are declared in a TOML
//! manifest listing the input shape, the ordered layers, and the container
//! path. Datasets use the published MNIST IDX and CIFAR-10 binary layouts.

use crate::error::{Error, Result};
use crate::inference::{Dataset, LayerDef, NetworkDef};
use crate::tensor::Tensor;
use serde::Deserialize;
use std::collections::HashMap;
use std::fs;
use std::path::Path;

/// 8-byte tag opening every weight container.
pub const WEIGHT_MAGIC: &[u8; 8] = b"PRECISW1";

const MNIST_IMAGE_MAGIC: u32 = 0x0000_0803;
const MNIST_LABEL_MAGIC: u32 = 0x0000_0801;
const CIFAR_RECORD_LEN: usize = 3073;

/// Reads a weight container: `PRECISW1`, a little-endian u32 entry count,
/// then per entry a u16 name length, the UTF-8 name, a u8 rank, u32 dims, and
/// the tensor payload as little-endian IEEE-754 single-precision values.
pub fn read_weights(path: &Path) -> Result<Vec<(String, Tensor)>> {
    let bytes = fs::read(path)?;
    let mut r = ByteReader::new(&bytes, path);
    let magic = r.take(8)?;
    if magic != WEIGHT_MAGIC {
        return Err(r.fail_at(0, format!("bad magic {magic:02x?}")));
    }
    let count = r.u32_le()?;
    let mut entries: Vec<(String, Tensor)> = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let name_len = r.u16_le()? as usize;
        let name_off = r.pos();
        let name = std::str::from_utf8(r.take(name_len)?)
            .map_err(|_| r.fail_at(name_off, "tensor name is not UTF-8".into()))?
            .to_string();
        if entries.iter().any(|(n, _)| *n == name) {
            return Err(r.fail_at(name_off, format!("duplicate tensor name {name:?}")));
        }
        let rank = r.u8()? as usize;
        if rank == 0 {
            return Err(r.fail_at(r.pos() - 1, format!("tensor {name:?} has rank 0")));
        }
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(r.u32_le()? as usize);
        }
        let len: usize = dims.iter().product();
        let payload_off = r.pos();
        let payload = r.take(len * 4)?;
        let mut data = Vec::with_capacity(len);
        for chunk in payload.chunks_exact(4) {
            data.push(f64::from(f32::from_le_bytes(chunk.try_into().unwrap())));
        }
        let tensor = Tensor::new(dims, data)
            .map_err(|e| r.fail_at(payload_off, format!("tensor {name:?}: {e}")))?;
        entries.push((name, tensor));
    }
    if r.pos() != bytes.len() {
        return Err(r.fail_at(r.pos(), "trailing bytes after last entry".into()));
    }
    Ok(entries)
}

/// Writes a weight container; the inverse of [`read_weights`], bit-exact for
/// tensors whose elements are single-precision values.
pub fn write_weights(path: &Path, entries: &[(String, Tensor)]) -> Result<()> {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(WEIGHT_MAGIC);
    bytes.extend_from_slice(&(entries.len() as u32).to_le_bytes());
    for (name, tensor) in entries {
        bytes.extend_from_slice(&(name.len() as u16).to_le_bytes());
        bytes.extend_from_slice(name.as_bytes());
        bytes.push(tensor.rank() as u8);
        for &d in tensor.shape() {
            bytes.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in tensor.data() {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    #[allow(dead_code)]
    name: Option<String>,
    input_shape: Vec<usize>,
    weights: String,
    mean: Option<Vec<f64>>,
    #[serde(rename = "layer")]
    layers: Vec<ManifestLayer>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ManifestLayer {
    Conv2d {
        out_channels: usize,
        kernel: (usize, usize),
        #[serde(default = "one_pair")]
        stride: (usize, usize),
        #[serde(default)]
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
        stride: Option<(usize, usize)>,
    },
    AvgPool {
        window: (usize, usize),
        stride: Option<(usize, usize)>,
    },
    Softmax,
    Flatten,
}

fn one_pair() -> (usize, usize) {
    (1, 1)
}

impl From<ManifestLayer> for LayerDef {
    fn from(layer: ManifestLayer) -> Self {
        match layer {
            ManifestLayer::Conv2d {
                out_channels,
                kernel,
                stride,
                padding,
                weight,
                bias,
            } => LayerDef::Conv2d {
                out_channels,
                kernel,
                stride,
                padding,
                weight,
                bias,
            },
            ManifestLayer::FullyConnected {
                units,
                weight,
                bias,
            } => LayerDef::FullyConnected {
                units,
                weight,
                bias,
            },
            ManifestLayer::Relu => LayerDef::Relu,
            ManifestLayer::MaxPool { window, stride } => LayerDef::MaxPool {
                window,
                stride: stride.unwrap_or(window),
            },
            ManifestLayer::AvgPool { window, stride } => LayerDef::AvgPool {
                window,
                stride: stride.unwrap_or(window),
            },
            ManifestLayer::Softmax => LayerDef::Softmax,
            ManifestLayer::Flatten => LayerDef::Flatten,
        }
    }
}

/// Loads and validates a network from a TOML manifest. The weight container
/// path is resolved relative to the manifest's directory. Every layer is
/// shape-chained at load time; malformed networks never load partially.
pub fn load_network(manifest_path: &Path) -> Result<NetworkDef> {
    let text = fs::read_to_string(manifest_path)?;
    let manifest: Manifest = toml::from_str(&text).map_err(|e| Error::ParseFile {
        path: manifest_path.display().to_string(),
        reason: e.to_string(),
    })?;
    let container = manifest_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&manifest.weights);
    let weights: HashMap<String, Tensor> = read_weights(&container)?.into_iter().collect();
    let layers: Vec<LayerDef> = manifest.layers.into_iter().map(Into::into).collect();
    NetworkDef::new(layers, weights, manifest.input_shape, manifest.mean)
}

/// Loads an MNIST IDX image/label pair. Pixels are scaled to `[0, 1]` by
/// dividing by 255; tensors are shaped `[1, rows, cols]`.
pub fn load_mnist(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let image_bytes = fs::read(images_path)?;
    let mut r = ByteReader::new(&image_bytes, images_path);
    let magic = r.u32_be()?;
    if magic != MNIST_IMAGE_MAGIC {
        return Err(r.fail_at(0, format!("bad image magic {magic:#010x}")));
    }
    let count = r.u32_be()? as usize;
    let rows = r.u32_be()? as usize;
    let cols = r.u32_be()? as usize;
    if rows == 0 || cols == 0 {
        return Err(r.fail_at(8, format!("invalid image dimensions {rows}x{cols}")));
    }
    let mut inputs = Vec::with_capacity(count);
    for _ in 0..count {
        let pixels = r.take(rows * cols)?;
        let data: Vec<f64> = pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
        inputs.push(Tensor::new(vec![1, rows, cols], data).expect("pixel grid"));
    }
    if r.pos() != image_bytes.len() {
        return Err(r.fail_at(r.pos(), "trailing bytes after last image".into()));
    }

    let label_bytes = fs::read(labels_path)?;
    let mut r = ByteReader::new(&label_bytes, labels_path);
    let magic = r.u32_be()?;
    if magic != MNIST_LABEL_MAGIC {
        return Err(r.fail_at(0, format!("bad label magic {magic:#010x}")));
    }
    let label_count = r.u32_be()? as usize;
    if label_count != count {
        return Err(r.fail_at(4, format!("{label_count} labels for {count} images")));
    }
    let raw = r.take(label_count)?;
    let mut labels = Vec::with_capacity(label_count);
    for (i, &l) in raw.iter().enumerate() {
        if l > 9 {
            return Err(ByteReader::new(&label_bytes, labels_path)
                .fail_at(8 + i, format!("label {l} out of range 0-9")));
        }
        labels.push(l as usize);
    }
    Dataset::new(inputs, labels)
}

/// Loads a CIFAR-10 binary batch: records of one label byte followed by
/// 3072 channel-planar pixels. Tensors are shaped `[3, 32, 32]`, scaled to
/// `[0, 1]`.
pub fn load_cifar10(batch_path: &Path) -> Result<Dataset> {
    let bytes = fs::read(batch_path)?;
    if bytes.len() % CIFAR_RECORD_LEN != 0 {
        return Err(Error::DataFormat {
            path: batch_path.display().to_string(),
            offset: bytes.len() as u64,
            reason: format!("file size {} is not a multiple of {CIFAR_RECORD_LEN}", bytes.len()),
        });
    }
    let count = bytes.len() / CIFAR_RECORD_LEN;
    let mut inputs = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for (i, record) in bytes.chunks_exact(CIFAR_RECORD_LEN).enumerate() {
        let label = record[0];
        if label > 9 {
            return Err(Error::DataFormat {
                path: batch_path.display().to_string(),
                offset: (i * CIFAR_RECORD_LEN) as u64,
                reason: format!("label {label} out of range 0-9"),
            });
        }
        labels.push(label as usize);
        let data: Vec<f64> = record[1..].iter().map(|&p| f64::from(p) / 255.0).collect();
        inputs.push(Tensor::new(vec![3, 32, 32], data).expect("pixel grid"));
    }
    Dataset::new(inputs, labels)
}

/// Loads a dataset from a spec string: `mnist:<images>,<labels>` or
/// `cifar:<batch.bin>`. Paths are used as given.
pub fn load_dataset(spec: &str) -> Result<Dataset> {
    if let Some(body) = spec.strip_prefix("mnist:") {
        let (images, labels) = body.split_once(',').ok_or_else(|| Error::ParseFile {
            path: spec.to_string(),
            reason: "expected mnist:<images>,<labels>".into(),
        })?;
        load_mnist(Path::new(images), Path::new(labels))
    } else if let Some(body) = spec.strip_prefix("cifar:") {
        load_cifar10(Path::new(body))
    } else {
        Err(Error::ParseFile {
            path: spec.to_string(),
            reason: "expected a mnist: or cifar: dataset spec".into(),
        })
    }
}

/// Cursor over a byte buffer that reports the offset of any failure.
struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: String,
}

impl<'a> ByteReader<'a> {
    fn new(bytes: &'a [u8], path: &Path) -> Self {
        Self {
            bytes,
            pos: 0,
            path: path.display().to_string(),
        }
    }

    fn pos(&self) -> usize {
        self.pos
    }

    fn fail_at(&self, offset: usize, reason: String) -> Error {
        Error::DataFormat {
            path: self.path.clone(),
            offset: offset as u64,
            reason,
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(self.fail_at(
                self.pos,
                format!(
                    "truncated: needed {n} bytes, {} remain",
                    self.bytes.len() - self.pos
                ),
            ));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16_le(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32_le(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u32_be(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }
}

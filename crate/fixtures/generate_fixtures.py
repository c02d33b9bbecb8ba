#!/usr/bin/env python3
"""Regenerates the bundled fixtures: a synthetic 10-class image dataset in
MNIST IDX format plus two small trained networks (lenet_toy, mlp_toy) in the
PRECISW1 weight-container format.

The dataset is built from 10 fixed random prototype images; each sample is a
brightness-jittered prototype with per-sample Gaussian noise, so sample
difficulty varies smoothly and accuracy degrades gradually as numeric
precision shrinks. Training uses PyTorch (CPU) with pinned seeds.

Run from the repository root:  python3 fixtures/generate_fixtures.py
"""

import struct
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn

HERE = Path(__file__).resolve().parent

SEED = 42
IMG = 28
CLASSES = 10
TRAIN_N = 4000
TEST_N = 200
BRIGHTNESS = (0.55, 1.0)
NOISE_SIGMA = (0.25, 1.05)
EPOCHS = 6
BATCH = 64
LR = 1e-3
# Post-training power-of-two rescale of each stage (classification-invariant;
# shifts where the fixed-point accuracy cliff sits in the design space).
CONV_SCALE = 1.0
FC_SCALE = 1.0


def make_dataset(protos, rng, count):
    labels = rng.integers(0, CLASSES, size=count)
    brightness = rng.uniform(*BRIGHTNESS, size=(count, 1, 1))
    sigma = rng.uniform(*NOISE_SIGMA, size=(count, 1, 1))
    noise = rng.standard_normal((count, IMG, IMG)) * sigma
    images = np.clip(protos[labels] * brightness + noise, 0.0, 1.0)
    return (images * 255.0).round().astype(np.uint8), labels.astype(np.uint8)


def write_idx(images, labels, images_path, labels_path):
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), IMG, IMG))
        f.write(images.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(labels.tobytes())


def write_container(path, entries):
    with open(path, "wb") as f:
        f.write(b"PRECISW1")
        f.write(struct.pack("<I", len(entries)))
        for name, tensor in entries:
            data = np.ascontiguousarray(tensor, dtype="<f4")
            encoded = name.encode()
            f.write(struct.pack("<H", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("B", data.ndim))
            for dim in data.shape:
                f.write(struct.pack("<I", dim))
            f.write(data.tobytes())


class LenetToy(nn.Module):
    def __init__(self):
        super().__init__()
        self.conv = nn.Conv2d(1, 4, 3, padding=1)
        self.fc = nn.Linear(4 * 14 * 14, CLASSES)

    def forward(self, x):
        x = torch.relu(self.conv(x))
        x = torch.max_pool2d(x, 2)
        return self.fc(x.flatten(1))


class MlpToy(nn.Module):
    def __init__(self):
        super().__init__()
        self.fc1 = nn.Linear(IMG * IMG, 32)
        self.fc2 = nn.Linear(32, CLASSES)

    def forward(self, x):
        return self.fc2(torch.relu(self.fc1(x.flatten(1))))


def train(model, images, labels, test_images, test_labels):
    x = torch.from_numpy(images.astype(np.float32) / 255.0).unsqueeze(1)
    y = torch.from_numpy(labels.astype(np.int64))
    tx = torch.from_numpy(test_images.astype(np.float32) / 255.0).unsqueeze(1)
    ty = torch.from_numpy(test_labels.astype(np.int64))
    opt = torch.optim.Adam(model.parameters(), lr=LR)
    loss_fn = nn.CrossEntropyLoss()
    for epoch in range(EPOCHS):
        perm = torch.randperm(len(x))
        for start in range(0, len(x), BATCH):
            idx = perm[start : start + BATCH]
            opt.zero_grad()
            loss = loss_fn(model(x[idx]), y[idx])
            loss.backward()
            opt.step()
        with torch.no_grad():
            acc = (model(tx).argmax(1) == ty).float().mean().item()
        print(f"  epoch {epoch + 1}: test accuracy {acc:.3f}")
    return acc


LENET_MANIFEST = """\
name = "lenet_toy"
input_shape = [1, 28, 28]
weights = "lenet_toy.weights"

[[layer]]
kind = "conv2d"
out_channels = 4
kernel = [3, 3]
stride = [1, 1]
padding = [1, 1]
weight = "conv1.w"
bias = "conv1.b"

[[layer]]
kind = "relu"

[[layer]]
kind = "max_pool"
window = [2, 2]
stride = [2, 2]

[[layer]]
kind = "flatten"

[[layer]]
kind = "fully_connected"
units = 10
weight = "fc1.w"
bias = "fc1.b"

[[layer]]
kind = "softmax"
"""

MLP_MANIFEST = """\
name = "mlp_toy"
input_shape = [1, 28, 28]
weights = "mlp_toy.weights"

[[layer]]
kind = "flatten"

[[layer]]
kind = "fully_connected"
units = 32
weight = "fc1.w"
bias = "fc1.b"

[[layer]]
kind = "relu"

[[layer]]
kind = "fully_connected"
units = 10
weight = "fc2.w"
bias = "fc2.b"

[[layer]]
kind = "softmax"
"""


def main():
    rng = np.random.default_rng(SEED)
    torch.manual_seed(SEED)

    protos = rng.random((CLASSES, IMG, IMG))
    train_images, train_labels = make_dataset(protos, rng, TRAIN_N)
    test_images, test_labels = make_dataset(protos, rng, TEST_N)
    data_dir = HERE / "mnist_synth"
    data_dir.mkdir(exist_ok=True)
    write_idx(
        test_images,
        test_labels,
        data_dir / "test-images-idx3-ubyte",
        data_dir / "test-labels-idx1-ubyte",
    )
    print(f"wrote {TEST_N} test images to {data_dir}")

    print("training lenet_toy")
    lenet = LenetToy()
    train(lenet, train_images, train_labels, test_images, test_labels)
    conv_w = lenet.conv.weight.detach().numpy() * CONV_SCALE
    conv_b = lenet.conv.bias.detach().numpy() * CONV_SCALE
    fc_w = lenet.fc.weight.detach().numpy() * FC_SCALE
    fc_b = lenet.fc.bias.detach().numpy() * CONV_SCALE * FC_SCALE
    write_container(
        HERE / "lenet_toy.weights",
        [("conv1.w", conv_w), ("conv1.b", conv_b), ("fc1.w", fc_w), ("fc1.b", fc_b)],
    )
    (HERE / "lenet_toy.toml").write_text(LENET_MANIFEST)

    print("training mlp_toy")
    mlp = MlpToy()
    train(mlp, train_images, train_labels, test_images, test_labels)
    write_container(
        HERE / "mlp_toy.weights",
        [
            ("fc1.w", mlp.fc1.weight.detach().numpy()),
            ("fc1.b", mlp.fc1.bias.detach().numpy()),
            ("fc2.w", mlp.fc2.weight.detach().numpy()),
            ("fc2.b", mlp.fc2.bias.detach().numpy()),
        ],
    )
    (HERE / "mlp_toy.toml").write_text(MLP_MANIFEST)
    print("done")


if __name__ == "__main__":
    main()

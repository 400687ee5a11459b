#!/usr/bin/env python3
"""Builds the bundled desk-scale datasets under data/.

MNIST digits come from the npm package `mnist` (10k genuine MNIST examples,
pixels stored as byte/255 rounded to three decimals, so the original bytes are
recovered exactly). The hangman corpus comes from the npm package `kjv`
(King James Bible verse text), normalized to the 27-symbol alphabet.

Usage:
    npm pack mnist kjv            # downloads mnist-1.1.0.tgz, kjv-1.0.0.tgz
    tar xzf mnist-1.1.0.tgz -C /tmp/mnist_pkg
    tar xzf kjv-1.0.0.tgz -C /tmp/kjv_pkg
    python3 scripts/prepare_data.py /tmp/mnist_pkg/package /tmp/kjv_pkg/package

Outputs (committed to the repository):
    data/mnist/train-images-idx3-ubyte   8000 images, fixed shuffle
    data/mnist/train-labels-idx1-ubyte
    data/mnist/test-images-idx3-ubyte    2000 images
    data/mnist/test-labels-idx1-ubyte
    data/hangman/corpus.txt              10^6 chars, a-z and space only
"""

import json
import os
import random
import struct
import sys


def write_idx_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">iiii", 0x803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">ii", 0x801, len(labels)))
        f.write(bytes(labels))


def build_mnist(pkg_dir, out_dir):
    examples = []
    for digit in range(10):
        with open(os.path.join(pkg_dir, "src", "digits", f"{digit}.json")) as f:
            flat = json.load(f)["data"]
        assert len(flat) % 784 == 0
        for i in range(len(flat) // 784):
            px = [int(round(v * 255)) for v in flat[i * 784:(i + 1) * 784]]
            examples.append((px, digit))
    assert len(examples) == 10000
    random.Random(1234).shuffle(examples)
    os.makedirs(out_dir, exist_ok=True)
    train, test = examples[:8000], examples[8000:]
    write_idx_images(os.path.join(out_dir, "train-images-idx3-ubyte"), [e[0] for e in train])
    write_idx_labels(os.path.join(out_dir, "train-labels-idx1-ubyte"), [e[1] for e in train])
    write_idx_images(os.path.join(out_dir, "test-images-idx3-ubyte"), [e[0] for e in test])
    write_idx_labels(os.path.join(out_dir, "test-labels-idx1-ubyte"), [e[1] for e in test])
    print(f"mnist: {len(train)} train / {len(test)} test -> {out_dir}")


def build_corpus(pkg_dir, out_path, length=10**6):
    with open(os.path.join(pkg_dir, "json", "verses-1769.json")) as f:
        verses = json.load(f)
    chunks = []
    for key in verses:  # JSON object order = canonical verse order
        chunks.append(verses[key])
    text = " ".join(chunks).lower()
    normalized = []
    prev_space = True
    for ch in text:
        if "a" <= ch <= "z":
            normalized.append(ch)
            prev_space = False
        elif not prev_space:
            normalized.append(" ")
            prev_space = True
        if len(normalized) == length:
            break
    assert len(normalized) == length, f"corpus too short: {len(normalized)}"
    os.makedirs(os.path.dirname(out_path), exist_ok=True)
    with open(out_path, "w") as f:
        f.write("".join(normalized))
    print(f"corpus: {length} chars -> {out_path}")


def main():
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    build_mnist(sys.argv[1], os.path.join(root, "data", "mnist"))
    build_corpus(sys.argv[2], os.path.join(root, "data", "hangman", "corpus.txt"))


if __name__ == "__main__":
    main()

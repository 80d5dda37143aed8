#!/usr/bin/env python3
"""Rebuild data/*.idx.gz from the MNIST digits shipped in the `mnist` npm package.

Usage:
    npm pack mnist && tar xzf mnist-*.tgz
    python3 scripts/build_mnist_idx.py package/src/digits data/

The npm package stores each digit class as a flat list of 28x28 intensities
scaled to [0, 1] with three decimals; intensities are mapped back to bytes
with round(v * 255). The last HOLDOUT images of every class form the test
split, everything else the training split. Both splits are shuffled with a
fixed seed so classes are interleaved as in the original files.
"""
import gzip
import json
import random
import struct
import sys
from pathlib import Path

SIDE = 28
HOLDOUT = 60
SEED = 20150831


def load(digits_dir):
    per_class = {}
    for d in range(10):
        raw = json.loads((digits_dir / f"{d}.json").read_text())["data"]
        n = len(raw) // (SIDE * SIDE)
        imgs = []
        for k in range(n):
            px = raw[k * SIDE * SIDE:(k + 1) * SIDE * SIDE]
            imgs.append(bytes(min(255, max(0, round(v * 255))) for v in px))
        per_class[d] = imgs
    return per_class


def write_split(out_dir, prefix, items):
    with gzip.GzipFile(out_dir / f"{prefix}-images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x00000803, len(items), SIDE, SIDE))
        for img, _ in items:
            f.write(img)
    with gzip.GzipFile(out_dir / f"{prefix}-labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x00000801, len(items)))
        f.write(bytes(lbl for _, lbl in items))


def main():
    digits_dir, out_dir = Path(sys.argv[1]), Path(sys.argv[2])
    out_dir.mkdir(parents=True, exist_ok=True)
    per_class = load(digits_dir)
    train, test = [], []
    for d, imgs in per_class.items():
        train += [(img, d) for img in imgs[:-HOLDOUT]]
        test += [(img, d) for img in imgs[-HOLDOUT:]]
    rng = random.Random(SEED)
    rng.shuffle(train)
    rng.shuffle(test)
    write_split(out_dir, "train", train)
    write_split(out_dir, "t10k", test)
    print(f"train={len(train)} test={len(test)}")


if __name__ == "__main__":
    main()

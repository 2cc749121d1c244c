#!/usr/bin/env python3
"""Convert MNIST / CIFAR-10 parquet exports (Hugging Face layout) into the
official binary formats: MNIST IDX files and CIFAR-10 3073-byte-record batches.

Usage:
  python3 tools/make_binary_datasets.py --parquet-dir DIR --out-dir DIR
Expects files named mnist_{train,test}-*.parquet and cifar10_{train,test}-*.parquet.
"""
import argparse
import glob
import io
import os
import struct

import numpy as np
import pandas as pd
from PIL import Image


def decode(rec):
    return np.array(Image.open(io.BytesIO(rec["bytes"])))


def write_idx_images(path, images):
    with open(path, "wb") as f:
        n, h, w = images.shape
        f.write(struct.pack(">iiii", 0x00000803, n, h, w))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">ii", 0x00000801, len(labels)))
        f.write(np.asarray(labels, dtype=np.uint8).tobytes())


def convert_mnist(parquet_path, img_out, lbl_out):
    df = pd.read_parquet(parquet_path)
    images = np.stack([decode(r) for r in df["image"]])
    assert images.shape[1:] == (28, 28)
    write_idx_images(img_out, images)
    write_idx_labels(lbl_out, df["label"].to_numpy())
    print(f"{img_out}: {len(df)} images")


def convert_cifar(parquet_path, out_paths):
    df = pd.read_parquet(parquet_path)
    images = np.stack([decode(r) for r in df["img"]])  # N x 32 x 32 x 3
    labels = df["label"].to_numpy()
    assert images.shape[1:] == (32, 32, 3)
    per = (len(df) + len(out_paths) - 1) // len(out_paths)
    for i, out in enumerate(out_paths):
        lo, hi = i * per, min((i + 1) * per, len(df))
        with open(out, "wb") as f:
            for j in range(lo, hi):
                f.write(bytes([int(labels[j])]))
                # planar: all R, then G, then B, row-major
                f.write(images[j].transpose(2, 0, 1).astype(np.uint8).tobytes())
        print(f"{out}: {hi - lo} records")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--parquet-dir", required=True)
    ap.add_argument("--out-dir", required=True)
    args = ap.parse_args()
    os.makedirs(os.path.join(args.out_dir, "mnist"), exist_ok=True)
    os.makedirs(os.path.join(args.out_dir, "cifar10"), exist_ok=True)

    def one(pattern):
        m = sorted(glob.glob(os.path.join(args.parquet_dir, pattern)))
        if not m:
            raise SystemExit(f"missing {pattern} in {args.parquet_dir}")
        return m[0]

    md = os.path.join(args.out_dir, "mnist")
    convert_mnist(one("mnist_train-*.parquet"),
                  os.path.join(md, "train-images-idx3-ubyte"),
                  os.path.join(md, "train-labels-idx1-ubyte"))
    convert_mnist(one("mnist_test-*.parquet"),
                  os.path.join(md, "t10k-images-idx3-ubyte"),
                  os.path.join(md, "t10k-labels-idx1-ubyte"))

    cd = os.path.join(args.out_dir, "cifar10")
    convert_cifar(one("cifar10_train-*.parquet"),
                  [os.path.join(cd, f"data_batch_{i}.bin") for i in range(1, 6)])
    convert_cifar(one("cifar10_test-*.parquet"),
                  [os.path.join(cd, "test_batch.bin")])


if __name__ == "__main__":
    main()

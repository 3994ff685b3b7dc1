#!/usr/bin/env python3
"""Build IDX files for the experiments from the 5,000-image MNIST sample
bundled with mlxtend (500 images per digit, taken from the MNIST training
set). Writes train-* (4,000 images) and t10k-* (1,000 images) into OUT.

The full official files can be used instead: drop train-images-idx3-ubyte.gz
and friends into a directory and point data_dir or PARC_DATA_DIR at it.
"""

import argparse
import gzip
import struct
import zipfile
from pathlib import Path

import numpy as np


def load_csv(args):
    if args.csv:
        raw = Path(args.csv).read_bytes()
    elif args.wheel:
        raw = zipfile.ZipFile(args.wheel).read("mlxtend/data/data/mnist_5k.csv.gz")
    else:
        import mlxtend.data

        raw = (Path(mlxtend.data.__file__).parent / "data" / "mnist_5k.csv.gz").read_bytes()
    table = np.loadtxt(gzip.decompress(raw).decode().splitlines(), delimiter=",", dtype=np.int64)
    return table[:, :-1].astype(np.uint8), table[:, -1].astype(np.uint8)


def write_idx(path, array, magic):
    header = struct.pack(">I", magic) + b"".join(struct.pack(">I", d) for d in array.shape)
    path.write_bytes(gzip.compress(header + array.tobytes(), mtime=0))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", type=Path)
    parser.add_argument("--csv", help="mnist_5k.csv.gz")
    parser.add_argument("--wheel", help="an mlxtend wheel containing the sample")
    parser.add_argument("--train", type=int, default=4000)
    parser.add_argument("--seed", type=int, default=20240101)
    args = parser.parse_args()

    images, labels = load_csv(args)
    order = np.random.default_rng(args.seed).permutation(len(labels))
    images = images[order].reshape(-1, 28, 28)
    labels = labels[order]
    args.out.mkdir(parents=True, exist_ok=True)
    for prefix, sl in (("train", slice(0, args.train)), ("t10k", slice(args.train, None))):
        write_idx(args.out / f"{prefix}-images-idx3-ubyte.gz", images[sl], 0x00000803)
        write_idx(args.out / f"{prefix}-labels-idx1-ubyte.gz", labels[sl], 0x00000801)
        print(prefix, images[sl].shape[0], "images")


if __name__ == "__main__":
    main()

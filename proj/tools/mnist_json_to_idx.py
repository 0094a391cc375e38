#!/usr/bin/env python3
"""Convert the digit JSON files shipped in the `mnist` npm package to IDX.

The npm package (https://www.npmjs.com/package/mnist) bundles 10k MNIST
digits as per-digit JSON arrays of intensities in [0, 1]. This writes a
gzipped IDX image/label pair that `load_idx` reads directly.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/mnist_json_to_idx.py package/src/digits data/mnist
"""
import argparse
import gzip
import json
import pathlib
import struct

SIZE = 28


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("digits_dir", type=pathlib.Path)
    parser.add_argument("out_dir", type=pathlib.Path)
    args = parser.parse_args()

    images = bytearray()
    labels = bytearray()
    for digit in range(10):
        data = json.loads((args.digits_dir / f"{digit}.json").read_text())["data"]
        count = len(data) // (SIZE * SIZE)
        for value in data[: count * SIZE * SIZE]:
            images.append(max(0, min(255, round(value * 255))))
        labels.extend([digit] * count)

    n = len(labels)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    with gzip.GzipFile(args.out_dir / "digits-images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x803, n, SIZE, SIZE))
        f.write(bytes(images))
    with gzip.GzipFile(args.out_dir / "digits-labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x801, n))
        f.write(bytes(labels))
    print(f"wrote {n} digits to {args.out_dir}")


if __name__ == "__main__":
    main()

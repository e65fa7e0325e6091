#!/usr/bin/env python3
"""Build the bundled MNIST subset (IDX format) from the `mnist` npm package.

The npm package (MIT, github.com/cazala/mnist) ships 10,000 MNIST digits as
JSON arrays of byte/255 rounded to three decimals, which is enough precision to
recover the original bytes exactly.

    npm pack mnist && tar xzf mnist-1.1.0.tgz
    python3 tools/make_mnist_subset.py package/src/digits data/mnist --count 3000
"""

import argparse
import json
import os
import random
import struct

ROWS = COLS = 28


def load_digits(digits_dir):
    samples = []
    for digit in range(10):
        with open(os.path.join(digits_dir, f"{digit}.json")) as f:
            data = json.load(f)["data"]
        assert len(data) % (ROWS * COLS) == 0
        for start in range(0, len(data), ROWS * COLS):
            pixels = bytes(round(v * 255) for v in data[start:start + ROWS * COLS])
            samples.append((pixels, digit))
    return samples


def write_idx(path, type_code, dims, payload):
    with open(path, "wb") as f:
        f.write(bytes([0, 0, type_code, len(dims)]))
        for d in dims:
            f.write(struct.pack(">I", d))
        f.write(payload)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("digits_dir")
    parser.add_argument("out_dir")
    parser.add_argument("--count", type=int, default=3000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    samples = load_digits(args.digits_dir)
    random.Random(args.seed).shuffle(samples)
    samples = samples[:args.count]

    os.makedirs(args.out_dir, exist_ok=True)
    write_idx(os.path.join(args.out_dir, "images-idx3-ubyte"), 0x08,
              [len(samples), ROWS, COLS], b"".join(p for p, _ in samples))
    write_idx(os.path.join(args.out_dir, "labels-idx1-ubyte"), 0x08,
              [len(samples)], bytes(d for _, d in samples))


if __name__ == "__main__":
    main()

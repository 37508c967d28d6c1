#!/usr/bin/env python3
"""Build the small MNIST IDX fixture used by the test suite.

The source is the 5000-sample MNIST subset bundled with mlxtend
(mlxtend/data/data/mnist_5k.csv.gz: 784 pixel columns followed by the label).
Images are interleaved by class so that any prefix of the output is close to
class-balanced.

    python3 tools/make_mnist_fixture.py mlxtend-0.24.0-py3-none-any.whl tests/data 30
"""
import gzip
import struct
import sys
import zipfile
from pathlib import Path

CSV_MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def load_rows(source: Path):
    if source.suffix == ".whl":
        raw = zipfile.ZipFile(source).read(CSV_MEMBER)
    else:
        raw = source.read_bytes()
    text = gzip.decompress(raw).decode()
    return [list(map(int, line.split(","))) for line in text.strip().split("\n")]


def main():
    source, out_dir, per_class = Path(sys.argv[1]), Path(sys.argv[2]), int(sys.argv[3])
    rows = load_rows(source)
    by_class = {c: [r for r in rows if r[-1] == c] for c in range(10)}
    picked = [by_class[c][k] for k in range(per_class) for c in range(10)]

    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "mnist-sample-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(picked), 28, 28))
        for r in picked:
            f.write(bytes(r[:784]))
    with open(out_dir / "mnist-sample-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(picked)))
        f.write(bytes(r[-1] for r in picked))


if __name__ == "__main__":
    main()

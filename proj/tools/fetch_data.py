#!/usr/bin/env python3
"""Populate data/ with the benchmark datasets used by the experiment configs.

Sources, tried in order for each dataset:

  wine         red: the winequality-red.csv bundled with the linfa-datasets crate
               (fetched through cargo); white: the UCI repository URL.
  mnist        the 5000-image MNIST subset bundled with the mlxtend wheel
               (fetched through pip, or taken from $RLP_MLXTEND_WHEEL), written as IDX files. The first 4000
               images become the training source, the last 1000 the test source.
  cal_housing  scikit-learn's fetch_california_housing (needs network access).

Anything that cannot be obtained is reported and skipped; experiments that
need it fail with a data error or are skipped by the acceptance suite.
"""

from __future__ import annotations

import argparse
import glob
import gzip
import os
import shutil
import struct
import subprocess
import sys
import tempfile
import urllib.request
import zipfile
from pathlib import Path

WHITE_WINE_URL = (
    "https://archive.ics.uci.edu/ml/machine-learning-databases/wine-quality/winequality-white.csv"
)
MNIST_TRAIN = 4000


def log(msg: str) -> None:
    print(f"[fetch_data] {msg}", file=sys.stderr)


def cargo_registry_file(pattern: str) -> Path | None:
    roots = [os.environ.get("CARGO_HOME", ""), str(Path.home() / ".cargo"), "/opt/cargo"]
    for root in filter(None, roots):
        hits = sorted(glob.glob(os.path.join(root, "registry", "src", "*", pattern)))
        if hits:
            return Path(hits[-1])
    return None


def fetch_linfa_datasets() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        proj = Path(tmp)
        (proj / "src").mkdir()
        (proj / "src" / "lib.rs").write_text("")
        (proj / "Cargo.toml").write_text(
            '[package]\nname = "fetch"\nversion = "0.1.0"\nedition = "2021"\n\n'
            '[dependencies]\nlinfa-datasets = { version = "0.7", features = ["winequality"] }\n'
        )
        subprocess.run(["cargo", "fetch"], cwd=proj, check=True, capture_output=True)


def wine(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    red = out / "winequality-red.csv"
    if not red.exists():
        src = cargo_registry_file("linfa-datasets-*/data/winequality-red.csv.gz")
        if src is None:
            try:
                fetch_linfa_datasets()
            except (OSError, subprocess.CalledProcessError) as exc:
                log(f"cargo fetch failed: {exc}")
            src = cargo_registry_file("linfa-datasets-*/data/winequality-red.csv.gz")
        if src is None:
            log("red wine: no source available")
        else:
            red.write_bytes(gzip.decompress(src.read_bytes()))
            log(f"red wine: {red}")
    white = out / "winequality-white.csv"
    if not white.exists():
        try:
            with urllib.request.urlopen(WHITE_WINE_URL, timeout=30) as resp:
                white.write_bytes(resp.read())
            log(f"white wine: {white}")
        except OSError as exc:
            log(f"white wine unavailable: {exc}")


def write_idx_images(path: Path, rows: list[list[int]]) -> None:
    with path.open("wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(rows), 28, 28))
        for r in rows:
            f.write(bytes(r))


def write_idx_labels(path: Path, labels: list[int]) -> None:
    with path.open("wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def mnist(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    if (out / "train-images-idx3-ubyte").exists() and (out / "t10k-images-idx3-ubyte").exists():
        return
    with tempfile.TemporaryDirectory() as tmp:
        wheels = [os.environ["RLP_MLXTEND_WHEEL"]] if os.environ.get("RLP_MLXTEND_WHEEL") else []
        if not wheels:
            try:
                subprocess.run(
                    [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", tmp, "mlxtend==0.24.0"],
                    check=True,
                    capture_output=True,
                    timeout=600,
                )
            except (OSError, subprocess.SubprocessError) as exc:
                log(f"mnist: pip download failed: {exc}")
                return
            wheels = sorted(glob.glob(os.path.join(tmp, "mlxtend-*.whl")))
        if not wheels:
            log("mnist: no mlxtend wheel")
            return
        with zipfile.ZipFile(wheels[-1]) as z:
            text = gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz")).decode()
    rows, labels = [], []
    for line in text.splitlines():
        values = [int(v) for v in line.split(",")]
        rows.append(values[:784])
        labels.append(values[784])
    write_idx_images(out / "train-images-idx3-ubyte", rows[:MNIST_TRAIN])
    write_idx_labels(out / "train-labels-idx1-ubyte", labels[:MNIST_TRAIN])
    write_idx_images(out / "t10k-images-idx3-ubyte", rows[MNIST_TRAIN:])
    write_idx_labels(out / "t10k-labels-idx1-ubyte", labels[MNIST_TRAIN:])
    log(f"mnist: {len(rows[:MNIST_TRAIN])} train / {len(rows[MNIST_TRAIN:])} test images in {out}")


def cal_housing(out: Path) -> None:
    target = out / "cal_housing.csv"
    if target.exists():
        return
    try:
        from sklearn.datasets import fetch_california_housing

        frame = fetch_california_housing(as_frame=True).frame
    except Exception as exc:  # network or cache failure
        log(f"california housing unavailable: {exc}")
        return
    out.mkdir(parents=True, exist_ok=True)
    frame.to_csv(target, index=False)
    log(f"california housing: {target}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    parser.add_argument("--only", choices=["wine", "mnist", "cal_housing"], action="append")
    args = parser.parse_args()
    todo = args.only or ["wine", "mnist", "cal_housing"]
    if "wine" in todo:
        wine(args.out / "wine")
    if "mnist" in todo:
        mnist(args.out / "mnist")
    if "cal_housing" in todo:
        cal_housing(args.out / "cal_housing")
    return 0


if __name__ == "__main__":
    sys.exit(main())

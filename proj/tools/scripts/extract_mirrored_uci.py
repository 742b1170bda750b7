#!/usr/bin/env python3
"""Rebuild data/uci/*.csv from UCI copies redistributed inside PyPI/crates packages.

Only four of the eight benchmark sets are redistributed this way. The rest
(energy, airfoil, forest, parkinsons) must come from `riskcal data fetch`.

    pip download --no-deps rdatasets river --no-binary river -d pkgs
    curl -o pkgs/linfa.crate https://static.crates.io/crates/linfa-datasets/linfa-datasets-0.7.1.crate
    python3 extract_mirrored_uci.py pkgs data/uci
"""
import glob
import gzip
import io
import os
import sys
import tarfile
import zipfile

import pandas as pd


def wine(pkgs):
    with tarfile.open(os.path.join(pkgs, "linfa.crate")) as tf:
        raw = tf.extractfile("linfa-datasets-0.7.1/data/winequality-red.csv.gz").read()
    return pd.read_csv(io.BytesIO(gzip.decompress(raw)))


def rdataset(pkgs, item):
    with zipfile.ZipFile(glob.glob(os.path.join(pkgs, "rdatasets-*.whl"))[0]) as zf:
        raw = zf.read(f"rdatasets/_data/{item}.pkl.compress")
    return pd.read_pickle(io.BytesIO(raw), compression="xz").drop(columns=["rownames"])


def concrete_and_housing(pkgs):
    return rdataset(pkgs, "modeldata/concrete"), rdataset(pkgs, "MASS/Boston")


# Ordinal codes follow the attribute order in the UCI flare.names file.
SOLAR_CODES = {
    "zurich-class": "ABCDEFH",
    "largest-spot-size": "XRSAHK",
    "spot-distribution": "XOIC",
}


def solar(pkgs):
    with tarfile.open(glob.glob(os.path.join(pkgs, "river-*.tar.gz"))[0]) as tf:
        member = next(m for m in tf.getmembers() if m.name.endswith("solar-flare.csv.zip"))
        blob = tf.extractfile(member).read()
    with zipfile.ZipFile(io.BytesIO(blob)) as zf:
        df = pd.read_csv(io.BytesIO(zf.read(zf.namelist()[0])))
    for col, order in SOLAR_CODES.items():
        df[col] = df[col].map(order.index)
    # The benchmark target is the 24h C-class count; the other two counts are dropped.
    return df.drop(columns=["m-class-flares", "x-class-flares"])


def main():
    pkgs, out = sys.argv[1], sys.argv[2]
    os.makedirs(out, exist_ok=True)
    concrete, housing = concrete_and_housing(pkgs)
    frames = {"wine": wine(pkgs), "concrete": concrete, "housing": housing, "solar": solar(pkgs)}
    for name, df in frames.items():
        df.to_csv(os.path.join(out, f"{name}.csv"), index=False)
        print(name, df.shape)


if __name__ == "__main__":
    main()

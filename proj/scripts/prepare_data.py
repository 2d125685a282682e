#!/usr/bin/env python3
"""Materialize the datasets under data/ as plain CSV.

Sources:
  - scikit-learn's bundled copies of the classic UCI sets
    (iris, wine, breast-cancer-diagnostic, digits, diabetes)
  - vega-datasets (npm package) for Auto-MPG (cars.json) and
    Palmer penguins (penguins.json)

The CSVs are committed; this script exists so the files can be
regenerated and audited.  Conventions: header row, target column last,
classification targets encoded as strings so column-type inference is
unambiguous, rows with missing values dropped (the engine's imputation
paths are exercised via controlled masking instead).
"""

import csv
import json
import os
import subprocess
import sys
import tarfile
import tempfile

OUT = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")


def fmt(v):
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, float):
        if v == int(v) and abs(v) < 1e15:
            return str(int(v))
        return repr(v)
    return str(v)


def write_csv(name, header, rows):
    path = os.path.join(OUT, name)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    print(f"{name}: {len(rows)} rows x {len(header)} cols")


def clean(name):
    out = []
    prev = "_"
    for ch in name.lower():
        if ch.isalnum():
            out.append(ch)
            prev = ch
        elif prev != "_":
            out.append("_")
            prev = "_"
    return "".join(out).strip("_")


def sklearn_sets():
    from sklearn.datasets import (load_breast_cancer, load_diabetes,
                                  load_digits, load_iris, load_wine)

    ds = load_iris()
    rows = [list(x) + [ds.target_names[t]] for x, t in zip(ds.data, ds.target)]
    write_csv("iris.csv", [clean(n) for n in ds.feature_names] + ["species"], rows)

    ds = load_wine()
    rows = [list(x) + [ds.target_names[t]] for x, t in zip(ds.data, ds.target)]
    write_csv("wine.csv", [clean(n) for n in ds.feature_names] + ["cultivar"], rows)

    ds = load_breast_cancer()
    rows = [list(x) + [ds.target_names[t]] for x, t in zip(ds.data, ds.target)]
    write_csv("wdbc.csv", [clean(n) for n in ds.feature_names] + ["diagnosis"], rows)

    ds = load_digits()
    rows = [list(x) + [f"d{t}"] for x, t in zip(ds.data, ds.target)]
    write_csv("digits.csv", [clean(n) for n in ds.feature_names] + ["digit"], rows)

    ds = load_diabetes(scaled=False)
    rows = [list(x) + [t] for x, t in zip(ds.data, ds.target)]
    write_csv("diabetes.csv", [clean(n) for n in ds.feature_names] + ["progression"], rows)


def vega_file(name):
    local = os.path.join("/tmp/package/data", name)
    if os.path.exists(local):
        return json.load(open(local))
    with tempfile.TemporaryDirectory() as td:
        subprocess.run(["npm", "pack", "vega-datasets@3.2.1"], cwd=td, check=True,
                       capture_output=True)
        tgz = [f for f in os.listdir(td) if f.endswith(".tgz")][0]
        with tarfile.open(os.path.join(td, tgz)) as tf:
            member = tf.extractfile(f"package/data/{name}")
            return json.load(member)


def auto_mpg():
    recs = vega_file("cars.json")
    header = ["cylinders", "displacement", "horsepower", "weight", "acceleration",
              "model_year", "origin", "mpg"]
    rows = []
    for r in recs:
        if r.get("Miles_per_Gallon") is None or r.get("Horsepower") is None:
            continue
        rows.append([r["Cylinders"], r["Displacement"], r["Horsepower"],
                     r["Weight_in_lbs"], r["Acceleration"],
                     int(r["Year"][:4]) - 1900, r["Origin"], r["Miles_per_Gallon"]])
    write_csv("auto_mpg.csv", header, rows)


def penguins():
    recs = vega_file("penguins.json")
    keys = ["Island", "Beak Length (mm)", "Beak Depth (mm)", "Flipper Length (mm)",
            "Body Mass (g)", "Sex"]
    header = ["island", "beak_length_mm", "beak_depth_mm", "flipper_length_mm",
              "body_mass_g", "sex", "species"]
    rows = []
    for r in recs:
        vals = [r.get(k) for k in keys]
        if any(v is None or v == "" or v == "." for v in vals) or r.get("Species") is None:
            continue
        rows.append(vals + [r["Species"]])
    write_csv("penguins.csv", header, rows)


def main():
    os.makedirs(OUT, exist_ok=True)
    sklearn_sets()
    auto_mpg()
    penguins()


if __name__ == "__main__":
    sys.exit(main())

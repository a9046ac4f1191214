#!/usr/bin/env python3
"""Smoke test for the nulllda_py extension module.

Builds nothing itself: compile the extension first with

    cargo build --release -p nulllda-py

then run this script. It copies the cdylib next to itself under the
importable name and exercises the main types and operations.
"""

import math
import shutil
import sys
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
ROOT = HERE.parent


def locate_extension() -> Path:
    candidates = [
        ROOT / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libnulllda_py.so", "libnulllda_py.dylib", "nulllda_py.dll")
    ]
    built = [p for p in candidates if p.exists()]
    if not built:
        sys.exit("extension not found; run: cargo build --release -p nulllda-py")
    newest = max(built, key=lambda p: p.stat().st_mtime)
    suffix = ".pyd" if newest.suffix == ".dll" else ".so"
    target = HERE / f"nulllda_py{suffix}"
    shutil.copyfile(newest, target)
    return target


locate_extension()
sys.path.insert(0, str(HERE))

import nulllda_py as nl  # noqa: E402

checks = 0


def check(condition, message):
    global checks
    if not condition:
        sys.exit(f"FAIL: {message}")
    checks += 1
    print(f"ok: {message}")


def make_dataset(d=40, n=12, c=3, seed=0, separation=10.0):
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((n, d))
    labels = []
    for i in range(n):
        cls = i % c
        features[i, cls] += separation
        labels.append(f"class{cls}")
    return nl.Dataset(features, labels), features, labels


def main():
    ds, features, labels = make_dataset()
    check(ds.dim == 40 and ds.num_samples == 12 and ds.num_classes == 3, "dataset shape")

    ranks = ds.rank_report()
    check(ranks["all_agree"], "generic scatter ranks agree")
    check(
        (ranks["within"]["rank"], ranks["between"]["rank"], ranks["total"]["rank"]) == (9, 2, 11),
        "ranks are (n-c, c-1, n-1)",
    )

    model = nl.fit(ds, seed=7)
    check(model.retries == 0, "fit accepted the first sketch")
    check(model.certificate["verdict"] == "nonsingular", "certificate nonsingular")
    w = model.orientation
    check(w.shape == (40, 2), "orientation is d x (c-1)")
    check(np.allclose(np.linalg.norm(w, axis=0), 1.0, atol=1e-12), "unit columns")

    again = nl.fit(ds, seed=7)
    check(np.array_equal(w, again.orientation), "same seed, identical bits")

    projected = model.transform(features)
    check(projected.shape == (12, 2), "transform returns samples x (c-1)")
    check(model.classify(features) == labels, "training classification is perfect")

    report = nl.verify(ds, model)
    check(report["all_pass"], f"verification passes: {report}")

    oracle = nl.exact_null_lda(ds)
    angle = nl.span_distance(w, oracle)
    check(angle <= 1e-8, f"span agrees with the exact oracle (angle={angle:.2e})")

    # The failing instance: sketch orthogonal to the between range.
    ce_features, ce_labels, ce_sketch = nl.counterexample(10, 0.5)
    ce = nl.Dataset(ce_features, ce_labels)
    maybe_model, cert = nl.fit_with_sketch(ce, ce_sketch)
    check(maybe_model is None and cert["verdict"] == "singular", "counterexample sketch rejected")
    angle, verdict = nl.geometric_check(ce, ce_sketch)
    check(
        verdict == "singular" and abs(angle - math.pi / 2) <= 1e-6,
        "counterexample sketch is orthogonal to the certificate span",
    )
    rescued = nl.fit(ce, seed=3)
    check(rescued.certificate["verdict"] == "nonsingular", "random sketch rescues the instance")

    adv = nl.adversarial_sketch(ds, seed=5)
    check(np.linalg.matrix_rank(adv) == 2, "adversarial sketch has full column rank")
    maybe_model, cert = nl.fit_with_sketch(ds, adv)
    check(maybe_model is None and cert["verdict"] == "singular", "adversarial sketch rejected")

    print(f"\nsmoke test passed ({checks} checks)")


if __name__ == "__main__":
    main()

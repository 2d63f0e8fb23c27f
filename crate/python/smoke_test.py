"""Smoke test for the pyogica extension.

Build first with `cargo build -p ogica-python --release`, then run
`python3 python/smoke_test.py`. Set PYOGICA_LIB to load a library from
elsewhere.
"""

import importlib.machinery
import importlib.util
import json
import os
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    candidates = [os.environ.get("PYOGICA_LIB")] + [
        str(ROOT / "target" / profile / "libpyogica.so") for profile in ("release", "debug")
    ]
    for path in filter(None, candidates):
        if os.path.exists(path):
            loader = importlib.machinery.ExtensionFileLoader("pyogica", path)
            spec = importlib.util.spec_from_file_location("pyogica", path, loader=loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit("libpyogica.so not found; run `cargo build -p ogica-python --release`")


def max_abs(a, b):
    return max(abs(x - y) for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def matmul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def main():
    og = load()

    ds = og.simulate(2, 2, 4000, seed=11)
    assert len(ds.observed) == 4 and len(ds.observed[0]) == 4000
    assert max_abs(matmul(ds.mixing, ds.sources), ds.observed) < 1e-12

    result, whitening = og.decompose(ds.observed, pca_variance=0.0)
    assert result.converged, result
    assert whitening.retained == 4
    distance = og.amari_distance(result.composed, ds.mixing)
    assert distance < 0.5, distance
    print(f"decompose: {result.iterations_used} iterations, Amari distance {distance:.4f}")

    white = whitening.apply(ds.observed)
    w, signs, change = og.update_step(result.unmixing, white)
    assert len(signs) == 4 and change < 1e-3
    eye = matmul(w, [list(c) for c in zip(*w)])
    assert max_abs(eye, [[float(i == j) for j in range(4)] for i in range(4)]) < 1e-10

    baseline = og.run(white, algorithm="extinf", max_iterations=50)
    assert baseline.algorithm == "extinf" and baseline.iterations_used <= 50

    assert og.amari_index([[1.0, 1.0], [1.0, 1.0]]) == 1.0
    assert og.select_signs(ds.sources) == [1, 1, -1, -1]
    q = og.symmetric_orthogonalize([[2.0, 0.0], [0.0, -3.0]])
    assert q == [[1.0, 0.0], [0.0, -1.0]], q

    try:
        og.decompose([[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]])
    except og.NumericalError as e:
        print(f"degenerate input rejected: {e}")
    else:
        raise AssertionError("expected NumericalError")

    report = json.loads(og.benchmark(1, 1, seed=3, algorithms=["ogextinf"], max_iterations=20))
    assert report["aggregates"][0]["runs"] == 1
    print("pyogica smoke test passed")


if __name__ == "__main__":
    main()

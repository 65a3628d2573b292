#!/usr/bin/env python3
"""Smoke test for the popper_py extension module.

Builds nothing itself: it expects the cdylib produced by
`cargo build --release -p popper-py` and loads it as `popper_py`.
Run from the repository root (or anywhere) with `python3 python/smoke_test.py`.
"""

import ctypes  # noqa: F401  (keeps the loader happy on some platforms)
import importlib.util
import math
import pathlib
import sys


def load_module():
    root = pathlib.Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / "release" / "libpopper_py.so",
        root / "target" / "debug" / "libpopper_py.so",
        root / "python" / "popper_py.so",
    ]
    for path in candidates:
        if path.exists():
            spec = importlib.util.spec_from_file_location("popper_py", path)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
    sys.exit(
        "popper_py cdylib not found; run `cargo build --release -p popper-py` first"
    )


def main():
    pp = load_module()

    exp = pp.Experiment()

    # Point-spread function: first-minima full width must match 2*D*lambda/s.
    y, intensity = exp.psf()
    width = pp.first_minima_width(y, intensity)
    predicted = exp.predicted_blur_width()
    assert width is not None, "PSF has no measurable minima"
    assert abs(width - predicted) / predicted < 0.05, (width, predicted)
    print(f"psf width {width:.4e} m vs predicted {predicted:.4e} m: ok")

    # Case (i) vs case (ii) coincidence widths.
    y_i, int_i = exp.coincidence("i")
    y_ii, int_ii = exp.coincidence("ii")
    w_i = pp.first_minima_width(y_i, int_i)
    w_ii = pp.fwhm(y_ii, int_ii)
    assert w_i is not None and w_i > 2.0 * w_ii, (w_i, w_ii)
    assert 1.2e-3 <= w_ii <= 2.4e-3, w_ii
    print(f"case (i) width {w_i:.4e} m, case (ii) fwhm {w_ii:.4e} m: ok")

    # Robertson uncertainty relation on a small explicit system.
    dim = 4
    state = [complex(1.0, 0.0) if i == 0 else complex(0.25, -0.1) for i in range(dim)]
    norm = math.sqrt(sum(abs(c) ** 2 for c in state))
    state = [c / norm for c in state]
    a = [[complex(1.0 if i == j else 0.0, 0.0) * (i + 1) for j in range(dim)] for i in range(dim)]
    b = [
        [complex(1.0, 0.0) if abs(i - j) == 1 else complex(0.0, 0.0) for j in range(dim)]
        for i in range(dim)
    ]
    lhs, rhs, satisfied = pp.robertson(state, a, b)
    assert satisfied and lhs >= rhs - 1e-12, (lhs, rhs)
    print(f"robertson: {lhs:.6f} >= {rhs:.6f}: ok")

    # Phase-matching uncertainty products stay above 1/2
    # (3 mm source, 0.1 mm correlation width).
    _, _, _, p1, p2 = pp.phase_matching(3e-3, 1e-4)
    assert p1 >= 0.5 - 1e-6 and p2 >= 0.5 - 1e-6, (p1, p2)
    print(f"phase matching products {p1:.3f}, {p2:.3f}: ok")

    print("smoke test passed")


if __name__ == "__main__":
    main()

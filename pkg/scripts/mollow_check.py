#!/usr/bin/env python3
"""Single-atom spectrum without pooling: peak ratio and line widths of the triplet."""

import argparse

import numpy as np

from blockade_ladder import single_atom
from blockade_ladder.single_atom import RateParams


def hwhm(x, y, i):
    """Half width at half maximum of the peak at index ``i``."""
    half = y[i] / 2
    r = i + int(np.argmax(y[i:] <= half))
    l = i - int(np.argmax(y[i::-1] <= half))
    right = np.interp(half, [y[r], y[r - 1]], [x[r], x[r - 1]])
    left = np.interp(half, [y[l], y[l + 1]], [x[l], x[l + 1]])
    return (right - left) / 2


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--omega", type=float, default=30.0)
    parser.add_argument("--points", type=int, default=4097)
    args = parser.parse_args()

    p = RateParams(1.0, 0.0, 0.0, args.omega)
    d = single_atom.default_delta_grid(p, args.points)
    s = single_atom.numeric_spectrum(p, 8.0, d).values
    ic = int(np.argmin(np.abs(d)))
    isb = int(np.argmin(np.abs(d - p.omega)))
    isb += int(np.argmax(s[isb - 5 : isb + 6])) - 5
    print(f"centre/sideband ratio {s[ic] / s[isb]:.4f} (3)")
    print(f"centre HWHM {hwhm(d, s, ic):.4f} (Gamma/2 = {p.Gamma / 2})")
    print(f"sideband HWHM {hwhm(d, s, isb):.4f} (3 Gamma/4 = {3 * p.Gamma / 4})")


if __name__ == "__main__":
    main()

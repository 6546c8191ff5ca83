#!/usr/bin/env python3
"""Derivation of the self-cell quadrature constant.

The Poisson quadrature needs the exact integral of the free-space kernel
-(1/2pi) ln|x-y| over a square cell of side h centered at x:

    I(h) = (h^2 / 2pi) * (ln(1/h) + c0),   c0 = integral of -ln|u| over [-1/2,1/2]^2.

Splitting the unit square into eight octants and integrating in polar
coordinates (R(t) = 1/(2 cos t) on 0 <= t <= pi/4):

    c0 = 8 * int_0^{pi/4} [ R^2/4 - (R^2/2) ln R ] dt
       = 3/2 + (ln 2)/2 - pi/4.

This script re-derives the value numerically two independent ways.
"""
import math

from scipy import integrate


def octant_inner(t: float) -> float:
    r = 1.0 / (2.0 * math.cos(t))
    return r * r / 4.0 - (r * r / 2.0) * math.log(r)


def polar_quadrature() -> float:
    val, _ = integrate.quad(octant_inner, 0.0, math.pi / 4.0, epsabs=1e-14, epsrel=1e-14)
    return 8.0 * val


def midpoint_refinement(levels=(64, 128, 256, 512, 1024)) -> float:
    # Midpoint rule never samples the singular corner of a subcell at the
    # origin; Richardson-extrapolate the last two levels.
    vals = []
    for n in levels:
        h = 1.0 / n
        acc = 0.0
        for i in range(n):
            x = -0.5 + (i + 0.5) * h
            for j in range(n):
                y = -0.5 + (j + 0.5) * h
                acc += -0.5 * math.log(x * x + y * y)
        vals.append(acc * h * h)
    return vals[-1] + (vals[-1] - vals[-2]) / 3.0


def main() -> None:
    closed = 1.5 + 0.5 * math.log(2.0) - math.pi / 4.0
    quad = polar_quadrature()
    mid = midpoint_refinement()
    print(f"closed form 3/2 + (ln 2)/2 - pi/4 = {closed:.16f}")
    print(f"polar quadrature                  = {quad:.16f}  (diff {quad - closed:+.3e})")
    print(f"midpoint + Richardson             = {mid:.16f}  (diff {mid - closed:+.3e})")
    assert abs(quad - closed) < 1e-13
    assert abs(mid - closed) < 1e-9


if __name__ == "__main__":
    main()

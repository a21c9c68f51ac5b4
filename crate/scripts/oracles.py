"""High-precision reference values frozen into the Rust unit tests.

Run with `python3 scripts/oracles.py`; requires mpmath.
"""
from mpmath import mp, mpf, sqrt, pi, exp, quad, asin

mp.dps = 50


def hermite_function(n, t):
    t = mpf(t)
    h0 = pi ** mpf(-0.25) * exp(-t * t / 2)
    if n == 0:
        return h0
    prev, cur = h0, sqrt(2) * t * h0
    for k in range(1, n):
        prev, cur = cur, t * sqrt(mpf(2) / (k + 1)) * cur - sqrt(mpf(k) / (k + 1)) * prev
    return cur


def phi(x):
    x = mpf(x)
    integral = quad(lambda s: sqrt(1 - s * s), [x, 1])
    return (mpf(3) / 2 * integral) ** (mpf(2) / 3)


if __name__ == "__main__":
    for n, t in [(200, 1.0), (1000, 5.0), (57, -3.25), (500, 31.0), (30, 12.0)]:
        print(f"H_{n}({t}) = {mp.nstr(hermite_function(n, t), 20)}")
    for x in [0.5, 0.9, 0.999]:
        print(f"phi({x}) = {mp.nstr(phi(x), 20)}")

"""ADF / PP reference values from statsmodels and arch on SplitMix64 series.

The generator mirrors tests/test_support.hpp::SplitMixNormal.
"""
import math

import numpy as np
from arch.unitroot import PhillipsPerron
from statsmodels.tsa.stattools import adfuller

MASK = (1 << 64) - 1


class SplitMixNormal:
    def __init__(self, seed):
        self.state = seed & MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def uniform(self):
        return ((self.next() >> 11) + 0.5) * 2.0**-53

    def __call__(self):
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def series(kind, seed, n):
    g = SplitMixNormal(seed)
    e = np.array([g() for _ in range(n)])
    if kind == "rw":
        return np.cumsum(e)
    if kind == "wn":
        return e
    if kind == "ar":  # AR(1) with phi = 0.9 and two MA-ish wiggles, to exercise lag selection
        x = np.zeros(n)
        for t in range(1, n):
            x[t] = 0.9 * x[t - 1] + e[t] + (0.5 * e[t - 1])
        return x
    raise ValueError(kind)


def main():
    for kind, seed, n in [("rw", 1, 500), ("rw", 6, 500), ("wn", 2, 500), ("ar", 3, 240), ("rw", 4, 120)]:
        x = series(kind, seed, n)
        maxlag = int(math.floor(12.0 * (n / 100.0) ** 0.25))
        adf = adfuller(x, maxlag=maxlag, regression="c", autolag="AIC")
        bw = int(math.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))
        pp = PhillipsPerron(x, lags=bw, trend="c", test_type="tau")
        print(f"{kind} seed={seed} n={n}: x[0]={x[0]!r} x[-1]={x[-1]!r}")
        print(f"  adf stat={adf[0]!r} lag={adf[2]} nobs={adf[3]}")
        print(f"  pp stat={pp.stat!r} lags={pp.lags}")


if __name__ == "__main__":
    main()

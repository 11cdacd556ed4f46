"""
Generalized hypergeometric series pFq(a; b; z) by term-ratio recurrence.

For large negative arguments the alternating series loses roughly
``log10(max_term / |sum|)`` digits.  The float path tracks the largest term
and, when the loss would exceed the requested accuracy, reruns the same
recurrence with ``mpmath.mpf`` numbers at a working precision sized to the
loss.
"""

import math
from typing import Sequence

import mpmath

_EPS = 2.0 ** -52
MAX_TERMS = 20000


class SeriesDivergenceError(ArithmeticError):
    pass


class _Neumaier:
    """Compensated (Kahan-Babuska-Neumaier) running sum."""

    __slots__ = ("s", "c")

    def __init__(self):
        self.s = 0.0
        self.c = 0.0

    def add(self, x):
        t = self.s + x
        if abs(self.s) >= abs(x):
            self.c += (self.s - t) + x
        else:
            self.c += (x - t) + self.s
        self.s = t

    @property
    def value(self):
        return self.s + self.c


def _check_params(a, b):
    for bj in b:
        if bj <= 0 and float(bj).is_integer():
            raise ValueError("lower parameters must not be non-positive integers")
    if len(a) > len(b) + 1:
        raise SeriesDivergenceError("pFq with p > q + 1 diverges for z != 0")


def _series_float(a, b, z):
    acc = _Neumaier()
    term = 1.0
    acc.add(term)
    biggest = 1.0
    n = 0
    while True:
        num = z
        for aj in a:
            num *= aj + n
        den = float(n + 1)
        for bj in b:
            den *= bj + n
        term *= num / den
        n += 1
        acc.add(term)
        biggest = max(biggest, abs(term))
        if term == 0.0 or (abs(term) < 1e-17 * abs(acc.value)
                           and n > math.sqrt(abs(z))):
            break
        if n > MAX_TERMS:
            raise SeriesDivergenceError(f"no convergence after {n} terms")
    return acc.value, biggest


def _series_mp(a, b, z, dps):
    with mpmath.workdps(dps):
        zz = mpmath.mpf(z)
        aa = [mpmath.mpf(x) for x in a]
        bb = [mpmath.mpf(x) for x in b]
        total = mpmath.mpf(1)
        term = mpmath.mpf(1)
        tiny = mpmath.mpf(10) ** (-dps)
        n = 0
        while True:
            num = zz
            for aj in aa:
                num *= aj + n
            den = mpmath.mpf(n + 1)
            for bj in bb:
                den *= bj + n
            term *= num / den
            total += term
            n += 1
            if abs(term) < tiny * abs(total) and n > math.sqrt(abs(z)):
                break
            if n > MAX_TERMS:
                raise SeriesDivergenceError(f"no convergence after {n} terms")
        return float(total)


def hyp_pfq(a: Sequence[float], b: Sequence[float], z: float,
            rtol: float = 1e-13) -> float:
    """Real pFq(a; b; z) for p <= q + 1 (|z| < 1 when p = q + 1)."""
    a = tuple(float(x) for x in a)
    b = tuple(float(x) for x in b)
    _check_params(a, b)
    if len(a) == len(b) + 1 and abs(z) >= 1:
        raise SeriesDivergenceError("series radius is 1 for p = q + 1")
    value, biggest = _series_float(a, b, z)
    if value != 0.0 and biggest * _EPS * 64 <= rtol * abs(value):
        return value
    lost = math.log10(max(biggest, 1.0)) - math.log10(max(abs(value), 1e-300))
    dps = int(20 + max(lost, 0.0) - math.log10(rtol))
    return _series_mp(a, b, z, dps)


def hyp1f2(a: float, b1: float, b2: float, z: float, rtol: float = 1e-13) -> float:
    return hyp_pfq((a,), (b1, b2), z, rtol)

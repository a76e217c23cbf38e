"""
Key choosers for benchmark workloads. ZipfGenerator samples ranks with
rejection-inversion, which needs O(1) setup and no per-rank tables, so
large key spaces cost nothing up front.
"""
import math
import random

DEFAULT_THETA = 0.99


def _log1pOverX(x):
    if abs(x) > 1e-8:
        return math.log1p(x) / x
    return 1.0 - x * (0.5 - x * (1.0 / 3.0 - 0.25 * x))


def _expm1OverX(x):
    if abs(x) > 1e-8:
        return math.expm1(x) / x
    return 1.0 + x * 0.5 * (1.0 + x * (1.0 / 3.0) * (1.0 + 0.25 * x))


class UniformGenerator(object):
    def __init__(self, n, rng=None):
        if n < 1:
            raise ValueError("key space must be positive, got {}".format(n))
        self.n = n
        self.rng = rng or random.Random()

    def next(self):
        return self.rng.randrange(self.n)


class ZipfGenerator(object):
    """Returns ranks in [0, n); rank r is drawn with weight 1 / (r + 1)^theta."""

    def __init__(self, n, theta=DEFAULT_THETA, rng=None):
        if n < 1:
            raise ValueError("key space must be positive, got {}".format(n))
        if theta <= 0:
            raise ValueError("theta must be positive, got {}".format(theta))
        self.n = n
        self.theta = theta
        self.rng = rng or random.Random()
        self._hX1 = self._hIntegral(1.5) - 1.0
        self._hN = self._hIntegral(n + 0.5)
        self._s = 2.0 - self._hIntegralInverse(self._hIntegral(2.5) - self._h(2.0))

    def _h(self, x):
        return math.exp(-self.theta * math.log(x))

    def _hIntegral(self, x):
        logX = math.log(x)
        return _expm1OverX((1.0 - self.theta) * logX) * logX

    def _hIntegralInverse(self, x):
        t = max(x * (1.0 - self.theta), -1.0)
        return math.exp(_log1pOverX(t) * x)

    def next(self):
        while True:
            u = self._hN + self.rng.random() * (self._hX1 - self._hN)
            x = self._hIntegralInverse(u)
            k = min(max(int(x + 0.5), 1), self.n)
            if k - x <= self._s or u >= self._hIntegral(k + 0.5) - self._h(k):
                return k - 1


def keyChooser(distribution, n, theta=DEFAULT_THETA, rng=None):
    if distribution == "uniform":
        return UniformGenerator(n, rng)
    if distribution == "zipfian":
        return ZipfGenerator(n, theta, rng)
    raise ValueError("unknown key distribution {!r}".format(distribution))

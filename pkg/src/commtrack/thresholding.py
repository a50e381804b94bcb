"""Automatic similarity thresholds from two-component mixtures.

The nonzero pairwise scores of a measure are modelled as a mixture of two
densities (Gaussian by default, Gamma optionally) fitted by EM.  The
threshold is the point between the two component means where the weighted
densities cross.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from .errors import DegenerateFitError

log = logging.getLogger(__name__)

MIN_SAMPLES = 20
FAMILIES = ("gaussian", "gamma")


@dataclass(frozen=True)
class MixtureFit:
    """Two-component mixture, components ordered by ascending mean.

    ``stds`` are component standard deviations for both families; for Gamma
    components the shape/scale pair follows from mean and variance.
    """

    family: str
    weights: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    loglik: float
    n: int
    n_iter: int = 0
    loglik_trace: tuple[float, ...] = field(default=(), repr=False)

    def component_logpdf(self, x, j: int):
        x = np.asarray(x, dtype=np.float64)
        mu, sd = self.means[j], self.stds[j]
        if self.family == "gaussian":
            return stats.norm.logpdf(x, mu, sd)
        shape, scale = mu**2 / sd**2, sd**2 / mu
        return stats.gamma.logpdf(x, shape, scale=scale)

    def weighted_logpdf(self, x, j: int):
        return np.log(self.weights[j]) + self.component_logpdf(x, j)

    def pdf(self, x):
        return np.exp(self.weighted_logpdf(x, 0)) + np.exp(self.weighted_logpdf(x, 1))

    def swapped(self) -> "MixtureFit":
        """Same mixture with component order reversed (not a normal-form fit)."""
        r = slice(None, None, -1)
        return MixtureFit(self.family, self.weights[r], self.means[r], self.stds[r],
                          self.loglik, self.n, self.n_iter, self.loglik_trace)


def _component_logpdf(family, x, mu, sd):
    if family == "gaussian":
        return stats.norm.logpdf(x[:, None], mu[None, :], sd[None, :])
    shape = mu**2 / sd**2
    scale = sd**2 / mu
    return stats.gamma.logpdf(x[:, None], shape[None, :], scale=scale[None, :])


def fit_mixture(scores: Iterable[float], family: str = "gaussian", tol: float = 1e-8,
                max_iter: int = 500) -> MixtureFit:
    """Fit a two-component mixture to nonzero scores by EM.

    Initialisation is deterministic: means at the 25th and 75th
    percentiles, equal weights, and each component's spread taken from the
    half of the sample on its side of the median.  Gamma components use a
    method-of-moments M-step (weighted mean and variance).
    """
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}, got {family!r}")
    x = np.asarray(list(scores), dtype=np.float64)
    x = x[x != 0]
    n = x.size
    if n < MIN_SAMPLES:
        raise DegenerateFitError(
            f"only {n} nonzero scores (need {MIN_SAMPLES}); pass a threshold override instead")
    if family == "gamma" and np.any(x < 0):
        raise DegenerateFitError("gamma mixture needs positive scores")
    total_var = x.var()
    if np.ptp(x) == 0 or total_var <= 0:
        raise DegenerateFitError("all scores are identical; cannot fit a mixture (zero variance)")
    floor = 1e-6 * total_var

    med = np.median(x)
    lo, hi = x[x <= med], x[x > med]
    if hi.size == 0:
        lo, hi = x[x < med], x[x >= med]
    mu = np.percentile(x, [25, 75]).astype(np.float64)
    var = np.array([max(lo.var(), floor), max(hi.var(), floor)])
    if mu[0] == mu[1]:
        mu = np.array([lo.mean(), hi.mean()])
    w = np.array([0.5, 0.5])

    trace = []
    prev = -np.inf
    it = 0
    for it in range(1, max_iter + 1):
        logp = np.log(w)[None, :] + _component_logpdf(family, x, mu, np.sqrt(var))
        norm = logsumexp(logp, axis=1)
        ll = float(norm.sum())
        trace.append(ll)
        if abs(ll - prev) < tol:
            break
        prev = ll
        resp = np.exp(logp - norm[:, None])
        nk = resp.sum(axis=0)
        if np.any(nk <= 1e-12 * n):
            raise DegenerateFitError("a mixture component lost all of its mass")
        w = nk / n
        mu = (resp * x[:, None]).sum(axis=0) / nk
        var = (resp * (x[:, None] - mu[None, :]) ** 2).sum(axis=0) / nk
        var = np.maximum(var, floor)

    order = np.argsort(mu, kind="stable")
    fit = MixtureFit(family, w[order], mu[order], np.sqrt(var[order]), trace[-1], n, it, tuple(trace))
    log.debug("fitted %s mixture: w=%s mu=%s sd=%s", family, fit.weights, fit.means, fit.stds)
    return fit


@dataclass(frozen=True)
class Threshold:
    value: float
    measure: str
    direction: str = ""
    provenance: str = "junction"
    family: str = ""
    n: int = 0

    def row(self) -> list:
        return [self.measure, self.direction, self.family, repr(float(self.value)), self.provenance, self.n]


def junction_point(fit: MixtureFit, measure: str = "", direction: str = "", tol: float = 1e-6) -> Threshold:
    """Point between the component means where the weighted densities cross.

    Found by bisection on the log-density difference.  When that difference
    does not change sign over the interval, the weighted midpoint
    ``w2 * mean1 + w1 * mean2`` is returned instead.
    """
    i, j = (0, 1) if fit.means[0] <= fit.means[1] else (1, 0)
    a, b = float(fit.means[i]), float(fit.means[j])

    def g(x):
        return float(fit.weighted_logpdf(x, i) - fit.weighted_logpdf(x, j))

    ga, gb = g(a), g(b)
    if a < b and np.isfinite(ga) and np.isfinite(gb) and ga > 0 > gb:
        # tighter than tol so the reported value sits well inside it
        while b - a > tol * 1e-3:
            mid = 0.5 * (a + b)
            gm = g(mid)
            if gm > 0:
                a = mid
            elif gm < 0:
                b = mid
            else:
                a = b = mid
        return Threshold(0.5 * (a + b), measure, direction, "junction", fit.family, fit.n)
    wi, wj = float(fit.weights[i]), float(fit.weights[j])
    value = wj * fit.means[i] + wi * fit.means[j]
    return Threshold(float(value), measure, direction, "fallback-midpoint", fit.family, fit.n)


def select_threshold(scores, measure: str, direction: str = "", family: str = "gaussian") -> Threshold:
    return junction_point(fit_mixture(scores, family), measure, direction)


def override(value: float, measure: str, direction: str = "") -> Threshold:
    if not 0.0 < value < 1.0:
        raise ValueError(f"threshold override for {measure} must lie in (0, 1), got {value}")
    return Threshold(float(value), measure, direction, "user-override")


THRESHOLD_HEADER = ["measure", "direction", "family", "threshold", "provenance", "n"]


def write_thresholds(thresholds: Iterable[Threshold], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(THRESHOLD_HEADER)
        for t in thresholds:
            w.writerow(t.row())
    return path


def read_thresholds(path) -> list[Threshold]:
    with open(path, newline="") as fh:
        return [Threshold(float(r["threshold"]), r["measure"], r["direction"], r["provenance"],
                          r["family"], int(r["n"])) for r in csv.DictReader(fh)]

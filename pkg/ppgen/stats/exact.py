r"""Exact tests of homogeneity of two binomial proportions.

Both tests look at a 2x2 table ``(x1 of n1, x2 of n2)``. Fisher's test
conditions on the total number of successes ``K = x1 + x2``, under which
``x1`` is hypergeometric. Boschloo's test uses the Fisher p-value as its
ordering statistic and drops the conditioning: the p-value is the largest
probability, over the common success rate :math:`\pi`, of drawing a table at
least as extreme as the observed one,

.. math::

    p_B = \max_{\pi} \sum_{y_1, y_2:\ p_F(y) \le p_F(x)}
          \mathrm{Bin}(y_1; n_1, \pi)\,\mathrm{Bin}(y_2; n_2, \pi).

Probabilities are evaluated from log-gamma functions so large ``n`` does
not overflow.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

ALTERNATIVES = ("two-sided", "greater", "less")
# relative tolerance for tables as probable as the observed one
FISHER_TIE_RTOL = 1e-7
# relative tolerance when comparing ordering statistics
ORDER_RTOL = 1e-12
DEFAULT_GRID = 1000
_REFINE_STEPS = 25


@dataclass(frozen=True)
class ContingencyTable2x2:
    """Successes ``x1`` of ``n1`` in cluster A and ``x2`` of ``n2`` in cluster B."""

    x1: int
    n1: int
    x2: int
    n2: int

    def __post_init__(self):
        for name in ("x1", "n1", "x2", "n2"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value}")
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("both groups need at least one observation")
        if self.x1 > self.n1 or self.x2 > self.n2:
            raise ValueError(f"successes exceed group size in {self}")

    def swapped(self) -> "ContingencyTable2x2":
        return ContingencyTable2x2(self.x2, self.n2, self.x1, self.n1)


@dataclass(frozen=True)
class TestResult:
    p_fisher: float
    p_boschloo: float
    nuisance_argmax: float
    grid_size: int
    alternative: str = "two-sided"

    def as_dict(self) -> dict:
        return {
            "p_fisher": self.p_fisher,
            "p_boschloo": self.p_boschloo,
            "nuisance_argmax": self.nuisance_argmax,
            "grid_size": self.grid_size,
            "alternative": self.alternative,
        }


def _as_table(t) -> ContingencyTable2x2:
    if isinstance(t, ContingencyTable2x2):
        return t
    return ContingencyTable2x2(*(int(ii) for ii in t))


def _check_alternative(alternative: str):
    if alternative not in ALTERNATIVES:
        raise ValueError(
            f"alternative must be one of {ALTERNATIVES}, got {alternative!r}"
        )


def _log_comb(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def _fisher_given_margin(n1: int, n2: int, k: int, alternative: str) -> tuple[int, np.ndarray]:
    """Fisher p-values of every table with ``k`` total successes.

    Returns the smallest admissible ``x1`` and the p-values of
    ``x1 = lo, lo + 1, ...``.
    """
    lo = max(0, k - n2)
    hi = min(n1, k)
    support = np.arange(lo, hi + 1)
    log_pmf = _log_comb(n1, support) + _log_comb(n2, k - support) - _log_comb(n1 + n2, k)
    pmf = np.exp(log_pmf)
    if alternative == "greater":
        pvalues = np.cumsum(pmf[::-1])[::-1]
    elif alternative == "less":
        pvalues = np.cumsum(pmf)
    else:
        order = np.sort(pmf)
        cum = np.cumsum(order)
        pos = np.searchsorted(order, pmf * (1.0 + FISHER_TIE_RTOL), side="right") - 1
        pvalues = cum[pos]
    return lo, np.clip(pvalues, 0.0, 1.0)


@lru_cache(maxsize=512)
def _fisher_matrix(n1: int, n2: int, alternative: str) -> np.ndarray:
    """(n1 + 1) x (n2 + 1) Fisher p-values of all tables with group sizes n1, n2."""
    mat = np.empty((n1 + 1, n2 + 1))
    for k in range(n1 + n2 + 1):
        lo, pvalues = _fisher_given_margin(n1, n2, k, alternative)
        x1 = np.arange(lo, lo + pvalues.size)
        mat[x1, k - x1] = pvalues
    mat.setflags(write=False)
    return mat


def fisher_two_sided(t) -> float:
    """Two-sided Fisher exact p-value of a 2x2 table.

    Sums the hypergeometric probabilities of all tables with the observed
    margins that are no more probable than the observed table; ties within a
    relative tolerance of ``1e-7`` count as equally probable.

    Parameters
    ----------
    t : ContingencyTable2x2 or tuple
        ``(x1, n1, x2, n2)``

    Returns
    -------
    float
        p-value in [0, 1]
    """
    return fisher_exact(t, "two-sided")


def fisher_exact(t, alternative: str = "two-sided") -> float:
    """Fisher exact p-value; ``greater`` tests whether A has the larger rate."""
    t = _as_table(t)
    _check_alternative(alternative)
    lo, pvalues = _fisher_given_margin(t.n1, t.n2, t.x1 + t.x2, alternative)
    return float(pvalues[t.x1 - lo])


def _nuisance_grid(grid: int) -> np.ndarray:
    return np.arange(1, grid + 1) / (grid + 1)


def _binom_pmf(n: int, pis: np.ndarray) -> np.ndarray:
    """len(pis) x (n + 1) binomial probabilities."""
    y = np.arange(n + 1)
    pis = np.asarray(pis, dtype=float)[:, None]
    return np.exp(_log_comb(n, y) + y * np.log(pis) + (n - y) * np.log1p(-pis))


@lru_cache(maxsize=64)
def _binom_pmf_grid(n: int, grid: int) -> np.ndarray:
    pmf = _binom_pmf(n, _nuisance_grid(grid))
    pmf.setflags(write=False)
    return pmf


@lru_cache(maxsize=256)
def _boschloo_profile(n1: int, n2: int, grid: int, alternative: str):
    """Grid maxima for every possible rejection region of the group sizes.

    Tables are sorted by their Fisher p-value; the rejection region of the
    ``j``-th sorted table is the first ``j + 1`` tables. Column ``j`` of the
    cumulative probabilities is then the rejection probability of that
    region at every grid point.
    """
    fisher = _fisher_matrix(n1, n2, alternative).ravel()
    order = np.argsort(fisher, kind="stable")
    sorted_p = fisher[order]
    y1, y2 = np.divmod(order, n2 + 1)
    pmf1 = _binom_pmf_grid(n1, grid)
    pmf2 = _binom_pmf_grid(n2, grid)
    cum = np.cumsum(pmf1[:, y1] * pmf2[:, y2], axis=1)
    best = np.argmax(cum, axis=0)
    peak = cum[best, np.arange(cum.shape[1])]
    for arr in (sorted_p, best, peak):
        arr.setflags(write=False)
    return sorted_p, best, peak


def _region_probability(mask: np.ndarray, n1: int, n2: int, pis) -> np.ndarray:
    pmf1 = _binom_pmf(n1, pis)
    pmf2 = _binom_pmf(n2, pis)
    return ((pmf1 @ mask) * pmf2).sum(axis=1)


def _refine(mask: np.ndarray, n1: int, n2: int, center: int, grid: int) -> tuple[float, float]:
    """Ternary search between the neighbours of the best grid point."""
    lo = center / (grid + 1)
    hi = (center + 2) / (grid + 1)
    for _ in range(_REFINE_STEPS):
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        f1, f2 = _region_probability(mask, n1, n2, [m1, m2])
        if f1 < f2:
            lo = m1
        else:
            hi = m2
    pi = 0.5 * (lo + hi)
    return float(_region_probability(mask, n1, n2, [pi])[0]), pi


@lru_cache(maxsize=65536)
def _boschloo_cached(
    x1: int, n1: int, x2: int, n2: int, grid: int, alternative: str, refine: bool
) -> TestResult:
    fisher = _fisher_matrix(n1, n2, alternative)
    p_fisher = float(fisher[x1, x2])
    if p_fisher >= 1.0:
        return TestResult(1.0, 1.0, 0.5, grid, alternative)
    threshold = p_fisher * (1.0 + ORDER_RTOL)
    sorted_p, best, peak = _boschloo_profile(n1, n2, grid, alternative)
    last = int(np.searchsorted(sorted_p, threshold, side="right")) - 1
    p_boschloo = float(peak[last])
    argmax = (int(best[last]) + 1) / (grid + 1)
    if refine:
        mask = (fisher <= threshold).astype(float)
        refined, pi = _refine(mask, n1, n2, int(best[last]), grid)
        if refined > p_boschloo:
            p_boschloo, argmax = refined, pi
    return TestResult(p_fisher, min(max(p_boschloo, 0.0), 1.0), argmax, grid, alternative)


def boschloo(
    t,
    grid: int = DEFAULT_GRID,
    alternative: str = "two-sided",
    refine: bool = True,
) -> TestResult:
    """Boschloo's exact unconditional test.

    Parameters
    ----------
    t : ContingencyTable2x2 or tuple
        ``(x1, n1, x2, n2)``
    grid : int
        number of interior points ``k / (grid + 1)`` searched for the nuisance
        parameter
    alternative : str
        ``two-sided``, ``greater`` or ``less``; the one-sided variants order
        tables by the one-sided Fisher p-value
    refine : bool
        refine the best grid point by a local ternary search; with ``False``
        the p-value is the exact grid maximum

    Returns
    -------
    TestResult
        Fisher and Boschloo p-values and the maximizing nuisance value
    """
    t = _as_table(t)
    if int(grid) < 2:
        raise ValueError(f"grid must be at least 2, got {grid}")
    _check_alternative(alternative)
    return _boschloo_cached(t.x1, t.n1, t.x2, t.n2, int(grid), alternative, bool(refine))

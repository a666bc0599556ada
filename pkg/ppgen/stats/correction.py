"""Family-wise error corrections for a battery of tests."""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class HolmDecision:
    """Rejection decisions, in the order of the input p-values."""

    p_values: tuple[float, ...]
    alpha: float
    rejected: tuple[bool, ...]
    m: int
    method: str = "holm"

    @property
    def n_rejected(self) -> int:
        return sum(self.rejected)

    @property
    def any_rejected(self) -> bool:
        return any(self.rejected)

    def adjusted(self) -> np.ndarray:
        """Adjusted p-values.

        Holm: ``min(1, running max of (m - k + 1) p_(k))``; Bonferroni:
        ``min(1, m p)``.
        """
        p = np.asarray(self.p_values, dtype=float)
        if p.size == 0:
            return p
        if self.method == "bonferroni":
            return np.minimum(1.0, self.m * p)
        order = np.argsort(p, kind="stable")
        factors = self.m - np.arange(p.size)
        adj = np.minimum(1.0, np.maximum.accumulate(factors * p[order]))
        ret = np.empty_like(adj)
        ret[order] = adj
        return ret


def _check(p_values: Sequence[float], alpha: float, m: Optional[int]) -> tuple[np.ndarray, int]:
    p = np.asarray(list(p_values), dtype=float)
    if p.size and (np.any(p < 0) or np.any(p > 1) or np.any(np.isnan(p))):
        raise ValueError("p-values must lie in [0, 1]")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    m = p.size if m is None else int(m)
    if m < p.size:
        raise ValueError(f"family size {m} is smaller than the number of tests {p.size}")
    return p, m


def holm(p_values: Sequence[float], alpha: float = 0.05, m: Optional[int] = None) -> HolmDecision:
    """Holm-Bonferroni step-down procedure.

    The sorted p-values ``p_(1) <= p_(2) <= ...`` are rejected while
    ``p_(k) <= alpha / (m - k + 1)``; testing stops at the first failure.

    Parameters
    ----------
    p_values : sequence of float
        raw p-values
    alpha : float
        family-wise error rate
    m : int, optional
        family size, at least ``len(p_values)``; defaults to ``len(p_values)``

    Returns
    -------
    HolmDecision
        decisions mapped back to the input order
    """
    p, m = _check(p_values, alpha, m)
    rejected = np.zeros(p.size, dtype=bool)
    order = np.argsort(p, kind="stable")
    for k, idx in enumerate(order):
        if p[idx] <= alpha / (m - k):
            rejected[idx] = True
        else:
            break
    return HolmDecision(tuple(float(ii) for ii in p), alpha, tuple(bool(ii) for ii in rejected), m)


def bonferroni(p_values: Sequence[float], alpha: float = 0.05, m: Optional[int] = None) -> HolmDecision:
    """Reject every p-value ``<= alpha / m``."""
    p, m = _check(p_values, alpha, m)
    rejected = p <= alpha / m if m else np.zeros(0, dtype=bool)
    return HolmDecision(
        tuple(float(ii) for ii in p), alpha, tuple(bool(ii) for ii in rejected), m, "bonferroni"
    )


CORRECTIONS = {"holm": holm, "bonferroni": bonferroni}


def correct(
    p_values: Sequence[float],
    alpha: float = 0.05,
    m: Optional[int] = None,
    method: str = "holm",
) -> HolmDecision:
    """Apply the correction named ``method`` (``holm`` or ``bonferroni``)."""
    try:
        func = CORRECTIONS[method]
    except KeyError as e:
        raise ValueError(f"correction must be one of {tuple(CORRECTIONS)}, got {method!r}") from e
    return func(p_values, alpha, m)

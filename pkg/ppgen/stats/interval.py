"""Adjusted Wald intervals for a binomial proportion."""

import math

from scipy.stats import norm


def agresti_interval(x: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    r"""Agresti-Coull interval: add :math:`z^2/2` successes and failures.

    .. math::

        \tilde p = \frac{x + z^2/2}{n + z^2}, \qquad
        \tilde p \pm z \sqrt{\frac{\tilde p (1 - \tilde p)}{n + z^2}}

    The interval is truncated to ``[0, 1]``.

    Parameters
    ----------
    x : int
        successes, ``0 <= x <= n``
    n : int
        trials, ``n >= 1``
    confidence : float
        two-sided confidence level

    Returns
    -------
    tuple of float
        ``(lo, hi)``
    """
    if n < 1 or not 0 <= x <= n:
        raise ValueError(f"need 0 <= x <= n and n >= 1, got x={x}, n={n}")
    if not 0 < confidence < 1:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    z = float(norm.ppf(1.0 - (1.0 - confidence) / 2.0))
    z2 = z * z
    n_adj = n + z2
    p_adj = (x + z2 / 2.0) / n_adj
    half = z * math.sqrt(p_adj * (1.0 - p_adj) / n_adj)
    return max(0.0, p_adj - half), min(1.0, p_adj + half)


def intervals_overlap(a: tuple[float, float], b: tuple[float, float]) -> bool:
    return not (a[1] < b[0] or b[1] < a[0])

"""Vanishing orders of multiplier ideals for one-variable weights with a logarithmic pole.

For ``phi = nu log|z - x| + O(1)`` the ideal ``I(m phi)`` at ``x`` is generated by
``(z - x)^k`` with ``k`` the least integer making ``|z|^(2k - 2 m nu)`` locally
integrable, i.e. ``2k - 2 m nu > -2``, which gives ``k = floor(m nu)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceDetected
from .measure import Disc
from .quad import integrate_disc

# products like 0.29 * 100 land one ulp below the intended integer
_SNAP = 1e-9


def _snap(x: float) -> float:
    r = round(x)
    return float(r) if abs(x - r) <= _SNAP * max(1.0, abs(x)) else x


def ideal_order(nu: float, m: float) -> int:
    """Vanishing order generating ``I(m phi)`` for a pole of Lelong number ``nu``."""
    if nu < 0 or m <= 0:
        raise ValueError("need nu >= 0 and m > 0")
    return int(math.floor(_snap(m * nu)))


@dataclass(frozen=True)
class InclusionCheck:
    nu: float
    m0: int
    q: int
    eps: float
    order_m0: int
    order_m0q: int
    order_m0eps: int
    left_ok: bool
    right_ok: bool
    left_contractual: bool


def check_inclusions(nu: float, m0: int, q: int, eps: float) -> InclusionCheck:
    """Order form of ``I(m0(1+eps) phi)^q  ⊂  I(m0 q phi)  ⊂  I(m0 phi)^q``.

    ``(z^a) ⊂ (z^b)`` iff ``a >= b``; a q-th power multiplies the order by q.
    ``left_contractual`` marks the range ``m0 >= 3/eps`` in which the left
    inclusion is asserted.
    """
    k0 = ideal_order(nu, m0)
    kq = ideal_order(nu, m0 * q)
    ke = ideal_order(nu, _snap(m0 * (1.0 + eps)))
    return InclusionCheck(
        nu, m0, q, eps, k0, kq, ke,
        left_ok=q * ke >= kq,
        right_ok=kq >= q * k0,
        left_contractual=m0 >= 3.0 / eps * (1 - 1e-12),
    )


@dataclass
class GridReport:
    cases: int
    right_failures: int
    left_failures: int
    left_contractual_cases: int
    first_left_counterexamples: list

    @property
    def passed(self) -> bool:
        return self.right_failures == 0 and self.left_failures == 0


def exhaustive_grid(
    nus=None, m0s=range(1, 51), qs=range(1, 21), eps_factors=(1, 2, 5), keep: int = 10, rows: list | None = None
) -> GridReport:
    """Sweep ν ∈ {0.01..3.00}, m0, q and eps = 3/m0·factor; counts failures of each inclusion."""
    if nus is None:
        nus = [i / 100 for i in range(1, 301)]
    cases = rf = lf = lc = 0
    examples = []
    for nu, m0, q, f in itertools.product(nus, m0s, qs, eps_factors):
        eps = 3.0 / m0 * f
        c = check_inclusions(nu, m0, q, eps)
        cases += 1
        rf += not c.right_ok
        if c.left_contractual:
            lc += 1
            if not c.left_ok:
                lf += 1
                if len(examples) < keep:
                    examples.append(c)
        if rows is not None:
            rows.append(c)
    return GridReport(cases, rf, lf, lc, examples)


def integrable_by_quadrature(exponent: float, tol: float = 1e-6) -> bool:
    """Whether ``|z|^(-2 s)`` is integrable on the unit disc, decided by the ring-series quadrature."""
    s = exponent
    try:
        integrate_disc(lambda z: np.abs(z) ** (-2.0 * s), Disc(0.0, 0.0, 1.0), [(0j, s)], tol=tol)
    except DivergenceDetected:
        return False
    return True


def ideal_order_by_quadrature(nu: float, m: int) -> int:
    """Least k with ``|z|^(2k - 2 m nu)`` integrable, found by quadrature.

    Integrability is monotone in k on the unit disc, so the scan starts two
    below the formula value and stops at the first integrable order.
    """
    start = max(0, ideal_order(nu, m) - 2)
    k = start
    while not integrable_by_quadrature(m * nu - k):
        k += 1
    if k == start and start > 0:
        # the scan start was already integrable: walk down to the true threshold
        while k > 0 and integrable_by_quadrature(m * nu - (k - 1)):
            k -= 1
    return k


@dataclass(frozen=True)
class SkodaResult:
    nu: float
    integrable_below_1: bool
    threshold: float
    quadrature_converged: bool


def skoda_integrability(nu: float) -> SkodaResult:
    """Local integrability of ``exp(-2 nu log|z|)``: iff ``nu < 1``, cross-checked by quadrature."""
    return SkodaResult(nu, nu < 1.0, 1.0, integrable_by_quadrature(nu))

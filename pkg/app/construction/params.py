"""
Construction parameters and their regime diagnostics.

All logarithms are natural. In asymptotic mode every scalar comes from the
closed-form definitions; in operational mode p, r, k and delta are supplied
directly because the asymptotic choices leave p*n tiny at any feasible n.
"""
import logging
import math
from fractions import Fraction
from typing import Mapping, Optional, Union

from ..core.errors import ParameterError
from ..models.params import Mode, Params, RegimeDiagnostics

logger = logging.getLogger(__name__)

MIN_N = 16
DEFAULT_K_FACTOR = Fraction(9, 8)
OPERATIONAL_KEYS = ("p", "r", "k", "delta")


def deletion_threshold(n: int, ell: int) -> float:
    """Density at which the expected C_ell count matches the expected edge count."""
    return n ** (-1.0 + 1.0 / (ell - 1))


def construction_exponent(ell: int) -> Fraction:
    """n-scale exponent ((2l-3)(l-1))^-1."""
    return Fraction(1, (2 * ell - 3) * (ell - 1))


def intro_exponent(ell: int) -> Fraction:
    """k-scale exponent ((l-2)(2l-5))^-1."""
    return Fraction(1, (ell - 2) * (2 * ell - 5))


def exponent_identity_residual(ell: int) -> Fraction:
    """|1 + 1/(l-2) + 1/((l-2)(2l-5)) - (1 + 2/(2l-5))| in exact arithmetic."""
    lhs = 1 + Fraction(1, ell - 2) + Fraction(1, (ell - 2) * (2 * ell - 5))
    rhs = 1 + Fraction(2, 2 * ell - 5)
    return abs(lhs - rhs)


def largest_divisor_at_most(n: int, bound: float) -> int:
    """Round bound down, then step down until the value divides n."""
    r = max(1, min(n, int(math.floor(bound))))
    while n % r:
        r -= 1
    return r


def _check_ell(ell: int) -> None:
    if ell < 5 or ell % 2 == 0:
        raise ParameterError(f"ell must be odd and at least 5, got {ell}")


def derive_params(
    ell: int,
    n: int,
    mode: Union[Mode, str] = Mode.ASYMPTOTIC,
    overrides: Optional[Mapping[str, float]] = None,
    k_factor: Fraction = DEFAULT_K_FACTOR,
) -> Params:
    """Compute every construction parameter for (ell, n)."""
    _check_ell(ell)
    if n < MIN_N:
        raise ParameterError(f"n must be at least {MIN_N}, got {n}")
    mode = Mode(mode)
    overrides = dict(overrides or {})

    log_n = math.log(n)
    p_c = deletion_threshold(n, ell)
    eps = construction_exponent(ell)
    eta = float(overrides.pop("eta", 1.0 / (4 * ell)))

    if mode is Mode.ASYMPTOTIC:
        p = p_c * n ** float(eps) / log_n
        r_formula = math.sqrt(p * n) * log_n ** -1.5
        r = largest_divisor_at_most(n, r_formula)
        k_formula = 8.0 / p * log_n ** 3
        k = math.ceil(float(k_factor) * k_formula)
        delta = 1.0 / log_n
    else:
        missing = [key for key in OPERATIONAL_KEYS if overrides.get(key) is None]
        if missing:
            raise ParameterError(f"operational mode needs overrides for: {', '.join(missing)}")
        p = float(overrides["p"])
        r = int(overrides["r"])
        k = int(overrides["k"])
        delta = float(overrides["delta"])
        r_formula = k_formula = None

    if not 0 < p < 1:
        raise ParameterError(f"p must lie strictly between 0 and 1, got {p}")
    if r < 1 or n < r:
        raise ParameterError(f"block size r={r} must satisfy 1 <= r <= n={n}")
    if n % r:
        raise ParameterError(f"block size r={r} does not divide n={n}")
    if k < 1:
        raise ParameterError(f"k must be positive, got {k}")
    if not 0 < delta <= 1:
        raise ParameterError(f"delta must lie in (0, 1], got {delta}")

    params = Params(
        ell=ell,
        n=n,
        p_c=p_c,
        eps=float(eps),
        eps_intro=float(intro_exponent(ell)),
        p=p,
        r=r,
        k=k,
        delta=delta,
        eta=eta,
        mode=mode,
        k_formula=k_formula,
        r_formula=r_formula,
    )
    logger.debug("derived params %s", params.to_flat())
    return params


def union_bound_margin(p: float, delta: float, k: float, n: int) -> float:
    """p * delta^2 * k - 8 log n; positive means the union bound closes."""
    return p * delta ** 2 * k - 8.0 * math.log(n)


def check_regime(params: Params) -> RegimeDiagnostics:
    """Report which of the construction's finite-n inequalities hold."""
    n, p, r, ell = params.n, params.p, params.r, params.ell
    log_n = math.log(n)
    ratio = p ** (ell - 1) * n ** (ell - 2) / r * log_n ** 2
    formula_margin = None
    if params.k_formula is not None:
        formula_margin = union_bound_margin(p, params.delta, params.k_formula, n)
    return RegimeDiagnostics(
        ratio_ineq1=ratio,
        ineq2_ok=r <= 4.0 * math.sqrt(n / params.k),
        r_vs_pn_ok=r <= (p * n) ** (1.0 - 2.0 / (ell - 1)),
        union_bound_margin=union_bound_margin(p, params.delta, params.k, n),
        formula_margin=formula_margin,
        exponent_identity_err=float(exponent_identity_residual(ell)),
    )

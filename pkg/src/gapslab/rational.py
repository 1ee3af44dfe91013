"""Exact-rational certification of the (k, l, vartheta, delta, epsilon)
parameter inequality

    4 * k/(k+2l+1) * (2l+1)/(2l+2) * (vartheta - epsilon)/(2 + delta) > 1.

No floating point anywhere in this module.
"""
from dataclasses import dataclass
from fractions import Fraction

from .errors import Infeasible, ValidationError


def to_fraction(v):
    """Accept int, Fraction or a "num/den" string; floats are rejected."""
    if isinstance(v, bool):
        raise ValidationError("booleans are not rationals")
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational: {v!r}") from exc
    raise ValidationError(f"exact rational required, got {type(v).__name__}")


@dataclass(frozen=True)
class RationalCert:
    k: int
    ell: int
    vartheta: Fraction
    delta: Fraction
    epsilon: Fraction
    lhs: Fraction
    lhs_num: int
    lhs_den: int
    passes: bool

    def to_dict(self):
        return {
            "k": self.k,
            "ell": self.ell,
            "vartheta": _s(self.vartheta),
            "delta": _s(self.delta),
            "epsilon": _s(self.epsilon),
            "lhs": f"{self.lhs_num}/{self.lhs_den}",
            "lhs_reduced": _s(self.lhs),
            "passes": self.passes,
        }


def _s(f):
    return f"{f.numerator}/{f.denominator}"


def verify_params(k, ell, vartheta, delta=0, epsilon=0):
    """Evaluate the left-hand side exactly.

    ``lhs_num/lhs_den`` is the product form built from the reduced inputs
    (4k(2l+1) * (vartheta-eps) over (k+2l+1)(2l+2) * (2+delta)), kept
    unreduced; ``lhs`` is the same value in lowest terms.
    """
    if k < 1 or ell < 0:
        raise ValidationError("need k >= 1 and ell >= 0")
    th, de, ep = to_fraction(vartheta), to_fraction(delta), to_fraction(epsilon)
    gain = th - ep
    cost = 2 + de
    if cost <= 0:
        raise ValidationError("2 + delta must be positive")
    num = 4 * k * (2 * ell + 1) * gain.numerator * cost.denominator
    den = (k + 2 * ell + 1) * (2 * ell + 2) * gain.denominator * cost.numerator
    lhs = Fraction(num, den)
    return RationalCert(k, ell, th, de, ep, lhs, num, den, lhs > 1)


def _passes(k, ell, a, b):
    # 4k(2l+1)/((k+2l+1)(2l+2)) * a/(2b) > 1, cross-multiplied
    return 4 * k * (2 * ell + 1) * a > 2 * b * (k + 2 * ell + 1) * (2 * ell + 2)


def optimize_k(vartheta, ell_max):
    """Least k (ties: least l in 1..ell_max) passing at delta = epsilon = 0."""
    th = to_fraction(vartheta)
    if not 0 < th < 1:
        raise ValidationError("vartheta must lie in (0, 1)")
    if ell_max < 1:
        raise ValidationError("ell_max must be >= 1")
    if 2 * th <= 1:
        raise Infeasible("2 * vartheta <= 1: the left-hand side stays below 1")
    a, b = th.numerator, th.denominator
    # as k grows the lhs tends to 2 vartheta (2l+1)/(2l+2); some l must clear 1
    if not any(a * (2 * ell + 1) > b * (ell + 1) for ell in range(1, ell_max + 1)):
        raise Infeasible(f"no l <= {ell_max} can reach lhs > 1 for vartheta={th}")
    k = 1
    while True:
        for ell in range(1, ell_max + 1):
            if _passes(k, ell, a, b):
                return k, ell
        k += 1

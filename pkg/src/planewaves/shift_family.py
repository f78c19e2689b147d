"""The bump-train family of vacuum plane waves and the shift-equivalence
decision.

Each shift sequence alpha (values in [0, 1/2], finite window, zero outside)
yields a four-dimensional vacuum Brinkmann metric with profile
p_alpha(u) diag(1, -1); two family members are isometric exactly when their
sequences are related by an index translation, and the equivalence decision
can be run on both sides and cross-checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equivalence import IsometryWitness, brinkmann_isometry
from .errors import PlaneWaveError
from .metrics import BrinkmannMetric
from .profiles import Interval, bernoulli_family_profile
from .sequences import (ShiftSequence, bernoulli_shift, f_a, g_a,
                        hilbert_distance, p_alpha, shift_equivalent)

__all__ = [
    "ShiftSequence", "bernoulli_shift", "hilbert_distance", "shift_equivalent",
    "f_a", "g_a", "p_alpha", "family_metric", "family_isometry_crosscheck",
    "CrosscheckReport",
]


def family_metric(alpha: ShiftSequence) -> BrinkmannMetric:
    """The vacuum plane wave with profile p_alpha(u) diag(1, -1) on n = 2.

    The trace-free embedding keeps tr p = 0 identically, so every family
    member is a vacuum spacetime in four dimensions.
    """
    return BrinkmannMetric(2, Interval(), bernoulli_family_profile(alpha))


@dataclass(frozen=True, eq=False)
class CrosscheckReport:
    shift_m: int | None
    witness: IsometryWitness | None
    epsilon: float | None
    agrees: bool
    u0_expected: float | None

    @property
    def equivalent(self):
        return self.shift_m is not None

    def to_json(self):
        return {"shift_m": self.shift_m, "equivalent": self.equivalent,
                "witness": None if self.witness is None else self.witness.to_json(),
                "epsilon": self.epsilon, "agrees": self.agrees}


def family_isometry_crosscheck(alpha: ShiftSequence, beta: ShiftSequence,
                               tol=1e-6) -> CrosscheckReport:
    """Run the sequence-level and the metric-level equivalence decisions and
    require that they agree.

    For an equivalent pair with shift m the witness must have |a| = 1 and
    u0 = -m (the asymmetry of a generic bump train forces a = +1; a = -1 can
    only verify for palindromic windows, so the sign is reported, not assumed).
    Disagreement raises: it falsifies the shift-equivalence/isometry
    correspondence and signals an implementation bug.
    """
    m = shift_equivalent(alpha, beta)
    pm1, pm2 = family_metric(alpha), family_metric(beta)
    half = max(alpha.half_width, beta.half_width)
    cap = 2 * half + 1
    witness = brinkmann_isometry(pm1, pm2, u0_cap=cap, tol=tol)
    if (m is None) != (witness is None):
        raise PlaneWaveError(
            f"shift equivalence ({m}) and metric equivalence "
            f"({'witness' if witness else 'none'}) disagree")
    if witness is None:
        return CrosscheckReport(None, None, None, True, None)
    eps = float(np.sign(witness.a))
    if abs(abs(witness.a) - 1.0) > 1e-6:
        raise PlaneWaveError(f"family witness must have |a| = 1, got {witness.a}")
    u0_expected = -float(m) if eps > 0 else None
    if eps > 0 and abs(witness.u0 - (-m)) > 1e-6:
        raise PlaneWaveError(
            f"family witness u0 = {witness.u0} does not match -m = {-m}")
    return CrosscheckReport(m, witness, eps, True, u0_expected)

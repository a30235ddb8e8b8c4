"""Recover the decoherence angle from a single protocol angle and classify purity.

Applies to the Toffoli test with control measurement, control |+>, X-axis
protocol rotation and a test qubit prepared along +Z whose only unknown is
its Bloch length cos(epsilon).  Arbitrary unknown states need full
tomography instead (see :mod:`swapchar.tomography`).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from statistics import NormalDist

from . import protocol
from .errors import IllConditionedAngleError, InconsistentMeasurementError, InvalidArgument

PURE = "pure"
MIXED = "mixed"
INCONCLUSIVE = "inconclusive"

DEFAULT_THRESHOLD = 0.1
DEFAULT_LEVEL = 0.999
DEFAULT_DELTA = 0.05

SCOPE_NOTE = (
    "valid for a test qubit known up to its Bloch-vector length "
    "(Toffoli test, control measurement, control |+>, Rx protocol rotation)"
)


def _check_angle(alpha, threshold):
    c = math.cos(alpha)
    if abs(c) <= threshold:
        raise IllConditionedAngleError(
            f"|cos(alpha)| = {abs(c):.3g} <= {threshold}; pick an angle away from pi/2"
        )
    return c


def bloch_from_p00(p00, alpha, threshold=DEFAULT_THRESHOLD):
    """Unclamped cos(epsilon) implied by P(0,0) at protocol angle ``alpha``."""
    c = _check_angle(alpha, threshold)
    return (p00 - 3 / 8) / (c / 4)


def _epsilon_from_p00(p00, c):
    # half-angle form of arccos((p00 - 3/8) / (c/4)); arccos loses ~1e-8 near cos = 1
    one_minus = ((3 / 8 + c / 4) - p00) / (c / 4)
    return 2 * math.asin(math.sqrt(min(1.0, max(0.0, one_minus / 2))))


def invert_epsilon(p00, alpha, threshold=DEFAULT_THRESHOLD, slack=1e-9):
    """epsilon = arccos((p00 - 3/8) / (cos(alpha)/4)), argument clamped to [-1, 1]."""
    p00 = float(p00)
    if not 0.0 <= p00 <= 1.0:
        raise InvalidArgument(f"p00 must be a probability, got {p00}")
    arg = bloch_from_p00(p00, alpha, threshold)
    if abs(arg) > 1 + slack:
        raise InconsistentMeasurementError(
            f"cos(epsilon) = {arg:.6g} is outside [-1, 1]", raw=arg
        )
    return _epsilon_from_p00(p00, math.cos(alpha))


def wilson_interval(successes, trials, level=DEFAULT_LEVEL):
    if trials < 1:
        raise InvalidArgument("Wilson interval needs at least one trial")
    z = NormalDist().inv_cdf(0.5 + level / 2)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class CharacterizationReport:
    epsilon_estimate: float
    bloch_norm_estimate: float
    confidence_interval: tuple
    epsilon_interval: tuple
    level: float
    verdict: str
    alpha: float
    p_hat: float
    shots: int
    raw_bloch: float
    note: str = SCOPE_NOTE

    def to_dict(self):
        d = asdict(self)
        d["confidence_interval"] = list(self.confidence_interval)
        d["epsilon_interval"] = list(self.epsilon_interval)
        d["inputs_used"] = {"alpha": self.alpha, "p_hat": self.p_hat, "shots": self.shots}
        return d


def _clamp01(x):
    return min(1.0, max(0.0, x))


def classify_purity(counts, alpha, shots=None, level=DEFAULT_LEVEL, delta=DEFAULT_DELTA,
                    threshold=DEFAULT_THRESHOLD):
    """Estimate the Bloch length from joint (ancilla, control) counts.

    The Wilson interval on P(0,0) is mapped through the (monotone) inversion.
    Verdict: ``mixed`` if the Bloch-length interval excludes 1, ``pure`` if it
    contains 1 and stays above ``1 - delta``, ``inconclusive`` otherwise.
    """
    rec = counts.normalized()
    if rec.width != 2:
        raise InvalidArgument("expected two-bit (ancilla, control) outcomes")
    total = rec.shots
    if shots is not None and int(shots) != total:
        raise InvalidArgument(f"shots={shots} but counts sum to {total}")
    if total < 1:
        raise InvalidArgument("counts are empty")
    c = _check_angle(alpha, threshold)
    n00 = rec.counts.get("00", 0)
    p_hat = n00 / total
    lo_p, hi_p = wilson_interval(n00, total, level)
    raw = (p_hat - 3 / 8) / (c / 4)
    ends = sorted(((lo_p - 3 / 8) / (c / 4), (hi_p - 3 / 8) / (c / 4)))
    if ends[0] > 1.0 or ends[1] < -1.0:
        raise InconsistentMeasurementError(
            f"cos(epsilon) interval {ends} lies outside [-1, 1]", raw=raw
        )
    bloch = _clamp01(raw)
    eps = math.acos(bloch)
    ci = (_clamp01(ends[0]), _clamp01(ends[1]))
    if ends[1] < 1.0:
        verdict = MIXED
    elif ends[0] >= 1.0 - delta:
        verdict = PURE
    else:
        verdict = INCONCLUSIVE
    return CharacterizationReport(
        epsilon_estimate=eps,
        bloch_norm_estimate=abs(math.cos(eps)),
        confidence_interval=ci,
        epsilon_interval=(math.acos(ci[1]), math.acos(ci[0])),
        level=level,
        verdict=verdict,
        alpha=float(alpha),
        p_hat=p_hat,
        shots=total,
        raw_bloch=raw,
    )


def simulate_counts(epsilon, alpha, shots, seed):
    """Joint (ancilla, control) counts from the full circuit simulation."""
    cfg = protocol.derivation_config(epsilon, alpha, shots=shots, seed=seed)
    return protocol.run_point(cfg).counts

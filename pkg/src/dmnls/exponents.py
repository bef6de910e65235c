"""Exponent arithmetic: critical indices, space-time Lebesgue pairs, decay
constants, and regime classification — everything a pair (d, p) determines.

Boundary convention: regime intervals are half-open on the right of each
boundary, with values within SNAP_TOL (relative) snapped onto the boundary
before classification.  Exponents that are undefined for a given (d, p) are
reported as None, never zero-filled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

# Scattering in d=1 needs p strictly above this power.
P0 = 3.0 + math.sqrt(5.0)

SNAP_TOL = 1e-12


def _snap(p, boundary):
    if boundary is not None and abs(p - boundary) <= SNAP_TOL * max(1.0, abs(boundary)):
        return boundary
    return p


@dataclass(frozen=True)
class ExponentReport:
    """Every exponent derived from (d, p); None marks a combination for
    which that exponent is not defined."""

    d: int
    p: float
    s_c: float                      # d/2 - 2/p
    gamma: float                    # 2/p - d/2
    regime: str                     # long_range | mass_subcritical | mass_critical
                                    # | intercritical | energy_critical | supercritical
    intercritical_pair: tuple | None    # (q, r) for p in [4/d, 4/(d-2)]
    intercritical_r_c: float | None
    subcritical_triple: tuple | None    # (q, r, r_c) for p in (2/d, 4/d) ∩ [4/(d+2), 4/d)
    Q_threshold: float | None           # defined for p > 4/d
    p0: float
    decay_c1: float | None              # defined for p > 4/d
    decay_rate_w: float | None          # defined for p > 4/d
    one_d_scattering_ok: bool | None    # d=1 only: p > p0
    snap_tol: float = SNAP_TOL

    def to_dict(self):
        out = asdict(self)
        for key in ("intercritical_pair", "subcritical_triple"):
            if out[key] is not None:
                out[key] = list(out[key])
        return out


def admissible(q, r, d):
    """Schrodinger-admissible pair predicate: 2 <= q, r <= inf,
    2/q + d/r = d/2 (to 1e-12), excluding (d, q, r) = (2, 2, inf)."""
    if not (2.0 <= q and 2.0 <= r):
        return False
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    inv_r = 0.0 if math.isinf(r) else 1.0 / r
    if abs(2.0 * inv_q + d * inv_r - d / 2.0) > 1e-12:
        return False
    if d == 2 and q == 2.0 and math.isinf(r):
        return False
    return True


def exponent_report(d, p):
    """Compute the full ExponentReport for dimension d >= 1 and power p > 0."""
    d = int(d)
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    p = float(p)
    if not (p > 0):
        raise ValueError(f"power must be positive, got {p}")

    b_long = 2.0 / d
    b_mass = 4.0 / d
    b_energy = 4.0 / (d - 2) if d >= 3 else None

    ps = _snap(_snap(_snap(p, b_long), b_mass), b_energy)

    if ps <= b_long:
        regime = "long_range"
    elif ps < b_mass:
        regime = "mass_subcritical"
    elif ps == b_mass:
        regime = "mass_critical"
    elif b_energy is None or ps < b_energy:
        regime = "intercritical"
    elif ps == b_energy:
        regime = "energy_critical"
    else:
        regime = "supercritical"

    s_c = d / 2.0 - 2.0 / p
    gam = 2.0 / p - d / 2.0

    # Space-time pair for data at critical Sobolev regularity:
    # defined on [4/d, 4/(d-2)] (no upper cap for d <= 2).
    inter_pair = None
    inter_r_c = None
    if ps >= b_mass and (b_energy is None or ps <= b_energy):
        q = p + 2.0
        r = 2.0 * d * (p + 2.0) / (2.0 * (d - 2) + d * p)
        inter_pair = (q, r)
        inter_r_c = d * p * (p + 2.0) / 4.0

    # Space-time triple for weighted (mass-subcritical) data:
    # defined on (2/d, 4/d) ∩ [4/(d+2), 4/d).
    sub_triple = None
    b_sub = 4.0 / (d + 2)
    if b_long < ps < b_mass and _snap(ps, b_sub) >= b_sub:
        q = 2.0 * (p + 2.0) / (d * p - 2.0)
        r = 2.0 * d * (p + 2.0) / (4.0 + d * (2.0 - p))
        r_c = d * p * (p + 2.0) / (2.0 * (d * p - 2.0))
        sub_triple = (q, r, r_c)

    q_thresh = None
    c1 = None
    rate_w = None
    if ps > b_mass:
        if ps > 8.0 / d:
            q_thresh = 2.0 * p / (d * p - 4.0)
            c1 = 0.0
            rate_w = -2.0 / (p + 2.0)
        else:
            q_thresh = 8.0 * p / (d * p - 4.0) ** 2
            c1 = 2.0 - d * p / 4.0
            rate_w = -(d * p - 4.0) / (2.0 * (p + 2.0))

    ok_1d = (p > P0) if d == 1 else None

    return ExponentReport(d=d, p=p, s_c=s_c, gamma=gam, regime=regime,
                          intercritical_pair=inter_pair,
                          intercritical_r_c=inter_r_c,
                          subcritical_triple=sub_triple,
                          Q_threshold=q_thresh, p0=P0,
                          decay_c1=c1, decay_rate_w=rate_w,
                          one_d_scattering_ok=ok_1d)

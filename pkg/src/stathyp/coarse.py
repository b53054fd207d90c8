"""Coarse distance-formula arithmetic over synthetic projection profiles.

A :class:`ProjectionProfile` assigns nonnegative projection values to abstract
subsurface labels.  Non-annular entries carry a single value; annular entries
carry a twist value ``d_c`` together with a curve length on each side, from
which a hyperbolic horoball distance is computed.  The combinators below sum
thresholded values in two different groupings (a uniform sum and a split sum
with a log-max proxy for long annular terms) that are bilipschitz equivalent
when the threshold is large enough.

All functions here are pure arithmetic on finite nonnegative reals; nothing in
this module knows about surfaces or geodesics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError
from .rng import substream

#: Default short-curve cutoff.  log_plus(1/EPS0_DEFAULT) = 100.
EPS0_DEFAULT = math.exp(-100.0)


def threshold_floor(eps0: float) -> float:
    """Smallest threshold for which the sandwich estimates are guaranteed."""
    return 36.0 * log_plus(1.0 / eps0)


def log_plus(a: float) -> float:
    """max(0, log a); zero on [0, 1]."""
    if a < 0:
        raise DomainError(f"log_plus needs a nonnegative argument, got {a}")
    if a <= 1.0:
        return 0.0
    return math.log(a)


def threshold(value: float, m0: float) -> float:
    """``value`` if it meets the threshold ``m0``, else 0."""
    if m0 <= 0:
        raise ParameterError(f"threshold m0 must be positive, got {m0}")
    return value if value >= m0 else 0.0


@dataclass(frozen=True)
class HoroballPair:
    """Lengths of one curve on two sides plus the twist between them.

    ``l_x`` and ``l_y`` are the curve lengths at the two endpoints, ``d_c`` is
    the twisting distance, and ``eps0`` is the short-curve cutoff the pair is
    classified against.
    """

    l_x: float
    l_y: float
    d_c: float
    eps0: float = EPS0_DEFAULT

    def __post_init__(self):
        if not (self.l_x > 0 and self.l_y > 0):
            raise DomainError(f"curve lengths must be positive, got {self.l_x}, {self.l_y}")
        if self.d_c < 0:
            raise DomainError(f"twist must be nonnegative, got {self.d_c}")
        for v in (self.l_x, self.l_y, self.d_c):
            if not math.isfinite(v):
                raise DomainError("horoball pair values must be finite")

    @property
    def both_short(self) -> bool:
        """True when the curve is shorter than eps0 on both sides."""
        return self.l_x < self.eps0 and self.l_y < self.eps0


def _uhp_distance(x1: float, y1: float, x2: float, y2: float) -> float:
    # Upper half-plane distance, 2*asinh(|dz| / (2*sqrt(y1*y2))).  The asinh
    # form stays accurate near 0 where the arccosh argument is close to 1,
    # and the split square roots keep huge coordinate ranges from overflowing.
    s1, s2 = math.sqrt(y1), math.sqrt(y2)
    q = math.hypot((x2 - x1) / s1 / s2, (y2 - y1) / s1 / s2)
    return 2.0 * math.asinh(0.5 * q)


def horoball_distance(pair: HoroballPair) -> float:
    """Hyperbolic distance between the horoball projections of the pair.

    The two projections are ``(0, max(1, 1/l_x))`` and ``(d_c, max(1, 1/l_y))``
    in the upper half-plane.
    """
    h1 = max(1.0, 1.0 / pair.l_x)
    h2 = max(1.0, 1.0 / pair.l_y)
    return _uhp_distance(0.0, h1, pair.d_c, h2)


def log_max_proxy(pair: HoroballPair) -> float:
    """max of log_plus of the twist and of the two inverse lengths."""
    return max(
        log_plus(pair.d_c),
        log_plus(1.0 / pair.l_x),
        log_plus(1.0 / pair.l_y),
    )


def twist_only_distance(d_c: float) -> float:
    """Distance between ``(0, 1)`` and ``(d_c, 1)``: arccosh(1 + d_c^2 / 2)."""
    if d_c < 0:
        raise DomainError(f"twist must be nonnegative, got {d_c}")
    return 2.0 * math.asinh(0.5 * d_c)


@dataclass(frozen=True)
class ProfileEntry:
    label: str
    kind: str  # "non-annular" | "annular"
    d_value: float = 0.0          # non-annular projection value
    pair: HoroballPair | None = None  # annular data

    def __post_init__(self):
        if self.kind not in ("non-annular", "annular"):
            raise ParameterError(f"unknown entry kind {self.kind!r}")
        if self.kind == "annular" and self.pair is None:
            raise ParameterError("annular entries need a HoroballPair")
        if self.kind == "non-annular":
            if self.pair is not None:
                raise ParameterError("non-annular entries must not carry a pair")
            if not (self.d_value >= 0 and math.isfinite(self.d_value)):
                raise DomainError(f"bad projection value {self.d_value}")

    def value(self) -> float:
        """The entry's contribution before thresholding."""
        if self.kind == "annular":
            return horoball_distance(self.pair)
        return self.d_value


@dataclass(frozen=True)
class ProjectionProfile:
    """Top-level value plus a list of labelled subsurface entries."""

    d_s: float = 0.0
    entries: tuple[ProfileEntry, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not (self.d_s >= 0 and math.isfinite(self.d_s)):
            raise DomainError(f"bad top-level value {self.d_s}")
        labels = [e.label for e in self.entries]
        if len(set(labels)) != len(labels):
            raise ParameterError("entry labels must be unique")


def distance_formula_uniform(profile: ProjectionProfile, m0: float) -> float:
    """Sum of thresholded values over every entry, annular or not.

    Annular entries contribute their horoball distance.  Monotone in ``m0``:
    raising the threshold can only decrease the result.
    """
    if m0 <= 0:
        raise ParameterError(f"threshold must be positive, got {m0}")
    total = profile.d_s
    for e in profile.entries:
        total += threshold(e.value(), m0)
    return total


def distance_formula_split(profile: ProjectionProfile, m0: float, eps0: float) -> float:
    """Split form: horoball distance for doubly short annuli, log-max proxy else.

    Non-annular entries are thresholded at ``m0``; annular entries whose curve
    is eps0-short on both sides contribute their thresholded horoball distance,
    and the remaining annular entries contribute their log-max proxy
    thresholded at ``log m0``.
    """
    if m0 <= 1:
        raise ParameterError(f"split form needs m0 > 1, got {m0}")
    total = profile.d_s
    log_m0 = math.log(m0)
    for e in profile.entries:
        if e.kind == "non-annular":
            total += threshold(e.d_value, m0)
        else:
            pair = HoroballPair(e.pair.l_x, e.pair.l_y, e.pair.d_c, eps0)
            if pair.both_short:
                total += threshold(horoball_distance(pair), m0)
            else:
                total += threshold(log_max_proxy(pair), log_m0)
    return total


def max_log_identity(f: float, g: float, h: float, m0: float) -> tuple[float, float, bool]:
    """Compare the sum of thresholded logs with the thresholded max of logs.

    lhs = log_plus(thr(f)) + log_plus(thr(g)) + log_plus(thr(h)) with threshold
    m0; rhs = thr(max of the log_plus values) with threshold log(m0).  Returns
    (lhs, rhs, ok) where ok means each side is within a factor 3 of the other
    whenever either is positive.
    """
    if m0 <= 1:
        raise ParameterError(f"m0 must exceed 1, got {m0}")
    lhs = sum(log_plus(threshold(v, m0)) for v in (f, g, h))
    rhs = threshold(max(log_plus(f), log_plus(g), log_plus(h)), math.log(m0))
    if lhs == 0.0 and rhs == 0.0:
        return lhs, rhs, True
    ok = lhs <= 3.0 * rhs and rhs <= 3.0 * lhs
    return lhs, rhs, ok


def proxy_sandwich_holds(pair: HoroballPair) -> bool:
    """Check 6^-1 * d <= proxy <= 6 * d for one pair."""
    d = horoball_distance(pair)
    p = log_max_proxy(pair)
    return d <= 6.0 * p and p <= 6.0 * d


def chain_inequality_holds(pairs: list[HoroballPair], m0: float) -> bool:
    """Check the thresholded-sum chain over entries not short on both sides.

    sum 6^-1 thr_{6 m0}(d)  <=  sum thr_{m0}(proxy)  <=  sum 6 thr_{m0/6}(d).
    """
    lo = mid = hi = 0.0
    for pair in pairs:
        d = horoball_distance(pair)
        p = log_max_proxy(pair)
        lo += threshold(d, 6.0 * m0) / 6.0
        mid += threshold(p, m0)
        hi += 6.0 * threshold(d, m0 / 6.0)
    slack = 1e-9 * (1.0 + abs(mid))
    return lo <= mid + slack and mid <= hi + slack


# ---------------------------------------------------------------------------
# Random generators for stress sweeps
# ---------------------------------------------------------------------------

def random_pairs(n: int, seed: int, eps0: float, log_lo: float = -600.0,
                 log_hi: float = 600.0, exclude_both_short: bool = True) -> list[HoroballPair]:
    """Log-uniform horoball pairs, optionally forced off the doubly-short set.

    Lengths are drawn log-uniform with exponent in [log_lo, 0] and the twist
    with exponent in [log_lo, log_hi]; when ``exclude_both_short`` is set, the
    larger length is pushed above eps0 so every pair satisfies the hypothesis
    of the sandwich estimates.
    """
    rng = substream(seed, 0xC0A5)
    out = []
    for _ in range(n):
        e1 = rng.uniform(log_lo, 0.0)
        e2 = rng.uniform(log_lo, 0.0)
        if rng.uniform() < 0.25:
            d_c = 0.0
        else:
            d_c = math.exp(rng.uniform(log_lo, log_hi))
        l_x, l_y = math.exp(e1), math.exp(e2)
        if exclude_both_short and max(l_x, l_y) < eps0:
            if l_x >= l_y:
                l_x = math.exp(rng.uniform(math.log(eps0), 0.0))
            else:
                l_y = math.exp(rng.uniform(math.log(eps0), 0.0))
        out.append(HoroballPair(l_x, l_y, d_c, eps0))
    return out


def random_profile(seed: int, eps0: float = EPS0_DEFAULT, max_entries: int = 50) -> ProjectionProfile:
    """A synthetic profile stressing both branches of every threshold.

    Values are log-uniform over [1e-3, e^20]; entry count uniform in
    [0, max_entries].
    """
    rng = substream(seed, 0xBEEF)
    n = int(rng.integers(0, max_entries + 1))
    entries = []
    for i in range(n):
        if rng.uniform() < 0.5:
            entries.append(ProfileEntry(f"V{i}", "non-annular",
                                        d_value=_log_uniform(rng)))
        else:
            pair = HoroballPair(
                _log_uniform(rng),
                _log_uniform(rng),
                _log_uniform(rng) if rng.uniform() < 0.8 else 0.0,
                eps0,
            )
            entries.append(ProfileEntry(f"A{i}", "annular", pair=pair))
    d_s = _log_uniform(rng) if rng.uniform() < 0.8 else 0.0
    return ProjectionProfile(d_s, tuple(entries))


def _log_uniform(rng: np.random.Generator, lo: float = math.log(1e-3), hi: float = 20.0) -> float:
    return math.exp(rng.uniform(lo, hi))


# ---------------------------------------------------------------------------
# Profile fixture files
# ---------------------------------------------------------------------------
#
# One record per line:
#   d_S <value>
#   nonannular <label> <d_value>
#   annular <label> lx=<v> ly=<v> dc=<v>
# Blank lines and '#' comments are ignored.

def dump_profile(profile: ProjectionProfile) -> str:
    lines = [f"d_S {profile.d_s!r}"]
    for e in profile.entries:
        if e.kind == "non-annular":
            lines.append(f"nonannular {e.label} {e.d_value!r}")
        else:
            p = e.pair
            lines.append(f"annular {e.label} lx={p.l_x!r} ly={p.l_y!r} dc={p.d_c!r}")
    return "\n".join(lines) + "\n"


def load_profile(text: str, eps0: float = EPS0_DEFAULT) -> ProjectionProfile:
    d_s = 0.0
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            if tokens[0] == "d_S":
                d_s = float(tokens[1])
            elif tokens[0] == "nonannular":
                entries.append(ProfileEntry(tokens[1], "non-annular", d_value=float(tokens[2])))
            elif tokens[0] == "annular":
                kv = dict(t.split("=", 1) for t in tokens[2:])
                pair = HoroballPair(float(kv["lx"]), float(kv["ly"]), float(kv["dc"]), eps0)
                entries.append(ProfileEntry(tokens[1], "annular", pair=pair))
            else:
                raise ParameterError(f"unknown record {tokens[0]!r}")
        except (IndexError, KeyError, ValueError) as exc:
            raise ParameterError(f"bad profile record at line {lineno}: {raw!r}") from exc
    return ProjectionProfile(d_s, tuple(entries))

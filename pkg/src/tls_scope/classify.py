"""Location classification and spectral-density bookkeeping.

The location of a defect follows from which controls move its resonance:

    responds to V_s                        -> sample dielectric
    responds to V_g but not V_s            -> surface/electrode interface
    responds only to strain                -> junction barrier (stray
                                              junctions indistinguishable)
    responds to nothing, or seen in only   -> unclassified
    a single segment

Spectral densities follow the per-trace bookkeeping: every defect
contributes its visible fraction of each segment, summed and normalized
by (number of segments x frequency span).  The arithmetic is done with
exact rationals so worked examples like 0.5/8/0.9 GHz^-1 reproduce
bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from .stm import Location

_FRACTION_LIMIT = 10**6


@dataclass(frozen=True)
class LocationVerdict:
    """Classification of one defect from its control-response evidence."""

    location: Location
    responds_p: bool
    responds_g: bool
    responds_s: bool
    single_segment: bool = False


def classify_location(
    responds_p: bool,
    responds_g: bool,
    responds_s: bool,
    single_segment: bool = False,
) -> LocationVerdict:
    """Apply the tunability decision table.

    ``single_segment`` marks defects observed in only one segment, which
    stay unclassified no matter what that segment showed.
    """
    if single_segment:
        loc = Location.UNCLASSIFIED
    elif responds_s:
        loc = Location.SAMPLE_DIELECTRIC
    elif responds_g:
        loc = Location.SURFACE_ELECTRODE
    elif responds_p:
        loc = Location.JUNCTION
    else:
        loc = Location.UNCLASSIFIED
    return LocationVerdict(
        location=loc,
        responds_p=responds_p,
        responds_g=responds_g,
        responds_s=responds_s,
        single_segment=single_segment,
    )


def _to_fraction(x) -> Fraction:
    if isinstance(x, Rational):
        return Fraction(x)
    return Fraction(x).limit_denominator(_FRACTION_LIMIT)


def spectral_density(
    visible_fractions: list[list[float]],
    n_segments: int,
    span_ghz,
) -> Fraction:
    """Average number of detectable defects per frequency trace [1/GHz].

    Parameters
    ----------
    visible_fractions : list of per-defect lists
        For each defect, the fraction of each segment's bias range in
        which its trace is visible (include only nonzero entries or all
        segments; zeros contribute nothing).
    n_segments : int
        Total number of segments in the dataset.
    span_ghz : float or Fraction
        Frequency span of one trace [GHz].

    Returns
    -------
    Fraction
        Exact rational density; ``float()`` it for reporting.
    """
    if n_segments <= 0:
        raise ValueError("n_segments must be positive")
    span = _to_fraction(span_ghz)
    if span <= 0:
        raise ValueError("span must be positive")
    total = Fraction(0)
    for fractions in visible_fractions:
        s = sum((_to_fraction(f) for f in fractions), Fraction(0))
        total += s / n_segments
    return total / span

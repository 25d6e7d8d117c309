"""Resonance-trace extraction from T1 grids.

Per bias step, local T1 minima deeper than a relative threshold become
resonance candidates; candidates are linked across bias steps into
traces by nearest-frequency continuity around a one-step linear
prediction, which keeps steep traces intact and crossing traces apart.
Sub-grid frequency refinement uses a three-point parabola on
log(1/T1), whose peak is locally quadratic for a Lorentzian dip.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectro import SpectroscopyDataset


@dataclass
class Trace:
    """One linked resonance trace inside a single segment."""

    segment: int
    control: str
    bias_index: list[int] = field(default_factory=list)
    bias: list[float] = field(default_factory=list)
    freq: list[float] = field(default_factory=list)
    weight: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.bias)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (
            np.asarray(self.bias, dtype=float),
            np.asarray(self.freq, dtype=float),
            np.asarray(self.weight, dtype=float),
        )

    def coverage(self, n_bias: int) -> float:
        """Fraction of the segment's bias steps carrying a trace point."""
        return len(set(self.bias_index)) / n_bias


def _row_candidates(t1_row: np.ndarray, freq: np.ndarray, threshold: float):
    """(freq, weight) of significant local T1 minima in one bias step."""
    baseline = np.nanmedian(t1_row)
    limit = (1.0 - threshold) * baseline
    y = np.log(1.0 / np.clip(t1_row, 1e-12, None))
    inner = t1_row[1:-1]
    is_min = (inner < t1_row[:-2]) & (inner <= t1_row[2:]) & (inner < limit)
    out = []
    step = freq[1] - freq[0]
    for idx in np.nonzero(is_min)[0] + 1:
        ym, y0, yp = y[idx - 1], y[idx], y[idx + 1]
        denom = ym + yp - 2.0 * y0
        shift = 0.0 if denom == 0 else float(np.clip((ym - yp) / (2.0 * denom), -0.5, 0.5))
        depth = baseline / t1_row[idx] - 1.0
        out.append((freq[idx] + shift * step, depth * depth))
    return out


def extract_traces(
    ds: SpectroscopyDataset,
    threshold: float = 0.25,
    jump_limit: float = 5.0,
    min_points: int = 5,
    max_gap: int = 2,
    first_link_factor: float = 5.0,
) -> list[Trace]:
    """Extract linked resonance traces from every segment of a dataset.

    Parameters
    ----------
    ds : SpectroscopyDataset
    threshold : float
        Relative T1 dip below the per-step baseline that counts as a
        resonance (0.25 = dips deeper than 25%).
    jump_limit : float
        Largest tolerated deviation, in frequency-grid steps, between a
        candidate and the one-step linear prediction of a trace.
    min_points : int
        Traces shorter than this are discarded.
    max_gap : int
        Bias steps a trace may go undetected before it is closed.
    first_link_factor : float
        Widening of the jump window for a one-point trace whose slope is
        still unknown; steep traces need it for their second point.
    """
    step = ds.grid_step_ghz
    traces: list[Trace] = []
    for s, (seg, t1) in enumerate(zip(ds.segments, ds.t1_us)):
        active: list[dict] = []
        for i in range(seg.bias.size):
            cands = _row_candidates(t1[i], ds.freq_ghz, threshold)
            # Predict each active trace forward and greedily match the
            # globally closest (trace, candidate) pairs first.
            pairs = []
            for a_idx, a in enumerate(active):
                gap = i - a["last_i"]
                pred = a["freq"][-1] + a["slope"] * gap
                window = jump_limit * step * gap
                if len(a["freq"]) == 1:
                    window *= first_link_factor
                for c_idx, (f, _w) in enumerate(cands):
                    dist = abs(f - pred)
                    if dist <= window:
                        pairs.append((dist, a_idx, c_idx))
            pairs.sort()
            used_a, used_c = set(), set()
            for dist, a_idx, c_idx in pairs:
                if a_idx in used_a or c_idx in used_c:
                    continue
                used_a.add(a_idx)
                used_c.add(c_idx)
                a = active[a_idx]
                f, w = cands[c_idx]
                gap = i - a["last_i"]
                a["slope"] = (f - a["freq"][-1]) / gap
                a["freq"].append(f)
                a["bias_index"].append(i)
                a["weight"].append(w)
                a["last_i"] = i
            for c_idx, (f, w) in enumerate(cands):
                if c_idx not in used_c:
                    active.append(
                        {"freq": [f], "bias_index": [i], "weight": [w],
                         "slope": 0.0, "last_i": i}
                    )
            survivors = []
            for a in active:
                if i - a["last_i"] > max_gap:
                    traces.extend(_finalize(a, s, seg, min_points))
                else:
                    survivors.append(a)
            active = survivors
        for a in active:
            traces.extend(_finalize(a, s, seg, min_points))
    return traces


def _finalize(a: dict, segment: int, seg, min_points: int) -> list[Trace]:
    if len(a["freq"]) < min_points:
        return []
    tr = Trace(segment=segment, control=seg.control)
    tr.bias_index = list(a["bias_index"])
    tr.bias = [float(seg.bias[j]) for j in a["bias_index"]]
    tr.freq = list(a["freq"])
    tr.weight = list(a["weight"])
    return [tr]


def link_tracks(
    traces: list[Trace], ds: SpectroscopyDataset, boundary_tol: float = 5.0
) -> list[list[Trace]]:
    """Group per-segment traces into per-defect tracks.

    Controls hold their value across segment boundaries, so a defect's
    resonance frequency is continuous from the end of one segment to the
    start of the next; traces whose boundary frequencies agree within
    ``boundary_tol`` grid steps are chained.  Traces that appear or
    vanish mid-segment start or end their own track.
    """
    tol = boundary_tol * ds.grid_step_ghz
    by_segment: dict[int, list[Trace]] = {}
    for tr in traces:
        by_segment.setdefault(tr.segment, []).append(tr)
    track_of: dict[int, list[Trace]] = {}
    tracks: list[list[Trace]] = []
    for s in sorted(by_segment):
        claimed: set[int] = set()
        for tr in by_segment[s]:
            starts_at_edge = tr.bias_index[0] <= 1
            best = None
            if starts_at_edge and s - 1 in by_segment:
                prev_n = ds.segments[s - 1].bias.size
                for prev in by_segment[s - 1]:
                    if prev.bias_index[-1] < prev_n - 2 or id(prev) in claimed:
                        continue  # dead before the boundary, or taken
                    d = abs(prev.freq[-1] - tr.freq[0])
                    if d <= tol and (best is None or d < best[0]):
                        best = (d, prev)
            if best is not None and id(best[1]) in track_of:
                claimed.add(id(best[1]))
                track = track_of[id(best[1])]
            else:
                track = []
                tracks.append(track)
            track.append(tr)
            track_of[id(tr)] = track
    return tracks

"""Detection fusion that resists double-counting repeat sightings.

A cheap detector sees the same object again and again (and sometimes sees
objects that are not there).  Rather than cluster after the fact, every
incoming detection either merges into the one existing hypothesis whose
match window contains it, nudging that hypothesis toward the detection by
a count-weighted running mean, or founds a new hypothesis.  A hypothesis
is only trusted once its sighting count clears an acceptance threshold, so
one-off phantoms never surface.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import GroundPoint


@dataclass(frozen=True)
class RawDetection:
    """One detector sighting: capture time, ground position, score."""

    t: float
    point: GroundPoint
    confidence: float = 1.0


@dataclass(frozen=True)
class TrashHypothesis:
    """Fused estimate: running-mean position and how many sightings back it."""

    point: GroundPoint
    count: int = 1


@dataclass(frozen=True)
class FilterConfig:
    """cluster_radius: match window half-width, meters.
    accept_threshold: a hypothesis is confirmed once count > this."""

    cluster_radius: float = 0.5
    accept_threshold: int = 2

    def __post_init__(self) -> None:
        if self.cluster_radius <= 0.0:
            raise ValueError("cluster_radius must be positive")
        if self.accept_threshold < 1:
            raise ValueError("accept_threshold must be >= 1")


def ingest(
    state: list[TrashHypothesis], d: RawDetection, cfg: FilterConfig
) -> list[TrashHypothesis]:
    """Fold one detection into the hypothesis list; returns a new list.

    The detection matches a hypothesis when it falls inside the axis-aligned
    square window of half-width cfg.cluster_radius centered on the
    hypothesis (bounds inclusive).  Among several matches the nearest by
    Euclidean distance wins, ties going to the earliest hypothesis.  The
    winner moves to the count-weighted running mean of everything merged
    into it:

        p <- (p * a + d) / (a + 1),  a <- a + 1

    which keeps p the exact arithmetic mean of its sightings.  With no
    match, the detection founds a new hypothesis with count 1 at the end of
    the list.  Exactly one of merge or append happens per call, so the
    total count across hypotheses always equals the number of detections
    ingested.
    """
    r = cfg.cluster_radius
    px, py = d.point.x, d.point.y
    best = -1
    best_d2 = float("inf")
    for i, h in enumerate(state):
        if abs(px - h.point.x) <= r and abs(py - h.point.y) <= r:
            d2 = (px - h.point.x) ** 2 + (py - h.point.y) ** 2
            if d2 < best_d2:
                best = i
                best_d2 = d2
    if best < 0:
        return state + [TrashHypothesis(GroundPoint(px, py), 1)]
    h = state[best]
    a = h.count
    merged = TrashHypothesis(
        GroundPoint((h.point.x * a + px) / (a + 1), (h.point.y * a + py) / (a + 1)),
        a + 1,
    )
    out = list(state)
    out[best] = merged
    return out


def confirmed(state: list[TrashHypothesis], cfg: FilterConfig) -> list[TrashHypothesis]:
    """Hypotheses with count strictly above the acceptance threshold, in
    insertion order."""
    return [h for h in state if h.count > cfg.accept_threshold]


def write_hypotheses(state: list[TrashHypothesis], cfg: FilterConfig, path: str) -> None:
    """Dump hypotheses, one `x y count confirmed(0|1)` line each."""
    with open(path, "w", encoding="ascii") as f:
        for h in state:
            flag = 1 if h.count > cfg.accept_threshold else 0
            f.write(f"{h.point.x!r} {h.point.y!r} {h.count} {flag}\n")

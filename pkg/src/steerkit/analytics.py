"""Usage and steering-outcome metrics computed from interaction logs.

Definitions:
  * CPU  - average mouse clicks per user;
  * HTPU - average hover seconds per user;
  * effectiveness - successful retrain attempts / total attempts, where an
    attempt succeeds when it pushes test accuracy above the version-0 value;
  * efficiency - hover seconds spent on a mechanism's screens per successful
    attempt of that mechanism (lower is better).

Event targets are dot-paths whose first segment names the tile or screen
(e.g. ``key_insights.tooltip``, ``manual.slider.Age``). The manual and
automated configuration screens use the ``manual`` and ``auto`` prefixes;
efficiency only counts hover time under the matching prefix.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import EmptyCohort, NoSuccesses

EVENT_CLICK = "click"
EVENT_HOVER = "hover"

MECHANISM_MANUAL = "manual"
MECHANISM_AUTOMATED = "automated"

MECHANISM_PREFIX = {MECHANISM_MANUAL: "manual", MECHANISM_AUTOMATED: "auto"}


@dataclass(frozen=True)
class InteractionEvent:
    kind: str  # click | hover
    target: str
    session_id: str
    timestamp: float
    duration_s: Optional[float] = None  # hover only, > 0
    attempt_id: Optional[int] = None

    def __post_init__(self):
        if self.kind not in (EVENT_CLICK, EVENT_HOVER):
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.kind == EVENT_CLICK and self.duration_s is not None:
            raise ValueError("click events carry no duration")
        if self.kind == EVENT_HOVER and (self.duration_s is None or self.duration_s <= 0):
            raise ValueError("hover events need a positive duration")

    @property
    def tile(self) -> str:
        return self.target.split(".", 1)[0]

    def to_dict(self) -> dict:
        doc = {
            "kind": self.kind,
            "target": self.target,
            "session_id": self.session_id,
            "timestamp": self.timestamp,
        }
        if self.duration_s is not None:
            doc["duration_s"] = self.duration_s
        if self.attempt_id is not None:
            doc["attempt_id"] = self.attempt_id
        return doc

    @classmethod
    def from_dict(cls, d: dict) -> "InteractionEvent":
        return cls(
            kind=d["kind"],
            target=d["target"],
            session_id=d.get("session_id", ""),
            timestamp=d.get("timestamp", 0.0),
            duration_s=d.get("duration_s"),
            attempt_id=d.get("attempt_id"),
        )


def _user_ids(events: Iterable, users: Optional[Sequence[str]]) -> list[str]:
    if users is not None:
        return list(users)
    return sorted({e.session_id for e in events})


def clicks_per_user(events: Sequence[InteractionEvent], users: Optional[Sequence[str]] = None) -> float:
    cohort = _user_ids(events, users)
    if not cohort:
        raise EmptyCohort("no users in cohort")
    clicks = sum(1 for e in events if e.kind == EVENT_CLICK and e.session_id in set(cohort))
    return clicks / len(cohort)


def hover_time_per_user(events: Sequence[InteractionEvent], users: Optional[Sequence[str]] = None) -> float:
    cohort = _user_ids(events, users)
    if not cohort:
        raise EmptyCohort("no users in cohort")
    seconds = sum(
        e.duration_s for e in events if e.kind == EVENT_HOVER and e.session_id in set(cohort)
    )
    return seconds / len(cohort)


def effectiveness(attempts: Sequence) -> float:
    """Ratio of successful attempts to all attempts."""
    if not attempts:
        raise EmptyCohort("no attempts recorded")
    return sum(1 for a in attempts if a.success) / len(attempts)


def efficiency(attempts: Sequence, events: Sequence[InteractionEvent], mechanism: Optional[str] = None) -> float:
    """Hover seconds on the mechanism's screens per successful attempt."""
    successes = sum(1 for a in attempts if a.success)
    if successes == 0:
        raise NoSuccesses("no successful attempts")
    prefix = MECHANISM_PREFIX.get(mechanism) if mechanism else None
    seconds = sum(
        e.duration_s
        for e in events
        if e.kind == EVENT_HOVER and (prefix is None or e.tile == prefix)
    )
    return seconds / successes


@dataclass(frozen=True)
class UsageSummary:
    n_users: int
    avg_cpu: float
    avg_htpu: float
    per_tile: dict
    per_mechanism: dict

    def to_dict(self) -> dict:
        return {
            "n_users": self.n_users,
            "avg_cpu": self.avg_cpu,
            "avg_htpu": self.avg_htpu,
            "per_tile": self.per_tile,
            "per_mechanism": self.per_mechanism,
        }


def build_usage_summary(
    events: Sequence[InteractionEvent],
    attempts: Sequence,
    users: Optional[Sequence[str]] = None,
) -> UsageSummary:
    cohort = _user_ids(events, users)
    if not cohort:
        raise EmptyCohort("no users in cohort")

    tiles = sorted({e.tile for e in events})
    per_tile = {}
    for tile in tiles:
        tile_events = [e for e in events if e.tile == tile]
        clicks = sum(1 for e in tile_events if e.kind == EVENT_CLICK)
        seconds = sum(e.duration_s or 0.0 for e in tile_events if e.kind == EVENT_HOVER)
        per_tile[tile] = {
            "avg_cpu": clicks / len(cohort),
            "avg_htpu": seconds / len(cohort),
        }

    per_mechanism = {}
    for mechanism in (MECHANISM_MANUAL, MECHANISM_AUTOMATED):
        its_attempts = [a for a in attempts if a.mechanism == mechanism]
        entry: dict = {"attempts": len(its_attempts)}
        if its_attempts:
            entry["effectiveness"] = effectiveness(its_attempts)
            try:
                entry["efficiency"] = efficiency(its_attempts, events, mechanism)
            except NoSuccesses:
                entry["efficiency"] = None
        else:
            entry["effectiveness"] = None
            entry["efficiency"] = None
        per_mechanism[mechanism] = entry

    return UsageSummary(
        n_users=len(cohort),
        avg_cpu=clicks_per_user(events, cohort),
        avg_htpu=hover_time_per_user(events, cohort),
        per_tile=per_tile,
        per_mechanism=per_mechanism,
    )


def render_summary_table(summary: UsageSummary) -> str:
    """Plain-text table mirroring the usage-report layout."""
    lines = []
    lines.append(f"Users: {summary.n_users}")
    lines.append(f"Average Clicks Per User (CPU):      {summary.avg_cpu:.2f}")
    lines.append(f"Average Hover Time Per User (HTPU): {summary.avg_htpu:.2f} s")
    lines.append("")
    lines.append(f"{'Tile':<24}{'Avg. CPU':>12}{'Avg. HTPU':>12}")
    for tile, row in summary.per_tile.items():
        lines.append(f"{tile:<24}{row['avg_cpu']:>12.2f}{row['avg_htpu']:>12.2f}")
    lines.append("")
    lines.append(f"{'Mechanism':<24}{'Effectiveness':>14}{'Efficiency':>12}")
    for mechanism, row in summary.per_mechanism.items():
        eff = "-" if row["effectiveness"] is None else f"{row['effectiveness']:.2f}"
        cost = "-" if row["efficiency"] is None else f"{row['efficiency']:.2f}"
        lines.append(f"{mechanism:<24}{eff:>14}{cost:>12}")
    return "\n".join(lines)

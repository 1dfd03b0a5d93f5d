"""Elo aggregation of pairwise preference votes.

Votes compare two enhancement methods on one of five aspects.  A decisive
vote is a normal Elo match with k=16.  "Both good" / "both bad" votes are
treated as each competitor winning / losing a virtual match against the
unenhanced baseline; those two updates use k=8 and are computed from one
pre-vote snapshot, so their order cannot matter.  The baseline absorbs the
symmetric losses, which keeps total rating mass conserved per vote.
"""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ValidationError

ATTRIBUTES = ("overall", "illumination", "noise_artifacts", "blurriness", "color")
OUTCOMES = ("a_better", "b_better", "both_good", "both_bad")

INITIAL_RATING = 1500.0
K_DECISIVE = 16.0
K_BOTH = 8.0


def expected_score(rating_a: float, rating_b: float) -> float:
    """Win probability of the first player: 1 / (1 + 10^((r_b - r_a) / 400))."""
    return 1.0 / (1.0 + 10.0 ** ((rating_b - rating_a) / 400.0))


@dataclass(frozen=True)
class VoteRecord:
    vote_id: str
    image_id: str
    attribute: str
    method_a: str
    method_b: str
    outcome: str
    timestamp: float

    def __post_init__(self):
        if self.attribute not in ATTRIBUTES:
            raise ValidationError(f"unknown attribute {self.attribute!r}")
        if self.outcome not in OUTCOMES:
            raise ValidationError(f"unknown outcome {self.outcome!r}")
        if self.method_a == self.method_b:
            raise ValidationError("method_a and method_b must differ")

    @classmethod
    def create(
        cls,
        image_id: str,
        attribute: str,
        method_a: str,
        method_b: str,
        outcome: str,
        timestamp: float | None = None,
    ) -> "VoteRecord":
        return cls(
            vote_id=uuid.uuid4().hex,
            image_id=image_id,
            attribute=attribute,
            method_a=method_a,
            method_b=method_b,
            outcome=outcome,
            timestamp=time.time() if timestamp is None else timestamp,
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "vote_id": self.vote_id,
                "image_id": self.image_id,
                "attribute": self.attribute,
                "method_a": self.method_a,
                "method_b": self.method_b,
                "outcome": self.outcome,
                "timestamp": self.timestamp,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, line: str) -> "VoteRecord":
        doc = json.loads(line)
        return cls(
            vote_id=str(doc["vote_id"]),
            image_id=str(doc["image_id"]),
            attribute=str(doc["attribute"]),
            method_a=str(doc["method_a"]),
            method_b=str(doc["method_b"]),
            outcome=str(doc["outcome"]),
            timestamp=float(doc["timestamp"]),
        )


@dataclass
class RatingTable:
    """Per-(attribute, method) Elo state; mutated by a single writer."""

    baseline_method: str = "input"
    initial_rating: float = INITIAL_RATING
    k_decisive: float = K_DECISIVE
    k_both: float = K_BOTH
    ratings: dict[tuple[str, str], float] = field(default_factory=dict)
    vote_count: dict[tuple[str, str], int] = field(default_factory=dict)

    def rating(self, attribute: str, method: str) -> float:
        return self.ratings.get((attribute, method), self.initial_rating)

    def _register(self, attribute: str, method: str) -> None:
        self.ratings.setdefault((attribute, method), self.initial_rating)

    def _bump_count(self, attribute: str, method: str) -> None:
        key = (attribute, method)
        self.vote_count[key] = self.vote_count.get(key, 0) + 1

    def methods(self, attribute: str) -> list[str]:
        return sorted({m for a, m in self.ratings if a == attribute})


def apply_vote(table: RatingTable, vote: VoteRecord) -> RatingTable:
    """Apply one vote in place and return the table.

    Decisive outcomes exchange k_decisive * (S - E) between the two methods.
    both_good / both_bad play each non-baseline competitor against the
    baseline with k_both, all deltas taken from the pre-vote snapshot.
    """
    attr = vote.attribute
    table._register(attr, vote.method_a)
    table._register(attr, vote.method_b)
    table._bump_count(attr, vote.method_a)
    table._bump_count(attr, vote.method_b)

    if vote.outcome in ("a_better", "b_better"):
        r_a = table.rating(attr, vote.method_a)
        r_b = table.rating(attr, vote.method_b)
        score_a = 1.0 if vote.outcome == "a_better" else 0.0
        delta = table.k_decisive * (score_a - expected_score(r_a, r_b))
        table.ratings[(attr, vote.method_a)] = r_a + delta
        table.ratings[(attr, vote.method_b)] = r_b - delta
        return table

    baseline = table.baseline_method
    table._register(attr, baseline)
    if baseline not in (vote.method_a, vote.method_b):
        table._bump_count(attr, baseline)
    virtual_score = 1.0 if vote.outcome == "both_good" else 0.0
    snapshot_baseline = table.rating(attr, baseline)
    deltas = []
    for method in (vote.method_a, vote.method_b):
        if method == baseline:
            continue  # no self-match
        r_m = table.rating(attr, method)
        deltas.append((method, table.k_both * (virtual_score - expected_score(r_m, snapshot_baseline))))
    for method, delta in deltas:
        table.ratings[(attr, method)] = table.rating(attr, method) + delta
        table.ratings[(attr, baseline)] = table.rating(attr, baseline) - delta
    return table


def replay(
    votes: Iterable[VoteRecord],
    baseline_method: str = "input",
    initial_rating: float = INITIAL_RATING,
    k_decisive: float = K_DECISIVE,
    k_both: float = K_BOTH,
) -> RatingTable:
    """Fold the vote log, ordered by timestamp, into a fresh table."""
    table = RatingTable(
        baseline_method=baseline_method,
        initial_rating=initial_rating,
        k_decisive=k_decisive,
        k_both=k_both,
    )
    for vote in sorted(votes, key=lambda v: v.timestamp):
        apply_vote(table, vote)
    return table


def leaderboard(table: RatingTable, attribute: str) -> list[tuple[str, float, int]]:
    """(method, rating, votes) rows, best rating first, ties by name."""
    if attribute not in ATTRIBUTES:
        raise ValidationError(f"unknown attribute {attribute!r}")
    rows = [
        (method, table.rating(attribute, method), table.vote_count.get((attribute, method), 0))
        for method in table.methods(attribute)
    ]
    return sorted(rows, key=lambda row: (-row[1], row[0]))


# ---------------------------------------------------------------------------
# append-only vote log


def load_votes(path: str | Path) -> list[VoteRecord]:
    path = Path(path)
    if not path.exists():
        return []
    votes = []
    for line_no, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            votes.append(VoteRecord.from_json(line))
        except (json.JSONDecodeError, KeyError) as exc:
            raise ValidationError(f"{path}:{line_no}: malformed vote record") from exc
    return votes


def append_vote(path: str | Path, vote: VoteRecord) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(vote.to_json() + "\n")


def save_votes(path: str | Path, votes: Sequence[VoteRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for vote in votes:
            fh.write(vote.to_json() + "\n")

"""Pairwise-preference voting service over enhanced image collections.

The service shows raters an image pair (two methods, same source image) with
a randomly sampled judging aspect, records their verdicts in an append-only
log, and keeps live Elo leaderboards.  The log is the source of truth:
restarting the service replays it, so crash recovery and offline re-scoring
through the library give identical ratings.

Votes are applied under a single lock (one ordered writer); everything the
voter sees before voting is an opaque token, never a method name.
"""

from __future__ import annotations

import json
import random
import threading
import time
import uuid
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import elo
from .errors import ValidationError

DEFAULT_SESSION_TTL = 30 * 60.0  # seconds


@dataclass(frozen=True)
class MethodManifest:
    """Which method produced which directory of images, plus the baseline."""

    methods: dict[str, Path]
    baseline: str
    images: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "methods", dict(self.methods))
        object.__setattr__(self, "images", tuple(self.images))
        if len(self.methods) < 2:
            raise ValidationError("manifest needs at least two methods")
        if self.baseline not in self.methods:
            raise ValidationError(f"baseline {self.baseline!r} is not among the methods")
        if not self.images:
            raise ValidationError("manifest lists no images")
        for name, directory in self.methods.items():
            directory = Path(directory)
            if not directory.is_dir():
                raise ValidationError(f"method {name!r}: {directory} is not a directory")
            for image_id in self.images:
                if not (directory / image_id).is_file():
                    raise ValidationError(f"method {name!r} is missing image {image_id!r}")


def load_manifest(path: str | Path) -> MethodManifest:
    path = Path(path)
    doc = json.loads(path.read_text())
    root = path.parent
    methods = {name: (root / d).resolve() for name, d in doc["methods"].items()}
    return MethodManifest(
        methods=methods,
        baseline=doc["baseline"],
        images=tuple(doc["images"]),
    )


@dataclass
class PairSession:
    pair_id: str
    image_id: str
    attribute: str
    method_a: str  # shown as image A (left)
    method_b: str  # shown as image B (right)
    issued_at: float
    expires_at: float
    voted: bool = False


class VotingService:
    """All mutable state behind the HTTP endpoints."""

    def __init__(
        self,
        manifest: MethodManifest,
        votes_log: str | Path,
        seed: int | None = None,
        session_ttl: float = DEFAULT_SESSION_TTL,
        rate_limit_per_minute: int | None = None,
    ):
        self.manifest = manifest
        self.votes_log = Path(votes_log)
        self.session_ttl = session_ttl
        self.rate_limit_per_minute = rate_limit_per_minute
        self._rng = random.Random(seed)
        self._sessions: dict[str, PairSession] = {}
        self._lock = threading.Lock()
        self._rate: dict[str, deque] = {}
        existing = elo.load_votes(self.votes_log) if self.votes_log.exists() else []
        self.table = elo.replay(existing, baseline_method=manifest.baseline)
        self.vote_total = len(existing)

    # -- sampling ----------------------------------------------------------

    def new_pair(self) -> PairSession:
        now = time.time()
        with self._lock:
            self._prune(now)
            image_id = self._rng.choice(self.manifest.images)
            method_a, method_b = self._rng.sample(sorted(self.manifest.methods), 2)
            attribute = self._rng.choice(elo.ATTRIBUTES)
            session = PairSession(
                pair_id=uuid.uuid4().hex,
                image_id=image_id,
                attribute=attribute,
                method_a=method_a,
                method_b=method_b,
                issued_at=now,
                expires_at=now + self.session_ttl,
            )
            self._sessions[session.pair_id] = session
        return session

    def _prune(self, now: float) -> None:
        dead = [pid for pid, s in self._sessions.items() if s.expires_at <= now]
        for pid in dead:
            del self._sessions[pid]

    def session(self, pair_id: str) -> PairSession | None:
        s = self._sessions.get(pair_id)
        if s is None or s.expires_at <= time.time():
            return None
        return s

    def image_path(self, session: PairSession, side: str) -> Path:
        method = session.method_a if side == "a" else session.method_b
        return Path(self.manifest.methods[method]) / session.image_id

    # -- voting ------------------------------------------------------------

    def record_vote(self, pair_id: str, outcome: str) -> dict:
        if outcome not in elo.OUTCOMES:
            raise HTTPException(status_code=400, detail=f"outcome must be one of {list(elo.OUTCOMES)}")
        with self._lock:
            s = self._sessions.get(pair_id)
            if s is None or s.expires_at <= time.time():
                raise HTTPException(status_code=404, detail="unknown or expired pair")
            if s.voted:
                raise HTTPException(status_code=409, detail="pair already voted")
            vote = elo.VoteRecord.create(
                image_id=s.image_id,
                attribute=s.attribute,
                method_a=s.method_a,
                method_b=s.method_b,
                outcome=outcome,
            )
            elo.append_vote(self.votes_log, vote)
            elo.apply_vote(self.table, vote)
            s.voted = True
            self.vote_total += 1
            return {
                "ok": True,
                "pair_id": pair_id,
                "attribute": s.attribute,
                "outcome": outcome,
                "methods": {"a": s.method_a, "b": s.method_b},
                "ratings": {
                    s.method_a: self.table.rating(s.attribute, s.method_a),
                    s.method_b: self.table.rating(s.attribute, s.method_b),
                },
            }

    def check_rate(self, client_key: str) -> None:
        if self.rate_limit_per_minute is None:
            return
        now = time.time()
        window = self._rate.setdefault(client_key, deque())
        while window and now - window[0] > 60.0:
            window.popleft()
        if len(window) >= self.rate_limit_per_minute:
            raise HTTPException(status_code=429, detail="rate limit exceeded")
        window.append(now)


class VoteBody(BaseModel):
    pair_id: str
    outcome: str


def create_app(
    manifest: MethodManifest,
    votes_log: str | Path,
    seed: int | None = None,
    session_ttl: float = DEFAULT_SESSION_TTL,
    rate_limit_per_minute: int | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    service = VotingService(
        manifest,
        votes_log,
        seed=seed,
        session_ttl=session_ttl,
        rate_limit_per_minute=rate_limit_per_minute,
    )
    app = FastAPI(title="dimeval voting service")
    app.state.service = service

    @app.get("/api/health")
    def health() -> dict:
        return {
            "status": "ok",
            "methods": len(service.manifest.methods),
            "images": len(service.manifest.images),
            "votes": service.vote_total,
        }

    @app.get("/api/pair")
    def get_pair() -> dict:
        s = service.new_pair()
        return {
            "pair_id": s.pair_id,
            "attribute": s.attribute,
            "image_a_url": f"/api/image/{s.pair_id}/a",
            "image_b_url": f"/api/image/{s.pair_id}/b",
        }

    @app.get("/api/image/{pair_id}/{side}")
    def get_image(pair_id: str, side: str) -> FileResponse:
        if side not in ("a", "b"):
            raise HTTPException(status_code=404, detail="side must be 'a' or 'b'")
        s = service.session(pair_id)
        if s is None:
            raise HTTPException(status_code=404, detail="unknown or expired pair")
        return FileResponse(service.image_path(s, side))

    @app.post("/api/vote")
    def post_vote(body: VoteBody, request: Request) -> dict:
        client = request.headers.get("x-client-token") or (
            request.client.host if request.client else "unknown"
        )
        service.check_rate(client)
        return service.record_vote(body.pair_id, body.outcome)

    @app.get("/api/leaderboard")
    def get_leaderboard(attribute: str = "overall") -> dict:
        if attribute not in elo.ATTRIBUTES:
            raise HTTPException(status_code=400, detail=f"attribute must be one of {list(elo.ATTRIBUTES)}")
        rows = elo.leaderboard(service.table, attribute)
        return {
            "attribute": attribute,
            "entries": [
                {"method": method, "rating": rating, "votes": votes}
                for method, rating, votes in rows
            ],
        }

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app

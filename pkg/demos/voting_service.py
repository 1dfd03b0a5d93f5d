"""Drive the pairwise voting service in-process, no browser needed.

Builds a three-method image tree, then talks to the VotingService layer the
same way the HTTP endpoints do: request anonymous pairs, vote, and read the
leaderboard. Shows that a restart (a second service over the same log)
reproduces identical ratings.

To serve the same thing over HTTP:

    dimeval serve --manifest manifest.json --votes-log votes.jsonl --port 8000
"""

import random
import tempfile
from pathlib import Path

import numpy as np

from dimeval import leaderboard, write_image
from dimeval.service import MethodManifest, VotingService

scratch = Path(tempfile.mkdtemp(prefix="dimeval_service_demo_"))
images = tuple(f"{n:03d}.png" for n in range(4))

rng = np.random.default_rng(1)
brightness = {"input": 0.2, "gamma": 0.5, "zerodce": 0.8}
method_dirs = {}
for method, level in brightness.items():
    directory = scratch / method
    directory.mkdir()
    for image_id in images:
        base = rng.uniform(0, 0.3, (32, 32, 3))
        write_image(directory / image_id, np.clip(base + level, 0, 1))
    method_dirs[method] = directory

manifest = MethodManifest(methods=method_dirs, baseline="input", images=images)
service = VotingService(manifest, scratch / "votes.jsonl", seed=11)

# Raters see only opaque pair ids; method names surface after the vote.
rater = random.Random(5)
for _ in range(40):
    session = service.new_pair()
    better_a = brightness[session.method_a] >= brightness[session.method_b]
    if rater.random() < 0.15:
        better_a = not better_a
    outcome = "a_better" if better_a else "b_better"
    receipt = service.record_vote(session.pair_id, outcome)
    assert receipt["ok"]

print("[overall] after 40 votes")
for method, rating, votes in leaderboard(service.table, "overall"):
    print(f"  {method:<8} {rating:7.1f}  ({votes} votes)")

restarted = VotingService(manifest, scratch / "votes.jsonl", seed=99)
assert restarted.table.ratings == service.table.ratings
print("\nrestart over the same log reproduces the ratings exactly")
print(f"artifacts under {scratch}")

"""Predictability-guided training-data selection.

Users eligible by length are partitioned into disjoint eval and candidate
pools. A strategy then picks a budgeted subset of candidates: the most
predictable users (high_pi), the least predictable (low_pi), or a seeded
uniform sample (random). Materialization writes a train set holding every eval
user's prefix plus the selected candidates' full sequences, and a test set
holding each eval user's final next-item instance. The eval partition depends
only on (seed, eval_fraction), never on the strategy or budget, so test files
are byte-identical across strategies.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .sequence_core import InteractionLog

__all__ = ["SelectionPlan", "build_plan", "materialize", "write_selection_csv"]

STRATEGIES = ("high_pi", "random", "low_pi")


@dataclass
class SelectionPlan:
    eval_users: np.ndarray       # user indices, ascending
    candidate_users: np.ndarray  # user indices, ascending; disjoint from eval
    budget_fraction: float
    strategy: str
    seed: int
    selected: np.ndarray         # subset of candidate_users, ascending


def build_plan(
    log: InteractionLog,
    scores: dict[int, float],
    budget_fraction: float,
    strategy: str,
    seed: int,
    eval_fraction: float = 0.5,
    min_length: int = 5,
) -> SelectionPlan:
    """Partition eligible users and select a budgeted candidate subset.

    Eligibility requires length >= max(min_length, 2): an eval user must have
    a prefix and a final instance. The eval set is a seeded draw of
    round(eval_fraction * eligible) users from substream (seed, 1); scores
    must cover every candidate (extra entries are ignored, since callers
    cannot know the partition in advance). k = round(budget_fraction * pool).
    high_pi and low_pi take opposite ends of one (score, user_index) ordering,
    so at 2k <= pool they never overlap; random draws k from substream
    (seed, 2), keeping the partition itself strategy-independent.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}")
    if not (0.0 < budget_fraction <= 1.0):
        raise ValueError("budget_fraction must lie in (0, 1]")
    if not (0.0 < eval_fraction < 1.0):
        raise ValueError("eval_fraction must lie in (0, 1)")
    eligible = np.array(
        [s.user_index for s in log.sequences if s.length >= max(min_length, 2)],
        dtype=np.int64,
    )
    if len(eligible) < 2:
        raise ValueError("need at least 2 eligible users")
    rng = np.random.default_rng([seed, 1])
    perm = rng.permutation(len(eligible))
    n_eval = round(eval_fraction * len(eligible))
    n_eval = min(max(n_eval, 1), len(eligible) - 1)  # both pools stay non-empty
    eval_users = np.sort(eligible[perm[:n_eval]])
    candidates = np.sort(eligible[perm[n_eval:]])

    missing = [int(u) for u in candidates if u not in scores]
    if missing:
        raise ValueError(f"scores missing for candidate users {missing[:5]}")
    k = round(budget_fraction * len(candidates))
    if k > len(candidates):
        raise ValueError("budget exceeds candidate pool")

    order = sorted(candidates, key=lambda u: (scores[int(u)], int(u)))
    if strategy == "high_pi":
        chosen = order[len(order) - k:]
    elif strategy == "low_pi":
        chosen = order[:k]
    else:
        draw_rng = np.random.default_rng([seed, 2])
        chosen = list(draw_rng.choice(candidates, size=k, replace=False))
    return SelectionPlan(
        eval_users=eval_users,
        candidate_users=candidates,
        budget_fraction=budget_fraction,
        strategy=strategy,
        seed=seed,
        selected=np.sort(np.asarray(chosen, dtype=np.int64)),
    )


def materialize(
    plan: SelectionPlan, log: InteractionLog
) -> tuple[list[tuple[str, str, int]], list[tuple[str, str, int]]]:
    """Rows for train.csv and test.csv under the plan.

    Train holds each eval user's first T_u - 1 events plus every selected
    candidate's full sequence; test holds one row per eval user, the held-out
    final item. Rows are (user_id, item_id, timestamp) with the within-user
    position as timestamp, ordered by user_index then position.
    """
    by_index = {s.user_index: s for s in log.sequences}
    reverse = log.vocabulary.reverse
    train: list[tuple[str, str, int]] = []
    test: list[tuple[str, str, int]] = []
    eval_set = set(int(v) for v in plan.eval_users)
    selected = set(int(u) for u in plan.selected)
    for u in sorted(eval_set | selected):
        seq = by_index[u]
        upto = seq.length - 1 if u in eval_set else seq.length
        for pos in range(upto):
            train.append((seq.user_id, reverse[int(seq.items[pos])], pos))
    for u in plan.eval_users:
        seq = by_index[int(u)]
        test.append((seq.user_id, reverse[int(seq.items[-1])], seq.length - 1))
    return train, test


def write_selection_csv(rows: list[tuple[str, str, int]], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "item_id", "timestamp"])
        writer.writerows(rows)

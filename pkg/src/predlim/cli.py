"""Command-line interface.

Subcommands cover the full pipeline: ingest a raw CSV into the canonical log
JSON, estimate per-user entropy, map entropies to predictability scores,
generate oracle-controlled synthetic corpora, aggregate cohorts, run the
difficulty and item-space sweeps, compare dataset scores against the shipped
reference accuracies, and materialize budgeted training-data selections.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import evaluation, selection
from .cohort import compute_features, split_and_aggregate
from .entropy import EntropyEstimate, lz_entropy, perm_entropy, sampen
from .predictability import epl, fano_invert, fano_nr, perm_predictability
from .sequence_core import ingest_csv, log_from_json, log_to_json
from .synth import GeneratorConfig, generate, invert_noise, oracle_hit1


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def cmd_ingest(args) -> int:
    log = ingest_csv(
        args.input, min_length=args.min_length, max_events=args.max_events, dedup=args.dedup
    )
    log_to_json(log, args.output)
    s = log.stats
    print(
        f"ingested {s['num_users']} users, {s['num_items']} items, "
        f"{s['num_interactions']} interactions (avg length {s['avg_length']:.2f})"
    )
    return 0


def cmd_estimate(args) -> int:
    log = log_from_json(args.log)
    rows = []
    for seq in log.sequences:
        if args.estimator == "sampen":
            est = sampen(seq.items, m=args.m).to(args.unit)
            rows.append((seq.user_index, est.estimator, est.value, est.unit, ";".join(est.flags)))
        elif args.estimator == "lz":
            est = lz_entropy(seq.items).to(args.unit)
            rows.append((seq.user_index, est.estimator, est.value, est.unit, ";".join(est.flags)))
        else:
            for d in args.d:
                try:
                    est = perm_entropy(seq.items, d=d, tau=args.tau)
                except ValueError:
                    continue
                rows.append((seq.user_index, est.estimator, est.value, "", f"d={d}"))
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_index", "estimator", "value", "unit", "flags"])
        for row in rows:
            writer.writerow([row[0], row[1], repr(row[2]), row[3], row[4]])
    print(f"wrote {len(rows)} estimates to {args.output}")
    return 0


def _read_entropy_csv(path: str) -> dict[int, EntropyEstimate]:
    out: dict[int, EntropyEstimate] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row["estimator"] == "perm_normalized":
                continue  # not mappable by epl or the Fano routes
            u = int(row["user_index"])
            if u in out:
                raise ValueError(f"{path}: multiple entropy rows for user {u}")
            out[u] = EntropyEstimate(
                value=float(row["value"]),
                unit=row["unit"],
                estimator=row["estimator"],
                flags=tuple(f for f in row["flags"].split(";") if f),
            )
    if not out:
        raise ValueError(f"{path}: no usable entropy rows")
    return out


def cmd_score(args) -> int:
    log = log_from_json(args.log)
    rows = []
    if args.method == "perm":
        for seq in log.sequences:
            score = perm_predictability(seq.items, d_set=tuple(args.d), tau=args.tau)
            rows.append((seq.user_index, "perm", score.value, "", ""))
    else:
        if not args.entropy:
            raise ValueError(f"--entropy is required for method {args.method}")
        estimates = _read_entropy_csv(args.entropy)
        if args.method == "fano_nr" and args.n_scope == "pooled":
            from .sequence_core import transition_fanout

            n_r, _ = transition_fanout(log.sequences, scope="pooled")
        for seq in log.sequences:
            est = estimates.get(seq.user_index)
            if est is None:
                raise ValueError(f"no entropy estimate for user {seq.user_index}")
            if args.method == "epl":
                score = epl(est)
                rows.append((seq.user_index, "epl", score.value, score.effective_size, ""))
            elif args.method == "fano":
                score = fano_invert(est, len(log.vocabulary))
                rows.append((seq.user_index, "fano", score.value, "", score.n))
            else:
                if args.n_scope == "pooled":
                    score = fano_invert(est, max(n_r, 2))
                    rows.append((seq.user_index, "fano_nr", score.value, "", score.n))
                else:
                    score = fano_nr(est, [seq], scope="per_user")
                    rows.append((seq.user_index, "fano_nr", score.value, "", score.n))
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_index", "method", "value", "effective_size", "n_used"])
        for r in rows:
            writer.writerow([r[0], r[1], repr(r[2]), repr(r[3]) if r[3] != "" else "", r[4]])
    print(f"wrote {len(rows)} scores to {args.output}")
    return 0


def cmd_synth(args) -> int:
    mechanism = args.mechanism.replace("-", "_")
    if mechanism == "session_reset":
        free, fixed = "eps", {"m": args.m, "rho": args.rho}
        invert_fixed = {"n": args.n, "m": args.m}
    elif mechanism == "repeat_last":
        free, fixed = "p", {}
        invert_fixed = {"n": args.n}
    else:
        free, fixed = "eps", {"c": args.c, "m_c": args.m_c, "s": args.s}
        invert_fixed = {"n": args.n, "m_c": args.m_c}
    given = getattr(args, free if free == "p" else "eps")
    if (args.target_hit1 is None) == (given is None):
        raise ValueError(f"give exactly one of --target-hit1 or --{free}")
    noise = given if given is not None else invert_noise(mechanism, args.target_hit1, **invert_fixed)
    config = GeneratorConfig(
        mechanism=mechanism,
        n=args.n,
        users=args.users,
        length=args.length,
        seed=args.seed,
        params={**fixed, free: noise},
    )
    corpus = generate(config)
    os.makedirs(args.output, exist_ok=True)
    log_path = os.path.join(args.output, "log.json")
    latent_path = os.path.join(args.output, "latent.json")
    log_to_json(corpus.log, log_path)
    trace = corpus.latent_trace
    serializable = {
        key: [np.asarray(v).tolist() for v in val] if isinstance(val, list) else np.asarray(val).tolist()
        for key, val in trace.items()
    }
    with open(latent_path, "w", encoding="utf-8") as fh:
        json.dump(serializable, fh)
    with open(os.path.join(args.output, "oracle.json"), "w", encoding="utf-8") as fh:
        json.dump(
            {
                "config": {
                    "mechanism": mechanism,
                    "n": args.n,
                    "users": args.users,
                    "length": args.length,
                    "seed": args.seed,
                    "params": config.params,
                },
                "oracle_hit1": corpus.oracle_hit1,
                "latent_trace_file": "latent.json",
            },
            fh,
        )
    print(f"generated {mechanism} corpus at {args.output} (oracle hit@1 {corpus.oracle_hit1:.4f})")
    return 0


def _read_scores_csv(path: str) -> dict[int, float]:
    out: dict[int, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out[int(row["user_index"])] = float(row["value"])
    if not out:
        raise ValueError(f"{path}: no score rows")
    return out


def cmd_cohort(args) -> int:
    log = log_from_json(args.log)
    scores = _read_scores_csv(args.scores)
    features = compute_features(log, tail_mass=args.tail_mass)
    report = split_and_aggregate(features, scores, args.dimension)
    payload = {
        "dimension": report.dimension,
        "groups": [
            {
                "label": g.label,
                "user_count": g.user_count,
                "mean_predictability": g.mean_predictability,
                "std": g.std,
                "stderr": g.stderr,
                "per_user_scores": g.per_user_scores,
            }
            for g in report.groups
        ],
    }
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
    g1, g2 = report.groups
    print(
        f"{report.dimension}: Q1 mean {g1.mean_predictability:.4f} ({g1.user_count} users), "
        f"Q2 mean {g2.mean_predictability:.4f} ({g2.user_count} users)"
    )
    return 0


def cmd_sweep(args) -> int:
    methods = args.methods.split(",")
    if args.kind == "difficulty":
        if not args.mechanism:
            raise ValueError("--mechanism is required for a difficulty sweep")
        table = evaluation.run_difficulty_sweep(
            mechanism=args.mechanism.replace("-", "_"),
            targets=args.targets,
            methods=methods,
            reps=args.reps,
            n=args.n,
            users=args.users,
            length=args.length,
            seed=args.seed,
            estimator=args.estimator,
            m=args.m,
            rho=args.rho,
            m_latent=args.m_latent,
            c=args.c,
            m_c=args.m_c,
            s=args.s,
        )
        for meth, value in table.rmse_by_method.items():
            print(f"rmse vs targets [{meth}]: {value:.4f}")
    else:
        table = evaluation.run_n_sweep(
            n_grid=args.n_grid,
            target_hit1=args.target_hit1,
            methods=methods,
            reps=args.reps,
            users=args.users,
            length=args.length,
            seed=args.seed,
            estimator=args.estimator,
            m=args.m,
            c=args.c,
            m_c=args.m_c,
            s=args.s,
        )
    table.to_csv(args.output)
    print(f"wrote sweep table to {args.output}")
    return 0


def cmd_report(args) -> int:
    reference = evaluation.load_reference(args.reference)
    by_method: dict[str, list[evaluation.DatasetScore]] = {}
    with open(args.scores, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            ref = reference.get(row["dataset_id"])
            by_method.setdefault(row["method"], []).append(
                evaluation.DatasetScore(
                    dataset_id=row["dataset_id"],
                    predictability=float(row["predictability"]),
                    method=row["method"],
                    reference_accuracy=ref["hit20"] if ref else None,
                )
            )
    payload = {}
    for method, scores in sorted(by_method.items()):
        report = evaluation.consistency_report(scores)
        payload[method] = {
            "spearman_rho": report.spearman_rho,
            "rmse": report.rmse,
            "pairs": report.pairs,
            "warnings": report.warnings,
        }
        print(f"{method}: rho {report.spearman_rho:.4f}, rmse {report.rmse:.4f}")
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
    return 0


def cmd_select(args) -> int:
    log = log_from_json(args.log)
    scores = _read_scores_csv(args.scores)
    strategy = {"highpi": "high_pi", "random": "random", "lowpi": "low_pi"}[args.strategy]
    plan = selection.build_plan(
        log,
        scores,
        budget_fraction=args.budget,
        strategy=strategy,
        seed=args.seed,
        eval_fraction=args.eval_fraction,
        min_length=args.min_length,
    )
    train, test = selection.materialize(plan, log)
    os.makedirs(args.output_dir, exist_ok=True)
    selection.write_selection_csv(train, os.path.join(args.output_dir, "train.csv"))
    selection.write_selection_csv(test, os.path.join(args.output_dir, "test.csv"))
    with open(os.path.join(args.output_dir, "plan.json"), "w", encoding="utf-8") as fh:
        json.dump(
            {
                "strategy": plan.strategy,
                "budget_fraction": plan.budget_fraction,
                "seed": plan.seed,
                "eval_users": plan.eval_users.tolist(),
                "candidate_users": plan.candidate_users.tolist(),
                "selected": plan.selected.tolist(),
            },
            fh,
        )
    print(
        f"{plan.strategy}: selected {len(plan.selected)} of {len(plan.candidate_users)} "
        f"candidates; {len(plan.eval_users)} eval users"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="predlim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="read a (user,item,timestamp) CSV into log JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--min-length", type=int, default=1)
    p.add_argument("--max-events", type=int, default=None)
    p.add_argument("--dedup", action="store_true")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("estimate", help="per-user entropy estimates")
    p.add_argument("--log", required=True)
    p.add_argument("--estimator", choices=["sampen", "lz", "perm"], default="sampen")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--d", type=_int_list, default=[3, 4, 5])
    p.add_argument("--tau", type=int, default=1)
    p.add_argument("--unit", choices=["nats", "bits"], default="nats")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("score", help="map entropies to predictability scores")
    p.add_argument("--log", required=True)
    p.add_argument("--entropy", default=None)
    p.add_argument("--method", choices=["epl", "fano", "fano_nr", "perm"], required=True)
    p.add_argument("--n-scope", choices=["global", "per-user", "pooled"], default="pooled")
    p.add_argument("--d", type=_int_list, default=[3, 4, 5])
    p.add_argument("--tau", type=int, default=1)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("synth", help="generate an oracle-controlled synthetic corpus")
    p.add_argument(
        "--mechanism",
        choices=["session-reset", "repeat-last", "context-switch"],
        required=True,
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--users", type=int, required=True)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--target-hit1", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--rho", type=float, default=0.05)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--c", type=int, default=5)
    p.add_argument("--m-c", type=int, default=5, dest="m_c")
    p.add_argument("--s", type=float, default=0.05)
    p.add_argument("--output", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("cohort", help="median-split cohort aggregation")
    p.add_argument("--log", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--dimension", choices=["novelty", "longtail", "activity"], required=True)
    p.add_argument("--tail-mass", type=float, default=0.8)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_cohort)

    p = sub.add_parser("sweep", help="difficulty or item-space-size sweep")
    p.add_argument("--kind", choices=["difficulty", "n"], required=True)
    p.add_argument("--mechanism", choices=["session-reset", "repeat-last", "context-switch"])
    p.add_argument("--targets", type=_float_list, default=list(evaluation.DIFFICULTY_TARGETS))
    p.add_argument("--n-grid", type=_int_list, default=list(evaluation.N_GRID))
    p.add_argument("--target-hit1", type=float, default=0.10)
    p.add_argument("--methods", default="epl,fano,fano_nr,perm")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--users", type=int, default=300)
    p.add_argument("--length", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--estimator", choices=["sampen", "lz"], default="sampen")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--rho", type=float, default=0.05)
    p.add_argument("--m-latent", type=int, default=1, dest="m_latent")
    p.add_argument("--c", type=int, default=5)
    p.add_argument("--m-c", type=int, default=5, dest="m_c")
    p.add_argument("--s", type=float, default=0.05)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="consistency against the reference accuracies")
    p.add_argument("--scores", required=True, help="CSV: dataset_id,method,predictability")
    p.add_argument("--reference", default=None, help="defaults to the shipped file")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("select", help="materialize a budgeted training-data selection")
    p.add_argument("--log", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--strategy", choices=["highpi", "random", "lowpi"], required=True)
    p.add_argument("--budget", type=float, required=True)
    p.add_argument("--eval-fraction", type=float, default=0.5)
    p.add_argument("--min-length", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output-dir", required=True)
    p.set_defaults(func=cmd_select)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver: dataset generation, training, verification, benchmarks.

Every artifact-producing command writes a manifest recording the exact
arguments and output paths; re-running the command from the manifest
reproduces the outputs bit for bit (timing figures excepted).

Exit codes: 0 success, 1 usage, 2 validation/contract failure,
3 numerical failure (NaN, degenerate values, search budget).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bench import run_interaction_benchmark
from .errors import NumericalError, ValidationError
from .gcn import GcnConfig
from .ged import gen_ged_dataset
from .gradcheck import full_report, DEFAULT_TOLERANCE
from .graphs import gen_motif_pair_dataset, load_pairs, save_pairs
from .model import (ModelConfig, forward, load_checkpoint, save_checkpoint)
from .train import TrainConfig, evaluate, train


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _write_manifest(out_dir: Path, command: str, args: dict,
                    outputs: list[str]) -> None:
    manifest = {
        "command": command,
        "args": args,
        "package_version": __version__,
        "created_unix": time.time(),
        "outputs": outputs,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen_ged(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dataset = gen_ged_dataset(args.graphs, args.max_nodes, args.seed)
    outputs = []
    for split in ("train", "val", "test"):
        path = out / f"{split}.jsonl"
        save_pairs(dataset.pairs(split), path)
        outputs.append(str(path))
    _write_manifest(out, "gen-ged", {
        "graphs": args.graphs, "max_nodes": args.max_nodes, "seed": args.seed,
        "out": str(out)}, outputs)
    print(f"wrote {sum(len(v) for v in dataset.splits.values())} labeled pairs "
          f"over {args.graphs} graphs to {out}")
    return 0


def cmd_gen_motif(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    outputs = []
    for split, count in (("train", args.train), ("val", args.val),
                         ("test", args.test)):
        pairs = gen_motif_pair_dataset(count, int(rng.integers(2 ** 31)))
        path = out / f"{split}.jsonl"
        save_pairs(pairs, path)
        outputs.append(str(path))
    _write_manifest(out, "gen-motif", {
        "train": args.train, "val": args.val, "test": args.test,
        "seed": args.seed, "out": str(out)}, outputs)
    print(f"wrote motif pair dataset to {out}")
    return 0


def _model_config_from_dict(cfg: dict, task: str, mode: str) -> ModelConfig:
    gcn = GcnConfig(in_dim=cfg.get("in_dim", 6),
                    hidden_dim=cfg.get("hidden_dim", 32),
                    num_layers=cfg.get("num_layers", 3))
    return ModelConfig(
        gcn=gcn,
        task="regression" if task == "ged" else "classification",
        num_classes=cfg.get("num_classes", 1),
        interaction_mode=mode,
        pooling_ratio=cfg.get("pooling_ratio", 0.5),
        post_pool_layers=cfg.get("post_pool_layers", 1),
        head_hidden=cfg.get("head_hidden", 64),
        coattention_mlp=cfg.get("coattention_mlp", False),
        symmetric_head=cfg.get("symmetric_head", False),
    )


def cmd_train(args) -> int:
    cfg_path = Path(args.config)
    if not cfg_path.exists():
        print(f"config file not found: {cfg_path}", file=sys.stderr)
        return 1
    with open(cfg_path) as fh:
        cfg = json.load(fh)
    data = cfg.get("data", {})
    for key in ("train", "val", "test"):
        if key not in data:
            raise ValidationError(f"config data section missing {key!r} path")
    train_pairs = load_pairs(data["train"])
    val_pairs = load_pairs(data["val"])
    test_pairs = load_pairs(data["test"])

    model_cfg = _model_config_from_dict(cfg.get("model", {}), args.task,
                                        args.mode)
    tc = cfg.get("train", {})
    train_cfg = TrainConfig(lr=tc.get("lr", 1e-3),
                            epochs=tc.get("epochs", 20),
                            batch_size=tc.get("batch_size", 32),
                            seed=tc.get("seed", args.seed))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log_path = out / "log.jsonl"
    result = train(model_cfg, train_pairs, val_pairs, train_cfg,
                   log_path=log_path)
    ckpt_path = out / "checkpoint.json"
    save_checkpoint(model_cfg, result.params, ckpt_path)
    report = evaluate(test_pairs, result.params, model_cfg)
    report_path = out / "report.json"
    with open(report_path, "w") as fh:
        json.dump({"split": "test", "best_epoch": result.best_epoch,
                   **report.to_json()}, fh, indent=2)
    _write_manifest(out, "train", {
        "task": args.task, "mode": args.mode, "config": str(cfg_path),
        "seed": args.seed, "out": str(out),
        "config_snapshot": cfg,
    }, [str(log_path), str(ckpt_path), str(report_path)])
    print(json.dumps(report.to_json()))
    return 0


def cmd_gradcheck(args) -> int:
    report = full_report(op_seeds=args.op_seeds, model_seeds=args.model_seeds)
    failed = False
    for name in sorted(report):
        err = report[name]
        ok = err < DEFAULT_TOLERANCE
        failed |= not ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: max rel err {err:.3e}")
    return 3 if failed else 0


def cmd_bench(args) -> int:
    nodes = [int(x) for x in args.nodes.split(",")]
    report = run_interaction_benchmark(nodes, dim=args.dim, reps=args.reps,
                                       seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as fh:
        json.dump(report, fh, indent=2)
    for row in report["sizes"]:
        print(f"N={row['nodes']:4d}  node-level {row['t_node_level'] * 1e6:9.1f} us"
              f"  graph-level {row['t_graph_level'] * 1e6:9.1f} us"
              f"  speedup {row['speedup'] * 100:5.1f}%")
    print(f"exponents: node-level {report['exponent_node_level']:.2f}, "
          f"graph-level {report['exponent_graph_level']:.2f}")
    return 0


def cmd_export_attention(args) -> int:
    cfg, params = load_checkpoint(args.checkpoint)
    pairs = load_pairs(args.pairs)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as fh:
        for pair_id, pair in enumerate(pairs):
            _, diag = forward(pair, params, cfg)
            fh.write(json.dumps({
                "pair_id": pair_id,
                "za": list(diag.scores_a) if diag.scores_a is not None else None,
                "zb": list(diag.scores_b) if diag.scores_b is not None else None,
                "idx_a": list(diag.idx_a) if diag.idx_a is not None else None,
                "idx_b": list(diag.idx_b) if diag.idx_b is not None else None,
            }) + "\n")
    print(f"exported scores for {len(pairs)} pairs to {out}")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="cagpool",
                     description="pairwise graph interaction learning toolkit")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen-ged", help="generate an exact-GED pair dataset")
    p.add_argument("--graphs", type=int, required=True)
    p.add_argument("--max-nodes", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen_ged)

    p = sub.add_parser("gen-motif", help="generate the synthetic motif pair task")
    p.add_argument("--train", type=int, default=2000)
    p.add_argument("--val", type=int, default=500)
    p.add_argument("--test", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen_motif)

    p = sub.add_parser("train", help="train a pairwise model")
    p.add_argument("--task", choices=("ddi", "ged"), required=True)
    p.add_argument("--mode", default="cagpool",
                   choices=("cagpool", "siamese-concat", "topkpool",
                            "sagpool", "node-histogram"))
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="run")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("gradcheck", help="finite-difference check of all ops")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--op-seeds", type=int, default=100)
    p.add_argument("--model-seeds", type=int, default=10)
    p.set_defaults(fn=cmd_gradcheck)

    p = sub.add_parser("bench-interaction",
                       help="node-level vs graph-level runtime comparison")
    p.add_argument("--nodes", default="50,100,150,200")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="bench.json")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("export-attention",
                       help="dump per-node scores and selections per pair")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_export_attention)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

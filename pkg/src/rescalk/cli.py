"""Command-line interface: ``rescalk {decompose,select,synth,analyze}``.

Exit codes: 0 success, 2 parse/configuration error, 3 numerical error.
Errors are reported on stderr as one JSON line. ``RESCALK_THREADS`` sets the
number of worker processes used for restarts and replicas.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict
from pathlib import Path

from . import __version__, formats, seeding
from .analysis import group_activity, interaction_summary
from .ensemble import EnsembleConfig, replica_seeds
from .errors import InputError, NumericalError, RescalKError
from .rescal import SolverConfig, best_of, restart_seed
from .selection import SelectionThresholds, k_configs, choose_k, sweep
from .synth import SynthConfig, generate
from .tensor import relative_error

log = logging.getLogger("rescalk")

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _report("usage", message)
        sys.exit(EXIT_INPUT)


def _report(kind, message):
    print(json.dumps({"error": kind, "message": str(message)}), file=sys.stderr)


def _solver_args(p):
    p.add_argument("--tol", type=float, default=1e-8, help="relative convergence threshold")
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--eps", type=float, default=1e-9, help="denominator guard")
    p.add_argument("--seed", type=int, default=0, help="root seed (unsigned 64-bit)")


def build_parser():
    parser = _Parser(prog="rescalk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("decompose", help="best-of-restarts fit at a fixed rank")
    p.add_argument("tensor", help="tensor file")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--restarts", type=int, default=1)
    _solver_args(p)
    p.add_argument("--out", default="decomposition.json", help="output JSON path")

    p = sub.add_parser("select", help="sweep k and choose the latent dimension")
    p.add_argument("tensor", help="tensor file")
    p.add_argument("--kmin", type=int, default=2)
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--replicas", type=int, default=50)
    p.add_argument("--perturb", type=float, default=0.03)
    p.add_argument("--restarts", type=int, default=1, help="restarts per replica")
    _solver_args(p)
    p.add_argument("--min-sil", type=float, default=0.75, help="floor on the minimum cluster silhouette")
    p.add_argument("--mean-sil", type=float, default=0.90, help="floor on the mean silhouette")
    p.add_argument("--max-rel-error", type=float, default=None)
    p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("synth", help="generate a synthetic tensor with known rank")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--ktrue", type=int, required=True)
    p.add_argument("--noise-factor", type=float, default=0.0)
    p.add_argument("--thresh-a", type=float, default=0.0)
    p.add_argument("--thresh-r", type=float, default=0.0)
    p.add_argument("--value-hi", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="tensor file to write; ground truth goes to <out>.truth.json")

    p = sub.add_parser("analyze", help="group activity and interaction summary of a decomposition")
    p.add_argument("decomposition", help="decomposition JSON from 'decompose'")
    p.add_argument("--out", default=".", help="output directory")
    return parser


@contextmanager
def _executor():
    workers = int(os.environ.get("RESCALK_THREADS", "1") or 1)
    if workers <= 1:
        yield None
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield pool


def _solver_config(args):
    return SolverConfig(tol=args.tol, max_iters=args.max_iters, eps=args.eps, seed=args.seed)


def _emit(config):
    print(json.dumps(config, indent=2))


def cmd_decompose(args):
    X, labels = formats.load_tensor(args.tensor)
    scfg = _solver_config(args)
    config = {
        "command": "decompose",
        "tensor": str(args.tensor),
        "k": args.k,
        "restarts": args.restarts,
        "solver": asdict(scfg),
        "restart_seeds": [restart_seed(scfg.seed, i) for i in range(args.restarts)],
        "out": str(args.out),
    }
    _emit(config)
    with _executor() as pool:
        dec = best_of(X, args.k, args.restarts, scfg, executor=pool)
    record = formats.decomposition_record(dec, config, labels)
    formats.write_json(args.out, record)
    log.info("rank %d: rel_error %.6g after %d sweeps (restart %d)",
             args.k, dec.rel_error, dec.iterations, dec.restart)


def cmd_select(args):
    X, _ = formats.load_tensor(args.tensor)
    scfg = _solver_config(args)
    ecfg = EnsembleConfig(
        replicas=args.replicas,
        perturb=args.perturb,
        seed=args.seed,
        restarts_per_replica=args.restarts,
    )
    th = SelectionThresholds(
        min_sil_floor=args.min_sil, mean_sil_floor=args.mean_sil, max_rel_error=args.max_rel_error
    )
    ks = list(range(args.kmin, args.kmax + 1))
    per_k = {}
    for k in ks:
        ecfg_k, scfg_k = k_configs(k, ecfg, scfg)
        pairs = replica_seeds(ecfg_k, scfg_k)
        per_k[str(k)] = {
            "ensemble_seed": ecfg_k.seed,
            "solver_seed": scfg_k.seed,
            "replica_data_seeds": [d for d, _ in pairs],
            "replica_init_seeds": [i for _, i in pairs],
        }
    config = {
        "command": "select",
        "tensor": str(args.tensor),
        "k_range": ks,
        "ensemble": asdict(ecfg),
        "solver": asdict(scfg),
        "thresholds": asdict(th),
        "derived_seeds": per_k,
        "out": str(args.out),
    }
    _emit(config)
    with _executor() as pool:
        curve = sweep(X, ks, ecfg, scfg, executor=pool)
    result = choose_k(curve, th)
    out = Path(args.out)
    formats.atomic_write(out / "curve.csv", formats.curve_csv(curve))
    formats.write_json(out / "selection.json", {
        "chosen_k": result.chosen_k,
        "fallback": result.fallback,
        "curve": [asdict(row) for row in curve.rows],
        "config": config,
    })
    print(json.dumps({"chosen_k": result.chosen_k, "fallback": result.fallback}))


def cmd_synth(args):
    cfg = SynthConfig(
        n=args.n,
        T=args.t,
        k_true=args.ktrue,
        value_hi=args.value_hi,
        thresh_A=args.thresh_a,
        thresh_R=args.thresh_r,
        noise_factor=args.noise_factor,
        seed=args.seed,
    )
    config = {
        "command": "synth",
        "synth": asdict(cfg),
        "factor_seed": seeding.derive_seed(cfg.seed, seeding.SYNTH_FACTORS),
        "noise_seed": seeding.derive_seed(cfg.seed, seeding.SYNTH_NOISE),
        "out": str(args.out),
    }
    _emit(config)
    inst = generate(cfg)
    formats.save_tensor(args.out, inst.X)
    formats.write_json(f"{args.out}.truth.json", {
        "config": config,
        "n": cfg.n,
        "k_true": cfg.k_true,
        "T": cfg.T,
        "A_true": inst.A_true.ravel().tolist(),
        "R_true": inst.R_true.transpose(2, 0, 1).ravel().tolist(),
        "noise_level": inst.noise_level,
        "regen_count": inst.regen_count,
    })


def cmd_analyze(args):
    dec, record = formats.load_decomposition(args.decomposition)
    r, T = dec.R.shape[0], dec.R.shape[2]
    times = (record.get("labels") or {}).get("3") or [None] * T
    times = [name if name is not None else str(t) for t, name in enumerate(times)]
    groups = [f"g{g}" for g in range(r)]
    out = Path(args.out)
    config = {"command": "analyze", "decomposition": str(args.decomposition), "out": str(out),
              "source_config": record.get("config")}
    _emit(config)
    formats.atomic_write(out / "activity.csv",
                         formats.matrix_csv(group_activity(dec.R), groups, times))
    formats.atomic_write(out / "summary.csv",
                         formats.matrix_csv(interaction_summary(dec.R), groups, groups))
    if "labels" in record and "1" in record["labels"]:
        formats.atomic_write(out / "features.csv",
                             formats.matrix_csv(dec.A, record["labels"]["1"], groups, corner="node"))


COMMANDS = {
    "decompose": cmd_decompose,
    "select": cmd_select,
    "synth": cmd_synth,
    "analyze": cmd_analyze,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        COMMANDS[args.command](args)
    except InputError as exc:
        _report(exc.kind, exc)
        return EXIT_INPUT
    except NumericalError as exc:
        _report(exc.kind, exc)
        return EXIT_NUMERICAL
    except RescalKError as exc:
        _report(exc.kind, exc)
        return EXIT_NUMERICAL
    except (OSError, json.JSONDecodeError) as exc:
        _report("io", exc)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

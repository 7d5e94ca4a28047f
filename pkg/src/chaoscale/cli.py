"""Experiment runner.

Subcommands: simulate, skeleton, pvar, tail, rate, slope, verify.  Inputs
are JSON (chaos vectors, paths, configs), outputs are JSON plus CSV tables.
Exit codes: 0 ok, 1 verification failure, 2 malformed input/config, 3
domain violation, 4 numerical failure.  CHAOSCALE_SEED overrides any
configured seed; --threads is validated but never changes results (all
sampling uses per-index substreams).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import verify as verify_mod
from .chaos import ChaosVector, chaos_from_json, chaos_norm_sq, gamma_scale
from .errors import DomainError, EstimationError
from .ldp import (
    EventSpec,
    RateOptions,
    ball_complement,
    exp_equiv_gap,
    ldp_slope,
    rate_of_point,
    rate_of_event,
    sup_exceed,
    terminal_exceed,
)
from .paths import CameronMartinPath, path_from_json, path_to_json
from .roughpath import lift_piecewise_linear, p_var_dist
from .simulate import doob_bound, hyper_tail_bound, mc_sup_values, tail_constant
from .skeleton import eval_skeleton


class ConfigError(Exception):
    """Malformed config or input file (exit 2)."""


def _fail(code: int, message: str) -> int:
    sys.stderr.write(json.dumps({"error": {"code": code, "message": message}}) + "\n")
    return code


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read JSON from {path}: {exc}") from exc


def _load_chaos(path: str) -> ChaosVector:
    obj = _load_json(path)
    try:
        return chaos_from_json(obj)
    except (KeyError, TypeError, DomainError) as exc:
        raise ConfigError(f"bad chaos vector in {path}: {exc}") from exc


def _load_config(path: str | None, allowed: set[str]) -> dict:
    if path is None:
        return {}
    obj = _load_json(path)
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return obj


def _resolve_seed(args, cfg: dict, default: int = 0) -> int:
    env = os.environ.get("CHAOSCALE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"bad CHAOSCALE_SEED: {env!r}") from exc
    if getattr(args, "seed", None) is not None:
        return args.seed
    if "seed" in cfg:
        return int(cfg["seed"])
    return default


def _check_threads(args) -> None:
    threads = getattr(args, "threads", None)
    if threads is not None and threads < 1:
        raise DomainError("--threads must be >= 1")


def _outdir(args) -> Path | None:
    out = getattr(args, "out", None)
    if out is None:
        return None
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _emit_json(obj: dict, out: Path | None, name: str) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    sys.stdout.write(text)
    if out is not None:
        (out / name).write_text(text)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return {"inf": v > 0} if math.isinf(v) else None
    return v


def _event_from_config(obj: dict) -> EventSpec:
    kind = obj.get("kind")
    if kind == "sup_exceed":
        return sup_exceed(float(obj["delta"]))
    if kind == "terminal_exceed":
        return terminal_exceed(float(obj["delta"]))
    if kind == "ball_complement":
        return ball_complement(path_from_json(obj["center"]), float(obj["radius"]))
    raise ConfigError(f"unknown event kind {kind!r}")


def _rate_options(obj: dict, seed: int) -> RateOptions:
    allowed = {
        "m_opt", "lambdas", "fd_step", "max_iter", "starts",
        "start_level", "tol_feas",
    }
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown optimizer keys: {sorted(unknown)}")
    kwargs = dict(obj)
    if "lambdas" in kwargs:
        kwargs["lambdas"] = tuple(float(v) for v in kwargs["lambdas"])
    return RateOptions(seed=seed, **kwargs)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config, {"chaos", "eps", "delta", "samples", "m", "seed"})
    chaos_file = args.chaos or cfg.get("chaos")
    if chaos_file is None:
        raise ConfigError("simulate needs a chaos vector file")
    x = _load_chaos(chaos_file)
    eps = args.eps if args.eps is not None else cfg.get("eps")
    delta = args.delta if args.delta is not None else cfg.get("delta")
    samples = args.samples if args.samples is not None else cfg.get("samples")
    m = args.m if args.m is not None else cfg.get("m", 4096)
    if eps is None or delta is None or samples is None:
        raise ConfigError("simulate needs eps, delta and samples")
    seed = _resolve_seed(args, cfg)

    sups = mc_sup_values(x, float(eps), int(samples), int(m), seed)
    hits = int(np.sum(sups >= float(delta)))
    p_hat = hits / int(samples)
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / int(samples))

    norm = math.sqrt(chaos_norm_sq(x))
    bound_doob = doob_bound(norm, float(eps), float(delta)) if norm > 0 else 0.0
    orders = [k.order for k in x.kernels]
    bound_hyper = None
    if len(orders) == 1:
        n = orders[0]
        scaled_norm = math.sqrt(chaos_norm_sq(gamma_scale(x, float(eps))))
        if scaled_norm > 0:
            bound_hyper = hyper_tail_bound(scaled_norm, n, float(delta))

    out = _outdir(args)
    result = {
        "estimate": p_hat,
        "stderr": stderr,
        "bound_doob": bound_doob,
        "bound_hyper": bound_hyper,
        "samples": int(samples),
        "eps": float(eps),
        "delta": float(delta),
        "m": int(m),
        "seed": seed,
    }
    _emit_json(result, out, "simulate.json")
    if args.paths_csv:
        target = Path(args.paths_csv)
        if out is not None and not target.is_absolute():
            target = out / target
        with open(target, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "sup_abs", "exceeded"])
            for i, s in enumerate(sups):
                writer.writerow([i, repr(float(s)), int(s >= float(delta))])
    return 0


def _cmd_skeleton(args) -> int:
    cfg = _load_config(args.config, {"chaos", "path", "seed"})
    chaos_file = args.chaos or cfg.get("chaos")
    path_file = args.path or cfg.get("path")
    if chaos_file is None or path_file is None:
        raise ConfigError("skeleton needs chaos and path files")
    x = _load_chaos(chaos_file)
    try:
        h = CameronMartinPath(path_from_json(_load_json(path_file)))
    except (KeyError, TypeError, DomainError) as exc:
        raise ConfigError(f"bad path file {path_file}: {exc}") from exc
    res = eval_skeleton(x, h)
    orders = sorted(res.per_order)
    rows = [["t", "F"] + [f"order_{n}" for n in orders]]
    for i, t in enumerate(res.path.times):
        rows.append(
            [repr(float(t)), repr(float(res.path.values[i]))]
            + [repr(float(res.per_order[n].values[i])) for n in orders]
        )
    text = "\n".join(",".join(map(str, r)) for r in rows) + "\n"
    sys.stdout.write(text)
    out = _outdir(args)
    if out is not None:
        (out / "skeleton.csv").write_text(text)
    return 0


def _load_lift(path_file: str):
    obj = _load_json(path_file)
    try:
        if "level1" in obj:
            from .roughpath import rough_from_json

            return rough_from_json(obj)
        values = np.asarray(obj["values"], dtype=float)
        return lift_piecewise_linear(values)
    except (KeyError, TypeError, DomainError) as exc:
        raise ConfigError(f"bad path file {path_file}: {exc}") from exc


def _cmd_pvar(args) -> int:
    a = _load_lift(args.path_a)
    b = _load_lift(args.path_b)
    d = p_var_dist(a, b, args.p)
    sys.stdout.write(repr(float(d)) + "\n")
    out = _outdir(args)
    if out is not None:
        _emit = {"p": args.p, "distance": d}
        (out / "pvar.json").write_text(json.dumps(_emit, sort_keys=True, indent=2) + "\n")
    return 0


def _cmd_tail(args) -> int:
    result = {"alpha": args.alpha, "order": args.order}
    result["c_alpha_n"] = tail_constant(args.alpha, args.order)
    if args.xi_norm is not None and args.delta is not None:
        result["hyper"] = hyper_tail_bound(args.xi_norm, args.order, args.delta, args.alpha)
        if args.eps is not None:
            result["doob"] = doob_bound(args.xi_norm, args.eps, args.delta)
    _emit_json(result, _outdir(args), "tail.json")
    return 0


def _cmd_rate(args) -> int:
    cfg = _load_config(args.config, {"chaos", "target", "event", "optimizer", "seed"})
    if "chaos" not in cfg:
        raise ConfigError("rate config needs a chaos file")
    x = _load_chaos(cfg["chaos"])
    seed = _resolve_seed(args, cfg)
    opts = _rate_options(cfg.get("optimizer", {}), seed)
    if ("target" in cfg) == ("event" in cfg):
        raise ConfigError("rate config needs exactly one of target/event")
    if "target" in cfg:
        w = path_from_json(_load_json(cfg["target"]))
        res = rate_of_point(x, w, opts)
    else:
        res = rate_of_event(x, _event_from_config(cfg["event"]), opts)
    result = {
        "value": None if res.infeasible else res.value,
        "infeasible": res.infeasible,
        "residual": res.residual,
        "converged": res.converged,
        "trace": [[lam, obj] for lam, obj in res.trace],
        "minimizer": path_to_json(res.minimizer.base),
        "seed": seed,
    }
    _emit_json(result, _outdir(args), "rate.json")
    return 0


def _cmd_slope(args) -> int:
    cfg = _load_config(
        args.config,
        {"chaos", "event", "ladder", "samples", "M", "m", "seed", "optimizer",
         "compute_rate", "gap"},
    )
    if "M" in cfg:  # alias for sample count
        cfg.setdefault("samples", cfg.pop("M"))
    for key in ("chaos", "ladder", "samples", "m"):
        if key not in cfg:
            raise ConfigError(f"slope config needs {key!r}")
    x = _load_chaos(cfg["chaos"])
    seed = _resolve_seed(args, cfg)
    ladder = [float(e) for e in cfg["ladder"]]
    M, m = int(cfg["samples"]), int(cfg["m"])
    if "gap" in cfg:
        gap = cfg["gap"]
        res = exp_equiv_gap(x, int(gap["n"]), float(gap["delta"]), ladder, M, m, seed)
    else:
        if "event" not in cfg:
            raise ConfigError("slope config needs an event (or a gap block)")
        ev = _event_from_config(cfg["event"])
        opts = _rate_options(cfg.get("optimizer", {}), seed)
        res = ldp_slope(x, ev, ladder, M, m, seed, opts=opts,
                        compute_rate=bool(cfg.get("compute_rate", True)))
    result = {
        "points": [
            {
                "eps": p.eps,
                "p_hat": p.p_hat,
                "stderr": p.stderr,
                "value": _jsonable(p.value),
                "value_stderr": _jsonable(p.value_stderr),
            }
            for p in res.points
        ],
        "intercept": _jsonable(res.intercept),
        "slope": _jsonable(res.slope),
        "rate_prediction": res.rate_prediction,
        "ceiling": _jsonable(res.ceiling),
        "excluded": res.excluded,
        "seed": seed,
    }
    out = _outdir(args)
    _emit_json(result, out, "slope.json")
    if out is not None:
        with open(out / "ladder.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["eps", "p_hat", "stderr", "eps_log_p"])
            for p in res.points:
                writer.writerow([
                    repr(p.eps), repr(p.p_hat), repr(p.stderr),
                    "" if p.value is None or not math.isfinite(p.value) else repr(p.value),
                ])
    return 0


def _cmd_verify(args) -> int:
    cfg = _load_config(args.config, {"seed"})
    seed = _resolve_seed(args, cfg, default=verify_mod.DEFAULT_SEED)
    report, lines, ok = verify_mod.verify(seed)
    for line in lines:
        sys.stdout.write(line + "\n")
    out = _outdir(args)
    if out is not None:
        (out / "verify.json").write_bytes(verify_mod.canonical_bytes(report))
    if args.write_golden:
        target = Path(args.write_golden)
        target.write_bytes(verify_mod.canonical_bytes(report))
        sys.stdout.write(f"wrote golden transcript to {target}\n")
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def _add_common(sp, config=True):
    sp.add_argument("--seed", type=int, default=None, help="master RNG seed")
    sp.add_argument("--out", type=str, default=None, help="output directory")
    sp.add_argument("--threads", type=int, default=None,
                    help="worker hint; never affects results")
    if config:
        sp.add_argument("--config", type=str, default=None, help="JSON config file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chaoscale", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="Monte-Carlo sup-tail estimate with bounds")
    sp.add_argument("--chaos", type=str, default=None)
    sp.add_argument("--eps", type=float, default=None)
    sp.add_argument("--delta", type=float, default=None)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--paths-csv", type=str, default=None)
    _add_common(sp)
    sp.set_defaults(fn=_cmd_simulate)

    sp = sub.add_parser("skeleton", help="evaluate the deterministic skeleton (CSV)")
    sp.add_argument("--chaos", type=str, default=None)
    sp.add_argument("--path", type=str, default=None)
    _add_common(sp)
    sp.set_defaults(fn=_cmd_skeleton)

    sp = sub.add_parser("pvar", help="two-level p-variation distance of two lifts")
    sp.add_argument("path_a")
    sp.add_argument("path_b")
    sp.add_argument("--p", type=float, default=2.5)
    _add_common(sp)
    sp.set_defaults(fn=_cmd_pvar)

    sp = sub.add_parser("tail", help="explicit tail-bound constants")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--xi-norm", type=float, default=None)
    sp.add_argument("--eps", type=float, default=None)
    sp.add_argument("--delta", type=float, default=None)
    _add_common(sp)
    sp.set_defaults(fn=_cmd_tail)

    sp = sub.add_parser("rate", help="numerical rate of a target path or event")
    _add_common(sp)
    sp.set_defaults(fn=_cmd_rate)

    sp = sub.add_parser("slope", help="empirical eps*log P ladder and extrapolation")
    _add_common(sp)
    sp.set_defaults(fn=_cmd_slope)

    sp = sub.add_parser("verify", help="deterministic invariant suite + golden match")
    sp.add_argument("--write-golden", type=str, default=None,
                    help="(maintainer) write the transcript to this file")
    _add_common(sp)
    sp.set_defaults(fn=_cmd_verify)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _check_threads(args)
        return args.fn(args)
    except ConfigError as exc:
        return _fail(2, str(exc))
    except DomainError as exc:
        return _fail(3, str(exc))
    except (EstimationError, FloatingPointError, ZeroDivisionError, OverflowError) as exc:
        return _fail(4, str(exc))


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: ``generate``, ``simulate``, ``diagnose``, ``fit``.

Every command writes its main artifact to ``--out`` (stdout when omitted)
and prints a JSON object holding a run manifest plus a command summary. The
JSON goes to stdout, or to stderr when the artifact itself went to stdout.

Exit codes: 0 ok, 2 invalid parameters or inputs, 3 I/O failure,
4 bad schedule spec, 5 degenerate trajectory.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import secrets
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import diagnose_trajectory
from .dynamics import AgentProfile, limit_for, simulate
from .exceptions import DegenerateTrajectory, InvalidSchedule, PeerPressureError
from .graph import (
    chain_bridges,
    generate_barabasi_albert,
    generate_clique_clusters,
    generate_erdos_renyi,
    read_edge_list,
    write_edge_list,
)
from .inference import fit_schedule, read_panel
from .io import read_profile_csv, read_states_csv, write_profile_csv, write_states_csv
from .schedules import parse_schedule

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_SCHEDULE, EXIT_DEGENERATE = 0, 2, 3, 4, 5
TRAJECTORY_TOL = 1e-9


class CLIError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# helpers

def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _manifest(args, inputs: dict) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return {
        "command": args.command,
        "params": params,
        "inputs": {name: {"path": str(p), "sha256": _digest(p)} for name, p in inputs.items()},
        "seed": getattr(args, "seed", None),
        "version": __version__,
    }


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise CLIError(f"expected comma-separated numbers, got {text!r}") from None


def _emit(payload: dict, artifact_on_stdout: bool) -> None:
    stream = sys.stderr if artifact_on_stdout else sys.stdout
    stream.write(json.dumps(payload, indent=2, allow_nan=False) + "\n")


def _write_text(out, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _load_profile(path) -> AgentProfile:
    x_plus, s = read_profile_csv(path)
    return AgentProfile(x_plus, s)


def _json_safe(x):
    return None if isinstance(x, float) and not math.isfinite(x) else x


# ---------------------------------------------------------------------------
# commands

def cmd_generate(args) -> int:
    out = getattr(args, "out", None)
    fmt = getattr(args, "format", None) or "csv"
    if getattr(args, "seed", None) is None:
        # record the drawn seed so the manifest can replay this run
        args.seed = secrets.randbits(64)
    if args.kind == "profile":
        return _generate_profile(args, out)
    if args.kind == "ba":
        if args.n is None or args.m is None:
            raise CLIError("generate ba needs --n and --m")
        g = generate_barabasi_albert(args.n, args.m, args.seed)
    elif args.kind == "cliques":
        if not args.sizes:
            raise CLIError("generate cliques needs --sizes")
        sizes = [int(v) for v in _floats(args.sizes)]
        bridges = chain_bridges(sizes, args.bridge_weight) if args.chain else []
        for spec in args.bridge or ():
            i, j, *w = _floats(spec)
            bridges.append((int(i), int(j), w[0] if w else args.bridge_weight))
        g = generate_clique_clusters(sizes, args.intra_w, bridges)
    else:  # er
        if args.n is None or args.p is None:
            raise CLIError("generate er needs --n and --p")
        g = generate_erdos_renyi(args.n, args.p, args.seed, tuple(_floats(args.weights)))
    if fmt == "json":
        _write_text(out, json.dumps({"n": g.n, "edges": [list(e) for e in g.edges]}) + "\n")
    elif out is None:
        sys.stdout.write("i,j,w\n" + "".join(f"{i},{j},{w!r}\n" for i, j, w in g.edges))
    else:
        write_edge_list(g, out)
    _emit({"manifest": _manifest(args, {}), "n": g.n, "edges": g.n_edges,
           "out": out}, out is None)
    return EXIT_OK


def _generate_profile(args, out) -> int:
    rng = np.random.default_rng(args.seed)
    if args.sizes:
        sizes = [int(v) for v in _floats(args.sizes)]
    elif args.n is not None:
        sizes = [args.n]
    else:
        raise CLIError("generate profile needs --n or --sizes")
    ranges = [_floats(r) for r in args.ranges.split(";")] if args.ranges else [[0.0, 1.0]]
    if len(ranges) == 1:
        ranges = ranges * len(sizes)
    if len(ranges) != len(sizes) or any(len(r) != 2 or not 0 <= r[0] <= r[1] <= 1 for r in ranges):
        raise CLIError("--ranges needs one lo,hi pair in [0, 1] per group")
    s_lo, s_hi = _floats(args.s_range)
    x_plus = np.concatenate([rng.uniform(lo, hi, size) for (lo, hi), size in zip(ranges, sizes)])
    s = rng.uniform(s_lo, s_hi, x_plus.size)
    AgentProfile(x_plus, s)  # validate before writing
    if out is None:
        sys.stdout.write("id,x_plus,s\n" + "".join(
            f"{i},{a!r},{b!r}\n" for i, (a, b) in enumerate(zip(x_plus.tolist(), s.tolist()))))
    else:
        write_profile_csv(out, x_plus, s)
    _emit({"manifest": _manifest(args, {}), "n": int(x_plus.size), "out": out}, out is None)
    return EXIT_OK


def cmd_simulate(args) -> int:
    out = getattr(args, "out", None)
    fmt = getattr(args, "format", None) or "csv"
    sch = parse_schedule(args.schedule)
    g = read_edge_list(args.graph)
    p = _load_profile(args.profile)
    x0 = None
    inputs = {"graph": args.graph, "profile": args.profile}
    if args.x0:
        _, rows = read_states_csv(args.x0)
        x0 = rows[0]
        inputs["x0"] = args.x0
    traj = simulate(g, p, sch, x0=x0, k_max=args.k_max, stop_tol=args.stop_tol)
    if fmt == "json":
        _write_text(out, json.dumps({"k": traj.ks.tolist(), "rho": traj.rhos.tolist(),
                                     "states": traj.states.tolist()}) + "\n")
    elif out is None:
        sys.stdout.write("k,agent_id,opinion\n" + "".join(
            f"{k},{i},{v!r}\n" for k, row in zip(traj.ks.tolist(), traj.states.tolist())
            for i, v in enumerate(row)))
    else:
        write_states_csv(out, traj.ks, traj.states)
    lim = limit_for(g, p, sch)
    diff = traj.final - lim.value
    summary = {
        "manifest": _manifest(args, inputs),
        "steps": traj.n_steps,
        "stop_reason": traj.stop_reason,
        "final_state": traj.final.tolist(),
        "limit": {"kind": lim.kind, "value": lim.value.tolist()},
        "distance_to_limit": {"sup": float(np.abs(diff).max()),
                              "l2": float(np.linalg.norm(diff))},
        "out_of_box": traj.out_of_box(),
        "out": out,
    }
    _emit(summary, out is None)
    return EXIT_OK


def _read_trajectory(path):
    if str(path).endswith(".json"):
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        ks, states = np.asarray(data["k"], dtype=int), np.asarray(data["states"], dtype=float)
    else:
        ks, states = read_states_csv(path)
    if not np.array_equal(ks, np.arange(ks.size)):
        raise CLIError("trajectory must contain every step k = 0, 1, ..., K")
    return states


def cmd_diagnose(args) -> int:
    out = getattr(args, "out", None)
    sch = parse_schedule(args.schedule)
    g = read_edge_list(args.graph)
    p = _load_profile(args.profile)
    states = _read_trajectory(args.trajectory)
    if states.shape[1] != g.n or p.n != g.n:
        raise CLIError(f"trajectory has {states.shape[1]} agents, graph {g.n}, profile {p.n}")
    report = diagnose_trajectory(g, p, sch, states)
    if report["residuals"]["gradient"] > TRAJECTORY_TOL:
        raise CLIError("trajectory is not consistent with graph, profile and schedule "
                       f"(update residual {report['residuals']['gradient']:.3g})")
    report["u_total"] = _json_safe(report["u_total"])
    fmt = getattr(args, "format", None) or "json"
    if fmt == "csv":
        _write_text(out, "k,ratio\n" + "".join(
            f"{k},{r!r}\n" for k, r in enumerate(report["ratios"])))
    else:
        _write_text(out, json.dumps(report, indent=2) + "\n")
    inputs = {"trajectory": args.trajectory, "graph": args.graph, "profile": args.profile}
    _emit({"manifest": _manifest(args, inputs), "out": out}, out is None)
    return EXIT_OK


def cmd_fit(args) -> int:
    out = getattr(args, "out", None)
    g = read_edge_list(args.graph)
    p = _load_profile(args.profile)
    panel = read_panel(args.panel)
    init = _floats(args.init) if args.init else None
    res = fit_schedule(g, p, panel, init=init, budget=args.budget, norm=args.norm)
    _write_text(out, json.dumps(res.as_dict(), indent=2) + "\n")
    inputs = {"graph": args.graph, "profile": args.profile, "panel": args.panel}
    _emit({"manifest": _manifest(args, inputs), "initial_loss": res.initial_loss,
           "out": out}, out is None)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _global_flags(default) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=default, help="RNG seed (generate only)")
    common.add_argument("--out", default=default, help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=default)
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="peerpressure", parents=[_global_flags(None)],
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = _global_flags(argparse.SUPPRESS)

    gen = sub.add_parser("generate", parents=[common], help="write a graph or agent profile")
    gen.add_argument("kind", choices=("ba", "cliques", "er", "profile"))
    gen.add_argument("--n", type=int)
    gen.add_argument("--m", type=int)
    gen.add_argument("--p", type=float)
    gen.add_argument("--weights", default="0,2", help="er: weight range lo,hi (lo exclusive)")
    gen.add_argument("--sizes", help="cliques/profile: comma-separated group sizes")
    gen.add_argument("--intra-w", type=float, default=1.0)
    gen.add_argument("--chain", action="store_true", help="bridge consecutive cliques")
    gen.add_argument("--bridge", action="append", help="extra bridge i,j[,w]; repeatable")
    gen.add_argument("--bridge-weight", type=float, default=1.0)
    gen.add_argument("--ranges", help="profile: per-group x_plus ranges 'lo,hi;lo,hi;...'")
    gen.add_argument("--s-range", default="0,1", help="profile: stubbornness range lo,hi")
    gen.set_defaults(func=cmd_generate)

    sim = sub.add_parser("simulate", parents=[common], help="run the dynamics")
    sim.add_argument("--graph", required=True)
    sim.add_argument("--profile", required=True)
    sim.add_argument("--schedule", required=True,
                     help="constant:R | linear:A,B | saturating:R0,RSTAR,RATE | table:V1,V2,...")
    sim.add_argument("--k-max", type=int, default=1000)
    sim.add_argument("--stop-tol", type=float, default=1e-12)
    sim.add_argument("--x0", help="k,agent_id,opinion CSV; first snapshot is the start state")
    sim.set_defaults(func=cmd_simulate)

    dia = sub.add_parser("diagnose", parents=[common], help="diagnostics for a trajectory")
    dia.add_argument("--trajectory", required=True)
    dia.add_argument("--graph", required=True)
    dia.add_argument("--profile", required=True)
    dia.add_argument("--schedule", required=True)
    dia.set_defaults(func=cmd_diagnose)

    fit = sub.add_parser("fit", parents=[common], help="fit per-interval pressures to a panel")
    fit.add_argument("--graph", required=True)
    fit.add_argument("--profile", required=True)
    fit.add_argument("--panel", required=True)
    fit.add_argument("--budget", type=int, default=2000)
    fit.add_argument("--init", help="comma-separated starting pressure per interval")
    fit.add_argument("--norm", choices=("l2", "sup"), default="l2")
    fit.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except InvalidSchedule as exc:
        print(f"error: schedule: {exc}", file=sys.stderr)
        return EXIT_SCHEDULE
    except DegenerateTrajectory as exc:
        print(f"error: degenerate trajectory: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (PeerPressureError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

"""Verification command line.

Every subcommand loads a graph JSON file, runs one family of checks, and
prints a report (table by default, ``--json`` for the canonical document).
Exit codes: 0 all assertions passed, 1 an assertion failed (deviation above
tolerance or an expected violation absent), 2 usage or input error.

Reports are deterministic: the same inputs including ``--seed`` produce
byte-identical JSON.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import acausal, config, game, graphstate, mbqc, procmat, qlin


@dataclass(frozen=True)
class RunConfig:
    command: str
    graph_path: str | None
    pattern_path: str | None
    angles: list[float] | None
    angles_b: list[float] | None
    seed: int
    shots: int
    tol: float
    json_output: bool
    cap: int | None
    backend: str
    family: str


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acausal-mbqc",
        description=(
            "Build and verify acausal graph-computation process matrices. "
            f"The register cap defaults to {config.DEFAULT_QUBIT_CAP} and can be "
            f"overridden by --cap or the {config.CAP_ENV_VAR} env var (flag wins)."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "graph-state": "dump graph-state amplitudes and the stabilizer defect",
        "resource-pm": "build the resource process matrix; report trace and min eigenvalue",
        "verify": "branch independence, normalization, and backend agreement",
        "signal": "total variation between readout marginals for two angle sets",
        "postselect": "postselected sampler versus the exact distribution",
        "game": "causal-game report for a graph instance",
        "pm-validate": "total-probability sweep over sampled instrument families",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--graph", metavar="FILE", required=True, help="graph JSON file")
        p.add_argument("--pattern", metavar="FILE", help="measurement pattern JSON file")
        p.add_argument(
            "--angles",
            metavar="CSV",
            help="comma-separated radians for the computation vertices in order; "
            "one value broadcasts (default 0)",
        )
        p.add_argument(
            "--angles-b",
            metavar="CSV",
            help="second angle set (signal/verify); default adds pi at the first vertex",
        )
        p.add_argument("--seed", metavar="N", type=int, default=config.DEFAULT_SEED)
        p.add_argument("--shots", metavar="N", type=int, default=0)
        p.add_argument("--tol", metavar="R", type=float, default=1e-9)
        p.add_argument("--json", action="store_true", help="emit the JSON document")
        p.add_argument("--cap", metavar="N", type=int, help="dense register-size cap")
        p.add_argument(
            "--backend", choices=["auto", "dense", "factorized"], default="auto"
        )
        if name == "pm-validate":
            p.add_argument(
                "--family",
                choices=["mbqc", "rank1"],
                default="mbqc",
                help="mbqc asserts normalization; rank1 is exploratory (report only)",
            )
    return parser


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    return RunConfig(
        command=ns.command,
        graph_path=ns.graph,
        pattern_path=ns.pattern,
        angles=_parse_csv(ns.angles),
        angles_b=_parse_csv(ns.angles_b),
        seed=ns.seed,
        shots=ns.shots,
        tol=ns.tol,
        json_output=ns.json,
        cap=ns.cap,
        backend=ns.backend,
        family=getattr(ns, "family", "mbqc"),
    )


def _parse_csv(text: str | None) -> list[float] | None:
    if text is None:
        return None
    try:
        values = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise ValueError(f"bad angle list {text!r}: {exc}") from exc
    if not values:
        raise ValueError(f"bad angle list {text!r}: no values")
    return values


def _angles_arg(values: list[float] | None, g) -> dict[str, float]:
    if values is None:
        return mbqc.as_angle_map(g, 0.0)
    if len(values) == 1:
        return mbqc.as_angle_map(g, values[0])
    return mbqc.as_angle_map(g, values)


def _second_angles(cfg: RunConfig, g, ang: dict[str, float]) -> dict[str, float]:
    if cfg.angles_b is not None:
        return _angles_arg(cfg.angles_b, g)
    first = g.computation[0]
    out = dict(ang)
    out[first] = ang[first] + math.pi
    return out


def _finite(value):
    """Floats must be finite in reports; None passes through."""
    if value is None:
        return None
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {value!r} in report")
    return value


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _finite(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise ValueError(f"cannot serialize {type(obj).__name__} in report")


def _emit(report: dict, as_json: bool) -> None:
    report = _sanitize(report)
    if as_json:
        sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    else:
        for line in _table_lines(report, ""):
            sys.stdout.write(line + "\n")


def _table_lines(obj, prefix: str) -> list[str]:
    lines = []
    for key in sorted(obj):
        value = obj[key]
        label = f"{prefix}{key}"
        if isinstance(value, dict):
            lines.extend(_table_lines(value, label + "."))
        elif isinstance(value, list):
            lines.append(f"{label} = {json.dumps(value)}")
        else:
            lines.append(f"{label} = {'null' if value is None else value}")
    return lines


# ---------------------------------------------------------------------------
# subcommands

def _cmd_graph_state(cfg: RunConfig) -> int:
    g = graphstate.load_graph(cfg.graph_path)
    state = graphstate.graph_state(g, cfg.cap)
    defect = graphstate.stabilizer_check(state, g)
    report = {
        "vertices": list(graphstate.ket_order(g)),
        "amplitudes": [[float(a.real), float(a.imag)] for a in state.amplitudes],
        "stabilizer_max_deviation": defect,
    }
    _emit(report, cfg.json_output)
    return 0 if defect <= cfg.tol else 1


def _cmd_resource_pm(cfg: RunConfig) -> int:
    g = graphstate.load_graph(cfg.graph_path)
    r = acausal.build_resource_pm(g, cfg.cap)
    expected = float(2 ** (g.n_computation + g.n_output))
    report = {
        "trace": r.trace(),
        "min_eigenvalue": r.min_eigenvalue(),
        "num_qubits": r.w.num_qubits,
        "layout": r.layout(),
    }
    _emit(report, cfg.json_output)
    ok = report["min_eigenvalue"] >= -cfg.tol and abs(report["trace"] - expected) <= cfg.tol
    return 0 if ok else 1


def _cmd_verify(cfg: RunConfig) -> int:
    g = graphstate.load_graph(cfg.graph_path)
    r = acausal.build_resource_pm(g, cfg.cap)
    ang = _angles_arg(cfg.angles, g)
    report = {
        "branch_independence_max_dev": acausal.branch_independence_report(
            r, ang, backend=cfg.backend
        ),
        "normalization_dev": acausal.normalization_report(r, ang, backend=cfg.backend),
        "min_eigenvalue": r.min_eigenvalue(),
        "trace": r.trace(),
    }
    try:
        agreement = acausal.backend_agreement(r, ang)
    except config.RegisterCapError:
        agreement = None  # dense side too large; factorized-only verification
    report["backend_agreement_max_dev"] = agreement
    if cfg.shots > 0:
        ang_b = _second_angles(cfg, g, ang)
        report["signaling_tv"] = acausal.signaling_tv(r, ang, ang_b, backend=cfg.backend)
        report["postselect"] = acausal.postselection_report(
            g, ang, cfg.shots, cfg.seed, backend=cfg.backend
        )
    _emit(report, cfg.json_output)
    expected = float(2 ** (g.n_computation + g.n_output))
    ok = (
        report["branch_independence_max_dev"] <= cfg.tol
        and report["normalization_dev"] <= cfg.tol
        and (agreement is None or agreement <= cfg.tol)
        and report["min_eigenvalue"] >= -cfg.tol
        and abs(report["trace"] - expected) <= cfg.tol
    )
    return 0 if ok else 1


def _cmd_signal(cfg: RunConfig) -> int:
    g = graphstate.load_graph(cfg.graph_path)
    r = acausal.build_resource_pm(g, cfg.cap)
    ang = _angles_arg(cfg.angles, g)
    ang_b = _second_angles(cfg, g, ang)
    report = {"signaling_tv": acausal.signaling_tv(r, ang, ang_b, backend=cfg.backend)}
    _emit(report, cfg.json_output)
    return 0


# postselect acceptance must sit within this many binomial sigmas of 2^-(N+n)
ACCEPTANCE_SIGMAS = 5.0
POSTSELECT_TV_LIMIT = 0.02
POSTSELECT_DEFAULT_SHOTS = 100_000


def _cmd_postselect(cfg: RunConfig) -> int:
    g = graphstate.load_graph(cfg.graph_path)
    ang = _angles_arg(cfg.angles, g)
    shots = cfg.shots if cfg.shots > 0 else POSTSELECT_DEFAULT_SHOTS
    block = acausal.postselection_report(g, ang, shots, cfg.seed, backend=cfg.backend)
    _emit({"postselect": block}, cfg.json_output)
    p = block["expected"]
    sigma = math.sqrt(p * (1.0 - p) / shots)
    ok = (
        abs(block["acceptance"] - p) <= ACCEPTANCE_SIGMAS * sigma
        and block["tv"] is not None
        and block["tv"] <= POSTSELECT_TV_LIMIT
    )
    return 0 if ok else 1


def _cmd_game(cfg: RunConfig) -> int:
    g = graphstate.load_graph(cfg.graph_path)
    ang = _angles_arg(cfg.angles, g)
    pattern = mbqc.load_pattern(cfg.pattern_path) if cfg.pattern_path else None
    inst = game.game_instance(g, ang, pattern)
    report = game.game_report(inst, backend=cfg.backend)
    _emit(report, cfg.json_output)
    return 0 if report["violated"] else 1


PM_VALIDATE_DEFAULT_TRIALS = 200


def _cmd_pm_validate(cfg: RunConfig) -> int:
    g = graphstate.load_graph(cfg.graph_path)
    r = acausal.build_resource_pm(g, cfg.cap)
    trials = cfg.shots if cfg.shots > 0 else PM_VALIDATE_DEFAULT_TRIALS
    if cfg.family == "mbqc":
        family = procmat.mbqc_instrument_family(r.alice_parties, r.bob_parties)
    else:
        family = procmat.rank_one_instrument_family(r.alice_parties + r.bob_parties)
    rng = np.random.default_rng(cfg.seed)
    rep = procmat.pm_validate(r.w, family, trials, cfg.tol, rng, backend=cfg.backend)
    report = {
        "family": cfg.family,
        "min_eigenvalue": rep.min_eigenvalue,
        "max_deviation": rep.max_deviation,
        "worst_assignment": rep.worst_assignment,
        "trials": rep.trials,
        "tolerance": rep.tolerance,
        "passed": rep.passed,
    }
    _emit(report, cfg.json_output)
    if cfg.family == "rank1":
        return 0  # exploratory family: violations are report content
    return 0 if rep.passed else 1


_COMMANDS = {
    "graph-state": _cmd_graph_state,
    "resource-pm": _cmd_resource_pm,
    "verify": _cmd_verify,
    "signal": _cmd_signal,
    "postselect": _cmd_postselect,
    "game": _cmd_game,
    "pm-validate": _cmd_pm_validate,
}

_INPUT_ERRORS = (
    graphstate.GraphError,
    mbqc.PatternError,
    procmat.ProcmatError,
    game.GameError,
    qlin.QlinError,
    config.RegisterCapError,
    ValueError,
    OSError,
)


def run(cfg: RunConfig) -> int:
    return _COMMANDS[cfg.command](cfg)


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        return run(cfg)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    except _INPUT_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""``povmcert`` command line.

Every subcommand prints one JSON document (floats at 9 significant digits)
and optionally writes it to ``--out``. Settings come from built-in
defaults, then an optional ``--config`` JSON file, then explicit flags.
Exit status: 0 success, 2 usage or input error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import expsim, npa, sagnac, sdp, seesaw
from .scenarios import (
    I_BINARY_BOUND,
    I_QUANTUM_MAX,
    BellFunctional,
    behavior_from_strategy,
    classical_bound,
    evaluate,
    evaluate_with_sigma,
    functional_catalog,
    ideal_strategy,
    restrict_outcome,
    restrictions,
    trine,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3
COMMANDS = ("bounds", "seesaw", "npa", "sagnac", "simulate", "certify", "report")
SIG_DIGITS = 9
CHSH_SEED_OFFSET = 1
RESTRICTED_KEYS = {2: "binary_quantum", 3: "three_outcome_quantum"}
THREADS_ENV = "POVMCERT_THREADS"


class UsageError(Exception):
    pass


class NumericalError(Exception):
    pass


def default_threads() -> int:
    """Worker count from the environment; 1 when unset."""
    text = os.environ.get(THREADS_ENV, "").strip()
    if not text:
        return 1
    try:
        n = int(text)
    except ValueError:
        n = 0
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {text!r}")
    return n


@dataclass
class RunConfig:
    """All tunables of every subcommand; a subcommand ignores what it does not use."""

    command: str = ""
    functional: str = "I"
    level: Any = 2
    restrict: str | None = None  # "SETTING:DROPPED[,DROPPED...]" on Alice's side
    restarts: int = 50
    max_iters: int = 500
    tol: float = 1e-10
    local_dims: tuple[int, int] = (2, 2)
    seed: int = 0
    threads: int | None = None  # None: take the environment default
    strategy: str = "I_optimal"
    pairs: float = 1e6
    visibility: float = 1.0
    efficiency: float = 1.0
    accidental_prob: float = 0.0
    basis_visibility: tuple[float, float] | None = None
    gamma_r: float = 0.0
    gamma_t: float = 117.37
    gamma_o: float = 112.5
    fit: bool = False
    value: float | None = None
    sigma: float | None = None
    chsh_epsilon: float | None = None
    chsh_sigma: float | None = None
    chsh_settings: tuple[int, int, int, int] = (0, 1, 0, 1)
    threshold: float = 3.0
    counts: str | None = None
    chsh_counts: str | None = None
    bounds_file: str | None = None
    certify_file: str | None = None
    out: str | None = None
    counts_out: str | None = None
    levels_csv: str | None = None
    terms_csv: str | None = None

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise UsageError(f"unknown configuration keys: {', '.join(unknown)}")
        cfg = cls(**data)
        cfg.level = parse_level(cfg.level)
        for name in ("local_dims", "basis_visibility", "chsh_settings"):
            v = getattr(cfg, name)
            if v is not None:
                setattr(cfg, name, tuple(v))
        return cfg


def parse_level(level) -> Any:
    if level in (1, 2, 3, "1+AB"):
        return level
    if isinstance(level, str) and level.strip() in ("1", "2", "3"):
        return int(level)
    if isinstance(level, str) and level.strip().upper() == "1+AB":
        return "1+AB"
    raise UsageError(f"unsupported level {level!r}; use 1, 2, 3 or 1+AB")


def round_floats(obj):
    """Round every float to the report precision; non-finite floats become strings."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [round_floats(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def nonfinite_path(obj, path: str = "") -> str | None:
    """Location of the first NaN or infinity inside a report, if any."""
    if isinstance(obj, (float, np.floating)):
        return None if math.isfinite(obj) else path or "."
    if isinstance(obj, dict):
        items = obj.items()
    elif isinstance(obj, (list, tuple)):
        items = enumerate(obj)
    else:
        return None
    for k, v in items:
        hit = nonfinite_path(v, f"{path}/{k}")
        if hit:
            return hit
    return None


def dumps(doc: dict) -> str:
    return json.dumps(round_floats(doc), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# shared helpers


def _functional(cfg: RunConfig) -> BellFunctional:
    """Catalog name, or a path to a functional serialized as JSON."""
    try:
        if cfg.functional.endswith(".json"):
            f = BellFunctional.from_dict(_read_json(cfg.functional, "functional"))
        else:
            f = functional_catalog(cfg.functional)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    if cfg.restrict:
        try:
            setting_text, dropped_text = cfg.restrict.split(":")
            setting = int(setting_text)
            dropped = sorted((int(d) for d in dropped_text.split(",")), reverse=True)
        except ValueError as exc:
            raise UsageError(f"bad --restrict {cfg.restrict!r}; expected SETTING:OUTCOME[,OUTCOME]") from exc
        try:
            for d in dropped:
                f = restrict_outcome(f, "A", setting, d)
        except (IndexError, ValueError) as exc:
            raise UsageError(str(exc)) from exc
    return f


def _seesaw_config(cfg: RunConfig) -> seesaw.SeesawConfig:
    try:
        threads = cfg.threads if cfg.threads is not None else default_threads()
        return seesaw.SeesawConfig(tuple(cfg.local_dims), cfg.restarts, cfg.max_iters, cfg.tol, cfg.seed, threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _npa(f: BellFunctional, level) -> npa.NpaResult:
    try:
        res = npa.solve_relaxation(f, level)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not res.accepted:
        raise NumericalError(f"level-{level} relaxation ended with status {res.status}")
    return res


def _npa_dict(res: npa.NpaResult) -> dict:
    d = res.to_dict()
    d.pop("seconds", None)  # keeps reports reproducible byte for byte
    return d


def _noise(cfg: RunConfig) -> expsim.NoiseModel:
    try:
        return expsim.NoiseModel(cfg.visibility, cfg.efficiency, cfg.accidental_prob, cfg.basis_visibility)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _strategy(name: str):
    try:
        return ideal_strategy(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _read_counts(path: str) -> expsim.CountsRecord:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"counts file {path} not found")
    text = p.read_text()
    try:
        if p.suffix.lower() == ".json":
            return expsim.CountsRecord.from_dict(json.loads(text))
        return expsim.CountsRecord.from_csv(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"malformed counts in {path}: {exc}") from exc


def _read_json(path: str | None, what: str) -> dict:
    if not path:
        raise UsageError(f"missing {what} input")
    p = Path(path)
    if not p.exists():
        raise UsageError(f"{what} file {path} not found")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} file {path} is not JSON: {exc}") from exc


def _estimate(record: expsim.CountsRecord):
    try:
        p = expsim.estimate_behavior(record)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if p.degenerate:
        raise UsageError(f"degenerate settings (all counts in one outcome): {list(p.degenerate)}")
    return p


# ---------------------------------------------------------------------------
# subcommands


def cmd_bounds(cfg: RunConfig) -> dict:
    f = _functional(cfg)
    ss = seesaw.run(f, _seesaw_config(cfg))
    up = _npa(f, cfg.level)
    cl = classical_bound(f)
    doc: dict = {
        "command": "bounds",
        "functional": f.name or cfg.functional,
        "level": cfg.level,
        "classical_bound": cl,
        "seesaw_lower_bound": ss.best_value,
        "npa_upper_bound": up.bound,
        "npa": _npa_dict(up),
        "sandwich_ok": ss.best_value <= up.bound + 1e-5,
        "known": dict(f.known_bounds),
    }
    checks = {}
    if "classical" in f.known_bounds:
        checks["classical"] = cl - f.known_bounds["classical"]
    if "quantum_max" in f.known_bounds:
        checks["quantum_npa"] = up.bound - f.known_bounds["quantum_max"]
        checks["quantum_seesaw"] = ss.best_value - f.known_bounds["quantum_max"]
    restricted = []
    multi = [x for x, n in enumerate(f.scenario.alice_outcomes) if n > 2]
    if not cfg.restrict and multi:
        x = multi[-1]
        for keep in range(2, f.scenario.alice_outcomes[x]):
            values = [(dropped, _npa(g, cfg.level).bound) for dropped, g in restrictions(f, "A", x, keep)]
            restricted.append(
                {
                    "setting": x,
                    "kept_outcomes": keep,
                    "bounds": [{"dropped": list(d), "bound": v} for d, v in values],
                    "max_bound": max(v for _, v in values),
                }
            )
        doc["restricted"] = restricted
        for entry in restricted:
            key = RESTRICTED_KEYS.get(entry["kept_outcomes"])
            if key in f.known_bounds:
                checks[key + "_npa"] = entry["max_bound"] - f.known_bounds[key]
    doc["deltas"] = checks
    return doc


def cmd_seesaw(cfg: RunConfig) -> dict:
    f = _functional(cfg)
    try:
        res = seesaw.run(f, _seesaw_config(cfg))
    except sdp.SdpFailure as exc:
        raise NumericalError(str(exc)) from exc
    return {"command": "seesaw", "functional": f.name or cfg.functional, **res.to_dict()}


def cmd_npa(cfg: RunConfig) -> dict:
    f = _functional(cfg)
    res = _npa(f, cfg.level)
    return {"command": "npa", "functional": f.name or cfg.functional, "restrict": cfg.restrict, **_npa_dict(res)}


def cmd_sagnac(cfg: RunConfig) -> dict:
    sc = sagnac.SagnacConfig(cfg.gamma_r, cfg.gamma_t, cfg.gamma_o)
    target = trine()
    fit = sagnac.fit_transmitted_angle(target, sc) if cfg.fit else None
    doc = {"command": "sagnac", **sagnac.report(sc, target, fit)}
    if fit is not None and not fit.reachable:
        doc["warning"] = "target not reachable with this interferometer"
    return doc


def cmd_simulate(cfg: RunConfig) -> dict:
    s = _strategy(cfg.strategy)
    try:
        rec = expsim.simulate_counts(s, _noise(cfg), cfg.pairs, cfg.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if cfg.counts_out:
        Path(cfg.counts_out).write_text(rec.to_csv())
    return {"command": "simulate", "strategy": cfg.strategy, **rec.to_dict()}


def _term_rows(f: BellFunctional, p, ideal) -> list[dict]:
    rows = []
    for a, b, x, y, c in f.terms:
        dp = float(p.table[a, b, x, y] - ideal.table[a, b, x, y])
        rows.append({"a": a, "b": b, "x": x, "y": y, "coefficient": c,
                     "measured": float(p.table[a, b, x, y]), "ideal": float(ideal.table[a, b, x, y]),
                     "delta": dp, "weighted_delta": c * dp})
    return rows


def cmd_certify(cfg: RunConfig) -> dict:
    f = functional_catalog("I")
    terms = None
    source = "summary"
    if cfg.value is not None or cfg.sigma is not None:
        if None in (cfg.value, cfg.sigma, cfg.chsh_epsilon, cfg.chsh_sigma):
            raise UsageError("summary input needs --value, --sigma, --chsh-epsilon and --chsh-sigma")
        value, sigma = cfg.value, cfg.sigma
        eps, eps_sigma = cfg.chsh_epsilon, cfg.chsh_sigma
    else:
        if cfg.counts:
            source = "counts"
            rec = _read_counts(cfg.counts)
            if not cfg.chsh_counts:
                raise UsageError("counts input needs --chsh-counts as well")
            chsh_rec = _read_counts(cfg.chsh_counts)
        else:
            source = "simulation"
            noise = _noise(cfg)
            try:
                rec = expsim.simulate_counts(_strategy("I_optimal"), noise, cfg.pairs, cfg.seed)
                chsh_rec = expsim.simulate_counts(_strategy("chsh_optimal"), noise, cfg.pairs, cfg.seed + CHSH_SEED_OFFSET)
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
        if rec.scenario != f.scenario:
            raise UsageError("counts do not match the scenario of I")
        p = _estimate(rec)
        value, sigma = evaluate_with_sigma(f, p)
        try:
            ch = expsim.chsh_violation(_estimate(chsh_rec), tuple(cfg.chsh_settings))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        eps, eps_sigma = ch.epsilon, ch.sigma
        ideal = _ideal_behavior()
        terms = _term_rows(f, p, ideal)
    if not sigma > 0 or eps_sigma is None or eps_sigma < 0:
        raise UsageError("uncertainties must be positive")
    eps_used = max(eps, 0.0) + 3 * eps_sigma
    fid = expsim.fidelity_lower_bound(eps_used)
    mixed = expsim.mixed_binary_bound(fid)
    vs_binary = expsim.significance(value, sigma, I_BINARY_BOUND)
    vs_mixed = expsim.significance(value, sigma, mixed)
    certified = vs_binary.z >= cfg.threshold and vs_mixed.z >= cfg.threshold
    doc = {
        "command": "certify",
        "source": source,
        "value": value,
        "sigma": sigma,
        "significance_vs_binary": vs_binary.to_dict(),
        "chsh_epsilon": eps,
        "chsh_sigma": eps_sigma,
        "epsilon_used": eps_used,
        "fidelity_lower_bound": fid,
        "mixed_binary_bound": mixed,
        "significance_vs_mixed": vs_mixed.to_dict(),
        "threshold": cfg.threshold,
        "verdict": "CERTIFIED" if certified else "NOT CERTIFIED",
    }
    if source == "simulation":
        doc["simulation"] = {"pairs": cfg.pairs, "seed": cfg.seed, "visibility": cfg.visibility,
                             "efficiency": cfg.efficiency, "accidental_prob": cfg.accidental_prob}
    if terms is not None:
        doc["terms"] = terms
        doc["ideal_value"] = I_QUANTUM_MAX
    return doc


def _ideal_behavior():
    return behavior_from_strategy(ideal_strategy("I_optimal"))


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([f"{v:.{SIG_DIGITS}g}" if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def cmd_report(cfg: RunConfig) -> dict:
    cert = _read_json(cfg.certify_file, "certify")
    bounds = _read_json(cfg.bounds_file, "bounds") if cfg.bounds_file else {}
    if cert.get("command") != "certify" or "value" not in cert:
        raise UsageError("certify input is not a certify report")
    uniform = evaluate(functional_catalog("I"), functional_catalog("I").scenario.uniform())
    classical = bounds.get("classical_bound", 1.0)
    binary = I_BINARY_BOUND
    quantum = bounds.get("npa_upper_bound", I_QUANTUM_MAX)
    levels = [
        ("uniform_noise", uniform, ""),
        ("local_bound", classical, ""),
        ("binary_quantum_bound", binary, ""),
        ("quantum_maximum", quantum, ""),
        ("measured", cert["value"], cert["sigma"]),
    ]
    levels_csv = _csv_text(["label", "value", "sigma"], [(a, float(b), float(c) if c != "" else "") for a, b, c in levels])
    terms = cert.get("terms", [])
    term_rows = [(t["a"], t["b"], t["x"], t["y"], float(t["coefficient"]), float(t["measured"]), float(t["ideal"]),
                  float(t["delta"]), float(t["weighted_delta"])) for t in terms]
    terms_csv = _csv_text(["a", "b", "x", "y", "coefficient", "measured", "ideal", "delta", "weighted_delta"], term_rows)
    if cfg.levels_csv:
        Path(cfg.levels_csv).write_text(levels_csv)
    if cfg.terms_csv:
        Path(cfg.terms_csv).write_text(terms_csv)
    return {
        "command": "report",
        "levels": [{"label": a, "value": b, "sigma": c if c != "" else None} for a, b, c in levels],
        "terms": terms,
        "weighted_delta_sum": float(sum(t["weighted_delta"] for t in terms)) if terms else None,
    }


HANDLERS = {
    "bounds": cmd_bounds,
    "seesaw": cmd_seesaw,
    "npa": cmd_npa,
    "sagnac": cmd_sagnac,
    "simulate": cmd_simulate,
    "certify": cmd_certify,
    "report": cmd_report,
}


# ---------------------------------------------------------------------------
# argument parsing


def _pair(kind):
    def parse(text: str):
        parts = text.split(",")
        return tuple(kind(p) for p in parts)

    return parse


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=S, help="JSON file with RunConfig keys")
    common.add_argument("--out", default=S, help="also write the JSON report here")
    common.add_argument("--seed", type=int, default=S)

    parser = argparse.ArgumentParser(prog="povmcert", description="Bell-test certification of nonprojective measurements")
    sub = parser.add_subparsers(dest="command", required=True)

    def functional_args(p):
        p.add_argument("--functional", default=S, help="catalog name or path to a functional JSON file")
        p.add_argument("--restrict", default=S, help="drop Alice outcomes, e.g. 3:0 or 3:0,1")

    def seesaw_args(p):
        p.add_argument("--restarts", type=int, default=S)
        p.add_argument("--max-iters", dest="max_iters", type=int, default=S)
        p.add_argument("--tol", type=float, default=S)
        p.add_argument("--local-dims", dest="local_dims", type=_pair(int), default=S, help="e.g. 2,2")
        p.add_argument("--threads", type=int, default=S, help=f"restart workers (default ${THREADS_ENV} or 1)")

    def noise_args(p):
        p.add_argument("--pairs", type=float, default=S, help="expected pairs per setting")
        p.add_argument("--visibility", type=float, default=S)
        p.add_argument("--efficiency", type=float, default=S)
        p.add_argument("--accidental-prob", dest="accidental_prob", type=float, default=S)
        p.add_argument("--basis-visibility", dest="basis_visibility", type=_pair(float), default=S, help="v_zz,v_xx")

    p = sub.add_parser("bounds", parents=[common], help="classical, see-saw and NPA bounds")
    functional_args(p)
    seesaw_args(p)
    p.add_argument("--level", default=S)

    p = sub.add_parser("seesaw", parents=[common], help="see-saw lower bound")
    functional_args(p)
    seesaw_args(p)

    p = sub.add_parser("npa", parents=[common], help="NPA upper bound")
    functional_args(p)
    p.add_argument("--level", default=S)

    p = sub.add_parser("sagnac", parents=[common], help="interferometer POVM and angle fit")
    p.add_argument("--gamma-r", dest="gamma_r", type=float, default=S)
    p.add_argument("--gamma-t", dest="gamma_t", type=float, default=S)
    p.add_argument("--gamma-o", dest="gamma_o", type=float, default=S)
    p.add_argument("--fit", action="store_true", default=S)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo coincidence counts")
    p.add_argument("--strategy", default=S)
    noise_args(p)
    p.add_argument("--counts-out", dest="counts_out", default=S, help="CSV path for the counts")

    p = sub.add_parser("certify", parents=[common], help="end-to-end certification report")
    noise_args(p)
    p.add_argument("--counts", default=S, help="counts of the I experiment (CSV or JSON)")
    p.add_argument("--chsh-counts", dest="chsh_counts", default=S, help="counts of the CHSH experiment")
    p.add_argument("--chsh-settings", dest="chsh_settings", type=_pair(int), default=S, help="x0,x1,y0,y1")
    p.add_argument("--value", type=float, default=S)
    p.add_argument("--sigma", type=float, default=S)
    p.add_argument("--chsh-epsilon", dest="chsh_epsilon", type=float, default=S)
    p.add_argument("--chsh-sigma", dest="chsh_sigma", type=float, default=S)
    p.add_argument("--threshold", type=float, default=S, help="minimum z-score (default 3)")

    p = sub.add_parser("report", parents=[common], help="plot data from bounds and certify outputs")
    p.add_argument("--bounds", dest="bounds_file", default=S)
    p.add_argument("--certify", dest="certify_file", default=S)
    p.add_argument("--levels-csv", dest="levels_csv", default=S)
    p.add_argument("--terms-csv", dest="terms_csv", default=S)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    flags = vars(args).copy()
    data: dict = {}
    path = flags.pop("config", None)
    if path:
        p = Path(path)
        if not p.exists():
            raise UsageError(f"config file {path} not found")
        try:
            data = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {path} is not JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
    data.update(flags)
    return RunConfig.from_mapping(data)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = resolve_config(args)
        doc = HANDLERS[cfg.command](cfg)
        bad = nonfinite_path(doc)
        if bad:
            raise NumericalError(f"non-finite value at {bad}")
    except UsageError as exc:
        print(f"povmcert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, sdp.SdpFailure, npa.NpaFailure, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"povmcert: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    text = dumps(doc)
    sys.stdout.write(text)
    if cfg.out:
        Path(cfg.out).write_text(text)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())

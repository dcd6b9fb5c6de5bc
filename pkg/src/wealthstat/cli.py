"""Command-line entry point: ``wealthstat <command> [options]``.

Every command writes one table (CSV with ``#`` metadata lines, or JSON
``{"meta": ..., "data": ...}``).  Options can also come from ``--config``:
either a ``key = value`` text file or a JSON file this tool wrote earlier.
Explicit flags win over the config file.

Exit codes: 0 ok, 2 configuration error, 3 numeric non-convergence, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import bitcoin, convolve, core, inequality, mc
from .solver import NonConvergenceError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
COMMANDS = ("dist", "gini", "lorenz", "entropy", "convolve", "banks", "bitcoin", "simulate", "verify")
_COMMON = {"output", "format", "config", "seed", "command"}


class ConfigError(ValueError):
    pass


class Table:
    def __init__(self, columns, rows, summary=None):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.summary = dict(summary or {})


def _floats(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, list):
        return [float(t) for t in text]
    return [float(t) for t in str(text).split(",") if t.strip()]


def _cutoff(text) -> float:
    if text is None or str(text).lower() in ("inf", "infinity", "none"):
        return core.INF
    return int(text)


def _need(params: dict, *keys: str) -> None:
    for key in keys:
        if params.get(key) is None:
            raise ConfigError(f"missing required parameter '{key}'")


def _num(params: dict, key: str, kind=float):
    _need(params, key)
    try:
        return kind(params[key])
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for '{key}': {params[key]!r}") from None


def _pmf_rows(pmf: core.Pmf) -> list[list]:
    return [[k, float(p)] for k, p in enumerate(pmf.probs)]


# -- commands ---------------------------------------------------------------


def cmd_dist(p: dict) -> Table:
    tol = _num(p, "tail_tol")
    if p.get("tail_above_mean"):
        lo, hi, n = _num(p, "m_min"), _num(p, "m_max"), _num(p, "points", int)
        grid = np.geomspace(lo, hi, n)
        rows = [
            [m, inequality.tail_mass_above_mean("poisson", m), inequality.tail_mass_above_mean("bosonic", m)]
            for m in grid
        ]
        return Table(["m", "poisson", "bosonic"], rows, {"poisson_limit": 0.5, "bosonic_limit": math.exp(-1)})
    kind = p.get("kind")
    if kind in ("poisson", "bosonic", "fermionic"):
        pmf = core.atomic_pmf(kind, _num(p, "m"), tol)
    elif kind == "truncated-poisson":
        pmf = core.truncated_poisson(_num(p, "beta"), _cutoff(p.get("cutoff")), tol)
    elif kind == "truncated-geometric":
        pmf = core.truncated_geometric(_num(p, "beta"), _cutoff(p.get("cutoff")), tol)
    else:
        raise ConfigError(f"invalid value for 'kind': {kind!r}")
    return Table(["k", "p"], _pmf_rows(pmf), {"mean": pmf.mean, "variance": pmf.variance,
                                              "truncation_mass": pmf.truncation_mass})


def cmd_gini(p: dict) -> Table:
    kind = p.get("kind")
    funcs = {
        "poisson": inequality.gini_poisson,
        "bosonic": inequality.gini_bosonic,
        "fermionic": inequality.gini_fermionic,
        "bosonic-lorenz": inequality.gini_bosonic_lorenz,
        "pmf-poisson": lambda m: inequality.gini_from_pmf(core.atomic_pmf("poisson", m)),
        "pmf-bosonic": lambda m: inequality.gini_from_pmf(core.atomic_pmf("bosonic", m)),
    }
    if kind not in funcs:
        raise ConfigError(f"invalid value for 'kind': {kind!r}")
    _need(p, "m")
    return Table(["m", "gini"], [[m, funcs[kind](m)] for m in _floats(p["m"])])


def cmd_lorenz(p: dict) -> Table:
    kind = p.get("kind")
    m = _num(p, "m")
    if kind == "geometric":
        xs = np.linspace(0.0, 1.0, _num(p, "points", int) + 1)
        ys = inequality.lorenz_geometric_analytic(m, xs)
        rows = list(zip(xs.tolist(), np.asarray(ys).tolist()))
        return Table(["x", "y"], rows, {"gini": inequality.gini_bosonic_lorenz(m)})
    if kind == "poisson-continuous":
        xs = np.linspace(0.0, 1.0, _num(p, "points", int) + 1)
        rows = [[x, inequality.lorenz_poisson_continuous(m, x)] for x in xs]
        return Table(["x", "y"], rows)
    if kind in ("poisson", "bosonic"):
        curve = inequality.lorenz_from_pmf(core.atomic_pmf(kind, m, _num(p, "tail_tol")))
        return Table(["x", "y"], curve.points, {"gini": curve.gini})
    raise ConfigError(f"invalid value for 'kind': {kind!r}")


def cmd_entropy(p: dict) -> Table:
    kind = p.get("kind") or "poisson"
    if kind not in ("poisson", "bosonic", "fermionic"):
        raise ConfigError(f"invalid value for 'kind': {kind!r}")
    _need(p, "m")
    rows = []
    for m in _floats(p["m"]):
        s = inequality.shannon_entropy(core.atomic_pmf(kind, m, _num(p, "tail_tol")))
        asym = inequality.entropy_poisson_asymptotic(m) if m > 0 else float("nan")
        rows.append([m, s, inequality.entropy_bosonic(m), asym])
    return Table(["m", "shannon", "bosonic_max", "poisson_asymptotic"], rows)


def _parse_parts(text: str, tol: float):
    parts = []
    for item in str(text).split(","):
        try:
            kind, w, m = item.split(":")
            parts.append((core.atomic_pmf(kind, float(m), tol), int(w)))
        except ValueError as exc:
            raise ConfigError(f"invalid value for 'parts': {item!r} ({exc})") from None
    return parts


def cmd_convolve(p: dict) -> Table:
    kind = p.get("kind")
    tol = _num(p, "tail_tol")
    if kind == "poisson-geometric":
        pmf = convolve.poisson_geometric_convolve(_num(p, "m"), _num(p, "mbar"), tol)
    elif kind == "fermionic-binomial":
        pmf = convolve.fermionic_binomial(_num(p, "total", int), _num(p, "owners", int), tol)
    elif kind == "poisson-sum":
        pmf = convolve.poisson_additivity_check(_num(p, "m1"), _num(p, "m2"), tol)
    elif kind == "net-balance":
        sp = convolve.net_balance(_num(p, "m1"), _num(p, "m2"), _num(p, "banks", int), tol)
        rows = [[int(a), float(q)] for a, q in zip(sp.support, sp.probs)]
        return Table(["a", "p"], rows, {"mean": sp.mean, "truncation_mass": sp.truncation_mass})
    elif kind == "weighted":
        _need(p, "parts")
        v_max = p.get("v_max")
        pmf = convolve.weighted_convolve(_parse_parts(p["parts"], tol), None if v_max is None else int(v_max))
        return Table(["v", "p"], _pmf_rows(pmf), {"mean": pmf.mean, "truncation_mass": pmf.truncation_mass})
    else:
        raise ConfigError(f"invalid value for 'kind': {kind!r}")
    return Table(["k", "p"], _pmf_rows(pmf), {"mean": pmf.mean, "truncation_mass": pmf.truncation_mass})


def cmd_banks(p: dict) -> Table:
    m = _num(p, "m")
    tol = _num(p, "tail_tol")
    _need(p, "banks")
    banks = [int(b) for b in _floats(p["banks"])]
    if len(banks) == 1 and not p.get("sweep"):
        pmf = convolve.bank_convolution(m, banks[0], tol)
        return Table(["k", "p"], _pmf_rows(pmf), {"mode": int(np.argmax(pmf.probs))})
    pois = core.atomic_pmf("poisson", m, tol)
    rows = []
    for d in banks:
        pmf = convolve.bank_convolution(m, d, tol)
        rows.append([d, core.total_variation(pmf, pois), inequality.gini_from_pmf(pmf), int(np.argmax(pmf.probs))])
    return Table(["banks", "tv_to_poisson", "gini", "mode"], rows)


def cmd_bitcoin(p: dict) -> Table:
    cap = int(p.get("max_denomination") or bitcoin.BTC_HARD_CAP)
    if p.get("betabar") is not None:
        model = bitcoin.BitcoinModel(_num(p, "betabar"), cap)
    else:
        model = bitcoin.BitcoinModel.from_mean_value(_num(p, "mean_value"), cap)
    summary = {
        "betabar": model.betabar,
        "betabar_approx": bitcoin.betabar_approx(model.mean_value),
        "mean_value": model.mean_value,
        "condensation_ratio": bitcoin.condensation_ratio(model.betabar, cap),
    }
    if model.betabar < math.pi**2 / 24:
        summary["value_mode"] = bitcoin.value_mode(model.betabar)
    v_max = p.get("v_max")
    if v_max is None:
        return Table(["key", "value"], [[k, v] for k, v in summary.items()], summary)
    v_max = int(v_max)
    table = bitcoin.partition_numbers(v_max)
    dist = bitcoin.value_distribution(model, v_max, table)
    # the probabilities underflow for large means; the log column does not
    log_p = bitcoin.log_zero_value_probability(model.betabar, cap) + table.log() - model.betabar * np.arange(v_max + 1)
    rows = []
    for v in range(v_max + 1):
        hr = bitcoin.hardy_ramanujan_ratio(v, model.betabar) if v > 0 else float("nan")
        rows.append([v, table[v], float(dist.probs[v]), float(log_p[v]), hr])
    return Table(["v", "partitions", "probability", "log_probability", "hardy_ramanujan_ratio"], rows, summary)


def cmd_simulate(p: dict) -> Table:
    wc = p.get("wealth_class") or "distinguishable"
    if wc not in mc.SAMPLERS:
        raise ConfigError(f"invalid value for 'wealth_class': {wc!r}")
    units, owners, n = _num(p, "units", int), _num(p, "owners", int), _num(p, "samples", int)
    seed = int(p["seed"])
    try:
        hist, _ = mc.sample_many(wc, units, owners, n, seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    emp = core.Pmf(hist / (n * owners))
    kind = {"distinguishable": "poisson", "bosonic": "bosonic", "fermionic": "fermionic"}[wc]
    exact = core.atomic_pmf(kind, units / owners)
    size = max(len(emp), len(exact))
    rows = [[k, float(emp.padded(size)[k]), float(exact.padded(size)[k])] for k in range(size)]
    return Table(["k", "empirical", "analytic"], rows, {"tv": core.total_variation(emp, exact)})


def cmd_verify(p: dict) -> Table:
    case = p.get("case") or "intro"
    if case == "intro":
        rows = []
        for label, spec in (("distinguishable", core.SpeciesSpec("distinguishable")),
                            ("identical", core.SpeciesSpec("identical"))):
            enum_ = (mc.enumerate_extremum(2, [spec], [2]) if spec.distinguishable
                     else mc.enumerate_extremum(2, [spec], None, 2))
            for occ, w in enum_.occupancies:
                rows.append([label, _occ_label(occ), w])
            rows.append([label, "total", enum_.total])
        return Table(["class", "occupancy", "omega"], rows)
    if case == "extremum":
        owners, units = _num(p, "owners", int), _num(p, "units", int)
        wc = p.get("wealth_class") or "distinguishable"
        spec = core.SpeciesSpec("distinguishable" if wc == "distinguishable" else "identical",
                                cutoff=1 if wc == "fermionic" else core.INF)
        try:
            enum_ = (mc.enumerate_extremum(owners, [spec], [units]) if spec.distinguishable
                     else mc.enumerate_extremum(owners, [spec], None, units))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        rows = [[_occ_label(o), w, int(w == enum_.best)] for o, w in enum_.occupancies]
        return Table(["occupancy", "omega", "maximizer"], rows, {"total": enum_.total})
    raise ConfigError(f"invalid value for 'case': {case!r}")


def _occ_label(occ) -> str:
    return " ".join(f"n{''.join(map(str, k))}={n}" for k, n in occ)


HANDLERS = {
    "dist": cmd_dist,
    "gini": cmd_gini,
    "lorenz": cmd_lorenz,
    "entropy": cmd_entropy,
    "convolve": cmd_convolve,
    "banks": cmd_banks,
    "bitcoin": cmd_bitcoin,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


# -- argument handling --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", default=None, help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--config", default=None, help="key = value file or earlier JSON output")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--tail-tol", type=float, default=None)

    parser = argparse.ArgumentParser(prog="wealthstat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"wealthstat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("dist", parents=[common], help="atomic and truncated ownership laws")
    s.add_argument("--kind")
    s.add_argument("--m", type=float)
    s.add_argument("--beta", type=float)
    s.add_argument("--cutoff")
    s.add_argument("--tail-above-mean", action="store_true", default=None)
    s.add_argument("--m-min", type=float)
    s.add_argument("--m-max", type=float)
    s.add_argument("--points", type=int)

    s = sub.add_parser("gini", parents=[common], help="Gini coefficients")
    s.add_argument("--kind")
    s.add_argument("--m", help="mean or comma-separated means")

    s = sub.add_parser("lorenz", parents=[common], help="Lorenz curve points")
    s.add_argument("--kind")
    s.add_argument("--m", type=float)
    s.add_argument("--points", type=int)

    s = sub.add_parser("entropy", parents=[common], help="Shannon entropies")
    s.add_argument("--kind")
    s.add_argument("--m")

    s = sub.add_parser("convolve", parents=[common], help="convolutions of ownership laws")
    s.add_argument("--kind")
    for name in ("m", "mbar", "m1", "m2"):
        s.add_argument(f"--{name}", type=float)
    for name in ("total", "owners", "banks", "v-max"):
        s.add_argument(f"--{name}", type=int)
    s.add_argument("--parts", help="kind:weight:mean,... e.g. poisson:1:1,bosonic:2:0.5")

    s = sub.add_parser("banks", parents=[common], help="multi-bank negative binomial law")
    s.add_argument("--m", type=float)
    s.add_argument("--banks", help="bank count or comma-separated list")
    s.add_argument("--sweep", action="store_true", default=None)

    s = sub.add_parser("bitcoin", parents=[common], help="partition-number value law")
    s.add_argument("--mean-value", type=float)
    s.add_argument("--betabar", type=float)
    s.add_argument("--max-denomination", type=int)
    s.add_argument("--v-max", type=int)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo allocation oracle")
    s.add_argument("--class", dest="wealth_class")
    s.add_argument("--units", type=int)
    s.add_argument("--owners", type=int)
    s.add_argument("--samples", type=int)

    s = sub.add_parser("verify", parents=[common], help="exact enumeration checks")
    s.add_argument("--case")
    s.add_argument("--class", dest="wealth_class")
    s.add_argument("--owners", type=int)
    s.add_argument("--units", type=int)
    return parser


DEFAULTS = {"format": "csv"}
COMMAND_DEFAULTS = {
    "dist": {"tail_tol": core.DEFAULT_TAIL_TOL, "points": 100, "m_min": 0.01, "m_max": 100.0},
    "gini": {},
    "lorenz": {"tail_tol": core.DEFAULT_TAIL_TOL, "points": 100},
    "entropy": {"tail_tol": core.DEFAULT_TAIL_TOL},
    "convolve": {"tail_tol": core.DEFAULT_TAIL_TOL, "banks": 1},
    "banks": {"tail_tol": core.DEFAULT_TAIL_TOL},
    "bitcoin": {},
    "simulate": {"samples": 1000},
    "verify": {},
}


def read_config(path: str) -> tuple[str | None, dict]:
    """Parse a key = value file or an earlier JSON output into (command, params)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path}: {exc}") from None
        meta = doc.get("meta", doc)
        return meta.get("command"), dict(meta.get("parameters", {}))
    params = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config {path}:{lineno}: expected 'key = value'")
        key, value = (t.strip() for t in line.split("=", 1))
        params[key.replace("-", "_")] = value
    command = params.pop("command", None)
    return command, params


def resolve(argv: list[str]) -> tuple[str, dict]:
    """Merge defaults, config file and flags (flags win)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if v is not None}
    params = {**DEFAULTS, **COMMAND_DEFAULTS[args.command]}
    if args.config:
        command, from_file = read_config(args.config)
        if command is not None and command != args.command:
            raise ConfigError(f"config is for command '{command}', not '{args.command}'")
        params.update(from_file)
    params.update(flags)
    params["command"] = args.command
    if params.get("format") not in ("csv", "json"):
        raise ConfigError(f"invalid value for 'format': {params.get('format')!r}")
    if args.command == "simulate" and params.get("seed") is None:
        params["seed"] = 0
        params["seed_defaulted"] = True
    return args.command, params


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".15g")
    return str(value)


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        value = float(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def render(command: str, params: dict, table: Table) -> str:
    run_params = {k: v for k, v in params.items() if k not in _COMMON and k != "seed_defaulted"}
    meta = {
        "command": command,
        "parameters": run_params,
        "seed": params.get("seed"),
        "seed_defaulted": bool(params.get("seed_defaulted", False)),
        "version": __version__,
    }
    if params["format"] == "json":
        meta["parameters"] = {**run_params, **({"seed": params["seed"]} if params.get("seed") is not None else {})}
        data = {
            "columns": table.columns,
            "rows": [[_jsonable(v) for v in r] for r in table.rows],
            "summary": {k: _jsonable(v) for k, v in table.summary.items()},
        }
        return json.dumps({"meta": meta, "data": data}, indent=1) + "\n"
    lines = [f"# {k}: {json.dumps(v, sort_keys=True, default=str)}" for k, v in meta.items()]
    lines += [f"# summary.{k}: {_fmt(v)}" for k, v in table.summary.items()]
    lines.append(",".join(table.columns))
    lines += [",".join(_fmt(v) for v in row) for row in table.rows]
    return "\n".join(lines) + "\n"


def run(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        command, params = resolve(argv)
        table = HANDLERS[command](params)
        text = render(command, params, table)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    except ConfigError as exc:
        print(f"wealthstat: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as exc:
        print(f"wealthstat: numeric non-convergence: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"wealthstat: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"wealthstat: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = params.get("output")
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            print(f"wealthstat: I/O error: cannot write {out}: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

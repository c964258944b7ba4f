"""``riglab`` command-line harness.

Every subcommand declares the keys it accepts with their defaults.  Values
are resolved as defaults, then ``--config`` entries, then flags.  Each run
with ``--out`` also writes ``<out>.manifest.json`` listing every resolved
parameter; passing that manifest back through ``--config`` reproduces the
output byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from .. import arith, correlators, diophantine
from ..dynamics import rigidity, systems
from ..dynamics.cocycles import FourierCocycle
from ..dynamics.observables import parse_observable
from ..errors import ConfigError, PrecisionExhausted, RangeInvalid, RiglabError, SegmentTooLarge
from . import config, emit

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_PRECISION, EXIT_RANGE = 0, 1, 2, 3, 4

REQUIRED = object()


class UsageError(RiglabError):
    pass


def tool_version() -> str:
    from importlib.metadata import PackageNotFoundError, version

    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0.0.0"


# ---------------------------------------------------------------------------
# system construction shared by the dynamics subcommands
# ---------------------------------------------------------------------------

SYSTEM_KEYS = {
    "system": "rotation",
    "alpha": None,
    "modes": FourierCocycle.zero(),
    "velocity": [1.0],
    "lengths": None,
    "permutation": None,
}


def build_system(p) -> systems.System:
    kind = p["system"]
    if kind == "iet":
        if p["lengths"] is not None:
            if p["permutation"] is None:
                raise UsageError("iet needs --permutation with --lengths")
            return systems.Iet(tuple(p["lengths"]), tuple(p["permutation"]))
        if p["alpha"] is None:
            raise UsageError("iet needs --lengths/--permutation or --alpha")
        return systems.Iet.rotation(p["alpha"])
    if p["alpha"] is None:
        raise UsageError(f"{kind} needs --alpha")
    a, modes = p["alpha"], p["modes"]
    if kind == "rotation":
        return systems.Rotation(a)
    if kind == "anzai":
        return systems.Anzai(a, modes)
    if kind == "special_flow":
        return systems.SpecialFlow(a, modes)
    return systems.Rokhlin(a, modes, tuple(p["velocity"]))


def _point(p, sys_: systems.System):
    x = p["x"]
    if x is None:
        x = [0.0] * sys_.dim
    return x[0] if len(x) == 1 else tuple(x)


def _positive(p, *keys):
    for k in keys:
        if p[k] is not None and p[k] < 1:
            raise UsageError(f"--{k} must be positive, got {p[k]}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_sieve(p):
    seq = arith.sieve_signs(p["lo"], p["hi"], p["kind"], segment_size=p["segment"])
    return seq, f"sieve: {len(seq)} {p['kind']} values on [{p['lo']}, {p['hi']})"


def cmd_prime_volume(p):
    if p["q"] is not None:
        pv = arith.prime_volume(p["q"])
        return pv, f"prime-volume: q={pv.q} volume={pv.volume}"
    if p["X"] is None:
        raise UsageError("prime-volume needs --q or --X")
    q, v = arith.max_prime_volume(p["X"])
    return emit.MaxVolumeRow(p["X"], q, v), f"prime-volume: max over q<={p['X']} at q={q}, volume={v}"


def cmd_density(p):
    c = arith.count_Dj(p["j"], p["X"])
    d = Fraction(c, p["X"])
    return emit.DensityRow(p["X"], p["j"], c, d), f"density: D_{p['j']} up to {p['X']}: {d} = {float(d):.6f}"


def cmd_cf(p):
    _positive(p, "terms")
    cf = diophantine.cf_expand(p["alpha"], p["terms"])
    classes = diophantine.classification_vector(cf, p["epsilon"]) if len(cf) > 1 else []
    rows = [
        emit.CfRow(n, cf.a(n), cf.qn(n), cf.pn(n), float(cf.beta[n - 1]), classes[n - 1] if n <= len(classes) else "")
        for n in range(1, len(cf) + 1)
    ]
    return rows, f"cf: {len(rows)} terms, q_N={cf.qn(len(cf))}"


def cmd_rigidity(p):
    sys_ = build_system(p)
    if p["q"] is not None:
        qs = [p["q"]]
    else:
        if p["alpha"] is None:
            raise UsageError("rigidity needs --q or --alpha with --terms")
        cf = diophantine.cf_expand(p["alpha"], p["terms"])
        qs = list(cf.q)
    reports = [rigidity.rigidity_defect(sys_, q, p["grid"]) for q in qs]
    worst = max(r.sup_defect for r in reports)
    return reports, f"rigidity: {len(reports)} return times, max sup_defect={worst:.6g}"


def cmd_pr_sum(p):
    sys_ = build_system(p)
    r = rigidity.pr_sum(sys_, parse_observable(p["observable"]), p["q"], p["delta"], p["grid"], p["functional"])
    return r, f"pr-sum: q={r.q} delta={r.delta} pr_sum={r.pr_sum:.17g}"


def cmd_iet_search(p):
    p = dict(p, system="iet")
    iet = build_system(p)
    allowed = None
    if p["allowed_j"] is not None:
        j = p["allowed_j"]
        allowed = lambda q: arith.in_Dj(q, j)  # noqa: E731
    hits = rigidity.iet_rigidity_search(iet, p["q_max"], p["tol"], p["grid"], allowed)
    rows = [emit.IetHit(q, d) for q, d in hits]
    out = rows if rows else emit.empty_table(emit.IetHit)
    return out, f"iet-search: {len(rows)} hits up to q={p['q_max']}"


def cmd_correlate(p):
    if p["target"] == "orbit":
        sys_ = build_system(p)
        r = correlators.weighted_orbit_average(
            sys_, parse_observable(p["observable"]), _point(p, sys_), p["N"], p["kind"]
        )
        return r, f"correlate: |orbit average| = {r.modulus:.6g} at N={r.N}"
    if p["h"] is not None:
        v = correlators.autocorrelation(p["kind"], p["h"], p["N"])
        s = correlators.CorrelationSeries(p["kind"], p["N"], {p["h"]: v})
    elif p["j"] is not None:
        s = correlators.autocorrelation_scan_Dj(p["kind"], p["j"], p["h_max"], p["N"])
    else:
        s = correlators.autocorrelation_scan(p["kind"], p["h_max"], p["N"])
    return s, f"correlate: {len(s.entries)} shifts, max |value| = {float(s.max_abs):.6g}"


def cmd_ap_average(p):
    r = correlators.ap_short_average(p["X"], p["H"], p["q"], p["epsilon"])
    return r, f"ap-average: value={r.value} = {float(r.value):.17g}"


def cmd_block_z(p):
    r = correlators.block_z_search(p["M"], p["L"], p["q"])
    return r, f"block-z: z*={r.z_star} total={r.total_at_z} mean={float(r.mean_over_z):.6g}"


def cmd_good_set(p):
    sys_ = build_system(p)
    r = correlators.good_set_diagnostics(
        sys_, parse_observable(p["observable"]), _point(p, sys_), p["M"], p["q"], p["L"], float(p["epsilon"]), p["z"]
    )
    return r, f"good-set: good_m={r.good_m_fraction:.6g} good_interval={r.good_interval_fraction:.6g}"


def cmd_momo(p):
    sys_ = build_system(p)
    ends = p["block_ends"] if p["block_ends"] is not None else correlators.block_ends_upto(p["bK"])
    r = correlators.momo_average(
        sys_, parse_observable(p["observable"]), _point(p, sys_), ends, p["kind"], p["sup_grid"]
    )
    return r, f"momo: K={r.K} bK={r.bK} value={r.value:.6g}"


def cmd_report(p):
    tables = [(path, emit.read_csv(path)) for path in p["inputs"]]
    t = emit.summarise(tables)
    return t, f"report: {len(tables)} files, {len(t.rows)} numeric columns"


@dataclass(frozen=True)
class Command:
    handler: Callable
    keys: dict[str, Any]
    help: str


_DYN = dict(SYSTEM_KEYS, observable="e1", x=None)

COMMANDS: dict[str, Command] = {
    "sieve": Command(
        cmd_sieve, {"lo": 1, "hi": REQUIRED, "kind": "mobius", "segment": arith.DEFAULT_SEGMENT}, "mu or lambda on [lo, hi)"
    ),
    "prime-volume": Command(cmd_prime_volume, {"q": None, "X": None}, "prime volume of q, or its maximiser up to X"),
    "density": Command(cmd_density, {"X": REQUIRED, "j": REQUIRED}, "density of D_j up to X"),
    "cf": Command(
        cmd_cf, {"alpha": REQUIRED, "terms": 20, "epsilon": Fraction(1, 2)}, "continued fraction, convergents, distances"
    ),
    "rigidity": Command(
        cmd_rigidity, dict(SYSTEM_KEYS, q=None, terms=10, grid=None), "grid rigidity defects at q or at convergents"
    ),
    "pr-sum": Command(
        cmd_pr_sum,
        dict(_DYN, q=REQUIRED, delta=rigidity.DEFAULT_DELTA, grid=None, functional="L2_function_norm"),
        "polynomially windowed rigidity sum",
    ),
    "iet-search": Command(
        cmd_iet_search,
        {
            "alpha": None,
            "lengths": None,
            "permutation": None,
            "q_max": REQUIRED,
            "tol": REQUIRED,
            "grid": 4096,
            "allowed_j": None,
        },
        "return times of an IET with small L2 defect",
    ),
    "correlate": Command(
        cmd_correlate,
        dict(_DYN, target="autocorrelation", kind="liouville", N=REQUIRED, h=None, h_max=30, j=None),
        "autocorrelations of mu/lambda, or a weighted orbit average",
    ),
    "ap-average": Command(
        cmd_ap_average,
        {"X": REQUIRED, "H": REQUIRED, "q": REQUIRED, "epsilon": correlators.DEFAULT_AP_EPSILON},
        "short arithmetic-progression average of mu",
    ),
    "block-z": Command(cmd_block_z, {"M": REQUIRED, "L": REQUIRED, "q": REQUIRED}, "best block offset z"),
    "good-set": Command(
        cmd_good_set,
        dict(_DYN, M=REQUIRED, q=REQUIRED, L=REQUIRED, epsilon=Fraction(1, 2), z=0),
        "good m, intervals and residues",
    ),
    "momo": Command(
        cmd_momo,
        dict(_DYN, kind="mobius", bK=10**6, block_ends=None, sup_grid=64),
        "block-wise sup average of weighted orbit sums",
    ),
    "report": Command(cmd_report, {"inputs": REQUIRED}, "summary table of CSV outputs"),
}


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="riglab", description="Rigidity and Mobius-disjointness experiments.", allow_abbrev=False)
    sub = ap.add_subparsers(dest="command", metavar="subcommand", parser_class=_Parser)
    for name, cmd in COMMANDS.items():
        sp = sub.add_parser(name, help=cmd.help, allow_abbrev=False)
        for key in cmd.keys:
            sp.add_argument(f"--{key}", dest=key, default=None, metavar=config.SCHEMA[key].name.upper())
        sp.add_argument("--config", default=None, help="key = value file or run manifest")
        sp.add_argument("--out", default=None, help="output file (manifest written next to it)")
        sp.add_argument("--format", default=None, choices=("csv", "json"))
    return ap


def resolve(cmd: Command, flags: dict[str, str | None], config_path: str | None) -> "OrderedDict[str, Any]":
    params: OrderedDict[str, Any] = OrderedDict((k, v) for k, v in cmd.keys.items())
    if config_path:
        for k, v in config.parse_config(config_path).items():
            if k in ("out", "format"):
                continue
            if k not in cmd.keys:
                raise config.UnknownKey(f"key {k!r} does not apply to this subcommand")
            params[k] = v
    for k in cmd.keys:
        if flags.get(k) is not None:
            params[k] = config.parse_value(k, flags[k])
    missing = [k for k, v in params.items() if v is REQUIRED]
    if missing:
        raise UsageError("missing required parameter(s): " + ", ".join(f"--{k}" for k in missing))
    return params


def _manifest(name: str, params, out: str, fmt: str, duration_ms: int) -> str:
    pairs = [[k, config.format_value(k, v)] for k, v in params.items() if v is not None]
    pairs.append(["format", fmt])
    data = {
        "subcommand": name,
        "parameters": pairs,
        "tool_version": tool_version(),
        "duration_ms": duration_ms,
        "output_paths": [out],
    }
    return json.dumps(data, indent=2) + "\n"


def run(argv: list[str] | None = None) -> int:
    """Run one subcommand; returns the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns = _parser().parse_args(argv)
        if ns.command is None:
            raise UsageError("a subcommand is required (see --help)")
        cmd = COMMANDS[ns.command]
        params = resolve(cmd, vars(ns), ns.config)
        fmt = ns.format
        if fmt is None and ns.config and Path(ns.config).suffix == ".json":
            fmt = dict(json.loads(Path(ns.config).read_text()).get("parameters", [])).get("format")
        if fmt is None:
            fmt = "json" if ns.out and ns.out.endswith(".json") else "csv"
        t0 = time.perf_counter()
        report, summary = cmd.handler(params)
        text = emit.render(report, fmt)
        ms = int(round((time.perf_counter() - t0) * 1000))
        if ns.out:
            Path(ns.out).write_bytes(text.encode("utf-8"))
            Path(ns.out + ".manifest.json").write_text(_manifest(ns.command, params, ns.out, fmt, ms), encoding="utf-8")
            print(summary)
        else:
            sys.stdout.write(text)
            print(summary, file=sys.stderr)
        return EXIT_OK
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except PrecisionExhausted as exc:
        print(f"riglab: precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (RangeInvalid, SegmentTooLarge) as exc:
        print(f"riglab: range invalid: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except (UsageError, ConfigError) as exc:
        print(f"riglab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"riglab: {exc}", file=sys.stderr)
        return EXIT_IO
    except (RiglabError, ValueError, TypeError) as exc:
        print(f"riglab: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())

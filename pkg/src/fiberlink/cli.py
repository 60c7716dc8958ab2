"""Command-line front end.

Subcommands: ``evolve``, ``sweep``, ``esd``, ``verify``, ``modes`` and
``fiber-check``. Settings come from built-in defaults, then an optional
``--config`` file of ``key = value`` lines, then command-line flags.
Numeric values accept simple expressions such as ``pi/4`` or ``sqrt(2)/2``.

Exit codes: 0 success, 1 configuration error, 2 runtime or verification failure.
"""

from __future__ import annotations

import argparse
import ast
import contextlib
import dataclasses
import math
import operator
import os
import sys
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import analysis, analytic, numeric
from .errors import ConfigError, FiberlinkError
from .model import TimeGrid, initial_amplitudes, params_from_ratio

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAILURE = 2

VERIFY_THRESHOLD = 1e-9
VERIFY_R_RANGE = (0.0, 10.0)
THREADS_ENV = "FIBERLINK_THREADS"

DEFAULT_R_VALUES = (0.0, 0.25, 0.5, math.sqrt(2) / 2, 1.0, 1.5, 2.0, 3.0)
ENGINES = ("analytic", "numeric", "both")


@dataclass(frozen=True)
class RunConfig:
    theta: float = math.pi / 4
    r_values: Tuple[float, ...] = DEFAULT_R_VALUES
    tau_start: float = 0.0
    tau_end: float = 4 * math.pi
    n_tau: int = 801
    engine: str = "analytic"
    tol: float = analysis.DEFAULT_TOL
    seed: int = 20100415
    samples: int = 1000
    fiber_length: float = 1.0
    nu_bar: float = 0.0
    output_path: str = "-"


# Per-command defaults that differ from the RunConfig ones.
COMMAND_DEFAULTS = {
    "evolve": {"r_values": (1.0,)},
    "verify": {"engine": "both", "tau_end": 50.0},
}

_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_FLOAT_FIELDS = {"theta", "tau_start", "tau_end", "tol", "fiber_length", "nu_bar"}
_INT_FIELDS = {"n_tau", "seed", "samples"}


# ---------------------------------------------------------------------------
# value parsing
# ---------------------------------------------------------------------------

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi, "e": math.e}
_FUNCS = {"sqrt": math.sqrt}


def parse_number(text: str) -> float:
    """Evaluate a numeric literal or a small arithmetic expression."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValueError(f"unsupported expression {text!r}")

    try:
        return float(ev(ast.parse(text.strip(), mode="eval")))
    except (SyntaxError, ZeroDivisionError, OverflowError) as exc:
        raise ValueError(f"cannot parse {text!r}: {exc}") from None


def _convert(name, raw, line=None):
    try:
        if name == "r_values":
            parts = [p for p in str(raw).split(",") if p.strip()]
            if not parts:
                raise ValueError("empty list")
            return tuple(parse_number(p) for p in parts)
        if name in _FLOAT_FIELDS:
            return parse_number(str(raw))
        if name in _INT_FIELDS:
            value = parse_number(str(raw))
            if value != int(value):
                raise ValueError(f"{raw!r} is not an integer")
            return int(value)
        return str(raw).strip()
    except (ValueError, OverflowError) as exc:
        raise ConfigError(str(exc), field=name, line=line) from None


def read_config_file(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment line."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from None
    values = {}
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError("unknown key", field=key, line=lineno)
        values[key] = _convert(key, raw, line=lineno)
    return values


def _validate(cfg: RunConfig, command: str) -> RunConfig:
    for name in ("theta", "tau_start", "tau_end", "tol"):
        if not math.isfinite(getattr(cfg, name)):
            raise ConfigError("must be finite", field=name)
    for r in cfg.r_values:
        if not math.isfinite(r) or r < 0:
            raise ConfigError(f"coupling ratios must be finite and >= 0, got {r!r}", field="r_values")
    for name in ("tau_start", "tau_end"):
        if abs(getattr(cfg, name)) > analytic.TAU_LIMIT:
            raise ConfigError(
                f"|tau| beyond {analytic.TAU_LIMIT:g} is not supported (RangeExceeded)", field=name
            )
    if cfg.tau_end < cfg.tau_start:
        raise ConfigError("tau_end must be >= tau_start", field="tau_end")
    if cfg.tau_end > cfg.tau_start and cfg.n_tau < 2:
        raise ConfigError("need at least 2 points for a non-degenerate range", field="n_tau")
    if cfg.n_tau < 1:
        raise ConfigError("must be >= 1", field="n_tau")
    if cfg.engine not in ENGINES:
        raise ConfigError(f"must be one of {', '.join(ENGINES)}", field="engine")
    if cfg.tol <= 0:
        raise ConfigError("must be > 0", field="tol")
    if cfg.samples < 1:
        raise ConfigError("must be >= 1", field="samples")
    if command == "verify" and cfg.engine != "both":
        raise ConfigError("verify requires engine = both", field="engine")
    if command in ("evolve", "sweep", "esd") and cfg.engine == "both":
        raise ConfigError(f"{command} needs a single engine (analytic or numeric)", field="engine")
    if command == "evolve" and len(cfg.r_values) != 1:
        raise ConfigError("evolve takes exactly one coupling ratio", field="r_values")
    if command == "esd" and cfg.tau_end == cfg.tau_start:
        raise ConfigError("esd needs a non-degenerate tau range", field="tau_end")
    if command == "fiber-check" and cfg.fiber_length <= 0:
        raise ConfigError("must be > 0", field="fiber_length")
    return cfg


def resolve_config(command: str, args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config file and flags (flags win)."""
    values = dict(COMMAND_DEFAULTS.get(command, {}))
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for name in _FIELDS:
        raw = getattr(args, name, None)
        if raw is None:
            continue
        if name == "r_values":
            values[name] = tuple(v for item in raw for v in _convert(name, item))
        else:
            values[name] = _convert(name, raw)
    return _validate(RunConfig(**values), command)


def thread_cap() -> Optional[int]:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if value < 0:
        raise ConfigError(f"{THREADS_ENV} must be >= 0")
    return value or None


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def fmt(x) -> str:
    """Shortest round-trip representation of a float (at most 17 digits)."""
    return repr(float(x) + 0.0)  # + 0.0 folds -0.0 into 0.0


def _fmt_field(value):
    if isinstance(value, tuple):
        return ",".join(fmt(v) for v in value)
    if isinstance(value, float):
        return fmt(value)
    return str(value)


def header_lines(command: str, cfg: RunConfig):
    lines = [f"# fiberlink {command}"]
    for name in _FIELDS:
        if name == "output_path":
            continue
        lines.append(f"# {name} = {_fmt_field(getattr(cfg, name))}")
    return lines


@contextlib.contextmanager
def _open_output(path):
    if path in ("-", ""):
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _tau_points(cfg: RunConfig) -> np.ndarray:
    if cfg.tau_end == cfg.tau_start:
        return np.array([cfg.tau_start])
    return TimeGrid(cfg.tau_start, cfg.tau_end, cfg.n_tau).points()


def _write(cfg, command, columns, rows):
    with _open_output(cfg.output_path) as out:
        for line in header_lines(command, cfg):
            out.write(line + "\n")
        out.write(",".join(columns) + "\n")
        for row in rows:
            out.write(",".join(row) + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def evolve_rows(cfg: RunConfig):
    r = cfg.r_values[0]
    taus = _tau_points(cfg)
    if cfg.engine == "numeric":
        amps = numeric.evolve_many(params_from_ratio(r), initial_amplitudes(cfg.theta), taus)
    else:
        amps = analytic.amplitude_arrays(r, cfg.theta, taus).T
    norms = np.sum(np.abs(amps) ** 2, axis=1)
    for tau, row, norm in zip(taus, amps, norms):
        cells = [fmt(tau)]
        for amp in row:
            cells += [fmt(amp.real), fmt(amp.imag)]
        cells.append(fmt(norm))
        yield cells


EVOLVE_COLUMNS = ["tau"] + [f"N{i}_{part}" for i in range(1, 6) for part in ("re", "im")] + ["norm"]


def cmd_evolve(cfg: RunConfig):
    _write(cfg, "evolve", EVOLVE_COLUMNS, evolve_rows(cfg))
    return EXIT_OK


def sweep_table(cfg: RunConfig) -> np.ndarray:
    taus = _tau_points(cfg)
    if cfg.engine == "numeric":
        blocks = []
        for r in cfg.r_values:
            states = numeric.evolve_many(params_from_ratio(r), initial_amplitudes(cfg.theta), taus)
            values = [numeric.wootters_concurrence(numeric.partial_trace(psi)) for psi in states]
            blocks.append(np.column_stack([np.full(taus.size, r), taus, values]))
        return np.vstack(blocks)
    return analysis.sweep(cfg.r_values, cfg.theta, taus, max_workers=thread_cap())


def cmd_sweep(cfg: RunConfig):
    table = sweep_table(cfg)
    _write(cfg, "sweep", ["r", "tau", "concurrence"], ([fmt(x) for x in row] for row in table))
    return EXIT_OK


def esd_reports(cfg: RunConfig):
    grid = TimeGrid(cfg.tau_start, cfg.tau_end, cfg.n_tau)
    engine = analysis.Engine(cfg.engine)
    for r in cfg.r_values:
        series = analysis.concurrence_series(params_from_ratio(r), cfg.theta, grid, engine)
        yield r, analysis.detect_esd(series, cfg.tol)


def cmd_esd(cfg: RunConfig):
    reports = list(esd_reports(cfg))
    rows = []
    for r, rep in reports:
        rows += [[fmt(r), "interval", fmt(a), fmt(b)] for a, b in rep.dead_intervals]
        rows += [[fmt(r), "zero", fmt(z), fmt(z)] for z in rep.isolated_zeros]
    _write(cfg, "esd", ["r", "kind", "tau_start", "tau_end"], rows)
    summary = sys.stderr if cfg.output_path in ("-", "") else sys.stdout
    for r, rep in reports:
        print(
            f"r = {fmt(r)}: {len(rep.dead_intervals)} dead interval(s), "
            f"{len(rep.isolated_zeros)} isolated zero(s)",
            file=summary,
        )
    return EXIT_OK


def verify_deviations(cfg: RunConfig):
    """Max |analytic - numeric| over seeded random (r, theta, tau) samples."""
    rng = np.random.default_rng(cfg.seed)
    rs = rng.uniform(*VERIFY_R_RANGE, cfg.samples)
    thetas = rng.uniform(-math.pi, math.pi, cfg.samples)
    taus = rng.uniform(cfg.tau_start, cfg.tau_end, cfg.samples)
    amp_dev = conc_dev = 0.0
    for r, theta, tau in zip(rs, thetas, taus):
        params = params_from_ratio(r)
        exact = analytic.amplitude_arrays(r, theta, tau)
        oracle = numeric.evolve(params, initial_amplitudes(theta), tau)
        amp_dev = max(amp_dev, float(np.max(np.abs(exact - oracle))))
        c_exact = analytic.concurrence_closed_form(params, theta, tau)
        c_oracle = numeric.wootters_concurrence(numeric.partial_trace(oracle))
        conc_dev = max(conc_dev, abs(c_exact - c_oracle))
    return amp_dev, conc_dev


def cmd_verify(cfg: RunConfig):
    amp_dev, conc_dev = verify_deviations(cfg)
    ok = amp_dev <= VERIFY_THRESHOLD and conc_dev <= VERIFY_THRESHOLD
    with _open_output(cfg.output_path) as out:
        for line in header_lines("verify", cfg):
            out.write(line + "\n")
        out.write(f"samples = {cfg.samples}\n")
        out.write(f"max_amplitude_deviation = {amp_dev:.6e}\n")
        out.write(f"max_concurrence_deviation = {conc_dev:.6e}\n")
        out.write(f"threshold = {VERIFY_THRESHOLD:.0e}\n")
        out.write(f"result = {'PASS' if ok else 'FAIL'}\n")
    return EXIT_OK if ok else EXIT_FAILURE


def cmd_modes(cfg: RunConfig):
    rows = []
    for r in cfg.r_values:
        modes = analysis.normal_modes(params_from_ratio(r))
        for name, det in zip(("c-", "c", "c+"), modes.detunings):
            rows.append([fmt(r), name, fmt(det)])
    _write(cfg, "modes", ["r", "mode", "detuning"], rows)
    return EXIT_OK


def cmd_fiber_check(cfg: RunConfig):
    value, ok = analysis.check_short_fiber_limit(cfg.fiber_length, cfg.nu_bar)
    row = [fmt(cfg.fiber_length), fmt(cfg.nu_bar), fmt(value), "true" if ok else "false"]
    _write(cfg, "fiber-check", ["fiber_length", "nu_bar", "value", "ok"], [row])
    return EXIT_OK


COMMANDS = {
    "evolve": (cmd_evolve, "emit amplitude trajectories N1..N5 and their norm"),
    "sweep": (cmd_sweep, "concurrence table over r values and tau"),
    "esd": (cmd_esd, "dead intervals and isolated zeros of the concurrence per r"),
    "verify": (cmd_verify, "cross-check closed form against the matrix-exponential oracle"),
    "modes": (cmd_modes, "normal-mode detunings of the cavity-fiber field"),
    "fiber-check": (cmd_fiber_check, "evaluate the short-fiber single-mode criterion"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat 'key = value' config file")
    common.add_argument("--theta", help="initial-state angle in radians (e.g. pi/4)")
    common.add_argument("--r", dest="r_values", action="append", metavar="R",
                        help="coupling ratio v/g; repeatable, commas allowed")
    common.add_argument("--tau-start", dest="tau_start")
    common.add_argument("--tau-end", dest="tau_end")
    common.add_argument("--n-tau", dest="n_tau")
    common.add_argument("--engine", choices=ENGINES)
    common.add_argument("--tol")
    common.add_argument("--seed")
    common.add_argument("--samples", help="number of random samples for verify")
    common.add_argument("--length", dest="fiber_length", help="fiber length in meters")
    common.add_argument("--nu-bar", dest="nu_bar", help="cavity decay rate into the fiber, rad/s")
    common.add_argument("--output", dest="output_path", help="output file ('-' for stdout)")

    parser = argparse.ArgumentParser(prog="fiberlink", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    func = COMMANDS[args.command][0]
    try:
        cfg = resolve_config(args.command, args)
        return func(cfg)
    except ConfigError as exc:
        print(f"fiberlink: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FiberlinkError, ValueError, OSError) as exc:
        print(f"fiberlink: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

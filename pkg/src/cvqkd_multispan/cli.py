"""Command-line front end: parameter sweeps emitted as deterministic CSV.

Subcommands mirror the figures of interest: ``kgr-unconditional`` and
``kgr-composable`` sweep optimized key rates over the link length,
``max-noise`` sweeps the maximum tolerable excess noise, ``ultimate`` the
capacity upper bound, ``continuous-limit`` the effective channel
parameters, and ``selfcheck`` runs the oracle suites.

Configuration is plain ``key = value`` text plus ``--key=value`` command
line overrides.  Every run echoes its fully resolved configuration as
``#`` comment lines above the CSV header, prints numbers with 12
significant digits and uses LF line endings, so outputs are byte-stable
across runs.  Exit codes: 0 success, 1 validation error, 2 numerical
failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import selfcheck as selfcheck_mod
from .composable import AttackConfig, benchmark_kgr_composable, optimal_kgr_composable
from .link import AmplifierKind, LinkConfig, ProtocolCase, continuous_limit_channel, \
    effective_channel, gain_constraint_max, span_params
from .optimize import OptimizerSettings
from .ultimate import ultimate_key_ratio, ultimate_kgr
from .unconditional import SecurityParams, max_tolerable_noise, optimal_kgr_unconditional

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

_CASE_LABELS = {c.label: c for c in ProtocolCase}

# Keys understood in config files and as --key=value overrides.  The sweep
# variable additionally accepts <name>_min / <name>_max / <name>_steps.
_SWEEP_VARS = ("l", "epsilon", "k", "m", "g_inf")
_KNOWN_KEYS = {
    "sweep", "l", "m", "k", "case", "epsilon", "beta", "kappa", "g_inf",
    "v_min", "v_max", "v_grid", "g_grid", "refine_iters", "tol",
    "outputs", "workers", "benchmark_alice", "trials", "seed",
} | {f"{v}_{suffix}" for v in _SWEEP_VARS for suffix in ("min", "max", "steps")}


class CliError(Exception):
    """Validation problem in configuration or overrides (exit code 1)."""


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return "nan"
    return format(float(value), ".12g")


def parse_config_file(path: str) -> dict[str, str]:
    """Read flat ``key = value`` lines; '#' starts a comment."""
    values: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip().lower()
        if key not in _KNOWN_KEYS:
            raise CliError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def parse_overrides(tokens: list[str]) -> dict[str, str]:
    """Turn ``--key=value`` (or ``--key value``) tokens into a dict."""
    values: dict[str, str] = {}
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if not token.startswith("--"):
            raise CliError(f"unexpected argument {token!r}; overrides look like --key=value")
        body = token[2:]
        if "=" in body:
            key, value = body.split("=", 1)
        else:
            key = body
            i += 1
            if i >= len(tokens):
                raise CliError(f"override --{key} is missing a value")
            value = tokens[i]
        key = key.strip().lower()
        if key not in _KNOWN_KEYS:
            raise CliError(f"unknown override key {key!r}")
        values[key] = value.strip()
        i += 1
    return values


def _parse_float(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise CliError(f"key {key!r}: expected a number, got {raw!r}") from None


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"key {key!r}: expected an integer, got {raw!r}") from None


def _parse_list(raw: str, key: str, kind=float) -> list:
    out = []
    for part in raw.split(","):
        part = part.strip()
        if part:
            out.append(_parse_int(part, key) if kind is int else _parse_float(part, key))
    if not out:
        raise CliError(f"key {key!r}: empty list")
    return out


@dataclass
class ResolvedConfig:
    """Fully resolved run configuration (defaults, file, overrides merged)."""

    command: str
    sweep_var: str = "l"
    sweep_values: list = field(default_factory=list)
    lengths: list = field(default_factory=lambda: [50.0])
    spans: list = field(default_factory=lambda: [5])
    k_values: list | None = None
    cases: list = field(default_factory=list)
    epsilon: float = 0.05
    beta: float = 0.95
    kappa: float = 0.2
    g_inf: list = field(default_factory=lambda: [1.0])
    settings: OptimizerSettings = OptimizerSettings()
    outputs: list | None = None
    workers: int = 0
    benchmark_alice: str = "holevo"
    trials: int = 200
    seed: int = selfcheck_mod.DEFAULT_SEED

    def echo_lines(self) -> list[str]:
        s = self.settings
        pairs = [
            ("command", self.command),
            ("sweep", self.sweep_var.upper() if self.sweep_var != "l" else "L"),
            ("L", ",".join(_fmt(v) for v in self.lengths)),
            ("M", ",".join(str(v) for v in self.spans)),
            ("case", ",".join(c.label for c in self.cases) or "-"),
            ("k", ",".join(str(v) for v in self.k_values) if self.k_values else "-"),
            ("epsilon", _fmt(self.epsilon)),
            ("beta", _fmt(self.beta)),
            ("kappa", _fmt(self.kappa)),
            ("g_inf", ",".join(_fmt(v) for v in self.g_inf)),
            ("v_range", f"{_fmt(s.v_range[0])}..{_fmt(s.v_range[1])}"),
            ("v_grid", str(s.v_grid)),
            ("g_grid", str(s.g_grid)),
            ("refine_iters", str(s.refine_iters)),
            ("tol", _fmt(s.tol)),
            ("workers", str(self.workers)),
        ]
        if self.command == "ultimate":
            pairs.append(("benchmark_alice", self.benchmark_alice))
        return [f"# {key} = {value}" for key, value in pairs]


def _sweep_values(values: dict[str, str], var: str, kind=float) -> list | None:
    """Values of a sweep variable from either a list or a min/max/steps range."""
    has_range = any(f"{var}_{sfx}" in values for sfx in ("min", "max", "steps"))
    if has_range:
        missing = [sfx for sfx in ("min", "max", "steps") if f"{var}_{sfx}" not in values]
        if missing:
            raise CliError(f"sweep over {var!r} needs {var}_min, {var}_max and {var}_steps")
        lo = _parse_float(values[f"{var}_min"], f"{var}_min")
        hi = _parse_float(values[f"{var}_max"], f"{var}_max")
        steps = _parse_int(values[f"{var}_steps"], f"{var}_steps")
        if steps < 2:
            raise CliError(f"{var}_steps must be at least 2, got {steps}")
        if not lo < hi:
            raise CliError(f"empty sweep: {var}_min = {lo} must be below {var}_max = {hi}")
        grid = np.linspace(lo, hi, steps)
        return [int(round(v)) for v in grid] if kind is int else [float(v) for v in grid]
    if var in values:
        return _parse_list(values[var], var, kind)
    return None


def resolve_config(command: str, values: dict[str, str]) -> ResolvedConfig:
    cfg = ResolvedConfig(command=command)
    cfg.sweep_var = values.get("sweep", "L").strip().lower()
    if cfg.sweep_var not in _SWEEP_VARS:
        raise CliError(f"unknown sweep variable {values.get('sweep')!r}; "
                       f"choose one of L, epsilon, k, M, G_inf")
    for var in _SWEEP_VARS:
        if var != cfg.sweep_var and any(f"{var}_{s}" in values for s in ("min", "max", "steps")):
            raise CliError(f"range keys given for {var!r} but the sweep variable "
                           f"is {cfg.sweep_var!r}; exactly one sweep variable is allowed")

    if "epsilon" in values and cfg.sweep_var != "epsilon":
        cfg.epsilon = _parse_float(values["epsilon"], "epsilon")
        if cfg.epsilon < 0:
            raise CliError("epsilon must be non-negative")
    if "beta" in values:
        cfg.beta = _parse_float(values["beta"], "beta")
        if not 0.0 < cfg.beta <= 1.0:
            raise CliError("beta must be in (0, 1]")
    if "kappa" in values:
        cfg.kappa = _parse_float(values["kappa"], "kappa")
        if cfg.kappa < 0:
            raise CliError("kappa must be non-negative")

    lengths = _sweep_values(values, "l")
    if lengths is not None:
        cfg.lengths = lengths
    spans = _sweep_values(values, "m", int) if cfg.sweep_var == "m" else (
        _parse_list(values["m"], "m", int) if "m" in values else None)
    if spans is not None:
        cfg.spans = spans
    if "case" in values:
        labels = [part.strip() for part in values["case"].split(",") if part.strip()]
        try:
            cfg.cases = [_CASE_LABELS[label] for label in labels]
        except KeyError as exc:
            raise CliError(f"unknown case {exc.args[0]!r}; choose from I, IIa, IIb, n") from None
    if "k" in values:
        raw = values["k"].strip()
        cfg.k_values = "all" if raw.lower() == "all" else _parse_list(raw, "k", int)
    elif cfg.sweep_var == "k":
        k_vals = _sweep_values(values, "k", int)
        if k_vals is not None:
            cfg.k_values = k_vals
    if "g_inf" in values or cfg.sweep_var == "g_inf":
        g_vals = _sweep_values(values, "g_inf")
        if g_vals is not None:
            cfg.g_inf = g_vals
    if cfg.sweep_var == "epsilon":
        eps_vals = _sweep_values(values, "epsilon")
        if eps_vals is None:
            raise CliError("sweep over epsilon requires epsilon values or a range")
        cfg.sweep_values = eps_vals

    defaults = OptimizerSettings()
    cfg.settings = OptimizerSettings(
        v_range=(
            _parse_float(values["v_min"], "v_min") if "v_min" in values else defaults.v_range[0],
            _parse_float(values["v_max"], "v_max") if "v_max" in values else defaults.v_range[1],
        ),
        v_grid=_parse_int(values["v_grid"], "v_grid") if "v_grid" in values else defaults.v_grid,
        g_grid=_parse_int(values["g_grid"], "g_grid") if "g_grid" in values else defaults.g_grid,
        refine_iters=(_parse_int(values["refine_iters"], "refine_iters")
                      if "refine_iters" in values else defaults.refine_iters),
        tol=_parse_float(values["tol"], "tol") if "tol" in values else defaults.tol,
    )
    if "outputs" in values:
        cfg.outputs = [part.strip() for part in values["outputs"].split(",") if part.strip()]
    cfg.workers = _parse_int(values["workers"], "workers") if "workers" in values \
        else (os.cpu_count() or 1)
    if "benchmark_alice" in values:
        cfg.benchmark_alice = values["benchmark_alice"].strip()
        if cfg.benchmark_alice not in ("holevo", "heterodyne"):
            raise CliError("benchmark_alice must be 'holevo' or 'heterodyne'")
    if "trials" in values:
        cfg.trials = _parse_int(values["trials"], "trials")
    if "seed" in values:
        cfg.seed = _parse_int(values["seed"], "seed")
    return cfg


# ---------------------------------------------------------------------------
# Row evaluation (top-level functions so worker processes can pickle them)
# ---------------------------------------------------------------------------

def _link(length, spans, kappa, epsilon, case) -> LinkConfig:
    return LinkConfig(length_km=length, spans=spans, loss_db_per_km=kappa,
                      excess_noise=epsilon, amplifier=case.amplifier_kind, gain=1.0)


_NAN = float("nan")


def _row_unconditional(job):
    length, case_label, spans, kappa, epsilon, beta, settings = job
    case = _CASE_LABELS[case_label]
    keys = (length, case_label, spans)
    try:
        config = _link(length, max(spans, 1), kappa, epsilon, case)
        result = optimal_kgr_unconditional(config, SecurityParams(beta, case), settings)
        if case is ProtocolCase.NO_AMPLIFIER:
            g_max = 1.0
        else:
            t, _ = span_params(config)
            g_max = gain_constraint_max(result.v_opt, t, epsilon, case)
        return keys + (result.kgr, result.v_opt, result.g_opt, g_max,
                       result.i_ab, result.chi_be), None
    except (ValueError, FloatingPointError) as exc:
        return keys + (_NAN,) * 6, str(exc)


def _row_composable(job):
    length, case_label, spans, k, kappa, epsilon, beta, settings = job
    case = _CASE_LABELS[case_label]
    keys = (length, case_label, spans, k)
    try:
        config = _link(length, spans, kappa, epsilon, case)
        params = SecurityParams(beta, case)
        attack = AttackConfig(span_index=k)
        benchmark = benchmark_kgr_composable(config, params, attack, settings)
        if case is ProtocolCase.NO_AMPLIFIER:
            result, ratio = benchmark, 1.0
        else:
            result = optimal_kgr_composable(config, params, attack, settings)
            ratio = result.kgr / benchmark.kgr if benchmark.kgr > 0.0 else _NAN
        return keys + (result.kgr, ratio, result.v_opt, result.g_opt), None
    except (ValueError, FloatingPointError) as exc:
        return keys + (_NAN,) * 4, str(exc)


def _row_max_noise(job):
    length, case_label, spans, kappa, beta, settings = job
    case = _CASE_LABELS[case_label]
    try:
        config = _link(length, max(spans, 1), kappa, 0.0, case)
        eps_max = max_tolerable_noise(config, SecurityParams(beta, case), settings)
        return (length, case_label, spans, eps_max), None
    except (ValueError, FloatingPointError) as exc:
        return (length, case_label, spans, _NAN), str(exc)


def _row_ultimate(job):
    length, spans, k, kappa, epsilon, beta, settings, benchmark_alice = job
    keys = (length, spans, k)
    try:
        case = ProtocolCase.CASE_I
        config = _link(length, spans, kappa, epsilon, case)
        params = SecurityParams(beta, case)
        attack = AttackConfig(span_index=k)
        result = ultimate_kgr(config, params, attack, settings)
        try:
            ratio = ultimate_key_ratio(config, params, attack, settings,
                                       benchmark_alice)
        except ValueError:
            ratio = _NAN
        return keys + (result.kgr_upper, result.chi_ab, ratio,
                       result.v_opt, result.g_opt), None
    except (ValueError, FloatingPointError) as exc:
        return keys + (_NAN,) * 5, str(exc)


def _compute_rows(jobs, worker, n_workers):
    """Evaluate rows (in a pool when useful); deterministic job order."""
    if n_workers <= 1 or len(jobs) <= 1:
        results = [worker(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(worker, jobs, chunksize=1))
    rows = []
    for (row, error) in results:
        if error is not None:
            print(f"row {','.join(_fmt(v) for v in row[:4])}...: {error}",
                  file=sys.stderr)
        rows.append(row)
    return rows


def _emit(cfg: ResolvedConfig, columns: list[str], rows, out) -> int:
    """Write header comments, CSV header and rows; return exit code."""
    selected = columns
    if cfg.outputs is not None:
        unknown = [c for c in cfg.outputs if c not in columns]
        if unknown:
            raise CliError(f"unknown output columns {unknown}; available: {columns}")
        selected = cfg.outputs
    for line in cfg.echo_lines():
        out.write(line + "\n")
    out.write(",".join(selected) + "\n")
    failures = 0
    for row in rows:
        record = dict(zip(columns, row))
        if any(isinstance(v, float) and np.isnan(v) for v in record.values()):
            failures += 1
        out.write(",".join(_fmt(record[c]) for c in selected) + "\n")
    if failures:
        print(f"warning: {failures} row(s) carry nan sentinels (numerical failure)",
              file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_kgr_unconditional(cfg: ResolvedConfig, out) -> int:
    if not cfg.cases:
        raise CliError("kgr-unconditional needs at least one case (IIa, IIb or n)")
    for case in cfg.cases:
        if case is ProtocolCase.CASE_I:
            raise CliError(
                "case I (PIA) is not admissible under unconditional security: the "
                "amplifier idlers leak to the eavesdropper; use IIa, IIb or n")
    epsilons = cfg.sweep_values if cfg.sweep_var == "epsilon" else [cfg.epsilon]
    jobs = []
    for eps in epsilons:
        for length in cfg.lengths:
            for case in cfg.cases:
                # M = 0 denotes the no-amplifier benchmark row.
                span_list = [0] if case is ProtocolCase.NO_AMPLIFIER else \
                    [m for m in cfg.spans if m > 0]
                for spans in span_list:
                    jobs.append((float(length), case.label, spans, cfg.kappa,
                                 float(eps), cfg.beta, cfg.settings))
    rows = _compute_rows(jobs, _row_unconditional, cfg.workers)
    columns = ["L_km", "case", "M", "kgr_bits", "v_opt", "g_opt", "g_max",
               "i_ab", "chi_be"]
    if cfg.sweep_var == "epsilon":
        columns.append("epsilon")
        rows = [row + (job[4],) for row, job in zip(rows, jobs)]
    return _emit(cfg, columns, rows, out)


def cmd_kgr_composable(cfg: ResolvedConfig, out) -> int:
    if not cfg.cases:
        raise CliError("kgr-composable needs at least one case (I, IIa, IIb or n)")
    if cfg.k_values is None:
        raise CliError("kgr-composable needs k (an index list or 'all')")
    jobs = []
    for length in cfg.lengths:
        for case in cfg.cases:
            for spans in cfg.spans:
                if spans < 1:
                    raise CliError("composable security needs at least one span (M >= 1)")
                k_list = list(range(1, spans + 1)) if cfg.k_values == "all" else cfg.k_values
                for k in k_list:
                    if not 1 <= k <= spans:
                        raise CliError(f"untrusted span k = {k} outside 1..{spans}")
                    jobs.append((float(length), case.label, spans, int(k),
                                 cfg.kappa, cfg.epsilon, cfg.beta, cfg.settings))
    rows = _compute_rows(jobs, _row_composable, cfg.workers)
    columns = ["L_km", "case", "M", "k", "kgr_bits", "key_ratio", "v_opt", "g_opt"]
    return _emit(cfg, columns, rows, out)


def cmd_max_noise(cfg: ResolvedConfig, out) -> int:
    if not cfg.cases:
        raise CliError("max-noise needs at least one case (IIa, IIb or n)")
    for case in cfg.cases:
        if case is ProtocolCase.CASE_I:
            raise CliError("case I (PIA) is not admissible under unconditional security")
    jobs = []
    for length in cfg.lengths:
        for case in cfg.cases:
            span_list = [0] if case is ProtocolCase.NO_AMPLIFIER else \
                [m for m in cfg.spans if m > 0]
            for spans in span_list:
                jobs.append((float(length), case.label, spans, cfg.kappa,
                             cfg.beta, cfg.settings))
    rows = _compute_rows(jobs, _row_max_noise, cfg.workers)
    return _emit(cfg, ["L_km", "case", "M", "eps_max"], rows, out)


def cmd_ultimate(cfg: ResolvedConfig, out) -> int:
    if cfg.k_values is None:
        raise CliError("ultimate needs k (an index list or 'all')")
    jobs = []
    for length in cfg.lengths:
        for spans in cfg.spans:
            if spans < 1:
                raise CliError("the capacity bound needs at least one span (M >= 1)")
            k_list = list(range(1, spans + 1)) if cfg.k_values == "all" else cfg.k_values
            for k in k_list:
                if not 1 <= k <= spans:
                    raise CliError(f"untrusted span k = {k} outside 1..{spans}")
                jobs.append((float(length), spans, int(k), cfg.kappa, cfg.epsilon,
                             cfg.beta, cfg.settings, cfg.benchmark_alice))
    rows = _compute_rows(jobs, _row_ultimate, cfg.workers)
    columns = ["L_km", "M", "k", "kgr_upper_bits", "chi_ab", "key_ratio",
               "v_opt", "g_opt"]
    return _emit(cfg, columns, rows, out)


def cmd_continuous_limit(cfg: ResolvedConfig, out) -> int:
    rows = []
    for length in cfg.lengths:
        for g_total in cfg.g_inf:
            base = LinkConfig(length_km=float(length), spans=1,
                              loss_db_per_km=cfg.kappa, excess_noise=cfg.epsilon)
            limit = continuous_limit_channel(base, float(g_total))
            # M = 0 marks the continuous limit; finite-M rows use the
            # per-span gain g_total^(1/M) for direct comparison.
            rows.append((float(length), 0, float(g_total),
                         limit.t_q, limit.t_p, limit.n_q, limit.n_p))
            for spans in cfg.spans:
                if spans < 1:
                    continue
                config = LinkConfig(length_km=float(length), spans=spans,
                                    loss_db_per_km=cfg.kappa, excess_noise=cfg.epsilon,
                                    amplifier=AmplifierKind.PSA,
                                    gain=float(g_total) ** (1.0 / spans))
                eff = effective_channel(config)
                rows.append((float(length), spans, float(g_total),
                             eff.t_q, eff.t_p, eff.n_q, eff.n_p))
    columns = ["L_km", "M", "g_total", "t_q", "t_p", "n_q", "n_p"]
    return _emit(cfg, columns, rows, out)


def cmd_selfcheck(cfg: ResolvedConfig, out) -> int:
    results = selfcheck_mod.run_all(trials=cfg.trials, seed=cfg.seed)
    failed = 0
    for result in results:
        out.write(result.line() + "\n")
        failed += not result.passed
    if failed:
        print(f"selfcheck: {failed} suite(s) failed", file=sys.stderr)
        return EXIT_NUMERICAL
    out.write(f"selfcheck: all {len(results)} suites passed\n")
    return EXIT_OK


_COMMANDS = {
    "kgr-unconditional": cmd_kgr_unconditional,
    "kgr-composable": cmd_kgr_composable,
    "max-noise": cmd_max_noise,
    "ultimate": cmd_ultimate,
    "continuous-limit": cmd_continuous_limit,
    "selfcheck": cmd_selfcheck,
}


def main(argv: list[str] | None = None, out=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = out if out is not None else sys.stdout
    parser = argparse.ArgumentParser(
        prog="cvqkd-multispan",
        description="Key generation rates for CV-QKD over multispan amplified links")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("config", nargs="?", default=None,
                        help="path to a key = value config file")
    args, rest = parser.parse_known_args(argv)
    try:
        values = parse_config_file(args.config) if args.config else {}
        values.update(parse_overrides(rest))
        cfg = resolve_config(args.command, values)
        return _COMMANDS[args.command](cfg, out)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

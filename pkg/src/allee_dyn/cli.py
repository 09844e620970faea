"""Command-line frontend: analyze / simulate / bounds / montecarlo / sweep.

One binary, subcommand style.  A config file of ``key = value`` lines can
stand in for flags (flags win on conflict).  All outputs are RFC-4180 CSV
with a header row, '.' decimal separator, and shortest-round-trip float
formatting, so identical invocations produce byte-identical files at any
worker-thread count.

Exit codes: 0 success, 1 validation error, 2 verification FAIL.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import asdict, dataclass, fields

from . import analysis, bounds as bnd, maps, montecarlo as mc, noise as noise_mod
from . import simulate as sim
from .errors import AlleeDynError, ConfigError
from .rng import PURPOSE_RUN, derive

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_VERIFICATION = 2

# trials default is per command: plotting a handful of paths (simulate)
# versus estimating probabilities (montecarlo / sweep)
TRIALS_DEFAULT = {"simulate": 10, "montecarlo": 1000, "sweep": 1000}


@dataclass
class RunConfig:
    """Lossless bag of CLI options; round-trips through config files."""

    command: str
    map: str | None = None
    map_file: str | None = None
    noise: str = "uniform"
    a: float | None = None
    H: float | None = None
    b1: float | None = None
    l: float | None = None
    x0: float | None = None
    x0_grid: str | None = None
    l_grid: str | None = None
    trials: int | None = None
    n_max: int = 100_000
    seed: int = 20177
    alpha_frac: float = 0.5
    out: str | None = None
    check_expectation: bool = False

    def validate(self):
        if self.map is None and self.map_file is None:
            raise ConfigError("a map is required (--map or --map-file)")
        if self.map is not None and self.map_file is not None:
            raise ConfigError("--map and --map-file are mutually exclusive")
        if self.a is not None and self.H is not None and not self.a < self.H:
            raise ConfigError(f"need a < H, got a={self.a}, H={self.H}")
        if self.l is not None and self.l < 0.0:
            raise ConfigError("l must be non-negative")
        if self.trials is None:
            self.trials = TRIALS_DEFAULT.get(self.command, 1000)
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.n_max < 1:
            raise ConfigError("n-max must be >= 1")
        if not 0.0 < self.alpha_frac < 1.0:
            raise ConfigError("alpha-frac must lie in (0, 1)")

    def to_file(self, path: str):
        with open(path, "w", encoding="ascii") as fh:
            for key, value in asdict(self).items():
                if value is not None:
                    fh.write(f"{key} = {value!r}\n")

    @classmethod
    def from_file(cls, path: str, command: str | None = None) -> "RunConfig":
        import ast

        values = {}
        with open(path, encoding="ascii") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, _, val = line.partition("=")
                key = key.strip()
                if key not in {f.name for f in fields(cls)}:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                values[key] = ast.literal_eval(val.strip())
        if command is not None:
            values["command"] = command
        if "command" not in values:
            raise ConfigError(f"{path}: missing 'command'")
        return cls(**values)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def _write_csv(path: str, header: list[str], rows: list[list]):
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _parse_grid(token: str) -> list[float]:
    try:
        lo, hi, step = (float(t) for t in token.split(":"))
    except ValueError:
        raise ConfigError(f"bad grid {token!r}; expected lo:hi:step") from None
    if step <= 0.0 or hi < lo:
        raise ConfigError(f"bad grid {token!r}")
    values = []
    k = 0
    while True:
        v = lo + k * step
        if v > hi + 1e-9 * step:
            break
        values.append(v)
        k += 1
    return values


def _load_map(cfg: RunConfig) -> maps.MapSpec:
    if cfg.map is not None:
        return maps.builtin(cfg.map)
    with open(cfg.map_file, encoding="ascii") as fh:
        return maps.from_script(fh.read(), name=cfg.map_file)


def _require(cfg: RunConfig, *names: str):
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigError(
            f"{cfg.command} requires " + ", ".join(f"--{n.replace('_', '-')}"
                                                   for n in missing))


def _regime(cfg: RunConfig, m: maps.MapSpec) -> analysis.RegimeAnalysis:
    _require(cfg, "a", "H", "l")
    regime = analysis.analyze_regime(m, cfg.a, cfg.H, cfg.l)
    if regime.regime == "none":
        raise ConfigError(
            f"l = {cfg.l} is outside both admissible windows: thresholds "
            f"need l < min(F(a), -F(b)) = "
            f"{min(regime.F_a, regime.l_escape_threshold):.6g}, escape needs "
            f"{regime.l_escape_threshold:.6g} < l < "
            f"{regime.l_max_invariance:.6g}")
    return regime


# ----------------------------------------------------------------------
# subcommands


def _print_kv(key: str, value):
    print(f"{key}={_fmt(value)}")


def _cmd_analyze(cfg: RunConfig) -> int:
    m = _load_map(cfg)
    regime = _regime(cfg, m)
    params = maps.StructuralParams(a=cfg.a, H=cfg.H, b1=cfg.b1)
    report = maps.validate_assumptions(m, params)
    for key in ("a", "H", "l", "b", "f_H", "f_H_argmax", "F_a", "F_b",
                "l_max_invariance", "l_escape_threshold", "u_l", "v_l",
                "v_core", "alpha_l", "beta_l", "flbound_holds",
                "F_monotone_on_core", "kappa"):
        _print_kv(key, getattr(regime, key))
    _print_kv("escape_window",
              "" if regime.escape_window is None else
              f"({regime.escape_window[0]!r}, {regime.escape_window[1]!r})")
    _print_kv("regime", regime.regime)
    _print_kv("assumptions_ok", report.all_passed)
    for cond in report.conditions:
        _print_kv(f"assumption[{cond.name}]", cond.passed)
    for warning in regime.ill_conditioned:
        _print_kv("warning", warning)
    if cfg.out:
        import numpy as np

        xs = np.linspace(0.0, cfg.H, 10_001)
        f = maps.eval_f_vec(m, xs)
        rows = [[float(x), float(fx), float(fx - x)] for x, fx in zip(xs, f)]
        _write_csv(cfg.out, ["x", "f", "F"], rows)
    return EXIT_OK


def _cmd_simulate(cfg: RunConfig) -> int:
    m = _load_map(cfg)
    nz = noise_mod.from_cli_token(cfg.noise)
    _require(cfg, "l", "x0")
    u_l = v_l = None
    if cfg.a is not None and cfg.H is not None:
        regime = analysis.analyze_regime(m, cfg.a, cfg.H, cfg.l)
        u_l, v_l = regime.u_l, regime.v_l
    path_rows, summary_rows = [], []
    for run_id in range(cfg.trials):
        stream = derive(cfg.seed, run_id, PURPOSE_RUN)
        res = sim.simulate(m, nz, cfg.l, cfg.x0, cfg.n_max, stream,
                           u_l=u_l, v_l=v_l)
        for n, x in zip(res.steps, res.values):
            path_rows.append([run_id, int(n), float(x)])
        summary_rows.append([run_id, res.outcome,
                             res.hit_step if res.hit_step is not None else "",
                             cfg.seed, run_id])
        print(f"run={run_id} outcome={res.outcome} "
              f"hit_step={_fmt(res.hit_step)} final_x={res.final_x!r}")
    if cfg.out:
        _write_csv(cfg.out, ["run_id", "n", "x_n"], path_rows)
        _write_csv(cfg.out + ".summary.csv",
                   ["run_id", "outcome", "hit_step", "base_seed", "stream"],
                   summary_rows)
    return EXIT_OK


def _bound_reports(m, nz, regime, x0, alpha_frac=0.5):
    reports = []
    if regime.has_thresholds or regime.regime == "partial":
        reports.append(bnd.basic_bounds(m, nz, regime, x0))
        if regime.F_monotone_on_core and regime.v_core < x0 < regime.u_l:
            reports.append(bnd.improved_bounds(m, nz, regime, x0))
            reports.append(bnd.boundary_bounds(m, nz, regime, x0))
            if nz.kind == "uniform" and regime.kappa is not None:
                reports.append(
                    bnd.explicit_bounds(m, nz, regime, x0, variant="uniform"))
            elif nz.density_floor:
                reports.append(
                    bnd.explicit_bounds(m, nz, regime, x0, variant="h"))
    elif regime.regime == "escape":
        reports.append(bnd.escape_bound(m, nz, regime, alpha_frac=alpha_frac))
    return reports


_BOUND_HEADER = ["x0", "l", "method", "P_p_bound", "P_e_bound", "K1", "K2"]


def _bound_row(rep):
    return [rep.x0, rep.l, rep.method, rep.persistence_bound,
            rep.lowdensity_bound, rep.constants.get("K1", rep.constants.get("K")),
            rep.constants.get("K2")]


def _cmd_bounds(cfg: RunConfig) -> int:
    m = _load_map(cfg)
    nz = noise_mod.from_cli_token(cfg.noise)
    regime = _regime(cfg, m)
    x0s = _parse_grid(cfg.x0_grid) if cfg.x0_grid else None
    if x0s is None:
        _require(cfg, "x0")
        x0s = [cfg.x0]
    rows = []
    for x0 in x0s:
        for rep in _bound_reports(m, nz, regime, x0, cfg.alpha_frac):
            rows.append(_bound_row(rep))
    for row in rows:
        print(" ".join(f"{h}={_fmt(v)}" for h, v in zip(_BOUND_HEADER, row)))
    if cfg.out:
        _write_csv(cfg.out, _BOUND_HEADER, rows)
    return EXIT_OK


_MC_HEADER = ["x0", "l", "trials", "n_max", "base_seed", "mode",
              "n_persistent", "n_low", "n_undecided", "p_hat_persist",
              "p_hat_low", "ci_persist_low", "ci_persist_high", "ci_low_low",
              "ci_low_high", "verdict"]


def _estimate_row(est, verdict):
    return [est.x0, est.l, est.trials, est.n_max, est.base_seed, est.mode,
            est.n_persistent, est.n_low, est.n_undecided, est.p_hat_persist,
            est.p_hat_low, est.ci_persist[0], est.ci_persist[1],
            est.ci_low[0], est.ci_low[1], verdict]


def _cmd_montecarlo(cfg: RunConfig) -> int:
    m = _load_map(cfg)
    nz = noise_mod.from_cli_token(cfg.noise)
    regime = _regime(cfg, m)
    _require(cfg, "x0")
    est = mc.estimate(m, nz, regime, cfg.x0, cfg.trials, cfg.n_max, cfg.seed)
    reports = _bound_reports(m, nz, regime, cfg.x0, cfg.alpha_frac)
    comparable = [r for r in reports if r.x0 is None or r.x0 == cfg.x0]
    verdict = mc.verify_bounds(est, comparable)
    rows = [_estimate_row(est, verdict.status)]
    print(f"x0={est.x0!r} l={est.l!r} p_hat_persist={est.p_hat_persist!r} "
          f"p_hat_low={est.p_hat_low!r} undecided={est.n_undecided} "
          f"verdict={verdict.status}")
    for line in verdict.checks:
        print(f"  {line}")
    failed = not verdict.passed and verdict.status == mc.FAIL
    if cfg.check_expectation:
        exp = mc.verify_expectation(m, nz, cfg.l, cfg.x0, cfg.trials,
                                    cfg.n_max, cfg.seed)
        print(f"expectation={exp.status}")
        for line in exp.checks:
            print(f"  {line}")
        failed = failed or exp.status == mc.FAIL
    if cfg.out:
        _write_csv(cfg.out, _MC_HEADER, rows)
    return EXIT_VERIFICATION if failed else EXIT_OK


def _cmd_sweep(cfg: RunConfig) -> int:
    m = _load_map(cfg)
    nz = noise_mod.from_cli_token(cfg.noise)
    _require(cfg, "a", "H")
    x0s = _parse_grid(cfg.x0_grid) if cfg.x0_grid else None
    if x0s is None:
        _require(cfg, "x0")
        x0s = [cfg.x0]
    ls = _parse_grid(cfg.l_grid) if cfg.l_grid else None
    if ls is None:
        _require(cfg, "l")
        ls = [cfg.l]
    grid = [(x0, l) for l in ls for x0 in x0s]
    regimes = {}
    rows = []
    any_fail = False
    for row_index, (x0, l) in enumerate(grid):
        if l not in regimes:
            regimes[l] = analysis.analyze_regime(m, cfg.a, cfg.H, l)
        regime = regimes[l]
        if regime.regime == "none":
            raise ConfigError(f"l = {l} admits neither regime")
        est = mc.estimate(m, nz, regime, x0, cfg.trials, cfg.n_max,
                          cfg.seed + row_index)
        reports = _bound_reports(m, nz, regime, x0, cfg.alpha_frac)
        verdict = mc.verify_bounds(est, [r for r in reports
                                         if r.x0 is None or r.x0 == x0])
        any_fail = any_fail or verdict.status == mc.FAIL
        rows.append(_estimate_row(est, verdict.status))
        print(f"x0={x0!r} l={l!r} p_hat_persist={est.p_hat_persist!r} "
              f"p_hat_low={est.p_hat_low!r} verdict={verdict.status}")
    if cfg.out:
        _write_csv(cfg.out, _MC_HEADER, rows)
    return EXIT_VERIFICATION if any_fail else EXIT_OK


_COMMANDS = {
    "analyze": _cmd_analyze,
    "simulate": _cmd_simulate,
    "bounds": _cmd_bounds,
    "montecarlo": _cmd_montecarlo,
    "sweep": _cmd_sweep,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="allee-dyn",
        description=("thresholds, probability lower bounds and seeded Monte "
                     "Carlo for truncated stochastic population maps"))
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value file; flags win")
        p.add_argument("--map", help="built-in map id: "
                       + ", ".join(maps.builtin_ids()))
        p.add_argument("--map-file", dest="map_file",
                       help="piecewise map definition file")
        p.add_argument("--noise",
                       help="uniform|tnormal:<sigma>|triangular|table:<file>")
        p.add_argument("--a", type=float)
        p.add_argument("--H", type=float)
        p.add_argument("--b1", type=float)
        p.add_argument("--l", type=float)
        p.add_argument("--x0", type=float)
        p.add_argument("--x0-grid", dest="x0_grid", help="lo:hi:step")
        p.add_argument("--l-grid", dest="l_grid", help="lo:hi:step")
        p.add_argument("--trials", type=int)
        p.add_argument("--n-max", dest="n_max", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--alpha-frac", dest="alpha_frac", type=float)
        p.add_argument("--out")
        p.add_argument("--check-expectation", dest="check_expectation",
                       action="store_const", const=True)
    return parser


def build_config(argv) -> RunConfig:
    ns = _build_parser().parse_args(argv)
    if ns.config:
        cfg = RunConfig.from_file(ns.config, command=ns.command)
    else:
        cfg = RunConfig(command=ns.command)
    for f in fields(RunConfig):
        if f.name == "command":
            continue
        given = getattr(ns, f.name, None)
        if given is not None:
            setattr(cfg, f.name, given)
    cfg.validate()
    return cfg


def parse_and_dispatch(argv) -> int:
    try:
        cfg = build_config(argv)
        return _COMMANDS[cfg.command](cfg)
    except AlleeDynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SystemExit as exc:
        # argparse uses exit status 2 for usage errors; that slot means
        # "verification failed" here, so remap
        code = exc.code if isinstance(exc.code, int) else 1
        return EXIT_OK if code == 0 else EXIT_VALIDATION


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()

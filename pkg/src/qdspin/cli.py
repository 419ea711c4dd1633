"""Command-line entry point: ``qdspin <subcommand> ...``.

Subcommands::

    evolve <config>          spin trajectory to CSV
    sectors <N>              sector table
    poles <config>           exact vs PA0 vs PA1 Y-branch poles
    oracle-check <config>    sector route vs full-space brute force
    liouville-check <config> block Liouville integration vs Schrodinger route

Configs are YAML, for example::

    couplings: {n_nuclei: 3, uniform: 1.0}
    epsilon_e: 0.0
    initial: {electron: down, nuclear_mask: 0}
    time: {t_max: 50, n_points: 500}
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import laplace_m0, oracle
from .basis import enumerate_sector, mz_value, sector_dims, sector_range, total_state_count
from .blocks import DENSE_CAP, SectorBlocks, set_label
from .errors import CapacityError, DegeneratePolesError, NumericError
from .evolver import AmplitudeTrajectory, evolve_sector
from .model import CouplingSet, exponential_profile
from .observables import (SpinTrajectory, StateSpec, evolve_state, from_amplitudes,
                          from_product_state, normalize, write_csv)

log = logging.getLogger("qdspin")

SOLVERS = ("sector-eigen", "laplace-m0", "pole-approx", "oracle")
ELECTRON_DIRECTIONS = {
    "up": (0.0, 0.0),
    "down": (math.pi, 0.0),
    "+x": (math.pi / 2, 0.0),
    "-x": (math.pi / 2, math.pi),
    "+y": (math.pi / 2, math.pi / 2),
    "-y": (math.pi / 2, -math.pi / 2),
}


class ConfigError(ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class RunConfig:
    couplings: CouplingSet
    initial: StateSpec
    times: np.ndarray
    solver: str = "sector-eigen"
    pole_variant: str = "PA1"
    output: str | None = None
    product_state: tuple[float, float, int] | None = None
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def n_nuclei(self) -> int:
        return self.couplings.n_nuclei


def _number(section: dict, key: str, where: str, default=None, required=True) -> float:
    if key not in section:
        if required and default is None:
            raise ConfigError(f"{where}.{key}" if where else key, "missing required field")
        return default
    try:
        value = float(section[key])
    except (TypeError, ValueError):
        raise ConfigError(f"{where}.{key}" if where else key, f"not a number: {section[key]!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{where}.{key}" if where else key, "must be finite")
    return value


def _complex(value, where: str) -> complex:
    try:
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return complex(float(value[0]), float(value[1]))
        if isinstance(value, str):
            return complex(value.replace(" ", ""))
        return complex(value)
    except (TypeError, ValueError):
        raise ConfigError(where, f"not a complex number: {value!r}")


def _parse_couplings(doc: dict) -> CouplingSet:
    sec = doc.get("couplings")
    if not isinstance(sec, dict):
        raise ConfigError("couplings", "missing required section")
    forms = [k for k in ("explicit", "uniform", "exponential") if k in sec]
    if len(forms) != 1:
        raise ConfigError("couplings", "give exactly one of explicit, uniform, exponential")
    form = forms[0]
    eps = _number(doc, "epsilon_e", "", default=0.0, required=False)
    eps_n = _number(doc, "epsilon_n", "", default=0.0, required=False)
    if form == "explicit":
        values = sec["explicit"]
        if not isinstance(values, list) or not values:
            raise ConfigError("couplings.explicit", "must be a non-empty list")
        if "n_nuclei" in sec and int(sec["n_nuclei"]) != len(values):
            raise ConfigError("couplings.n_nuclei", "disagrees with the explicit list length")
        try:
            values = [float(v) for v in values]
        except (TypeError, ValueError):
            raise ConfigError("couplings.explicit", "entries must be numbers")
    else:
        if "n_nuclei" not in sec:
            raise ConfigError("couplings.n_nuclei", "missing required field")
        n = sec["n_nuclei"]
        if not isinstance(n, int) or n < 1:
            raise ConfigError("couplings.n_nuclei", "must be a positive integer")
        if form == "uniform":
            values = [_number(sec, "uniform", "couplings")] * n
        else:
            prof = sec["exponential"]
            if not isinstance(prof, dict):
                raise ConfigError("couplings.exponential", "expects a_max and gamma")
            values = exponential_profile(n, _number(prof, "a_max", "couplings.exponential"),
                                         _number(prof, "gamma", "couplings.exponential"))
    try:
        return CouplingSet(values, eps, eps_n)
    except ValueError as exc:
        raise ConfigError("couplings", str(exc))


def _parse_initial(doc: dict, n: int) -> tuple[StateSpec, tuple[float, float, int] | None]:
    sec = doc.get("initial")
    if not isinstance(sec, dict):
        raise ConfigError("initial", "missing required section")
    if "sectors" in sec:
        columns, weights = {}, {}
        for i, entry in enumerate(sec["sectors"]):
            where = f"initial.sectors[{i}]"
            if "m" not in entry:
                raise ConfigError(f"{where}.m", "missing required field")
            m = int(entry["m"])
            try:
                ny, nx = sector_dims(n, m)
            except ValueError as exc:
                raise ConfigError(f"{where}.m", str(exc))
            y = [_complex(v, f"{where}.y") for v in entry.get("y", [0] * ny)]
            x = [_complex(v, f"{where}.x") for v in entry.get("x", [0] * nx)]
            if len(y) != ny or len(x) != nx:
                raise ConfigError(where, f"sector m={m} needs {ny} Y and {nx} X amplitudes")
            columns[m] = np.array(y + x, dtype=complex)
            weights[m] = _complex(entry.get("weight", 1.0), f"{where}.weight")
        try:
            return normalize(from_amplitudes(n, columns, weights)), None
        except ValueError as exc:
            raise ConfigError("initial.sectors", str(exc))
    if "electron" in sec:
        key = str(sec["electron"])
        if key not in ELECTRON_DIRECTIONS:
            raise ConfigError("initial.electron", f"expected one of {sorted(ELECTRON_DIRECTIONS)}")
        theta, phi = ELECTRON_DIRECTIONS[key]
    else:
        theta = _number(sec, "theta", "initial")
        phi = _number(sec, "phi", "initial", default=0.0, required=False)
    if "down_nuclei" in sec:
        mask = 0
        for k in sec["down_nuclei"]:
            if not 1 <= int(k) <= n:
                raise ConfigError("initial.down_nuclei", f"nucleus {k} outside 1..{n}")
            mask |= 1 << (int(k) - 1)
    else:
        mask = int(sec.get("nuclear_mask", 0))
    if mask < 0 or mask >> n:
        raise ConfigError("initial.nuclear_mask", f"mask {mask} exceeds {n} nuclei")
    return from_product_state(n, theta, phi, mask), (theta, phi, mask)


def _parse_times(doc: dict) -> np.ndarray:
    sec = doc.get("time")
    if not isinstance(sec, dict):
        raise ConfigError("time", "missing required section")
    t_max = _number(sec, "t_max", "time")
    if t_max <= 0:
        raise ConfigError("time.t_max", "must be positive")
    n_points = sec.get("n_points")
    if not isinstance(n_points, int) or n_points < 2:
        raise ConfigError("time.n_points", "must be an integer >= 2")
    spacing = sec.get("spacing", "linear")
    if spacing == "linear":
        return np.linspace(0.0, t_max, n_points)
    if spacing == "log":
        t_min = _number(sec, "t_min", "time", default=t_max * 1e-3, required=False)
        if not 0 < t_min < t_max:
            raise ConfigError("time.t_min", "must lie in (0, t_max)")
        return np.geomspace(t_min, t_max, n_points)
    raise ConfigError("time.spacing", "expected 'linear' or 'log'")


def parse_config(text: str) -> RunConfig:
    """Parse and validate a YAML run configuration."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<document>", f"not valid YAML: {exc}")
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "expected a mapping at top level")
    cs = _parse_couplings(doc)
    spec, product = _parse_initial(doc, cs.n_nuclei)
    times = _parse_times(doc)
    solver = doc.get("solver", "sector-eigen")
    variant = doc.get("pole_variant", "PA1")
    if isinstance(solver, str) and solver.startswith("pole-approx-"):
        solver, variant = "pole-approx", solver.rsplit("-", 1)[1]
    if solver not in SOLVERS:
        raise ConfigError("solver", f"expected one of {SOLVERS}")
    if variant not in ("PA0", "PA1"):
        raise ConfigError("pole_variant", "expected PA0 or PA1")
    out = doc.get("output", {})
    path = out.get("path") if isinstance(out, dict) else out
    return RunConfig(cs, spec, times, solver, variant, path, product, doc)


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


# --- orchestration ------------------------------------------------------------

def _laplace_solver(cs: CouplingSet):
    def solve(blocks: SectorBlocks, initial, times) -> AmplitudeTrajectory:
        if blocks.m == -1:
            return evolve_sector(blocks, initial, times)
        sol = laplace_m0.rational_solution(cs, initial[0], initial[1:])
        y = np.atleast_1d(laplace_m0.invert_y0(sol, times))[:, None]
        x = np.column_stack([laplace_m0.invert_xj(sol, j, times) for j in range(cs.n_nuclei)])
        return AmplitudeTrajectory(np.asarray(times), y, x)
    return solve


def _pole_solver(variant: str):
    def solve(blocks: SectorBlocks, initial, times) -> AmplitudeTrajectory:
        return laplace_m0.pole_approx_amplitudes(blocks, initial, times, variant)
    return solve


def _check_capacity(cfg: RunConfig) -> None:
    if cfg.solver == "oracle":
        if cfg.n_nuclei > oracle.FULL_CAP_NUCLEI:
            raise CapacityError(
                f"oracle solver limited to N<={oracle.FULL_CAP_NUCLEI}, got N={cfg.n_nuclei}")
        return
    for m in cfg.initial.sectors:
        d = sum(sector_dims(cfg.n_nuclei, m))
        if d > DENSE_CAP:
            raise CapacityError(f"sector N={cfg.n_nuclei}, m={m} has dimension {d} > cap {DENSE_CAP}")


def solve(cfg: RunConfig, solver: str | None = None, workers: int = 1) -> SpinTrajectory:
    """Compute the spin trajectory for ``cfg`` with the named solver."""
    solver = solver or cfg.solver
    cfg_solver = RunConfig(**{**cfg.__dict__, "solver": solver})
    _check_capacity(cfg_solver)
    cs, spec, times = cfg.couplings, cfg.initial, cfg.times
    if solver == "oracle":
        f = oracle.full_spin_trajectory(cs, oracle.state_from_spec(spec), times)
        return SpinTrajectory(f["t"], f["s_x"], f["s_y"], f["s_z"], f["norm"], cs.n_nuclei)
    if solver == "laplace-m0":
        touched = [m for m in spec.sectors if m not in (-1, 0)]
        if touched:
            raise ValueError(
                f"laplace-m0 covers only the m=0 sector (plus the top state); "
                f"initial state populates m={touched}; use sector-eigen")
        sector_solver = _laplace_solver(cs)
    elif solver == "pole-approx":
        sector_solver = _pole_solver(cfg.pole_variant)
    elif solver == "sector-eigen":
        sector_solver = None
    else:
        raise ValueError(f"unknown solver {solver!r}")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return evolve_state(cs, spec, times, sector_solver, map_fn=pool.map)
    return evolve_state(cs, spec, times, sector_solver)


@dataclass
class RunResult:
    trajectory: SpinTrajectory
    problems: list[str]
    path: str | None = None

    @property
    def ok(self) -> bool:
        return not self.problems


def run(cfg: RunConfig, solver: str | None = None, out: str | None = None,
        workers: int = 1) -> RunResult:
    """Solve, check invariants and write the CSV; exact solvers must pass the checks."""
    solver = solver or cfg.solver
    traj = solve(cfg, solver, workers)
    problems = traj.check()
    if solver == "pole-approx" and problems:
        # the approximation is not unitary; report but do not fail
        for p in problems:
            log.warning("pole approximation: %s", p)
        problems = []
    path = out or cfg.output
    if path:
        write_csv(traj, path)
    return RunResult(traj, problems, path)


# --- subcommands --------------------------------------------------------------

def _cmd_evolve(args) -> int:
    cfg = load_config(args.config)
    solver = args.solver or cfg.solver
    if args.variant:
        cfg.pole_variant = args.variant
    out = args.out or cfg.output or "trajectory.csv"
    result = run(cfg, solver, out, args.workers)
    print(f"{solver}: {len(result.trajectory.times)} points -> {result.path}")
    status = 0
    for p in result.problems:
        print(f"INVARIANT VIOLATION: {p}", file=sys.stderr)
        status = 1
    if args.compare:
        stem = Path(out)
        other_path = str(stem.with_name(f"{stem.stem}.{args.compare}{stem.suffix or '.csv'}"))
        other = run(cfg, args.compare, other_path, args.workers)
        diff = float(np.max(np.abs(other.trajectory.s_z - result.trajectory.s_z)))
        print(f"{args.compare}: -> {other.path}")
        print(f"max |delta s_z| ({solver} vs {args.compare}) = {diff:.6e}")
        for p in other.problems:
            print(f"INVARIANT VIOLATION ({args.compare}): {p}", file=sys.stderr)
            status = 1
    return status


def sector_table(n: int) -> str:
    lines = [f"{'m':>4} {'M_z':>5} {'C(N,m)':>10} {'C(N,m+1)':>10} {'total':>10}"]
    for m in sector_range(n):
        ny, nx = sector_dims(n, m)
        lines.append(f"{m:>4} {mz_value(n, m):>5} {ny:>10} {nx:>10} {ny + nx:>10}")
    lines.append(f"all states: {total_state_count(n)} = 2^{n + 1}")
    return "\n".join(lines)


def _cmd_sectors(args) -> int:
    print(sector_table(args.n))
    return 0


def pole_rows(cs: CouplingSet, m: int) -> list[tuple[int, str, float, float, float]]:
    """``(index, config, exact, PA0, PA1)`` for each Y-branch pole of sector ``m``."""
    basis = enumerate_sector(cs.n_nuclei, m)
    exact = laplace_m0.exact_y_branch_poles(cs, m)
    pa0 = laplace_m0.y_branch_poles(cs, m, "PA0")
    pa1 = laplace_m0.y_branch_poles(cs, m, "PA1")
    order0, order1 = np.argsort(pa0, kind="stable"), np.argsort(pa1, kind="stable")
    return [(i, set_label(int(basis.y_configs[order1[i]])), exact[i], pa0[order0[i]],
             pa1[order1[i]]) for i in range(len(exact))]


def _cmd_poles(args) -> int:
    cfg = load_config(args.config)
    if not 0 <= args.m <= cfg.n_nuclei - 1:
        print(f"error: m must lie in [0, {cfg.n_nuclei - 1}]", file=sys.stderr)
        return 2
    rows = pole_rows(cfg.couplings, args.m)
    if args.format == "csv":
        lines = ["index,config,exact,pa0,pa1"]
        lines += [f"{i},{c},{e:.17g},{p0:.17g},{p1:.17g}" for i, c, e, p0, p1 in rows]
    else:
        lines = [f"{'#':>3} {'config':>12} {'exact':>22} {'PA0':>22} {'PA1':>22}"]
        lines += [f"{i:>3} {c:>12} {e:22.15g} {p0:22.15g} {p1:22.15g}" for i, c, e, p0, p1 in rows]
        if args.m == 0:
            poles = laplace_m0.find_poles(laplace_m0.char_poly_coeffs(cfg.couplings))
            lines.append("all poles of D_{N+1}: " + " ".join(f"{p:.15g}" for p in poles))
    text = "\n".join(lines)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


def _random_product_state(rng: np.random.Generator, n: int) -> tuple[float, float, int]:
    return float(np.arccos(rng.uniform(-1, 1))), float(rng.uniform(0, 2 * np.pi)), \
        int(rng.integers(0, 1 << n))


def oracle_check(cs: CouplingSet, states: list[StateSpec], times, tol: float = 1e-9
                 ) -> list[float]:
    """Max abs spin-component error between sector route and brute force, per state."""
    errors = []
    for spec in states:
        traj = evolve_state(cs, spec, times)
        ref = oracle.full_spin_trajectory(cs, oracle.state_from_spec(spec), times)
        errors.append(max(float(np.max(np.abs(traj.s_x - ref["s_x"]))),
                          float(np.max(np.abs(traj.s_y - ref["s_y"]))),
                          float(np.max(np.abs(traj.s_z - ref["s_z"])))))
    return errors


def _cmd_oracle_check(args) -> int:
    cfg = load_config(args.config)
    if cfg.n_nuclei > oracle.FULL_CAP_NUCLEI:
        print(f"error: oracle limited to N<={oracle.FULL_CAP_NUCLEI}", file=sys.stderr)
        return 2
    states = [cfg.initial]
    rng = np.random.default_rng(args.seed)
    for _ in range(args.random):
        states.append(from_product_state(cfg.n_nuclei, *_random_product_state(rng, cfg.n_nuclei)))
    errors = oracle_check(cfg.couplings, states, cfg.times)
    worst = max(errors)
    for i, e in enumerate(errors):
        label = "config state" if i == 0 else f"random state {i}"
        print(f"{label}: max |delta s| = {e:.3e}")
    verdict = "PASS" if worst <= args.tol else "FAIL"
    print(f"{verdict} oracle-check: max error {worst:.3e} (tol {args.tol:g})")
    return 0 if verdict == "PASS" else 1


def _cmd_liouville_check(args) -> int:
    cfg = load_config(args.config)
    if cfg.n_nuclei > oracle.LIOUVILLE_CAP_NUCLEI:
        print(f"error: Liouville check limited to N<={oracle.LIOUVILLE_CAP_NUCLEI}", file=sys.stderr)
        return 2
    times = cfg.times if args.points is None else np.linspace(0, cfg.times[-1], args.points)
    psi = oracle.state_from_spec(cfg.initial)
    blocks = oracle.liouville_evolve(oracle.BlockDensity.from_state(psi), cfg.couplings, times,
                                     tol=args.step_tol)
    ref = oracle.full_spin_trajectory(cfg.couplings, psi, times)
    sz = np.array([b.spin()[2] for b in blocks])
    trace = np.array([b.trace() for b in blocks])
    err = float(np.max(np.abs(sz - ref["s_z"])))
    drift = float(np.max(np.abs(trace - 1.0)))
    ok = err <= args.tol and drift <= 1e-9
    print(f"max |s_z(Liouville) - s_z(Schrodinger)| = {err:.3e} (tol {args.tol:g})")
    print(f"max |tr A + tr C - 1| = {drift:.3e} (tol 1e-09)")
    print(f"{'PASS' if ok else 'FAIL'} liouville-check")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qdspin", description="Exact central-spin dynamics")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="compute s(t) and write CSV")
    p.add_argument("config")
    p.add_argument("--solver", choices=SOLVERS)
    p.add_argument("--variant", choices=("PA0", "PA1"), help="pole-approximation variant")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--compare", choices=SOLVERS, help="second solver for a diff summary")
    p.set_defaults(func=_cmd_evolve)

    p = sub.add_parser("sectors", help="print the sector table")
    p.add_argument("n", type=int)
    p.set_defaults(func=_cmd_sectors)

    p = sub.add_parser("poles", help="exact vs approximate poles")
    p.add_argument("config")
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_poles)

    p = sub.add_parser("oracle-check", help="compare against full-space brute force")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--random", type=int, default=0, help="extra random product states")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=_cmd_oracle_check)

    p = sub.add_parser("liouville-check", help="compare Liouville integration to Schrodinger")
    p.add_argument("config")
    p.add_argument("--points", type=int)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--step-tol", type=float, default=1e-9)
    p.set_defaults(func=_cmd_liouville_check)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (CapacityError, DegeneratePolesError, NumericError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: every module as a subcommand, CSV/JSON out.

Outputs are plain data meant for external plotting.  Every CSV has a
header row and full-precision decimal floats; when --out is given, a
<out>.manifest.json records the resolved configuration so a run can be
reproduced byte for byte.  Exit codes: 0 success, 2 configuration error
(message names the offending field), 1 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict

import numpy as np

from . import __version__, abm, cusp, games, qre, sdt, twin, verify
from .fixedpoint import FixedPointError
from .logit import ChoiceProblem, logit_probs, sample_gumbel_argmax, tv_distance

NAMED_GAMES = {
    "chicken": games.TSPoint(1.5, 0.5),
    "harmony": games.TSPoint(0.5, 0.5),
    "stag-hunt": games.TSPoint(0.5, -0.5),
    "pd": games.TSPoint(1.5, -0.5),
}


class ConfigError(Exception):
    """Invalid configuration; the message names the offending field."""


def _fmt(value) -> str:
    """Full-precision CSV field."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def parse_range(text: str, field: str) -> np.ndarray:
    """Parse 'start:stop:step' into an inclusive grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{field}: expected start:stop:step, got {text!r}")
    try:
        a, b, step = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"{field}: non-numeric component in {text!r}") from None
    if step <= 0:
        raise ConfigError(f"{field}: step must be positive, got {step}")
    if b < a:
        raise ConfigError(f"{field}: stop {b} below start {a}")
    n = int(round((b - a) / step))
    grid = a + step * np.arange(n + 1)
    return grid[grid <= b + 1e-12 * max(1.0, abs(b))]


def load_game(spec_text: str) -> games.Game2x2:
    """A named game or a path to a payoff JSON file."""
    if spec_text == "chicken-paper":
        return games.chicken_paper()
    if spec_text in NAMED_GAMES:
        return games.ts_game(NAMED_GAMES[spec_text])
    if not os.path.exists(spec_text):
        raise ConfigError(
            f"game: {spec_text!r} is neither a file nor one of "
            f"{sorted([*NAMED_GAMES, 'chicken-paper'])}"
        )
    with open(spec_text) as fh:
        try:
            return games.game_from_json(fh.read())
        except ValueError as exc:
            raise ConfigError(f"game: {exc}") from None


def _xi_scale(args) -> float:
    """Inputs on the rescaled axis are multiplied by this to become
    internal values; outputs divide by it."""
    return 4.0 if getattr(args, "xi_convention", "canonical") == "eq45" else 1.0


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get("CRITMKT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"seed: CRITMKT_SEED={env!r} is not an integer") from None
    return 0


def _apply_threads(args) -> None:
    n = getattr(args, "threads", None)
    if n is None:
        env = os.environ.get("CRITMKT_THREADS")
        n = int(env) if env and env.isdigit() else None
    if n is None:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(int(n))
    except ImportError:
        pass


def write_csv(path: str | None, header: list[str], rows) -> None:
    """CSV to the path or stdout; header always present."""
    stream = open(path, "w", newline="") if path else sys.stdout
    try:
        writer = csv.writer(stream)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    finally:
        if path:
            stream.close()


def _write_manifest(args, outputs: list[str], started: float) -> None:
    """Reproducibility sidecar for file outputs."""
    if not outputs:
        return
    config = {
        k: v
        for k, v in sorted(vars(args).items())
        if k != "func" and not callable(v)
    }
    manifest = {
        "subcommand": args.subcommand,
        "config": config,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "outputs": outputs,
        "duration_s": time.time() - started,
    }
    with open(outputs[0] + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, default=str)
        fh.write("\n")


# ---------------------------------------------------------------- subcommands


def cmd_gumbel_check(args) -> int:
    utilities = tuple(float(u) for u in args.utilities.split(","))
    if len(utilities) < 2:
        raise ConfigError("utilities: need at least two comma-separated values")
    if args.xi <= 0:
        raise ConfigError("xi: Monte Carlo sampling needs xi > 0")
    problem = ChoiceProblem(utilities=utilities, xi=args.xi)
    analytic = logit_probs(problem)
    empirical = sample_gumbel_argmax(problem, n=args.samples, seed=_resolve_seed(args))
    payload = {
        "analytic": analytic.tolist(),
        "empirical": empirical.tolist(),
        "tv_distance": tv_distance(analytic, empirical),
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        return 0
    print(text)
    return 0


def cmd_sdt_sweep(args) -> int:
    grid = parse_range(args.xi_range, "xi-range")
    params = games.SDTParams(k=args.k, h=args.h, f=args.f, J=args.j, xi=max(grid[0], 0.0))
    branch = sdt.xi_sweep(params, grid)
    rows = []
    for xi, eq_set in zip(branch.params, branch.sets):
        for value, label in zip(eq_set.points[:, 0], eq_set.stability):
            rows.append((xi, value, label))
    write_csv(args.out, ["xi", "equilibrium", "stability"], rows)
    return 0


def cmd_qre_surface(args) -> int:
    game = load_game(args.game)
    scale = _xi_scale(args)
    xi1 = parse_range(args.xi1, "xi1") * scale
    xi2 = parse_range(args.xi2, "xi2") * scale
    result = qre.solve_grid(game, xi1, xi2)
    counts = result["counts"]
    rows = []
    for k in range(len(result["x1"])):
        i, j = result["i"][k], result["j"][k]
        rho = result["rho"][k]
        label = "critical" if abs(rho - 1.0) <= 1e-6 else ("stable" if rho < 1.0 else "unstable")
        rows.append(
            (
                result["xi1"][k] / scale,
                result["xi2"][k] / scale,
                result["x1"][k],
                result["x2"][k],
                label,
                qre.region_label(int(counts[i, j])),
            )
        )
    write_csv(args.out, ["xi1", "xi2", "x1", "x2", "stability", "region"], rows)
    return 0


def cmd_qre_critical(args) -> int:
    game = load_game(args.game)
    scale = _xi_scale(args)
    cs = qre.critical_set(
        game,
        xi1_max=args.xi1_max * scale,
        xi2_max=args.xi2_max * scale,
        n_rows=args.rows,
    )
    rows = [
        (p[0] / scale, p[1] / scale, s[0], s[1]) for p, s in zip(cs.params, cs.states)
    ]
    write_csv(args.out, ["xi1", "xi2", "x1", "x2"], rows)
    if not cs.multiplicity_possible:
        print("note: |g_self| >= |g12| for a player; no fold exists", file=sys.stderr)
    return 0


def cmd_cusp_surface(args) -> int:
    u1_grid = parse_range(args.u1, "u1")
    u2_grid = parse_range(args.u2, "u2")
    rows = []
    for u1 in u1_grid:
        for u2 in u2_grid:
            control = cusp.CuspControl(u1, u2)
            region = cusp.classify_region(control).value
            points = cusp.stationary_points(control)
            for value, label in zip(points.points[:, 0], points.stability):
                rows.append((u1, u2, value, label, region))
    write_csv(args.out, ["u1", "u2", "root", "stability", "region"], rows)
    return 0


def cmd_cusp_critical(args) -> int:
    line = cusp.critical_boundary(args.u1_max, args.n)
    write_csv(args.out, ["u1", "u2"], [tuple(r) for r in line])
    return 0


def cmd_cusp_density(args) -> int:
    if args.xi <= 0:
        raise ConfigError("xi: density needs xi > 0")
    density = cusp.StationaryDensity(cusp.CuspControl(args.u1, args.u2), xi=args.xi)
    xs = np.linspace(-density.half_width, density.half_width, args.n)
    ps = density.pdf(xs)
    write_csv(args.out, ["x", "p"], zip(xs, ps))
    return 0


def cmd_twin_crises(args) -> int:
    game = load_game(args.game)
    scale = _xi_scale(args)
    grid = parse_range(args.xi1, "xi1") * scale
    if args.direction == "down":
        grid = grid[::-1]
    markets = twin.CoupledMarkets(game, xi1=float(grid[0]), xi2=args.xi2 * scale)
    start = None
    if args.start is not None:
        parts = args.start.split(",")
        if len(parts) != 2:
            raise ConfigError(f"start: expected 'x1,x2', got {args.start!r}")
        start = np.array([float(p) for p in parts])
    try:
        result = twin.one_sided_sweep(markets, grid, player=1, start_state=start)
    except ValueError as exc:
        eqs = twin.joint_equilibria(twin.CoupledMarkets(game, float(grid[0]), args.xi2 * scale))
        listing = "; ".join(
            f"({p[0]:.6f},{p[1]:.6f}) {s}" for p, s in zip(eqs.points, eqs.stability)
        )
        raise ConfigError(f"start: {exc}; equilibria at the first grid point: {listing}") from None

    jumped = np.zeros(len(grid), dtype=bool)
    for event in result.jumps:
        inside = (grid >= event.param_lo) & (grid <= event.param_hi)
        idx = np.flatnonzero(inside)
        if idx.size:
            jumped[idx[-1] if args.direction == "up" else idx[0]] = True
    rows = zip(grid / scale, result.states[:, 0], result.states[:, 1], jumped)
    write_csv(args.out, ["xi1", "x1", "x2", "jumped"], rows)
    summary = {
        "direction": result.direction,
        "n_jumps": len(result.jumps),
        "jumps": [
            {
                "xi1": event.location / scale,
                "pre_state": event.pre_state.tolist(),
                "post_state": event.post_state.tolist(),
            }
            for event in result.jumps
        ],
    }
    print(json.dumps(summary, indent=2))
    return 0


def cmd_abm_run(args) -> int:
    with open(args.config) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc})") from None
    if args.seed is not None:
        raw["seed"] = int(args.seed)
    raw.setdefault("seed", _resolve_seed(args))
    try:
        config = abm.ABMConfig(**raw)
    except TypeError as exc:
        raise ConfigError(f"config: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"config: {exc}") from None
    history = abm.run(config)
    rows = zip(range(len(history.p)), history.p, history.x)
    write_csv(args.out, ["t", "p", "x"], rows)
    if args.choices_out:
        if history.choices is None:
            raise ConfigError("choices-out: config has store_choices false")
        np.savetxt(args.choices_out, history.choices, fmt="%d", delimiter=",")
    print(json.dumps(history.summary(), indent=2))
    return 0


def cmd_transform(args) -> int:
    game = load_game(args.game)
    payload = {}
    for player in (1, 2):
        gp = games.to_gparams(game, player)
        zp = games.gparams_to_sdt(gp, xi=args.xi)
        payload[f"player{player}"] = {
            "g0": gp.g0,
            "g_self": gp.g_self,
            "g_other": gp.g_other,
            "g12": gp.g12,
            "k": zp.k,
            "h": zp.h,
            "f": zp.f,
            "J": zp.J,
            "xi": zp.xi,
        }
    print(json.dumps(payload, indent=2))
    return 0


def cmd_classify_ts(args) -> int:
    klass = games.classify_ts(games.TSPoint(args.T, args.S))
    labels = ", ".join(sorted(klass.pure_ne)) if klass.pure_ne else "none"
    print(f"{klass.name.value}, NE: {labels}")
    return 0


def cmd_verify(args) -> int:
    failures = verify.run_suites(args.suite)
    return 1 if failures else 0


# --------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="critmkt",
        description="Equilibria, bifurcations, and simulation for binary-choice market models.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, seed=False, out=True):
        if seed:
            p.add_argument("--seed", type=int, default=None, help="RNG seed (env CRITMKT_SEED)")
        if out:
            p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--threads", type=int, default=None, help="cap BLAS/OpenMP threads (env CRITMKT_THREADS)")

    p = sub.add_parser("gumbel-check", help="Monte Carlo check of the logit closed form")
    p.add_argument("--utilities", required=True, help="comma-separated utilities")
    p.add_argument("--xi", type=float, required=True)
    p.add_argument("--samples", type=int, default=1_000_000)
    common(p, seed=True)
    p.set_defaults(func=cmd_gumbel_check)

    p = sub.add_parser("sdt-sweep", help="equilibria of the social-field model over xi")
    p.add_argument("--h", type=float, default=0.0)
    p.add_argument("--j", type=float, required=True)
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--f", type=float, default=0.0)
    p.add_argument("--xi-range", required=True, help="start:stop:step")
    common(p)
    p.set_defaults(func=cmd_sdt_sweep)

    p = sub.add_parser("qre-surface", help="joint equilibria over a (xi1, xi2) grid")
    p.add_argument("--game", required=True)
    p.add_argument("--xi1", required=True, help="start:stop:step")
    p.add_argument("--xi2", required=True, help="start:stop:step")
    p.add_argument("--xi-convention", choices=("canonical", "eq45"), default="canonical",
                   help="axis scale for xi inputs/outputs; eq45 values are 4x coarser")
    common(p)
    p.set_defaults(func=cmd_qre_surface)

    p = sub.add_parser("qre-critical", help="fold curve between one- and three-equilibrium regions")
    p.add_argument("--game", required=True)
    p.add_argument("--xi1-max", type=float, default=4.0)
    p.add_argument("--xi2-max", type=float, default=4.0)
    p.add_argument("--rows", type=int, default=61)
    p.add_argument("--xi-convention", choices=("canonical", "eq45"), default="canonical",
                   help="axis scale for xi inputs/outputs; eq45 values are 4x coarser")
    common(p)
    p.set_defaults(func=cmd_qre_critical)

    p = sub.add_parser("cusp-surface", help="stationary points over a (u1, u2) grid")
    p.add_argument("--u1", required=True, help="start:stop:step (write --u1=-1:3:0.5 for negative starts)")
    p.add_argument("--u2", required=True, help="start:stop:step (write --u2=-1:1:0.5 for negative starts)")
    common(p)
    p.set_defaults(func=cmd_cusp_surface)

    p = sub.add_parser("cusp-critical", help="fold boundary 4*u1^3 = 27*u2^2")
    p.add_argument("--u1-max", type=float, default=3.0)
    p.add_argument("--n", type=int, default=201)
    common(p)
    p.set_defaults(func=cmd_cusp_critical)

    p = sub.add_parser("cusp-density", help="stationary density of the noisy gradient flow")
    p.add_argument("--u1", type=float, required=True)
    p.add_argument("--u2", type=float, required=True)
    p.add_argument("--xi", type=float, required=True)
    p.add_argument("--n", type=int, default=501)
    common(p)
    p.set_defaults(func=cmd_cusp_density)

    p = sub.add_parser("twin-crises", help="one-sided uncertainty sweep of coupled markets")
    p.add_argument("--game", required=True)
    p.add_argument("--xi2", type=float, required=True)
    p.add_argument("--xi1", required=True, help="start:stop:step")
    p.add_argument("--direction", choices=("up", "down"), default="up")
    p.add_argument("--start", default=None, help="starting state 'x1,x2' when several branches exist")
    p.add_argument("--xi-convention", choices=("canonical", "eq45"), default="canonical",
                   help="axis scale for xi inputs/outputs; eq45 values are 4x coarser")
    common(p)
    p.set_defaults(func=cmd_twin_crises)

    p = sub.add_parser("abm-run", help="agent-based market simulation")
    p.add_argument("--config", required=True, help="JSON file mirroring ABMConfig")
    p.add_argument("--choices-out", default=None, help="per-agent choice matrix CSV")
    common(p, seed=True)
    p.set_defaults(func=cmd_abm_run)

    p = sub.add_parser("transform", help="payoffs to interaction parameters, both players")
    p.add_argument("--game", required=True)
    p.add_argument("--xi", type=float, default=1.0)
    common(p, out=False)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("classify-ts", help="name the game at a temptation/safety point")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--S", type=float, required=True)
    common(p, out=False)
    p.set_defaults(func=cmd_classify_ts)

    p = sub.add_parser("verify", help="run the invariant suites")
    p.add_argument(
        "--suite",
        default="all",
        choices=[*verify.SUITES, "all"],
        help="suite name or 'all'",
    )
    common(p, seed=False, out=False)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.time()
    try:
        _apply_threads(args)
        code = args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (FixedPointError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    if code == 0 and getattr(args, "out", None):
        outputs = [args.out]
        if getattr(args, "choices_out", None):
            outputs.append(args.choices_out)
        _write_manifest(args, outputs, started)
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point and figure-reproduction commands.

Every command is deterministic given its config plus seed, writes plain
CSV/JSON, and drops the fully resolved configuration next to its outputs.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import analysis, hilbert, meanfield, phasespace, propagate, separatrix
from .hilbert import DimerParams
from .meanfield import IntegrationError, SingularityError
from .phasespace import TwaError
from .propagate import PropagationError

_FMT = "%.12g"


class ConfigError(ValueError):
    pass


def _load_config(path: str) -> dict:
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _write_resolved_config(args: argparse.Namespace, output: Path) -> None:
    skip = {"func", "config"}
    lines = [f"{k} = {v}" for k, v in sorted(vars(args).items()) if k not in skip]
    output.with_suffix(output.suffix + ".config").write_text("\n".join(lines) + "\n")


def _params(args) -> DimerParams:
    try:
        return DimerParams(theta=args.theta, n_particles=args.n_particles)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_stability_scan(args) -> None:
    thetas = np.arange(args.theta_min, args.theta_max + args.step / 2, args.step)
    rows = []
    for theta in thetas:
        params = DimerParams(theta=float(theta), n_particles=2)
        lam = meanfield.stability_exponent(params)
        rows.append((theta, lam, int(lam == 0.0)))
    out = Path(args.output)
    np.savetxt(out, np.array(rows), delimiter=",", fmt=_FMT,
               header="theta,lambda_s,stable", comments="")
    _write_resolved_config(args, out)


def cmd_phase_portrait(args) -> None:
    params = _params(args)
    out = Path(args.output)
    stem = out.with_suffix("")

    z, phi, h = meanfield.phase_portrait_grid(params, args.grid, args.grid)
    zz, pp = np.meshgrid(z, phi, indexing="ij")
    np.savetxt(out, np.column_stack([zz.ravel(), pp.ravel(), h.ravel()]),
               delimiter=",", fmt=_FMT, header="z,phi,h", comments="")

    reports = meanfield.find_fixed_points(params)
    fp_rows = [(r.location.z, r.location.phi,
                1.0 if r.classification == "hyperbolic" else 0.0, r.exponent)
               for r in reports]
    np.savetxt(f"{stem}_fixed_points.csv", np.array(fp_rows), delimiter=",",
               fmt=_FMT, header="z,phi,hyperbolic,exponent", comments="")

    if meanfield.antihom_is_unstable(params):
        poly = separatrix.separatrix_polyline(params)
        np.savetxt(f"{stem}_separatrix.csv", poly, delimiter=",", fmt=_FMT,
                   header="z,phi", comments="")
    _write_resolved_config(args, out)


def cmd_otoc(args) -> None:
    params = _params(args)
    ts = separatrix.time_scales(params, args.omega)
    t_max = args.t_max if args.t_max is not None else 1.5 * ts.tau_E
    times = np.linspace(0.0, t_max, args.n_times)

    state = hilbert.coherent_state(params, 0.0, 0.0)
    prop = propagate.make_propagator(hilbert.build_hamiltonian(params),
                                     backend=args.backend)
    label = "coherent(0,0)"
    t0 = args.squeeze_t0
    if t0 is not None:
        if t0 == "auto":
            t0 = -ts.tau_E / 2.0
        else:
            t0 = float(t0)
        state = hilbert.squeeze_by_backward_evolution(params, state, t0, prop)
        label = f"squeezed t0={t0:.6g}"
    series = propagate.otoc(prop, state, times, params=params, state_label=label)

    o_exact = separatrix.classical_otoc(params, args.omega, t=times)
    o_short = separatrix.otoc_short_asymptote(params, t=times)
    o_long = separatrix.otoc_long_asymptote(params, args.omega, t=times)
    regimes = [separatrix.regime_schedule(ts, t) for t in times]

    out = Path(args.output)
    with open(out, "w") as fh:
        fh.write("t,C,O,O_short,O_long,regime\n")
        for i, t in enumerate(times):
            fh.write(",".join([format(t, ".12g"), format(series.values[i], ".12g"),
                               format(o_exact[i], ".12g"), format(o_short[i], ".12g"),
                               format(o_long[i], ".12g"), regimes[i]]) + "\n")
    _write_resolved_config(args, out)


def cmd_husimi(args) -> None:
    params = _params(args)
    ts = separatrix.time_scales(params, 1.0)
    t_max = args.t_max if args.t_max is not None else ts.tau_E
    frame_times = np.linspace(0.0, t_max, args.frames)

    state = hilbert.coherent_state(params, 0.0, 0.0)
    prop = propagate.make_propagator(hilbert.build_hamiltonian(params),
                                     backend=args.backend)
    out = Path(args.output)
    stem, suffix = out.with_suffix(""), out.suffix or ".csv"
    for i, t in enumerate(frame_times):
        frame_state = propagate.evolve(prop, state, float(t)) if t else state
        grid = phasespace.husimi(params, frame_state, args.grid, args.grid,
                                 time=float(t))
        path = Path(f"{stem}_{i:04d}{suffix}")
        if args.binary:
            grid.save_binary(path)
        else:
            grid.save_csv(path)
    _write_resolved_config(args, out)


def cmd_scan(args) -> None:
    thetas = np.linspace(args.theta_min, args.theta_max, args.theta_count)
    n_list = [int(x) for x in args.n_list.split(",")]
    rows = analysis.theta_scan(thetas, n_list, omega=args.omega,
                               n_time_points=args.n_times,
                               detect_kinks=args.kinks)
    out = Path(args.output)
    out.write_text(analysis.scan_to_csv(rows))
    _write_resolved_config(args, out)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dimer-otoc",
        description="Bose-Hubbard dimer OTOC scrambling toolkit")
    parser.add_argument("--config", help="key=value config file; explicit flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stability-scan", help="lambda_s over the theta range")
    p.add_argument("--theta-min", type=float, default=-np.pi / 2)
    p.add_argument("--theta-max", type=float, default=np.pi / 2)
    p.add_argument("--step", type=float, default=0.005)
    p.add_argument("--output", default="stability.csv")
    p.set_defaults(func=cmd_stability_scan)

    p = sub.add_parser("phase-portrait", help="energy contours, fixed points, separatrix")
    p.add_argument("--theta", type=float, default=1.35)
    p.add_argument("--n-particles", type=int, default=1000)
    p.add_argument("--grid", type=int, default=201)
    p.add_argument("--output", default="portrait.csv")
    p.set_defaults(func=cmd_phase_portrait)

    p = sub.add_parser("otoc", help="quantum OTOC with analytic overlay columns")
    p.add_argument("--theta", type=float, default=1.35)
    p.add_argument("--n-particles", type=int, default=1000)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--backend", default="eigendecomposition")
    p.add_argument("--n-times", type=int, default=400)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--squeeze-t0", default=None,
                   help="backward-evolution squeezing time; 'auto' = -tau_E/2")
    p.add_argument("--output", default="otoc.csv")
    p.set_defaults(func=cmd_otoc)

    p = sub.add_parser("husimi", help="numbered Husimi frames of the evolving state")
    p.add_argument("--theta", type=float, default=1.35)
    p.add_argument("--n-particles", type=int, default=1000)
    p.add_argument("--frames", type=int, default=8)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--grid", type=int, default=201)
    p.add_argument("--backend", default="eigendecomposition")
    p.add_argument("--binary", action="store_true")
    p.add_argument("--output", default="husimi.csv")
    p.set_defaults(func=cmd_husimi)

    p = sub.add_parser("scan", help="fitted exponents over a (theta, N) grid")
    p.add_argument("--theta-min", type=float, default=1.15)
    p.add_argument("--theta-max", type=float, default=1.45)
    p.add_argument("--theta-count", type=int, default=12)
    p.add_argument("--n-list", default="100,1000")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--n-times", type=int, default=400)
    p.add_argument("--kinks", action="store_true")
    p.add_argument("--output", default="scan.csv")
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = _build_parser()
    try:
        # Pre-parse --config so file values become defaults, flags override.
        pre, _ = parser.parse_known_args(argv)
        if pre.config:
            file_values = _load_config(pre.config)
            for action in parser._subparsers._group_actions[0].choices.values():
                known = {a.dest for a in action._actions}
                action.set_defaults(**{k: _coerce(action, k, v)
                                       for k, v in file_values.items() if k in known})
        args = parser.parse_args(argv)
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (PropagationError, IntegrationError, SingularityError, TwaError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


def _coerce(subparser, key, value):
    for action in subparser._actions:
        if action.dest == key and action.type is not None:
            return action.type(value)
        if action.dest == key and isinstance(action.const, bool):
            return value.lower() in ("1", "true", "yes")
    return value


if __name__ == "__main__":
    sys.exit(main())

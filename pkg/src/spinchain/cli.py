"""Command-line front end: fidelity and detector grids as CSV plus JSON metadata.

Every grid subcommand writes two files: the CSV named by ``--out`` (header
``l,t,value``, time as the outer loop, 12 significant digits) and a metadata
sidecar ``<out>.meta.json`` echoing the resolved parameters, the convention
fingerprint, and the relevant tolerances.  Outputs are byte-identical across
re-runs and worker counts.

Exit codes: 0 success, 2 unusable arguments or config file, 3 a numerical
check failed or a quadrature did not converge, 4 output could not be written.
"""
from __future__ import annotations

import argparse
import cmath
import concurrent.futures
import json
import math
import pathlib
import sys

import numpy as np

from . import __version__
from .chain import CONVENTIONS, ChainSpec, InitialState, QdpEvent, conventions_hash
from .green1 import green1_reduced, reduced_profile
from .green2 import QuadratureError
from .harper import HarperSpec, floquet_step, qdp_and_detect
from .protocols import FidelityGrid, UnitaryQdpEngine, fidelity_grid
from . import oracle

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_CSV_FORMAT = "l,t,value; t outer, l inner; 12 significant digits"


class CheckFailure(RuntimeError):
    """A validation subcommand found a number outside its tolerance."""


# --------------------------------------------------------------------------
# Parser construction
# --------------------------------------------------------------------------


def _add_chain_flags(p: argparse.ArgumentParser, *, boundary_default: str = "open") -> None:
    p.add_argument("--n", type=int, default=100, help="number of sites")
    p.add_argument("--boundary", choices=("open", "closed"), default=boundary_default)
    p.add_argument("--j", type=float, default=0.5, help="exchange strength")
    p.add_argument("--delta", type=float, default=1.0, help="interaction anisotropy")


def _add_common_flags(p: argparse.ArgumentParser, default_out: str) -> None:
    p.add_argument("--out", default=default_out, help="output CSV path")
    p.add_argument("--config", default=None, help="key = value file; flags override it")
    p.add_argument("--threads", type=int, default=1, help="worker threads for grid columns")
    p.add_argument("--tol", type=float, default=None, help="tolerance override for checks")


def _add_grid_flags(p: argparse.ArgumentParser, tmax: float, dt: float) -> None:
    p.add_argument("--lmin", type=int, default=1)
    p.add_argument("--lmax", type=int, default=None, help="defaults to --n")
    p.add_argument("--tmin", type=float, default=0.0)
    p.add_argument("--tmax", type=float, default=tmax)
    p.add_argument("--dt", type=float, default=dt)


def _add_qdp_flags(p: argparse.ArgumentParser, *, site: int, t0: float) -> None:
    p.add_argument("--site", type=int, default=site, help="site acted on by the local process")
    p.add_argument("--t0", type=float, default=t0, help="time of the local process")


def _add_gate_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gamma-abs", type=float, default=0.0, help="stay amplitude (real)")
    p.add_argument("--delta-abs", type=float, default=1.0, help="flip amplitude magnitude")
    p.add_argument("--delta-phase", type=float, default=0.0, help="flip amplitude phase (radians)")


def _add_harper_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--g", type=float, default=1.0, help="kick potential strength")
    p.add_argument("--tau", type=float, default=0.1, help="kick interval")
    p.add_argument("--eta", type=float, default=math.sqrt(2.0), help="potential commensuration")
    p.add_argument("--kicks", type=int, default=500, help="number of kick periods to read out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinchain",
        description="Spin-chain state transfer with instantaneous local interruptions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fidelity", help="free-transfer fidelity grid")
    _add_chain_flags(p)
    _add_grid_flags(p, tmax=50.0, dt=0.25)
    p.add_argument("--alpha2", type=float, default=None,
                   help="|alpha|^2 of the encoded state; omit for the Bloch average")
    _add_common_flags(p, "fidelity.csv")

    p = sub.add_parser("qdp-diff", help="fidelity change from a mid-evolution measurement")
    _add_chain_flags(p)
    _add_grid_flags(p, tmax=50.0, dt=0.25)
    _add_qdp_flags(p, site=20, t0=10.0)
    _add_common_flags(p, "qdp_diff.csv")

    p = sub.add_parser("unitary-qdp", help="fidelity grid with a mid-evolution local gate")
    _add_chain_flags(p, boundary_default="closed")
    _add_grid_flags(p, tmax=30.0, dt=0.25)
    _add_qdp_flags(p, site=15, t0=7.5)
    _add_gate_flags(p)
    p.add_argument("--diff", action="store_true", help="emit the change against free evolution")
    _add_common_flags(p, "unitary_qdp.csv")

    p = sub.add_parser("two-magnon-split", help="pair-channel fidelity contribution by part")
    _add_chain_flags(p, boundary_default="closed")
    _add_grid_flags(p, tmax=30.0, dt=0.25)
    _add_qdp_flags(p, site=10, t0=5.0)
    _add_gate_flags(p)
    p.add_argument("--part", choices=("bound", "scattering", "total"), default="scattering")
    _add_common_flags(p, "two_magnon_split.csv")

    p = sub.add_parser("harper", help="kicked-chain transfer fidelity grid")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--boundary", choices=("open", "closed"), default="open")
    _add_harper_flags(p)
    p.add_argument("--alpha2", type=float, default=None,
                   help="|alpha|^2 of the encoded state; omit for the Bloch average")
    _add_common_flags(p, "harper.csv")

    p = sub.add_parser("detector", help="occupation-difference profile after a measurement")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--boundary", choices=("open", "closed"), default="open")
    _add_harper_flags(p)
    p.add_argument("--qdp-site", type=int, default=1, help="measured site")
    p.add_argument("--qdp-kick", type=int, default=5, help="kick count at measurement")
    p.add_argument("--alpha2", type=float, default=0.5)
    _add_common_flags(p, "detector.csv")

    p = sub.add_parser("oracle-check", help="cross-validate against dense matrix evolution")
    p.add_argument("--n", type=int, default=12)
    _add_common_flags(p, "oracle_check.json")

    p = sub.add_parser("calibrate", help="verify propagator conventions against dense evolution")
    p.add_argument("--n", type=int, default=12)
    _add_common_flags(p, "calibration.json")

    return parser


# --------------------------------------------------------------------------
# Config file support
# --------------------------------------------------------------------------


def _parse_config_file(path: str) -> dict[str, str]:
    """Read ``key = value`` lines; '#' starts a comment, blank lines ignored."""
    entries: dict[str, str] = {}
    text = pathlib.Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        entries[key.replace("-", "_")] = value
    return entries


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    """Parse argv; when --config names a file, use it for defaults (flags win)."""
    args = parser.parse_args(argv)
    if getattr(args, "config", None) is None:
        return args
    entries = _parse_config_file(args.config)
    subparser = _subparser_for(parser, args.command)
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, value in entries.items():
        if key == "command":
            raise ValueError("config files cannot change the subcommand")
        action = actions.get(key)
        if action is None:
            raise ValueError(f"config key {key!r} is not a flag of {args.command!r}")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            defaults[key] = action.type(value)
        else:
            defaults[key] = value
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def _subparser_for(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise ValueError(f"no subcommand {command!r}")


# --------------------------------------------------------------------------
# Output helpers
# --------------------------------------------------------------------------


def _grid_csv(l_values, t_values, values: np.ndarray) -> str:
    lines = ["l,t,value"]
    for j, t in enumerate(t_values):
        for i, l in enumerate(l_values):
            lines.append(f"{l},{t:.11e},{values[i, j]:.11e}")
    return "\n".join(lines) + "\n"


def _write_outputs(args: argparse.Namespace, payload: str, meta: dict) -> None:
    out = pathlib.Path(args.out)
    out.write_text(payload)
    sidecar = out.with_name(out.name + ".meta.json")
    sidecar.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    print(f"wrote {out} and {sidecar}")


def _metadata(args: argparse.Namespace, extra: dict | None = None) -> dict:
    """Deterministic sidecar: parameter echo, conventions, package version."""
    skip = {"out", "config", "threads", "command"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    meta = {
        "command": args.command,
        "parameters": params,
        "conventions": {
            "fingerprint": conventions_hash(),
            "entries": CONVENTIONS,
            "csv_format": _CSV_FORMAT,
        },
        "format_version": 1,
        "package_version": __version__,
    }
    if extra:
        meta.update(extra)
    return meta


def _chain_spec(args: argparse.Namespace) -> ChainSpec:
    return ChainSpec(args.n, args.boundary, args.j, args.delta)


def _grid_axes(args: argparse.Namespace) -> tuple[list[int], list[float]]:
    lmax = args.lmax if args.lmax is not None else args.n
    if not 1 <= args.lmin <= lmax <= args.n:
        raise ValueError(f"need 1 <= lmin <= lmax <= n, got {args.lmin}..{lmax} on n={args.n}")
    if args.dt <= 0 or args.tmax < args.tmin:
        raise ValueError("need dt > 0 and tmax >= tmin")
    ls = list(range(args.lmin, lmax + 1))
    ts = [round(args.tmin + k * args.dt, 12) for k in range(int((args.tmax - args.tmin) / args.dt + 1e-9) + 1)]
    return ls, ts


def _gate(args: argparse.Namespace) -> tuple[complex, complex]:
    return (
        complex(args.gamma_abs),
        args.delta_abs * cmath.exp(1j * args.delta_phase),
    )


def _initial(alpha2: float | None) -> InitialState | None:
    if alpha2 is None:
        return None
    if not 0.0 <= alpha2 <= 1.0:
        raise ValueError(f"|alpha|^2 must lie in [0, 1], got {alpha2}")
    return InitialState(math.sqrt(alpha2), math.sqrt(1.0 - alpha2))


def _threaded_columns(t_values, column_fn, threads: int) -> list[np.ndarray]:
    """Evaluate column_fn(t) for each t, in order, optionally on a worker pool."""
    if threads <= 1:
        return [column_fn(t) for t in t_values]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(column_fn, t_values))


# --------------------------------------------------------------------------
# Grid subcommands
# --------------------------------------------------------------------------


def _run_fidelity(args: argparse.Namespace) -> int:
    spec = _chain_spec(args)
    ls, ts = _grid_axes(args)
    initial = _initial(args.alpha2)

    def column(t: float) -> np.ndarray:
        grid = fidelity_grid(spec, "free", ls, [t], initial=initial)
        return grid.values[:, 0]

    cols = _threaded_columns(ts, column, args.threads)
    values = np.column_stack(cols)
    meta = _metadata(args, {"grid": {"l": [ls[0], ls[-1]], "t": [ts[0], ts[-1]], "dt": args.dt}})
    _write_outputs(args, _grid_csv(ls, ts, values), meta)
    return EXIT_OK


def _run_qdp_diff(args: argparse.Namespace) -> int:
    spec = _chain_spec(args)
    ls, ts = _grid_axes(args)
    event = QdpEvent("projective", m=args.site, t0=args.t0)

    def column(t: float) -> np.ndarray:
        return fidelity_grid(spec, "difference", ls, [t], event=event).values[:, 0]

    cols = _threaded_columns(ts, column, args.threads)
    values = np.column_stack(cols)
    meta = _metadata(args, {"grid": {"l": [ls[0], ls[-1]], "t": [ts[0], ts[-1]], "dt": args.dt}})
    _write_outputs(args, _grid_csv(ls, ts, values), meta)
    return EXIT_OK


def _run_unitary_qdp(args: argparse.Namespace) -> int:
    spec = _chain_spec(args)
    ls, ts = _grid_axes(args)
    event = QdpEvent("local_unitary", m=args.site, t0=args.t0, gate=_gate(args))
    scenario = "difference" if args.diff else "unitary_qdp"

    def column(t: float) -> np.ndarray:
        return fidelity_grid(spec, scenario, ls, [t], event=event).values[:, 0]

    cols = _threaded_columns(ts, column, args.threads)
    values = np.column_stack(cols)
    meta = _metadata(args, {"grid": {"l": [ls[0], ls[-1]], "t": [ts[0], ts[-1]], "dt": args.dt}})
    _write_outputs(args, _grid_csv(ls, ts, values), meta)
    return EXIT_OK


def _run_two_magnon_split(args: argparse.Namespace) -> int:
    spec = _chain_spec(args)
    ls, ts = _grid_axes(args)
    event = QdpEvent("local_unitary", m=args.site, t0=args.t0, gate=_gate(args))

    def column(t: float) -> np.ndarray:
        if t < event.t0:
            return np.zeros(len(ls))
        engine = UnitaryQdpEngine(spec, event, t)
        return np.array([engine.split_fidelity(l, args.part) for l in ls])

    cols = _threaded_columns(ts, column, args.threads)
    values = np.column_stack(cols)
    meta = _metadata(args, {"grid": {"l": [ls[0], ls[-1]], "t": [ts[0], ts[-1]], "dt": args.dt}})
    _write_outputs(args, _grid_csv(ls, ts, values), meta)
    return EXIT_OK


def _run_harper(args: argparse.Namespace) -> int:
    spec = HarperSpec(args.n, args.g, args.tau, eta=args.eta, boundary=args.boundary)
    if args.kicks < 0:
        raise ValueError("kick count must be >= 0")
    initial = _initial(args.alpha2)
    ls = list(range(1, spec.n + 1))
    step = floquet_step(spec)
    psi = np.zeros(spec.n, dtype=complex)
    psi[0] = 1.0
    columns, ts = [], []
    for n in range(args.kicks + 1):
        if n > 0:
            psi = step @ psi
        ts.append(n * spec.tau)
        if initial is None:
            columns.append(0.5 + np.abs(psi) ** 2 / 6.0 + psi.real / 3.0)
        else:
            a, b = initial.alpha, initial.beta
            x = abs(b) ** 2 * np.abs(psi) ** 2
            y = b * np.conj(a) * psi
            columns.append(abs(a) ** 2 * (1 - x) + abs(b) ** 2 * x + 2 * (a * np.conj(b) * y).real)
    values = np.column_stack(columns)
    meta = _metadata(args, {"grid": {"l": [1, spec.n], "kicks": args.kicks, "dt": spec.tau}})
    _write_outputs(args, _grid_csv(ls, ts, values), meta)
    return EXIT_OK


def _run_detector(args: argparse.Namespace) -> int:
    spec = HarperSpec(args.n, args.g, args.tau, eta=args.eta, boundary=args.boundary)
    if not 0 <= args.qdp_kick <= args.kicks:
        raise ValueError("need 0 <= qdp-kick <= kicks")
    initial = _initial(args.alpha2)
    if initial is None:
        raise ValueError("the detector needs a definite encoded state (--alpha2)")
    ls = list(range(1, spec.n + 1))
    columns, ts = [], []
    for n in range(args.qdp_kick, args.kicks + 1):
        res = qdp_and_detect(spec, args.qdp_site, args.qdp_kick, n, initial)
        columns.append(res.detector)
        ts.append(n * spec.tau)
    values = np.column_stack(columns)
    meta = _metadata(args, {"grid": {"l": [1, spec.n], "kicks": [args.qdp_kick, args.kicks], "dt": spec.tau}})
    _write_outputs(args, _grid_csv(ls, ts, values), meta)
    return EXIT_OK


# --------------------------------------------------------------------------
# Validation subcommands
# --------------------------------------------------------------------------


def _run_oracle_check(args: argparse.Namespace) -> int:
    tol = args.tol if args.tol is not None else 1e-9
    n = args.n
    report: dict[str, dict] = {}
    failures = []

    def record(name: str, worst: float, bound: float) -> None:
        ok = bool(worst <= bound)
        report[name] = {"worst": float(worst), "tolerance": float(bound), "pass": ok}
        print(f"{'ok  ' if ok else 'FAIL'} {name}: {worst:.3e} (tolerance {bound:.1e})")
        if not ok:
            failures.append(name)

    rng = np.random.default_rng(7)

    # Propagator splitting: survive + collapse amplitudes reassemble free motion.
    worst = 0.0
    from .protocols import hk_propagators

    for boundary in ("open", "closed"):
        spec = ChainSpec(n, boundary, 0.5, 1.0)
        for _ in range(100):
            m = int(rng.integers(1, n + 1))
            l = int(rng.integers(1, n + 1))
            t0 = float(rng.uniform(0.0, 3.0))
            t = t0 + float(rng.uniform(0.0, 3.0))
            props = hk_propagators(1, l, m, t, t0, spec)
            g = cmath.exp(-1j * spec.ground_energy * t) * green1_reduced(1, l, t, spec)
            worst = max(worst, abs(props.h + props.k - g))
    record("splitting identity", worst, tol)

    # Measurement protocol against dense Kraus evolution.
    spec = ChainSpec(n, "open", 0.5, 1.0)
    basis = oracle.make_basis("vacuum_one_two", n)
    ham = oracle.build_hamiltonian(spec, "vacuum_one_two")
    from .protocols import projective_rdm

    worst = 0.0
    m, t0, t = max(1, n // 2), 1.0, 2.5
    for alpha2 in (1.0, 0.5, 0.0):
        initial = _initial(alpha2)
        state = oracle.encoded_state(initial.alpha, initial.beta, basis)
        mid = oracle.evolve(state, ham, t0).vector
        rho = np.outer(mid, np.conj(mid))
        rho = oracle.kraus_measure(m, rho, basis)
        rho = oracle.evolve_density(rho, ham, t - t0)
        for l in (1, m, n):
            x_caught, y_caught = oracle.rdm_site_density(rho, l, basis)
            mine = projective_rdm(l, m, t, t0, spec, initial)
            worst = max(worst, abs(mine.x - x_caught), abs(mine.y - y_caught))
    record("measurement protocol vs dense evolution", worst, tol)

    # Gate protocol on the ring against dense evolution in the paired sector.
    spec = ChainSpec(n, "closed", 0.5, 1.0)
    basis2 = oracle.make_basis("vacuum_one_two", n)
    ham2 = oracle.build_hamiltonian(spec, "vacuum_one_two")
    from .protocols import unitary_qdp_state

    worst = 0.0
    for gate in ((1 / math.sqrt(2), 1 / math.sqrt(2)), (0.0, 1.0)):
        event = QdpEvent("local_unitary", m=max(1, n // 3), t0=1.5, gate=gate)
        initial = InitialState(math.sqrt(0.3), math.sqrt(0.7))
        state = oracle.encoded_state(initial.alpha, initial.beta, basis2)
        mid = oracle.evolve(state, ham2, event.t0)
        gated = oracle.apply_local(gate, event.m, mid)
        final = oracle.evolve(gated, ham2, 3.0 - event.t0)
        mine = unitary_qdp_state(event, 3.0, spec, initial)
        worst = max(worst, abs(mine.vacuum - final.vector[0]))
        for y in range(1, n + 1):
            worst = max(worst, abs(mine.one_magnon[y - 1] - final.vector[1 + y - 1]))
        for pair in basis2.pairs:
            caught = final.vector[basis2.pair_index(*pair)]
            worst = max(worst, abs(complex(mine.two_magnon.get(pair, 0.0)) - caught))
    record("gate protocol vs dense evolution", worst, max(tol, 1e-8))

    # Paired-band census on a 20-site ring.
    result = oracle.bound_band_projector(ChainSpec(20, "closed", 0.5, 1.0))
    ok = bool(17 <= result.count <= 20)
    report["paired-band census"] = {
        "count": int(result.count),
        "window": [17, 20],
        "pass": ok,
    }
    print(f"{'ok  ' if ok else 'FAIL'} paired-band census: {result.count} states (expected 17..20)")
    if not ok:
        failures.append("paired-band census")

    meta = _metadata(args, {"report": report})
    _write_outputs(args, json.dumps(report, sort_keys=True, indent=2) + "\n", meta)
    if failures:
        raise CheckFailure(f"{len(failures)} oracle check(s) failed: {', '.join(failures)}")
    return EXIT_OK


def _run_calibrate(args: argparse.Namespace) -> int:
    """Compare both propagator routes against dense one-excitation evolution.

    The mode-sum route is exact for any finite chain and is checked at the
    requested size.  The hop-expansion route neglects boundary wrap, so it is
    checked at 100 sites with the front well short of the boundary.
    """
    tol = args.tol if args.tol is not None else 1e-10
    report: dict[str, dict] = {}
    failures = []
    legs = [("momentum_sum", args.n), ("bessel", max(args.n, 100))]
    for method, n in legs:
        for boundary in ("open", "closed"):
            spec = ChainSpec(n, boundary, 0.5, 1.0)
            ham = oracle.build_hamiltonian(spec, "one_excitation")
            basis = oracle.make_basis("one_excitation", n)
            seed = oracle.DenseState(np.eye(n, dtype=complex)[0], basis)
            worst = 0.0
            for t in (0.7, 2.3, 5.0):
                dense = oracle.evolve(seed, ham, t).vector
                phase = cmath.exp(-1j * spec.ground_energy * t)
                mine = phase * reduced_profile(1, t, spec, method=method)
                worst = max(worst, float(np.max(np.abs(mine - dense))))
            name = f"one-magnon propagator ({method}, {boundary}, n={n})"
            ok = worst <= tol
            report[name] = {"worst": worst, "tolerance": tol, "pass": ok}
            print(f"{'ok  ' if ok else 'FAIL'} {name}: {worst:.3e}")
            if not ok:
                failures.append(name)
    print(f"conventions fingerprint: {conventions_hash()}")
    meta = _metadata(args, {"report": report})
    _write_outputs(args, json.dumps(report, sort_keys=True, indent=2) + "\n", meta)
    if failures:
        raise CheckFailure(f"calibration failed for: {', '.join(failures)}")
    return EXIT_OK


_RUNNERS = {
    "fidelity": _run_fidelity,
    "qdp-diff": _run_qdp_diff,
    "unitary-qdp": _run_unitary_qdp,
    "two-magnon-split": _run_two_magnon_split,
    "harper": _run_harper,
    "detector": _run_detector,
    "oracle-check": _run_oracle_check,
    "calibrate": _run_calibrate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, sys.argv[1:] if argv is None else list(argv))
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _RUNNERS[args.command](args)
    except QuadratureError as exc:
        print(f"error: quadrature did not converge: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CheckFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

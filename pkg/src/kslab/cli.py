"""Command-line front end: ``kslab <command> [flags]``.

Every command writes its CSV/JSON outputs plus one ``manifest.json`` into
``--out``.  Exit codes: 0 success (all gates pass), 1 usage error,
2 numerical or experiment failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import platform
import sys
import tempfile
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from .data import BoxPairSpec, BoxProfile, DataCatalogEntry, make_data, profile_on_grid
from .experiments import (ExperimentError, QuadratureError, energy_order, energy_residuals,
                          illposed_scaling_scan, mu_limit_experiment, smoothing_scan)
from .solver import (SolverConfig, SolverError, global_solve, local_T_estimate, picard_solve,
                     solve)
from .spectral import Grid, SpectralField, sobolev_norm
from .symbol import (SymbolParams, calculus_bound_check, find_M, gaussian_moment,
                     gaussian_moment_check, lemma21_sup_check, lemma_m1_holds,
                     linear_xnorm_measure)
from .trajectory import time_weight

log = logging.getLogger("kslab")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

IC_KINDS = {"zero": "zero", "gaussian": "gaussian", "sech": "sech",
            "random-sobolev": "random_sobolev", "box-pair": "box_pair"}

CSV_COLUMNS = {
    "norms": ("t", "l2", "hs", "h1", "dx_l2", "weighted_dx", "gronwall_envelope"),
    "spectrum": ("m", "k", "re", "im", "abs"),
    "illposed": ("s", "N", "r", "t", "amplitude_rule", "norm_f_hs", "norm_phi_hs", "norm_psi_hs",
                 "ratio"),
    "mulimit": ("mu", "sup_diff_hs"),
    "smoothing": ("t", "hs_plus_lambda", "weighted"),
    "energy": ("t", "residual_w", "residual_u"),
    "contraction": ("iteration", "distance", "ratio"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- output helpers ------------------------------------------------------------------


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    _atomic_write(path, buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def write_json(path: Path, obj) -> None:
    _atomic_write(path, json.dumps(_jsonable(obj), indent=2) + "\n")


def report_entry(inputs=None, measured=None, bound=None, slope=None, residual=None,
                 passed=True) -> dict:
    return {"inputs": inputs or {}, "measured": measured or {}, "bound": bound or {},
            "slope": slope, "residual": residual, "pass": bool(passed)}


class Stages:
    """Wall-clock seconds per named stage, for the manifest."""

    def __init__(self):
        self.seconds: dict[str, float] = {}

    @contextmanager
    def __call__(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.seconds[name] = self.seconds.get(name, 0.0) + time.perf_counter() - start


# --- argument parsing ----------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, *, T=None, s=0.75, ic="gaussian", nt=256) -> None:
    g = p.add_argument_group("common")
    g.add_argument("--config", metavar="FILE", help="key=value file; command-line flags win")
    g.add_argument("--L", type=float, default=32.0, help="domain half-length (domain [0, 2L))")
    g.add_argument("--n", type=int, default=1024, help="number of grid points")
    g.add_argument("--nt", type=int, default=nt, help="time nodes")
    g.add_argument("--T", type=float, default=T, help="final time")
    g.add_argument("--s", type=float, default=s, help="Sobolev index")
    g.add_argument("--mu", type=float, default=None, help="symbol parameter mu (default 1)")
    g.add_argument("--ic", choices=sorted(IC_KINDS), default=ic, help="initial datum")
    g.add_argument("--amplitude", type=float, default=0.5,
                   help="peak value (gaussian, sech) or H^s norm (random-sobolev)")
    g.add_argument("--width", type=float, default=1.0)
    g.add_argument("--center", type=float, default=None, help="bump center (default L)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, default=None, help="output directory")
    g.add_argument("--scheme", choices=("picard", "etd1", "etdrk2"), default="picard")
    g.add_argument("--tol", type=float, default=1e-10)
    g.add_argument("--max-iter", type=int, default=50)
    g.add_argument("--C", type=float, default=1.0, help="constant in the local-time estimate")
    g.add_argument("-v", "--verbose", action="store_true")


def _add_box_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--N-list", type=float, nargs="+", default=[32.0, 64.0, 128.0, 256.0])
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--amplitude-rule", choices=("paper", "normalized"), default=None,
                   help="default: both rules for illposed, paper for box-pair data")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kslab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"kslab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="solve from one initial datum and record norms")
    _add_common(p)
    _add_box_flags(p)
    p.add_argument("--window-nt", type=int, default=16,
                   help="time nodes per window of global continuation")
    p.add_argument("--continuation", action="store_true",
                   help="use global continuation even when T <= 1")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("verify-lemmas", help="certify the multiplier lemmas")
    _add_common(p)
    p.add_argument("--lambdas", type=float, nargs="+", default=[0.0, 0.25, 0.5, 1.0, 2.0])
    p.add_argument("--t", type=float, nargs="+", default=[0.01, 0.1, 0.5, 1.0],
                   help="times for the sup check")
    p.add_argument("--nus", type=float, nargs="+", default=[0.0, 0.3, 1.0, 2.0])
    p.add_argument("--mu-list", type=float, nargs="+", default=[0.0, 0.5, 1.0, 4.0],
                   help="mu values checked when --mu is not given")
    p.set_defaults(handler=cmd_verify_lemmas)

    p = sub.add_parser("illposed", help="box-pair scaling of the bilinear Duhamel term")
    _add_common(p, s=0.25)
    _add_box_flags(p)
    p.add_argument("--s-list", type=float, nargs="+", default=None,
                   help="several Sobolev indices (overrides --s)")
    p.add_argument("--t-probe", type=float, default=0.1)
    p.add_argument("--quad-points", type=int, default=64)
    p.set_defaults(handler=cmd_illposed)

    p = sub.add_parser("mu-limit", help="sup_t ||u_mu - u_0||_{H^s} along a list of mu")
    _add_common(p, T=0.5)
    p.add_argument("--mu-list", type=float, nargs="+", default=[1.0, 0.5, 0.25, 0.125])
    p.set_defaults(handler=cmd_mu_limit)

    p = sub.add_parser("smoothing", help="t^{lambda/2}-weighted H^{s+lambda} norms")
    _add_common(p, T=0.5, s=0.8, ic="random-sobolev")
    p.add_argument("--lambda", dest="lam", type=float, default=0.25)
    p.set_defaults(handler=cmd_smoothing)

    p = sub.add_parser("energy", help="residuals of the energy identities and their order")
    _add_common(p, T=0.5)
    p.add_argument("--levels", type=int, default=3, help="time-step halvings in the order study")
    p.set_defaults(handler=cmd_energy)

    p = sub.add_parser("contraction", help="Picard successive distances and ratios")
    _add_common(p)
    p.set_defaults(handler=cmd_contraction)
    return parser


def _split_config_flag(argv: list[str]) -> tuple[list[str], str | None]:
    rest, path = [], None
    it = iter(argv)
    for tok in it:
        if tok == "--config":
            path = next(it, None)
            if path is None:
                raise UsageError("--config needs a file name")
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
        else:
            rest.append(tok)
    return rest, path


def read_config(path: str, store_true: set[str]) -> list[str]:
    """Turn ``key = value`` lines into flag tokens ('#' starts a comment)."""
    tokens: list[str] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            flag = "--" + key.lstrip("-").replace("_", "-")
            if flag in store_true:
                if value.lower() in ("1", "true", "yes", "on"):
                    tokens.append(flag)
                continue
            tokens.append(flag)
            tokens.extend(value.replace(",", " ").split())
    return tokens


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    argv, config = _split_config_flag(list(argv))
    if config is not None:
        # config values go first so that explicit flags override them
        args0 = parser.parse_args(argv)
        sub = parser._subparsers._group_actions[0].choices[args0.command]
        store_true = {opt for a in sub._actions if isinstance(a, argparse._StoreTrueAction)
                      for opt in a.option_strings}
        try:
            extra = read_config(config, store_true)
        except OSError as exc:
            raise OSError(f"cannot read config {config}: {exc}") from exc
        i = argv.index(args0.command)
        argv = argv[: i + 1] + extra + argv[i + 1:]
    args = parser.parse_args(argv)
    args.config = config
    args.argv = argv
    if args.out is None:
        args.out = Path("kslab-out") / args.command
    return args


# --- shared setup --------------------------------------------------------------------


def _grid(args) -> Grid:
    return Grid(args.L, args.n)


def _params(args, default: float = 1.0) -> SymbolParams:
    return SymbolParams(default if args.mu is None else args.mu)


def _box_spec(args, s: float, rule: str | None = None) -> BoxPairSpec:
    return BoxPairSpec(N=args.N_list[0], r=args.r, s=s,
                       amplitude_rule=rule or args.amplitude_rule or "paper")


def initial_datum(args, grid: Grid) -> SpectralField:
    """Real initial datum from --ic; box-pair data are the symmetrized phi + psi."""
    kind = IC_KINDS[args.ic]
    if kind == "box_pair":
        spec = _box_spec(args, args.s)
        profile = spec.phi_hat().symmetrized().boxes + spec.psi_hat().symmetrized().boxes
        return profile_on_grid(BoxProfile(profile), grid, hermitian=True)
    entry = DataCatalogEntry(kind=kind, amplitude=args.amplitude, width=args.width,
                             center=args.center, s=args.s, seed=args.seed)
    return make_data(entry, grid)


def _default_T(args, phi0: SpectralField, params: SymbolParams) -> float:
    if args.T is not None:
        return args.T
    if 0.5 < args.s < 1:
        return local_T_estimate(sobolev_norm(phi0, args.s), args.s, params, args.C)
    return 0.5


def _config(args, T: float, params: SymbolParams, **kw) -> SolverConfig:
    base = dict(T=T, nt=args.nt, s=args.s, params=params, scheme=args.scheme, tol=args.tol,
                max_iter=args.max_iter)
    base.update(kw)
    return SolverConfig(**base)


# --- commands ------------------------------------------------------------------------


def cmd_simulate(args, stages: Stages) -> int:
    grid = _grid(args)
    params = _params(args)
    with stages("setup"):
        phi0 = initial_datum(args, grid)
        T = _default_T(args, phi0, params)
    measured = {}
    with stages("solve"):
        if args.scheme == "picard" and (T > 1 or args.continuation):
            template = _config(args, min(T, 1.0), params, nt=args.window_nt)
            run = global_solve(phi0, args.s, params, T, template, C=args.C)
            traj = run.trajectory
            measured["n_windows"] = run.n_windows
        elif args.scheme == "picard":
            res = picard_solve(phi0, _config(args, T, params))
            traj = res.trajectory
            measured["iterations"] = res.iterations
            measured["max_ratio"] = max(res.ratios) if res.ratios else None
        else:
            traj = solve(phi0, _config(args, T, params))
    t = traj.times
    dx = traj.dx_norms()
    exponent = (1 - args.s) / 2 if args.s < 1 else 0.0
    weighted = time_weight(t - t[0], exponent) * dx
    envelope = np.exp(2 * params.mu * t) * dx[0] ** 2
    with stages("write"):
        rows = zip(t, traj.norms(0.0), traj.norms(args.s), traj.norms(1.0), dx, weighted, envelope)
        write_csv(args.out / "norms.csv", CSV_COLUMNS["norms"], rows)
        order = np.argsort(grid.modes, kind="stable")
        c = traj.final.coeffs[order]
        write_csv(args.out / "spectrum.csv", CSV_COLUMNS["spectrum"],
                  zip(grid.modes[order], grid.k[order], c.real, c.imag, np.abs(c)))
        gronwall = bool(np.all(dx**2 <= envelope * (1 + 1e-6)))
        measured.update(final_hs=float(traj.norms(args.s)[-1]),
                        max_dx_sq_over_envelope=float(np.max(dx**2 / np.where(envelope > 0, envelope, 1.0))),
                        gronwall_holds=gronwall)
        summary = report_entry(inputs={"T": T, "nt": len(t), "s": args.s, "mu": params.mu,
                                       "scheme": args.scheme, "ic": args.ic},
                               measured=measured, bound={"gronwall_rel_tol": 1e-6}, passed=gronwall)
        write_json(args.out / "simulate.json", summary)
    return EXIT_OK if gronwall else EXIT_NUMERIC


def cmd_verify_lemmas(args, stages: Stages) -> int:
    mus = [args.mu] if args.mu is not None else args.mu_list
    T = 1.0 if args.T is None else args.T
    checks = []
    with stages("lemma21"):
        for mu in mus:
            params = SymbolParams(mu)
            for lam in args.lambdas:
                for t in args.t:
                    if not 0 < t <= T:
                        raise UsageError(f"--t values must lie in (0, T={T}], got {t}")
                    chk = lemma21_sup_check(lam, t, T, params)
                    entry = report_entry({"lambda": lam, "t": t, "T": T, "mu": mu},
                                         {"sup": chk.measured, "argmax": chk.argmax,
                                          "ratio": chk.ratio,
                                          "equality": abs(chk.ratio - 1) <= 1e-9},
                                         {"sup": chk.bound}, passed=chk.passed)
                    checks.append({"check": "lemma21_sup", **entry})
    with stages("gaussian_moment"):
        for nu in args.nus:
            ratios = gaussian_moment_check(nu)
            ok = all(abs(r - 1) <= 1e-8 for _, r in ratios)
            checks.append({"check": "gaussian_moment", **report_entry(
                {"nu": nu, "t": [t for t, _ in ratios]},
                {"c_nu": gaussian_moment(nu), "quadrature_over_closed_form": [r for _, r in ratios]},
                {"relative_error": 1e-8}, passed=ok)})
    with stages("find_M"):
        for mu in mus:
            params = SymbolParams(mu)
            M = find_M(params)
            samples = M * np.geomspace(1.0, 100.0, 200)
            holds = bool(np.all(lemma_m1_holds(samples, params)))
            minimal = not bool(lemma_m1_holds(M * (1 - 1e-3), params))
            checks.append({"check": "find_M", **report_entry(
                {"mu": mu}, {"M": M, "holds_above_M": holds, "fails_below_M": minimal},
                passed=holds and minimal)})
    with stages("calculus"):
        for alpha, beta in ((1.0, -1.0), (2.0, -4.0), (0.5, -3.0), (1e-3, -1.0)):
            chk = calculus_bound_check(alpha, beta)
            checks.append({"check": "calculus_bound", **report_entry(
                {"alpha": alpha, "beta": beta},
                {"max": chk.measured, "argmax": chk.argmax, "ratio": chk.ratio},
                {"max": chk.bound}, passed=chk.passed)})
    with stages("linear_xnorm"):
        grid = _grid(args)
        phi0 = initial_datum(args, grid)
        if sobolev_norm(phi0, args.s) > 0:
            for mu in mus:
                ratio = linear_xnorm_measure(phi0, args.s, min(T, 1.0), SymbolParams(mu), args.nt)
                checks.append({"check": "linear_xnorm", **report_entry(
                    {"mu": mu, "s": args.s, "T": min(T, 1.0), "ic": args.ic},
                    {"ratio": ratio}, passed=math.isfinite(ratio))})
    all_pass = all(c["pass"] for c in checks)
    with stages("write"):
        write_json(args.out / "lemmas.json", {"pass": all_pass, "checks": checks})
    return EXIT_OK if all_pass else EXIT_NUMERIC


def cmd_illposed(args, stages: Stages) -> int:
    s_list = args.s_list if args.s_list else [args.s]
    rules = (args.amplitude_rule,) if args.amplitude_rule else ("paper", "normalized")
    template = BoxPairSpec(N=max(args.N_list), r=args.r, s=s_list[0])
    with stages("scan"):
        reports = illposed_scaling_scan(template, args.N_list, args.t_probe, s_list,
                                        params=_params(args), quad_points=args.quad_points,
                                        rules=rules)
    rows = []
    for rep in reports:
        inp = rep.inputs
        for i, N in enumerate(rep.x):
            rows.append((inp["s"], N, inp["r"], inp["t"], inp["amplitude_rule"],
                         rep.columns["norm_f_hs"][i], rep.columns["norm_phi_hs"][i],
                         rep.columns["norm_psi_hs"][i], rep.columns["ratio"][i]))
    all_pass = all(r.passed for r in reports)
    with stages("write"):
        write_csv(args.out / "illposed.csv", CSV_COLUMNS["illposed"], rows)
        write_json(args.out / "illposed.json",
                   {"pass": all_pass, "reports": [{"name": r.name, **r.to_json()} for r in reports]})
    return EXIT_OK if all_pass else EXIT_NUMERIC


def cmd_mu_limit(args, stages: Stages) -> int:
    grid = _grid(args)
    phi0 = initial_datum(args, grid)
    with stages("runs"):
        rep = mu_limit_experiment(phi0, args.s, args.mu_list, args.T, args.nt, args.scheme,
                                  args.tol, args.max_iter)
    with stages("write"):
        write_csv(args.out / "mulimit.csv", CSV_COLUMNS["mulimit"],
                  zip(rep.x, rep.columns["sup_diff_hs"]))
        write_json(args.out / "mulimit.json", rep.to_json())
    return EXIT_OK if rep.passed else EXIT_NUMERIC


def cmd_smoothing(args, stages: Stages) -> int:
    grid = _grid(args)
    phi0 = initial_datum(args, grid)
    with stages("solve"):
        rep = smoothing_scan(phi0, args.s, args.lam, _params(args), args.T, args.nt, args.scheme,
                             args.tol, args.max_iter)
    with stages("write"):
        write_csv(args.out / "smoothing.csv", CSV_COLUMNS["smoothing"],
                  zip(rep.x, rep.columns["hs_plus_lambda"], rep.columns["weighted"]))
        write_json(args.out / "smoothing.json", rep.to_json())
    return EXIT_OK if rep.passed else EXIT_NUMERIC


def cmd_energy(args, stages: Stages) -> int:
    grid = _grid(args)
    params = _params(args)
    phi0 = initial_datum(args, grid)
    cfg = _config(args, args.T, params)
    with stages("solve"):
        rep = energy_residuals(solve(phi0, cfg), params)
    with stages("order"):
        zero = rep.measured["max_residual_w"] == 0 and rep.measured["max_residual_u"] == 0
        order = None if zero or args.levels < 2 else energy_order(phi0, cfg, levels=args.levels)
    passed = zero or (order is not None and order.passed)
    if params.mu == 0:
        passed = passed and rep.measured["dx_norm_nonincreasing"]
    measured = dict(rep.measured)
    if order is not None:
        measured.update(order.measured)
        measured["max_residuals_by_nt"] = order.columns
    summary = report_entry(inputs={**rep.inputs, "scheme": args.scheme, "levels": args.levels},
                           measured=measured, bound={"min_order": 1.8}, passed=passed)
    with stages("write"):
        write_csv(args.out / "energy.csv", CSV_COLUMNS["energy"],
                  zip(rep.x, rep.columns["residual_w"], rep.columns["residual_u"]))
        write_json(args.out / "energy.json", summary)
    return EXIT_OK if passed else EXIT_NUMERIC


def cmd_contraction(args, stages: Stages) -> int:
    grid = _grid(args)
    params = _params(args)
    phi0 = initial_datum(args, grid)
    T = _default_T(args, phi0, params)
    with stages("picard"):
        res = picard_solve(phi0, _config(args, T, params, scheme="picard"))
    ratios = [None] + list(res.ratios)
    passed = all(r < 1 for r in res.ratios)
    with stages("write"):
        write_csv(args.out / "contraction.csv", CSV_COLUMNS["contraction"],
                  zip(range(1, res.iterations + 1), res.distances, ratios))
        write_json(args.out / "contraction.json", report_entry(
            inputs={"T": T, "nt": args.nt, "s": args.s, "mu": params.mu, "tol": args.tol,
                    "phi_hs": sobolev_norm(phi0, args.s)},
            measured={"iterations": res.iterations, "max_ratio": max(res.ratios, default=None),
                      "final_distance": res.distances[-1]},
            bound={"ratio": 1.0}, passed=passed))
    return EXIT_OK if passed else EXIT_NUMERIC


# --- entry point ---------------------------------------------------------------------


def _manifest(args, stages: Stages, exit_code: int) -> dict:
    config = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())
              if k not in ("handler", "argv")}
    return {
        "command_line": ["kslab", *args.argv],
        "command": args.command,
        "config": config,
        "grid": {"L": args.L, "n": args.n, "dx": 2 * args.L / args.n},
        "time": {"T": args.T, "nt": args.nt},
        "seeds": {"seed": args.seed},
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "stage_seconds": stages.seconds,
        "exit_code": exit_code,
    }


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(exc, file=sys.stderr)
        return EXIT_IO
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    stages = Stages()
    try:
        code = args.handler(args, stages)
    except (UsageError, ValueError) as exc:
        print(f"kslab {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, ExperimentError, QuadratureError, FloatingPointError) as exc:
        window = getattr(exc, "window", None)
        where = f" (window {window[0]:.6g}..{window[1]:.6g})" if window else ""
        print(f"kslab {args.command}: numerical failure{where}: {exc}", file=sys.stderr)
        code = EXIT_NUMERIC
    except OSError as exc:
        print(f"kslab {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        write_json(args.out / "manifest.json", _manifest(args, stages, code))
    except OSError as exc:
        print(f"kslab {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return code

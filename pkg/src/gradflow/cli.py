"""Command-line front end: integrate, measure convergence, run checks.

Subcommands:

* run       integrate one or more (scheme, tau) pairs and write each
            trajectory as a CSV file;
* converge  run the step-size ladder for both schemes against a reference,
            write error table, log-log chart, and per-run check results;
* check     integrate (or load a trajectory CSV) and run every inequality
            check, failing loudly when one is violated.

Exit codes: 0 success, 1 a check failed, 2 bad configuration or arguments,
3 an inner solve failed.  Settings come from built-in defaults, then an
INI config file ([common] section plus one section per space), then flags;
later sources win.  Output files are written atomically and are
byte-reproducible for identical inputs.
"""

import argparse
import configparser
import math
import os
import sys

import numpy as np

from .chartsvg import loglog_chart
from .core import Trajectory, run_trajectory
from .errors import (AntipodalPoint, GradFlowError, GridMismatch,
                     InnerSolveFailed, NonFiniteObjective, StepTooLarge)
from .harness import (SCHEMES, SPACE_IDS, default_witnesses, make_setup,
                      run_convergence, run_inequality_suite)

ENV_OUT = "GFLOW_OUT"
DEFAULT_OUT = "gflow-out"


class CliError(Exception):
    """Configuration or argument problem; maps to exit code 2."""


class SolverFailure(Exception):
    """An inner minimization did not converge; maps to exit code 3."""


def _fmt(x) -> str:
    """Shortest round-trip decimal of a float, as plain Python text."""
    return repr(float(x))


def _parse_tau_list(text: str):
    try:
        taus = tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError as exc:
        raise CliError(f"cannot parse step list {text!r}: {exc}") from None
    if not taus:
        raise CliError("empty step list")
    if any(not (t > 0 and math.isfinite(t)) for t in taus):
        raise CliError("every step size must be positive and finite")
    return taus


def _parse_schemes(text: str):
    if text == "both":
        return SCHEMES
    if text in SCHEMES:
        return (text,)
    raise CliError(f"unknown scheme {text!r}; choose mm, bdf2, or both")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradflow",
        description="variational time discretizations of metric gradient "
                    "flows: integrate, measure convergence, check estimates")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--space", required=True, choices=SPACE_IDS,
                       help="model problem to run")
        p.add_argument("--scheme", default=None,
                       help="mm, bdf2, or both (default: both)")
        p.add_argument("--tau", default=None,
                       help="step size, or comma-separated list")
        p.add_argument("--t-final", default=None, type=float,
                       help="time horizon")
        p.add_argument("--grid-k", default=None, type=int,
                       help="grid size for the discretized problems")
        p.add_argument("--out", default=None,
                       help=f"output directory (default: ${ENV_OUT} or "
                            f"./{DEFAULT_OUT})")
        p.add_argument("--seed", default=None, type=int,
                       help="seed for the witness panel (default: 0)")
        p.add_argument("--config", default=None,
                       help="INI file with [common] and per-space sections")

    p_run = sub.add_parser("run", help="integrate and write trajectory CSVs")
    common(p_run)

    p_con = sub.add_parser("converge",
                           help="order study: errors, chart, check table")
    common(p_con)
    p_con.add_argument("--tau-ref", default=None, type=float,
                       help="reference step size")
    p_con.add_argument("--tau-coarse", default=None, type=float,
                       help="comparison grid spacing")
    p_con.add_argument("--jobs", default=None, type=int,
                       help="parallel integration jobs (default: 1)")

    p_chk = sub.add_parser("check", help="run inequality checks")
    common(p_chk)
    p_chk.add_argument("--trajectory", default=None,
                       help="check a previously written trajectory CSV "
                            "instead of integrating")
    return parser


def _read_config(path):
    if path is None:
        return {}
    if not os.path.isfile(path):
        raise CliError(f"config file not found: {path}")
    cp = configparser.ConfigParser()
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise CliError(f"cannot parse config file {path}: {exc}") from None
    return {section: dict(cp.items(section)) for section in cp.sections()}


class Settings:
    """Merged view of defaults, config file sections, and flags."""

    def __init__(self, args):
        self.args = args
        self.file = _read_config(args.config)
        self.space_id = args.space

    def get(self, key, flag_value):
        if flag_value is not None:
            return flag_value
        for section in (self.space_id, "common"):
            if section in self.file and key in self.file[section]:
                return self.file[section][key]
        return None

    def out_dir(self) -> str:
        out = self.get("out", self.args.out)
        if out is None:
            out = os.environ.get(ENV_OUT) or DEFAULT_OUT
        return out


def _coerce(value, kind, key):
    if value is None or isinstance(value, kind):
        return value
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad value for {key}: {value!r} ({exc})") from None


def _build_setup(settings):
    args = settings.args
    grid_k = _coerce(settings.get("grid_k", args.grid_k), int, "grid_k")
    if grid_k is not None and settings.space_id not in ("hilbert-rd",
                                                        "wasserstein-icdf"):
        raise CliError(f"--grid-k does not apply to {settings.space_id}")
    if grid_k is not None and grid_k < 2:
        raise CliError("--grid-k must be at least 2")
    try:
        return make_setup(settings.space_id, k=grid_k)
    except (ValueError, GradFlowError) as exc:
        raise CliError(str(exc)) from None


def _resolve_common(settings, setup):
    args = settings.args
    schemes = _parse_schemes(settings.get("scheme", args.scheme) or "both")
    tau_text = settings.get("tau", args.tau)
    taus = (_parse_tau_list(str(tau_text)) if tau_text is not None
            else tuple(setup.defaults["taus"]))
    horizon = _coerce(settings.get("t_final", args.t_final), float, "t_final")
    if horizon is None:
        horizon = setup.defaults["horizon"]
    if not (horizon > 0 and math.isfinite(horizon)):
        raise CliError("t_final must be positive and finite")
    if horizon < max(taus):
        raise CliError(f"t_final = {horizon!r} is shorter than one step "
                       f"of the largest tau = {max(taus)!r}")
    seed = _coerce(settings.get("seed", args.seed), int, "seed")
    return schemes, taus, horizon, (0 if seed is None else seed)


def _integrate(setup, scheme, tau, horizon):
    try:
        return run_trajectory(setup.space, setup.energy, scheme, tau,
                              setup.u0, horizon)
    except InnerSolveFailed as exc:
        raise SolverFailure(
            f"inner solve failed: space={setup.space_id} scheme={scheme} "
            f"tau={_fmt(tau)} step={exc.step_index}: {exc}") from exc
    except (AntipodalPoint, NonFiniteObjective) as exc:
        raise SolverFailure(
            f"inner solve failed: space={setup.space_id} scheme={scheme} "
            f"tau={_fmt(tau)}: {exc}") from exc
    except StepTooLarge as exc:
        raise CliError(str(exc)) from None
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _state_row(state):
    return np.atleast_1d(np.asarray(state, dtype=float))


def _write_atomic(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def trajectory_csv_text(traj: Trajectory) -> str:
    """Serialize a run: one row per state, shortest round-trip decimals."""
    n_comp = _state_row(traj.states[0]).size
    header = (["k", "t"] + [f"state_{i}" for i in range(n_comp)]
              + ["energy", "step_distance"])
    lines = [",".join(header)]
    for k, state in enumerate(traj.states):
        row = _state_row(state)
        if row.size != n_comp:
            raise ValueError("states change size along the trajectory")
        step_d = (0.0 if k == 0
                  else traj.space.distance(traj.states[k - 1], state))
        cells = ([str(k), _fmt(k * traj.tau)]
                 + [_fmt(x) for x in row]
                 + [_fmt(traj.energy.value(state)), _fmt(step_d)])
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def load_trajectory_csv(path: str, space_id: str, scheme: str) -> Trajectory:
    """Rebuild a Trajectory from a CSV written by the run command."""
    if not os.path.isfile(path):
        raise CliError(f"trajectory file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if len(lines) < 3:
        raise CliError(f"{path}: need a header and at least two states")
    header = lines[0].split(",")
    n_comp = len(header) - 4
    expected = (["k", "t"] + [f"state_{i}" for i in range(n_comp)]
                + ["energy", "step_distance"])
    if n_comp < 1 or header != expected:
        raise CliError(f"{path}: unexpected header {lines[0]!r}")
    ks, ts, states = [], [], []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(header):
            raise CliError(f"{path}: row with {len(cells)} cells, "
                           f"expected {len(header)}")
        try:
            ks.append(int(cells[0]))
            ts.append(float(cells[1]))
            states.append(np.array([float(c) for c in cells[2:2 + n_comp]]))
        except ValueError as exc:
            raise CliError(f"{path}: bad row {ln!r} ({exc})") from None
    if ks != list(range(len(ks))):
        raise CliError(f"{path}: step indices must run 0, 1, 2, ...")
    tau = ts[1] - ts[0]
    if tau <= 0:
        raise CliError(f"{path}: non-increasing time column")
    grid_k = n_comp if space_id in ("hilbert-rd", "wasserstein-icdf") else None
    try:
        setup = make_setup(space_id, k=grid_k)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    probe = _state_row(setup.u0)
    if probe.size != n_comp:
        raise CliError(f"{path}: {n_comp} state columns do not fit "
                       f"space {space_id}")
    if space_id == "halfline":
        states = [float(s[0]) for s in states]
    return Trajectory(scheme=scheme, tau=tau, states=tuple(states),
                      horizon=ts[-1], space=setup.space, energy=setup.energy)


def cmd_run(settings) -> int:
    setup = _build_setup(settings)
    schemes, taus, horizon, _ = _resolve_common(settings, setup)
    out = settings.out_dir()
    os.makedirs(out, exist_ok=True)
    for scheme in schemes:
        for tau in taus:
            traj = _integrate(setup, scheme, tau, horizon)
            name = f"{setup.space_id}_{scheme}_tau{_fmt(tau)}.csv"
            path = os.path.join(out, name)
            _write_atomic(path, trajectory_csv_text(traj))
            print(f"wrote {path} ({traj.n_steps} steps)")
    return 0


def _check_table(results, heading):
    lines = [heading,
             f"  {'check':28s} {'worst residual':>16s} {'slack':>12s} verdict"]
    for res in results:
        worst = res.worst
        worst_text = "-inf" if worst == -math.inf else f"{worst:16.3e}"
        verdict = "pass" if res.passed else "FAIL"
        lines.append(f"  {res.name:28s} {worst_text:>16s} "
                     f"{res.slack:12.3e} {verdict}")
    return "\n".join(lines)


def cmd_converge(settings) -> int:
    args = settings.args
    setup = _build_setup(settings)
    schemes, taus, horizon, seed = _resolve_common(settings, setup)
    if len(taus) < 3:
        raise CliError("converge needs at least three step sizes")
    if any(b >= a for a, b in zip(taus, taus[1:])):
        raise CliError("step list must be strictly decreasing")
    tau_ref = _coerce(settings.get("tau_ref", args.tau_ref), float, "tau_ref")
    if tau_ref is None:
        tau_ref = setup.defaults["tau_ref"]
    tau_coarse = _coerce(settings.get("tau_coarse", args.tau_coarse), float,
                         "tau_coarse")
    if tau_coarse is None:
        tau_coarse = setup.defaults["tau_coarse"]
    jobs = _coerce(settings.get("jobs", args.jobs), int, "jobs")
    jobs = 1 if jobs is None else jobs
    if jobs < 1:
        raise CliError("--jobs must be at least 1")

    try:
        result = run_convergence(setup, schemes=schemes, taus=taus,
                                 tau_ref=tau_ref, tau_coarse=tau_coarse,
                                 horizon=horizon, jobs=jobs)
    except InnerSolveFailed as exc:
        raise SolverFailure(
            f"inner solve failed: space={setup.space_id} "
            f"step={exc.step_index}: {exc}") from exc
    except (AntipodalPoint, NonFiniteObjective) as exc:
        raise SolverFailure(f"inner solve failed: space={setup.space_id}: "
                            f"{exc}") from exc
    except (GridMismatch, StepTooLarge, ValueError) as exc:
        raise CliError(str(exc)) from None

    out = settings.out_dir()
    os.makedirs(out, exist_ok=True)

    err_lines = ["scheme,tau,mean_error"]
    for scheme in schemes:
        for tau, err in zip(taus, result.errors[scheme]):
            err_lines.append(f"{scheme},{_fmt(tau)},{_fmt(err)}")
    err_path = os.path.join(out, "convergence.csv")
    _write_atomic(err_path, "\n".join(err_lines) + "\n")

    def _fit_label(scheme):
        fit = result.fits[scheme]
        if fit is None:
            return f"{scheme} (below solver floor)"
        return f"{scheme} (slope {fit.slope:.2f})"

    series = [(_fit_label(scheme), taus, result.errors[scheme])
              for scheme in schemes
              if all(e > 0.0 for e in result.errors[scheme])]
    svg_path = os.path.join(out, "convergence.svg")
    if series:
        _write_atomic(svg_path, loglog_chart(
            series, title=f"{setup.space_id}: error vs step size",
            xlabel="step size tau", ylabel="mean error"))

    witnesses = default_witnesses(setup.space, seed=seed)
    diag_lines = ["space,scheme,tau,check,passed,worst_residual,slack"]
    first_failure = None
    for scheme in schemes:
        for tau in taus:
            traj = result.trajectories[(scheme, tau)]
            for res in run_inequality_suite(traj, witnesses):
                worst = res.worst
                diag_lines.append(
                    f"{setup.space_id},{scheme},{_fmt(tau)},{res.name},"
                    f"{str(res.passed)},{_fmt(worst)},{_fmt(res.slack)}")
                if not res.passed and first_failure is None:
                    first_failure = (res.name, scheme, tau)
    diag_path = os.path.join(out, "diagnostics.csv")
    _write_atomic(diag_path, "\n".join(diag_lines) + "\n")

    for scheme in schemes:
        fit = result.fits[scheme]
        if fit is None:
            print(f"{setup.space_id} {scheme}: errors below solver floor; "
                  "no order fit")
            continue
        note = "" if fit.reliable else "  [unreliable fit]"
        print(f"{setup.space_id} {scheme}: slope {fit.slope:.3f} "
              f"(R^2 {fit.r_squared:.5f}){note}")
    written = [err_path] + ([svg_path] if series else []) + [diag_path]
    print("wrote " + ", ".join(written))
    if first_failure is not None:
        name, scheme, tau = first_failure
        print(f"FAIL: check {name} violated for scheme={scheme} "
              f"tau={_fmt(tau)}", file=sys.stderr)
        return 1
    return 0


def cmd_check(settings) -> int:
    args = settings.args
    setup = _build_setup(settings)
    schemes, taus, horizon, seed = _resolve_common(settings, setup)
    witnesses = default_witnesses(setup.space, seed=seed)

    suites = []
    if args.trajectory is not None:
        if len(schemes) != 1:
            raise CliError("checking a trajectory file needs a single "
                           "--scheme (mm or bdf2)")
        traj = load_trajectory_csv(args.trajectory, settings.space_id,
                                   schemes[0])
        suites.append((f"{args.trajectory} as {schemes[0]}", traj))
    else:
        tau = max(taus)
        for scheme in schemes:
            traj = _integrate(setup, scheme, tau, horizon)
            suites.append((f"{setup.space_id} {scheme} tau={_fmt(tau)}",
                           traj))

    failed = None
    for heading, traj in suites:
        results = run_inequality_suite(traj, witnesses)
        print(_check_table(results, heading))
        for res in results:
            if not res.passed and failed is None:
                failed = (res.name, heading)
    if failed is not None:
        print(f"FAIL: check {failed[0]} violated on {failed[1]}",
              file=sys.stderr)
        return 1
    print("all checks passed")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = Settings(args)
        if args.command == "run":
            return cmd_run(settings)
        if args.command == "converge":
            return cmd_converge(settings)
        if args.command == "check":
            return cmd_check(settings)
        raise CliError(f"unknown command {args.command!r}")
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())

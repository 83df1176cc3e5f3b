"""Batch front end: `degeo COMMAND CONFIG [--out DIR] [--seed N] [--quiet]`.

Commands
    solve         constrained minimization; writes result.json + curve.csv
    sweep         area sweep; writes table.csv
    homogeneous   closed-form one-well quadratic runs (ellipse or integral
                  curve); writes result.json + curve.csv
    radial        one-well quartic closed forms; writes figure1.json,
                  result.json, curve.csv (planar spiral) and table.csv
                  (desingularized path, header R,alpha)
    wave          solve + traveling-wave conversion; writes profile.csv,
                  spectrum.json and result.json

The single positional argument is a JSON config file holding the potential
description, command parameters, and optional solver overrides, e.g.

    {"potential": {"kind": "homogeneous",
                   "params": {"lambda1": 1.0, "lambda2": 2.0}},
     "endpoints": [[1.0, 0.0], [0.0, 0.0]],
     "A": 0.1,
     "solver": {"n_vertices": 256},
     "output_dir": "out"}

Exit codes: 0 success, 1 usage or config error (bad JSON, wrong kinds, bad
parameters), 2 mathematical flag (non-existence suspected, bubble detected,
area above the attainable cap, failed convergence).

Float formatting is fixed (17 significant digits in JSON, shortest
round-trip in CSV) and JSON keys are sorted, so outputs are byte-identical
across runs.  `DEGEO_LOG` in {error, info, debug} sets verbosity; `--quiet`
forces error-only.  `--jobs` is accepted for compatibility; sweeps run
serially because each solve warm-starts from its neighbor.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from typing import Optional

import numpy as np

from .errors import (BubbleDetected, DegeoError, GapTooLarge, NoRoot,
                     NonConvergence, NonExistence)
from .functionals import Curve, area, energy
from .homogeneous import minimizing_ellipse, solve_homogeneous
from .potential import from_json_dict as potential_from_json
from .radial import (existence_threshold, figure1_bundle, parabola_geodesic,
                     path_to_csv, solve_C1_for_area, spiral_from_C1,
                     vertical_segment_resolution)
from .solver import SolverConfig, area_sweep, minimize_constrained
from .wave import (hamiltonian_energy, hamiltonian_tail_estimate,
                   profile_to_csv, second_variation_spectrum,
                   to_traveling_wave, wave_residual, zero_mode_alignment)

log = logging.getLogger("degeo.cli")

# errors that represent a mathematical outcome rather than a bad config
_FLAG_ERRORS = (NonExistence, BubbleDetected, NonConvergence, NoRoot,
                GapTooLarge)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# deterministic serialization
# ---------------------------------------------------------------------------

def _canon(obj) -> str:
    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda kv: kv[0])
        return "{" + ",".join(f"{json.dumps(k)}:{_canon(v)}"
                              for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_canon(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return json.dumps(bool(obj))
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if not math.isfinite(x):
            return json.dumps(x)
        return format(x, ".17g")
    if isinstance(obj, (np.integer,)):
        return json.dumps(int(obj))
    if isinstance(obj, np.ndarray):
        return _canon(obj.tolist())
    return json.dumps(obj)


def _write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        fh.write(_canon(obj))
        fh.write("\n")


def _write_curve_csv(path: str, curve: Curve) -> None:
    with open(path, "w") as fh:
        fh.write("x,y\n")
        for a, b in curve.vertices:
            fh.write(f"{float(a)!r},{float(b)!r}\n")


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------

def _load_config(path: str) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config must be a JSON object")
    return data


def _out_dir(config: dict, args) -> str:
    out = args.out or config.get("output_dir") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _potential(config: dict):
    if "potential" not in config:
        raise KeyError("config needs a \"potential\" entry")
    return potential_from_json(config["potential"])


def _solver_config(config: dict, args) -> SolverConfig:
    overrides = dict(config.get("solver", {}))
    if args.seed is not None:
        overrides["seed"] = args.seed
    try:
        return SolverConfig(**overrides)
    except TypeError as exc:
        raise ValueError(f"bad solver override: {exc}") from exc


def _endpoints(config: dict):
    eps = config.get("endpoints")
    if (not isinstance(eps, (list, tuple)) or len(eps) != 2
            or any(len(e) != 2 for e in eps)):
        raise ValueError("config needs \"endpoints\": [[x,y],[x,y]]")
    return np.asarray(eps[0], dtype=float), np.asarray(eps[1], dtype=float)


def _require_kind(potential, kind: str) -> None:
    if potential.kind != kind:
        raise ValueError(
            f"this command needs a {kind!r} potential, got {potential.kind!r}")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_solve(config: dict, args) -> int:
    out = _out_dir(config, args)
    pot = _potential(config)
    p, q = _endpoints(config)
    A = float(config["A"])
    res = minimize_constrained(p, q, A, pot, _solver_config(config, args))
    _write_json(os.path.join(out, "result.json"), res.to_json_dict())
    _write_curve_csv(os.path.join(out, "curve.csv"), res.curve)
    if res.nonexistence_suspected:
        log.info("non-existence suspected at A = %g", A)
        return 2
    return 0 if res.converged else 2


def cmd_sweep(config: dict, args) -> int:
    out = _out_dir(config, args)
    pot = _potential(config)
    p, q = _endpoints(config)
    A_list = config.get("A_list")
    if not A_list:
        raise ValueError("config needs a nonempty \"A_list\"")
    A_list = [float(a) for a in A_list]
    if any(b < a for a, b in zip(A_list, A_list[1:])):
        log.info("A_list not ascending; sorting it")
    rows = area_sweep(p, q, A_list, pot, _solver_config(config, args))
    with open(os.path.join(out, "table.csv"), "w") as fh:
        fh.write("A,energy,multiplier,slope_fd,converged,flagged\n")
        for row in rows:
            slope = "" if row["slope_fd"] is None else repr(row["slope_fd"])
            fh.write(f"{row['A']!r},{row['energy']!r},{row['multiplier']!r},"
                     f"{slope},{str(row['converged']).lower()},"
                     f"{str(row['flagged']).lower()}\n")
    return 2 if any(row["flagged"] for row in rows) else 0


def cmd_homogeneous(config: dict, args) -> int:
    out = _out_dir(config, args)
    pot = _potential(config)
    _require_kind(pot, "homogeneous")
    l1 = pot.params["lambda1"]
    l2 = pot.params["lambda2"]
    p0 = config.get("p0", [1.0, 0.0])
    mode = config.get("mode", "solve")
    if mode == "ellipse":
        curve, E = minimizing_ellipse(p0, l1, l2, int(config.get("n", 4096)))
        payload = {"mode": "ellipse", "energy": E, "area": area(curve),
                   "rate": l1 + l2, "lambda1": l1, "lambda2": l2}
    elif mode == "solve":
        sol = solve_homogeneous(p0, float(config["A"]), l1, l2)
        curve = sol.curve
        payload = {"mode": "solve", "beta": sol.beta, "energy": sol.energy,
                   "area": sol.area, "lambda1": l1, "lambda2": l2,
                   "multiplier": (l1 + l2) * math.cos(sol.beta)}
    else:
        raise ValueError(f"unknown homogeneous mode {mode!r}")
    _write_json(os.path.join(out, "result.json"), payload)
    _write_curve_csv(os.path.join(out, "curve.csv"), curve)
    return 0


def cmd_radial(config: dict, args) -> int:
    out = _out_dir(config, args)
    pot = _potential(config)
    _require_kind(pot, "radial_quartic")
    b = pot.params["b"]
    if b <= 0.0:
        raise ValueError("the figure bundle needs b > 0")
    R0 = float(config.get("R0", 1.0))
    A_tilde = float(config["A_tilde"])
    bundle = figure1_bundle(R0, A_tilde, b)
    _write_json(os.path.join(out, "figure1.json"), bundle)
    _write_json(os.path.join(out, "result.json"),
                {"bundle": bundle, "multiplier": 2.0 * bundle["C1"]})

    thr = existence_threshold(R0, b)
    above = abs(A_tilde) > thr
    n = int(config.get("n", 1024))
    if above:
        path, _extent = vertical_segment_resolution(R0, A_tilde, b, n)
    else:
        path = parabola_geodesic(bundle["C1"], b, R0, n)
    with open(os.path.join(out, "table.csv"), "w") as fh:
        fh.write(path_to_csv(path))

    r_outer = math.sqrt(R0)
    r_inner = float(config.get("r_inner", 1e-3 * r_outer))
    if bundle["C1"] != 0.0:
        curve = spiral_from_C1(bundle["C1"], b, r_outer, r_inner)
    else:
        curve = Curve(np.array([[r_outer, 0.0], [r_inner, 0.0]]))
    _write_curve_csv(os.path.join(out, "curve.csv"), curve)
    if above:
        log.info("requested area %g exceeds the cap %g", A_tilde, thr)
        return 2
    return 0


def cmd_wave(config: dict, args) -> int:
    out = _out_dir(config, args)
    pot = _potential(config)
    p, q = _endpoints(config)
    A = float(config["A"])
    res = minimize_constrained(p, q, A, pot, _solver_config(config, args))
    if res.nonexistence_suspected or not res.converged:
        log.info("solve flagged; not writing a profile")
        _write_json(os.path.join(out, "result.json"), res.to_json_dict())
        return 2
    profile = to_traveling_wave(res, pot)
    k = int(config.get("n_modes", 6))
    eigenvalues, mode = second_variation_spectrum(profile, pot, k)
    alignment = zero_mode_alignment(profile, mode)
    profile_to_csv(profile, os.path.join(out, "profile.csv"))
    _write_json(os.path.join(out, "spectrum.json"),
                {"eigenvalues": eigenvalues, "zero_mode_alignment": alignment})
    payload = res.to_json_dict()
    payload.update({
        "nu": profile.nu,
        "wave_residual": wave_residual(profile, pot),
        "hamiltonian": hamiltonian_energy(profile, pot),
        "hamiltonian_tail": hamiltonian_tail_estimate(profile, pot),
        "sqrt2_energy": math.sqrt(2.0) * energy(res.curve, pot),
    })
    _write_json(os.path.join(out, "result.json"), payload)
    return 0


_COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "homogeneous": cmd_homogeneous,
    "radial": cmd_radial,
    "wave": cmd_wave,
}


def _setup_logging(quiet: bool) -> None:
    level_name = "error" if quiet else os.environ.get("DEGEO_LOG", "info")
    level = {"error": logging.ERROR, "info": logging.INFO,
             "debug": logging.DEBUG}.get(level_name.lower(), logging.INFO)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(name)s %(levelname)s %(message)s")
    logging.getLogger("degeo").setLevel(level)


def main(argv: Optional[list] = None) -> int:
    parser = _Parser(prog="degeo",
                     description="area-constrained degenerate geodesics")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} command")
        p.add_argument("config", help="JSON config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="seed recorded in the solver config")
        p.add_argument("--quiet", action="store_true",
                       help="log errors only")
        p.add_argument("--jobs", type=int, default=None,
                       help="accepted for compatibility; runs are serial")
    args = parser.parse_args(argv)
    _setup_logging(args.quiet)
    if args.jobs is not None and args.jobs != 1:
        log.info("--jobs requested; sweeps stay serial for warm starting")
    try:
        config = _load_config(args.config)
        return _COMMANDS[args.command](config, args)
    except _FLAG_ERRORS as exc:
        print(f"degeo: {exc}", file=sys.stderr)
        return 2
    except (DegeoError, KeyError, ValueError, TypeError, OSError,
            json.JSONDecodeError) as exc:
        print(f"degeo: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

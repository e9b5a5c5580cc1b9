"""Command-line front end: ``gibbs-charts <subcommand> [--config FILE] [overrides]``.

Every subcommand reads one JSON config (all keys optional) and applies flag
overrides on top.  Outputs go to ``output_dir`` and carry the effective
config in a header, so identical configs give byte-identical files.

Exit codes: 0 success, 1 a check failed (or a potential is not certified),
2 the input could not be used.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .errors import GibbsChartsError
from .markov import (CAT_MAP, build_automorphism, catmap_partition, periodic_orbits,
                     verify_partition)
from .potentials import Potential, potential_from_json
from .sft import SubshiftSpec, build_sft
from .thermo import brs_measure, invariant_normalization, pressure
from .torus import TorusFunction, forward_table, trig_from_json

SCHEMA_VERSION = 1

DEFAULTS = {
    "matrix": [list(row) for row in CAT_MAP],
    "shift_matrix": None,
    "partition": None,
    "phi_u": None,
    "phi_s": None,
    "potential": None,
    "add_constant": 0.0,
    "depth": 12,
    "seed": 0,
    "output_dir": "gibbs_out",
    "max_period": 6,
    "mass_depth": 6,
    "measure": "eigen",
    "tolerances": {"eigen_error": 1e-3, "livshitz": 1e-9, "variational": 1e-8},
    "boundary_threshold": 0.02,
    "boundary_deltas": None,
    "geometry_depth": 14,
    "holonomy_samples": 1000,
    "qs_levels": None,
}

CAPS = {"depth": (2, 16), "geometry_depth": (2, 16), "max_period": (1, 10),
        "mass_depth": (1, 16)}


class InputError(Exception):
    """Unusable configuration or input file (exit code 2)."""


# -- config ---------------------------------------------------------------

def _read_json(text_or_path, what):
    if text_or_path is None:
        return None
    if isinstance(text_or_path, (dict, list)):
        return text_or_path
    src = str(text_or_path)
    try:
        if os.path.exists(src):
            with open(src) as fh:
                return json.load(fh)
        return json.loads(src)
    except json.JSONDecodeError as exc:
        raise InputError("%s: malformed JSON (%s at line %d column %d)"
                         % (what, exc.msg, exc.lineno, exc.colno)) from exc


def load_config(args) -> dict:
    """Merge defaults, the config file and command-line overrides."""
    cfg = json.loads(json.dumps(DEFAULTS))
    if args.config:
        data = _read_json(args.config, "config")
        if not isinstance(data, dict):
            raise InputError("config must be a JSON object")
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise InputError("unknown config keys: %s" % ", ".join(sorted(unknown)))
        for k, v in data.items():
            if k == "tolerances":
                cfg[k].update(v)
            else:
                cfg[k] = v
    for key in ("matrix", "shift_matrix", "phi_u", "phi_s", "potential"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = _read_json(val, key)
    for key in ("depth", "seed", "output_dir", "max_period", "mass_depth", "measure",
                "add_constant", "partition", "boundary_threshold", "geometry_depth",
                "holonomy_samples"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    for key in ("phi_u", "phi_s", "potential", "matrix", "shift_matrix"):
        if isinstance(cfg[key], str):
            cfg[key] = _read_json(cfg[key], key)
    for key, (lo, hi) in CAPS.items():
        v = cfg[key]
        if not isinstance(v, int) or not lo <= v <= hi:
            raise InputError("%s must be an integer in [%d, %d], got %r" % (key, lo, hi, v))
    if cfg["measure"] not in ("eigen", "invariant"):
        raise InputError("measure must be 'eigen' or 'invariant'")
    return cfg


def _potential(spec_json, spec: SubshiftSpec | None):
    """Parse a potential spec into a TorusFunction, a table or ``None``."""
    if spec_json is None:
        return None
    if isinstance(spec_json, (int, float)):
        return TorusFunction.constant(float(spec_json))
    if not isinstance(spec_json, dict):
        raise InputError("potential spec must be a JSON object")
    try:
        if "trig" in spec_json:
            return trig_from_json(spec_json)
        if "table" in spec_json:
            if spec is None:
                raise InputError("table potentials need a shift")
            return potential_from_json(spec, spec_json)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InputError("bad potential spec: %s" % exc) from exc
    raise InputError("potential spec needs a 'trig' or 'table' key")


def _partition(cfg):
    aut = build_automorphism(cfg["matrix"])
    return catmap_partition(aut, cfg["partition"])


def _table_on(part, phi, depth):
    if phi is None:
        return Potential(part.spec, 1, np.zeros(part.spec.r))
    if isinstance(phi, TorusFunction):
        return forward_table(phi, part, depth, seed=0)
    return phi


def _shift_and_potential(cfg):
    """Shift plus table for the symbolic subcommands (pressure, gibbs)."""
    if cfg["shift_matrix"] is not None:
        spec = build_sft(cfg["shift_matrix"])
        phi = _potential(cfg["potential"], spec)
        if isinstance(phi, TorusFunction):
            raise InputError("trig potentials need the toral coding, not a bare shift")
        table = phi if phi is not None else Potential(spec, 1, np.zeros(spec.r))
        return spec, table
    part = _partition(cfg)
    phi = _potential(cfg["potential"] if cfg["potential"] is not None else cfg["phi_u"],
                     part.spec)
    return part.spec, _table_on(part, phi, cfg["depth"])


# -- output ---------------------------------------------------------------

def _atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _out(cfg, name):
    return os.path.join(cfg["output_dir"], name)


def _echo(cfg):
    """Config as echoed into outputs; the output location is left out."""
    return {k: v for k, v in cfg.items() if k != "output_dir"}


def _write_json(cfg, name, payload):
    body = dict(payload, schema_version=SCHEMA_VERSION, config=_echo(cfg))
    _atomic_write(_out(cfg, name), json.dumps(body, indent=2, sort_keys=True) + "\n")


def _write_csv(cfg, name, header, rows):
    buf = io.StringIO()
    buf.write("# " + json.dumps({"schema_version": SCHEMA_VERSION, "config": _echo(cfg)},
                                sort_keys=True) + "\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                     for v in row])
    _atomic_write(_out(cfg, name), buf.getvalue())


def _write_reports(cfg, name, reports):
    from .verify import summary_table, write_reports
    buf = io.StringIO()
    write_reports(buf, reports)
    _atomic_write(_out(cfg, name), buf.getvalue())
    print(summary_table(reports))
    return 0 if all(r.passed for r in reports) else 1


# -- subcommands ----------------------------------------------------------

def cmd_pressure(cfg) -> int:
    spec, table = _shift_and_potential(cfg)
    if cfg["add_constant"]:
        table = table + float(cfg["add_constant"])
    P, err = pressure(spec, table, cfg["depth"])
    _write_json(cfg, "pressure.json", {"P": P, "error_bound": err,
                                       "depth": max(cfg["depth"], table.depth),
                                       "certified": table.certified})
    print("P = %.15g  (error bound %.3g)" % (P, err))
    return 0 if table.certified else 1


def cmd_gibbs(cfg) -> int:
    from .verify import birkhoff_extrema, bowen_constants
    spec, table = _shift_and_potential(cfg)
    n = cfg["mass_depth"]
    if cfg["measure"] == "invariant":
        phi_p, _, mu = invariant_normalization(spec, table, max(cfg["depth"], table.depth))
        c1, c2, _, _ = bowen_constants(spec, phi_p, n)
        s_lo, s_hi = birkhoff_extrema(spec, phi_p, n)
    else:
        mu = brs_measure(spec, table, max(cfg["depth"], table.depth))
        phi_p, c1, c2 = None, None, None
        s_lo, s_hi = birkhoff_extrema(spec, table, n)
    masses = mu.masses_at(n)
    lev = spec.level(n)
    sep = "" if spec.r <= 10 else "-"
    rows = []
    ok_all = True
    for w, m, lo, hi in zip(lev.words, masses, s_lo, s_hi):
        ok = ""
        if c1 is not None:
            ok = int(c1 <= m / math.exp(hi) and m / math.exp(lo) <= c2)
            ok_all &= bool(ok)
        rows.append([sep.join(str(int(s)) for s in w), float(m), float(lo), float(hi), ok])
    _write_csv(cfg, "masses.csv", ["word", "mass", "S_n_phi_min", "S_n_phi_max", "bound_ok"],
               rows)
    print("%d cylinders of length %d written" % (len(rows), n))
    return 0 if ok_all and table.certified else 1


def cmd_partition(cfg) -> int:
    part = _partition(cfg)
    diag = verify_partition(part, seed=cfg["seed"])
    os.makedirs(cfg["output_dir"], exist_ok=True)
    payload = part.to_json()
    payload["schema_version"] = SCHEMA_VERSION
    _atomic_write(_out(cfg, "partition.json"), json.dumps(payload, indent=2) + "\n")
    _write_csv(cfg, "partition_checks.csv", ["check", "value"], sorted(diag.items()))
    print("%d rectangles, transition matrix %s" % (part.r, part.transition_matrix.tolist()))
    return 0


def _structure(cfg):
    from .charts import synthesize_structure
    part = _partition(cfg)
    phi_u = _potential(cfg["phi_u"], part.spec)
    phi_s = _potential(cfg["phi_s"], part.inverse_view().spec)
    return part, phi_u, phi_s, synthesize_structure(part, phi_u, phi_s, cfg["depth"])


def cmd_synthesize(cfg) -> int:
    part, _, _, st = _structure(cfg)
    _write_json(cfg, "structure.json", st.summary())
    for name, F in (("F_u.csv", st.F_u), ("F_s.csv", st.F_s)):
        _write_csv(cfg, name, ["arclength", "F"], zip(F.breakpoints, F.cumulative))
    print(json.dumps(st.summary(), sort_keys=True))
    return 0 if st.summary()["certified"] else 1


def cmd_eigencheck(cfg) -> int:
    from .charts import measured_eigenvalues, predicted_eigenvalues
    part, phi_u, phi_s, st = _structure(cfg)
    rows, worst = [], 0.0
    oid = 0
    for n in range(1, cfg["max_period"] + 1):
        for orbit in periodic_orbits(part.aut, n):
            lu, ls = measured_eigenvalues(st, part.aut, orbit)
            pu, ps = predicted_eigenvalues(phi_u, phi_s, st.P_u, st.P_s, orbit, part)
            err = max(abs(math.log(lu / pu)), abs(math.log(ls / ps)))
            worst = max(worst, err)
            rows.append([oid, n, lu, pu, ls, ps, err])
            oid += 1
    _write_csv(cfg, "eigencheck.csv",
               ["orbit", "n", "lambda_u_meas", "lambda_u_pred", "lambda_s_meas",
                "lambda_s_pred", "err"], rows)
    tol = cfg["tolerances"]["eigen_error"]
    print("%d orbits, max log error %.3g (tolerance %.3g)" % (len(rows), worst, tol))
    return 0 if worst <= tol and st.summary()["certified"] else 1


def cmd_qs_check(cfg) -> int:
    from .verify import quasisymmetry_check
    _, _, _, st = _structure(cfg)
    reps = []
    for tag, F, side in (("_u", st.F_u, st.side_u), ("_s", st.F_s, st.side_s)):
        r = quasisymmetry_check(F, cfg["qs_levels"], phi_prime=side.normalized)
        r.name += tag
        reps.append(r)
    return _write_reports(cfg, "qs_check.jsonl", reps)


def cmd_geometry_check(cfg) -> int:
    from .verify import partition_geometry_check
    part = _partition(cfg)
    return _write_reports(cfg, "geometry_check.jsonl",
                          partition_geometry_check(part, cfg["geometry_depth"]))


def cmd_boundary_check(cfg) -> int:
    from .verify import boundary_mass_check
    _, _, _, st = _structure(cfg)
    reps = []
    for tag, side in (("_u", st.side_u), ("_s", st.side_s)):
        r = boundary_mass_check(side.view, side.invariant, cfg["boundary_deltas"],
                                cfg["boundary_threshold"])
        r.name += tag
        reps.append(r)
    return _write_reports(cfg, "boundary_check.jsonl", reps)


def cmd_verify(cfg) -> int:
    from .verify import CheckReport, run_suite
    part = _partition(cfg)
    phi_u = _potential(cfg["phi_u"], part.spec)
    phi_s = _potential(cfg["phi_s"], part.inverse_view().spec)
    th = {"livshitz_tol": cfg["tolerances"]["livshitz"],
          "variational_tol": cfg["tolerances"]["variational"],
          "boundary_threshold": cfg["boundary_threshold"],
          "holonomy_samples": cfg["holonomy_samples"],
          "geometry_depth": cfg["geometry_depth"], "max_period": cfg["max_period"]}
    reps = run_suite(part, phi_u, phi_s, cfg["depth"], cfg["seed"], th)
    for tag, phi, view in (("_u", phi_u, part), ("_s", phi_s, part.inverse_view())):
        if isinstance(phi, TorusFunction) and phi.freqs.shape[0]:
            cert = forward_table(phi, view, cfg["depth"]).certified
        else:
            cert = True
        reps.append(CheckReport("certified" + tag, cert, 0.0 if cert else 1.0, 0.0, 1,
                                {"depth": cfg["depth"]}))
    reps.sort(key=lambda r: r.name)
    return _write_reports(cfg, "verify.jsonl", reps)


COMMANDS = {
    "pressure": (cmd_pressure, "topological pressure of a potential"),
    "gibbs": (cmd_gibbs, "cylinder masses of the Gibbs measure as CSV"),
    "partition": (cmd_partition, "build and check the Markov partition"),
    "synthesize": (cmd_synthesize, "coordinate functions and pressure constants"),
    "eigencheck": (cmd_eigencheck, "measured vs prescribed periodic eigenvalues"),
    "qs-check": (cmd_qs_check, "quasisymmetry of the coordinate functions"),
    "geometry-check": (cmd_geometry_check, "partition geometry inequalities"),
    "boundary-check": (cmd_boundary_check, "mass near the partition boundary"),
    "verify": (cmd_verify, "run the full verification suite"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--matrix", help="automorphism matrix as JSON")
    common.add_argument("--shift-matrix", dest="shift_matrix",
                        help="0/1 transition matrix (JSON) for a bare shift")
    common.add_argument("--partition", help="partition file (non cat-map matrices)")
    common.add_argument("--phi-u", dest="phi_u", help="unstable potential (JSON or file)")
    common.add_argument("--phi-s", dest="phi_s", help="stable potential (JSON or file)")
    common.add_argument("--potential", help="potential for pressure/gibbs (JSON or file)")
    common.add_argument("--depth", type=int, help="working cylinder depth")
    common.add_argument("--seed", type=int)
    common.add_argument("--output-dir", dest="output_dir")
    common.add_argument("--max-period", dest="max_period", type=int)
    common.add_argument("--mass-depth", dest="mass_depth", type=int,
                        help="cylinder length for the gibbs mass dump")
    common.add_argument("--measure", choices=["eigen", "invariant"])
    common.add_argument("--add-constant", dest="add_constant", type=float,
                        help="add a constant to the potential (pressure)")
    common.add_argument("--boundary-threshold", dest="boundary_threshold", type=float)
    common.add_argument("--geometry-depth", dest="geometry_depth", type=int)
    common.add_argument("--holonomy-samples", dest="holonomy_samples", type=int)

    parser = argparse.ArgumentParser(prog="gibbs-charts", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, helptext) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=helptext)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        return COMMANDS[args.command][0](cfg)
    except (InputError, GibbsChartsError, KeyError, TypeError, ValueError) as exc:
        # anything raised while interpreting the input is an input error
        print("gibbs-charts: error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

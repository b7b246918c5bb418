"""Command-line front end emitting plot-ready CSV or JSON.

Examples
--------
    xxzbethe fermi --regime gapless --zeta 0.4 --D 0.25
    xxzbethe solve --regime gapless --zeta 1.5707963267948966 --L 256 --N 64
    xxzbethe counting --regime gapless --zeta 0.4 --D 0.25 --L 64,128,256,512 --out ladder.csv --plot
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import kernels as kn
from .bae import ChainParams, ExcitationSpec, solve_state
from .counting import convergence_report
from .dressed import density, dressed_charge, dressed_energy, dressed_momentum
from .errors import FieldOutOfRange, InvalidSpec, NoConvergence, XXZError
from .fermi import (
    fermi_boundary_from_field,
    fermi_point_for_density,
    magnetic_fermi_boundary,
)
from .kernels import Anisotropy
from .observables import catalog_function, conformal_check, densify

COMMANDS = ("dressed", "fermi", "solve", "counting", "densify", "spectrum")


def _int_list(text):
    if text is None or text == "":
        return None
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    return [int(x) for x in str(text).split(",") if x.strip()]


def _rel_list(text):
    """Integers or N-relative tokens such as ``N+2``; kept as strings until N is known."""
    if text is None or text == "":
        return ()
    items = text if isinstance(text, (list, tuple)) else str(text).split(",")
    out = []
    for tok in items:
        tok = str(tok).replace(" ", "")
        if not tok:
            continue
        if not re.fullmatch(r"-?\d+|N([+-]\d+)?", tok):
            raise InvalidSpec(f"cannot read quantum number {tok!r}")
        out.append(tok)
    return tuple(out)


def _eval_rel(tok: str, N: int) -> int:
    if tok.startswith("N"):
        return N + (int(tok[1:]) if len(tok) > 1 else 0)
    return int(tok)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="xxzbethe", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--regime", choices=kn.REGIMES)
        p.add_argument("--zeta", type=float)
        p.add_argument("--J", type=float)
        p.add_argument("--h", type=float)
        p.add_argument("--D", type=float)
        p.add_argument("--L", type=str, help="one size or a comma-separated ladder")
        p.add_argument("--N", type=int)
        p.add_argument("--N-offset", type=int, dest="N_offset", help="densify: use N = round(D L) + offset on each L")
        p.add_argument("--holes", type=str, help="comma-separated hole integers; N, N+k, N-k allowed")
        p.add_argument("--particles", type=str, help="comma-separated particle integers; N, N+k, N-k allowed")
        p.add_argument("--s", type=int)
        p.add_argument("--ell", type=int)
        p.add_argument("--nodes", type=int, help="fixed Nystrom node count (default: adaptive)")
        p.add_argument("--tol", type=float)
        p.add_argument("--out", type=str)
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--config", type=str, help="JSON file with defaults; flags override it")
        p.add_argument("--function", choices=("one", "tanh", "gauss", "bare_energy"))
        p.add_argument("--points", type=int, help="grid size for the dressed table")
        p.add_argument("--plot", action="store_true", help="also render a PNG next to --out")
    return ap


DEFAULTS = {
    "J": 1.0, "s": 0, "ell": 0, "N_offset": 0, "tol": 1e-12, "format": None, "function": "tanh",
    "points": 201, "plot": False,
}


def resolve_config(ns: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if ns.config:
        with open(ns.config) as fh:
            cfg.update(json.load(fh))
    for key, val in vars(ns).items():
        if key == "config":
            continue
        if val is not None and not (key == "plot" and val is False):
            cfg[key] = val
    if cfg.get("regime") is None:
        raise InvalidSpec("--regime is required")
    cfg["L"] = _int_list(cfg.get("L"))
    cfg["holes"] = _rel_list(cfg.get("holes"))
    cfg["particles"] = _rel_list(cfg.get("particles"))
    return cfg


def anisotropy(cfg) -> Anisotropy:
    try:
        if cfg["regime"] == "isotropic":
            return Anisotropy.isotropic()
        if cfg.get("zeta") is None:
            raise InvalidSpec("--zeta is required for this regime")
        return Anisotropy(cfg["regime"], cfg["zeta"])
    except ValueError as exc:
        raise InvalidSpec(str(exc)) from exc


def excitation(cfg, N: int) -> ExcitationSpec:
    holes = [_eval_rel(t, N) for t in cfg["holes"]]
    parts = [_eval_rel(t, N) for t in cfg["particles"]]
    return ExcitationSpec(holes, parts, int(cfg["s"]), int(cfg["ell"]))


def _has_excitation(cfg) -> bool:
    return bool(cfg["holes"] or cfg["particles"] or cfg["s"])


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    cols = list(rows[0].keys()) if rows else []
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in cols])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


# ---------------------------------------------------------------- commands


def cmd_dressed(cfg):
    a = anisotropy(cfg)
    J = cfg["J"]
    if cfg.get("D") is not None:
        fp = magnetic_fermi_boundary(cfg["D"], a, cfg.get("nodes"))
        Q, D = fp.Q, fp.D
        h = cfg["h"] if cfg.get("h") is not None else fermi_point_for_density(D, a, J).h
    elif cfg.get("h") is not None:
        fp = fermi_boundary_from_field(cfg["h"], a, J)
        Q, D, h = fp.Q, fp.D, cfg["h"]
    else:
        raise InvalidSpec("dressed needs --D or --h")
    n = cfg.get("nodes")
    lam = np.linspace(-2 * max(Q, 0.1), 2 * max(Q, 0.1), int(cfg["points"]))
    rho, Z = density(Q, a, n), dressed_charge(Q, a, n)
    eps, p = dressed_energy(Q, a, J, h, n), dressed_momentum(Q, D, a, n)
    pv = p(lam)
    rows = [
        {"lambda": l, "rho": r, "Z": z, "eps": e, "p": pp, "xi0": pp + 0.5 * D}
        for l, r, z, e, pp in zip(lam, rho(lam), Z(lam), eps(lam), pv)
    ]
    return rows, "csv"


def cmd_fermi(cfg):
    a = anisotropy(cfg)
    J = cfg["J"]
    hc, hl = kn.critical_fields(a, J)
    out = {"regime": a.regime, "zeta": a.zeta, "h_c": hc, "h_c_lower": hl}
    if cfg.get("D") is not None:
        fp = magnetic_fermi_boundary(cfg["D"], a, cfg.get("nodes"))
        out.update(q=fp.Q, D=fp.D)
    if cfg.get("h") is not None:
        fp = fermi_boundary_from_field(cfg["h"], a, J)
        out.update(Q_F=fp.Q, D_F=fp.D, h=cfg["h"])
    if "q" not in out and "Q_F" not in out:
        raise InvalidSpec("fermi needs --D or --h")
    return out, "json"


def _single_L(cfg) -> int:
    Ls = cfg["L"]
    if not Ls or len(Ls) != 1:
        raise InvalidSpec("this command needs exactly one --L")
    return Ls[0]


def _count(cfg, L) -> int:
    if cfg.get("N") is not None:
        return int(cfg["N"])
    if cfg.get("D") is not None:
        return int(round(cfg["D"] * L))
    raise InvalidSpec("give --N or --D")


def cmd_solve(cfg):
    a = anisotropy(cfg)
    L = _single_L(cfg)
    params = ChainParams(L, _count(cfg, L), cfg["J"], cfg.get("h") or 0.0)
    st = solve_state(params, excitation(cfg, params.N), a, tol=cfg["tol"])
    return {
        "L": L, "N": params.N, "roots": st.roots, "integers": st.integers,
        "residual": st.residual, "action": st.action_value,
    }, "json"


def cmd_counting(cfg):
    a = anisotropy(cfg)
    if cfg.get("D") is None or not cfg["L"]:
        raise InvalidSpec("counting needs --D and --L")
    rows, fits = convergence_report(lambda N: excitation(cfg, N), a, cfg["D"], cfg["L"], with_nlie=True)
    for r in rows:
        for k, v in fits.items():
            r[f"exponent_{k}"] = v
    return rows, "csv"


def cmd_densify(cfg):
    a = anisotropy(cfg)
    if cfg.get("D") is None or not cfg["L"]:
        raise InvalidSpec("densify needs --D and --L")
    D = cfg["D"]
    fp = magnetic_fermi_boundary(D, a, cfg.get("nodes"))
    f = catalog_function(cfg["function"], a, cfg["J"], cfg.get("h") or 0.0)
    rows = []
    for L in cfg["L"]:
        N = int(cfg["N"]) if cfg.get("N") is not None else int(round(D * L)) + int(cfg["N_offset"])
        st = solve_state(ChainParams(L, N, cfg["J"], cfg.get("h") or 0.0), excitation(cfg, N), a, tol=cfg["tol"])
        s, integral, gap = densify(st, f, fp)
        rows.append({"L": L, "N": N, "sum_over_L": s, "integral": integral, "gap": gap, "gap_times_L": gap * L})
    return rows, "csv"


def cmd_spectrum(cfg):
    a = anisotropy(cfg)
    if cfg.get("D") is None or not cfg["L"]:
        raise InvalidSpec("spectrum needs --D and --L")
    families = {"ground": lambda N: ExcitationSpec()}
    if _has_excitation(cfg):
        families["excited"] = lambda N: excitation(cfg, N)
    rows, _ = conformal_check(a, cfg["D"], families, cfg["L"], cfg["J"])
    out = [
        {
            "state": r["family"], "L": r["L"], "N": r["N"], "E_raw": r["E_raw"],
            "prediction": r["prediction"], "scaled": r["scaled"],
            "scaled_defect": r["deviation"], "v_F": r["v_F"], "Z": r["Z"], "h": r["h"],
        }
        for r in rows
    ]
    return out, "csv"


HANDLERS = {
    "dressed": cmd_dressed, "fermi": cmd_fermi, "solve": cmd_solve,
    "counting": cmd_counting, "densify": cmd_densify, "spectrum": cmd_spectrum,
}


def render(result, kind: str, fmt: str | None) -> str:
    fmt = fmt or kind
    if fmt == "json":
        return json.dumps(_jsonable(result), indent=2, sort_keys=False) + "\n"
    if isinstance(result, dict):
        result = [{k: v for k, v in result.items() if not isinstance(v, (list, tuple, np.ndarray))}]
    return to_csv(result)


def _fail(code: int, exc: Exception) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
    return code


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(ns)
        result, kind = HANDLERS[ns.command](cfg)
        text = render(result, kind, cfg.get("format"))
    except (InvalidSpec, FieldOutOfRange) as exc:
        return _fail(2, exc)
    except NoConvergence as exc:
        return _fail(3, exc)
    except (XXZError, ValueError, OSError) as exc:
        return _fail(1, exc)
    if cfg.get("out"):
        Path(cfg["out"]).write_text(text)
        if cfg.get("plot"):
            from .plotting import render_figure

            render_figure(ns.command, Path(cfg["out"]), result)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

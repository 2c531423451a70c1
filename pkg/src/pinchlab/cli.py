"""Command-line front end.

    pinchlab verify-identities [--n-max 4] [--k-max 4] [--corrupt]
    pinchlab spectrum --target {sphere,dumbbell,covered,bump} [--n 2] [--count 9]
    pinchlab pinch-report --target {sphere,bump,dumbbell} [--p 2] [--q 4]
    pinchlab sweep --kind {convergence,spectrum,both} [--eps-list 1e-1,1e-2,1e-3,1e-4]

Every command accepts ``--config FILE`` (flat key=value lines; keys are the
long flag names) and ``--output PATH``.  Flags override the file, the file
overrides the defaults, and the merged config is echoed into the report.
Exit status: 0 all checks pass, 1 a check failed, 2 bad config or runtime error.
"""
from __future__ import annotations

import argparse
import concurrent.futures as cf
import datetime as _dt
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class ConfigError(ValueError):
    pass


def _floats(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).replace(" ", "").split(",") if x]


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "on", "yes"):
        return True
    if t in ("0", "false", "off", "no"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


# (type, default) per option; option names double as config-file keys
COMMON = {
    "output": (str, None),
    "format": (str, "json"),
    "assert": (_bool, True),
}
OPTIONS = {
    "verify-identities": {
        "n_min": (int, 2), "n_max": (int, 4), "k_max": (int, 4), "points": (int, 100),
        "seed": (int, 0), "tol": (float, 1e-9), "corrupt": (_bool, False),
    },
    "spectrum": {
        "target": (str, "sphere"), "n": (int, 2), "k": (int, 0), "eps": (float, 1e-3),
        "a": (float, math.pi / 20), "d": (int, 2), "delta": (float, 0.05), "radius": (float, 1.0),
        "count": (int, 9), "grid": (int, 800), "separation": (float, 0.3),
    },
    "pinch-report": {
        "target": (str, "sphere"), "n": (int, 2), "k": (int, 0), "eps": (float, 1e-3),
        "a": (float, math.pi / 20), "delta": (float, 0.05), "radius": (float, 1.0),
        "p": (float, 2.0), "q": (float, None), "r_exp": (float, 1.0), "grid": (int, 800),
        "tol": (float, 1e-6),
    },
    "sweep": {
        "kind": (str, "convergence"), "n": (int, 2), "k": (int, 0),
        "eps_list": (_floats, [1e-1, 1e-2, 1e-3, 1e-4]), "a": (float, math.pi / 20),
        "sigma_max": (int, 8), "grid": (int, 800), "out_dir": (str, None),
        "bound_factor": (float, 10.0), "final_max": (float, 0.05), "growth_min": (float, 2.0),
        "eps_check": (float, 1e-3), "lambda1_max": (float, 0.15), "dev_max": (float, 0.2),
        "sigma_dev": (int, 7),
    },
}


def read_config_file(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def resolve_config(command: str, flags: dict, file_values: dict | None = None) -> dict:
    """Merge defaults < config file < flags, converting types."""
    spec = {**COMMON, **OPTIONS[command]}
    cfg = {key: default for key, (_, default) in spec.items()}
    for source in (file_values or {}, flags):
        for key, val in source.items():
            if val is None:
                continue
            if key not in spec:
                raise ConfigError(f"unknown option for {command}: {key}")
            conv = spec[key][0]
            try:
                cfg[key] = conv(val)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {val!r} ({exc})") from None
    validate(command, cfg)
    return cfg


def validate(command: str, cfg: dict):
    def need(cond, msg):
        if not cond:
            raise ConfigError(msg)

    need(cfg["format"] in ("json", "csv"), "format must be json or csv")
    if command == "verify-identities":
        need(2 <= cfg["n_min"] <= cfg["n_max"] <= 4, "need 2 <= n_min <= n_max <= 4")
        need(1 <= cfg["k_max"] <= 6, "need 1 <= k_max <= 6")
        need(cfg["points"] >= 1 and cfg["tol"] > 0, "points and tol must be positive")
        return
    if "n" in cfg:
        need(2 <= cfg["n"] <= 8, "need 2 <= n <= 8")
    if "grid" in cfg:
        need(cfg["grid"] >= 50, "grid must be at least 50 cells")
    if command in ("spectrum", "pinch-report"):
        targets = ("sphere", "dumbbell", "covered", "bump") if command == "spectrum" else (
            "sphere", "dumbbell", "bump")
        need(cfg["target"] in targets, f"target must be one of {targets}")
        need(cfg["radius"] > 0, "radius must be positive")
        need(0 < cfg["delta"] < 0.5, "need 0 < delta < 1/2")
    if command == "spectrum":
        need(cfg["count"] >= 1, "count must be positive")
        need(cfg["d"] >= 1, "d must be a positive integer")
        if cfg["target"] == "covered":
            need(cfg["n"] >= 3, "the covered sphere needs n >= 3")
    if command == "pinch-report":
        need(cfg["p"] >= 2, "need p >= 2")
        if cfg["q"] is None:
            cfg["q"] = 2.0 * cfg["n"]
        need(cfg["q"] > cfg["n"], "need q > n")
        need(cfg["r_exp"] >= 1, "need r_exp >= 1")
    if command == "sweep":
        need(cfg["kind"] in ("convergence", "spectrum", "both"), "kind must be convergence, spectrum or both")
        eps = cfg["eps_list"]
        need(len(eps) >= 2 and all(b < a for a, b in zip(eps, eps[1:])), "eps_list must be strictly decreasing")
        need(cfg["sigma_max"] >= 1, "sigma_max must be positive")
    if command in ("spectrum", "pinch-report", "sweep") and (
            command == "sweep" or cfg["target"] == "dumbbell"):
        need(0 <= cfg["k"] <= cfg["n"] - 2, "need 0 <= k <= n-2")
        need(0 < cfg["a"] < math.pi / 10, "need 0 < a < pi/10")
        eps = cfg["eps_list"] if command == "sweep" else [cfg["eps"]]
        need(all(0 < e < cfg["a"] for e in eps), "need 0 < eps < a")


def threads() -> int:
    try:
        return max(1, int(os.environ.get("PINCHLAB_THREADS", "1")))
    except ValueError:
        raise ConfigError("PINCHLAB_THREADS must be an integer") from None


def _pmap(fn, items):
    workers = min(threads(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with cf.ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def _checks(triples):
    return [{"name": n, "ok": bool(ok), "detail": d} for n, ok, d in triples]


def _report(command, cfg, body, checks):
    return {
        "command": command,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config": cfg,
        "threads": threads(),
        "checks": checks,
        "passed": all(c["ok"] for c in checks),
        "result": body,
    }


def dumps(report) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# commands

def _corrupt(basis):
    """Perturb one coefficient of the first member (negative control)."""
    from dataclasses import replace
    from fractions import Fraction

    from .harmonics import HomogeneousPolynomial

    P = basis.members[0]
    coeffs = dict(P.as_dict())
    key = next(iter(coeffs))
    coeffs[key] = coeffs[key] + Fraction(1, 1000)
    bad = HomogeneousPolynomial.from_dict(P.nvars, P.degree, coeffs)
    return replace(basis, members=(bad,) + tuple(basis.members[1:]))


def cmd_verify_identities(cfg: dict):
    from .harmonics import (addition_identity_residual, dim_harmonic, gradient_identity_residual,
                            harmonic_basis, hessian_identity_residual)

    rng = np.random.default_rng(cfg["seed"])
    rows, checks = [], []
    for n in range(cfg["n_min"], cfg["n_max"] + 1):
        for k in range(1, cfg["k_max"] + 1):
            basis = harmonic_basis(n, k)
            if cfg["corrupt"]:
                basis = _corrupt(basis)
            x = _ball_points(rng, cfg["points"], n + 1)
            u = _ball_points(rng, cfg["points"], n + 1)
            res = {
                "addition": float(np.max(addition_identity_residual(basis, x))),
                "gradient": float(np.max(gradient_identity_residual(basis, x, u))),
                "hessian": float(np.max(hessian_identity_residual(basis, x))),
            }
            size_ok = len(basis.members) == dim_harmonic(n, k)
            harmonic_ok = all(P.is_harmonic() for P in basis.members)
            G = basis.gram_exact()
            ortho_ok = all(G[i][j] == (basis.norm_sq[i] if i == j else 0)
                           for i in range(len(G)) for j in range(len(G)))
            checks.append({"name": f"exact harmonicity n={n} k={k}", "ok": harmonic_ok, "detail": ""})
            checks.append({"name": f"exact orthonormality n={n} k={k}", "ok": ortho_ok, "detail": ""})
            rows.append({"n": n, "k": k, "m_k": dim_harmonic(n, k), "size": len(basis.members), **res})
            for name, val in res.items():
                checks.append({"name": f"{name} identity n={n} k={k}", "ok": val <= cfg["tol"],
                               "detail": f"max residual {val:.3g}"})
            checks.append({"name": f"basis size n={n} k={k}", "ok": size_ok,
                           "detail": f"{len(basis.members)} of {dim_harmonic(n, k)}"})
    return {"rows": rows}, checks


def _ball_points(rng, count, dim):
    """Uniform points in the closed unit ball."""
    g = rng.standard_normal((count, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * rng.random(count)[:, None] ** (1.0 / dim)


def _manifold(cfg):
    from .dumbbell import build_dumbbell
    from .geometry import bump_sphere, round_sphere

    t = cfg["target"]
    if t == "sphere":
        return round_sphere(cfg["n"], cfg["radius"])
    if t == "bump":
        return bump_sphere(cfg["n"], cfg["delta"])
    return build_dumbbell(cfg["n"], cfg["k"], cfg["eps"], cfg["a"])


def cmd_spectrum(cfg: dict):
    from .spectrum import covered_sphere_spectrum, sphere_spectrum, warped_spectrum

    n, count = cfg["n"], cfg["count"]
    if cfg["target"] == "covered":
        res = covered_sphere_spectrum(n, cfg["d"], count, grid=cfg["grid"])
    elif cfg["target"] == "sphere":
        res = sphere_spectrum(n, count)
    else:
        res = warped_spectrum(_manifold(cfg), count, grid=cfg["grid"])
    vals = res.values(count)
    if cfg["target"] == "sphere":
        vals = vals / cfg["radius"] ** 2
    body = {"eigenvalues": vals.tolist(), "clusters": [list(c) for c in res.clusters()]}
    if cfg["target"] == "covered":
        mus = np.array([kk * (n + kk - 1) for kk in range(int(np.sqrt(vals.max())) + 3)])
        dist = np.min(np.abs(vals[:, None] - mus[None, :]), axis=1)
        body["distance_to_sphere_spectrum"] = dist.tolist()
        body["non_sphere"] = [float(v) for v, dd in zip(vals, dist) if dd > cfg["separation"]]
    return body, []


def cmd_pinch_report(cfg: dict):
    from .harmonics import defect_aggregate
    from .inequalities import (curvature_concentration, fmap_defect, inequality_chain,
                               moment_gap, pinching_implications, radius_concentration)
    from .measure import hsiung_defect, moments, z_field_norm
    from .spectrum import warped_spectrum

    M = _manifold(cfg)
    lam1 = float(warped_spectrum(M, 2, grid=cfg["grid"]).values(2)[1])
    norms = moments(M)
    rep = moment_gap(M, cfg["p"], lam1, norms=norms)
    conc = radius_concentration(M, cfg["q"], norms=norms)
    body = {
        "manifold": M.label,
        "pinch": rep.to_dict(),
        "concentration": conc.to_dict(),
        "curvature_concentration": curvature_concentration(M, cfg["r_exp"]),
        "fmap_defect": fmap_defect(M),
        "hsiung_defect": hsiung_defect(M),
        "Z_L2": z_field_norm(M, 2),
        "defect_aggregate": defect_aggregate(M),
    }
    tol = cfg["tol"]
    checks = [{"name": f"implication {k}", "ok": bool(v), "detail": ""}
              for k, v in pinching_implications(rep, tol).items()]
    checks += [{"name": f"inequality {k}", "ok": bool(v), "detail": ""}
               for k, v in inequality_chain(M, lam1, norms, tol).items()]
    checks.append({"name": "integrated identity", "ok": abs(body["hsiung_defect"]) < tol,
                   "detail": f"{body['hsiung_defect']:.3g}"})
    return body, checks


def _t92(args):
    from .dumbbell import convergence_row
    return convergence_row(*args)


def _spec(args):
    from .dumbbell import spectrum_row
    return spectrum_row(*args)


def cmd_sweep(cfg: dict):
    from .dumbbell import check_spectrum, check_convergence, sweep_csv

    n, k, a, eps = cfg["n"], cfg["k"], cfg["a"], cfg["eps_list"]
    body, checks, tables = {}, [], {}
    if cfg["kind"] in ("convergence", "both"):
        rows = _pmap(_t92, [(n, k, e, a) for e in eps])
        body["convergence"] = rows
        tables["convergence"] = rows
        checks += _checks(check_convergence(rows, n, k, cfg["bound_factor"], cfg["final_max"],
                                          cfg["growth_min"]))
    if cfg["kind"] in ("spectrum", "both"):
        rows = _pmap(_spec, [(n, k, e, a, cfg["sigma_max"], cfg["grid"]) for e in eps])
        body["spectrum"] = rows
        tables["spectrum"] = rows
        checks += _checks(check_spectrum(rows, cfg["eps_check"], cfg["lambda1_max"], cfg["dev_max"],
                                         cfg["sigma_dev"]))
    if cfg["out_dir"]:
        out = Path(cfg["out_dir"])
        out.mkdir(parents=True, exist_ok=True)
        for name, rows in tables.items():
            (out / f"{name}.csv").write_text(sweep_csv(rows))
            (out / f"{name}.json").write_text(dumps(rows))
            for key in rows[0]:
                if key == "eps":
                    continue
                lines = []
                for r in rows:
                    v = r[key]
                    if isinstance(v, list):
                        lines.append(f"{r['eps']!r} " + " ".join(repr(float(x)) for x in v))
                    else:
                        lines.append(f"{r['eps']!r} {float(v)!r}")
                (out / f"{name}_{key}.dat").write_text("\n".join(lines) + "\n")
    return body, checks


COMMANDS = {
    "verify-identities": cmd_verify_identities,
    "spectrum": cmd_spectrum,
    "pinch-report": cmd_pinch_report,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pinchlab", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, opts in OPTIONS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="flat key=value file")
        for key in {**COMMON, **opts}:
            flag = "--" + key.replace("_", "-")
            if key == "corrupt":
                sp.add_argument(flag, nargs="?", const="true", default=None,
                                help="perturb one basis coefficient (negative control)")
            else:
                sp.add_argument(flag, dest=key, default=None)
    return ap


def _csv(command, body) -> str:
    if command == "spectrum":
        return "index,value\n" + "".join(f"{i},{v!r}\n" for i, v in enumerate(body["eigenvalues"]))
    if command == "sweep":
        from .dumbbell import sweep_csv
        return "".join(sweep_csv(rows) for rows in body.values())
    if command == "verify-identities":
        keys = list(body["rows"][0])
        return ",".join(keys) + "\n" + "".join(",".join(repr(r[k]) for k in keys) + "\n"
                                               for r in body["rows"])
    lines = ["quantity,value"]
    for key, val in body.items():
        if isinstance(val, dict):
            lines += [f"{key}.{k},{v!r}" for k, v in val.items()]
        else:
            lines.append(f"{key},{val!r}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    ap = build_parser()
    args = vars(ap.parse_args(argv))
    command = args.pop("command")
    path = args.pop("config")
    try:
        file_values = read_config_file(path) if path else {}
        cfg = resolve_config(command, args, file_values)
        threads()
    except (ConfigError, OSError) as exc:
        print(f"pinchlab: configuration error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        body, checks = COMMANDS[command](cfg)
    except Exception as exc:  # reported as a runtime error, never as a failed check
        print(f"pinchlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    report = _report(command, cfg, body, checks)
    text = _csv(command, body) if cfg["format"] == "csv" else dumps(report)
    if cfg["output"]:
        Path(cfg["output"]).write_text(text)
    else:
        sys.stdout.write(text)
    for c in checks:
        if not c["ok"]:
            print(f"FAIL {c['name']}: {c['detail']}", file=sys.stderr)
    if cfg["assert"] and not report["passed"]:
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

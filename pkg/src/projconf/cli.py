"""Command line front end: ``projconf <command> --scene FILE [options]``.

Every command except ``geodesic`` writes a JSON report. Exit codes: 0 when the
command's verdict holds (or the command has no verdict), 2 when it fails, and
1 on errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import __version__
from .affine import curvature, integrate_geodesic, levi_civita, polyline_csv, ricci_scalar
from .confweyl import conformal_rho, conformal_weyl_tensor, conformally_flat, cotton, einstein_weyl
from .corpus import identity_corpus, rng_for
from .metrizability import beltrami_check, identity_residuals, weyl_metrizable_with
from .projective import (
    ProjectiveError,
    odepair_is_projective,
    odes_from_connection,
    projective_schouten,
    projective_weyl,
    projectively_equivalent,
    thomas,
    thomas_from_odes,
)
from .quartic_cr import classify_quartic, paracr_torsion_diagnostics, twistor_quartic_type
from .scene import SceneError, load_scene
from .symkernel import SymkernelError

COMMANDS = (
    "analyze-metric",
    "analyze-connection",
    "odes",
    "thomas",
    "equivalent",
    "metrizable",
    "beltrami",
    "einstein-weyl",
    "quartic",
    "twistor-type",
    "paracr",
    "identities",
    "geodesic",
)

OK, FAILS, ERROR = 0, 2, 1


class CommandError(ValueError):
    pass


def _t(tensor):
    return tensor.to_strings()


def _need(scene, *names):
    if scene is None:
        raise CommandError("this command needs --scene")
    for name in names:
        if getattr(scene, name) is None:
            raise CommandError(f"scene has no [{name}] section")


def _connection_or_lc(scene):
    if scene is None:
        raise CommandError("this command needs --scene")
    if scene.connection is not None:
        return scene.connection
    if scene.metric is not None:
        return levi_civita(scene.metric)
    raise CommandError("scene has no [connection] or [metric] section")


def cmd_analyze_metric(scene, opts):
    _need(scene, "metric")
    g = scene.metric
    w = scene.weyl_structure()
    conn = levi_civita(g)
    riemann, ricci = curvature(conn)
    rho = conformal_rho(w)
    rec = {
        "metric": _t(g.g),
        "signature": g.signature,
        "levi_civita": _t(conn.gamma),
        "ricci": _t(ricci),
        "scalar_curvature": str(ricci_scalar(ricci, g)),
        "conformal_rho": {"entries": _t(rho.p), "provenance": rho.provenance},
        "projective_weyl_zero": projective_weyl(conn).is_zero(),
        "einstein_weyl": einstein_weyl(w)[0],
    }
    if g.chart.n == 3:
        rec["cotton"] = _t(cotton(w).y)
    if g.chart.n >= 4:
        rec["conformal_weyl_zero"] = conformal_weyl_tensor(g).is_zero()
    if g.chart.n >= 3:
        rec["conformally_flat"] = conformally_flat(g)
    return rec, None


def cmd_analyze_connection(scene, opts):
    _need(scene, "connection")
    conn = scene.connection
    riemann, ricci = curvature(conn)
    weyl = projective_weyl(conn)
    rec = {
        "christoffel": _t(conn.gamma),
        "thomas": _t(thomas(conn).pi),
        "ricci": _t(ricci),
        "projective_rho": _t(projective_schouten(conn, ricci)),
        "projective_weyl": _t(weyl),
        "projective_weyl_zero": weyl.is_zero(),
    }
    return rec, None


def cmd_odes(scene, opts):
    if scene is None:
        raise CommandError("this command needs --scene")
    if scene.odes is not None:
        odes, source = scene.odes, "scene"
    else:
        odes, source = odes_from_connection(_connection_or_lc(scene)), "connection"
    proj = odepair_is_projective(odes)
    return {"source": source, "F1": str(odes.f1), "F2": str(odes.f2), "projective": proj}, OK if proj else FAILS


def cmd_thomas(scene, opts):
    if scene is None:
        raise CommandError("this command needs --scene")
    if scene.odes is not None:
        if not odepair_is_projective(scene.odes):
            return {"source": "odes", "projective": False, "thomas": None}, FAILS
        pi = thomas_from_odes(scene.odes)
        return {"source": "odes", "projective": True, "thomas": _t(pi.pi)}, OK
    return {"source": "connection", "thomas": _t(thomas(_connection_or_lc(scene)).pi)}, None


def cmd_equivalent(scene, opts):
    _need(scene, "connection", "connection2")
    f = projectively_equivalent(scene.connection, scene.connection2)
    if f is None:
        return {"equivalent": False, "f": None}, FAILS
    return {"equivalent": True, "f": _t(f)}, OK


def cmd_metrizable(scene, opts):
    _need(scene, "connection", "metric")
    res = weyl_metrizable_with(scene.connection, scene.metric)
    if res is None:
        return {"found": False, "beta": None, "f": None}, FAILS
    beta, f = res
    return {"found": True, "beta": _t(beta), "f": _t(f)}, OK


def cmd_beltrami(scene, opts):
    _need(scene, "metric")
    v = beltrami_check(scene.weyl_structure())
    rec = {
        "projectively_flat": v.projective_weyl_zero,
        "conformally_flat": v.conformally_flat,
        "implication_holds": v.implication_holds,
        "rho_pure_trace": v.rho_pure_trace,
        "rho_factor": None if v.rho_factor is None else str(v.rho_factor),
        "rho_factor_constant": v.rho_factor_constant,
        "projective_weyl": _t(v.weyl_residual),
        "conformal_residual": _t(v.conformal_residual),
    }
    return rec, OK if v.projective_weyl_zero else FAILS


def cmd_einstein_weyl(scene, opts):
    _need(scene, "metric")
    verdict, residual = einstein_weyl(scene.weyl_structure())
    return {"einstein_weyl": verdict, "residual": _t(residual)}, OK if verdict else FAILS


def _parse_coeffs(text):
    try:
        vals = [Fraction(x.strip()) for x in text.split(",")]
    except (ValueError, ZeroDivisionError):
        raise CommandError(f"--coeffs expects five rationals C4,C3,C2,C1,C0, got {text!r}") from None
    if len(vals) != 5:
        raise CommandError(f"--coeffs expects five values C4,C3,C2,C1,C0, got {len(vals)}")
    return vals


def cmd_quartic(scene, opts):
    if opts.coeffs is not None:
        coeffs = _parse_coeffs(opts.coeffs)
    elif scene is not None and scene.quartic is not None:
        coeffs = scene.quartic
    else:
        raise CommandError("quartic needs --coeffs or a scene with a [quartic] section")
    rec = classify_quartic(coeffs).as_dict()
    rec["coeffs"] = [str(c) for c in coeffs]
    return rec, None


def cmd_twistor_type(scene, opts):
    _need(scene, "metric")
    return twistor_quartic_type(scene.metric).as_dict(), None


def _random_samples(k, seed):
    rng = rng_for(seed)
    return [[Fraction(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(5)] for _ in range(k)]


def cmd_paracr(scene, opts):
    conn = _connection_or_lc(scene)
    samples = scene.samples or _random_samples(opts.samples or 3, opts.seed)
    report = paracr_torsion_diagnostics(conn, samples)
    return report.as_dict(), OK if report.bracket_in_span else FAILS


def _identity_record(residuals):
    return {f"{name}_zero": r.is_zero() for name, r in sorted(residuals.items())}


def _corpus_item(args):
    seed, count, name = args
    items = dict(identity_corpus(seed, count, count))
    return name, _identity_record(identity_residuals(items[name]))


def cmd_identities(scene, opts):
    if scene is not None:
        _need(scene, "metric")
        w = scene.weyl_structure()
        if w.chart.n < 3:
            raise CommandError("identities need n >= 3")
        records = {"scene": _identity_record(identity_residuals(w))}
    else:
        count = opts.samples if opts.samples is not None else 2
        names = [name for name, _ in identity_corpus(opts.seed, count, count)]
        jobs = [(opts.seed, count, name) for name in names]
        if opts.jobs > 1:
            with ProcessPoolExecutor(max_workers=opts.jobs) as pool:
                results = list(pool.map(_corpus_item, jobs))
        else:
            results = [_corpus_item(j) for j in jobs]
        records = dict(sorted(results))
    all_zero = all(all(rec.values()) for rec in records.values())
    return {"items": records, "all_zero": all_zero}, OK if all_zero else FAILS


def cmd_geodesic(scene, opts):
    conn = _connection_or_lc(scene)
    n = conn.chart.n
    params = scene.geodesic
    x0 = params.get("x0", [0] * n)
    v0 = params.get("v0", [1] + [0] * (n - 1))
    h = params.get("h", Fraction(1, 1000))
    steps = params.get("steps", 1000)
    path = integrate_geodesic(conn, x0, v0, float(h), steps)
    return polyline_csv(path), None


HANDLERS = {
    "analyze-metric": cmd_analyze_metric,
    "analyze-connection": cmd_analyze_connection,
    "odes": cmd_odes,
    "thomas": cmd_thomas,
    "equivalent": cmd_equivalent,
    "metrizable": cmd_metrizable,
    "beltrami": cmd_beltrami,
    "einstein-weyl": cmd_einstein_weyl,
    "quartic": cmd_quartic,
    "twistor-type": cmd_twistor_type,
    "paracr": cmd_paracr,
    "identities": cmd_identities,
    "geodesic": cmd_geodesic,
}


def _digest(command, scene, opts):
    payload = {
        "command": command,
        "scene": scene.digest if scene is not None else None,
        "coeffs": opts.coeffs,
        "samples": opts.samples,
        "seed": opts.seed,
        "signature": opts.signature,
        "degree_bound": opts.degree_bound,
    }
    return "sha256:" + hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def run(command, scene, opts):
    """Run one command; returns (report dict or CSV text, exit code)."""
    if command not in HANDLERS:
        raise CommandError(f"unknown command {command!r}")
    start = time.perf_counter()
    records, code = HANDLERS[command](scene, opts)
    elapsed = time.perf_counter() - start
    verdict = {None: "none", OK: "holds", FAILS: "fails"}[code]
    code = OK if code is None else code
    if command == "geodesic":
        return records, code
    report = {
        "tool": "projconf",
        "version": __version__,
        "command": command,
        "input_digest": _digest(command, scene, opts),
        "verdict": verdict,
        "records": records,
    }
    if opts.timings:
        report["timings"] = {command: round(elapsed, 6)}
    return report, code


def render(report):
    if isinstance(report, str):
        return report
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def build_parser():
    p = argparse.ArgumentParser(prog="projconf", description="Exact invariants of projective, conformal and Weyl structures.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scene", help="scene file")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--signature", choices=["+1", "-1", "1"], help="override the metric signature tag")
    p.add_argument("--samples", type=int, help="number of random samples or corpus items")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized suites (unsigned 64-bit)")
    p.add_argument("--degree-bound", type=int, help="total-degree guardrail for expressions (default 64)")
    p.add_argument("--coeffs", help="quartic coefficients C4,C3,C2,C1,C0")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for the identities corpus")
    p.add_argument("--timings", action="store_true", help="include wall-time in the report (breaks byte-identity)")
    return p


def main(argv=None):
    parser = build_parser()
    opts = parser.parse_args(argv)
    if not 0 <= opts.seed < 2**64:
        parser.error("--seed must be an unsigned 64-bit integer")
    if opts.samples is not None and opts.samples < 1:
        parser.error("--samples must be positive")
    if opts.degree_bound is not None and opts.degree_bound < 1:
        parser.error("--degree-bound must be positive")
    try:
        scene = load_scene(opts.scene, opts.degree_bound) if opts.scene else None
        if scene is not None and opts.signature is not None:
            scene.with_signature(int(opts.signature))
        report, code = run(opts.command, scene, opts)
    except (SceneError, CommandError, SymkernelError, ProjectiveError, ValueError, ArithmeticError, AssertionError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR
    text = render(report)
    if opts.out:
        with open(opts.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

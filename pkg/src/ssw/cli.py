"""Command-line front end.

Subcommands: check, darboux, lagint, complexes, repscheme, random.
Exit codes: 0 all checks passed, 1 some check failed, 2 malformed input.
Reports are deterministic for a fixed input and seed (timings are only
included on request, keeping JSON byte-stable across runs).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor

from .algebra import check_d_squared
from .parsing import ParseError, presentation_from_dict, presentation_to_dict, render_element
from .report import EXIT_INPUT, SuiteReport, digest_of


class InputError(Exception):
    pass


def _load_json(path):
    try:
        with open(path, "r") as fh:
            return fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}")


def _parse_json(text, path):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: malformed JSON at line {e.lineno}, column {e.colno}")


def _max_workers():
    v = os.environ.get("SSW_THREADS", "")
    try:
        n = int(v)
        return max(1, n)
    except ValueError:
        return 1


def _run_parallel(report, jobs):
    """jobs: list of (key, thunk); results merged in job order."""
    workers = _max_workers()
    if workers == 1:
        for key, fn in jobs:
            report.timed(key, fn)
        return
    with ThreadPoolExecutor(max_workers=workers) as ex:
        futures = [(key, ex.submit(fn)) for key, fn in jobs]
        for key, fut in futures:
            report.add(fut.result(), timer_key=key, elapsed_ms=0)


def _emit(report, args):
    out = report.to_json() if args.report == "json" else report.to_text()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return report.exit_code()


def _add_common(sp):
    sp.add_argument("--report", choices=["text", "json"], default="text")
    sp.add_argument("--output", default=None, help="write the report to a file")
    sp.add_argument("--timings", action="store_true", help="include wall times in the report")


def _darboux_data(doc):
    from .darboux import EvenDarbouxData, GeneralDarbouxData, WeightedDarbouxData

    case = doc.get("case")
    field = doc.get("field", "Q")
    x = doc.get("x")
    if not isinstance(x, list) or not all(isinstance(s, str) for s in x):
        raise InputError("data file needs a list of base variables under 'x'")
    try:
        if case == "even":
            return case, EvenDarbouxData(field, x, doc.get("f", []), doc.get("g", []))
        if case == "general":
            return case, GeneralDarbouxData(field, x, doc.get("f", []))
        if case == "weighted":
            return case, WeightedDarbouxData(field, x, doc.get("f", []), doc.get("q", []))
    except ParseError as e:
        raise InputError(f"bad polynomial in data file: {e}")
    except ValueError as e:
        raise InputError(str(e))
    raise InputError(f"unknown case {case!r} (expected even, general or weighted)")


def _build_model(case, data):
    from .darboux import build_even_darboux, build_general_darboux, build_weighted_darboux

    if case == "even":
        return build_even_darboux(data)
    if case == "general":
        return build_general_darboux(data)
    return build_weighted_darboux(data)


def cmd_check(args):
    report = SuiteReport("check", digest_of(*[_load_json(p) for p in args.files]),
                         timings=args.timings)
    for path in args.files:
        doc = _parse_json(_load_json(path), path)
        try:
            pres = presentation_from_dict(doc, label=path)
        except (ParseError, ValueError, KeyError) as e:
            raise InputError(f"{path}: {e}")
        report.timed(path, lambda p=pres: check_d_squared(p))
    return _emit(report, args)


def cmd_darboux(args):
    text = _load_json(args.data)
    case, data = _darboux_data(_parse_json(text, args.data))
    from .darboux import CmeViolation

    if args.action == "build":
        try:
            model = _build_model(case, data)
        except CmeViolation as e:
            raise InputError(str(e))
        doc = {
            "presentation": presentation_to_dict(model.presentation),
            "form": {"shift": model.omega.shift, "leading": render_element(model.omega.leading)},
        }
        out = json.dumps(doc, indent=2) + "\n"
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(out)
        else:
            sys.stdout.write(out)
        return 0
    report = SuiteReport(f"darboux-{case}", digest_of(text), timings=args.timings)
    from .algebra import CheckRecord
    from .darboux import cme_check_even, cme_check_general, cme_check_weighted

    if case == "even":
        ok, res = cme_check_even(data.f, data.g)
    elif case == "general":
        ok, res = cme_check_general(data.f)
    else:
        ok, res = cme_check_weighted(data.f, data.q)
    report.add(CheckRecord("cme", ok, res))
    if ok:
        model = _build_model(case, data)
        report.timed("validate", model.validate)
    return _emit(report, args)


def cmd_lagint(args):
    text = _load_json(args.data)
    case, data = _darboux_data(_parse_json(text, args.data))
    from .darboux import CmeViolation
    from .lagrangian import EvenPipeline, GeneralPipeline

    try:
        model = _build_model(case, data)
    except CmeViolation as e:
        raise InputError(str(e))
    report = SuiteReport(f"lagint-{case}", digest_of(text), timings=args.timings)
    if case == "even":
        pipe = EvenPipeline(model)
    else:
        pipe = GeneralPipeline(model, weighted=(case == "weighted"))
    if args.action == "build":
        doc = {"presentation": presentation_to_dict(pipe.crit.__dict__ and pipe.crit)}
        doc = {"presentation": presentation_to_dict(pipe.crit)}
        out = json.dumps(doc, indent=2) + "\n"
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(out)
        else:
            sys.stdout.write(out)
        return 0
    report.timed("pipeline", pipe.records)
    res = pipe.residue()
    doc = report.as_dict()
    doc["residue"] = {
        "scalar": str(res.scalar),
        "residual_terms": len(res.residual.terms),
        "ok": res.ok,
    }
    out = json.dumps(doc, indent=2) + "\n" if args.report == "json" else report.to_text()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return report.exit_code()


def cmd_complexes(args):
    text = _load_json(args.data)
    case, data = _darboux_data(_parse_json(text, args.data))
    if case == "even":
        raise InputError("the cone complexes take general or weighted data")
    try:
        lo, hi = args.window.split(":")
        window = (int(lo), int(hi))
    except ValueError:
        raise InputError(f"bad window {args.window!r}, expected lo:hi")
    from .complexes import (
        TangentConeData,
        build_phi,
        build_psi,
        build_psi_target,
        build_theta_delta,
        build_Tq,
        build_Tq_prime,
        cancel_units,
        compare_reduction_to_target,
        point_homology_probe,
    )

    suites = set((args.suite or "phi,psi,probe").split(","))
    report = SuiteReport("complexes", digest_of(text, args.window), timings=args.timings)
    cone = TangentConeData(data)
    Tq = build_Tq(cone, window)
    Tqp = build_Tq_prime(cone, window)
    report.timed("tq", Tq.check_complex)
    report.timed("tq'", Tqp.check_complex)
    target = build_psi_target(cone, window)
    psi = build_psi(cone, Tqp, target)
    if "phi" in suites:
        phi = build_phi(cone, Tq, Tqp)
        phi_back = build_phi(cone, Tqp, Tq)
        report.timed("phi", phi.check)
        report.timed("phi-back", phi_back.check)
        from .algebra import CheckRecord

        comp = phi_back.compose(phi)
        ok = all(
            comp.apply({lbl: cone.alg.one()}) == {lbl: cone.alg.one()}
            for ls in Tq.bases.values() for lbl in ls
        )
        report.add(CheckRecord("phi:involution", ok))
        theta = psi.compose(phi)
        report.timed("theta_nu", theta.check)
    if "psi" in suites:
        report.timed("psi", psi.check)
        report.timed("target", target.check_complex)
        reduced, cert = cancel_units(Tqp)
        report.timed("sdr", cert.verify)
        report.add(compare_reduction_to_target(reduced, target, psi.entries))
    if "theta-delta" in suites:
        _, recs = build_theta_delta(data.field, len(data.x_names))
        report.add(recs)
    if "probe" in suites:
        rng = random.Random(args.seed)
        pts = []
        for _ in range(args.points):
            pts.append({x: rng.randint(1, 17) for x in data.x_names})
        from .algebra import CheckRecord

        hs = point_homology_probe(Tq, pts)
        ht = point_homology_probe(target, pts)
        interior = sorted(set(hs[0]) & set(ht[0])) if pts else []
        agree = all(
            all(a.get(dg, 0) == b.get(dg, 0) for dg in interior) for a, b in zip(hs, ht)
        )
        report.add(CheckRecord("probe:agree", agree, detail=f"{len(pts)} points"))
    return _emit(report, args)


def cmd_repscheme(args):
    from . import repscheme as rs
    from .ncalg import cobar, h0_hilbert_check

    suites = set((args.suite or "cobar,cme,primitive").split(","))
    report = SuiteReport("repscheme", digest_of(args.n, args.d, args.suite or ""),
                         timings=args.timings)
    if args.n < 1 or args.n > 4:
        raise InputError("--n must be between 1 and 4")
    if args.d < 1:
        raise InputError("--d must be at least 1")
    jobs = []
    if "cobar" in suites:
        G = cobar(args.n)
        jobs.append(("cobar-d2", G.check_d_squared))
        jobs.append(("hilbert", lambda G=G: h0_hilbert_check(G, args.weight_bound)))
    model = None
    if suites & {"cme", "primitive", "partials", "gamma", "serre", "maindim4", "d2"}:
        if args.n != 4:
            raise InputError("the matrix-model suites need --n 4")
        model = rs.build_Bd(args.d)
    if "d2" in suites:
        jobs.append(("Ad-d2", lambda: check_d_squared(model.Ad)))
    if "cme" in suites:
        jobs.append(("cme", lambda: [rs.cme_Bd(model)]))
    if "primitive" in suites:
        jobs.append(("primitive", lambda: rs.primitive_check(model)))
    if "partials" in suites:
        jobs.append(("partials", lambda: rs.hamiltonian_partials_check(model)))
    if "koszul" in suites:
        K = rs.koszul_bimodule_resolution(4)
        jobs.append(("koszul-d2", K.check_complex))
        jobs.append(("koszul-exact", lambda K=K: rs.bimodule_exactness_check(K, args.weight_bound)))
    if "gamma" in suites:
        res = rs.ModuleResolutionData(model)
        F = rs.build_F(res)
        L = rs.build_L(res)
        jobs.append(("F-d2", F.check_complex))
        jobs.append(("L-d2", L.check_complex))
        T = rs.build_tangent_complex(model)
        jobs.append(("hT-d2", T.check_complex))
        jobs.append(("gamma", lambda: rs.gamma_check(model)))
    if "serre" in suites:
        jobs.append(("serre", lambda: rs.serre_pairing_check(model)))
    if "maindim4" in suites:
        jobs.append(("maindim4", lambda: rs.maindim4_check(model)))
    _run_parallel(report, jobs)
    return _emit(report, args)


def cmd_random(args):
    from .algebra import CheckRecord
    from .darboux import EvenDarbouxData, build_even_darboux
    from .lagrangian import EvenPipeline

    if args.suite != "even-residue":
        raise InputError(f"unknown randomized suite {args.suite!r}")
    report = SuiteReport("random-even-residue", digest_of(args.seed, args.count),
                         timings=args.timings)
    rng = random.Random(args.seed)
    for trial in range(args.count):
        m0 = rng.randint(1, 2)
        xs = [f"x{i+1}" for i in range(m0)]

        def poly():
            terms = []
            for _ in range(rng.randint(1, 2)):
                c = rng.randint(-3, 3) or 1
                mono = "*".join(rng.choice(xs) for _ in range(rng.randint(1, 2)))
                terms.append(f"{c}*{mono}" if c >= 0 else f"({c})*{mono}")
            return " + ".join(terms)

        p, r = poly(), poly()
        data = EvenDarbouxData("Q", xs, [p, p], [r, f"-({r})"])
        model = build_even_darboux(data)
        pipe = EvenPipeline(model)
        res = pipe.residue()
        ok = res.ok and res.scalar == 2
        report.add(CheckRecord(f"trial{trial}:lambda=2", ok,
                               detail=f"lambda={res.scalar}, f={p!r}, g={r!r}"))
    return _emit(report, args)


def build_parser():
    ap = argparse.ArgumentParser(prog="ssw", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run d-squared checks on presentation files")
    p.add_argument("files", nargs="+")
    _add_common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("darboux", help="build or validate Darboux-form data")
    p.add_argument("action", choices=["build", "check"])
    p.add_argument("--data", required=True)
    p.add_argument("--case", default=None, help="override the case in the data file")
    _add_common(p)
    p.set_defaults(fn=cmd_darboux)

    p = sub.add_parser("lagint", help="Lagrangian-intersection pipelines")
    p.add_argument("action", choices=["build", "verify"])
    p.add_argument("--data", required=True)
    p.add_argument("--case", default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_lagint)

    p = sub.add_parser("complexes", help="tangent-cone complex suites")
    p.add_argument("tq", nargs="?", default="tq")
    p.add_argument("--data", required=True)
    p.add_argument("--window", default="-6:2")
    p.add_argument("--suite", default="phi,psi,probe,theta-delta")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=5)
    _add_common(p)
    p.set_defaults(fn=cmd_complexes)

    p = sub.add_parser("repscheme", help="representation-scheme suites")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--suite", default="cobar,cme,primitive")
    p.add_argument("--weight-bound", type=int, default=4)
    _add_common(p)
    p.set_defaults(fn=cmd_repscheme)

    p = sub.add_parser("random", help="seed-controlled randomized property runs")
    p.add_argument("--suite", default="even-residue")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=5)
    _add_common(p)
    p.set_defaults(fn=cmd_random)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on bad flags, which matches the input-error code
        return EXIT_INPUT if e.code else 0
    try:
        return args.fn(args)
    except InputError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INPUT
    except ParseError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

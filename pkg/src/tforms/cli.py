"""Command line front end.

Exit codes: 0 for decided answers, 2 when the answer is heuristic or
inconclusive, 1 on errors.  Reports are JSON with sorted keys and
shortest round-trip floats; density curves are CSV with header ``lambda,F``.
"""

import argparse
import os
import sys

from . import io
from .errors import ParseError, TformsError, ValidationError

EXIT_OK, EXIT_ERROR, EXIT_HEURISTIC = 0, 1, 2


def _write(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _sidecar(out, tag, F):
    """Write a sampled field next to ``out``; returns its description or None."""
    if out is None:
        return None
    stem = os.path.splitext(out)[0]
    return io.write_sampled(f"{stem}.{tag}.bin", F)


def describe_field(F, out=None, tag="field"):
    """Field description for a report: symbolic text and germs, or a sidecar file."""
    from .fields import Field, GermField

    if isinstance(F, GermField):
        return {
            "kind": "scalar_symbolic",
            "expr": F.text,
            "germs": [
                {"at": g.at, "side": g.side, "order": str(g.order), "sign": "+" if g.sign > 0 else "-", "coeff": g.coeff}
                for g in F.germs
            ],
        }
    if isinstance(F, tuple):
        return {"kind": "diagonal", "parts": [describe_field(p, out, f"{tag}{i}") for i, p in enumerate(F)]}
    if isinstance(F, Field):
        return _sidecar(out, tag, F)
    return None


# ---------------------------------------------------------------------------
# tasks


def task_classify(problem, out):
    from .classify import classify_form

    rep = classify_form(io.build_form(problem), n=problem.grid)
    doc = {"task": "classify", **rep.to_json()}
    _write(io.dumps(doc), out)
    if rep.mode == "exact-symbolic":
        print(f"classify: exact; {len(rep.positive)} positive and {len(rep.negative)} negative germs", file=sys.stderr)
        return EXIT_OK
    print("classify: sampled input, density data only (heuristic)", file=sys.stderr)
    return EXIT_HEURISTIC


def task_congruence(pa, pb, out):
    from .classify import congruent

    n = max(pa.grid, pb.grid)
    ans = congruent(io.build_form(pa), io.build_form(pb), n=n)
    certs = []
    for i, c in enumerate(ans.certificates):
        js = c.to_json()
        js["field"] = _sidecar(out, f"k{i}", c.field)
        js["map"] = _sidecar(out, f"map{i}", c.map) if c.map is not None else None
        certs.append(js)
    dist = ans.distinguisher
    if ans.mode == "exact" and dist is not None:
        dist = {"at": dist[0], "side": dist[1], "order": str(dist[2])}
    elif dist is not None:
        dist = [{"answer": v.answer, "value": v.value, "confidence": v.confidence, "dilatation": v.dilatation} for v in dist]
    doc = {"task": "congruence", "congruent": bool(ans.value), "mode": ans.mode, "certificates": certs, "distinguisher": dist}
    _write(io.dumps(doc), out)
    word = "congruent" if ans.value else "not congruent"
    print(f"congruence: {word} ({ans.mode})", file=sys.stderr)
    return EXIT_OK if ans.mode == "exact" else EXIT_HEURISTIC


def task_split(problem, out):
    from .forms import pos_neg_split
    from .torsion import germ_signature

    sp = pos_neg_split(io.build_form(problem), problem.grid)
    cert = sp.certificate
    if not isinstance(cert, dict):
        cert = {"residual": cert.residual, "trivial_bound": cert.trivial_bound}
    doc = {"task": "split", "certificate": cert}
    for name, part in (("plus", sp.plus), ("minus", sp.minus)):
        entry = {"alpha": describe_field(part.alpha, out, name)}
        if part.symbolic:
            entry["signature"] = germ_signature(part.X)
        doc[name] = entry
    _write(io.dumps(doc), out)
    print(f"split: reassembly residual {cert['residual']:.3e}", file=sys.stderr)
    return EXIT_OK


def task_metabolizer(problem, out):
    from .forms import is_metabolizer, metabolizer

    phi = io.build_form(problem)
    m = metabolizer(phi, problem.grid)
    chk = is_metabolizer(phi, m.Y, problem.grid)
    doc = {
        "task": "metabolizer",
        "beta": describe_field(m.Y.alpha, out, "beta"),
        "residual": m.residual,
        "delta_check": {"ok": chk.ok, "delta_sup": chk.delta_sup, "delta_inf": chk.delta_inf},
    }
    _write(io.dumps(doc), out)
    print(f"metabolizer: delta criterion {'passes' if chk.ok else 'fails'}", file=sys.stderr)
    return EXIT_OK if chk.ok else EXIT_ERROR


def task_density(problem, out, lam_min=None, lam_max=None, points=None):
    from .errors import EmptyWindow
    from .fields import Field
    from .torsion import DENSITY_GRID, density_curve, ns_exponent

    p = problem.params
    lo = lam_min if lam_min is not None else p.get("lambda_min", 1e-6)
    hi = lam_max if lam_max is not None else p.get("lambda_max", 1e-1)
    pts = points if points is not None else int(p.get("points", 200))
    alpha = problem.form["alpha"]
    alpha = tuple(alpha) if isinstance(alpha, list) else alpha
    n = alpha.n if isinstance(alpha, Field) else max(problem.grid, DENSITY_GRID)
    curve = density_curve(alpha, lo, hi, pts, n=n)
    rows = ["lambda,F"] + [f"{float(x)!r},{float(y)!r}" for x, y in zip(curve.lambdas, curve.F)]
    _write("\n".join(rows) + "\n", out)
    try:
        print(f"density: fitted exponent {ns_exponent(curve):.4f}", file=sys.stderr)
    except EmptyWindow:
        print("density: F vanishes on the fit window", file=sys.stderr)
    return EXIT_OK


def task_check(seed, suite, out):
    from .checks import run_checks

    rep = run_checks(seed, suite)
    _write(io.dumps(rep), out)
    print(f"check: {rep['passed']} passed, {rep['failed']} failed (seed {seed}, suite {suite})", file=sys.stderr)
    return EXIT_OK if rep["failed"] == 0 else EXIT_ERROR


def run(problem, out=None, **kw):
    """Dispatch a parsed problem on its task."""
    task = problem.task
    if task == "classify":
        return task_classify(problem, out)
    if task == "split":
        return task_split(problem, out)
    if task == "metabolizer":
        return task_metabolizer(problem, out)
    if task == "density":
        return task_density(problem, out, kw.get("lambda_min"), kw.get("lambda_max"), kw.get("points"))
    if task == "check":
        p = problem.params
        return task_check(int(p.get("seed", 42)), p.get("suite", "all"), out)
    raise ValidationError("congruence needs two problem files; use 'tforms congruence a.json b.json'", "task")


# ---------------------------------------------------------------------------
# argument parsing


def _parser():
    ap = argparse.ArgumentParser(prog="tforms", description="Torsion Hermitian forms over the circle.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--grid", type=int, help="override the sampling resolution N")

    for name in ("classify", "split", "metabolizer", "run"):
        p = sub.add_parser(name)
        p.add_argument("problem")
        common(p)
    p = sub.add_parser("congruence")
    p.add_argument("a")
    p.add_argument("b")
    common(p)
    p = sub.add_parser("density")
    p.add_argument("problem")
    p.add_argument("--lambda-min", type=float)
    p.add_argument("--lambda-max", type=float)
    p.add_argument("--points", type=int)
    common(p)
    p = sub.add_parser("check")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--suite", choices=("linalg", "forms", "classify", "all"), default="all")
    p.add_argument("--out")
    return ap


def _dispatch(args):
    if args.command == "check":
        return task_check(args.seed, args.suite, args.out)
    if args.command == "congruence":
        pa = io.load_problem(args.a, args.grid, require_task=False)
        pb = io.load_problem(args.b, args.grid, require_task=False)
        return task_congruence(pa, pb, args.out)
    problem = io.load_problem(args.problem, args.grid, require_task=args.command == "run")
    if args.command == "run":
        return run(problem, args.out)
    if args.command == "density":
        if args.points is not None and args.points < 2:
            raise ValidationError("need at least two points", "points")
        return task_density(problem, args.out, args.lambda_min, args.lambda_max, args.points)
    return {"classify": task_classify, "split": task_split, "metabolizer": task_metabolizer}[args.command](problem, args.out)


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ParseError as e:
        print(f"error: ParseError: {e}", file=sys.stderr)
    except ValidationError as e:
        print(f"error: ValidationError in field '{e.field}': {e}", file=sys.stderr)
    except TformsError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

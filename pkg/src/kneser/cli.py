"""Command-line front end: ``kneser <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import sympy

from . import arthur
from .cache import cache_dir, ensure_hecke, load_or_enumerate
from .isometry import GuardTripped
from .lattice import OLattice, SEED_NAMES, default_seed, seed
from .neighbours import GenusLedger
from .numbers import dedekind_zeta_algebraic_part, prime_from_label, quad_field, rational_field
from .spectra import (AlgebraicScalar, congruence_scan, degree_inference, eigen_decompose, nonzero_triples,
                      system_values)
from .theta import extract_eigenvalue, theta_map
from .verify import TIERS, format_result, run_suite

EXIT_OK, EXIT_FAIL, EXIT_GUARD = 0, 1, 2


def _field(m):
    return rational_field() if m is None else quad_field(m)


def _labels(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _log(args):
    if args.quiet:
        return None
    return lambda msg: print(msg, file=sys.stderr, flush=True)


def _emit(args, payload: dict, text: str):
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _load(args) -> tuple[GenusLedger, Path]:
    path = Path(args.cache)
    if not path.exists():
        # allow a bare digest or file name inside the cache directory
        for cand in (cache_dir() / args.cache, cache_dir() / f"genus-{args.cache}.json"):
            if cand.exists():
                path = cand
                break
    return GenusLedger.load(str(path)), path


def _field_of(led: GenusLedger):
    return led.seed.field


# ---------------------------------------------------------------------------
# subcommands


def cmd_genus(args) -> int:
    m = None if args.m in (None, 1) else args.m
    if args.seed is None:
        L = default_seed(m, args.rank, args.hermitian)
    elif args.seed in SEED_NAMES:
        base = seed(args.seed, m if args.seed == "e8_tensor" else None)
        copies = max(1, args.rank // base.rank)
        L = seed(args.seed, m if args.seed == "e8_tensor" else None, copies)
    else:
        with open(args.seed) as fh:
            L = OLattice.from_json(json.load(fh))
    if L.rank != args.rank:
        raise SystemExit(f"seed has rank {L.rank}, not {args.rank}")
    F = _field(m)
    primes = [prime_from_label(F, l) for l in _labels(args.primes)]
    led, path = load_or_enumerate(L, primes, force=args.force, threads=args.threads, log=_log(args),
                                  max_classes=args.max_classes)
    payload = {"cache": str(path), "h": led.h, "aut_orders": led.aut_orders, "mass": str(led.mass()),
               "primes": [p.label() for p in primes]}
    _emit(args, payload, f"cache {path}\nh = {led.h}\n|Aut| = {led.aut_orders}\nmass = {led.mass()}")
    return EXIT_OK


def cmd_hecke(args) -> int:
    led, path = _load(args)
    prime = prime_from_label(_field_of(led), args.prime)
    M = ensure_hecke(led, path, prime, threads=args.threads, log=_log(args))
    _emit(args, {"prime": prime.label(), "matrix": M.tolist()},
          "\n".join(" ".join(f"{x:>10d}" for x in row) for row in M.tolist()))
    return EXIT_OK


def _spectrum(args, led, path):
    labels = _labels(args.primes) if args.primes else [p.label() for p in led.primes]
    F = _field_of(led)
    mats = {l: ensure_hecke(led, path, prime_from_label(F, l), threads=args.threads, log=_log(args))
            for l in labels}
    return labels, eigen_decompose(mats)


def cmd_spectrum(args) -> int:
    led, path = _load(args)
    labels, spec = _spectrum(args, led, path)
    lines = []
    for i, s in enumerate(spec.systems, 1):
        vals = ", ".join(f"{l}: {s.eigenvalues[l] if s.eigenvalues[l] is not None else s.block_polys[l]}"
                         for l in labels)
        extra = f" x{s.multiplicity}" if s.multiplicity > 1 or s.is_block else ""
        vec = "" if s.vector is None else "  v = (" + ", ".join(str(AlgebraicScalar.coerce(x)) for x in s.vector) + ")"
        lines.append(f"{i:>3}  {vals}{extra}{vec}")
    _emit(args, spec.to_json(), "\n".join(lines))
    return EXIT_OK


def cmd_predict(args) -> int:
    registry = arthur.load_registry(args.registry)
    m = None if args.m in (None, 1) else args.m
    value = arthur.predict_eigenvalue(args.param, args.prime, args.N, args.geometry, registry=registry, field_m=m)
    inf = arthur.check_infinity(args.param, args.N, args.geometry, registry=registry, field_m=m)
    _emit(args, {"parameter": args.param, "prime": args.prime, "eigenvalue": value.to_json(),
                 "infinity_type_ok": inf}, str(value))
    return EXIT_OK


def _vector(args, led, path):
    text = args.vector
    if "," not in text and text.strip().lstrip("-").isdigit() and int(text) >= 1 and not args.literal:
        labels, spec = _spectrum(args, led, path)
        vecs = [s.vector for s in spec.systems if s.vector is not None]
        return vecs[int(text) - 1]
    return [AlgebraicScalar.parse(t) for t in _labels(text)]


def cmd_theta(args) -> int:
    led, path = _load(args)
    v = _vector(args, led, path)
    f = theta_map(v, led, bound=args.bound, threads=args.threads)
    payload = f.to_json()
    text = json.dumps(payload, indent=2)
    if args.hecke:
        lam = extract_eigenvalue(f, prime_from_label(_field_of(led), args.hecke), min_probes=args.min_probes)
        payload["hecke"] = {"prime": args.hecke, "eigenvalue": lam.to_json()}
        text = str(lam)
    _emit(args, payload, text)
    return EXIT_OK


def cmd_congruences(args) -> int:
    led, path = _load(args)
    labels, spec = _spectrum(args, led, path)
    # numbered as in the spectrum listing; blocks take part through their factor polynomials
    systems = [system_values(s) for s in spec.systems]
    rows = []
    for i in range(len(systems)):
        for j in range(i + 1, len(systems)):
            rep = congruence_scan(systems[i], systems[j], led.h)
            rows.append({"i": i + 1, "j": j + 1, **rep.to_json()})
    text = "\n".join(f"({r['i']},{r['j']}): {r['moduli'] if r['moduli'] == 'all' else [m['prime'] for m in r['moduli']]}"
                     for r in rows)
    _emit(args, {"primes": labels, "pairs": rows}, text)
    return EXIT_OK


def cmd_degrees(args) -> int:
    led, path = _load(args)
    labels, spec = _spectrum(args, led, path)
    vectors = {str(i): s.vector for i, s in enumerate((s for s in spec.systems if s.vector is not None), 1)}
    with open(args.anchors) as fh:
        anchors = {str(k): int(v) for k, v in json.load(fh).items()}
    bounds = degree_inference(anchors, nonzero_triples(vectors, led.aut_orders), names=list(vectors),
                              cap=args.cap)
    text = "\n".join(f"{k:>3}: [{bounds.lower[k]}, {bounds.upper[k]}]" for k in sorted(bounds.lower, key=int))
    _emit(args, bounds.to_json(), text)
    return EXIT_OK


def cmd_zeta(args) -> int:
    r = dedekind_zeta_algebraic_part(quad_field(args.m), args.k)
    num, den = sympy.factorint(r.numerator), sympy.factorint(r.denominator)
    fmt = lambda fac: " * ".join(f"{p}^{e}" if e > 1 else str(p) for p, e in sorted(fac.items())) or "1"
    _emit(args, {"m": args.m, "k": args.k, "r": str(r), "numerator": {str(p): e for p, e in num.items()},
                 "denominator": {str(p): e for p, e in den.items()},
                 "meaning": "zeta_E(k) = r * pi^(2k) / sqrt(D)"},
          f"{r}  =  ({fmt(num)}) / ({fmt(den)})")
    return EXIT_OK


def cmd_verify(args) -> int:
    ids = set(_labels(args.only)) if args.only else None
    printer = None if args.json else (lambda r: print(format_result(r), flush=True))
    results = run_suite(args.suite, threads=args.threads, force=args.force, log=_log(args), ids=ids,
                        on_result=printer)
    failed = [r for r in results if r.status != "PASS"]
    if args.json:
        print(json.dumps({"suite": args.suite, "results": [r.to_json() for r in results]}, indent=2))
    else:
        print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--force", action="store_true", help="recompute instead of reading caches")
    common.add_argument("--quiet", action="store_true", help="no progress messages")

    p = argparse.ArgumentParser(prog="kneser", description="Kneser neighbours, Hecke spectra and their predictions.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("genus", parents=[common], help="enumerate a genus")
    g.add_argument("--m", type=int, default=None, help="field Q(sqrt m); omit for Q")
    g.add_argument("--rank", type=int, required=True)
    g.add_argument("--seed", default=None, help=f"catalogue name ({', '.join(SEED_NAMES)}) or JSON file")
    g.add_argument("--primes", required=True, help="comma-separated prime labels, e.g. sqrt5,2")
    g.add_argument("--hermitian", action="store_true")
    g.add_argument("--max-classes", type=int, default=1000)
    g.set_defaults(func=cmd_genus)

    h = sub.add_parser("hecke", parents=[common], help="Hecke matrix at a prime")
    h.add_argument("--cache", required=True)
    h.add_argument("--prime", required=True)
    h.set_defaults(func=cmd_hecke)

    for name, func, hint in (("spectrum", cmd_spectrum, "simultaneous eigen data"),
                             ("congruences", cmd_congruences, "congruence moduli between eigensystems")):
        s = sub.add_parser(name, parents=[common], help=hint)
        s.add_argument("--cache", required=True)
        s.add_argument("--primes", default=None)
        s.set_defaults(func=func)

    pr = sub.add_parser("predict", parents=[common], help="eigenvalue predicted by a parameter")
    pr.add_argument("--param", required=True)
    pr.add_argument("--prime", required=True)
    pr.add_argument("--N", type=int, required=True)
    pr.add_argument("--m", type=int, default=None)
    pr.add_argument("--geometry", choices=("orth", "herm"), default="orth")
    pr.add_argument("--registry", default=None)
    pr.set_defaults(func=cmd_predict)

    t = sub.add_parser("theta", parents=[common], help="degree-one theta expansion of a class combination")
    t.add_argument("--cache", required=True)
    t.add_argument("--vector", required=True, help="eigenvector index (1-based) or comma-separated coefficients")
    t.add_argument("--literal", action="store_true", help="treat a single number as a coefficient vector")
    t.add_argument("--bound", type=int, default=20)
    t.add_argument("--hecke", default=None, help="extract the eigenvalue at this prime")
    t.add_argument("--min-probes", type=int, default=3)
    t.add_argument("--primes", default=None, help="primes used to split eigenvectors")
    t.set_defaults(func=cmd_theta)

    d = sub.add_parser("degrees", parents=[common], help="degree bounds from anchors")
    d.add_argument("--cache", required=True)
    d.add_argument("--anchors", required=True, help="JSON object: eigenvector index -> degree")
    d.add_argument("--primes", default=None)
    d.add_argument("--cap", type=int, default=None)
    d.set_defaults(func=cmd_degrees)

    z = sub.add_parser("zeta", parents=[common], help="algebraic part of a Dedekind zeta value")
    z.add_argument("--m", type=int, required=True)
    z.add_argument("--k", type=int, required=True)
    z.set_defaults(func=cmd_zeta)

    v = sub.add_parser("verify", parents=[common], help="run the bundled fixtures")
    v.add_argument("--suite", choices=TIERS, default="fast")
    v.add_argument("--only", default=None, help="comma-separated check ids")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GuardTripped as exc:
        print(f"guard tripped: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())

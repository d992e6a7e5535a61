"""Command-line front end.

Exit codes: 0 when every exact check passes, 1 when one fails (the report
carries the counterexample), 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import inspect
import io
import json
import os
import sys
from pathlib import Path

from . import __version__
from . import doldkan as dk
from .algebra import get_ctx
from .coalgebra import (
    C_lambda_ell,
    D_ell,
    FinCoalgebra,
    convolve,
    free_quotient,
    normalize_rank2,
    xi_matrix,
)
from .exact import format_scalar, parse_scalar
from .hurwitz import (
    TruncatedSeries,
    gamma,
    gamma_inverse,
    hurwitz_mul,
    lambda_hat,
    pointwise_mul,
    theta,
    theta_bar,
)
from .interpolation import PolyResidue, phi, phi_inverse, psi, to_monomial
from .species import (
    LinearSpecies,
    character,
    multiplicity_free_ranks,
    random_species,
    sign_species,
    theta_inf_transform,
    trivial_species,
    weighted_tensor,
    weighted_tensor_ranks,
)
from .suites import SUITES, make_rng

THREADS_ENV = "HURWITZ_KERNEL_THREADS"


class ConfigError(ValueError):
    pass


# -- input parsing -------------------------------------------------------------


def _load_text(text: str) -> str:
    if text.startswith("@"):
        try:
            return Path(text[1:]).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {text[1:]}: {exc}") from None
    return text


def _json_or_none(text: str):
    text = text.strip()
    if text[:1] in "[{":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc}") from None
    return None


def parse_series(text: str, ctx) -> TruncatedSeries:
    """``"1,2,1/2"`` (scalar coefficients), ``"1,0,0,1;2,0,0,0"`` (full
    coordinates per coefficient), a JSON list of coordinate lists, a series
    JSON object, or ``@file``."""
    text = _load_text(text)
    data = _json_or_none(text)
    if isinstance(data, dict):
        return TruncatedSeries.from_json(data, ctx)
    if isinstance(data, list):
        return TruncatedSeries.from_coords(ctx, [[parse_scalar(str(x)) for x in row] for row in data])
    if ";" in text:
        rows = [[parse_scalar(x) for x in part.split(",")] for part in text.split(";")]
        return TruncatedSeries.from_coords(ctx, rows)
    return TruncatedSeries.from_scalars(ctx, [parse_scalar(x) for x in text.split(",")])


def parse_ints(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


def parse_species(text: str, bound: int, rng) -> LinearSpecies:
    if text == "trivial":
        return trivial_species(bound)
    if text == "sign":
        return sign_species(bound)
    if text == "random":
        return random_species(bound, rng)
    data = _json_or_none(_load_text(text))
    if not isinstance(data, dict):
        raise ConfigError("species must be trivial, sign, random, a JSON object or @file")
    return LinearSpecies.from_json(data)


def parse_presheaf(text: str, datum, rng) -> dk.Presheaf:
    kind, _, arg = text.partition(":")
    if kind == "random":
        return dk.random_presheaf(datum, rng)
    if kind in ("representable", "skyscraper", "signed"):
        c = int(arg)
        if c not in datum.objects:
            raise ConfigError(f"object {c} outside 0..{datum.bound}")
        if kind == "representable":
            return dk.representable(datum, c)
        return dk.skyscraper(datum, c, signed=kind == "signed")
    if kind == "trivial":
        ranks = parse_ints(arg)
        if len(ranks) > datum.bound + 1:
            raise ConfigError("more ranks than objects")
        return dk.trivial_presheaf(datum, dict(enumerate(ranks)))
    data = _json_or_none(_load_text(text))
    if not isinstance(data, dict):
        raise ConfigError("presheaf must be random, representable:c, skyscraper:c, signed:c, trivial:r0,r1,..., JSON or @file")
    return dk.presheaf_from_json(datum, data)


def _lam(args):
    return parse_scalar(args.lam)


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


# -- output --------------------------------------------------------------------


def _flatten(obj, prefix: str = "") -> list:
    if isinstance(obj, dict):
        out = []
        for k in sorted(obj):
            out += _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
        return out
    if isinstance(obj, list) and any(isinstance(x, (dict, list)) for x in obj):
        out = []
        for i, x in enumerate(obj):
            out += _flatten(x, f"{prefix}[{i}]")
        return out
    return [(prefix, json.dumps(obj, sort_keys=True) if isinstance(obj, list) else obj)]


def render(result: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(result, sort_keys=True, indent=2) + "\n"
    checks = result.get("checks")
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        if checks is not None:
            w.writerow(["suite", "name", "passed", "trials", "failures", "anchor"])
            for c in checks:
                w.writerow([result["suite"], c["name"], c["passed"], c["trials"], c["failures"], c["anchor"]])
        else:
            w.writerow(["key", "value"])
            for k, v in _flatten(result):
                w.writerow([k, v])
        return buf.getvalue()
    if checks is not None:
        buf.write(f"suite {result['suite']}: {'PASS' if result['passed'] else 'FAIL'}\n")
        width = max((len(c["name"]) for c in checks), default=0)
        for c in checks:
            mark = "ok  " if c["passed"] else "FAIL"
            buf.write(f"  {mark} {c['name']:<{width}}  {c['trials']:>6} trials  {c['anchor']}\n")
            if "counterexample" in c:
                buf.write(f"       counterexample: {json.dumps(c['counterexample'], sort_keys=True)}\n")
        return buf.getvalue()
    for k, v in _flatten(result):
        buf.write(f"{k}: {v}\n")
    return buf.getvalue()


# -- commands ------------------------------------------------------------------

TRANSFORMS = {
    "lambda_hat": lambda a, lam: lambda_hat(a, lam),
    "theta": lambda a, lam: theta(a),
    "theta_bar": lambda a, lam: theta_bar(a),
    "gamma": gamma,
    "gamma_inverse": gamma_inverse,
}


def cmd_hurwitz(args) -> tuple:
    ctx = get_ctx(args.ctx)
    lam = _lam(args)
    a = parse_series(args.a, ctx)
    if args.action == "mul":
        b = parse_series(args.b, ctx)
        return {"lambda": format_scalar(lam), "product": hurwitz_mul(a, b, lam).to_json()}, True
    if args.action == "transform":
        return {"kind": args.kind, "lambda": format_scalar(lam), "result": TRANSFORMS[args.kind](a, lam).to_json()}, True
    # point check of the transform identities on the given pair
    b = parse_series(args.b, ctx)
    ab = hurwitz_mul(a, b, lam)
    checks = {
        "lambda_hat_multiplicative": lambda_hat(ab, lam) == hurwitz_mul(lambda_hat(a, lam), lambda_hat(b, lam), 1),
        "theta_multiplicative": theta(hurwitz_mul(a, b, 1)) == pointwise_mul(theta(a), theta(b)),
        "gamma_multiplicative": gamma(ab, lam) == pointwise_mul(gamma(a, lam), gamma(b, lam)),
        "gamma_factorization": gamma(a, lam) == theta(lambda_hat(a, lam)),
        "theta_bar_left_inverse": theta_bar(theta(a)) == a,
    }
    ok = all(checks.values())
    return {"lambda": format_scalar(lam), "identities": checks, "passed": ok}, ok


def cmd_interp(args) -> tuple:
    ctx = get_ctx(args.ctx)
    a = parse_series(args.a, ctx)
    if args.action == "psi":
        f = psi(a)
        return {"residue": f.to_json(), "monomial": [c.to_json() for c in to_monomial(f)]}, True
    if args.action == "phi":
        f = PolyResidue(ctx, a.coeffs)
        return {"values": phi(f).to_json()}, True
    if args.action == "interpolate":
        return {"residue": phi_inverse(a).to_json()}, True
    ok = phi(psi(a)) == theta(a)
    return {"phi_psi": phi(psi(a)).to_json(), "theta": theta(a).to_json(), "passed": ok}, ok


def _coalgebra(kind: str, lam, level: int) -> FinCoalgebra:
    if kind == "C":
        return C_lambda_ell(lam, level)
    return D_ell(level)


def cmd_coalg(args) -> tuple:
    lam = _lam(args)
    level = args.level if args.level is not None else 2
    if level < 0:
        raise ConfigError("--level must be non-negative")
    if args.action == "show":
        if args.kind == "xi":
            return {"xi": xi_matrix(lam, level).to_json(), "lambda": format_scalar(lam), "level": level}, True
        return {"coalgebra": _coalgebra(args.kind, lam, level).to_json()}, True
    if args.action == "quotient":
        from .coalgebra import make_C_lambda, make_D

        if args.kind == "xi":
            raise ConfigError("quotient needs --kind C or D")
        E = make_C_lambda(lam) if args.kind == "C" else make_D()
        q = free_quotient(E, level)
        closed = _coalgebra(args.kind, lam, level)
        same = q.counit == closed.counit and q.comult == closed.comult
        words = ["".join(E.labels[i] for i in w) or "1" for w in q.words]
        return {"quotient": q.to_json(), "representatives": words, "matches_closed_form": same}, same
    if args.action == "convolve":
        if args.kind == "xi":
            raise ConfigError("convolve needs --kind C or D")
        ctx = get_ctx(args.ctx)
        C = _coalgebra(args.kind, lam, level)
        f, g = parse_series(args.a, ctx), parse_series(args.b, ctx)
        if f.level != C.dim or g.level != C.dim:
            raise ConfigError(f"maps on a coalgebra of rank {C.dim} need {C.dim} coefficients")
        out = convolve(C, ctx, [x.coords for x in f.coeffs], [x.coords for x in g.coeffs])
        return {"coalgebra": C.name, "convolution": TruncatedSeries.from_coords(ctx, out).to_json()}, True
    # classify
    if not args.coalgebra:
        raise ConfigError("classify needs --coalgebra JSON or @file")
    data = _json_or_none(_load_text(args.coalgebra))
    if not isinstance(data, dict):
        raise ConfigError("--coalgebra must be a JSON object")
    res = normalize_rank2(FinCoalgebra.from_json(data))
    return {"lambda": format_scalar(res.lam), "basis_change": res.basis_change.to_json()}, True


def cmd_species(args, rng) -> tuple:
    g = args.weight
    if g < 0:
        raise ConfigError("--weight must be a non-negative integer")
    if args.action == "ranks":
        m, n = parse_ints(args.m), parse_ints(args.n)
        if len(m) != len(n):
            raise ConfigError("rank sequences must have equal length")
        out = {"weight": g, "ranks": weighted_tensor_ranks(m, n, g)}
        if args.as_printed:
            out["as_printed"] = multiplicity_free_ranks(m, n, g)
        return out, True
    bound = args.bound if args.bound is not None else 3
    M = parse_species(args.left, bound, rng)
    if args.action == "tensor":
        N = parse_species(args.right, M.bound, rng)
        return {"weight": g, "tensor": weighted_tensor(M, N, g).to_json()}, True
    if args.action == "transform":
        return {"weight": g, "transform": theta_inf_transform(M, g).to_json()}, True
    sigma = parse_ints(args.sigma) if args.sigma else list(range(args.n))
    n = len(sigma)
    target = weighted_tensor(M, parse_species(args.right, M.bound, rng), g) if args.right else M
    if n > target.bound:
        raise ConfigError(f"permutation size {n} exceeds bound {target.bound}")
    if sorted(sigma) != list(range(n)):
        raise ConfigError("--sigma must be a permutation of 0..n-1")
    return {"n": n, "sigma": sigma, "character": format_scalar(character(target, n, sigma))}, True


def cmd_doldkan(args, rng) -> tuple:
    bound = args.bound if args.bound is not None else 3
    if args.instance not in dk.INSTANCES:
        raise ConfigError(f"unknown instance {args.instance!r}; choose from {list(dk.INSTANCES)}")
    if not 0 <= bound <= dk.MAX_BOUND:
        raise ConfigError(f"--bound must lie in 0..{dk.MAX_BOUND}")
    d = dk.make_instance(args.instance, bound)
    F = parse_presheaf(args.presheaf, d, rng)
    head = {"instance": args.instance, "bound": bound, "input_ranks": F.rank_sequence()}
    if args.action == "gamma":
        G = dk.GammaPresheaf(F)
        head["gamma"] = {
            str(a): {"rank": G.rank(a), "summands": [dk._mor_label(n) for n in d.subobjects(a)]} for a in d.objects
        }
        return head, True
    if args.action == "n":
        # N needs values on all of D, so it is applied to Gamma F
        N = dk.NPresheaf(d, dk.GammaPresheaf(F))
        head["n_gamma_ranks"] = [N.rank(a) for a in d.objects]
        head["n_gamma"] = N.as_presheaf().to_json()
        return head, True
    if args.action == "tensor":
        G = parse_presheaf(args.presheaf2, d, rng)
        T = dk.transported_tensor(d, F, G)
        cmp = T.compare_with_engine()
        head.update(
            {
                "second_ranks": G.rank_sequence(),
                "tensor_ranks": [T.rank(a) for a in d.objects],
                "covering_pairs": [len(T.pairs[a]) for a in d.objects],
                "matches_engine": cmp.ok,
            }
        )
        if not cmp.ok:
            head["detail"] = cmp.detail
        return head, cmp.ok
    rt = dk.roundtrip(d, F)
    head.update({"roundtrip_iso": rt.ok, "ranks_equal": rt.ranks_equal})
    if not rt.ok:
        head["detail"] = rt.detail
    return head, rt.ok


# flags each suite understands; anything else is a configuration error
VERIFY_FLAGS = {
    "hurwitz": {"level", "lam", "ctx", "trials"},
    "interp": {"level", "ctx", "trials"},
    "rota-baxter": {"level", "lam", "ctx", "trials"},
    "comonad": {"level", "lam", "ctx", "trials"},
    "coalgebra": {"level", "lam", "ctx", "bound"},
    "species": {"bound", "weight", "lam"},
    "doldkan": {"instance", "bound"},
    "bridge": {"bound", "trials"},
}


def suite_kwargs(args) -> dict:
    name = args.suite
    given = {k for k in ("level", "lam", "ctx", "trials", "bound", "weight", "instance") if getattr(args, k) is not None}
    extra = given - VERIFY_FLAGS[name]
    if extra:
        flags = ", ".join("--" + ("lambda" if k == "lam" else k) for k in sorted(extra))
        raise ConfigError(f"suite {name} does not take {flags}")
    kw: dict = {"seed": args.seed}
    if args.lam is not None:
        parse_scalar(args.lam)
        kw["lambdas"] = (args.lam,)
    if args.ctx is not None:
        get_ctx(args.ctx)
        kw["ctxs"] = (args.ctx,)
    if args.trials is not None:
        if args.trials < 1:
            raise ConfigError("--trials must be positive")
        kw["trials"] = args.trials
    if args.level is not None:
        limit = {"comonad": 6, "coalgebra": 5}.get(name, 8)
        if not 1 <= args.level <= limit:
            raise ConfigError(f"--level for {name} must lie in 1..{limit}")
        kw["levels"] = (args.level,)
        if name == "interp":
            kw["crt_levels"] = (min(args.level, 6),)
        if name == "coalgebra":
            kw["xi_levels"] = (args.level,)
    if args.bound is not None:
        if name == "coalgebra":
            if not 0 <= args.bound <= 12:
                raise ConfigError("--bound for coalgebra must lie in 0..12")
            kw["bialgebra_bound"] = args.bound
        elif name == "species":
            if not 0 <= args.bound <= 6:
                raise ConfigError("--bound for species must lie in 0..6")
            kw["bounds"] = range(0, args.bound + 1)
        elif not 0 <= args.bound <= dk.MAX_BOUND:
            raise ConfigError(f"--bound must lie in 0..{dk.MAX_BOUND}")
        else:
            kw["bound"] = args.bound
    if args.weight is not None:
        if args.weight < 0:
            raise ConfigError("--weight must be non-negative")
        kw["weights"] = (args.weight,)
    if args.instance is not None:
        kw["instances"] = (args.instance,)
    fn = SUITES[name]
    if "workers" in inspect.signature(fn).parameters:
        kw["workers"] = _threads()
    return kw


def cmd_verify(args) -> tuple:
    kw = suite_kwargs(args)
    report = SUITES[args.suite](**kw)
    out = report.to_json()
    out["seed"] = args.seed
    return out, report.passed


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every random trial (default 0)")
    common.add_argument("--format", choices=("json", "csv", "pretty"), default="json")
    common.add_argument("--bound", type=int, default=None, help="truncation bound")

    p = argparse.ArgumentParser(prog="hurwitz-kernel", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="verb", required=True)

    h = sub.add_parser("hurwitz", parents=[common], help="weighted Hurwitz products and transforms")
    h.add_argument("action", choices=("mul", "transform", "verify"))
    h.add_argument("--a", required=True, help="series: '1,2,3', '1,0;0,1', JSON or @file")
    h.add_argument("--b", default="1")
    h.add_argument("--lambda", dest="lam", default="0")
    h.add_argument("--ctx", default="rat")
    h.add_argument("--kind", choices=sorted(TRANSFORMS), default="gamma")

    i = sub.add_parser("interp", parents=[common], help="polynomial residues and evaluation")
    i.add_argument("action", choices=("psi", "phi", "interpolate", "check-triangle"))
    i.add_argument("--a", required=True, help="series (for phi: falling-factorial coefficients)")
    i.add_argument("--ctx", default="rat")

    c = sub.add_parser("coalg", parents=[common], help="coalgebras C(lam)_l, D_l, quotients, convolution")
    c.add_argument("action", choices=("show", "quotient", "convolve", "classify"))
    c.add_argument("--kind", choices=("C", "D", "xi"), default="C")
    c.add_argument("--lambda", dest="lam", default="0")
    c.add_argument("--level", type=int, default=None)
    c.add_argument("--ctx", default="rat")
    c.add_argument("--a", default="1")
    c.add_argument("--b", default="1")
    c.add_argument("--coalgebra", default=None, help="pointed rank-2 coalgebra JSON or @file")

    s = sub.add_parser("species", parents=[common], help="weighted species tensor products")
    s.add_argument("action", choices=("tensor", "transform", "character", "ranks"))
    s.add_argument("--weight", type=int, default=1)
    s.add_argument("--left", default="random", help="trivial, sign, random, JSON or @file")
    s.add_argument("--right", default=None)
    s.add_argument("--m", default="1,1,1")
    s.add_argument("--n", default="1,1,1")
    s.add_argument("--sigma", default=None, help="permutation of 0..n-1, e.g. '1,0,2'")
    s.add_argument("--as-printed", action="store_true", help="also report the multiplicity-free cover count")

    d = sub.add_parser("doldkan", parents=[common], help="Gamma, N and the transported tensor")
    d.add_argument("action", choices=("gamma", "n", "tensor", "roundtrip"))
    d.add_argument("--instance", default="fi_sharp")
    d.add_argument("--presheaf", default="random")
    d.add_argument("--presheaf2", default="random")

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=sorted(SUITES))
    v.add_argument("--level", type=int, default=None)
    v.add_argument("--lambda", dest="lam", default=None)
    v.add_argument("--ctx", default=None)
    v.add_argument("--weight", type=int, default=None)
    v.add_argument("--instance", default=None, choices=dk.INSTANCES)
    v.add_argument("--trials", type=int, default=None)
    return p


def run(argv=None) -> tuple:
    """Parse and execute; returns ``(exit_code, output_text)``."""
    parser = build_parser()
    args = parser.parse_args(argv)
    rng = make_rng(args.seed, f"cli:{args.verb}")
    try:
        _threads()
        if args.verb == "hurwitz":
            result, ok = cmd_hurwitz(args)
        elif args.verb == "interp":
            result, ok = cmd_interp(args)
        elif args.verb == "coalg":
            result, ok = cmd_coalg(args)
        elif args.verb == "species":
            result, ok = cmd_species(args, rng)
        elif args.verb == "doldkan":
            result, ok = cmd_doldkan(args, rng)
        else:
            result, ok = cmd_verify(args)
    except (ValueError, ZeroDivisionError) as exc:
        return 2, f"error: {exc}\n"
    return (0 if ok else 1), render(result, args.format)


def main(argv=None) -> int:
    try:
        code, text = run(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    stream = sys.stderr if code == 2 else sys.stdout
    stream.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())


"""Command-line interface.

Exit codes
  0   success
  1   certification or qualitative-expectation failure
  2   solve-thresholds: thresholds cross (degenerate pair)
  3   run-test: wealth reached 1/alpha (null rejected)
  64  usage error: bad flags, unparsable model spec, missing config
  65  run-test: malformed input line
  73  output directory cannot be created or written

Model specs
  gaussian:mu=0,sigma=1
  cauchy:loc=-1,scale=10
  mixture:0.99*gaussian(mu=1)+0.01*cauchy(loc=-1,scale=10)
  discrete:file=PATH            (one "atom probability" pair per line; 1/3 style fractions allowed)
  gaussian-interval:a=-0.5,b=0.5   (composite null)
  gaussian-outside:a=-0.5,b=0.5    (alternative class mu <= a or mu >= b)
  gaussian-nonzero:mu=0            (alternative class mu != mu)
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from fractions import Fraction
from pathlib import Path


from .censoring import solve_thresholds
from .dists import (
    Cauchy,
    DensityModel,
    DiscreteDist,
    Gaussian,
    MixtureModel,
    make_pair,
    make_rng,
)
from .eprocess import EProcess, anytime_p_value
from .evalues import EFactor

EXIT_OK, EXIT_FAIL, EXIT_DEGENERATE, EXIT_REJECT = 0, 1, 2, 3
EXIT_USAGE, EXIT_DATA, EXIT_CANTCREAT = 64, 65, 73


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# Model specs
# ---------------------------------------------------------------------------


class IntervalNull:
    def __init__(self, a: float, b: float):
        self.a, self.b = a, b


class AltClassSpec:
    def __init__(self, kind: str, **params):
        self.kind, self.params = kind, params


def _params(text: str, allowed: dict, where: str) -> dict:
    out = {}
    if text.strip():
        for item in text.split(","):
            if "=" not in item:
                raise UsageError(f"{where}: expected key=value, got {item!r}")
            k, v = (s.strip() for s in item.split("=", 1))
            if k not in allowed:
                raise UsageError(f"{where}: unknown parameter {k!r}")
            try:
                out[k] = allowed[k](v)
            except ValueError:
                raise UsageError(f"{where}: bad value {v!r} for {k}") from None
    return out


def _number(text: str):
    t = text.strip()
    if "/" in t:
        return Fraction(t)
    if re.fullmatch(r"[+-]?\d+", t):
        return int(t)
    return float(t)


def read_discrete_file(path: str) -> DiscreteDist:
    atoms, probs = [], []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read discrete file {path}: {exc.strerror}") from None
    for i, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise UsageError(f"{path}:{i}: expected 'atom probability'")
        try:
            atoms.append(float(parts[0]))
            probs.append(_number(parts[1]))
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"{path}:{i}: unparsable number") from None
    if not atoms:
        raise UsageError(f"{path}: no atoms")
    try:
        return DiscreteDist(atoms, probs)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


_SIMPLE = {
    "gaussian": (Gaussian, {"mu": float, "sigma": float}),
    "cauchy": (Cauchy, {"loc": float, "scale": float}),
}


def _simple_model(name: str, body: str, where: str) -> DensityModel:
    if name not in _SIMPLE:
        raise UsageError(f"{where}: unknown model {name!r}")
    cls, allowed = _SIMPLE[name]
    try:
        return cls(**_params(body, allowed, where))
    except ValueError as exc:
        raise UsageError(f"{where}: {exc}") from None


def parse_model_spec(spec: str):
    """Parse a model spec into a model, an :class:`IntervalNull` or an :class:`AltClassSpec`."""
    kind, _, body = spec.partition(":")
    kind = kind.strip().lower()
    if kind in _SIMPLE:
        return _simple_model(kind, body, spec)
    if kind == "mixture":
        comps = []
        for term in body.split("+"):
            m = re.fullmatch(r"\s*([0-9.eE+-]+)\s*\*\s*(\w+)\((.*)\)\s*", term)
            if not m:
                raise UsageError(f"{spec}: bad mixture term {term!r}")
            comps.append((float(m.group(1)), _simple_model(m.group(2), m.group(3), spec)))
        try:
            return MixtureModel(comps)
        except ValueError as exc:
            raise UsageError(f"{spec}: {exc}") from None
    if kind == "discrete":
        p = _params(body, {"file": str}, spec)
        if "file" not in p:
            raise UsageError(f"{spec}: discrete spec needs file=")
        return read_discrete_file(p["file"])
    if kind in ("gaussian-interval", "gaussian-outside"):
        p = _params(body, {"a": float, "b": float}, spec)
        if set(p) != {"a", "b"} or not p["a"] <= p["b"] or (kind == "gaussian-outside" and p["a"] == p["b"]):
            raise UsageError(f"{spec}: need a=<lo>,b=<hi> with lo <= hi (lo < hi for a class)")
        if kind == "gaussian-interval":
            return IntervalNull(p["a"], p["b"])
        return AltClassSpec("outside", **p)
    if kind == "gaussian-nonzero":
        p = _params(body, {"mu": float}, spec)
        return AltClassSpec("nonzero", mu=p.get("mu", 0.0))
    raise UsageError(f"unknown model kind {kind!r}")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(float(v))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _build_pair(null, alt, k):
    if not isinstance(null, DensityModel) or not isinstance(alt, DensityModel):
        raise UsageError("--null and --alt must be plain models here")
    mass = 1.0 if k is None else k
    if k is not None and isinstance(null, DiscreteDist) and all(isinstance(p, (int, Fraction)) for p in null.probs):
        mass = Fraction(repr(k))
    try:
        return make_pair(null, alt, mass)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_solve(args) -> int:
    null, alt = parse_model_spec(args.null), parse_model_spec(args.alt)
    if not 0 < args.eps < 1:
        raise UsageError("--eps must lie in (0, 1)")
    if args.k is not None and not 0 < args.k <= 1:
        raise UsageError("--k must lie in (0, 1]")
    pair = _build_pair(null, alt, args.k)
    cp = solve_thresholds(pair, args.eps)
    print(f"c_lo = {_fmt(cp.c_lo)}")
    print(f"c_hi = {_fmt(cp.c_hi)}")
    print(f"k = {_fmt(cp.k)}")
    print(f"degenerate = {_fmt(cp.degenerate)}")
    print(f"expected_clamp_null = {_fmt(cp.expected_clamp_null)}")
    print(f"denom = {_fmt(cp.denom)}")
    return EXIT_DEGENERATE if cp.degenerate else EXIT_OK


def _log_ratio_fn(null: DensityModel, alt: DensityModel):
    return lambda x: float(alt.log_density(x) - null.log_density(x))


def _make_stepper(args):
    """Return ``step(x) -> factor`` for the requested method."""
    from .plugin import MedianEstimator, NonzeroMean, OutsideInterval, PluginTest
    from .ripr import CombinedTest, CompositeNullSpec, gaussian_location_family, make_ripr_efactor

    method = args.method
    null = parse_model_spec(args.null)
    alt = parse_model_spec(args.alt) if args.alt else None
    alt_class = parse_model_spec(args.alt_class) if args.alt_class else None
    eps = args.eps
    if method.startswith("robust") and not 0 < eps < 1:
        raise UsageError("--eps must lie in (0, 1)")

    def need(cond, msg):
        if not cond:
            raise UsageError(f"{method}: {msg}")

    def to_class(spec):
        need(isinstance(spec, AltClassSpec), "--alt-class must be gaussian-outside or gaussian-nonzero")
        if spec.kind == "outside":
            return OutsideInterval(spec.params["a"], spec.params["b"])
        return NonzeroMean(spec.params["mu"])

    if method in ("robust_simple", "nonrobust_sprt"):
        need(isinstance(null, DensityModel) and isinstance(alt, DensityModel), "needs --null and --alt models")
        if method == "nonrobust_sprt":
            lr = _log_ratio_fn(null, alt)

            def sprt(x):
                v = lr(x)
                return math.exp(v) if v < 709 else math.inf
            return sprt
        if args.c_lo is not None:
            ef = _efactor_from_values(null, alt, eps, args)
        else:
            ef = EFactor(solve_thresholds(_build_pair(null, alt, None), eps))
        return lambda x: float(ef.evaluate(x))
    if method in ("robust_ripr", "nonrobust_ripr"):
        need(isinstance(null, IntervalNull), "needs --null gaussian-interval:a=..,b=..")
        need(isinstance(alt, Gaussian), "needs --alt gaussian:mu=..")
        spec = CompositeNullSpec(gaussian_location_family(alt.sigma), null.a, null.b)
        if spec.contains(alt.mu):
            raise UsageError("alternative mean lies inside the null interval")
        if method == "nonrobust_ripr":
            from .ripr import nonrobust_ripr_factor
            return lambda x: nonrobust_ripr_factor(spec, alt.mu, x)
        ef = make_ripr_efactor(spec, alt.mu, eps)
        return lambda x: float(ef.evaluate(x))
    if method in ("robust_plugin", "nonrobust_plugin"):
        need(alt_class is not None, "needs --alt-class")
        cls = to_class(alt_class)
        if isinstance(null, IntervalNull):
            spec = CompositeNullSpec(gaussian_location_family(), null.a, null.b)
            test = CombinedTest(spec, MedianEstimator(cls), eps, robust=method.startswith("robust"))
        else:
            need(isinstance(null, Gaussian), "needs a gaussian --null")
            test = PluginTest(null, cls, eps, robust=method.startswith("robust"))
        return lambda x: test.step(x)[0]
    if method == "robust_combined":
        need(isinstance(null, IntervalNull), "needs --null gaussian-interval:a=..,b=..")
        need(alt_class is not None, "needs --alt-class")
        spec = CompositeNullSpec(gaussian_location_family(), null.a, null.b)
        test = CombinedTest(spec, MedianEstimator(to_class(alt_class)), eps)
        return lambda x: test.step(x)[0]
    raise UsageError(f"unknown method {method!r}")


def _efactor_from_values(null, alt, eps, args) -> EFactor:
    """E-factor from thresholds given on the command line (no solving)."""
    from .censoring import CensoredPair

    if args.c_hi is None or args.denom is None:
        raise UsageError("--c-lo needs --c-hi and --denom")
    pair = _build_pair(null, alt, None)
    cp = CensoredPair(pair=pair, eps=eps, k=1.0, c_lo=args.c_lo, c_hi=args.c_hi,
                      degenerate=args.c_lo >= args.c_hi, expected_clamp_null=math.nan, denom=args.denom)
    return EFactor(cp)


def cmd_run_test(args) -> int:
    if not 0 < args.alpha < 1:
        raise UsageError("--alpha must lie in (0, 1)")
    step = _make_stepper(args)
    if args.input and args.input != "-":
        try:
            fh = open(args.input)
        except OSError as exc:
            raise UsageError(f"cannot open {args.input}: {exc.strerror}") from None
    else:
        fh = sys.stdin
    state = EProcess(alpha=args.alpha)
    out = sys.stdout
    out.write("n,wealth,p_value,stopped\n")
    with fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text:
                continue
            try:
                x = float(text)
                if not math.isfinite(x):
                    raise ValueError
            except ValueError:
                out.flush()
                print(f"line {lineno}: malformed observation {text!r}", file=sys.stderr)
                return EXIT_DATA
            state.update(step(x))
            out.write(f"{state.n},{_fmt(state.wealth)},{_fmt(anytime_p_value(state))},{_fmt(state.stopped)}\n")
            if state.stopped and not args.keep_going:
                return EXIT_REJECT
    return EXIT_REJECT if state.stopped else EXIT_OK


def cmd_simulate(args) -> int:
    from .experiments import (
        expectation_checks,
        load_configs,
        override,
        run_experiment,
        slopes_to_csv,
        summarize_slopes,
    )

    try:
        cfgs = load_configs(args.config)
    except FileNotFoundError:
        raise UsageError(f"config file {args.config} not found") from None
    except (ValueError, KeyError) as exc:
        raise UsageError(f"{args.config}: {exc}") from None
    except Exception as exc:  # configparser errors
        raise UsageError(f"{args.config}: {exc}") from None
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"cannot write to {out_dir}: {exc.strerror}", file=sys.stderr)
        return EXIT_CANTCREAT
    status = EXIT_OK
    for cfg in cfgs:
        try:
            cfg = override(cfg, seed=args.seed, horizon=args.horizon, replications=args.replications)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        table = run_experiment(cfg)
        slopes = summarize_slopes(table)
        try:
            (out_dir / f"{cfg.label}_trace.csv").write_text(table.to_csv())
            (out_dir / f"{cfg.label}_summary.csv").write_text(slopes_to_csv(slopes))
        except OSError as exc:
            print(f"cannot write to {out_dir}: {exc.strerror}", file=sys.stderr)
            return EXIT_CANTCREAT
        checks = expectation_checks(cfg, table, slopes)
        failed = [d for d, ok in checks if not ok]
        verdict = "PASS" if not failed else "FAIL"
        detail = f" ({'; '.join(failed)})" if failed else f" ({len(checks)} checks)"
        print(f"{cfg.label}: {verdict}{detail}")
        if failed:
            status = EXIT_FAIL
    return status


def cmd_theory_sweep(args) -> int:
    from .theory import asymptotic_sweep, sweep_to_csv

    try:
        rows = asymptotic_sweep(args.scenario, args.eps, mu1=args.mu1, null_interval=tuple(args.null_interval))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = sweep_to_csv(rows)
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            print(f"cannot write {args.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_CANTCREAT
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_certify(args) -> int:
    from .oracle import certify_efactor, censored_kl, exact_growth_rate, random_discrete_pair
    from .theory import growth_lower_bound, optimality_gap_bound

    from .dists import DiscretePair

    bad = 0
    two_point = DiscretePair([0, 1], [Fraction(1, 2)] * 2, [Fraction(1, 4), Fraction(3, 4)])
    rep = certify_efactor(two_point, Fraction(1, 10))
    ok = rep.certified and rep.max_mean == 1 and rep.c_hi == Fraction(27, 22) and rep.c_lo == Fraction(13, 18)
    print(f"two-point: c_lo={rep.c_lo} c_hi={rep.c_hi} max_mean={rep.max_mean} {'ok' if ok else 'VIOLATION'}")
    bad += not ok
    for eps in args.eps:
        rng = make_rng(args.seed, int(round(eps * 1e6)))
        worst = -math.inf
        viol = 0
        skipped = 0
        for _ in range(args.pairs):
            pair = random_discrete_pair(rng, exact=args.exact)
            cp = solve_thresholds(pair, eps)
            if cp.degenerate:
                skipped += 1
                continue
            r = certify_efactor(pair, eps)
            worst = max(worst, float(r.max_mean))
            rate = exact_growth_rate(pair, eps, pair.p1)
            kl = censored_kl(cp)
            b2 = growth_lower_bound(cp, kl)
            b3 = optimality_gap_bound(kl, eps)
            chain = rate >= b2 - 1e-12 and (not math.isfinite(b3) or b2 >= b3 - 1e-12)
            if not (r.certified and chain):
                viol += 1
                print(f"  violation at eps={eps}: p0={pair.p0} p1={pair.p1} q={r.violating_q}", file=sys.stderr)
        print(f"eps={eps:g}: pairs={args.pairs} degenerate={skipped} max_worst_case_mean={worst!r} violations={viol}")
        bad += viol
    return EXIT_FAIL if bad else EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="robustseq", description="Robust anytime-valid sequential tests under contamination.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve-thresholds", help="solve the censoring thresholds of a pair")
    s.add_argument("--null", required=True)
    s.add_argument("--alt", required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--k", type=float, default=None, help="scale the null density to total mass k")
    s.set_defaults(func=cmd_solve)

    from .batch import METHODS

    r = sub.add_parser("run-test", help="stream observations through a sequential test")
    r.add_argument("--method", required=True, choices=METHODS)
    r.add_argument("--null", required=True)
    g = r.add_mutually_exclusive_group()
    g.add_argument("--alt")
    g.add_argument("--alt-class")
    r.add_argument("--eps", type=float, default=0.01)
    r.add_argument("--alpha", type=float, default=0.05)
    r.add_argument("--input", default="-", help="file with one observation per line (default: stdin)")
    r.add_argument("--keep-going", action="store_true", help="keep monitoring after the first crossing")
    r.add_argument("--c-lo", type=float, default=None, help="robust_simple: use these thresholds instead of solving")
    r.add_argument("--c-hi", type=float, default=None)
    r.add_argument("--denom", type=float, default=None)
    r.set_defaults(func=cmd_run_test)

    m = sub.add_parser("simulate", help="run the simulation scenarios of a config file")
    m.add_argument("--config", required=True)
    m.add_argument("--seed", type=int, default=None)
    m.add_argument("--horizon", type=int, default=None)
    m.add_argument("--replications", type=int, default=None)
    m.add_argument("--out", default="results")
    m.set_defaults(func=cmd_simulate)

    t = sub.add_parser("theory-sweep", help="theoretical slopes across eps as CSV")
    t.add_argument("--scenario", choices=("simple", "ripr"), default="simple")
    t.add_argument("--eps", type=_float_list, default=[1e-1, 1e-2, 1e-3, 1e-4])
    t.add_argument("--mu1", type=float, default=1.0)
    t.add_argument("--null-interval", type=_float_list, default=[-0.5, 0.5])
    t.add_argument("--out", default=None)
    t.set_defaults(func=cmd_theory_sweep)

    c = sub.add_parser("certify", help="exact e-value certification on random discrete pairs")
    c.add_argument("--pairs", type=int, default=100)
    c.add_argument("--eps", type=_float_list, default=[0.01, 0.05, 0.1])
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--exact", action="store_true", help="rational arithmetic (probabilities rounded to 1/1000)")
    c.set_defaults(func=cmd_certify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"robustseq: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

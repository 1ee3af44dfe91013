"""``gapslab`` command line.

Every invocation resolves an :class:`ExperimentConfig`, runs it, writes the
result (JSON, or CSV where the result is a table) and a run manifest that
echoes the resolved configuration.  A manifest can be replayed with
``gapslab --replay MANIFEST``.

Exit codes: 0 ok, 2 validation error, 3 budget exceeded, 4 I/O error.
"""
import argparse
import contextlib
import csv
import io
import json
import math
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path

from . import __version__, cache, census, engine, gpy, hl, rational, singular, stats, tuples
from ._backend import BACKEND
from .errors import CacheError, GapslabError, ValidationError
from .parallel import default_workers

COMMANDS = ("sieve", "gaps", "tuples", "singular-series", "hl-count", "gap-cdf", "gpy",
            "s2", "recip-sum", "verify-params", "optimize-k", "bv-probe")

BUDGET_DEFAULTS = {
    "sieve_limit": engine.SIEVE_LIMIT,
    "enum_cap": tuples.ENUM_CAP,
    "bv_max_x": hl.BV_MAX_X,
    "bv_max_residues": hl.BV_MAX_RESIDUES,
}


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)
    output_path: str | None = None
    manifest_path: str | None = None
    output_format: str = "json"
    cache_dir: str | None = None
    worker_count: int = 1
    budgets: dict = field(default_factory=lambda: dict(BUDGET_DEFAULTS))

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if self.output_format not in ("json", "csv"):
            raise ValidationError("output format must be json or csv")
        if self.worker_count < 1:
            raise ValidationError("worker count must be >= 1")
        unknown = set(self.budgets) - set(BUDGET_DEFAULTS)
        if unknown:
            raise ValidationError(f"unknown budget keys {sorted(unknown)}")
        self.budgets = {**BUDGET_DEFAULTS, **self.budgets}
        for key, v in self.budgets.items():
            if not isinstance(v, int) or v < 1:
                raise ValidationError(f"budget {key} must be a positive integer")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class RunManifest:
    config: dict
    version: str
    backend: str
    wall_time: float
    counters: dict
    exit_code: int
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


# -- parsing helpers --------------------------------------------------------

def parse_int(text):
    """Integer from "123", "1e7" or "10**9"; non-integral values are rejected."""
    s = str(text).strip().replace("_", "")
    if "**" in s:
        b, _, e = s.partition("**")
        return parse_int(b) ** parse_int(e)
    try:
        d = Decimal(s)
    except InvalidOperation as exc:
        raise ValidationError(f"not an integer: {text!r}") from exc
    if d != d.to_integral_value():
        raise ValidationError(f"not an integer: {text!r}")
    return int(d)


def parse_float(text):
    try:
        v = float(str(text).strip())
    except ValueError as exc:
        raise ValidationError(f"not a number: {text!r}") from exc
    if not math.isfinite(v):
        raise ValidationError(f"not a finite number: {text!r}")
    return v


def parse_floats(text):
    return [parse_float(t) for t in str(text).split(",") if t.strip()]


@contextlib.contextmanager
def budgets_applied(budgets):
    """Temporarily install the configured cost guards as module settings."""
    saved = (engine.SIEVE_LIMIT, tuples.ENUM_CAP, hl.BV_MAX_X)
    engine.SIEVE_LIMIT = budgets["sieve_limit"]
    tuples.ENUM_CAP = budgets["enum_cap"]
    hl.BV_MAX_X = budgets["bv_max_x"]
    try:
        yield
    finally:
        engine.SIEVE_LIMIT, tuples.ENUM_CAP, hl.BV_MAX_X = saved


# -- command bodies ---------------------------------------------------------
# Each returns (json payload, optional (header, rows) table).

def _cmd_sieve(p, cfg):
    lo, hi = parse_int(p["lo"]), parse_int(p["hi"])
    if not 0 <= lo < hi:
        raise ValidationError("need 0 <= lo < hi")
    if p.get("cache"):
        if hi - lo > engine.MAX_SEGMENT_LEN:
            raise ValidationError("cached sieving is limited to one segment")
        seg = cache.load_or_build(lo, hi - lo, cfg.cache_dir)
        ps = seg.primes()
    else:
        ps = engine.primes_between(lo, hi)
    out = {"lo": lo, "hi": hi, "prime_count": int(ps.size),
           "first": int(ps[0]) if ps.size else None,
           "last": int(ps[-1]) if ps.size else None}
    if p.get("list"):
        out["primes"] = [int(v) for v in ps]
    return out, (["p"], [[int(v)] for v in ps])


def _cmd_gaps(p, cfg):
    N = parse_int(p["N"])
    out = {"N": N}
    table = None
    if p.get("h") is not None:
        h = parse_float(p["h"])
        q, hf, g = census.gap_inequality_terms(N, h)
        out.update(h=h, q_count=q, gaps_near_range=g, inequality_holds=q <= hf * g)
    if p.get("eta") is not None:
        eta = parse_float(p["eta"])
        out.update(eta=eta, gap_count=census.gap_count_threshold(N, eta, cfg.worker_count))
    if p.get("histogram"):
        hist = census.gap_histogram(N, workers=cfg.worker_count)
        out["histogram"] = {str(g): c for g, c in sorted(hist.counts.items())}
        out["prime_count"] = hist.total
        table = (["gap", "count"], [[g, c] for g, c in sorted(hist.counts.items())])
    if len(out) == 1:
        raise ValidationError("gaps needs at least one of --h, --eta, --histogram")
    return out, table


def _cmd_tuples(p, cfg):
    if p.get("tuple"):
        H = tuples.KTuple.parse(p["tuple"])
        nu = {str(q): tuples.nu_mod_p(H, int(q)) for q in engine.base_primes(max(H.k, 2))}
        return {"tuple": list(H.offsets), "k": H.k, "diameter": H.diameter,
                "admissible": tuples.is_admissible(H), "nu": nu}, None
    k = parse_int(p["k"])
    if p.get("min_diameter"):
        return {"k": k, "min_diameter": tuples.min_diameter(k)}, None
    h = parse_int(p["h"])
    found = [list(H.offsets) for H in tuples.enumerate_admissible(h, k)]
    return ({"h": h, "k": k, "count": len(found), "tuples": found},
            (["tuple"], [[",".join(map(str, t))] for t in found]))


def _cmd_singular(p, cfg):
    if p.get("gallagher_h") is not None:
        h, k = parse_int(p["gallagher_h"]), parse_int(p["k"])
        ordered = not p.get("unordered")
        p_cut = parse_int(p["pcut"]) if p.get("pcut") else None
        avg = singular.gallagher_average(h, k, ordered=ordered, p_cut=p_cut)
        return {"h": h, "k": k, "ordered": ordered, "average": avg}, None
    H = tuples.KTuple.parse(p["tuple"])
    sv = singular.singular_series(H, parse_int(p["pcut"]))
    return {"value": sv.value, "error_radius": sv.error_radius,
            "p_cut": sv.p_cut, "admissible": sv.admissible}, None


def _cmd_hl_count(p, cfg):
    x = parse_int(p["x"])
    if p.get("tuple"):
        H = tuples.KTuple.parse(p["tuple"])
        return {"tuple": list(H.offsets), "x": x, "count": hl.count_tuple(H, x)}, None
    h = parse_float(p["h"]) if p.get("h") is not None else math.log(x)
    hist = hl.interval_histogram(x, h)
    rows = [[j, hist.counts.get(j, 0), hist.poisson_ref[j]] for j in sorted(hist.poisson_ref)]
    return ({"x": x, "h": h, "lambda": hist.lam,
             "counts": {str(j): c for j, c, _ in rows},
             "poisson_ref": {str(j): r for j, _, r in rows}},
            (["j", "count", "poisson_ref"], rows))


def _cmd_gap_cdf(p, cfg):
    x = parse_int(p["x"])
    lams = parse_floats(p.get("lambdas") or "0.25,0.5,1,1.5,2")
    cdf = hl.gap_cdf(x, lams, use_log_x=bool(p.get("use_log_x")), workers=cfg.worker_count)
    rows = [[lam, frac, ref] for (lam, frac), ref in zip(cdf.points, cdf.reference)]
    return ({"x": x, "prime_count": cdf.prime_count,
             "points": [{"lambda": a, "fraction": b, "reference": c} for a, b, c in rows]},
            (["lambda", "fraction", "reference"], rows))


def _weight_params(p, N, k_default):
    k = parse_int(p["k"]) if p.get("k") is not None else k_default
    if p.get("R") is not None:
        R = parse_float(p["R"])
    else:
        R = N ** parse_float(p.get("R_exponent") or 0.25)
    kw = {"R": R, "k": k, "ell": parse_int(p.get("ell") or 0),
          "delta": parse_float(p.get("delta") or 0), "epsilon": parse_float(p.get("epsilon") or 0)}
    if p.get("vartheta") is not None:
        kw["vartheta"] = float(rational.to_fraction(p["vartheta"]))
    if p.get("unnormalized"):
        kw["normalized"] = False
    return gpy.WeightParams(**kw)


def _cmd_gpy(p, cfg):
    which = p.get("which", "s2")
    N = parse_int(p["N"])
    if which == "s2":
        params = _weight_params(p, N, 2)
        rep = gpy.s2(parse_float(p["h"]), N, params, workers=cfg.worker_count)
    else:
        H = tuples.KTuple.parse(p.get("tuple") or "0")
        params = _weight_params(p, N, H.k)
        restricted = bool(p.get("restricted"))
        if which == "s0":
            rep = gpy.s0(H, N, params, restricted, workers=cfg.worker_count)
        else:
            rep = gpy.s1(H, parse_int(p.get("h_star") or 0), N, params, restricted,
                         workers=cfg.worker_count)
    return {"sum": which, **rep.to_dict()}, None


def _cmd_recip(p, cfg):
    x = parse_int(p["x"])
    opt = lambda key, conv, default=None: conv(p[key]) if p.get(key) is not None else default
    rule = census.parse_rule(p.get("rule") or "fixed_gap", K=opt("K", parse_float),
                             lam=opt("lam", parse_float), k=opt("k", parse_int),
                             epsilon=opt("epsilon", parse_float, 0.0),
                             power=opt("power", parse_float, 1.0),
                             scale=opt("scale", parse_float, 1.0))
    if isinstance(rule, census.FixedGap) and rule.K is None:
        raise ValidationError("fixed_gap needs --K")
    if isinstance(rule, census.LambdaConst) and rule.lam is None:
        raise ValidationError("lambda_const needs --lam")
    if isinstance(rule, census.LogorialRule) and rule.k is None:
        raise ValidationError("logorial needs --k")
    res = census.reciprocal_sum(x, rule, cfg.worker_count)
    return {"x": x, "rule": {"name": p.get("rule") or "fixed_gap", **asdict(rule)},
            "value": res.value, "terms": res.terms, "skipped": res.skipped}, None


def _cmd_verify(p, cfg):
    cert = rational.verify_params(parse_int(p["k"]), parse_int(p["ell"]), p["theta"],
                                  p.get("delta") or 0, p.get("epsilon") or 0)
    return cert.to_dict(), None


def _cmd_optimize(p, cfg):
    k, ell = rational.optimize_k(p["theta"], parse_int(p["ell_max"]))
    cert = rational.verify_params(k, ell, p["theta"])
    return {"k": k, "ell": ell, "certificate": cert.to_dict()}, None


def _cmd_bv(p, cfg):
    x = parse_int(p["x"])
    H = tuples.KTuple.parse(p.get("tuple") or "0,2")
    terms = hl.bv_terms(x, parse_float(p["theta_exp"]), parse_float(p["delta"]), H,
                        cfg.budgets["bv_max_residues"])
    total = math.fsum(t for _, t in terms) / x
    return ({"x": x, "tuple": list(H.offsets), "moduli": len(terms), "discrepancy": total},
            (["q", "max_deviation"], [[q, t] for q, t in terms]))


HANDLERS = {
    "sieve": _cmd_sieve, "gaps": _cmd_gaps, "tuples": _cmd_tuples,
    "singular-series": _cmd_singular, "hl-count": _cmd_hl_count, "gap-cdf": _cmd_gap_cdf,
    "gpy": _cmd_gpy, "s2": _cmd_gpy, "recip-sum": _cmd_recip,
    "verify-params": _cmd_verify, "optimize-k": _cmd_optimize, "bv-probe": _cmd_bv,
}


def load_schema(name):
    """JSON schema shipped for a command's output ("manifest", "error" too)."""
    from importlib.resources import files
    return json.loads(files("gapslab").joinpath("schemas", f"{name}.json").read_text("utf-8"))


# -- rendering --------------------------------------------------------------

def render_json(obj):
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def render_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    # repr-style floats: '.' separator regardless of locale, round-trip exact
    w.writerows([[repr(v) if isinstance(v, float) else v for v in row] for row in rows])
    return buf.getvalue()


def _emit(text, path, stream):
    if path is None:
        stream.write(text)
        stream.flush()
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _manifest_target(cfg):
    if cfg.manifest_path:
        return cfg.manifest_path
    if cfg.output_path:
        return f"{cfg.output_path}.manifest.json"
    return None


def execute(cfg):
    """Run the command and return (rendered output text, warning messages)."""
    handler = HANDLERS[cfg.command]
    params = dict(cfg.params)
    if cfg.command == "s2":
        params["which"] = "s2"
    with budgets_applied(cfg.budgets), warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", gpy.ParameterWindowWarning)
        try:
            payload, table = handler(params, cfg)
        except KeyError as exc:
            flag = "--" + str(exc.args[0]).replace("_", "-")
            raise ValidationError(f"{cfg.command} needs {flag}") from None
    msgs = [str(w.message) for w in caught if issubclass(w.category, gpy.ParameterWindowWarning)]
    if cfg.output_format == "csv":
        if table is None:
            raise ValidationError(f"{cfg.command} has no tabular output; use json")
        return render_csv(*table), msgs
    if msgs:
        payload = {**payload, "warnings": msgs}
    return render_json(payload), msgs


def run(config, stdout=None, stderr=None):
    """Run one experiment; returns the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    stats.reset()
    t0 = time.perf_counter()
    msgs = []
    try:
        text, msgs = execute(config)
        _emit(text, config.output_path, stdout)
        code = 0
    except GapslabError as exc:
        code = exc.exit_code
        stderr.write(render_json({"error": exc.error_class, "message": str(exc)}))
    except OSError as exc:
        code = CacheError.exit_code
        stderr.write(render_json({"error": CacheError.error_class, "message": str(exc)}))
    manifest = RunManifest(config.to_dict(), __version__, BACKEND,
                           time.perf_counter() - t0, stats.snapshot(), code, msgs)
    target = _manifest_target(config)
    try:
        if target is not None:
            _emit(render_json(manifest.to_dict()), target, None)
        else:
            stderr.write(json.dumps({"manifest": manifest.to_dict()}, sort_keys=True) + "\n")
    except OSError as exc:
        stderr.write(render_json({"error": CacheError.error_class, "message": str(exc)}))
        code = code or CacheError.exit_code
    return code


# -- argparse ---------------------------------------------------------------

_GLOBAL = ("command", "which", "output", "manifest", "format", "cache_dir", "workers",
           "sieve_limit", "enum_cap", "bv_max_x", "bv_max_residues", "replay")


def _common(parser):
    g = parser.add_argument_group("run options")
    g.add_argument("--output", "-o", help="write the result here instead of stdout")
    g.add_argument("--manifest", help="manifest path (default: OUTPUT.manifest.json, "
                   "or one JSON line on stderr)")
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--cache-dir", help="segment cache directory (env GAPSLAB_CACHE)")
    g.add_argument("--workers", type=int, default=None)
    g.add_argument("--sieve-limit", type=parse_int, default=None)
    g.add_argument("--enum-cap", type=parse_int, default=None)
    g.add_argument("--bv-max-x", type=parse_int, default=None)
    g.add_argument("--bv-max-residues", type=parse_int, default=None)


def _gpy_flags(p, with_tuple=True):
    if with_tuple:
        p.add_argument("--tuple", help='offsets such as "0,2"')
        p.add_argument("--h-star", dest="h_star")
        p.add_argument("--restricted", action="store_true")
    p.add_argument("--h", help="window length for S_2")
    p.add_argument("--N", required=True)
    p.add_argument("--R-exponent", dest="R_exponent", help="R = N**e (default 0.25)")
    p.add_argument("--R", help="explicit R; overrides --R-exponent")
    p.add_argument("--k")
    p.add_argument("--ell")
    p.add_argument("--delta")
    p.add_argument("--epsilon")
    p.add_argument("--vartheta", help='rational such as "157/300"')
    p.add_argument("--unnormalized", action="store_true",
                   help="use the bare divisor sum without 1/(k+ell)!")


def build_parser():
    parser = argparse.ArgumentParser(prog="gapslab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gapslab {__version__}")
    parser.add_argument("--replay", help="re-run the configuration echoed in a manifest")
    sub = parser.add_subparsers(dest="command")

    def cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        _common(p)
        return p

    p = cmd("sieve", "list or count primes in [lo, hi)")
    p.add_argument("--lo", default="0")
    p.add_argument("--hi", required=True)
    p.add_argument("--list", action="store_true")
    p.add_argument("--cache", action="store_true", help="load/store the segment in the cache")

    p = cmd("gaps", "Q(N, h), gap threshold counts and gap histograms")
    p.add_argument("--N", required=True)
    p.add_argument("--h")
    p.add_argument("--eta")
    p.add_argument("--histogram", action="store_true")

    p = cmd("tuples", "admissibility and enumeration of k-tuples")
    p.add_argument("--tuple")
    p.add_argument("--h")
    p.add_argument("--k")
    p.add_argument("--min-diameter", dest="min_diameter", action="store_true")

    p = cmd("singular-series", "certified singular series or its Gallagher average")
    p.add_argument("--tuple")
    p.add_argument("--pcut")
    p.add_argument("--gallagher-h", dest="gallagher_h")
    p.add_argument("--k")
    p.add_argument("--unordered", action="store_true")

    p = cmd("hl-count", "prime tuple counts or the short-interval histogram")
    p.add_argument("--x", required=True)
    p.add_argument("--tuple")
    p.add_argument("--h", help="interval length (default log x)")

    p = cmd("gap-cdf", "fraction of normalized gaps below each lambda")
    p.add_argument("--x", required=True)
    p.add_argument("--lambdas")
    p.add_argument("--use-log-x", dest="use_log_x", action="store_true")

    p = cmd("gpy", "weighted sums S_0, S_1, S_2")
    p.add_argument("which", choices=("s0", "s1", "s2"))
    _gpy_flags(p)

    p = cmd("s2", "normalised S_2 (same as gpy s2)")
    _gpy_flags(p, with_tuple=False)

    p = cmd("recip-sum", "sum of 1/p over primes followed by a small gap")
    p.add_argument("--x", required=True)
    p.add_argument("--rule", choices=("fixed_gap", "lambda_const", "logorial"), default="fixed_gap")
    p.add_argument("--K")
    p.add_argument("--lam")
    p.add_argument("--k")
    p.add_argument("--epsilon")
    p.add_argument("--power")
    p.add_argument("--scale")

    p = cmd("verify-params", "exact check of the parameter inequality")
    p.add_argument("--k", required=True)
    p.add_argument("--ell", required=True)
    p.add_argument("--theta", required=True, help='rational such as "157/300"')
    p.add_argument("--delta")
    p.add_argument("--epsilon")

    p = cmd("optimize-k", "least k passing the parameter inequality")
    p.add_argument("--theta", required=True)
    p.add_argument("--ell-max", dest="ell_max", default="50")

    p = cmd("bv-probe", "smooth-moduli discrepancy of psi in progressions")
    p.add_argument("--x", required=True)
    p.add_argument("--theta-exp", dest="theta_exp", default="0.5")
    p.add_argument("--delta", default="0.1")
    p.add_argument("--tuple")
    return parser


def config_from_args(ns):
    params = {k: v for k, v in vars(ns).items() if k not in _GLOBAL and v not in (None, False)}
    if getattr(ns, "which", None):
        params["which"] = ns.which
    budgets = {key: getattr(ns, key) for key in BUDGET_DEFAULTS if getattr(ns, key, None)}
    return ExperimentConfig(
        command=ns.command, params=params, output_path=ns.output, manifest_path=ns.manifest,
        output_format=ns.format, cache_dir=ns.cache_dir,
        worker_count=ns.workers or default_workers(), budgets=budgets)


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        if ns.replay:
            data = json.loads(Path(ns.replay).read_text(encoding="utf-8"))
            cfg = ExperimentConfig.from_dict(data.get("config", data))
        elif ns.command is None:
            parser.print_help()
            return 2
        else:
            cfg = config_from_args(ns)
    except GapslabError as exc:
        sys.stderr.write(render_json({"error": exc.error_class, "message": str(exc)}))
        return exc.exit_code
    except (OSError, ValueError) as exc:
        err = CacheError if isinstance(exc, OSError) else ValidationError
        sys.stderr.write(render_json({"error": err.error_class, "message": str(exc)}))
        return err.exit_code
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

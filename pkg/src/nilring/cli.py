"""Command-line entry point: ``nilring <subcommand> [options]``.

Every option can also come from a flat ``key = value`` config file given with
``--config``; command-line flags win. Reports are JSON with sorted keys (CSV
for ``scan --output csv``) and embed the effective config together with a
sha256 of it, so identical configs give byte-identical reports. The thread
count and output destination are not part of the hashed config.

Exit codes: 0 success, 2 bad configuration, 3 work budget exceeded,
4 numerical precondition failed.
"""

import argparse
import dataclasses
import hashlib
import json
import math
import sys
from fractions import Fraction

from . import averages as AV
from . import group as G
from . import jacobian as J
from . import residue as R
from . import waring as WR
from . import weyl as W
from ._parallel import default_threads
from .errors import BudgetExceeded, PreconditionError

EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_PRECONDITION = 4

COMMANDS = ("group", "count", "predict", "arcs", "gauss", "weyl", "rank", "maxfn", "singular", "scan")


class ConfigError(Exception):
    pass


@dataclasses.dataclass
class RunConfig:
    d: int = 2
    r: int = 2
    N: int = 4
    q: int = None
    Q: int = 2
    delta: float = None
    seed: int = 0
    samples: int = 100_000
    work_budget: int = 10**8
    strategy: str = "meet_in_middle"
    variant: str = "D"
    output: str = "json"
    out: str = None
    threads: int = None
    eps: float = 0.05
    qmax: int = 6
    g: str = None
    h: str = None
    frac: str = None
    theta: str = None
    P: int = 8
    box: int = 2
    scales: str = "0:6"
    f: str = "delta"
    R: int = 16
    weight: str = "indicator"
    kind: str = "sum"
    witness: str = None
    m: str = None
    lam: str = None
    window: float = 0.5
    grid: str = "auto"

    # keys left out of the report hash: they must not change any result
    RUNTIME_KEYS = ("threads", "out", "output")

    @classmethod
    def field_types(cls):
        hints = {"int": int, "float": float, "str": str}
        return {f.name: hints[f.type] if isinstance(f.type, str) else f.type for f in dataclasses.fields(cls)}

    @classmethod
    def parse_value(cls, key, text):
        types = cls.field_types()
        if key not in types:
            raise ConfigError(f"unknown config key {key!r}")
        text = text.strip()
        if text in ("", "none", "None"):
            return None
        try:
            if types[key] is int:
                return int(float(text)) if "e" in text.lower() else int(text)
            if types[key] is float:
                return float(Fraction(text)) if "/" in text else float(text)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {text!r}") from exc
        return text

    @classmethod
    def from_text(cls, text):
        cfg = cls()
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"config line {lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            setattr(cfg, key, cls.parse_value(key, val))
        return cfg

    def to_text(self):
        out = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            out.append(f"{f.name} = {'none' if v is None else (repr(v) if isinstance(v, float) else v)}")
        return "\n".join(out) + "\n"

    def report_dict(self):
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)
                if f.name not in self.RUNTIME_KEYS}

    def validate(self):
        if self.d is None or self.d < 1:
            raise ConfigError("d must be a positive integer")
        if self.r is None or self.r < 1:
            raise ConfigError("r must be a positive integer")
        if self.work_budget is None or self.work_budget <= 0:
            raise ConfigError("work_budget must be positive")
        if self.delta is not None:
            bound = WR.default_delta(self.d)
            if not 0 < self.delta <= bound * (1 + 1e-12):
                raise ConfigError(
                    f"delta = {self.delta} outside (0, (10d)^-4] = (0, {bound!r}] for d = {self.d}")
        if self.variant not in G.VARIANTS:
            raise ConfigError(f"variant must be one of {G.VARIANTS}")
        if self.strategy not in ("direct", "meet_in_middle", "mim"):
            raise ConfigError("strategy must be direct or meet_in_middle")
        if self.output not in ("json", "csv"):
            raise ConfigError("output must be json or csv")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be positive")


def _element(cfg, key="g"):
    text = getattr(cfg, key)
    if text is None:
        return G.identity(cfg.d)
    try:
        return G.parse_element(text, cfg.d)
    except ValueError as exc:
        raise ConfigError(f"bad group element {key}={text!r}: {exc}") from exc


def _ints(text, name):
    try:
        return tuple(int(v) for v in text.replace(";", ",").split(",") if v.strip())
    except (AttributeError, ValueError) as exc:
        raise ConfigError(f"bad integer list for {name}: {text!r}") from exc


def _reals(text, name):
    try:
        return tuple(Fraction(v.strip()) if "/" in v else float(v) for v in text.split(","))
    except (AttributeError, ValueError) as exc:
        raise ConfigError(f"bad real vector for {name}: {text!r}") from exc


def _fraction(cfg):
    dim = G.index_set(cfg.d).size
    if cfg.frac is None:
        raise ConfigError("gauss needs --frac a1,...,ak/q")
    try:
        fv = R.FractionVector.parse(cfg.frac)
    except ValueError as exc:
        raise ConfigError(f"bad fraction {cfg.frac!r}: {exc}") from exc
    if len(fv.numer) == 1 and dim > 1:
        if fv.numer[0] % fv.q != 0:
            raise ConfigError(f"a single numerator is only accepted for the zero fraction; give {dim} numerators")
        fv = R.FractionVector.reduced((0,) * dim, 1)
    if len(fv.numer) != dim:
        raise ConfigError(f"fraction needs {dim} numerators for d = {cfg.d}")
    return fv


def _scales(text):
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad scales {text!r}") from exc


def _clean(obj):
    """Make a report JSON-safe: big ints and non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj if abs(obj) < 2**53 else str(obj)
    if isinstance(obj, Fraction):
        return {"num": str(obj.numerator), "den": str(obj.denominator)}
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if hasattr(obj, "item"):
        return _clean(obj.item())
    return str(obj)


# -- subcommands ---------------------------------------------------------------

def cmd_group(cfg):
    g = _element(cfg, "g")
    out = {"g": list(g.coords), "inverse": list(g.inverse().coords)}
    if cfg.h is not None:
        h = _element(cfg, "h")
        out["h"] = list(h.coords)
        out["product"] = list((g * h).coords)
    if cfg.lam is not None:
        lam = Fraction(cfg.lam)
        lam = int(lam) if lam.denominator == 1 else float(lam)
        out["dilation"] = list(G.dilate(lam, g).coords)
    if cfg.m is not None:
        pair = cfg.m.split("|")
        if len(pair) != 2:
            raise ConfigError("closed-form input is --m n1,..,nr|m1,..,mr")
        n, m = _ints(pair[0], "n"), _ints(pair[1], "m")
        out["D"] = list(G.closed_form_product(n, m, cfg.d, cfg.variant).coords)
    return out


def cmd_count(cfg):
    g = _element(cfg)
    c = WR.count_representations(g, cfg.r, cfg.N, cfg.strategy, cfg.variant, cfg.work_budget, cfg.threads)
    q_hom = G.index_set(cfg.d).homogeneous_dimension
    return {"g": list(g.coords), "count": c, "normalization": float(cfg.N) ** (2 * cfg.r - q_hom),
            "normalized_count": c / float(cfg.N) ** (2 * cfg.r - q_hom)}


def cmd_predict(cfg):
    rep = WR.predict_count(_element(cfg), cfg.r, cfg.N, cfg.eps, cfg.samples, cfg.seed, cfg.qmax,
                           True, cfg.variant, cfg.work_budget, cfg.threads)
    return rep.to_dict()


def cmd_arcs(cfg):
    grid = cfg.grid
    if grid not in ("auto", None):
        grid = _ints(grid, "grid")
    res = WR.arc_split(_element(cfg), cfg.r, cfg.N, cfg.delta, grid, cfg.variant,
                       budget=cfg.work_budget, threads=cfg.threads)
    return res.to_dict()


def cmd_gauss(cfg):
    fv = _fraction(cfg)
    val = R.gauss_sum(fv, cfg.r, cfg.variant, budget=cfg.work_budget)
    out = {"frac": fv.to_text(), "value": [val.real, val.imag], "abs": abs(val)}
    if cfg.h is not None:
        a = R.coefficient_A(fv.q, _element(cfg, "h"), cfg.r, cfg.variant, "count", cfg.work_budget)
        out["A"] = a
    return out


def cmd_weyl(cfg):
    if cfg.theta is None:
        raise ConfigError("weyl needs --theta")
    theta = _reals(cfg.theta, "theta")
    kind = cfg.kind
    if kind == "classical":
        val = W.classical_weyl_sum(cfg.P, theta, W.WeightFunction(cfg.weight, cfg.P))
        return {"kind": kind, "value": [val.real, val.imag], "stderr": 0.0, "samples": None, "seed": cfg.seed}
    if len(theta) != G.index_set(cfg.d).size:
        raise ConfigError(f"theta needs {G.index_set(cfg.d).size} entries for d = {cfg.d}")
    if kind == "sum":
        res = W.weyl_sum(cfg.P, cfg.r, theta, W.WeightFunction(cfg.weight, cfg.P), cfg.variant,
                         budget=cfg.work_budget, threads=cfg.threads)
        return {"kind": kind, "value": [res.value.real, res.value.imag], "normalized": res.normalized,
                "stderr": 0.0, "samples": None, "seed": cfg.seed}
    if kind in ("integral", "phi"):
        fn = W.oscillatory_integral if kind == "integral" else W.singular_integral_phi
        res = fn([float(t) for t in theta], cfg.r, cfg.variant, cfg.samples, cfg.seed, cfg.threads)
        return dict(res.to_dict(), kind=kind)
    if kind == "density":
        res = W.solution_volume_density([float(t) for t in theta], cfg.r, cfg.eps, cfg.samples,
                                        cfg.seed, cfg.variant, cfg.threads)
        return dict(res.to_dict(), kind=kind)
    raise ConfigError(f"unknown weyl kind {kind!r}")


def cmd_rank(cfg):
    out = {}
    if cfg.witness is not None:
        pair = cfg.witness.split("|")
        if len(pair) != 2:
            raise ConfigError("witness is n1,..,nr|m1,..,mr")
        n, m = _ints(pair[0], "n"), _ints(pair[1], "m")
        witness = (n, m)
        res = J.SearchResult(cfg.d, len(n), cfg.box, True, n, m,
                             J.rank(J.jacobian_at(n, m, cfg.variant, cfg.d)), 0, "given")
    else:
        res = J.find_full_rank_point(cfg.d, cfg.r, cfg.box, cfg.variant, cfg.work_budget)
        witness = (res.n, res.m) if res.found else None
    out["search"] = res.to_dict()
    if witness is not None:
        out["jacobian"] = J.jacobian_at(*witness, cfg.variant, cfg.d).tolist()
        if res.rank == G.index_set(cfg.d).size:
            z0, w0 = J.nonsingular_zero(cfg.d, len(witness[0]), witness=witness, variant=cfg.variant)
            out["z0"], out["w0"] = list(z0), list(w0)
    return out


def cmd_maxfn(cfg):
    if cfg.f == "delta":
        f = AV.delta(cfg.d)
    else:
        try:
            with open(cfg.f) as fh:
                f = AV.BoxFunction.from_jsonl(cfg.d, fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read {cfg.f}: {exc}") from exc
    res = AV.maximal_function(f, _scales(cfg.scales), budget=cfg.work_budget)
    return res.to_dict()


def cmd_singular(cfg):
    return WR.singular_series(_element(cfg), cfg.r, cfg.qmax, cfg.variant, cfg.work_budget).to_dict()


def cmd_scan(cfg):
    rows = WR.residue_class_scan(cfg.Q, cfg.r, cfg.N, cfg.d, cfg.window, cfg.variant,
                                 cfg.work_budget, cfg.threads)
    return {"rows": rows}


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}

HELP = {
    "group": "multiply, invert and dilate elements g, h",
    "count": "exact representation count S_{r,N}(g)",
    "predict": "count vs singular series times solution density",
    "arcs": "major/minor arc split of the count",
    "gauss": "nilpotent Gauss sum G(a/q)",
    "weyl": "Weyl sums, oscillatory integrals, densities",
    "rank": "Jacobian rank and nonsingular zero",
    "maxfn": "maximal function of a box function",
    "singular": "singular series by Euler product and fraction sum",
    "scan": "per-class scan of normalized counts mod Q",
}


# -- plumbing -----------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    for f in dataclasses.fields(RunConfig):
        common.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, default=None, metavar=f.name.upper())
    parser = argparse.ArgumentParser(prog="nilring", description="Arithmetic and harmonic analysis on G0(d).")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=HELP[name])
    return parser


def make_config(args):
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = RunConfig.from_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    else:
        cfg = RunConfig()
    for f in dataclasses.fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            setattr(cfg, f.name, RunConfig.parse_value(f.name, v))
    if cfg.threads is None:
        cfg.threads = default_threads()
    cfg.validate()
    return cfg


def render(command, cfg, result):
    conf = cfg.report_dict()
    digest = hashlib.sha256(json.dumps(_clean(conf), sort_keys=True).encode()).hexdigest()
    if cfg.output == "csv":
        if command != "scan":
            raise ConfigError("csv output is only available for scan")
        return WR.scan_to_csv(result["rows"])
    report = {"command": command, "config": conf, "input_hash": digest, "result": result}
    return json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"


def run(command, cfg):
    """Execute one subcommand; returns (exit code, report text or error message)."""
    try:
        result = HANDLERS[command](cfg)
        return 0, render(command, cfg, result)
    except ConfigError as exc:
        return EXIT_CONFIG, str(exc)
    except BudgetExceeded as exc:
        return EXIT_BUDGET, str(exc)
    except PreconditionError as exc:
        return EXIT_PRECONDITION, str(exc)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
    except ConfigError as exc:
        print(f"nilring: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, text = run(args.command, cfg)
    if code:
        print(f"nilring: {text}", file=sys.stderr)
        return code
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

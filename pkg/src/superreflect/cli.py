"""Command-line driver: run verification suites and write JSON reports.

``superreflect check`` runs one configuration given by flags;
``superreflect sweep --config FILE`` runs a JSON list of configurations.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path

from . import __version__, algebra, verify
from .algebra import BoundarySpec, DiagramKind, Family
from .gmatrix import GradedMatrix
from .scalar import GaussRational, Laurent

# canonical execution order: unitarity before transfer, charges before
# centrality and exchange
CHECK_ORDER = (
    "gybe",
    "baxterization",
    "hecke_a",
    "hecke_b",
    "reflection",
    "k_consistency",
    "unitarity",
    "transfer",
    "charges",
    "centrality",
    "exchange",
    "hamiltonian",
)
BOUNDARY_CHECKS = {"hecke_b", "k_consistency"}
EXACT_ONLY = {"k_consistency", "charges"}
MODES = ("exact", "numeric", "both")


class ConfigInvalid(ValueError):
    """A configuration broke a validation rule; ``rule`` names it."""

    def __init__(self, rule: str, message: str):
        super().__init__(f"{rule}: {message}")
        self.rule = rule


@dataclass
class RunConfig:
    m: int
    n: int
    diagram: str = "distinguished"
    family: str | None = None
    L: int | None = None
    sites: int = 2
    checks: list[str] = field(default_factory=lambda: ["all"])
    mode: str = "exact"
    seed: int = 0
    tolerance: float = verify.DEFAULT_TOLERANCE
    numeric_points: int = 20
    output_path: str | None = None
    # pins c_a to exact numbers: {"1": "3/2"} or {"1": ["1", "-2"]} (re, im)
    c_params: dict = field(default_factory=dict)
    # negative test: the distinguished mixed element must fail the boundary relations
    expect_failure: bool = False
    # wall-clock timings make reports differ between runs, so they are opt-in
    timings: bool = False

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigInvalid("NotAnObject", "each configuration must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigInvalid("UnknownField", f"unknown fields {unknown}")
        for req in ("m", "n"):
            if req not in data:
                raise ConfigInvalid("MissingField", f"{req!r} is required")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def as_dict(self) -> dict:
        return asdict(self)

    # --- validation -----------------------------------------------------------

    def validate(self) -> None:
        """Reject exactly what the algebra constructors reject, plus bad plumbing."""
        for name in ("m", "n", "sites", "seed", "numeric_points"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigInvalid("NotAnInteger", f"{name} must be an integer, got {v!r}")
        if self.sites < 1:
            raise ConfigInvalid("TooFewSites", "sites must be at least 1")
        if self.numeric_points < 1:
            raise ConfigInvalid("TooFewPoints", "numeric_points must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigInvalid("SeedOutOfRange", "seed must fit in 64 unsigned bits")
        if isinstance(self.tolerance, bool) or not isinstance(self.tolerance, (int, float)) or self.tolerance <= 0:
            raise ConfigInvalid("BadTolerance", "tolerance must be a positive number")
        if self.mode not in MODES:
            raise ConfigInvalid("UnknownMode", f"mode must be one of {MODES}")
        if not isinstance(self.checks, list) or not self.checks:
            raise ConfigInvalid("NoChecks", "checks must be a non-empty list")
        bad = [c for c in self.checks if c != "all" and c not in CHECK_ORDER]
        if bad:
            raise ConfigInvalid("UnknownCheck", f"unknown checks {bad}; known: {list(CHECK_ORDER)}")
        try:
            DiagramKind(self.diagram)
        except ValueError:
            raise ConfigInvalid("UnknownDiagram", f"diagram must be distinguished or symmetric, got {self.diagram!r}")
        if self.family is not None:
            try:
                Family(self.family)
            except ValueError:
                raise ConfigInvalid("UnknownFamily", f"unknown family {self.family!r}")
        self.grading()
        if self.expect_failure:
            if self.diagram != DiagramKind.DISTINGUISHED.value or self.family != Family.MIXED.value:
                raise ConfigInvalid("ExpectFailureNeedsMixed", "expect_failure applies to the distinguished mixed element")
            if self.m < 1 or self.n < 1:
                raise ConfigInvalid("SpecOutOfRange", "a mixed element needs both parities present")
            if self.c_params:
                raise ConfigInvalid("SpecOutOfRange", "c_params are not used by the mixed element")
            return
        self.boundary()

    def grading(self):
        try:
            return algebra.make_grading(self.diagram, self.m, self.n)
        except ValueError as exc:
            raise ConfigInvalid(type(exc).__name__, str(exc)) from None

    def pinned_c(self) -> dict[int, Laurent]:
        if not isinstance(self.c_params, dict):
            raise ConfigInvalid("BadParameter", "c_params must be an object")
        out = {}
        for key, value in self.c_params.items():
            try:
                a = int(key)
                if isinstance(value, list) and len(value) == 2:
                    g = GaussRational(_exact(value[0]), _exact(value[1]))
                else:
                    g = GaussRational(_exact(value))
            except (TypeError, ValueError) as exc:
                raise ConfigInvalid("BadParameter", f"c_params[{key!r}]: {exc}") from None
            if not g.re and not g.im:
                raise ConfigInvalid("BadParameter", f"c_params[{key!r}] must be nonzero")
            out[a] = Laurent.const(g)
        return out

    def boundary(self) -> BoundarySpec | None:
        """The validated boundary spec, or None when no boundary is requested."""
        if self.diagram == DiagramKind.DISTINGUISHED.value and self.family == Family.MIXED.value:
            raise ConfigInvalid("MixedOnDistinguished", "mixed solutions exist only for the symmetric diagram")
        if self.L is None:
            if self.family is not None or self.c_params:
                raise ConfigInvalid("MissingField", "a boundary family needs L")
            return None
        if isinstance(self.L, bool) or not isinstance(self.L, int):
            raise ConfigInvalid("NotAnInteger", f"L must be an integer, got {self.L!r}")
        family = self.family
        if family is None:
            if self.diagram != DiagramKind.SYMMETRIC.value:
                raise ConfigInvalid("MissingField", "the distinguished diagram needs a family")
            family = Family.MIXED.value
        spec = BoundarySpec(self.diagram, family, self.L, self.pinned_c())
        try:
            algebra.active_pairs(spec, self.grading())
        except ValueError as exc:
            raise ConfigInvalid(type(exc).__name__, str(exc)) from None
        return spec

    def selected_checks(self) -> list[str]:
        chosen = set(CHECK_ORDER) if "all" in self.checks else set(self.checks)
        return [c for c in CHECK_ORDER if c in chosen]

    def modes(self) -> list[str]:
        return [verify.EXACT, verify.NUMERIC] if self.mode == "both" else [self.mode]


def _exact(value) -> Fraction:
    if isinstance(value, float):
        raise TypeError("use a string such as '3/2' for non-integer values")
    return Fraction(value)


# --- running ---------------------------------------------------------------------


def _error_result(name: str, mode: str, exc: Exception) -> verify.CheckResult:
    return verify.CheckResult(name, mode, False, None, None, 0, {"error": f"{type(exc).__name__}: {exc}"})


class _Suite:
    """Runs the selected checks of one configuration."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.g = cfg.grading()
        self.spec = None if cfg.expect_failure else cfg.boundary()
        self.kw = {"points": cfg.numeric_points, "seed": cfg.seed, "tolerance": cfg.tolerance}

    def context(self) -> verify.TransferContext:
        return verify.TransferContext(self.g, self.cfg.sites, self.spec)

    def k_matrix(self) -> GradedMatrix:
        if self.spec is None:
            return GradedMatrix.identity(self.g)
        return algebra.k_matrix_explicit(self.spec, self.g)

    def run_one(self, name: str, mode: str) -> list[verify.CheckResult]:
        g, kw = self.g, self.kw
        if mode == verify.EXACT:
            kw = {}
        if name == "gybe":
            return [verify.check_gybe(g, mode, **kw)]
        if name == "baxterization":
            return [verify.check_baxterization(g, mode, **kw)]
        if name == "hecke_a":
            return [verify.check_hecke_a(g, max(3, self.cfg.sites), mode, **kw)]
        if name == "hecke_b":
            if self.cfg.expect_failure:
                e = algebra.mixed_distinguished_element(self.cfg.m, self.cfg.n)
                return [_expected_failure(verify.check_hecke_b(None, g, mode, e=e, **kw))]
            return [verify.check_hecke_b(self.spec, g, mode, **kw)]
        if name == "reflection":
            return [verify.check_reflection(self.k_matrix(), g, mode, **kw)]
        if name == "k_consistency":
            return [verify.check_k_consistency(self.spec, g)]
        if name == "unitarity":
            return [verify.check_unitarity(g, mode, **kw)]
        if name == "transfer":
            return [verify.check_transfer_commutativity(self.context(), mode, **kw)]
        if name == "charges":
            return [_charges_result(self.context(), s) for s in ("+", "-")]
        if name == "centrality":
            return [verify.check_centrality(self.context(), mode, **kw)]
        if name == "exchange":
            return [verify.check_exchange_relation(self.context(), s, mode, **kw) for s in ("+", "-")]
        if name == "hamiltonian":
            return [verify.check_hamiltonian(self.context(), mode, **kw)]
        raise KeyError(name)

    def results(self) -> list[verify.CheckResult]:
        out = []
        for name in self.cfg.selected_checks():
            if name in BOUNDARY_CHECKS and self.spec is None and not (name == "hecke_b" and self.cfg.expect_failure):
                continue
            modes = [verify.EXACT] if name in EXACT_ONLY else self.cfg.modes()
            for mode in modes:
                try:
                    out.extend(self.run_one(name, mode))
                except Exception as exc:  # surfaces with its check name
                    out.append(_error_result(name, mode, exc))
        return out


def _expected_failure(res: verify.CheckResult) -> verify.CheckResult:
    detail = dict(res.detail)
    detail["expected_failure"] = True
    detail["raw_passed"] = res.passed
    return verify.CheckResult(res.name, res.mode, not res.passed, res.residual_terms, res.max_abs, res.elapsed_ms, detail)


def _charges_result(ctx: verify.TransferContext, sign: str) -> verify.CheckResult:
    """Extract the leading charges; the extremal x-degrees must have even spread."""
    start = time.perf_counter()
    TT = verify.double_row_monodromy(ctx)
    lo, hi = TT.degree_range("x")
    charges, deg = verify.extract_boundary_charges(ctx, sign, TT)
    ok = (hi - lo) % 2 == 0 and not charges.is_zero()
    detail = {"degree": deg, "degree_range": [lo, hi], "nnz": charges.nnz()}
    return verify.CheckResult(f"charges{sign}[N={ctx.sites}]", verify.EXACT, ok, 0 if ok else None, None, verify._ms(start), detail)


def run(cfg: RunConfig) -> dict:
    """Run one configuration and return its report (also written to ``output_path``)."""
    cfg.validate()
    start = time.perf_counter()
    suite = _Suite(cfg)
    results = suite.results()
    rows = []
    for r in results:
        row = r.as_dict()
        if not cfg.timings:
            row["elapsed_ms"] = None
        rows.append(row)
    report = {
        "config": cfg.as_dict(),
        "version": __version__,
        "results": rows,
        "overall": all(r.passed for r in results),
        "total_ms": int(round((time.perf_counter() - start) * 1000)) if cfg.timings else None,
    }
    notes = _notes(cfg)
    if notes:
        report["notes"] = notes
    if cfg.output_path:
        write_json_atomic(cfg.output_path, report)
    return report


def _notes(cfg: RunConfig) -> list[str]:
    notes = []
    if cfg.family == Family.FERMIONIC.value and cfg.n % 2:
        notes.append("odd n with the fermionic family: the middle fermionic index stays inert")
    return notes


def _run_entry(entry) -> dict:
    """Sweep worker: never raises; errors come back as an error entry."""
    index, data = entry
    try:
        cfg = RunConfig.from_dict(data)
        return {"index": index, "report": run(cfg)}
    except ConfigInvalid as exc:
        return {"index": index, "error": str(exc), "rule": exc.rule, "config": data}
    except Exception as exc:
        return {"index": index, "error": f"{type(exc).__name__}: {exc}", "rule": None, "config": data}


def sweep(configs: list, jobs: int = 1) -> dict:
    """Run every configuration, isolating failures; entries keep input order."""
    entries = list(enumerate(configs))
    if jobs > 1 and len(entries) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_run_entry, entries))
    else:
        done = [_run_entry(e) for e in entries]
    reports, errors, summary = [], [], []
    for item in done:
        if "report" in item:
            rep = item["report"]
            reports.append(rep)
            summary.append({"index": item["index"], "config": rep["config"], "passed": rep["overall"], **_worst(rep)})
        else:
            errors.append(item)
            summary.append({"index": item["index"], "config": item["config"], "passed": False, "error": item["error"]})
    return {
        "version": __version__,
        "reports": reports,
        "errors": errors,
        "summary": summary,
        "overall": all(s["passed"] for s in summary),
    }


def _worst(report: dict) -> dict:
    terms = [r["residual_terms"] for r in report["results"] if r["residual_terms"] is not None]
    mags = [r["max_abs"] for r in report["results"] if r["max_abs"] is not None]
    return {"residual_terms": max(terms) if terms else None, "max_abs": max(mags) if mags else None}


def write_json_atomic(path: str | os.PathLike, payload) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="superreflect", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    chk = sub.add_parser("check", help="run one configuration")
    chk.add_argument("--m", type=int, required=True)
    chk.add_argument("--n", type=int, required=True)
    chk.add_argument("--diagram", default="distinguished", choices=[k.value for k in DiagramKind])
    chk.add_argument("--family", default=None, choices=[f.value for f in Family])
    chk.add_argument("--L", type=int, default=None, help="boundary cutoff; omit for K = I")
    chk.add_argument("--sites", type=int, default=2, help="quantum sites of the transfer matrix")
    chk.add_argument("--checks", default="all", help=f"comma-separated subset of {','.join(CHECK_ORDER)} or 'all'")
    chk.add_argument("--mode", default="exact", choices=MODES)
    chk.add_argument("--seed", type=int, default=0)
    chk.add_argument("--tolerance", type=float, default=verify.DEFAULT_TOLERANCE)
    chk.add_argument("--points", type=int, default=20, help="numeric sample points")
    chk.add_argument("--out", default=None, help="report path (stdout when omitted)")
    chk.add_argument("--c", action="append", default=[], metavar="A=VALUE",
                     help="pin c_A to an exact number, e.g. 1=3/2 or 1=1+2j")
    chk.add_argument("--expect-failure", action="store_true",
                     help="negative test: the distinguished mixed element must fail")
    chk.add_argument("--timings", action="store_true", help="record wall-clock timings")

    sw = sub.add_parser("sweep", help="run a JSON list of configurations")
    sw.add_argument("--config", required=True, help="JSON file holding a list of configurations")
    sw.add_argument("--out", default=None, help="summary path (stdout when omitted)")
    sw.add_argument("--jobs", type=int, default=1)
    return parser


def _parse_pin(text: str):
    key, _, value = text.partition("=")
    if not value:
        raise ConfigInvalid("BadParameter", f"expected A=VALUE, got {text!r}")
    value = value.strip()
    if value.endswith("j"):
        z = value[:-1]
        cut = max(z.rfind("+"), z.rfind("-"))
        if cut <= 0:
            return key, ["0", z or "1"]
        im = z[cut:]
        return key, [z[:cut], im if im not in ("+", "-") else im + "1"]
    return key, value


def _emit(payload, out: str | None) -> None:
    if out:
        write_json_atomic(out, payload)
    else:
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "check":
        try:
            pins = dict(_parse_pin(p) for p in args.c)
            cfg = RunConfig(
                m=args.m,
                n=args.n,
                diagram=args.diagram,
                family=args.family,
                L=args.L,
                sites=args.sites,
                checks=[c.strip() for c in args.checks.split(",") if c.strip()],
                mode=args.mode,
                seed=args.seed,
                tolerance=args.tolerance,
                numeric_points=args.points,
                output_path=args.out,
                c_params=pins,
                expect_failure=args.expect_failure,
                timings=args.timings,
            )
            report = run(cfg)
        except ConfigInvalid as exc:
            print(f"ConfigInvalid: {exc}", file=sys.stderr)
            return 2
        if not args.out:
            _emit(report, None)
        for r in report["results"]:
            print(f"{'PASS' if r['passed'] else 'FAIL'}  {r['name']:<24} {r['mode']}", file=sys.stderr)
        return 0 if report["overall"] else 1

    try:
        configs = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    if not isinstance(configs, list):
        print("the sweep file must hold a JSON list", file=sys.stderr)
        return 2
    result = sweep(configs, jobs=args.jobs)
    _emit(result, args.out)
    for s in result["summary"]:
        status = "PASS" if s["passed"] else ("ERROR" if "error" in s else "FAIL")
        print(f"{status:<5} #{s['index']}", file=sys.stderr)
    return 0 if result["overall"] else 1

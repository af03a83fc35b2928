"""Command-line front end: ``python3 -m kleindouble <command> --genus g``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .jacobian import (
    PeriodError,
    check_component_isomorphism,
    jacobian_report,
    klein_jacobian,
    real_part_components,
)
from .matrix import Matrix, MatrixError, read_matrix_text
from .surface import (
    VARIANTS,
    SurfaceError,
    SurfaceSpec,
    adapt_basis,
    complex_double,
    homology_invariants,
    standard_presentation,
)
from .torelli import (
    EnumerationLimitError,
    build_lift_constraints,
    classify_lifts,
    enumerate_lifts_oracle,
)
from .words import WordError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    genus: int
    variant: str | None = None
    orientation: int = 1
    bound: int | None = None
    format: str = "json"
    trace: bool = False
    A_path: str | None = None
    Y_path: str | None = None

    def __post_init__(self):
        if self.command not in ("double", "torelli", "jacobian", "verify"):
            raise UsageError(f"unknown command {self.command!r}")
        if self.genus < 3:
            raise UsageError("genus must be at least 3")
        if self.bound is not None and self.bound < 1:
            raise UsageError("bound must be at least 1")
        if self.orientation not in (1, -1):
            raise UsageError("orientation must be +1 or -1")
        if self.variant is not None and self.genus % 2:
            raise UsageError("--variant applies to even genus only")

    def spec(self) -> SurfaceSpec:
        try:
            return SurfaceSpec(self.genus, self.variant)
        except SurfaceError as exc:
            raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# reports


def double_report(spec: SurfaceSpec) -> dict:
    cd = complex_double(spec)
    labels = [str(s) for s in cd.basisBc]
    return {
        "genus": spec.genus,
        "variant": spec.variant,
        "base": cd.base.to_json(),
        "double": cd.double.to_json(),
        "eliminated": {"gen": str(cd.eliminated), "value": cd.eliminated_value.to_json()},
        "sigma_words": {str(k): cd.sigma_words[k].to_json() for k in cd.basisBc},
        "basisB": list(cd.torsion_labels) + list(cd.basisB),
        "basisBc": labels,
        "pi_matrix": cd.pi_matrix.to_json(),
        "sigma_matrix": cd.sigma_matrix.to_json(),
        "intersection": cd.intersection.to_json(),
    }


def torelli_report(spec: SurfaceSpec, orientation: int, bound: int | None, trace: bool) -> dict:
    system = build_lift_constraints(spec, orientation)
    res = classify_lifts(system)
    out = res.to_json(with_trace=trace)
    out.update({"genus": spec.genus, "variant": spec.variant, "orientation": orientation})
    if bound is not None:
        oracle = enumerate_lifts_oracle(system, bound)
        out["oracle"] = {
            "bound": bound,
            "solutions": [F.to_json() for F in oracle.solutions],
            "agrees": oracle.solutions == res.solutions,
        }
        if trace:
            out["oracle"]["trace"] = list(oracle.trace)
    return out


def verify_checks(spec: SurfaceSpec) -> list:
    """``(name, passed)`` for each invariant at this genus."""
    cd = complex_double(spec)
    S, J, pi = cd.sigma_matrix, cd.intersection, cd.pi_matrix
    n = S.rows
    I = Matrix.identity(n)
    checks = [
        ("double has 2(g-1) generators and one relator",
         len(cd.double.generators) == 2 * (spec.genus - 1) and len(cd.double.relators) == 1),
        ("double relator abelianizes to zero", all(x == 0 for x in cd.double.relation_matrix()[0])),
        ("homology of the base is Z^(g-1) + Z/2", homology_invariants(standard_presentation(spec)) == (spec.genus - 1, [2])),
        ("homology of the double is free of rank 2(g-1)", homology_invariants(cd.double) == (2 * (spec.genus - 1), [])),
        ("sigma^2 = I", S @ S == I),
        ("sigma^t J sigma = -J", S.T @ J @ S == -J),
        ("pi sigma = pi", cd.reduce_base(pi @ S) == pi),
        ("sigma words are an involution",
         all(_sigma_twice(cd, g) for g in cd.double.generators)),
    ]
    ab = adapt_basis(S, J)
    checks.append(("adapted basis gives symmetric A", ab.A.is_symmetric()))
    rp = real_part_components(ab.A)
    checks.append(("component count is 1 (odd) or 2 (even)", rp.component_count == (1 if spec.parity == "odd" else 2)))
    kj = klein_jacobian(spec)
    checks.append(("z -> -z/2 identifies components with J(Sigma)", check_component_isomorphism(kj, rp).holds))
    for eps in (1, -1):
        system = build_lift_constraints(spec, eps)
        want = I if eps == 1 else S
        checks.append((f"lift with orientation {eps:+d} satisfies the constraints", system.satisfies(want)))
    checks.append(("sigma violates the orientation-preserving condition", not build_lift_constraints(spec, 1).satisfies(S)))
    return checks


def _sigma_twice(cd, g) -> bool:
    """``sigma(sigma(g)) = g`` in homology; the words agree only modulo the relator."""
    twice = cd.apply_sigma(cd.sigma_words[g])
    return cd.class_of(twice) == cd.class_of(cd.loops[g])


# ---------------------------------------------------------------------------
# text rendering


def _matrix_text(name: str, m: dict) -> str:
    rows = [" ".join(f"{x:>5}" for x in r) for r in m["entries"]]
    return f"{name} ({m['rows']}x{m['cols']}):\n" + "\n".join("  " + r for r in rows)


def _render_text(command: str, report) -> str:
    if command == "verify":
        return "\n".join(f"{'PASS' if ok else 'FAIL'}  {name}" for name, ok in report["checks"])
    lines = []
    for key, val in report.items():
        if isinstance(val, dict) and {"rows", "cols", "entries"} <= set(val):
            lines.append(_matrix_text(key, val))
        elif key == "trace":
            lines.extend(val)
        elif key == "solutions":
            for k, m in enumerate(val):
                lines.append(_matrix_text(f"solution {k + 1}", m))
        else:
            lines.append(f"{key}: {json.dumps(val)}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------


def _load_matrix(path: str) -> Matrix:
    try:
        with open(path, encoding="utf-8") as fh:
            return read_matrix_text(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except (MatrixError, ValueError) as exc:
        raise UsageError(f"bad matrix file {path}: {exc}") from exc


def run(config: RunConfig, out=None) -> int:
    out = sys.stdout if out is None else out
    spec = config.spec()
    if config.command == "double":
        report = double_report(spec)
        status = EXIT_OK
    elif config.command == "torelli":
        report = torelli_report(spec, config.orientation, config.bound, config.trace)
        status = EXIT_OK if report.get("oracle", {}).get("agrees", True) else EXIT_FAIL
    elif config.command == "jacobian":
        A = _load_matrix(config.A_path) if config.A_path else None
        Y = _load_matrix(config.Y_path) if config.Y_path else None
        try:
            report = jacobian_report(spec, A, Y)
        except PeriodError as exc:
            raise UsageError(str(exc)) from exc
        status = EXIT_OK if report["isomorphism"]["holds"] else EXIT_FAIL
    else:
        checks = verify_checks(spec)
        report = {"genus": spec.genus, "variant": spec.variant, "checks": checks}
        status = EXIT_OK if all(ok for _, ok in checks) else EXIT_FAIL
    if config.format == "json":
        if config.command == "verify":
            report = dict(report, checks=[{"name": n, "passed": ok} for n, ok in report["checks"]])
        out.write(json.dumps(report, indent=2) + "\n")
    else:
        out.write(_render_text(config.command, report) + "\n")
    return status


def _orientation(text: str) -> int:
    if text in ("+1", "1"):
        return 1
    if text == "-1":
        return -1
    raise argparse.ArgumentTypeError("orientation must be +1 or -1")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kleindouble", description=__doc__)
    p.add_argument("command", choices=["double", "torelli", "jacobian", "verify"])
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--variant", choices=list(VARIANTS))
    p.add_argument("--orientation", type=_orientation, default=1)
    p.add_argument("--bound", type=int, help="also run the box oracle with this bound")
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.add_argument("--trace", action="store_true", help="include the elimination log")
    p.add_argument("--A", dest="A_path", metavar="FILE", help="override A (jacobian)")
    p.add_argument("--Y", dest="Y_path", metavar="FILE", help="imaginary part of P (jacobian)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        config = RunConfig(**vars(args))
        return run(config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EnumerationLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (WordError, MatrixError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

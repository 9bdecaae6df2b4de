"""Command-line front end.

One job per invocation. Exit codes partition outcomes:
0 success, 1 parse error, 2 no convergence, 3 precondition error,
4 hypothesis violation, 5 certificate unsatisfied or verification failed,
6 boundary case, 7 not reducible.

Complex numbers on the command line use the strict "re+imi" grammar
(examples: 0.5, -2i, 1+2i, 1.5e-3-2.5e-4i); in files they are [re, im]
pairs. All numeric output is printed with 17 significant digits so
identical jobs diff byte-identically.
"""

import argparse
import json
import re
import sys

from .convergence import unit_circle_certificate
from .hyperfn import (
    HypergeometricParams,
    NoConvergence,
    PoleInParameters,
    RadiusViolation,
    ShiftPoleViolation,
    eval_nfm,
    eval_shifted_nfm,
)
from .matcore import InvalidMatrix, matrix_from_obj, matrix_to_obj
from .odesolve import (
    HypergeometricEquation,
    HypothesisViolation,
    analytic_basis,
    check_recursion,
    fundamental_set,
    solution_from_obj,
    solution_to_obj,
)
from .reduction import (
    InvalidExampleParameters,
    RootFailure,
    equation_from_obj,
    equation_to_obj,
    reduce_to_hypergeometric,
    result_to_obj,
    spherical_example,
)

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_NO_CONVERGENCE = 2
EXIT_PRECONDITION = 3
EXIT_HYPOTHESIS = 4
EXIT_UNSATISFIED = 5
EXIT_BOUNDARY = 6
EXIT_NOT_REDUCIBLE = 7


class ParseFailure(Exception):
    pass


_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_RE_REAL = re.compile(rf"^(?P<re>[+-]?{_NUM})$")
_RE_IMAG = re.compile(rf"^(?P<sign>[+-])?(?P<mag>{_NUM})?i$")
_RE_BOTH = re.compile(rf"^(?P<re>[+-]?{_NUM})(?P<sign>[+-])(?P<mag>{_NUM})?i$")


def parse_complex(text, name="value"):
    """Parse the strict re+imi grammar into a complex number."""
    s = text.strip()
    m = _RE_REAL.match(s)
    if m:
        return complex(float(m.group("re")), 0.0)
    m = _RE_IMAG.match(s)
    if m:
        mag = float(m.group("mag")) if m.group("mag") else 1.0
        return complex(0.0, -mag if m.group("sign") == "-" else mag)
    m = _RE_BOTH.match(s)
    if m:
        mag = float(m.group("mag")) if m.group("mag") else 1.0
        return complex(
            float(m.group("re")), -mag if m.group("sign") == "-" else mag
        )
    raise ParseFailure(f"{name}: cannot parse complex literal {text!r}")


def fmt_complex(z):
    z = complex(z)
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real:.17g}{sign}{abs(z.imag):.17g}i"


def fmt_matrix(a, indent="  "):
    lines = []
    for row in a:
        lines.append(indent + "  ".join(fmt_complex(v) for v in row))
    return "\n".join(lines)


def load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ParseFailure(f"{path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise ParseFailure(f"{path}: invalid JSON ({exc})") from None


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_params(path):
    obj = load_json(path)
    if not isinstance(obj, dict):
        raise ParseFailure(f"{path}: expected an object")
    for key in ("numerator", "denominator"):
        if key in obj and not isinstance(obj[key], list):
            raise ParseFailure(f"{path}: {key}: expected a list of matrices")
    try:
        numerator = [
            matrix_from_obj(mat, name=f"numerator[{i}]")
            for i, mat in enumerate(obj.get("numerator", []))
        ]
        denominator = [
            matrix_from_obj(mat, name=f"denominator[{k}]")
            for k, mat in enumerate(obj.get("denominator", []))
        ]
    except InvalidMatrix as exc:
        raise ParseFailure(f"{path}: {exc}") from None
    dim = obj.get("dim")
    if dim is not None and (not isinstance(dim, int) or dim < 1):
        raise ParseFailure(f"{path}: dim: must be a positive integer")
    try:
        return HypergeometricParams(numerator, denominator, dim=dim)
    except ValueError as exc:
        raise ParseFailure(f"{path}: {exc}") from None


def load_equation(path):
    obj = load_json(path)
    try:
        return equation_from_obj(obj, name=path)
    except (ValueError, InvalidMatrix) as exc:
        raise ParseFailure(f"{exc}") from None


def load_solutions(path):
    obj = load_json(path)
    if not isinstance(obj, dict) or not isinstance(obj.get("solutions"), list):
        raise ParseFailure(f"{path}: solutions: expected a list")
    try:
        return [
            solution_from_obj(s, name=f"solutions[{i}]")
            for i, s in enumerate(obj["solutions"])
        ]
    except ValueError as exc:
        raise ParseFailure(f"{path}: {exc}") from None


def cmd_eval(args):
    try:
        params = load_params(args.params)
        z = parse_complex(args.z, name="--z")
        shift = parse_complex(args.shift, name="--shift")
    except ParseFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        if shift == 0:
            result = eval_nfm(
                params, z, tol=args.tol, max_terms=args.max_terms,
                allow_boundary=args.boundary,
            )
        else:
            result = eval_shifted_nfm(
                params, shift, z, tol=args.tol, max_terms=args.max_terms,
                allow_boundary=args.boundary,
            )
    except NoConvergence as exc:
        result = exc.result
        print(f"no convergence: {exc}", file=sys.stderr)
        _print_eval_report(result)
        return EXIT_NO_CONVERGENCE
    except (PoleInParameters, ShiftPoleViolation, RadiusViolation) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    _print_eval_report(result)
    if args.out:
        write_json(
            args.out,
            {
                "value": matrix_to_obj(result.value),
                "terms_used": result.terms_used,
                "truncation_bound": result.truncation_bound,
                "converged": result.converged,
            },
        )
    return EXIT_OK


def _print_eval_report(result):
    print("value:")
    print(fmt_matrix(result.value))
    print(f"terms_used: {result.terms_used}")
    print(f"truncation_bound: {result.truncation_bound:.17g}")
    print(f"converged: {str(result.converged).lower()}")


def cmd_basis(args):
    try:
        params = load_params(args.params)
        eq = HypergeometricEquation(params)
    except (ParseFailure, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        if args.analytic_only:
            solutions = analytic_basis(eq, args.truncation)
        else:
            solutions = fundamental_set(eq, args.truncation)
    except HypothesisViolation as exc:
        print("hypothesis violation:", file=sys.stderr)
        for failure in exc.failures:
            print(f"  - {failure}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except PoleInParameters as exc:
        print(f"error: PoleInParameters: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION

    checks = [check_recursion(eq, sol, rel_tol=args.tol) for sol in solutions]
    print(f"solutions: {len(solutions)}")
    for i, (sol, ok) in enumerate(zip(solutions, checks)):
        status = "pass" if ok else "FAIL"
        print(
            f"  [{i}] kind={sol.kind} exponent={fmt_complex(sol.exponent)} "
            f"recursion_check={status}"
        )
    if args.out:
        write_json(
            args.out,
            {
                "dim": params.dim,
                "solutions": [solution_to_obj(sol) for sol in solutions],
                "verification": {"rel_tol": args.tol, "passed": checks},
            },
        )
    return EXIT_OK if all(checks) else EXIT_UNSATISFIED


def cmd_certify(args):
    try:
        params = load_params(args.params)
    except ParseFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        cert = unit_circle_certificate(params)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    print(f"satisfied: {str(cert.satisfied).lower()}")
    print(f"boundary: {str(cert.boundary).lower()}")
    print(f"gap: {cert.gap:.17g}")
    print(f"delta_sum: {cert.delta_sum:.17g}")
    print(f"norm_sum: {cert.norm_sum:.17g}")
    print(
        "hermitian_check: "
        + " ".join(str(h).lower() for h in cert.hermitian_check)
    )
    print(f"pole_free: {str(cert.pole_free).lower()}")
    if cert.satisfied:
        return EXIT_OK
    if cert.boundary:
        return EXIT_BOUNDARY
    return EXIT_UNSATISFIED


def cmd_reduce(args):
    try:
        eq = load_equation(args.equation)
    except ParseFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        result = reduce_to_hypergeometric(eq, tol=args.tol)
    except RootFailure as exc:
        print(f"error: RootFailure: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    print(f"status: {result.status}")
    for key in sorted(result.diagnostics):
        value = result.diagnostics[key]
        if isinstance(value, float):
            print(f"{key}: {value:.17g}")
        else:
            print(f"{key}: {value}")
    if result.reduced:
        print("A:")
        print(fmt_matrix(result.A))
        print("B:")
        print(fmt_matrix(result.B))
        print(
            "lambda_selection: "
            + " ".join(fmt_complex(v) for v in result.lambda_selection)
        )
    if args.out:
        write_json(args.out, result_to_obj(result))
    return EXIT_OK if result.reduced else EXIT_NOT_REDUCIBLE


def cmd_example(args):
    try:
        eq = spherical_example(args.ell, args.alpha, args.beta, args.k)
    except InvalidExampleParameters as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    write_json(args.out, equation_to_obj(eq))
    print(f"wrote {args.out} (dim {eq.dim})")
    print("C:")
    print(fmt_matrix(eq.C))
    print("U:")
    print(fmt_matrix(eq.U))
    print("V:")
    print(fmt_matrix(eq.V))
    return EXIT_OK


def cmd_verify(args):
    try:
        solutions = load_solutions(args.solutions)
        params = load_params(args.params)
        eq = HypergeometricEquation(params)
    except (ParseFailure, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    bad_dim = [sol.dim for sol in solutions if sol.dim != params.dim]
    if bad_dim:
        print(
            f"error: dimension mismatch: solutions of dimension {bad_dim[0]} "
            f"against parameters of dimension {params.dim}",
            file=sys.stderr,
        )
        return EXIT_PARSE
    all_ok = True
    for i, sol in enumerate(solutions):
        ok = check_recursion(eq, sol, rel_tol=args.tol)
        all_ok = all_ok and ok
        print(
            f"[{i}] kind={sol.kind} exponent={fmt_complex(sol.exponent)} "
            f"recursion_check={'pass' if ok else 'FAIL'}"
        )
    return EXIT_OK if all_ok else EXIT_UNSATISFIED


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mvhyper",
        description="Matrix-valued generalized hypergeometric toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate the series at a point")
    p.add_argument("params", help="parameter family JSON file")
    p.add_argument("--z", required=True, help="evaluation point, re+imi literal")
    p.add_argument("--shift", default="0", help="series shift p (default 0)")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-terms", type=int, default=10000)
    p.add_argument("--boundary", action="store_true",
                   help="allow |z| = 1 for n = m + 1 families")
    p.add_argument("--out", help="write the result as JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("basis", help="construct the solution basis at z = 0")
    p.add_argument("params")
    p.add_argument("--truncation", type=int, default=32,
                   help="number of series coefficients per solution")
    p.add_argument("--analytic-only", action="store_true")
    p.add_argument("--tol", type=float, default=1e-10,
                   help="relative tolerance of the recursion check")
    p.add_argument("--out", help="write the solutions as JSON")
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("certify", help="unit-circle convergence certificate")
    p.add_argument("params")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("reduce", help="reduce a second-order equation")
    p.add_argument("equation", help="equation JSON file with C, U, V")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", help="write the reduction result as JSON")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("example", help="generate the triangular example file")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--out", required=True, help="equation file to write")
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("verify", help="re-check emitted solutions")
    p.add_argument("solutions", help="solutions JSON file")
    p.add_argument("params", help="parameter family JSON file")
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

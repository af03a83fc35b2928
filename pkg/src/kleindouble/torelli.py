"""Lifts of Torelli mapping classes to the complex double.

A diffeomorphism of the base acting trivially on homology lifts to a map
whose action ``F`` on the homology of the double satisfies

* ``pi F = pi``          (it covers a homologically trivial map),
* ``F sigma = sigma F``  (it commutes with the symmetry),
* ``F^t J F = eps J``    (``eps = +1`` orientation preserving lift, ``-1`` reversing).

The first two families are linear and solved exactly over Q.  The
quadratic family is then eliminated in stages: every residual equation
that has become linear is solved and substituted back until nothing is
left.  :func:`enumerate_lifts_oracle` is an independent brute-force check
over a box of integer parameters.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .matrix import Matrix, rref, solve_affine, solve_integer_affine
from .surface import CoveringData, SurfaceSpec, complex_double

DEFAULT_MAX_ENUM = 10 ** 7


class LiftError(RuntimeError):
    pass


class NonlinearResidualError(LiftError):
    """Staged elimination stopped with nonlinear equations left over."""

    def __init__(self, msg, residual):
        super().__init__(msg)
        self.residual = residual


class EnumerationLimitError(LiftError):
    pass


# ---------------------------------------------------------------------------
# polynomials of degree <= 2 with rational coefficients


class Poly:
    """Sparse polynomial; monomials are sorted tuples of variable indices."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    @classmethod
    def const(cls, c):
        return cls({(): Fraction(c)})

    @classmethod
    def var(cls, k, c=1):
        return cls({(k,): Fraction(c)})

    def __add__(self, other):
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) + c
        return Poly(t)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, k):
        return Poly({m: c * k for m, c in self.terms.items()})

    def __mul__(self, other):
        t: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(sorted(m1 + m2))
                t[m] = t.get(m, 0) + c1 * c2
        return Poly(t)

    def degree(self):
        return max((len(m) for m in self.terms), default=-1)

    def variables(self):
        return sorted({v for m in self.terms for v in m})

    def is_zero(self):
        return not self.terms

    def substitute(self, assign: dict):
        """Replace variables by polynomials (``assign[k]``)."""
        out = Poly()
        for m, c in self.terms.items():
            p = Poly.const(c)
            for v in m:
                p = p * assign[v] if v in assign else p * Poly.var(v)
            out = out + p
        return out

    def evaluate(self, values):
        total = Fraction(0)
        for m, c in self.terms.items():
            x = c
            for v in m:
                x *= values[v]
            total += x
        return total

    def format(self, names):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=lambda m: (-len(m), m)):
            c = self.terms[m]
            mon = "*".join(names[v] for v in m)
            if not mon:
                parts.append(str(c))
            elif c == 1:
                parts.append(mon)
            elif c == -1:
                parts.append(f"-{mon}")
            else:
                parts.append(f"{c}*{mon}")
        return " + ".join(parts).replace("+ -", "- ")


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LiftConstraintSystem:
    spec: SurfaceSpec
    orientation: int
    covering: CoveringData = field(repr=False)

    @property
    def size(self) -> int:
        return self.covering.sigma_matrix.rows

    def entry_name(self, k: int) -> str:
        i, j = divmod(k, self.size)
        return f"F[{i + 1},{j + 1}]"

    def pi_equations(self) -> tuple:
        """Rows of ``pi_free F = pi_free`` on the row-major entries of ``F``."""
        P = self.covering.pi_free
        N = self.size
        rows, rhs = [], []
        for r in range(P.rows):
            for j in range(N):
                v = [0] * (N * N)
                for i in range(N):
                    v[i * N + j] += P[r, i]
                rows.append(v)
                rhs.append(P[r, j])
        return rows, rhs

    def sigma_equations(self) -> tuple:
        S = self.covering.sigma_matrix
        N = self.size
        rows, rhs = [], []
        for i in range(N):
            for j in range(N):
                v = [0] * (N * N)
                for k in range(N):
                    v[i * N + k] += S[k, j]
                    v[k * N + j] -= S[i, k]
                rows.append(v)
                rhs.append(0)
        return rows, rhs

    def linear_system(self) -> tuple:
        r1, b1 = self.pi_equations()
        r2, b2 = self.sigma_equations()
        return Matrix(r1 + r2, self.size ** 2), b1 + b2

    def target(self) -> Matrix:
        return self.covering.intersection * self.orientation

    def satisfies(self, F: Matrix) -> bool:
        cd = self.covering
        S, J = cd.sigma_matrix, cd.intersection
        if not F.is_integral() or F.shape != S.shape:
            return False
        return (
            cd.reduce_base(cd.pi_matrix @ F) == cd.pi_matrix
            and F @ S == S @ F
            and F.T @ J @ F == self.target()
        )


def build_lift_constraints(spec: SurfaceSpec, orientation: int) -> LiftConstraintSystem:
    if orientation not in (1, -1):
        raise ValueError(f"orientation must be +1 or -1, got {orientation!r}")
    return LiftConstraintSystem(spec, orientation, complex_double(spec))


@dataclass(frozen=True)
class LiftClassification:
    solutions: tuple
    method: str
    trace: tuple = ()
    system: LiftConstraintSystem | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        sols = tuple(sorted(set(self.solutions), key=lambda m: m.tolist()))
        if self.system is not None:
            for F in sols:
                if not self.system.satisfies(F):
                    raise LiftError("classification contains a matrix violating the constraints")
        object.__setattr__(self, "solutions", sols)

    def to_json(self, with_trace=False) -> dict:
        out = {"solutions": [F.to_json() for F in self.solutions], "method": self.method}
        if with_trace:
            out["trace"] = list(self.trace)
        return out


def _affine_entries(x0, N):
    """Entries of ``F`` as polynomials in the parameters."""
    polys = []
    for i in range(len(x0)):
        t = {(): Fraction(x0[i])}
        for k in range(N.cols):
            if N[i, k]:
                t[(k,)] = Fraction(N[i, k])
        polys.append(Poly(t))
    return polys


def _residual(system: LiftConstraintSystem, entries) -> list:
    """``(position, poly)`` for each entry of ``F^t J F - eps J``."""
    J = system.covering.intersection
    N = system.size
    T = system.target()
    nz = [(i, j, J[i, j]) for i in range(N) for j in range(N) if J[i, j]]
    out = []
    for a in range(N):
        for b in range(N):
            p = Poly.const(-T[a, b])
            for i, j, v in nz:
                p = p + (entries[i * N + a] * entries[j * N + b]).scale(v)
            out.append(((a, b), p))
    return out


def _linear_parametrization(system):
    """Rational solutions ``x = x0 + N t`` of the linear constraints.

    Pivots are taken from the last entries backwards, so the parameters
    are the leading free entries of ``F`` (upper block rows first).
    Returns ``(x0, N, names)`` or None.
    """
    M, b = system.linear_system()
    n = M.cols
    rev = list(range(n - 1, -1, -1))
    sol = solve_affine(M.permute(cols=rev), b)
    if sol is None:
        return None
    y0, Ny = sol
    x0 = [y0[n - 1 - i] for i in range(n)]
    N = Ny.permute(rows=rev)
    # each column of N is a unit vector on its own free entry
    free = [next(i for i in range(n) if N[i, k] == 1 and all(N[i, kk] == 0 for kk in range(N.cols) if kk != k))
            for k in range(N.cols)]
    order = sorted(range(N.cols), key=lambda k: free[k])
    N = N.permute(cols=order)
    return x0, N, [system.entry_name(free[k]) for k in order]


def classify_lifts(system: LiftConstraintSystem, oracle_bound: int = 2) -> LiftClassification:
    """Staged elimination; falls back to the oracle if a nonlinear residue remains."""
    try:
        return _staged(system)
    except NonlinearResidualError as exc:
        res = enumerate_lifts_oracle(system, oracle_bound)
        trace = (f"staged elimination stopped: {exc}",) + res.trace
        return LiftClassification(res.solutions, "bounded-enumeration", trace, system)


def _staged(system: LiftConstraintSystem) -> LiftClassification:
    par = _linear_parametrization(system)
    if par is None:
        return LiftClassification((), "staged-elimination", ("linear constraints inconsistent",), system)
    x0, N, names = par
    entries = _affine_entries(x0, N)
    eqs = [(pos, p) for pos, p in _residual(system, entries) if not p.is_zero()]
    trace = [f"linear constraints leave {N.cols} free entries: {', '.join(names)}"]
    assign: dict = {}
    while eqs:
        eqs.sort(key=lambda e: (e[1].degree(), e[0]))
        if eqs[0][1].degree() == 0:
            pos, p = eqs[0]
            trace.append(f"derived: R[{pos[0] + 1},{pos[1] + 1}] = {p.format(names)} => inconsistent")
            return LiftClassification((), "staged-elimination", tuple(trace), system)
        linear = [e for e in eqs if e[1].degree() == 1]
        if not linear:
            raise NonlinearResidualError(f"{len(eqs)} nonlinear equations remain", eqs)
        step = _solve_linear(linear, names, trace)
        assign = {k: v.substitute(step) for k, v in assign.items()}
        assign.update(step)
        eqs = [(pos, p.substitute(step)) for pos, p in eqs]
        eqs = [(pos, p) for pos, p in eqs if not p.is_zero()]
    free = [k for k in range(N.cols) if k not in assign]
    if free:
        raise LiftError(f"solution set is not finite: {', '.join(names[k] for k in free)} unconstrained")
    values = {k: assign[k].evaluate({}) for k in assign}
    vec = [x0[i] + sum(N[i, k] * values[k] for k in range(N.cols)) for i in range(N.rows)]
    n = system.size
    F = Matrix([vec[i * n:(i + 1) * n] for i in range(n)], n)
    if not F.is_integral():
        trace.append("unique rational solution is not integral")
        return LiftClassification((), "staged-elimination", tuple(trace), system)
    if not system.satisfies(F):
        trace.append("unique solution violates the torsion part of pi F = pi")
        return LiftClassification((), "staged-elimination", tuple(trace), system)
    return LiftClassification((F,), "staged-elimination", tuple(trace), system)


def _solve_linear(linear, names, trace) -> dict:
    """Solve the linear residual equations together; parameters in pivot order."""
    vars_ = sorted({v for _, p in linear for v in p.variables()})
    col = {v: k for k, v in enumerate(vars_)}
    rows = []
    for _, p in linear:
        r = [Fraction(0)] * (len(vars_) + 1)
        for m, c in p.terms.items():
            if m:
                r[col[m[0]]] += c
            else:
                r[-1] -= c
        rows.append(r)
    a, pivots = rref(Matrix(rows, len(vars_) + 1))
    if len(vars_) in pivots:
        raise LiftError("linear residual equations are inconsistent")
    step = {}
    for i, pc in enumerate(pivots):
        expr = Poly.const(a[i][-1])
        for j, v in enumerate(vars_):
            if j != pc and a[i][j]:
                expr = expr + Poly.var(v, -a[i][j])
        step[vars_[pc]] = expr
    for pos, p in linear:
        solved = [v for v in p.variables() if v in step]
        rhs = ", ".join(f"{names[v]} = {step[v].format(names)}" for v in solved)
        trace.append(f"derived: R[{pos[0] + 1},{pos[1] + 1}]: {p.format(names)} = 0 => {rhs}")
    return step


# ---------------------------------------------------------------------------
# oracle


def max_enum() -> int:
    raw = os.environ.get("KD_MAX_ENUM")
    return int(float(raw)) if raw else DEFAULT_MAX_ENUM


def integer_parametrization(system: LiftConstraintSystem) -> tuple:
    """Integer points of the linear constraints, ``x = x0 + B t``.

    The lattice comes from the Smith form.  When its projection onto a set
    of coordinates is unimodular those entries of ``F`` become the
    parameters, so the search box is a box of matrix entries.
    """
    M, b = system.linear_system()
    sol = solve_integer_affine(M, b)
    if sol is None:
        return None
    x0, B = sol
    k = B.cols
    # greedy choice of coordinate rows making the projection unimodular
    chosen = []
    for i in range(B.rows):
        trial = chosen + [i]
        sub = B.submatrix(trial, range(k))
        if sub.rank() == len(trial):
            chosen = trial
        if len(chosen) == k:
            break
    if len(chosen) == k:
        Pf = B.submatrix(chosen, range(k))
        if Pf.det() in (1, -1):
            Pinv = Pf.inverse()
            B2 = B @ Pinv
            shift = B2 @ Matrix([[x0[i]] for i in chosen], 1)
            x0 = [x0[i] - shift[i, 0] for i in range(len(x0))]
            return x0, B2, [system.entry_name(i) for i in chosen]
    return x0, B, [f"t{j}" for j in range(k)]


def enumerate_lifts_oracle(
    system: LiftConstraintSystem, bound: int, limit: int | None = None, node_budget: int | None = None
) -> LiftClassification:
    """All integral lifts whose parameters lie in ``[-bound, bound]``.

    Boxes of at most ``limit`` points (``KD_MAX_ENUM``) are scanned in full;
    larger ones are searched depth first with pruning, visiting at most
    ``node_budget`` nodes before raising :class:`EnumerationLimitError`.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    limit = max_enum() if limit is None else limit
    par = integer_parametrization(system)
    if par is None:
        return LiftClassification((), "bounded-enumeration", ("no integer solution of the linear constraints",), system)
    x0, B, names = par
    k = B.cols
    size = (2 * bound + 1) ** k
    if size <= limit:
        sols = _brute_force(system, x0, B, bound)
        note = f"enumerated {size} points of [-{bound},{bound}]^{k}"
    else:
        budget = limit if node_budget is None else node_budget
        sols, visited = _backtrack(system, x0, B, bound, budget)
        note = f"searched [-{bound},{bound}]^{k} by backtracking, {visited} nodes"
    return LiftClassification(tuple(sols), "bounded-enumeration", (note,), system)


def _to_matrix(vec, n):
    return Matrix([[int(x) for x in vec[i * n:(i + 1) * n]] for i in range(n)], n)


def _brute_force(system, x0, B, bound, chunk=200_000):
    n = system.size
    J = np.array(system.covering.intersection.tolist(), dtype=np.float64)
    T = np.array(system.target().tolist(), dtype=np.float64)
    X0 = np.array(x0, dtype=np.int64)
    Bn = np.array(B.tolist(), dtype=np.int64).reshape(len(x0), B.cols)
    k = B.cols
    base = 2 * bound + 1
    powers = base ** np.arange(k, dtype=np.int64)
    total = base ** k
    out = []
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        t = (idx[:, None] // powers[None, :]) % base - bound
        F = (X0[None, :] + t @ Bn.T).reshape(-1, n, n)
        # float64 is exact here: entries stay far below 2**26
        Ff = F.astype(np.float64)
        R = np.matmul(np.transpose(Ff, (0, 2, 1)), J @ Ff)
        ok = np.all(R == T[None], axis=(1, 2))
        for z in np.nonzero(ok)[0]:
            M = _to_matrix(F[z].reshape(-1).tolist(), n)
            if system.satisfies(M):
                out.append(M)
    return out


def _backtrack(system, x0, B, bound, limit):
    """Depth-first search over the box, checking each quadratic equation once its parameters are set."""
    n = system.size
    entries = _affine_entries(x0, B)
    eqs = [p for _, p in _residual(system, entries) if not p.is_zero()]
    # params ordered by how often they occur, equations grouped by last param
    freq = {}
    for p in eqs:
        for v in p.variables():
            freq[v] = freq.get(v, 0) + 1
    order = sorted(range(B.cols), key=lambda v: -freq.get(v, 0))
    rank = {v: i for i, v in enumerate(order)}
    by_level: dict = {}
    for p in eqs:
        vs = p.variables()
        lvl = max((rank[v] for v in vs), default=-1)
        if lvl < 0:
            return [], 0
        by_level.setdefault(lvl, []).append(_int_poly(p))
    values = [0] * B.cols
    out = []
    visited = 0

    def rec(level):
        nonlocal visited
        if level == len(order):
            vec = [x0[i] + sum(B[i, k] * values[k] for k in range(B.cols)) for i in range(len(x0))]
            M = _to_matrix(vec, n)
            if system.satisfies(M):
                out.append(M)
            return
        v = order[level]
        for x in range(-bound, bound + 1):
            visited += 1
            if visited > limit:
                raise EnumerationLimitError(f"search exceeded {limit} nodes")
            values[v] = x
            if all(_eval_int(p, values) == 0 for p in by_level.get(level, ())):
                rec(level + 1)
        values[v] = 0

    rec(0)
    return out, visited


def _int_poly(p: Poly):
    d = 1
    for c in p.terms.values():
        d = d * c.denominator // np.gcd(d, c.denominator)
    return [(m, int(c * d)) for m, c in p.terms.items()]


def _eval_int(terms, values):
    s = 0
    for m, c in terms:
        for v in m:
            c *= values[v]
        s += c
    return s

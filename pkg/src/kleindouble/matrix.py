"""Exact integer and rational matrices with Smith and Hermite normal forms.

Entries are Python ``int`` or :class:`fractions.Fraction`; a fraction with
denominator one is stored as an ``int`` so integral matrices compare and
hash the same way regardless of how they were produced.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence


class MatrixError(ValueError):
    pass


def _norm(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, bool):
        return int(x)
    if isinstance(x, int):
        return x
    if isinstance(x, str):
        return _norm(Fraction(x))
    raise MatrixError(f"non-exact entry {x!r}")


class Matrix:
    """Immutable exact matrix."""

    __slots__ = ("_rows", "rows", "cols", "_hash")

    def __init__(self, rows: Iterable[Iterable], cols: int | None = None):
        data = tuple(tuple(_norm(x) for x in r) for r in rows)
        if cols is None:
            cols = len(data[0]) if data else 0
        if any(len(r) != cols for r in data):
            raise MatrixError("ragged rows")
        self._rows = data
        self.rows = len(data)
        self.cols = cols
        self._hash = None

    # construction -----------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], n)

    @classmethod
    def zeros(cls, r: int, c: int) -> "Matrix":
        return cls([[0] * c for _ in range(r)], c)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int | None = None) -> "Matrix":
        if not columns:
            return cls.zeros(rows or 0, 0)
        n = len(columns[0])
        return cls([[c[i] for c in columns] for i in range(n)], len(columns))

    @classmethod
    def block(cls, blocks: Sequence[Sequence["Matrix"]]) -> "Matrix":
        out = []
        for brow in blocks:
            h = brow[0].rows
            if any(b.rows != h for b in brow):
                raise MatrixError("block heights differ")
            for i in range(h):
                out.append([x for b in brow for x in b._rows[i]])
        return cls(out)

    @classmethod
    def diag(cls, entries: Sequence) -> "Matrix":
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)], n)

    @classmethod
    def block_diag(cls, blocks: Sequence["Matrix"]) -> "Matrix":
        n = sum(b.rows for b in blocks)
        m = sum(b.cols for b in blocks)
        out = [[0] * m for _ in range(n)]
        r = c = 0
        for b in blocks:
            for i in range(b.rows):
                for j in range(b.cols):
                    out[r + i][c + j] = b._rows[i][j]
            r += b.rows
            c += b.cols
        return cls(out, m)

    @classmethod
    def anti_identity(cls, n: int) -> "Matrix":
        return cls([[1 if i + j == n - 1 else 0 for j in range(n)] for i in range(n)], n)

    # access -------------------------------------------------------------
    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self._rows[i][j]

    def row(self, i: int) -> tuple:
        return self._rows[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self._rows)

    def tolist(self) -> list:
        return [list(r) for r in self._rows]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix([[self._rows[i][j] for j in cols] for i in rows], len(cols))

    def permute(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> "Matrix":
        rows = range(self.rows) if rows is None else rows
        cols = range(self.cols) if cols is None else cols
        return self.submatrix(list(rows), list(cols))

    # arithmetic ---------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.shape, self._rows))
        return self._hash

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix([[a + b for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)], self.cols)

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix([[a - b for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)], self.cols)

    def __neg__(self) -> "Matrix":
        return Matrix([[-a for a in r] for r in self._rows], self.cols)

    def __mul__(self, k) -> "Matrix":
        if isinstance(k, Matrix):
            raise MatrixError("use @ for matrix products")
        return Matrix([[a * k for a in r] for r in self._rows], self.cols)

    __rmul__ = __mul__

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise MatrixError(f"cannot multiply {self.shape} by {other.shape}")
        cols = list(zip(*other._rows)) if other.rows else [()] * other.cols
        return Matrix(
            [[sum(a * b for a, b in zip(r, c)) for c in cols] for r in self._rows],
            other.cols,
        )

    def _check_same(self, other):
        if self.shape != other.shape:
            raise MatrixError(f"shape mismatch {self.shape} vs {other.shape}")

    @property
    def T(self) -> "Matrix":
        return Matrix([[r[j] for r in self._rows] for j in range(self.cols)], self.rows)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_integral(self) -> bool:
        return all(isinstance(x, int) for r in self._rows for x in r)

    def is_symmetric(self) -> bool:
        return self.is_square() and self == self.T

    def is_zero(self) -> bool:
        return all(x == 0 for r in self._rows for x in r)

    def mod(self, p: int) -> "Matrix":
        if not self.is_integral():
            raise MatrixError("mod of a non-integral matrix")
        return Matrix([[x % p for x in r] for r in self._rows], self.cols)

    def denominator(self) -> int:
        d = 1
        for r in self._rows:
            for x in r:
                if isinstance(x, Fraction):
                    d = d * x.denominator // gcd(d, x.denominator)
        return d

    # determinant / inverse ----------------------------------------------
    def det(self):
        if not self.is_square():
            raise MatrixError("determinant of a non-square matrix")
        a = [[Fraction(x) for x in r] for r in self._rows]
        n = self.rows
        d = Fraction(1)
        for k in range(n):
            p = next((i for i in range(k, n) if a[i][k] != 0), None)
            if p is None:
                return 0
            if p != k:
                a[k], a[p] = a[p], a[k]
                d = -d
            d *= a[k][k]
            for i in range(k + 1, n):
                f = a[i][k] / a[k][k]
                if f:
                    for j in range(k, n):
                        a[i][j] -= f * a[k][j]
        return _norm(d)

    def inverse(self) -> "Matrix":
        if not self.is_square():
            raise MatrixError("inverse of a non-square matrix")
        n = self.rows
        a = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)]
             for i, r in enumerate(self._rows)]
        for k in range(n):
            p = next((i for i in range(k, n) if a[i][k] != 0), None)
            if p is None:
                raise MatrixError("singular matrix")
            a[k], a[p] = a[p], a[k]
            pv = a[k][k]
            a[k] = [x / pv for x in a[k]]
            for i in range(n):
                if i != k and a[i][k] != 0:
                    f = a[i][k]
                    a[i] = [x - f * y for x, y in zip(a[i], a[k])]
        return Matrix([r[n:] for r in a], n)

    def rank(self) -> int:
        return len(rref(self)[1])

    def __repr__(self):
        return f"Matrix({self.tolist()!r})"

    def __str__(self):
        strs = [[str(x) for x in r] for r in self._rows]
        w = max((len(s) for r in strs for s in r), default=1)
        return "\n".join("[" + " ".join(s.rjust(w) for s in r) + "]" for r in strs)

    # serialization ----------------------------------------------------
    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols,
                "entries": [[_fmt(x) for x in r] for r in self._rows]}

    @classmethod
    def from_json(cls, data: dict) -> "Matrix":
        m = cls([[Fraction(x) for x in r] for r in data["entries"]], data["cols"])
        if m.rows != data["rows"]:
            raise MatrixError("row count does not match entries")
        return m


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return str(x)


def read_matrix_text(text: str) -> Matrix:
    """One row per line, whitespace separated integers (or p/q rationals)."""
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    if not rows:
        raise MatrixError("empty matrix file")
    return Matrix([[Fraction(x) for x in r] for r in rows])


# ---------------------------------------------------------------------------
# rational elimination


def rref(m: Matrix) -> tuple:
    """Reduced row echelon form over Q; returns (rows as Fraction lists, pivot columns)."""
    a = [[Fraction(x) for x in r] for r in m.tolist()]
    pivots = []
    r = 0
    for c in range(m.cols):
        p = next((i for i in range(r, m.rows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        pv = a[r][c]
        a[r] = [x / pv for x in a[r]]
        for i in range(m.rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == m.rows:
            break
    return a, pivots


def solve_affine(m: Matrix, b: Sequence) -> tuple | None:
    """Rational solution set of ``m x = b``.

    Returns ``(x0, N)`` with ``x = x0 + N t`` for all rational ``t``; ``N``
    has one column per free unknown.  ``None`` when inconsistent.
    """
    aug = Matrix([list(r) + [bi] for r, bi in zip(m.tolist(), b)], m.cols + 1)
    a, pivots = rref(aug)
    if m.cols in pivots:
        return None
    free = [j for j in range(m.cols) if j not in pivots]
    x0 = [Fraction(0)] * m.cols
    for i, c in enumerate(pivots):
        x0[c] = a[i][m.cols]
    cols = []
    for f in free:
        v = [Fraction(0)] * m.cols
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -a[i][f]
        cols.append(v)
    N = Matrix.from_columns(cols) if cols else Matrix.zeros(m.cols, 0)
    return [_norm(x) for x in x0], N


# ---------------------------------------------------------------------------
# integer normal forms


@dataclass(frozen=True)
class NormalFormResult:
    """``U @ input @ V == D`` with ``U`` and ``V`` unimodular."""
    U: Matrix
    D: Matrix
    V: Matrix
    kind: str


def _xgcd(a: int, b: int) -> tuple:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a - (a // b) * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def smith_normal_form(m: Matrix) -> NormalFormResult:
    if not m.is_integral():
        raise MatrixError("Smith form needs an integer matrix")
    nr, nc = m.shape
    a = m.tolist()
    U = Matrix.identity(nr).tolist()
    V = Matrix.identity(nc).tolist()

    def row_op(i, j, p, q, r, s):
        # rows (i, j) <- (p*row_i + q*row_j, r*row_i + s*row_j)
        for M in (a, U):
            ri, rj = M[i], M[j]
            M[i] = [p * x + q * y for x, y in zip(ri, rj)]
            M[j] = [r * x + s * y for x, y in zip(ri, rj)]

    def col_op(i, j, p, q, r, s):
        for M in (a, V):
            for row in M:
                x, y = row[i], row[j]
                row[i] = p * x + q * y
                row[j] = r * x + s * y

    t = 0
    while t < min(nr, nc):
        nz = [(abs(a[i][j]), i, j) for i in range(t, nr) for j in range(t, nc) if a[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        if i != t:
            row_op(t, i, 0, 1, 1, 0)
        if j != t:
            col_op(t, j, 0, 1, 1, 0)
        while True:
            done = True
            for i in range(t + 1, nr):
                if a[i][t]:
                    if a[i][t] % a[t][t] == 0:
                        row_op(t, i, 1, 0, -(a[i][t] // a[t][t]), 1)
                    else:
                        g, x, y = _xgcd(a[t][t], a[i][t])
                        p, q = a[t][t] // g, a[i][t] // g
                        row_op(t, i, x, y, -q, p)
                    done = False
            for j in range(t + 1, nc):
                if a[t][j]:
                    if a[t][j] % a[t][t] == 0:
                        col_op(t, j, 1, 0, -(a[t][j] // a[t][t]), 1)
                    else:
                        g, x, y = _xgcd(a[t][t], a[t][j])
                        p, q = a[t][t] // g, a[t][j] // g
                        col_op(t, j, x, y, -q, p)
                    done = False
            if done:
                # divisibility: fold in any entry the pivot does not divide
                bad = next(((i, j) for i in range(t + 1, nr) for j in range(t + 1, nc)
                            if a[i][j] % a[t][t]), None)
                if bad is None:
                    break
                row_op(t, bad[0], 1, 1, 0, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return NormalFormResult(Matrix(U, nr), Matrix(a, nc), Matrix(V, nc), "smith")


def invariant_factors(m: Matrix) -> list:
    D = smith_normal_form(m).D
    return [D[i, i] for i in range(min(D.shape)) if D[i, i]]


def hermite_normal_form(m: Matrix) -> NormalFormResult:
    """Column-style Hermite form ``H = m @ V``.

    ``H`` is in column echelon form: the pivot row of each nonzero column
    strictly increases to the right, pivots are positive, entries to the
    left of a pivot satisfy ``0 <= h < pivot``, zero columns come last.
    ``U`` is the identity.
    """
    if not m.is_integral():
        raise MatrixError("Hermite form needs an integer matrix")
    nr, nc = m.shape
    a = m.tolist()
    V = Matrix.identity(nc).tolist()

    def col_op(i, j, p, q, r, s):
        for M in (a, V):
            for row in M:
                x, y = row[i], row[j]
                row[i] = p * x + q * y
                row[j] = r * x + s * y

    def negate(j):
        for M in (a, V):
            for row in M:
                row[j] = -row[j]

    k = 0  # next pivot column
    for i in range(nr):
        if k == nc:
            break
        for j in range(k + 1, nc):
            if a[i][j]:
                if a[i][k] == 0:
                    col_op(k, j, 0, 1, 1, 0)
                    continue
                g, x, y = _xgcd(a[i][k], a[i][j])
                p, q = a[i][k] // g, a[i][j] // g
                col_op(k, j, x, y, -q, p)
        if a[i][k] == 0:
            continue
        if a[i][k] < 0:
            negate(k)
        piv = a[i][k]
        for j in range(k):
            f = a[i][j] // piv
            if f:
                col_op(j, k, 1, -f, 0, 1)
        k += 1
    return NormalFormResult(Matrix.identity(nr), Matrix(a, nc), Matrix(V, nc), "hermite")


def hermite_basis(m: Matrix) -> Matrix:
    """Nonzero columns of the Hermite form: the canonical basis of the column span."""
    H = hermite_normal_form(m).D
    keep = [j for j in range(H.cols) if any(H[i, j] for i in range(H.rows))]
    return H.submatrix(range(H.rows), keep)


def is_smith_form(D: Matrix) -> bool:
    n = min(D.shape)
    for i in range(D.rows):
        for j in range(D.cols):
            if i != j and D[i, j]:
                return False
    diag = [D[i, i] for i in range(n)]
    if any(d < 0 for d in diag):
        return False
    for x, y in zip(diag, diag[1:]):
        if x == 0 and y != 0:
            return False
        if x and y % x:
            return False
    return True


def is_unimodular(m: Matrix) -> bool:
    return m.is_square() and m.is_integral() and m.det() in (1, -1)


def integer_kernel(m: Matrix) -> Matrix:
    """Basis (as columns) of the saturated lattice ``{x in Z^n : m x = 0}``."""
    res = smith_normal_form(m)
    r = sum(1 for i in range(min(res.D.shape)) if res.D[i, i])
    return res.V.submatrix(range(m.cols), range(r, m.cols))


def solve_integer_affine(m: Matrix, b: Sequence[int]) -> tuple | None:
    """Integer solutions of ``m x = b`` as ``(x0, N)``: ``x = x0 + N t``, ``t`` integral."""
    res = smith_normal_form(m)
    ub = (res.U @ Matrix([[x] for x in b], 1)).col(0)
    r = sum(1 for i in range(min(res.D.shape)) if res.D[i, i])
    if any(ub[i] for i in range(r, m.rows)):
        return None
    y = []
    for i in range(r):
        q, rem = divmod(ub[i], res.D[i, i])
        if rem:
            return None
        y.append(q)
    y += [0] * (m.cols - r)
    x0 = (res.V @ Matrix([[v] for v in y], 1)).col(0)
    N = res.V.submatrix(range(m.cols), range(r, m.cols))
    return list(x0), N


def rank_mod2(m: Matrix) -> int:
    rows = [[x % 2 for x in r] for r in m.mod(2).tolist()]
    rank = 0
    ncols = m.cols
    for c in range(ncols):
        p = next((i for i in range(rank, len(rows)) if rows[i][c]), None)
        if p is None:
            continue
        rows[rank], rows[p] = rows[p], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][c]:
                rows[i] = [(x + y) % 2 for x, y in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def kernel_mod2(m: Matrix) -> list:
    """All 0/1 vectors ``n`` with ``m n = 0 (mod 2)``, via a GF(2) basis; sorted."""
    a, pivots = rref_mod2(m)
    free = [j for j in range(m.cols) if j not in pivots]
    basis = []
    for f in free:
        v = [0] * m.cols
        v[f] = 1
        for i, c in enumerate(pivots):
            v[c] = a[i][f] % 2
        basis.append(v)
    out = set()
    for mask in range(1 << len(basis)):
        v = [0] * m.cols
        for k, b in enumerate(basis):
            if mask >> k & 1:
                v = [(x + y) % 2 for x, y in zip(v, b)]
        out.add(tuple(v))
    return sorted(out)


def rref_mod2(m: Matrix) -> tuple:
    rows = m.mod(2).tolist()
    pivots = []
    r = 0
    for c in range(m.cols):
        p = next((i for i in range(r, m.rows) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        for i in range(m.rows):
            if i != r and rows[i][c]:
                rows[i] = [(x + y) % 2 for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows, pivots


def leading_minors_positive(m: Matrix) -> bool:
    return all(m.submatrix(range(k), range(k)).det() > 0 for k in range(1, m.rows + 1))

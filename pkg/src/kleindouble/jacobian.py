"""Real locus of the Jacobian of the complex double and the Klein Jacobian.

In an adapted basis the symmetry acts as ``[[I, A], [0, -I]]`` and the
period matrix is ``P = A/2 + iY``.  Writing ``z = P alpha + beta`` with
real ``alpha, beta`` the fixed-point condition ``conj(z) = z mod Gamma^c``
splits into an imaginary part forcing ``alpha = n/2`` (``n`` integral) and
a real part forcing ``A n = 0 mod 2``.  Only ``A`` enters, so everything
here is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .matrix import (
    Matrix,
    MatrixError,
    hermite_basis,
    kernel_mod2,
    leading_minors_positive,
    rank_mod2,
    solve_integer_affine,
)
from .surface import SurfaceSpec, adapt_basis, complex_double


class PeriodError(ValueError):
    pass


# ---------------------------------------------------------------------------
# lattices


def _canonical(basis: Matrix) -> tuple:
    d = basis.denominator()
    H = hermite_basis(basis * d)
    return d, H


@dataclass(frozen=True)
class Lattice:
    """Full-column-rank lattice spanned by the columns of ``basis``."""

    basis: Matrix
    canonical: Matrix = field(init=False, compare=False)
    _key: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.basis.rank() != self.basis.cols:
            raise MatrixError("lattice basis must have full column rank")
        d, H = _canonical(self.basis)
        object.__setattr__(self, "canonical", H * Fraction(1, d))
        object.__setattr__(self, "_key", (d, H))

    @classmethod
    def from_rows(cls, rows) -> "Lattice":
        return cls(Matrix(rows).T)

    @classmethod
    def scaled_standard(cls, dim: int, k) -> "Lattice":
        return cls(Matrix.identity(dim) * Fraction(k))

    @property
    def dim(self) -> int:
        return self.basis.rows

    @property
    def rank(self) -> int:
        return self.basis.cols

    def image(self, M: Matrix) -> "Lattice":
        return Lattice(M @ self.basis)

    def contains(self, v) -> bool:
        d, H = self._key
        w = [Fraction(x) * d for x in v]
        if any(x.denominator != 1 for x in w):
            return False
        return solve_integer_affine(H, [int(x) for x in w]) is not None

    def __eq__(self, other):
        return isinstance(other, Lattice) and lattice_equal(self, other)

    def __hash__(self):
        return hash(self._key)

    def to_json(self) -> dict:
        return {"dim": self.dim, "canonical": self.canonical.to_json()}


def lattice_equal(L1: Lattice, L2: Lattice) -> bool:
    if L1.dim != L2.dim:
        raise MatrixError(f"ambient dimensions differ: {L1.dim} vs {L2.dim}")
    if L1.rank != L2.rank:
        return False
    return L1._key == L2._key


# ---------------------------------------------------------------------------
# period data and the real part


@dataclass(frozen=True)
class SymmetricPeriodData:
    """``P = A/2 + iY``; stored as ``(A, Y)`` so ``conj(P) = A - P`` holds identically."""

    A: Matrix
    Y: Matrix

    def __post_init__(self):
        A, Y = self.A, self.Y
        if not A.is_square() or not A.is_integral():
            raise PeriodError("A must be a square integer matrix")
        if not A.is_symmetric():
            raise PeriodError("A is not symmetric")
        if Y.shape != A.shape:
            raise PeriodError(f"Y has shape {Y.shape}, expected {A.shape}")
        if not Y.is_symmetric():
            raise PeriodError("Y is not symmetric")
        if not leading_minors_positive(Y):
            raise PeriodError("Y is not positive definite")

    @property
    def size(self) -> int:
        return self.A.rows

    @property
    def real_part(self) -> Matrix:
        return self.A * Fraction(1, 2)

    @property
    def imag_part(self) -> Matrix:
        return self.Y

    def conjugate(self) -> tuple:
        """``(Re, Im)`` of ``conj(P)``."""
        return self.real_part, -self.Y

    def a_minus_p(self) -> tuple:
        return self.A - self.real_part, -self.Y

    def apply(self, v) -> tuple:
        """``(Re, Im)`` of ``P v`` for a rational vector ``v``."""
        col = Matrix([[Fraction(x)] for x in v], 1)
        return (self.real_part @ col).col(0), (self.Y @ col).col(0)


def make_symmetric_period(A: Matrix, Y: Matrix) -> SymmetricPeriodData:
    return SymmetricPeriodData(A, Y)


@dataclass(frozen=True)
class RealPartDescription:
    size: int
    A: Matrix
    representatives: tuple
    component_rank: int

    def __post_init__(self):
        s = self.size
        if self.component_rank != s:
            raise PeriodError("each component is a real torus of full dimension")
        if tuple([0] * s) not in self.representatives:
            raise PeriodError("zero vector missing from the representatives")
        if len(self.representatives) != 2 ** (s - rank_mod2(self.A)):
            raise PeriodError("component count disagrees with the mod-2 rank of A")

    @property
    def component_count(self) -> int:
        return len(self.representatives)

    def offsets(self) -> list:
        """``alpha = n/2`` for each representative ``n``."""
        return [tuple(Fraction(x, 2) for x in n) for n in self.representatives]

    def torus_offset(self, period: SymmetricPeriodData, n) -> tuple:
        """``P (n/2)`` as ``(Re, Im)``."""
        return period.apply([Fraction(x, 2) for x in n])

    def to_json(self) -> list:
        return [
            {"n": list(n), "offset": [_q(x) for x in off]}
            for n, off in zip(self.representatives, self.offsets())
        ]


def real_part_components(A: Matrix) -> RealPartDescription:
    if not A.is_square() or not A.is_integral():
        raise PeriodError("A must be a square integer matrix")
    if not A.is_symmetric():
        raise PeriodError("A is not symmetric")
    reps = tuple(tuple(v) for v in kernel_mod2(A))
    return RealPartDescription(A.rows, A, reps, A.rows)


# ---------------------------------------------------------------------------
# the Klein Jacobian


@dataclass(frozen=True)
class KleinJacobian:
    genus: int
    lattice: Lattice
    labels: tuple
    period_table: Matrix  # rows: free base classes, columns: normalized forms

    def __post_init__(self):
        if Lattice.from_rows(self.period_table.tolist()) != self.lattice:
            raise PeriodError("lattice is not spanned by the period table rows")

    @property
    def size(self) -> int:
        return self.genus - 1

    def to_json(self) -> dict:
        return {
            "genus": self.genus,
            "labels": list(self.labels),
            "period_table": self.period_table.to_json(),
            "lattice": self.lattice.to_json(),
        }


def covering_periods(spec: SurfaceSpec) -> Matrix:
    """``G[i, j]``: coefficient of the ``i``-th free base class in the image of ``gamma_j``."""
    cd = complex_double(spec)
    C = adapt_basis(cd.sigma_matrix, cd.intersection).C
    h = spec.double_genus
    return cd.pi_free @ C.submatrix(range(C.rows), range(h))


def klein_jacobian(spec: SurfaceSpec) -> KleinJacobian:
    """Periods of the forms dual to the ``gamma`` classes.

    ``int_{gamma_j} phi_k = delta_jk`` and ``pi(gamma_j) = sum_i G[i, j] e_i``
    give the table ``T = G^{-T}``; each ``pi(gamma_j)`` is twice a base
    class, so ``T`` has entries ``0`` and ``+-1/2``.
    """
    G = covering_periods(spec)
    T = G.inverse().T
    cd = complex_double(spec)
    labels = tuple(cd.basisB)
    return KleinJacobian(spec.genus, Lattice.from_rows(T.tolist()), labels, T)


@dataclass(frozen=True)
class IsomorphismCheck:
    holds: bool
    scaling: Matrix

    def __iter__(self):
        return iter((self.holds, self.scaling))

    def __bool__(self):
        return self.holds


def check_component_isomorphism(kj: KleinJacobian, rp: RealPartDescription) -> IsomorphismCheck:
    """``z -> -z/2`` carries each component ``R^s/Z^s`` onto ``R^s/Gamma``."""
    s = rp.size
    if kj.lattice.dim != s:
        raise PeriodError(f"dimension mismatch: lattice in R^{kj.lattice.dim}, components of dimension {s}")
    scaling = Matrix.identity(s) * Fraction(-1, 2)
    image = Lattice(Matrix.identity(s)).image(scaling)
    return IsomorphismCheck(lattice_equal(image, kj.lattice), scaling)


def _q(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def jacobian_report(spec: SurfaceSpec, A: Matrix | None = None, Y: Matrix | None = None) -> dict:
    """Per-genus summary; ``A`` defaults to the one produced by the adapted basis."""
    if A is None:
        cd = complex_double(spec)
        A = adapt_basis(cd.sigma_matrix, cd.intersection).A
    s = spec.genus - 1
    if A.shape != (s, s):
        raise PeriodError(f"A must be {s}x{s} for genus {spec.genus}")
    period = make_symmetric_period(A, Y if Y is not None else Matrix.identity(s))
    rp = real_part_components(period.A)
    kj = klein_jacobian(spec)
    iso = check_component_isomorphism(kj, rp)
    reps = []
    for n, off in zip(rp.representatives, rp.offsets()):
        re, im = rp.torus_offset(period, n)
        reps.append(
            {
                "n": list(n),
                "offset": [_q(x) for x in off],
                "torus_offset": {"re": [_q(x) for x in re], "im": [_q(x) for x in im]},
            }
        )
    return {
        "genus": spec.genus,
        "variant": spec.variant,
        "A": A.to_json(),
        "component_count": rp.component_count,
        "representatives": reps,
        "klein_lattice": kj.lattice.canonical.to_json(),
        "period_table": {"labels": list(kj.labels), "table": kj.period_table.to_json()},
        "isomorphism": {"holds": iso.holds, "scaling": iso.scaling.to_json()},
    }

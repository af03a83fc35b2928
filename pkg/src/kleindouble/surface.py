"""Surface presentations, the complex double and its homology matrices.

The complex double of a non-orientable surface is built combinatorially:
two copies of the fundamental polygon, side pairs glued straight across a
sheet when the pair is orientation compatible and crosswise when it is
twisted.  One side is eliminated between the two boundary relations,
which leaves a single polygon whose boundary is a product of commutators
in explicit loops ``alpha_j``, ``beta_j``.  Every homology matrix below is
obtained by abelianizing those loops and their images under the sheet
swap.

Basis orders
------------
odd genus ``g = 2n+1``:  ``alpha_1..alpha_2n, beta_1..beta_2n``
even genus ``g = 2n+2``: ``alpha_1, beta_1, alpha_2..alpha_2n+1, beta_2..beta_2n+1``

Homology of the base is reported in coordinates ``(t | f_1..f_{g-1})``
where ``t`` is the order-two class (stored mod 2) and ``f`` is a basis of
the free part.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .matrix import (
    Matrix,
    MatrixError,
    hermite_normal_form,
    integer_kernel,
    smith_normal_form,
    solve_integer_affine,
)
from .words import (
    GeneratorSymbol,
    Presentation,
    Word,
    abelianize,
    commutator,
    conjugate,
    letter,
    product,
    solve_relator,
    substitute,
)

VARIANTS = ("cc-dd", "gamma-delta")


class SurfaceError(ValueError):
    pass


class DerivationError(RuntimeError):
    """An internal consistency check of the double-cover derivation failed."""


@dataclass(frozen=True)
class SurfaceSpec:
    genus: int
    variant: str | None = None

    def __post_init__(self):
        if not isinstance(self.genus, int) or self.genus < 3:
            raise SurfaceError(f"non-orientable genus must be >= 3, got {self.genus!r}")
        if self.genus % 2 == 0:
            v = self.variant or "cc-dd"
            if v not in VARIANTS:
                raise SurfaceError(f"unknown even-genus variant {v!r}")
            object.__setattr__(self, "variant", v)
        else:
            object.__setattr__(self, "variant", None)

    @property
    def parity(self) -> str:
        return "odd" if self.genus % 2 else "even"

    @property
    def n(self) -> int:
        return (self.genus - 1) // 2 if self.genus % 2 else (self.genus - 2) // 2

    @property
    def double_genus(self) -> int:
        return self.genus - 1


def _sym(name, index=None, sheet=None):
    return GeneratorSymbol(name, index, sheet)


def _ab(n, sheet=None):
    a = [_sym("a", j, sheet) for j in range(1, n + 1)]
    b = [_sym("b", j, sheet) for j in range(1, n + 1)]
    return a, b


def _comm_product(a, b):
    return product(commutator(letter(x), letter(y)) for x, y in zip(a, b))


def standard_presentation(spec: SurfaceSpec) -> Presentation:
    n = spec.n
    a, b = _ab(n)
    X = _comm_product(a, b)
    if spec.parity == "odd":
        c = _sym("c")
        return Presentation((c, *a, *b), (letter(c) ** 2 * X,))
    if spec.variant == "cc-dd":
        c, d = _sym("c"), _sym("d")
        return Presentation((c, d, *a, *b), (letter(c) ** 2 * letter(d) ** 2 * X,))
    g, e = _sym("gamma"), _sym("delta")
    rel = letter(g) * letter(e) * letter(g, -1) * letter(e) * X
    return Presentation((g, e, *a, *b), (rel,))


# ---------------------------------------------------------------------------
# the two sheets


def sheet_relators(p: Presentation) -> tuple:
    """Boundary words of the two lifted polygons.

    A side pair with equal exponents is twisted: its first occurrence on
    sheet one is glued to its second occurrence on sheet two.  In the first
    polygon the first occurrence of a twisted side gets sheet 1 and the
    second gets sheet 2; the second polygon is the same with sheets swapped.
    """
    if len(p.relators) != 1:
        raise SurfaceError("expected a one-relator surface presentation")
    (r,) = p.relators
    exps: dict = {}
    for s, e in r:
        exps.setdefault(s, []).append(e)
    if any(len(v) != 2 for v in exps.values()) or set(exps) != set(p.generators):
        raise SurfaceError("relator is not a surface word")
    twisted = {s for s, v in exps.items() if v[0] == v[1]}

    def lift(start):
        seen: dict = {}
        out = []
        for s, e in r:
            k = seen.get(s, 0)
            seen[s] = k + 1
            if s in twisted:
                sheet = start if k == 0 else 3 - start
            else:
                sheet = start
            out.append((s.on_sheet(sheet), e))
        return Word(tuple(out))

    return lift(1), lift(2), frozenset(twisted)


def _loops_odd(n):
    c1 = letter(_sym("c", None, 1))
    a1, b1 = _ab(n, 1)
    a2, b2 = _ab(n, 2)
    alphas, betas = [], []
    for j in range(1, n + 1):
        k = n + 1 - j
        alphas.append(conjugate(c1, letter(b2[k - 1])))
        betas.append(conjugate(c1, letter(a2[k - 1])))
    for j in range(1, n + 1):
        alphas.append(letter(a1[j - 1]))
        betas.append(letter(b1[j - 1]))
    return alphas, betas


def _loops_ccdd(n):
    c1, c2 = letter(_sym("c", None, 1)), letter(_sym("c", None, 2))
    d1 = letter(_sym("d", None, 1))
    a1, b1 = _ab(n, 1)
    a2, b2 = _ab(n, 2)
    alphas, betas = [c1 * d1.inverse()], [d1 * c2]
    for j in range(1, n + 1):
        k = n + 1 - j
        alphas.append(conjugate(d1, letter(b2[k - 1])))
        betas.append(conjugate(d1, letter(a2[k - 1])))
    for j in range(1, n + 1):
        alphas.append(letter(a1[j - 1]))
        betas.append(letter(b1[j - 1]))
    return alphas, betas


def _loops_gamma_delta(n):
    g1, g2 = letter(_sym("gamma", None, 1)), letter(_sym("gamma", None, 2))
    e2 = letter(_sym("delta", None, 2))
    a1, b1 = _ab(n, 1)
    a2, b2 = _ab(n, 2)
    h = e2.inverse() * g1
    alphas, betas = [g1 * g2], [e2.inverse()]
    for j in range(1, n + 1):
        k = n + 1 - j
        alphas.append(conjugate(h, letter(b2[k - 1])))
        betas.append(conjugate(h, letter(a2[k - 1])))
    for j in range(1, n + 1):
        alphas.append(letter(a1[j - 1]))
        betas.append(letter(b1[j - 1]))
    return alphas, betas


# eliminated side (solved from the second polygon) and loop generators per family
_RECIPES = {
    "odd": (_sym("c", None, 2), _loops_odd),
    "cc-dd": (_sym("d", None, 2), _loops_ccdd),
    "gamma-delta": (_sym("delta", None, 1), _loops_gamma_delta),
}

# coordinate change Z^gens -> (torsion | free) and row labels, per family
def _base_coordinates(spec: SurfaceSpec):
    n = spec.n
    ab_labels = [f"a{j}" for j in range(1, n + 1)] + [f"b{j}" for j in range(1, n + 1)]
    m = 2 * n
    if spec.parity == "odd":
        Q = Matrix.identity(1 + m)
        return Q, ["c"], ab_labels
    head = Matrix([[0, 1], [1, -1]]) if spec.variant == "cc-dd" else Matrix([[0, 1], [1, 0]])
    Q = Matrix.block_diag([head, Matrix.identity(m)])
    if spec.variant == "cc-dd":
        return Q, ["c+d"], ["c"] + ab_labels
    return Q, ["delta"], ["gamma"] + ab_labels


def basis_labels(spec: SurfaceSpec) -> list:
    """Names of the ordered symplectic basis of the double."""
    h = spec.double_genus
    if spec.parity == "odd":
        return [f"alpha{j}" for j in range(1, h + 1)] + [f"beta{j}" for j in range(1, h + 1)]
    return ["alpha1", "beta1"] + [f"alpha{j}" for j in range(2, h + 1)] + [f"beta{j}" for j in range(2, h + 1)]


def _basis_order(spec: SurfaceSpec) -> list:
    """Positions (into alphas + betas) of the ordered basis."""
    h = spec.double_genus
    if spec.parity == "odd":
        return list(range(2 * h))
    return [0, h] + list(range(1, h)) + list(range(h + 1, 2 * h))


@dataclass(frozen=True)
class CoveringData:
    spec: SurfaceSpec
    base: Presentation
    sheets: tuple
    twisted: frozenset
    eliminated: GeneratorSymbol
    eliminated_value: Word
    glued_relator: Word
    edges: tuple
    double: Presentation
    loops: dict
    sigma_words: dict
    basisB: tuple
    torsion_labels: tuple
    basisBc: tuple
    pi_matrix: Matrix
    sigma_matrix: Matrix
    intersection: Matrix
    _loop_matrix: Matrix = field(repr=False, compare=False, default=None)

    @property
    def torsion_rows(self) -> int:
        return len(self.torsion_labels)

    @property
    def pi_free(self) -> Matrix:
        """Rows of the projection on the free part of the base homology."""
        t = self.torsion_rows
        return self.pi_matrix.submatrix(range(t, self.pi_matrix.rows), range(self.pi_matrix.cols))

    def reduce_base(self, M: Matrix) -> Matrix:
        """Reduce torsion coordinates of a matrix with base-homology rows mod 2."""
        t = self.torsion_rows
        return Matrix([[x % 2 for x in r] if i < t else r for i, r in enumerate(M.tolist())], M.cols)

    def apply_sigma(self, w: Word) -> Word:
        """Image of an edge word under the sheet swap, eliminated side rewritten."""
        swapped = w.map_letters(lambda s: s.swap_sheet())
        return substitute(swapped, self.eliminated, self.eliminated_value)

    def class_of(self, w: Word) -> tuple:
        """Coordinates in the ordered basis of the homology class of a closed edge word."""
        v = abelianize(w, self.edges)
        sol = solve_integer_affine(self._loop_matrix, list(v))
        if sol is None:
            raise DerivationError(f"{w} is not an integral combination of the basis loops")
        x0, N = sol
        if N.cols:
            raise DerivationError("basis loops are not independent in homology")
        return tuple(x0)


def _check_sheet_swap(r1: Word, r2: Word):
    swap = lambda s: s.swap_sheet()  # noqa: E731
    if r1.map_letters(swap) != r2 or r2.map_letters(swap) != r1:
        raise DerivationError("sheet swap does not exchange the two boundary relations")


@lru_cache(maxsize=None)
def complex_double(spec: SurfaceSpec) -> CoveringData:
    base = standard_presentation(spec)
    r1, r2, twisted = sheet_relators(base)
    _check_sheet_swap(r1, r2)
    family = "odd" if spec.parity == "odd" else spec.variant
    x, loops_fn = _RECIPES[family]
    value = solve_relator(r2, x)
    glued = substitute(r1, x, value)

    alphas, betas = loops_fn(spec.n)
    h = spec.double_genus
    if len(alphas) != h:
        raise DerivationError("wrong number of loop generators")
    if product(commutator(a, b) for a, b in zip(alphas, betas)) != glued:
        raise DerivationError("glued relator is not the commutator product of the loops")

    alpha_syms = [_sym("alpha", j) for j in range(1, h + 1)]
    beta_syms = [_sym("beta", j) for j in range(1, h + 1)]
    order = _basis_order(spec)
    raw_syms = alpha_syms + beta_syms
    raw_words = alphas + betas
    basis_syms = tuple(raw_syms[k] for k in order)
    loop_words = {s: raw_words[k] for s, k in zip(basis_syms, order)}
    double = Presentation(
        tuple(basis_syms),
        (_comm_product(alpha_syms, beta_syms),),
    )

    edges = sorted({s for w in (r1, r2) for s, _ in w} - {x})
    edges = tuple(edges)
    L = Matrix.from_columns([abelianize(loop_words[s], edges) for s in basis_syms])

    base_gens = base.generators
    base_vecs = [abelianize(loop_words[s].map_letters(lambda y: y.base()), base_gens) for s in basis_syms]
    Q, tors, free = _base_coordinates(spec)
    pi_raw = Q @ Matrix.from_columns(base_vecs)

    cd = CoveringData(
        spec=spec,
        base=base,
        sheets=(r1, r2),
        twisted=twisted,
        eliminated=x,
        eliminated_value=value,
        glued_relator=glued,
        edges=edges,
        double=double,
        loops=loop_words,
        sigma_words={},
        basisB=tuple(free),
        torsion_labels=tuple(tors),
        basisBc=basis_syms,
        pi_matrix=Matrix.zeros(1, 1),
        sigma_matrix=Matrix.zeros(1, 1),
        intersection=Matrix.zeros(1, 1),
        _loop_matrix=L,
    )
    if L.rank() != 2 * h:
        raise DerivationError("basis loops are dependent in the edge chain group")
    sigma_words = {s: cd.apply_sigma(loop_words[s]) for s in basis_syms}
    sigma = Matrix.from_columns([cd.class_of(sigma_words[s]) for s in basis_syms])
    J = intersection_from_relator(double)
    object.__setattr__(cd, "sigma_words", sigma_words)
    object.__setattr__(cd, "sigma_matrix", sigma)
    object.__setattr__(cd, "intersection", J)
    object.__setattr__(cd, "pi_matrix", cd.reduce_base(pi_raw))
    return cd


def intersection_from_relator(p: Presentation) -> Matrix:
    """Intersection matrix of a surface with relator ``prod [x_j, y_j]``.

    Each commutator ``[x, y]`` contributes ``x . y = 1``, ``y . x = -1``;
    distinct commutators are disjoint.  The matrix is indexed by
    ``p.generators``.
    """
    (r,) = p.relators
    L = r.letters
    if len(L) % 4:
        raise DerivationError("relator is not a product of commutators")
    pos = {s: k for k, s in enumerate(p.generators)}
    J = [[0] * len(pos) for _ in pos]
    used = set()
    for k in range(0, len(L), 4):
        (x, e1), (y, e2), (x2, e3), (y2, e4) = L[k:k + 4]
        if (e1, e2, e3, e4) != (1, 1, -1, -1) or x != x2 or y != y2 or x == y:
            raise DerivationError("relator is not a product of commutators of generators")
        if x in used or y in used:
            raise DerivationError("generator used in two commutators")
        used |= {x, y}
        J[pos[x]][pos[y]] = 1
        J[pos[y]][pos[x]] = -1
    if used != set(pos):
        raise DerivationError("some generator does not occur in the relator")
    return Matrix(J)


def intersection_form(spec: SurfaceSpec) -> Matrix:
    return complex_double(spec).intersection


def standard_symplectic(h: int) -> Matrix:
    I, Z = Matrix.identity(h), Matrix.zeros(h, h)
    return Matrix.block([[Z, I], [-I, Z]])


def homology_invariants(p: Presentation) -> tuple:
    """``(free rank, nontrivial invariant factors)`` of the abelianization."""
    n = len(p.generators)
    if not p.relators:
        return n, []
    R = Matrix(p.relation_matrix(), n)
    D = smith_normal_form(R).D
    diag = [D[i, i] for i in range(min(D.shape)) if D[i, i]]
    return n - len(diag), [d for d in diag if d > 1]


def is_symplectic_change(C: Matrix, J: Matrix, target: Matrix | None = None) -> bool:
    """``C^t J C == target`` (``target`` defaults to ``J``)."""
    if not (C.is_square() and J.is_square()) or C.rows != J.rows:
        raise MatrixError(f"size mismatch: C {C.shape}, J {J.shape}")
    return C.T @ J @ C == (J if target is None else target)


# ---------------------------------------------------------------------------
# adapted symplectic bases


class AdaptError(RuntimeError):
    pass


@dataclass(frozen=True)
class AdaptedBasis:
    C: Matrix
    A: Matrix
    method: str

    def __iter__(self):  # (C, A) unpacking
        return iter((self.C, self.A))


def _pairing(J: Matrix):
    """Pairs ``(i, j)`` with ``J[i, j] = 1`` covering every index, or None."""
    n = J.rows
    pairs = []
    seen = set()
    for i in range(n):
        nz = [(j, J[i, j]) for j in range(n) if J[i, j]]
        if len(nz) != 1:
            return None
        j, v = nz[0]
        if v == 1:
            if J[j, i] != -1:
                return None
            pairs.append((i, j))
            seen |= {i, j}
    if len(seen) != n:
        return None
    return pairs


def _pattern_columns(sigma: Matrix, J: Matrix):
    pairs = _pairing(J)
    if pairs is None:
        return None
    n = J.rows
    col = lambda j: sigma.col(j)  # noqa: E731

    def unit(i, k=1):
        v = [0] * n
        v[i] = k
        return v

    def add(*vs):
        return [sum(x) for x in zip(*vs)]

    alpha_of = {p: a for p, (a, _) in enumerate(pairs)}
    gam: dict = {}
    dlt: dict = {}
    for p, (a, b) in enumerate(pairs):
        if p in gam:
            continue
        sa, sb = list(col(a)), list(col(b))
        if sb == unit(b, -1) and all(x == 0 for i, x in enumerate(sa) if i not in (a, b)) and sa[a] == 1:
            k = sa[b]
            if k % 2:
                return None
            gam[p] = add(unit(a), unit(b, k // 2))
            dlt[p] = add(unit(a), unit(b, k // 2 + 1))
            continue
        # sigma(alpha_p) = beta_q and sigma(beta_p) = alpha_q
        q_beta = [i for i, x in enumerate(sa) if x]
        if len(q_beta) != 1 or sa[q_beta[0]] != 1:
            return None
        bq = q_beta[0]
        q = next((r for r, (_, bb) in enumerate(pairs) if bb == bq), None)
        if q is None or q == p or sb != unit(alpha_of[q]):
            return None
        aq = alpha_of[q]
        if list(col(aq)) != unit(b) or list(col(bq)) != unit(a):
            return None
        gam[p] = [-x for x in add(unit(aq), unit(b))]
        gam[q] = [-x for x in add(unit(a), unit(bq))]
        dlt[p] = add(unit(a), unit(aq), unit(b))
        dlt[q] = add(unit(a), unit(aq), unit(bq))
    order = range(len(pairs))
    return [gam[p] for p in order] + [dlt[p] for p in order]


def _check_adapted(sigma: Matrix, J: Matrix, C: Matrix):
    h = J.rows // 2
    if not C.is_integral() or C.det() not in (1, -1):
        return None
    if not is_symplectic_change(C, J, standard_symplectic(h)):
        return None
    S = C.inverse() @ sigma @ C
    if not S.is_integral():
        return None
    top = S.submatrix(range(h), range(h))
    low = S.submatrix(range(h, 2 * h), range(h))
    br = S.submatrix(range(h, 2 * h), range(h, 2 * h))
    if top != Matrix.identity(h) or not low.is_zero() or br != -Matrix.identity(h):
        return None
    A = S.submatrix(range(h), range(h, 2 * h))
    if not A.is_symmetric():
        return None
    return A


def adapt_basis_general(sigma: Matrix, J: Matrix) -> AdaptedBasis:
    """Adapted basis from the fixed lattice of ``sigma``.

    The fixed lattice is Lagrangian and primitive; a dual isotropic
    complement is found by solving ``G^t J D = I`` over the integers and
    correcting ``D`` by a multiple of ``G``.
    """
    n = J.rows
    h = n // 2
    G = integer_kernel(sigma - Matrix.identity(n))
    if G.cols != h:
        raise AdaptError(f"fixed lattice has rank {G.cols}, expected {h}")
    G = hermite_normal_form(G).D  # tidier generators, same lattice
    G = G.submatrix(range(n), range(h))
    pairing = G.T @ J
    cols = []
    for k in range(h):
        rhs = [1 if i == k else 0 for i in range(h)]
        sol = solve_integer_affine(pairing, rhs)
        if sol is None:
            raise AdaptError("fixed lattice is not primitive")
        cols.append(sol[0])
    D = Matrix.from_columns(cols)
    W = D.T @ J @ D
    X = Matrix([[W[i, j] if j > i else 0 for j in range(h)] for i in range(h)])
    D = D + G @ X
    C = Matrix.block([[G, D]])
    A = _check_adapted(sigma, J, C)
    if A is None:
        raise AdaptError("general construction failed verification")
    return AdaptedBasis(C, A, "fixed-lattice")


def adapt_basis(sigma: Matrix, J: Matrix) -> AdaptedBasis:
    """Symplectic change of basis ``C`` putting ``sigma`` in the form ``[[I, A], [0, -I]]``.

    ``C`` maps into a basis whose intersection matrix is the standard
    ``[[0, I], [-I, 0]]``.  The recognised pair patterns of the double are
    tried first; anything else goes through :func:`adapt_basis_general`.
    """
    n = sigma.rows
    if sigma @ sigma != Matrix.identity(n) or sigma.T @ J @ sigma != -J:
        raise AdaptError("sigma is not an anti-symplectic involution")
    cols = _pattern_columns(sigma, J)
    if cols is not None:
        C = Matrix.from_columns(cols)
        A = _check_adapted(sigma, J, C)
        if A is not None:
            return AdaptedBasis(C, A, "pattern")
    return adapt_basis_general(sigma, J)

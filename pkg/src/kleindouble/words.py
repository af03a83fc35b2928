"""Free-group word calculus.

Words are immutable and always stored freely reduced.  Generators carry an
optional index (``a1``) and an optional sheet tag (``a1_2``) so the two
copies of a polygon side in a double cover can be told apart.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence


class WordError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class GeneratorSymbol:
    name: str
    index: int | None = None
    sheet: int | None = None

    def __post_init__(self):
        if not self.name:
            raise WordError("generator names must be nonempty")
        if self.sheet not in (None, 1, 2):
            raise WordError(f"sheet must be 1 or 2, got {self.sheet!r}")
        if self.index is not None and self.index < 1:
            raise WordError(f"index must be positive, got {self.index!r}")

    def __str__(self):
        s = self.name
        if self.index is not None:
            s += str(self.index)
        if self.sheet is not None:
            s += f"_{self.sheet}"
        return s

    def on_sheet(self, sheet: int | None) -> "GeneratorSymbol":
        return GeneratorSymbol(self.name, self.index, sheet)

    def base(self) -> "GeneratorSymbol":
        return GeneratorSymbol(self.name, self.index)

    def swap_sheet(self) -> "GeneratorSymbol":
        if self.sheet is None:
            return self
        return self.on_sheet(3 - self.sheet)


def gen(text: str) -> GeneratorSymbol:
    """Build a symbol from its printed form, e.g. ``gen("a2_1")``."""
    m = _IDENT.fullmatch(text)
    if m is None:
        raise WordError(f"malformed generator {text!r}")
    name, index, sheet = m.group(1), m.group(2), m.group(3)
    return GeneratorSymbol(
        name, int(index) if index else None, int(sheet) if sheet else None
    )


Letter = tuple  # (GeneratorSymbol, +1 | -1)


def _free_reduce(letters: Iterable[Letter]) -> tuple:
    stack: list = []
    for sym, e in letters:
        if e not in (1, -1):
            raise WordError(f"exponent must be +1 or -1, got {e!r}")
        if stack and stack[-1][0] == sym and stack[-1][1] == -e:
            stack.pop()
        else:
            stack.append((sym, e))
    return tuple(stack)


@dataclass(frozen=True)
class Word:
    letters: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "letters", _free_reduce(self.letters))

    @classmethod
    def of(cls, *syms: GeneratorSymbol) -> "Word":
        return cls(tuple((s, 1) for s in syms))

    def __len__(self):
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(tuple((s, -e) for s, e in reversed(self.letters)))

    def __invert__(self) -> "Word":
        return self.inverse()

    def __pow__(self, k: int) -> "Word":
        base = self if k >= 0 else self.inverse()
        out = Word()
        for _ in range(abs(k)):
            out = out * base
        return out

    def is_identity(self) -> bool:
        return not self.letters

    def generators(self) -> set:
        return {s for s, _ in self.letters}

    def occurrences(self, x: GeneratorSymbol) -> int:
        return sum(1 for s, _ in self.letters if s == x)

    def map_letters(self, f) -> "Word":
        """Apply a symbol map letterwise (``f`` returns a symbol)."""
        return Word(tuple((f(s), e) for s, e in self.letters))

    def __str__(self):
        if not self.letters:
            return "1"
        return " ".join(str(s) if e == 1 else f"{s}^-1" for s, e in self.letters)

    def __repr__(self):
        return f"Word({str(self)!r})"

    def to_json(self) -> list:
        return [{"gen": str(s), "exp": e} for s, e in self.letters]

    @classmethod
    def from_json(cls, data: Sequence[dict]) -> "Word":
        return cls(tuple((gen(d["gen"]), int(d["exp"])) for d in data))


IDENTITY = Word()


def letter(sym: GeneratorSymbol, e: int = 1) -> Word:
    return Word(((sym, e),))


def commutator(u: Word, v: Word) -> Word:
    return u * v * u.inverse() * v.inverse()


def product(words: Iterable[Word]) -> Word:
    out = IDENTITY
    for w in words:
        out = out * w
    return out


def conjugate(h: Word, w: Word) -> Word:
    """``h w h^-1``"""
    return h * w * h.inverse()


def reduce(w: Word | Iterable[Letter]) -> Word:
    if isinstance(w, Word):
        return Word(w.letters)
    return Word(tuple(w))


def solve_relator(r: Word, x: GeneratorSymbol) -> Word:
    """Solve ``r = 1`` for the generator ``x``.

    ``x`` must occur exactly once in ``r``.  Writing ``r = u x^e v`` the
    result is ``u^-1 v^-1`` when ``e = +1`` and ``v u`` when ``e = -1``.
    """
    r = reduce(r)
    hits = [k for k, (s, _) in enumerate(r.letters) if s == x]
    if not hits:
        raise WordError(f"{x} does not occur in {r}")
    if len(hits) > 1:
        raise WordError(f"{x} occurs {len(hits)} times in {r}")
    k = hits[0]
    u, (_, e), v = Word(r.letters[:k]), r.letters[k], Word(r.letters[k + 1:])
    if e == 1:
        return u.inverse() * v.inverse()
    return v * u


def substitute(w: Word, x: GeneratorSymbol, replacement: Word) -> Word:
    if x in replacement.generators():
        raise WordError(f"replacement {replacement} contains {x}")
    out: list = []
    inv = replacement.inverse()
    for s, e in w.letters:
        if s == x:
            out.extend((replacement if e == 1 else inv).letters)
        else:
            out.append((s, e))
    return Word(tuple(out))


def substitute_many(w: Word, mapping: dict) -> Word:
    """Simultaneous substitution ``s -> mapping[s]`` for every mapped symbol."""
    out: list = []
    for s, e in w.letters:
        if s in mapping:
            rep = mapping[s]
            out.extend((rep if e == 1 else rep.inverse()).letters)
        else:
            out.append((s, e))
    return Word(tuple(out))


def abelianize(w: Word, order: Sequence[GeneratorSymbol]) -> tuple:
    pos = {s: k for k, s in enumerate(order)}
    vec = [0] * len(order)
    for s, e in w.letters:
        if s not in pos:
            raise WordError(f"unknown generator {s}")
        vec[pos[s]] += e
    return tuple(vec)


# ---------------------------------------------------------------------------
# parsing

_IDENT = re.compile(r"([a-z]+)([0-9]*)(?:_([12]))?")
_TOKEN = re.compile(
    r"\s*(?:(?P<ident>[a-z]+[0-9]*(?:_[12])?)|(?P<pow>\^\s*-?[0-9]+)"
    r"|(?P<punct>[\[\],()])|(?P<bad>\S))"
)


def _tokenize(text: str) -> list:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # trailing whitespace
            break
        pos = m.end()
        if m.group("bad") is not None:
            raise WordError(f"malformed token {m.group('bad')!r} at {m.start('bad')}")
        for kind in ("ident", "pow", "punct"):
            if m.group(kind) is not None:
                toks.append((kind, m.group(kind)))
                break
    return toks


class _Parser:
    def __init__(self, text: str, lookup: dict):
        self.toks = _tokenize(text)
        self.k = 0
        self.lookup = lookup

    def peek(self):
        return self.toks[self.k] if self.k < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.k += 1
        return tok

    def expect(self, value):
        kind, v = self.take()
        if v != value:
            raise WordError(f"expected {value!r}, got {v!r}")

    def word(self, closers=()) -> Word:
        out = IDENTITY
        while True:
            kind, v = self.peek()
            if kind is None or v in closers:
                return out
            if v in ("]", ",", ")"):
                raise WordError(f"unbalanced bracket: unexpected {v!r}")
            out = out * self.factor()

    def factor(self) -> Word:
        kind, v = self.take()
        if kind == "ident":
            if v not in self.lookup:
                raise WordError(f"unknown generator {v!r}")
            base = letter(self.lookup[v])
        elif v == "[":
            u = self.word(closers=(",",))
            if self.peek()[1] != ",":
                raise WordError("unbalanced bracket: commutator missing ','")
            self.take()
            w = self.word(closers=("]",))
            if self.peek()[1] != "]":
                raise WordError("unbalanced bracket: missing ']'")
            self.take()
            base = commutator(u, w)
        elif v == "(":
            base = self.word(closers=(")",))
            if self.peek()[1] != ")":
                raise WordError("unbalanced bracket: missing ')'")
            self.take()
        else:
            raise WordError(f"malformed token {v!r}")
        kind, v = self.peek()
        if kind == "pow":
            self.take()
            base = base ** int(v[1:].strip())
        return base


def parse_word(text: str, context) -> Word:
    """Parse ``text`` against the generators of ``context``.

    ``context`` is a :class:`Presentation` or any iterable of symbols.
    Accepts ``x``, ``x^-1``, ``x^k``, ``[u,v]`` and ``(u)^k``.
    """
    gens = context.generators if isinstance(context, Presentation) else context
    lookup = {str(s): s for s in gens}
    p = _Parser(text, lookup)
    w = p.word()
    if p.k < len(p.toks):  # pragma: no cover - word() consumes or raises
        raise WordError(f"trailing input at token {p.k}")
    return w


@dataclass(frozen=True)
class Presentation:
    generators: tuple
    relators: tuple

    def __post_init__(self):
        gens = tuple(self.generators)
        rels = tuple(reduce(r) for r in self.relators)
        if len(set(gens)) != len(gens):
            raise WordError("duplicate generators in presentation")
        known = set(gens)
        for r in rels:
            extra = r.generators() - known
            if extra:
                raise WordError(f"relator uses unknown generators {sorted(map(str, extra))}")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "relators", rels)

    def relation_matrix(self) -> list:
        """Abelianized relators, one row per relator."""
        return [list(abelianize(r, self.generators)) for r in self.relators]

    def __str__(self):
        gens = ", ".join(map(str, self.generators))
        rels = "; ".join(map(str, self.relators))
        return f"< {gens} | {rels} >"

    def to_json(self) -> dict:
        return {
            "generators": [str(s) for s in self.generators],
            "relators": [r.to_json() for r in self.relators],
        }

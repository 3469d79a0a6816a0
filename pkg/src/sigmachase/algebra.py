"""Finite monoids, semirings and quandles given by Cayley tables."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as K


class Kind(enum.Enum):
    MONOID = "monoid"
    SEMIRING = "semiring"
    QUANDLE = "quandle"

    @property
    def op_names(self) -> tuple[str, ...]:
        return {"monoid": ("mul",), "semiring": ("add", "mul"), "quandle": ("lhd",)}[self.value]

    @property
    def constant_name(self) -> str | None:
        return {"monoid": "unit", "semiring": "zero", "quandle": None}[self.value]

    @property
    def pointed(self) -> bool:
        return self is not Kind.QUANDLE


class AlgebraError(Exception):
    """Raised when an input breaks a contract; ``code`` names the failure."""

    def __init__(self, code: str, message: str = "", witness: tuple = ()):
        self.code = code
        self.message = message
        self.witness = tuple(witness)
        super().__init__(f"{code}: {message}" if message else code)


def _freeze(t) -> np.ndarray:
    a = np.array(t, dtype=np.int64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FiniteAlgebra:
    """A finite algebra of one of the three kinds.

    ``tables`` holds the stored operations in ``kind.op_names`` order. For
    quandles only ``lhd`` is stored; ``lhdi`` is derived on demand.
    Element identity is by index, ``names`` are labels only.
    """

    kind: Kind
    names: tuple[str, ...]
    tables: tuple[np.ndarray, ...]
    constant: int | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tables", tuple(_freeze(t) for t in self.tables))
        object.__setattr__(self, "names", tuple(str(x) for x in self.names))

    @property
    def order(self) -> int:
        return len(self.names)

    def __len__(self) -> int:
        return self.order

    def table(self, name: str) -> np.ndarray:
        if name == "lhdi" and self.kind is Kind.QUANDLE:
            return self.lhdi
        return self.tables[self.kind.op_names.index(name)]

    @property
    def mul(self) -> np.ndarray:
        return self.table("mul")

    @property
    def add(self) -> np.ndarray:
        return self.table("add")

    @property
    def lhd(self) -> np.ndarray:
        return self.tables[0]

    @property
    def lhdi(self) -> np.ndarray:
        if "lhdi" not in self._cache:
            inv, bad = K.invert_columns(self.tables[0])
            if bad >= 0:
                raise AlgebraError("AXIOM_VIOLATION", "A2 (right invertibility)", (self.names[bad],))
            self._cache["lhdi"] = _freeze(inv)
        return self._cache["lhdi"]

    @property
    def point_op(self) -> np.ndarray:
        """The binary operation the point classes are phrased in.

        ``mul`` for monoids, the Jonsson-Tarski reduct ``add`` for
        semirings, ``lhd`` for quandles.
        """
        if self.kind is Kind.SEMIRING:
            return self.add
        return self.tables[0]

    @property
    def ops(self) -> np.ndarray:
        """All operations stacked as a ``(k, n, n)`` array, derived ones included."""
        if "ops" not in self._cache:
            tabs = list(self.tables)
            if self.kind is Kind.QUANDLE:
                tabs.append(self.lhdi)
            arr = np.ascontiguousarray(np.stack(tabs))
            arr.setflags(write=False)
            self._cache["ops"] = arr
        return self._cache["ops"]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise AlgebraError("SHAPE_ERROR", f"unknown element {name!r}") from None

    def __eq__(self, other):
        if not isinstance(other, FiniteAlgebra):
            return NotImplemented
        return (
            self.kind is other.kind
            and self.names == other.names
            and self.constant == other.constant
            and all(np.array_equal(a, b) for a, b in zip(self.tables, other.tables))
        )

    def same_structure(self, other: "FiniteAlgebra") -> bool:
        """Equal up to element names."""
        return (
            self.kind is other.kind
            and self.order == other.order
            and self.constant == other.constant
            and all(np.array_equal(a, b) for a, b in zip(self.tables, other.tables))
        )

    def __hash__(self):
        return hash((self.kind, self.names, self.constant, tuple(t.tobytes() for t in self.tables)))

    def __repr__(self):
        return f"FiniteAlgebra({self.kind.value}, order={self.order})"

    def renamed(self, names: Sequence[str]) -> "FiniteAlgebra":
        return FiniteAlgebra(self.kind, tuple(names), self.tables, self.constant)


# --- axioms -----------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple[int, ...]

    def describe(self, names: Sequence[str] | None = None) -> str:
        w = [names[i] for i in self.witness] if names else list(self.witness)
        return f"{self.axiom} {' '.join(map(str, w))}".strip()


def _first_identity_failure(t: np.ndarray, e: int) -> int:
    bad = np.nonzero((t[e, :] != np.arange(len(t))) | (t[:, e] != np.arange(len(t))))[0]
    return int(bad[0]) if len(bad) else -1


def check_axioms(kind: Kind, tables: Sequence[np.ndarray], constant: int | None) -> Violation | None:
    """First violated axiom of ``kind`` with a witness, or ``None``.

    Tables must already be square with in-range entries.
    """
    if kind is Kind.MONOID:
        (t,) = tables
        bad = _first_identity_failure(t, constant)
        if bad >= 0:
            return Violation("identity", (constant, bad) if bad != constant else (constant,))
        a, b, c = K.first_nonassociative(t)
        if a >= 0:
            return Violation("associativity", (a, b, c))
        return None
    if kind is Kind.SEMIRING:
        add, mul = tables
        bad = _first_identity_failure(add, constant)
        if bad >= 0:
            return Violation("additive identity", (constant, bad) if bad != constant else (constant,))
        a, b = K.first_noncommuting(add)
        if a >= 0:
            return Violation("additive commutativity", (a, b))
        a, b, c = K.first_nonassociative(add)
        if a >= 0:
            return Violation("additive associativity", (a, b, c))
        a, b, c = K.first_nonassociative(mul)
        if a >= 0:
            return Violation("multiplicative associativity", (a, b, c))
        side, a, b, c = K.first_nondistributive(add, mul)
        if side >= 0:
            return Violation("left distributivity" if side == 0 else "right distributivity", (a, b, c))
        z = constant
        bad = np.nonzero((mul[z, :] != z) | (mul[:, z] != z))[0]
        if len(bad):
            return Violation("absorbing zero", (z, int(bad[0])))
        return None
    (t,) = tables
    diag = np.nonzero(np.diag(t) != np.arange(len(t)))[0]
    if len(diag):
        return Violation("A1", (int(diag[0]),))
    inv, bad = K.invert_columns(t)
    if bad >= 0:
        return Violation("A2", (int(bad),))
    a, b, c = K.first_non_selfdistributive(t)
    if a >= 0:
        return Violation("A3", (a, b, c))
    a, b, c = K.first_non_selfdistributive(inv)
    if a >= 0:
        return Violation("A3 (inverse)", (a, b, c))
    return None


def _as_tables(kind: Kind, tables) -> tuple[np.ndarray, ...]:
    if isinstance(tables, np.ndarray) and tables.ndim == 2:
        tables = (tables,)
    tabs = tuple(np.asarray(t) for t in tables)
    want = len(kind.op_names)
    if len(tabs) != want:
        raise AlgebraError("SHAPE_ERROR", f"{kind.value} needs {want} table(s), got {len(tabs)}")
    n = None
    for t in tabs:
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise AlgebraError("SHAPE_ERROR", f"table of shape {t.shape} is not square")
        if n is None:
            n = t.shape[0]
        elif t.shape[0] != n:
            raise AlgebraError("SHAPE_ERROR", "tables of different orders")
        if not np.issubdtype(t.dtype, np.integer):
            raise AlgebraError("SHAPE_ERROR", "table entries must be integers")
        if t.min() < 0 or t.max() >= n:
            raise AlgebraError("SHAPE_ERROR", "table entry out of range")
    return tuple(np.ascontiguousarray(t, dtype=np.int64) for t in tabs)


def validate_algebra(
    kind: Kind,
    tables,
    constant: int | None = None,
    names: Sequence[str] | None = None,
) -> FiniteAlgebra:
    """Build an algebra, raising ``AXIOM_VIOLATION`` or ``SHAPE_ERROR`` on bad input."""
    tabs = _as_tables(kind, tables)
    n = tabs[0].shape[0]
    if kind.pointed:
        if constant is None or not 0 <= constant < n:
            raise AlgebraError("SHAPE_ERROR", f"{kind.constant_name} missing or out of range")
    elif constant is not None:
        raise AlgebraError("SHAPE_ERROR", "quandles carry no constant")
    if names is None:
        names = [str(i) for i in range(n)]
    if len(names) != n or len(set(names)) != n:
        raise AlgebraError("SHAPE_ERROR", "names must be n distinct labels")
    bad = check_axioms(kind, tabs, constant)
    if bad is not None:
        raise AlgebraError("AXIOM_VIOLATION", bad.describe(names), tuple(names[i] for i in bad.witness))
    return FiniteAlgebra(kind, tuple(names), tabs, constant)


# --- standard examples ------------------------------------------------------


def cyclic_group(n: int) -> FiniteAlgebra:
    i = np.arange(n)
    return FiniteAlgebra(Kind.MONOID, tuple(map(str, range(n))), ((i[:, None] + i[None, :]) % n,), 0)


def two_element_semilattice() -> FiniteAlgebra:
    """The monoid ``{e, a}`` with ``a*a = a``."""
    return FiniteAlgebra(Kind.MONOID, ("e", "a"), (np.array([[0, 1], [1, 1]]),), 0)


def chain_semilattice(names: Sequence[str] = ("e", "k", "a")) -> FiniteAlgebra:
    """Meet semilattice on a chain, first name the top (the unit)."""
    n = len(names)
    i = np.arange(n)
    return FiniteAlgebra(Kind.MONOID, tuple(names), (np.maximum(i[:, None], i[None, :]),), 0)


def dihedral_quandle(n: int) -> FiniteAlgebra:
    """``a < b = 2b - a mod n``."""
    i = np.arange(n)
    return FiniteAlgebra(Kind.QUANDLE, tuple(map(str, range(n))), ((2 * i[None, :] - i[:, None]) % n,))


def trivial_quandle(n: int) -> FiniteAlgebra:
    i = np.arange(n)
    return FiniteAlgebra(Kind.QUANDLE, tuple(map(str, range(n))), (np.repeat(i[:, None], n, axis=1),))


def dihedral_group(n: int) -> FiniteAlgebra:
    """Symmetries of the n-gon as ``r^i s^j`` with index ``i + n*j``."""
    els = [(i, j) for j in range(2) for i in range(n)]

    def mul(x, y):
        (i1, j1), (i2, j2) = x, y
        return ((i1 + (-1) ** j1 * i2) % n, (j1 + j2) % 2)

    idx = {e: k for k, e in enumerate(els)}
    t = np.array([[idx[mul(x, y)] for y in els] for x in els])
    names = [("r%d" % i if i else "e") if not j else ("r%ds" % i if i else "s") for i, j in els]
    return FiniteAlgebra(Kind.MONOID, tuple(names), (t,), 0)


def terminal(kind: Kind) -> FiniteAlgebra:
    zero = np.zeros((1, 1), dtype=np.int64)
    name = {"monoid": "e", "semiring": "0", "quandle": "*"}[kind.value]
    return FiniteAlgebra(kind, (name,), tuple(zero for _ in kind.op_names), 0 if kind.pointed else None)


# --- homomorphisms ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Homomorphism:
    dom: FiniteAlgebra
    cod: FiniteAlgebra
    map: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "map", _freeze(self.map))

    def __call__(self, x: int) -> int:
        return int(self.map[x])

    def __eq__(self, other):
        if not isinstance(other, Homomorphism):
            return NotImplemented
        return self.dom == other.dom and self.cod == other.cod and np.array_equal(self.map, other.map)

    def __hash__(self):
        return hash((self.dom, self.cod, self.map.tobytes()))

    def __repr__(self):
        return f"Homomorphism({self.dom.order}->{self.cod.order}, {self.map.tolist()})"

    @property
    def is_surjective(self) -> bool:
        return len(np.unique(self.map)) == self.cod.order

    @property
    def is_injective(self) -> bool:
        return len(np.unique(self.map)) == self.dom.order

    @property
    def is_bijective(self) -> bool:
        return self.is_surjective and self.is_injective

    def image(self) -> np.ndarray:
        return np.unique(self.map)

    def preimage(self, y: int) -> np.ndarray:
        return np.nonzero(self.map == y)[0]


def first_unpreserved(dom: FiniteAlgebra, cod: FiniteAlgebra, m: np.ndarray) -> tuple | None:
    """``(op, a, b)`` for the first product ``m`` fails to preserve, or a constant clash."""
    for name, s, t in zip(dom.kind.op_names, dom.tables, cod.tables):
        a, b = K.first_unpreserved(s, t, m)
        if a >= 0:
            return (name, a, b)
    if dom.kind.pointed and m[dom.constant] != cod.constant:
        return (dom.kind.constant_name, dom.constant, -1)
    if dom.kind is Kind.QUANDLE:
        a, b = K.first_unpreserved(dom.lhdi, cod.lhdi, m)
        if a >= 0:
            return ("lhdi", a, b)
    return None


def make_homomorphism(dom: FiniteAlgebra, cod: FiniteAlgebra, m) -> Homomorphism:
    if dom.kind is not cod.kind:
        raise AlgebraError("KIND_MISMATCH", f"{dom.kind.value} -> {cod.kind.value}")
    m = np.asarray(m, dtype=np.int64)
    if m.shape != (dom.order,) or (len(m) and (m.min() < 0 or m.max() >= cod.order)):
        raise AlgebraError("SHAPE_ERROR", "map has wrong length or out-of-range values")
    bad = first_unpreserved(dom, cod, m)
    if bad is not None:
        op, a, b = bad
        wit = (dom.names[a],) if b < 0 else (dom.names[a], dom.names[b])
        raise AlgebraError("NOT_HOMOMORPHISM", f"{op} not preserved at {wit}", wit)
    return Homomorphism(dom, cod, m)


def identity(A: FiniteAlgebra) -> Homomorphism:
    return Homomorphism(A, A, np.arange(A.order))


def terminal_map(A: FiniteAlgebra) -> Homomorphism:
    return Homomorphism(A, terminal(A.kind), np.zeros(A.order, dtype=np.int64))


def compose(g: Homomorphism, f: Homomorphism) -> Homomorphism:
    """``g`` after ``f``."""
    if f.cod.order != g.dom.order:
        raise AlgebraError("SHAPE_ERROR", "maps do not compose")
    return Homomorphism(f.dom, g.cod, g.map[f.map])


def same_map(f: Homomorphism, g: Homomorphism) -> bool:
    return np.array_equal(f.map, g.map)


# --- products ---------------------------------------------------------------


@dataclass(frozen=True)
class Product:
    algebra: FiniteAlgebra
    proj1: Homomorphism
    proj2: Homomorphism
    sec1: Homomorphism | None  # a -> (a, e)
    sec2: Homomorphism | None  # b -> (e, b)

    def pair(self, a: int, b: int) -> int:
        return a * self.proj2.cod.order + b


def pair_name(a: str, b: str) -> str:
    return f"({a},{b})"


def product_algebra(A: FiniteAlgebra, B: FiniteAlgebra) -> Product:
    if A.kind is not B.kind:
        raise AlgebraError("KIND_MISMATCH", f"{A.kind.value} x {B.kind.value}")
    m = B.order
    ia, ib = np.divmod(np.arange(A.order * m), m)
    tabs = tuple(s[ia[:, None], ia[None, :]] * m + t[ib[:, None], ib[None, :]] for s, t in zip(A.tables, B.tables))
    names = tuple(pair_name(A.names[a], B.names[b]) for a, b in zip(ia, ib))
    const = A.constant * m + B.constant if A.kind.pointed else None
    P = FiniteAlgebra(A.kind, names, tabs, const)
    p1, p2 = Homomorphism(P, A, ia), Homomorphism(P, B, ib)
    s1 = s2 = None
    if A.kind.pointed:
        s1 = Homomorphism(A, P, np.arange(A.order) * m + B.constant)
        s2 = Homomorphism(B, P, A.constant * m + np.arange(m))
    return Product(P, p1, p2, s1, s2)


# --- subalgebras ------------------------------------------------------------


def closure_mask(A: FiniteAlgebra, seed: Iterable[int]) -> np.ndarray:
    member = np.zeros(A.order, dtype=np.bool_)
    for x in seed:
        if not 0 <= int(x) < A.order:
            raise AlgebraError("SHAPE_ERROR", f"element {x} out of range")
        member[int(x)] = True
    if A.kind.pointed:
        member[A.constant] = True
    return K.close_subset(A.ops, member)


def subalgebra(A: FiniteAlgebra, elements: Iterable[int]) -> tuple[FiniteAlgebra, Homomorphism]:
    """The subalgebra on ``elements`` (assumed closed) and its inclusion."""
    els = np.array(sorted(set(int(x) for x in elements)), dtype=np.int64)
    pos = np.full(A.order, -1, dtype=np.int64)
    pos[els] = np.arange(len(els))
    tabs = []
    for t in A.tables:
        sub = pos[t[els[:, None], els[None, :]]]
        if (sub < 0).any():
            raise AlgebraError("INTERNAL", "element set is not closed")
        tabs.append(sub)
    const = int(pos[A.constant]) if A.kind.pointed else None
    if A.kind.pointed and const < 0:
        raise AlgebraError("INTERNAL", "element set misses the constant")
    S = FiniteAlgebra(A.kind, tuple(A.names[i] for i in els), tuple(tabs), const)
    return S, Homomorphism(S, A, els)


def subalgebra_generated(A: FiniteAlgebra, subset: Iterable[int]) -> tuple[np.ndarray, Homomorphism]:
    """Smallest subalgebra containing ``subset`` (and the constant)."""
    mask = closure_mask(A, subset)
    els = np.nonzero(mask)[0]
    _, inc = subalgebra(A, els)
    return els, inc


def is_jointly_extremally_epimorphic(maps: Sequence[Homomorphism]) -> bool:
    """True iff the images of ``maps`` jointly generate their common codomain.

    In a variety of algebras, jointly extremally epimorphic means exactly this.
    """
    if not maps:
        raise AlgebraError("SHAPE_ERROR", "no maps given")
    X = maps[0].cod
    for m in maps:
        if m.cod.kind is not X.kind:
            raise AlgebraError("KIND_MISMATCH", "codomains of different kinds")
        if not m.cod.same_structure(X):
            raise AlgebraError("SHAPE_ERROR", "maps must share a codomain")
    seed = np.unique(np.concatenate([m.map for m in maps]))
    return bool(closure_mask(X, seed).all())

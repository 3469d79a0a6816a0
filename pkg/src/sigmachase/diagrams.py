"""Exact sequences, exact forks and weakly 3x3 diagrams in both flavors.

Two evaluation paths share one set of clause definitions:

* :class:`ThreeByThreeDiagram` holds nine concrete algebras and their maps
  and computes every fact with the generic checks below;
* :class:`Grid` describes a diagram by congruences on the middle object
  ``X`` and computes the same facts without building the large relation
  algebras.  The search harness runs on grids and materializes a diagram
  only for archived hits.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .algebra import AlgebraError, FiniteAlgebra, Homomorphism, Kind, compose, subalgebra
from .points import SigmaClass, default_class, is_sigma_special, special_congruence_fast
from .relations import (
    Congruence,
    all_congruences,
    congruence_generated,
    join,
    kernel_object,
    kernel_pair,
    quotient_by_congruence,
    unit_congruence,
)


class Flavor(enum.Enum):
    NORMALIZED = "normalized"
    DENORMALIZED = "denormalized"


class Variant(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"
    FULL = "full"


class Status(enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    VACUOUS = "vacuous"


# --- exact sequences and forks ---------------------------------------------


@dataclass(frozen=True)
class SequenceVerdict:
    kernel_ok: bool
    cokernel_ok: bool
    sigma_special: bool | None
    witness: str | None

    @property
    def exact(self) -> bool:
        return self.kernel_ok and self.cokernel_ok

    @property
    def sigma_exact(self) -> bool:
        return self.exact and bool(self.sigma_special)


def check_exact_sequence(k: Homomorphism, f: Homomorphism, cls: SigmaClass | None = None) -> SequenceVerdict:
    """``K --k--> X --f--> Y``: k is the kernel of f and f the cokernel of k."""
    X = f.dom
    if not X.kind.pointed:
        raise AlgebraError("UNSUPPORTED_KIND", "exact sequences need a pointed kind")
    if not k.cod.same_structure(X):
        raise AlgebraError("SHAPE_ERROR", "k does not land in the domain of f")
    witness = None
    fiber = set(f.preimage(f.cod.constant).tolist())
    image = set(k.map.tolist())
    kernel_ok = k.is_injective and image == fiber
    if not kernel_ok:
        witness = "k is not injective" if not k.is_injective else f"image of k {sorted(image)} != kernel {sorted(fiber)}"
    cokernel_ok = f.is_surjective and kernel_pair(f) == unit_congruence(k)
    if not cokernel_ok and witness is None:
        witness = "f is not surjective" if not f.is_surjective else "f is not the cokernel of k"
    special = bool(is_sigma_special(f, cls)) if cls is not None else None
    if special is False and witness is None:
        witness = "f is not sigma-special"
    return SequenceVerdict(kernel_ok, cokernel_ok, special, witness)


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    BOTH = "both"


@dataclass(frozen=True)
class Fork:
    """A graph ``d0, d1: G -> X`` followed by ``f: X -> Y`` with ``f d0 = f d1``."""

    graph: FiniteAlgebra
    d0: Homomorphism
    d1: Homomorphism
    f: Homomorphism

    def image_pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.d0.map.tolist(), self.d1.map.tolist()))


@dataclass(frozen=True)
class ForkVerdict:
    left: bool | None
    right: bool | None
    sigma_special: bool | None
    witness: str | None

    @property
    def exact(self) -> bool:
        return bool(self.left) and bool(self.right)

    @property
    def sigma_exact(self) -> bool:
        return self.exact and bool(self.sigma_special)


def relation_fork(C: Congruence, f: Homomorphism) -> Fork:
    R = C.relation
    return Fork(R.algebra, R.d0, R.d1, f)


def check_fork(fork: Fork, side: Side = Side.BOTH, cls: SigmaClass | None = None) -> ForkVerdict:
    f = fork.f
    if not (fork.d0.dom.same_structure(fork.graph) and fork.d1.dom.same_structure(fork.graph)):
        raise AlgebraError("SHAPE_ERROR", "legs do not start at the graph")
    if not np.array_equal(f.map[fork.d0.map], f.map[fork.d1.map]):
        raise AlgebraError("SHAPE_ERROR", "f does not coequalize the legs")
    pairs = fork.image_pairs()
    X = f.dom
    refl = set(pairs) >= {(a, a) for a in range(X.order)}
    if not refl:
        raise AlgebraError("SHAPE_ERROR", "graph is not reflexive")
    witness = None
    left = right = None
    if side in (Side.LEFT, Side.BOTH):
        mono = len(set(pairs)) == len(pairs)
        left = mono and set(pairs) == kernel_pair(f).pair_set()
        if not left:
            witness = "legs are not jointly monomorphic" if not mono else "graph differs from the kernel pair of f"
    if side in (Side.RIGHT, Side.BOTH):
        right = f.is_surjective and kernel_pair(f) == congruence_generated(X, pairs)
        if not right and witness is None:
            witness = "f is not surjective" if not f.is_surjective else "f is not the coequalizer of the legs"
    special = bool(is_sigma_special(f, cls)) if cls is not None else None
    return ForkVerdict(left, right, special, witness)


# --- clauses ----------------------------------------------------------------


@dataclass(frozen=True)
class Clause:
    name: str
    hypotheses: tuple[str, ...]
    conclusion: str  # a fact name, or "rows-agree"


_WEAK_SPECIAL = ("f-special", "fp-special", "phi-special", "x-special")

CLAUSES: dict[tuple[Flavor, Variant], tuple[Clause, ...]] = {
    (Flavor.NORMALIZED, Variant.UPPER): (
        Clause("upper-sigma", _WEAK_SPECIAL + ("lower-sigma-exact",), "upper-sigma-exact"),
    ),
    (Flavor.NORMALIZED, Variant.LOWER): (
        Clause("lower-sigma", _WEAK_SPECIAL + ("upper-sigma-exact",), "lower-sigma-exact"),
    ),
    (Flavor.NORMALIZED, Variant.FULL): (
        Clause("over-base", ("y-special", "fp-special", "fpx-special"), "rows-agree"),
    ),
    (Flavor.DENORMALIZED, Variant.UPPER): (
        Clause("upper-exact", ("x-special", "lower-exact"), "upper-exact"),
        Clause("upper-sigma", ("x-special", "lower-sigma-exact"), "upper-sigma-exact"),
    ),
    (Flavor.DENORMALIZED, Variant.LOWER): (
        Clause("lower-exact", ("f-special", "upper-exact"), "lower-exact"),
        Clause("lower-sigma", ("f-special", "x-special", "upper-sigma-exact"), "lower-sigma-exact"),
    ),
    (Flavor.DENORMALIZED, Variant.FULL): (
        Clause("both-special", ("f-special", "x-special"), "rows-agree"),
        Clause("over-base", ("y-special", "fp-special", "fpx-special"), "rows-agree"),
    ),
}

DROPPABLE = (
    "f-special",
    "x-special",
    "fp-special",
    "phi-special",
    "y-special",
    "fpx-special",
    "upper-sigma",
    "lower-sigma",
    "upper-exact",
    "lower-exact",
)


def effective_hypotheses(clause: Clause, drop: Iterable[str] = ()) -> tuple[str, ...]:
    """The clause's hypotheses after dropping.

    ``upper-sigma``/``lower-sigma`` weaken a sigma-exactness hypothesis to
    plain exactness; ``upper-exact``/``lower-exact`` remove that row
    hypothesis altogether.
    """
    drop = set(drop)
    unknown = drop - set(DROPPABLE)
    if unknown:
        raise AlgebraError("SHAPE_ERROR", f"unknown hypothesis {sorted(unknown)}")
    out = []
    for h in clause.hypotheses:
        if h in drop:
            continue
        row = h.split("-")[0]
        if h.endswith("-sigma-exact"):
            if f"{row}-exact" in drop:
                continue
            if f"{row}-sigma" in drop:
                h = f"{row}-exact"
        elif h.endswith("-exact") and h in drop:
            continue
        out.append(h)
    return tuple(out)


@dataclass(frozen=True)
class ClauseVerdict:
    name: str
    hypotheses: tuple[tuple[str, bool | None], ...]  # None: not evaluated
    conclusion: bool | None
    status: Status
    witness: str | None


@dataclass(frozen=True)
class LemmaVerdict:
    flavor: Flavor
    variant: Variant
    clauses: tuple[ClauseVerdict, ...]

    @property
    def status(self) -> Status:
        st = [c.status for c in self.clauses]
        if Status.FAILS in st:
            return Status.FAILS
        if Status.HOLDS in st:
            return Status.HOLDS
        return Status.VACUOUS

    @property
    def conclusion_holds(self) -> bool:
        return self.status is not Status.FAILS

    @property
    def vacuous(self) -> bool:
        return self.status is Status.VACUOUS

    @property
    def witness(self) -> str | None:
        for c in self.clauses:
            if c.status is Status.FAILS:
                return c.witness
        return None


class Facts:
    """Lazily evaluated, memoized named booleans about one diagram."""

    def __init__(self, rules: dict[str, Callable[[], bool]]):
        self._rules = rules
        self._memo: dict[str, bool] = {}

    def __getitem__(self, name: str) -> bool:
        if name not in self._memo:
            if name == "rows-agree":
                self._memo[name] = self["upper-exact"] == self["lower-exact"]
            else:
                self._memo[name] = bool(self._rules[name]())
        return self._memo[name]

    def names(self) -> list[str]:
        return sorted(self._rules) + ["rows-agree"]

    def all(self) -> dict[str, bool]:
        return {k: self[k] for k in self.names()}


def evaluate_clauses(facts: Facts, flavor: Flavor, variant: Variant, drop: Iterable[str] = ()) -> LemmaVerdict:
    out = []
    for clause in CLAUSES[(flavor, variant)]:
        hyps: list[tuple[str, bool | None]] = []
        ok = True
        for h in effective_hypotheses(clause, drop):
            if not ok:
                hyps.append((h, None))
                continue
            v = facts[h]
            hyps.append((h, v))
            ok = v
        if not ok:
            out.append(ClauseVerdict(clause.name, tuple(hyps), None, Status.VACUOUS, None))
            continue
        concl = facts[clause.conclusion]
        witness = None
        if not concl:
            if clause.conclusion == "rows-agree":
                witness = "upper row exact, lower row not" if facts["upper-exact"] else "lower row exact, upper row not"
            elif clause.conclusion.endswith("-sigma-exact"):
                row = clause.conclusion.split("-")[0]
                witness = f"{row} row not exact" if not facts[f"{row}-exact"] else f"{row} row exact but not sigma-exact"
            else:
                witness = f"{clause.conclusion} fails"
        out.append(ClauseVerdict(clause.name, tuple(hyps), concl, Status.HOLDS if concl else Status.FAILS, witness))
    return LemmaVerdict(flavor, variant, tuple(out))


# --- concrete diagrams ------------------------------------------------------

NORMALIZED_OBJECTS = ("K_phi", "K_f", "K_fp", "K_x", "X", "Xp", "U", "Y", "Yp")
NORMALIZED_MAPS = {
    "Kk_x": ("K_phi", "K_f"),
    "K_of_x": ("K_f", "K_fp"),
    "k_phi": ("K_phi", "K_x"),
    "k_f": ("K_f", "X"),
    "k_fp": ("K_fp", "Xp"),
    "k_x": ("K_x", "X"),
    "x": ("X", "Xp"),
    "phi": ("K_x", "U"),
    "f": ("X", "Y"),
    "fp": ("Xp", "Yp"),
    "u": ("U", "Y"),
    "y": ("Y", "Yp"),
}
DENORMALIZED_OBJECTS = ("R_phi", "R_f", "R_fp", "R_x", "X", "Xp", "W", "Y", "Yp")
DENORMALIZED_MAPS = {
    "Rd0_x": ("R_phi", "R_f"),
    "Rd1_x": ("R_phi", "R_f"),
    "R_of_x": ("R_f", "R_fp"),
    "d0_phi": ("R_phi", "R_x"),
    "d1_phi": ("R_phi", "R_x"),
    "d0_f": ("R_f", "X"),
    "d1_f": ("R_f", "X"),
    "d0_fp": ("R_fp", "Xp"),
    "d1_fp": ("R_fp", "Xp"),
    "d0_x": ("R_x", "X"),
    "d1_x": ("R_x", "X"),
    "x": ("X", "Xp"),
    "phi": ("R_x", "W"),
    "f": ("X", "Y"),
    "fp": ("Xp", "Yp"),
    "y0": ("W", "Y"),
    "y1": ("W", "Y"),
    "y": ("Y", "Yp"),
}


def layout(flavor: Flavor) -> tuple[tuple[str, ...], dict[str, tuple[str, str]]]:
    if flavor is Flavor.NORMALIZED:
        return NORMALIZED_OBJECTS, NORMALIZED_MAPS
    return DENORMALIZED_OBJECTS, DENORMALIZED_MAPS


# squares as (name, left path, right path); paths compose right-to-left
_SQUARES = {
    Flavor.NORMALIZED: (
        ("top-left", ("k_f", "Kk_x"), ("k_x", "k_phi")),
        ("top-right", ("k_fp", "K_of_x"), ("x", "k_f")),
        ("bottom-left", ("u", "phi"), ("f", "k_x")),
        ("bottom-right", ("y", "f"), ("fp", "x")),
    ),
    Flavor.DENORMALIZED: (
        ("top-left-00", ("d0_f", "Rd0_x"), ("d0_x", "d0_phi")),
        ("top-left-01", ("d1_f", "Rd0_x"), ("d0_x", "d1_phi")),
        ("top-left-10", ("d0_f", "Rd1_x"), ("d1_x", "d0_phi")),
        ("top-left-11", ("d1_f", "Rd1_x"), ("d1_x", "d1_phi")),
        ("top-right-0", ("d0_fp", "R_of_x"), ("x", "d0_f")),
        ("top-right-1", ("d1_fp", "R_of_x"), ("x", "d1_f")),
        ("bottom-left-0", ("y0", "phi"), ("f", "d0_x")),
        ("bottom-left-1", ("y1", "phi"), ("f", "d1_x")),
        ("bottom-right", ("y", "f"), ("fp", "x")),
    ),
}

# exact pieces required of a weakly 3x3 diagram
_STRUCTURE = {
    Flavor.NORMALIZED: (
        ("left column", ("k_phi", "phi")),
        ("middle column", ("k_f", "f")),
        ("right column", ("k_fp", "fp")),
        ("middle row", ("k_x", "x")),
    ),
    Flavor.DENORMALIZED: (
        ("left column", ("R_phi", "d0_phi", "d1_phi", "phi")),
        ("middle column", ("R_f", "d0_f", "d1_f", "f")),
        ("right column", ("R_fp", "d0_fp", "d1_fp", "fp")),
        ("middle row", ("R_x", "d0_x", "d1_x", "x")),
    ),
}


def _path(maps: dict[str, Homomorphism], names: Sequence[str]) -> np.ndarray:
    m = maps[names[-1]].map
    for n in reversed(names[:-1]):
        m = maps[n].map[m]
    return m


@dataclass(eq=False)
class ThreeByThreeDiagram:
    flavor: Flavor
    objects: dict[str, FiniteAlgebra]
    maps: dict[str, Homomorphism]
    cls: SigmaClass

    def _sequence(self, k: str, f: str) -> SequenceVerdict:
        return check_exact_sequence(self.maps[k], self.maps[f])

    def _fork(self, g: str, d0: str, d1: str, f: str) -> ForkVerdict:
        return check_fork(Fork(self.objects[g], self.maps[d0], self.maps[d1], self.maps[f]))

    def _special(self, name: str) -> bool:
        return bool(is_sigma_special(self.maps[name], self.cls))

    @cached_property
    def facts(self) -> Facts:
        m = self.maps
        rules: dict[str, Callable[[], bool]] = {
            "f-special": lambda: self._special("f"),
            "x-special": lambda: self._special("x"),
            "fp-special": lambda: self._special("fp"),
            "phi-special": lambda: self._special("phi"),
            "y-special": lambda: self._special("y"),
            "fpx-special": lambda: bool(is_sigma_special(compose(m["fp"], m["x"]), self.cls)),
        }
        if self.flavor is Flavor.NORMALIZED:
            rules["upper-exact"] = lambda: self._sequence("Kk_x", "K_of_x").exact
            rules["lower-exact"] = lambda: self._sequence("u", "y").exact
            upper_epi, lower_epi = "K_of_x", "y"
        else:
            rules["upper-exact"] = lambda: self._fork("R_phi", "Rd0_x", "Rd1_x", "R_of_x").exact
            rules["lower-exact"] = lambda: self._fork("W", "y0", "y1", "y").exact
            rules["upper-left-exact"] = lambda: check_fork(
                Fork(self.objects["R_phi"], m["Rd0_x"], m["Rd1_x"], m["R_of_x"]), Side.LEFT
            ).left
            rules["lower-jointly-mono"] = lambda: len(set(zip(m["y0"].map.tolist(), m["y1"].map.tolist()))) == self.objects["W"].order
            upper_epi, lower_epi = "R_of_x", "y"
        rules["upper-sigma-exact"] = lambda: facts["upper-exact"] and self._special(upper_epi)
        rules["lower-sigma-exact"] = lambda: facts["lower-exact"] and self._special(lower_epi)
        facts = Facts(rules)
        return facts


def build_3x3(
    flavor: Flavor,
    objects: dict[str, FiniteAlgebra],
    maps: dict[str, Homomorphism],
    cls: SigmaClass | None = None,
) -> ThreeByThreeDiagram:
    """Validate the grid shape, every square and the weakly 3x3 exactness."""
    obj_names, map_shape = layout(flavor)
    kind = objects["X"].kind if "X" in objects else None
    if set(objects) != set(obj_names) or set(maps) != set(map_shape):
        raise AlgebraError("SHAPE_ERROR", "grid positions do not match the flavor")
    if flavor is Flavor.NORMALIZED and not kind.pointed:
        raise AlgebraError("UNSUPPORTED_KIND", "normalized grids need a pointed kind")
    cls = cls or default_class(kind)
    if not cls.accepts(kind):
        raise AlgebraError("CLASS_KIND_MISMATCH", f"{cls.value} on {kind.value}")
    for name, (src, dst) in map_shape.items():
        h = maps[name]
        if not (h.dom.same_structure(objects[src]) and h.cod.same_structure(objects[dst])):
            raise AlgebraError("SHAPE_ERROR", f"map {name} is not {src} -> {dst}")
    for sq, lhs, rhs in _SQUARES[flavor]:
        if not np.array_equal(_path(maps, lhs), _path(maps, rhs)):
            raise AlgebraError("NOT_COMMUTING", sq)
    for label, names in _STRUCTURE[flavor]:
        if flavor is Flavor.NORMALIZED:
            ok = check_exact_sequence(maps[names[0]], maps[names[1]]).exact
        else:
            g, d0, d1, f = names
            try:
                ok = check_fork(Fork(objects[g], maps[d0], maps[d1], maps[f])).exact
            except AlgebraError:
                ok = False
        if not ok:
            raise AlgebraError("NOT_WEAKLY_3X3", label)
    return ThreeByThreeDiagram(flavor, dict(objects), dict(maps), cls)


def verify_lemma(d: ThreeByThreeDiagram, variant: Variant, drop: Iterable[str] = ()) -> LemmaVerdict:
    return evaluate_clauses(d.facts, d.flavor, variant, drop)


# --- grids from congruence data ---------------------------------------------


def _blocks_matrix(C: Congruence) -> np.ndarray:
    return C.blocks[:, None] == C.blocks[None, :]


def _restrict(C: Congruence, S: FiniteAlgebra, inc: Homomorphism) -> Congruence:
    return Congruence(S, C.blocks[inc.map])


def _induced(C: Congruence, D: Congruence, Q: FiniteAlgebra) -> Congruence:
    """``D`` (containing ``C``) seen on the quotient ``Q = X / C``."""
    reps = np.unique(C.blocks, return_index=True)[1]
    return Congruence(Q, D.blocks[reps])


def is_unit_generated(C: Congruence) -> bool:
    """C is generated by its unit block, i.e. the quotient map is a cokernel."""
    X = C.carrier
    e = X.constant
    return congruence_generated(X, [(int(a), e) for a in C.block_of(e)]) == C


@dataclass(eq=False)
class XData:
    """Per-X caches shared by every grid over the same ``X``."""

    X: FiniteAlgebra
    cls: SigmaClass

    @cached_property
    def congruences(self) -> list[Congruence]:
        return all_congruences(self.X)

    @cached_property
    def order(self) -> np.ndarray:
        """``order[i, j]``: congruence ``i`` is contained in congruence ``j``."""
        L = np.stack([C.blocks for C in self.congruences])
        same = L[:, :, None] == L[:, None, :]
        flat = same.reshape(len(L), -1)
        return ~(flat[:, None, :] & ~flat[None, :, :]).any(axis=2)

    @cached_property
    def _n_blocks(self) -> np.ndarray:
        return np.array([C.n_blocks for C in self.congruences])

    def join_index(self, i: int, j: int) -> int:
        """The join is the common upper bound below all others, i.e. the finest one."""
        up = np.nonzero(self.order[i] & self.order[j])[0]
        return int(up[np.argmax(self._n_blocks[up])])

    @cached_property
    def _quotients(self) -> dict:
        return {}

    def quotient(self, C: Congruence):
        key = C.blocks.tobytes()
        q = self._quotients.get(key)
        if q is None:
            q = self._quotients[key] = quotient_by_congruence(self.X, C)
        return q

    @cached_property
    def _special(self) -> dict:
        return {}

    def special(self, C: Congruence) -> bool:
        key = C.blocks.tobytes()
        v = self._special.get(key)
        if v is None:
            v = self._special[key] = special_congruence_fast(C, self.cls)
        return v

    def special_on_quotient(self, C: Congruence, D: Congruence) -> bool:
        """Is ``D / C`` a sigma-congruence on ``X / C``."""
        key = (C.blocks.tobytes(), D.blocks.tobytes())
        v = self._special.get(key)
        if v is None:
            Q = self.quotient(C).algebra
            v = self._special[key] = special_congruence_fast(_induced(C, D, Q), self.cls)
        return v

    @cached_property
    def _unit_generated(self) -> dict:
        return {}

    def unit_generated(self, C: Congruence) -> bool:
        key = C.blocks.tobytes()
        v = self._unit_generated.get(key)
        if v is None:
            v = self._unit_generated[key] = is_unit_generated(C)
        return v

    @cached_property
    def _subs(self) -> dict:
        return {}

    def unit_block(self, C: Congruence) -> tuple[FiniteAlgebra, Homomorphism]:
        key = C.blocks.tobytes()
        s = self._subs.get(key)
        if s is None:
            s = self._subs[key] = subalgebra(self.X, C.block_of(self.X.constant))
        return s

    @cached_property
    def _rels(self) -> dict:
        return {}

    def relation(self, C: Congruence):
        key = C.blocks.tobytes()
        r = self._rels.get(key)
        if r is None:
            r = self._rels[key] = C.relation
        return r


@dataclass(eq=False)
class Grid:
    """A weakly 3x3 diagram given by congruences on its middle object.

    ``F = R[f]``, ``T = R[x]`` and ``G = R[f' x]`` on ``X``.  For the
    normalized flavor ``phi`` is a congruence on ``K[x]`` (the unit block
    of ``T``) contained in ``F``; for the denormalized flavor it is one
    of ``"max"`` (W is the image of ``R[x]`` in ``Y x Y``) or ``"min"``
    (the least congruence on ``R[x]`` compatible with the sections).
    """

    flavor: Flavor
    data: XData
    F: Congruence
    T: Congruence
    G: Congruence
    phi: Congruence | str

    @property
    def X(self) -> FiniteAlgebra:
        return self.data.X

    @property
    def cls(self) -> SigmaClass:
        return self.data.cls

    # denormalized helpers
    def _phi_max(self) -> Congruence:
        R = self.data.relation(self.T)
        fb = self.F.blocks
        return Congruence(R.algebra, fb[R.pairs[:, 0]] * self.X.order + fb[R.pairs[:, 1]])

    def _phi_min(self) -> Congruence:
        R = self.data.relation(self.T)
        seed = [(R.index(a, a), R.index(c, c)) for a, c in self.F.pairs().tolist()]
        return congruence_generated(R.algebra, seed)

    @cached_property
    def phi_congruence(self) -> Congruence:
        if self.flavor is Flavor.NORMALIZED:
            return self.phi
        return self._phi_max() if self.phi == "max" else self._phi_min()

    @cached_property
    def facts(self) -> Facts:
        return self._normalized_facts() if self.flavor is Flavor.NORMALIZED else self._denormalized_facts()

    def _common_rules(self) -> dict[str, Callable[[], bool]]:
        d, F, T, G = self.data, self.F, self.T, self.G
        return {
            "f-special": lambda: d.special(F),
            "x-special": lambda: d.special(T),
            "fpx-special": lambda: d.special(G),
            "fp-special": lambda: d.special_on_quotient(T, G),
            "y-special": lambda: d.special_on_quotient(F, G),
        }

    def _normalized_facts(self) -> Facts:
        d, X, F, T, G = self.data, self.X, self.F, self.T, self.G
        e = X.constant
        Phi: Congruence = self.phi
        Kx, kx = d.unit_block(T)
        Kf, kf = d.unit_block(F)
        eF, eT, eG = (set(C.block_of(e).tolist()) for C in (F, T, G))
        Kphi = {int(kx.map[i]) for i in Phi.block_of(Kx.constant)}

        def upper_exact():
            if Kphi != eF & eT:
                return False
            if {int(T.blocks[a]) for a in eF} != {int(T.blocks[a]) for a in eG}:
                return False
            pos = {int(v): i for i, v in enumerate(kf.map)}
            seed = [(pos[a], Kf.constant) for a in Kphi]
            return congruence_generated(Kf, seed) == _restrict(T, Kf, kf)

        def lower_exact():
            if Phi != _restrict(F, Kx, kx):
                return False
            if {int(F.blocks[a]) for a in eT} != {int(F.blocks[a]) for a in eG}:
                return False
            seed = [(int(a), int(b)) for a, b in F.pairs().tolist()] + [(a, e) for a in eT]
            return congruence_generated(X, seed) == G

        rules = self._common_rules()
        rules.update(
            {
                "phi-special": lambda: special_congruence_fast(Phi, self.cls),
                "upper-exact": upper_exact,
                "lower-exact": lower_exact,
                "upper-sigma-exact": lambda: facts["upper-exact"] and special_congruence_fast(_restrict(T, Kf, kf), self.cls),
                "lower-sigma-exact": lambda: facts["lower-exact"] and facts["y-special"],
            }
        )
        facts = Facts(rules)
        return facts

    def _denormalized_facts(self) -> Facts:
        d, X, F, T, G = self.data, self.X, self.F, self.T, self.G
        Fm, Tm, Gm = (_blocks_matrix(C).astype(np.int64) for C in (F, T, G))
        maximal = self.phi == "max" or self._phi_min() == self._phi_max()

        def upper_exact():
            return maximal and np.array_equal((Tm @ Fm @ Tm) > 0, Gm > 0)

        def lower_exact():
            if not (maximal and np.array_equal((Fm @ Tm @ Fm) > 0, Gm > 0)):
                return False
            return join(F, T) == G

        def upper_sigma():
            if not facts["upper-exact"]:
                return False
            Rf = d.relation(F)
            tb = T.blocks
            labels = tb[Rf.pairs[:, 0]] * X.order + tb[Rf.pairs[:, 1]]
            return special_congruence_fast(Congruence(Rf.algebra, labels), self.cls)

        rules = self._common_rules()
        rules.update(
            {
                "phi-special": lambda: special_congruence_fast(self.phi_congruence, self.cls),
                "upper-exact": upper_exact,
                "lower-exact": lower_exact,
                "upper-left-exact": lambda: maximal,
                "lower-jointly-mono": lambda: maximal,
                "upper-sigma-exact": upper_sigma,
                "lower-sigma-exact": lambda: facts["lower-exact"] and facts["y-special"],
            }
        )
        facts = Facts(rules)
        return facts

    def verdict(self, variant: Variant, drop: Iterable[str] = ()) -> LemmaVerdict:
        return evaluate_clauses(self.facts, self.flavor, variant, drop)

    def materialize(self) -> ThreeByThreeDiagram:
        objs, maps = (_materialize_normalized if self.flavor is Flavor.NORMALIZED else _materialize_denormalized)(self)
        return build_3x3(self.flavor, objs, maps, self.cls)


def _induced_map(dom: FiniteAlgebra, cod: FiniteAlgebra, src_blocks: np.ndarray, dst_blocks: np.ndarray) -> Homomorphism:
    """``X/C -> X/D`` for ``C <= D``, given block labels on X."""
    m = np.zeros(dom.order, dtype=np.int64)
    m[src_blocks] = dst_blocks
    return Homomorphism(dom, cod, m)


def _positions(inc: Homomorphism) -> dict[int, int]:
    return {int(v): i for i, v in enumerate(inc.map)}


def _materialize_normalized(g: Grid):
    X, F, T, G = g.X, g.F, g.T, g.G
    qF, qT, qG = (quotient_by_congruence(X, C) for C in (F, T, G))
    Y, Xp, Yp = qF.algebra, qT.algebra, qG.algebra
    f, x = qF.projection, qT.projection
    fp = _induced_map(Xp, Yp, T.blocks, G.blocks)
    y = _induced_map(Y, Yp, F.blocks, G.blocks)
    Kf, k_f = g.data.unit_block(F)
    Kx, k_x = g.data.unit_block(T)
    Kfp, k_fp = kernel_object(fp)
    pos_fp = _positions(k_fp)
    K_of_x = Homomorphism(Kf, Kfp, np.array([pos_fp[int(x.map[a])] for a in k_f.map]))
    qPhi = quotient_by_congruence(Kx, g.phi)
    U, phi = qPhi.algebra, qPhi.projection
    u = _induced_map(U, Y, g.phi.blocks, F.blocks[k_x.map])
    Kphi, k_phi = kernel_object(phi)
    pos_f = _positions(k_f)
    Kk_x = Homomorphism(Kphi, Kf, np.array([pos_f[int(k_x.map[i])] for i in k_phi.map]))
    objs = dict(K_phi=Kphi, K_f=Kf, K_fp=Kfp, K_x=Kx, X=X, Xp=Xp, U=U, Y=Y, Yp=Yp)
    maps = dict(Kk_x=Kk_x, K_of_x=K_of_x, k_phi=k_phi, k_f=k_f, k_fp=k_fp, k_x=k_x, x=x, phi=phi, f=f, fp=fp, u=u, y=y)
    return objs, maps


def _materialize_denormalized(g: Grid):
    X, F, T, G = g.X, g.F, g.T, g.G
    qF, qT, qG = (quotient_by_congruence(X, C) for C in (F, T, G))
    Y, Xp, Yp = qF.algebra, qT.algebra, qG.algebra
    f, x = qF.projection, qT.projection
    fp = _induced_map(Xp, Yp, T.blocks, G.blocks)
    y = _induced_map(Y, Yp, F.blocks, G.blocks)
    Rf, Rx = F.relation, T.relation
    Rfp = kernel_pair(fp).relation
    R_of_x = Homomorphism(Rf.algebra, Rfp.algebra, np.array([Rfp.index(x.map[a], x.map[c]) for a, c in Rf.pairs]))
    Phi = g.phi_congruence
    qPhi = quotient_by_congruence(Rx.algebra, Phi)
    W, phi = qPhi.algebra, qPhi.projection
    y0 = _induced_map(W, Y, Phi.blocks, F.blocks[Rx.pairs[:, 0]])
    y1 = _induced_map(W, Y, Phi.blocks, F.blocks[Rx.pairs[:, 1]])
    Rphi = Phi.relation
    lo, hi = Rx.pairs[Rphi.pairs[:, 0]], Rx.pairs[Rphi.pairs[:, 1]]  # (a,b), (c,d)
    Rd0_x = Homomorphism(Rphi.algebra, Rf.algebra, np.array([Rf.index(a, c) for a, c in zip(lo[:, 0], hi[:, 0])]))
    Rd1_x = Homomorphism(Rphi.algebra, Rf.algebra, np.array([Rf.index(b, d) for b, d in zip(lo[:, 1], hi[:, 1])]))
    objs = dict(R_phi=Rphi.algebra, R_f=Rf.algebra, R_fp=Rfp.algebra, R_x=Rx.algebra, X=X, Xp=Xp, W=W, Y=Y, Yp=Yp)
    maps = dict(
        Rd0_x=Rd0_x,
        Rd1_x=Rd1_x,
        R_of_x=R_of_x,
        d0_phi=Rphi.d0,
        d1_phi=Rphi.d1,
        d0_f=Rf.d0,
        d1_f=Rf.d1,
        d0_fp=Rfp.d0,
        d1_fp=Rfp.d1,
        d0_x=Rx.d0,
        d1_x=Rx.d1,
        x=x,
        phi=phi,
        f=f,
        fp=fp,
        y0=y0,
        y1=y1,
        y=y,
    )
    return objs, maps


# --- grid enumeration -------------------------------------------------------


def grids_over(
    X: FiniteAlgebra,
    flavor: Flavor,
    cls: SigmaClass | None = None,
    require: Iterable[str] = (),
    phi_variants: Sequence[str] = ("max",),
    require_any: Sequence[Iterable[str]] | None = None,
) -> Iterator[Grid]:
    """Every weakly 3x3 grid with middle object ``X``, in a fixed order.

    ``require`` lists special-map facts known to be hypotheses of every
    clause under study; grids failing them are vacuous and skipped early.
    ``require_any`` gives one such set per clause: a grid is skipped only
    when it fails some fact of every set.
    """
    if flavor is Flavor.NORMALIZED and not X.kind.pointed:
        raise AlgebraError("UNSUPPORTED_KIND", "normalized grids need a pointed kind")
    cls = cls or default_class(X.kind)
    d = XData(X, cls)
    alts = [set(require)] if require_any is None else [set(require) | set(a) for a in require_any]
    congs = d.congruences
    if flavor is Flavor.NORMALIZED:
        # middle row and middle column exact
        base = [C for C in congs if d.unit_generated(C)]
    else:
        base = list(congs)

    def keep(live, fact, test):
        """The alternatives still satisfiable after checking ``fact``."""
        if not any(fact in a for a in live):
            return live
        ok = test()
        return [a for a in live if ok or fact not in a]

    e = X.constant
    index = {C.blocks.tobytes(): i for i, C in enumerate(congs)}
    for F in base:
        alts_f = keep(alts, "f-special", lambda: d.special(F))
        if not alts_f:
            continue
        fi = index[F.blocks.tobytes()]
        for T in base:
            alts_t = keep(alts_f, "x-special", lambda: d.special(T))
            if not alts_t:
                continue
            above = d.order[d.join_index(fi, index[T.blocks.tobytes()])]
            for G in (congs[g] for g in np.nonzero(above)[0]):
                live = keep(alts_t, "fpx-special", lambda: d.special(G))
                live = keep(live, "fp-special", lambda: d.special_on_quotient(T, G))
                live = keep(live, "y-special", lambda: d.special_on_quotient(F, G))
                if not live:
                    continue
                if flavor is Flavor.DENORMALIZED:
                    seen = set()
                    for v in phi_variants:
                        grid = Grid(flavor, d, F, T, G, v)
                        key = grid.phi_congruence.blocks.tobytes()
                        if key in seen:
                            continue
                        seen.add(key)
                        yield grid
                    continue
                # right column exact: G/T generated by its unit block
                seed = [(int(a), int(b)) for a, b in T.pairs().tolist()] + [(int(a), e) for a in G.block_of(e)]
                if congruence_generated(X, seed) != G:
                    continue
                Kx, kx = d.unit_block(T)
                FK = _restrict(F, Kx, kx)
                for Phi in all_congruences(Kx):
                    if not Phi.refines(FK) or not is_unit_generated(Phi):
                        continue
                    if not keep(live, "phi-special", lambda: special_congruence_fast(Phi, cls)):
                        continue
                    yield Grid(flavor, d, F, T, G, Phi)


@dataclass(frozen=True)
class SearchHit:
    index: int  # position of X in the candidate list
    grid: Grid
    verdict: LemmaVerdict


@dataclass
class SearchStats:
    algebras: int = 0
    grids: int = 0
    non_vacuous: int = 0
    failures: int = 0

    def merge(self, other: "SearchStats"):
        self.algebras += other.algebras
        self.grids += other.grids
        self.non_vacuous += other.non_vacuous
        self.failures += other.failures


def candidate_algebras(kind: Kind, max_order: int, min_order: int = 1) -> list[FiniteAlgebra]:
    from .enumeration import enumerate_algebras

    out = []
    for n in range(min_order, max_order + 1):
        out.extend(enumerate_algebras(kind, n, up_to_iso=True))
    return out


def _grid_key(grid: Grid) -> tuple:
    phi = grid.phi if isinstance(grid.phi, str) else grid.phi.blocks.tolist()
    return grid.F.blocks.tolist(), grid.T.blocks.tolist(), grid.G.blocks.tolist(), phi


def grid_from_key(X: FiniteAlgebra, flavor: Flavor, cls: SigmaClass, key: tuple, data: XData | None = None) -> Grid:
    F, T, G, phi = key
    data = data or XData(X, cls)
    if not isinstance(phi, str):
        Kx, _ = data.unit_block(Congruence(X, T))
        phi = Congruence(Kx, phi)
    return Grid(flavor, data, Congruence(X, F), Congruence(X, T), Congruence(X, G), phi)


def _scan(args) -> tuple[SearchStats, list[tuple[tuple, LemmaVerdict]]]:
    """Worker: all failing grids over one X, as picklable keys."""
    X, flavor, variant, cls, drop, phi_variants = args
    stats = SearchStats(algebras=1)
    hits = []
    alts = [{h for h in effective_hypotheses(c, drop) if h.endswith("-special")} for c in CLAUSES[(flavor, variant)]]
    for grid in grids_over(X, flavor, cls, phi_variants=phi_variants, require_any=alts):
        stats.grids += 1
        v = grid.verdict(variant, drop)
        if not v.vacuous:
            stats.non_vacuous += 1
        if not v.conclusion_holds:
            stats.failures += 1
            hits.append((_grid_key(grid), v))
    return stats, hits


def search_counterexamples(
    flavor: Flavor,
    variant: Variant,
    cls: SigmaClass,
    kind: Kind = Kind.MONOID,
    max_order: int = 4,
    drop: Iterable[str] = (),
    jobs: int = 1,
    algebras: Sequence[FiniteAlgebra] | None = None,
    phi_variants: Sequence[str] = ("max",),
    stats: SearchStats | None = None,
) -> Iterator[SearchHit]:
    """Stream every grid whose verdict fails, in candidate order.

    Work is split per middle object ``X``; with ``jobs > 1`` the pieces go
    to a process pool and results are merged back in candidate order.
    """
    if flavor is Flavor.NORMALIZED and not kind.pointed:
        raise AlgebraError("UNSUPPORTED_KIND", "normalized grids need a pointed kind")
    if not cls.accepts(kind):
        raise AlgebraError("CLASS_KIND_MISMATCH", f"{cls.value} on {kind.value}")
    drop = tuple(sorted(set(drop)))
    effective_hypotheses(Clause("", (), ""), drop)  # validates the names
    if algebras is None:
        algebras = candidate_algebras(kind, max_order)
    stats = stats if stats is not None else SearchStats()
    work = [(X, flavor, variant, cls, drop, tuple(phi_variants)) for X in algebras]
    if jobs > 1 and len(work) > 1:
        import multiprocessing as mp

        with mp.get_context("fork").Pool(jobs) as pool:
            for i, (st, hits) in enumerate(pool.imap(_scan, work, chunksize=8)):
                stats.merge(st)
                for key, v in hits:
                    yield SearchHit(i, grid_from_key(algebras[i], flavor, cls, key), v)
    else:
        for i, w in enumerate(work):
            st, hits = _scan(w)
            stats.merge(st)
            for key, v in hits:
                yield SearchHit(i, grid_from_key(algebras[i], flavor, cls, key), v)


def sweep(
    flavor: Flavor,
    variant: Variant,
    cls: SigmaClass,
    kind: Kind,
    max_order: int,
    jobs: int = 1,
    drop: Iterable[str] = (),
) -> tuple[SearchStats, list[SearchHit]]:
    """Run a search to completion; returns statistics and all failures."""
    stats = SearchStats()
    hits = list(search_counterexamples(flavor, variant, cls, kind, max_order, drop, jobs, stats=stats))
    return stats, hits

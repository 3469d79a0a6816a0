"""Text formats: .alg, .map, .cong, .act and the .3x3 / .ext manifests.

Every writer emits a canonical form, so ``dump(parse(text)) == text`` for
any file the writers produced.  Files refer to each other by paths relative
to the referring file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algebra import AlgebraError, FiniteAlgebra, Homomorphism, Kind, _as_tables
from .relations import Congruence


class ParseError(AlgebraError):
    """Malformed input; carries the file, 1-based line and offending token."""

    def __init__(self, source: str, line: int, token: str, message: str):
        self.source, self.line, self.token = source, line, token
        super().__init__("PARSE_ERROR", f"{source}:{line}: {message} (at {token!r})", (source, line, token))


def _lines(text: str, source: str) -> list[tuple[int, list[str]]]:
    """Non-blank, non-comment lines as (number, tokens)."""
    out = []
    for i, raw in enumerate(text.splitlines(), 1):
        s = raw.split("#", 1)[0].strip()
        if s:
            out.append((i, s.split()))
    return out


class _Cursor:
    def __init__(self, text: str, source: str):
        self.source = source
        self.rows = _lines(text, source)
        self.pos = 0

    def done(self) -> bool:
        return self.pos >= len(self.rows)

    def peek(self) -> tuple[int, list[str]]:
        if self.done():
            n = self.rows[-1][0] + 1 if self.rows else 1
            raise ParseError(self.source, n, "<eof>", "unexpected end of file")
        return self.rows[self.pos]

    def take(self, keyword: str | None = None, nargs: int | None = None) -> tuple[int, list[str]]:
        line, toks = self.peek()
        if keyword is not None and toks[0] != keyword:
            raise ParseError(self.source, line, toks[0], f"expected {keyword!r}")
        if nargs is not None and len(toks) != nargs + 1:
            raise ParseError(self.source, line, toks[-1], f"{toks[0]} takes {nargs} argument(s)")
        self.pos += 1
        return line, toks

    def fail(self, message: str, token: str | None = None):
        line, toks = self.rows[min(self.pos, len(self.rows) - 1)] if self.rows else (1, ["<eof>"])
        raise ParseError(self.source, line, token if token is not None else toks[0], message)


# --- algebras ---------------------------------------------------------------


def dump_algebra(A: FiniteAlgebra) -> str:
    out = [f"kind {A.kind.value}", f"order {A.order}", "names " + " ".join(A.names)]
    if A.kind.pointed:
        out.append(f"{A.kind.constant_name} {A.names[A.constant]}")
    for name, t in zip(A.kind.op_names, A.tables):
        out.append(f"op {name}")
        out.extend(" ".join(A.names[v] for v in row) for row in t)
    return "\n".join(out) + "\n"


def parse_algebra(text: str, source: str = "<string>") -> FiniteAlgebra:
    """Parse without checking axioms; ``validate_algebra`` does that."""
    cur = _Cursor(text, source)
    line, toks = cur.take("kind", 1)
    try:
        kind = Kind(toks[1])
    except ValueError:
        raise ParseError(source, line, toks[1], "unknown kind") from None
    line, toks = cur.take("order", 1)
    try:
        n = int(toks[1])
    except ValueError:
        raise ParseError(source, line, toks[1], "order must be an integer") from None
    if n < 1:
        raise ParseError(source, line, toks[1], "order must be positive")
    line, toks = cur.take("names", n)
    names = toks[1:]
    if len(set(names)) != n:
        raise ParseError(source, line, names[0], "duplicate element name")
    index = {nm: i for i, nm in enumerate(names)}

    def lookup(line, tok):
        try:
            return index[tok]
        except KeyError:
            raise ParseError(source, line, tok, "unknown element") from None

    constant = None
    if kind.pointed:
        line, toks = cur.take(kind.constant_name, 1)
        constant = lookup(line, toks[1])
    tables = []
    for op in kind.op_names:
        cur.take("op", 1)
        line, toks = cur.rows[cur.pos - 1]
        if toks[1] != op:
            raise ParseError(source, line, toks[1], f"expected table {op!r}")
        t = np.empty((n, n), dtype=np.int64)
        for i in range(n):
            line, toks = cur.peek()
            if len(toks) != n:
                raise ParseError(source, line, toks[0], f"table row needs {n} entries")
            t[i] = [lookup(line, tok) for tok in toks]
            cur.pos += 1
        tables.append(t)
    A = FiniteAlgebra(kind, tuple(names), _as_tables(kind, tables), constant)
    if kind is Kind.QUANDLE and not cur.done() and cur.peek()[1][:2] == ["op", "lhdi"]:
        # optional redundant inverse table; must agree with the derived one
        cur.take("op", 1)
        for i in range(n):
            line, toks = cur.peek()
            if len(toks) != n:
                raise ParseError(source, line, toks[0], f"table row needs {n} entries")
            row = [lookup(line, tok) for tok in toks]
            for j, v in enumerate(row):
                if A.lhd[v, j] != i:
                    raise ParseError(source, line, toks[j], "lhdi disagrees with the inverse of lhd")
            cur.pos += 1
    if not cur.done():
        cur.fail("trailing content")
    return A


# --- maps -------------------------------------------------------------------


def dump_map(h: Homomorphism, dom_ref: str, cod_ref: str) -> str:
    out = [f"map {dom_ref} -> {cod_ref}"]
    out.extend(f"{h.dom.names[i]} => {h.cod.names[v]}" for i, v in enumerate(h.map))
    return "\n".join(out) + "\n"


def parse_map_header(text: str, source: str = "<string>") -> tuple[str, str]:
    cur = _Cursor(text, source)
    line, toks = cur.take("map")
    if len(toks) != 4 or toks[2] != "->":
        raise ParseError(source, line, toks[-1], "expected 'map <dom> -> <cod>'")
    return toks[1], toks[3]


def parse_map(text: str, dom: FiniteAlgebra, cod: FiniteAlgebra, source: str = "<string>") -> Homomorphism:
    """Element assignment only; the homomorphism property is checked by callers."""
    cur = _Cursor(text, source)
    cur.take("map")
    m = np.full(dom.order, -1, dtype=np.int64)
    di = {nm: i for i, nm in enumerate(dom.names)}
    ci = {nm: i for i, nm in enumerate(cod.names)}
    while not cur.done():
        line, toks = cur.take()
        if len(toks) != 3 or toks[1] != "=>":
            raise ParseError(source, line, toks[0], "expected '<a> => <b>'")
        if toks[0] not in di:
            raise ParseError(source, line, toks[0], "unknown domain element")
        if toks[2] not in ci:
            raise ParseError(source, line, toks[2], "unknown codomain element")
        if m[di[toks[0]]] >= 0:
            raise ParseError(source, line, toks[0], "element assigned twice")
        m[di[toks[0]]] = ci[toks[2]]
    missing = np.nonzero(m < 0)[0]
    if len(missing):
        raise ParseError(source, len(cur.rows) + 1, dom.names[missing[0]], "element not assigned")
    return Homomorphism(dom, cod, m)


# --- congruences ------------------------------------------------------------


def dump_congruence(C: Congruence, over_ref: str) -> str:
    A = C.carrier
    out = [f"over {over_ref}"]
    out.extend("block " + " ".join(A.names[i] for i in blk) for blk in C.block_lists())
    return "\n".join(out) + "\n"


def parse_congruence_header(text: str, source: str = "<string>") -> str:
    return _Cursor(text, source).take("over", 1)[1][1]


def parse_congruence(text: str, A: FiniteAlgebra, source: str = "<string>") -> Congruence:
    """Blocks as written; compatibility is checked by callers via ``make_congruence``."""
    cur = _Cursor(text, source)
    cur.take("over", 1)
    labels = np.full(A.order, -1, dtype=np.int64)
    idx = {nm: i for i, nm in enumerate(A.names)}
    b = 0
    while not cur.done():
        line, toks = cur.take("block")
        for tok in toks[1:]:
            if tok not in idx:
                raise ParseError(source, line, tok, "unknown element")
            if labels[idx[tok]] >= 0:
                raise ParseError(source, line, tok, "element in two blocks")
            labels[idx[tok]] = b
        b += 1
    missing = np.nonzero(labels < 0)[0]
    if len(missing):
        raise ParseError(source, len(cur.rows) + 1, A.names[missing[0]], "element in no block")
    return Congruence(A, labels)


# --- actions ----------------------------------------------------------------


def dump_action(phi: np.ndarray, Y: FiniteAlgebra, A: FiniteAlgebra, Y_ref: str, A_ref: str) -> str:
    out = [f"action {Y_ref} on {A_ref}"]
    out.extend(f"{Y.names[y]} : " + " ".join(A.names[v] for v in phi[y]) for y in range(Y.order))
    return "\n".join(out) + "\n"


def parse_action_header(text: str, source: str = "<string>") -> tuple[str, str]:
    line, toks = _Cursor(text, source).take("action")
    if len(toks) != 4 or toks[2] != "on":
        raise ParseError(source, line, toks[-1], "expected 'action <Y> on <A>'")
    return toks[1], toks[3]


def parse_action(text: str, Y: FiniteAlgebra, A: FiniteAlgebra, source: str = "<string>") -> np.ndarray:
    cur = _Cursor(text, source)
    cur.take("action")
    phi = np.full((Y.order, A.order), -1, dtype=np.int64)
    yi = {nm: i for i, nm in enumerate(Y.names)}
    ai = {nm: i for i, nm in enumerate(A.names)}
    seen = set()
    while not cur.done():
        line, toks = cur.take()
        if len(toks) != A.order + 2 or toks[1] != ":":
            raise ParseError(source, line, toks[0], f"expected '<y> : ' and {A.order} entries")
        if toks[0] not in yi or toks[0] in seen:
            raise ParseError(source, line, toks[0], "unknown or repeated base element")
        seen.add(toks[0])
        for j, tok in enumerate(toks[2:]):
            if tok not in ai:
                raise ParseError(source, line, tok, "unknown kernel element")
            phi[yi[toks[0]], j] = ai[tok]
    if len(seen) != Y.order:
        raise ParseError(source, len(cur.rows) + 1, "<eof>", "action row missing")
    return phi


# --- manifests --------------------------------------------------------------


@dataclass(frozen=True)
class Manifest:
    """A header line plus ordered ``(role, key, path)`` entries."""

    header: tuple[str, ...]
    entries: tuple[tuple[str, str, str], ...]
    lines: tuple[int, ...] = ()

    def line_of(self, role: str, key: str | None = None) -> int:
        for (r, k, _), n in zip(self.entries, self.lines):
            if r == role and (key is None or k == key):
                return n
        return 1

    def get(self, role: str, key: str | None = None) -> str | None:
        for r, k, p in self.entries:
            if r == role and (key is None or k == key):
                return p
        return None

    def dump(self) -> str:
        out = [" ".join(self.header)]
        out.extend(f"{r} {k} {p}" if k else f"{r} {p}" for r, k, p in self.entries)
        return "\n".join(out) + "\n"


def parse_manifest(text: str, header: str, source: str = "<string>") -> Manifest:
    cur = _Cursor(text, source)
    line, head = cur.take(header)
    entries, lines = [], []
    while not cur.done():
        line, toks = cur.take()
        if len(toks) == 3:
            entries.append((toks[0], toks[1], toks[2]))
        elif len(toks) == 2:
            entries.append((toks[0], "", toks[1]))
        else:
            raise ParseError(source, line, toks[0], "expected '<role> [<key>] <path>'")
        lines.append(line)
    return Manifest(tuple(head), tuple(entries), tuple(lines))


# --- file-level loading -----------------------------------------------------


class Loader:
    """Reads files relative to their referrer, caching parsed algebras by path."""

    def __init__(self):
        self._algebras: dict[str, FiniteAlgebra] = {}

    @staticmethod
    def _read(path: str | os.PathLike) -> str:
        try:
            return Path(path).read_text(encoding="utf-8")
        except OSError as err:
            raise ParseError(str(path), 0, str(path), f"cannot read file: {err.strerror}") from None

    @staticmethod
    def _rel(ref: str, base: str | os.PathLike) -> str:
        return os.path.normpath(os.path.join(os.path.dirname(os.fspath(base)), ref))

    def algebra(self, path) -> FiniteAlgebra:
        key = os.path.normpath(os.fspath(path))
        if key not in self._algebras:
            self._algebras[key] = parse_algebra(self._read(key), key)
        return self._algebras[key]

    def map(self, path) -> Homomorphism:
        text = self._read(path)
        d, c = parse_map_header(text, str(path))
        return parse_map(text, self.algebra(self._rel(d, path)), self.algebra(self._rel(c, path)), str(path))

    def congruence(self, path) -> Congruence:
        text = self._read(path)
        over = parse_congruence_header(text, str(path))
        return parse_congruence(text, self.algebra(self._rel(over, path)), str(path))

    def action(self, path) -> tuple[FiniteAlgebra, FiniteAlgebra, np.ndarray]:
        text = self._read(path)
        y, a = parse_action_header(text, str(path))
        Y, A = self.algebra(self._rel(y, path)), self.algebra(self._rel(a, path))
        return Y, A, parse_action(text, Y, A, str(path))

    def manifest(self, path, header: str) -> Manifest:
        return parse_manifest(self._read(path), header, str(path))

    def diagram(self, path):
        """``(flavor, class or None, objects, maps)`` from a .3x3 manifest."""
        from .diagrams import Flavor, layout
        from .points import SigmaClass

        m = self.manifest(path, "diagram")
        if len(m.header) != 2:
            raise ParseError(str(path), 1, "diagram", "expected 'diagram <flavor>'")
        try:
            flavor = Flavor(m.header[1])
        except ValueError:
            raise ParseError(str(path), 1, m.header[1], "unknown flavor") from None
        obj_names, map_shape = layout(flavor)
        cls = m.get("class")
        try:
            cls = SigmaClass(cls) if cls else None
        except ValueError:
            raise ParseError(str(path), m.line_of("class"), cls, "unknown class") from None
        objects, maps = {}, {}
        for (role, key, ref), line in zip(m.entries, m.lines):
            if role == "object":
                if key not in obj_names:
                    raise ParseError(str(path), line, key, "unknown grid position")
                objects[key] = self.algebra(self._rel(ref, path))
            elif role == "map":
                if key not in map_shape:
                    raise ParseError(str(path), line, key, "unknown map label")
                maps[key] = self.map(self._rel(ref, path))
            elif role != "class":
                raise ParseError(str(path), line, role, "unknown manifest role")
        missing = [n for n in obj_names if n not in objects] + [n for n in map_shape if n not in maps]
        if missing:
            raise ParseError(str(path), len(m.lines) + 1, missing[0], "grid entry missing")
        return flavor, cls, objects, maps

    def extension(self, path):
        """``(f, iota, action or None)`` from a .ext manifest."""
        m = self.manifest(path, "extension")
        refs = {}
        for role in ("base", "kernel", "total", "inclusion", "projection"):
            ref = m.get(role)
            if ref is None:
                raise ParseError(str(path), len(m.lines) + 1, role, "missing manifest entry")
            refs[role] = self._rel(ref, path)
        Y, A, X = (self.algebra(refs[r]) for r in ("base", "kernel", "total"))
        iota, f = self.map(refs["inclusion"]), self.map(refs["projection"])
        if not (iota.dom.same_structure(A) and iota.cod.same_structure(X)):
            raise ParseError(str(path), m.line_of("inclusion"), "inclusion", "inclusion is not kernel -> total")
        if not (f.dom.same_structure(X) and f.cod.same_structure(Y)):
            raise ParseError(str(path), m.line_of("projection"), "projection", "projection is not total -> base")
        act = m.get("action")
        phi = None
        if act is not None:
            _, _, phi = self.action(self._rel(act, path))
        return f, iota, phi


# --- writers ----------------------------------------------------------------


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8")


def write_algebra(A: FiniteAlgebra, path) -> Path:
    p = Path(path)
    _write(p, dump_algebra(A))
    return p


def write_map(h: Homomorphism, path, dom_path, cod_path) -> Path:
    p = Path(path)
    rel = lambda q: os.path.relpath(q, p.parent)
    _write(p, dump_map(h, rel(dom_path), rel(cod_path)))
    return p


def write_congruence(C: Congruence, path, over_path) -> Path:
    p = Path(path)
    _write(p, dump_congruence(C, os.path.relpath(over_path, p.parent)))
    return p


def write_diagram(flavor, objects: dict, maps: dict, directory, stem: str = "grid", cls=None) -> Path:
    """One .alg per position, one .map per arrow, and the ``<stem>.3x3`` manifest."""
    from .diagrams import layout

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    obj_names, map_shape = layout(flavor)
    files = {}
    entries = []
    if cls is not None:
        entries.append(("class", "", cls.value))
    for name in obj_names:
        files[name] = write_algebra(objects[name], d / f"{stem}.{name}.alg")
        entries.append(("object", name, files[name].name))
    for label, (src, dst) in map_shape.items():
        p = write_map(maps[label], d / f"{stem}.{label}.map", files[src], files[dst])
        entries.append(("map", label, p.name))
    man = d / f"{stem}.3x3"
    _write(man, Manifest(("diagram", flavor.value), tuple(entries)).dump())
    return man


def write_extension(E, directory, stem: str = "ext", with_action: bool = True) -> Path:
    """Kernel, total and base algebras, both maps, the action and ``<stem>.ext``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    pa = write_algebra(E.A, d / f"{stem}.kernel.alg")
    px = write_algebra(E.X, d / f"{stem}.total.alg")
    py = write_algebra(E.Y, d / f"{stem}.base.alg")
    pi = write_map(E.iota, d / f"{stem}.inclusion.map", pa, px)
    pf = write_map(E.f, d / f"{stem}.projection.map", px, py)
    entries = [
        ("base", "", py.name),
        ("kernel", "", pa.name),
        ("total", "", px.name),
        ("inclusion", "", pi.name),
        ("projection", "", pf.name),
    ]
    if with_action:
        pact = d / f"{stem}.action.act"
        _write(pact, dump_action(E.action, E.Y, E.A, py.name, pa.name))
        entries.append(("action", "", pact.name))
    man = d / f"{stem}.ext"
    _write(man, Manifest(("extension",), tuple(entries)).dump())
    return man

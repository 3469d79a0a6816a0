"""Command line front end: ``sigmachase <verb> ...``.

Every verb prints one ``key=value`` record per line and exits 0 when all
verdicts hold, 1 when some verdict is false or vacuous, and 2 on malformed
input.  With ``--out DIR`` the records also go to ``DIR/report.txt``
together with any objects the verb builds.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import baer, diagrams, io, points, relations
from .algebra import AlgebraError, Kind, check_axioms, make_homomorphism
from .diagrams import Flavor, Status, Variant
from .points import ClassProperty, SigmaClass

log = logging.getLogger("sigmachase")

EXIT_OK, EXIT_FALSE, EXIT_MALFORMED = 0, 1, 2


class Malformed(Exception):
    """Input that parses but is not an instance of the verb's subject."""


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    if isinstance(v, (np.integer, int)):
        return str(int(v))
    s = str(v)
    if not s or any(c.isspace() or c in '="' for c in s):
        return json.dumps(s)
    return s


class Report:
    """Ordered records; verdict records decide the exit code."""

    def __init__(self, verb: str):
        self.verb = verb
        self.records: list[dict] = []
        self.failed = False

    def info(self, **fields):
        self.records.append({"record": "info", **fields})

    def verdict(self, name: str, value, witness=None, **fields):
        """``value`` is a bool or a Status; anything but true/HOLDS fails."""
        if isinstance(value, Status):
            ok = value is Status.HOLDS
            shown = value.value
        else:
            ok = bool(value)
            shown = ok
        rec = {"record": "verdict", "name": name, "value": shown, **fields}
        if not ok:
            self.failed = True
            rec["witness"] = witness if witness is not None else "none"
        self.records.append(rec)

    def lines(self) -> list[str]:
        return [" ".join(f"{k}={_fmt(v)}" for k, v in r.items()) for r in self.records]

    @property
    def exit_code(self) -> int:
        return EXIT_FALSE if self.failed else EXIT_OK

    def emit(self, out_dir: Path | None):
        text = "\n".join(self.lines() + [f"result={'fail' if self.failed else 'pass'}"]) + "\n"
        sys.stdout.write(text)
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / "report.txt").write_text(text, encoding="utf-8")


# --- helpers ----------------------------------------------------------------


def _hom(loader: io.Loader, path: str):
    h = loader.map(path)
    try:
        return make_homomorphism(h.dom, h.cod, h.map)
    except AlgebraError as err:
        raise Malformed(f"{path}: {err}") from None


def _valid_algebra(A, path: str):
    bad = check_axioms(A.kind, A.tables, A.constant)
    if bad is not None:
        raise Malformed(f"{path}: {bad.describe(A.names)}")
    return A


def _cls(args, kind: Kind) -> SigmaClass:
    cls = SigmaClass(args.cls) if args.cls else points.default_class(kind)
    if not cls.accepts(kind):
        raise AlgebraError("CLASS_KIND_MISMATCH", f"{cls.value} on {kind.value}")
    return cls


def _names(A, elems) -> str:
    return ",".join(A.names[int(i)] for i in elems)


def _extension(loader, path: str) -> baer.AffineExtension:
    f, iota, phi = loader.extension(path)
    try:
        f = make_homomorphism(f.dom, f.cod, f.map)
        iota = make_homomorphism(iota.dom, iota.cod, iota.map)
        E = baer.make_extension(f, iota)
    except AlgebraError as err:
        raise Malformed(f"{path}: {err}") from None
    if phi is not None and not np.array_equal(phi, E.action):
        raise Malformed(f"{path}: declared action differs from the induced one")
    return E


# --- verbs ------------------------------------------------------------------


def cmd_validate(args, rep: Report, loader):
    A = loader.algebra(args.file)
    bad = check_axioms(A.kind, A.tables, A.constant)
    rep.info(kind=A.kind.value, order=A.order)
    wit = None if bad is None else f"AXIOM_VIOLATION {bad.describe(A.names)}"
    rep.verdict("axioms", bad is None, wit)


def cmd_classify_point(args, rep: Report, loader):
    f, s = _hom(loader, args.f), _hom(loader, args.s)
    try:
        p = points.make_point(f, s)
    except AlgebraError as err:
        raise Malformed(str(err)) from None
    cls = _cls(args, f.dom.kind)
    v = points.classify_point(p, cls)
    wit = None
    if v.violation:
        viol = v.violation
        X = p.X
        wit = f"mu_{p.Y.names[viol['fiber']]} at {X.names[viol['element']]}: {viol['reason']}"
    rep.verdict(cls.value, v.in_class, wit)
    if v.in_class and v.retraction is not None and cls is SigmaClass.SCHREIER:
        ids = points.verify_retraction_identities(points.schreier_point(p))
        for name, (checked, w) in ids.results.items():
            rep.verdict("identity", w is None, w, identity=name, checked=checked)


def cmd_special(args, rep: Report, loader):
    path = args.file
    if path.endswith(".alg"):
        A = _valid_algebra(loader.algebra(path), path)
        cls = _cls(args, A.kind)
        rep.verdict("special-object", points.is_sigma_special_object(A, cls), "terminal map is not special", cls=cls.value)
    elif path.endswith(".cong"):
        C = loader.congruence(path)
        try:
            C = relations.make_congruence(C.carrier, C.blocks)
        except AlgebraError as err:
            raise Malformed(f"{path}: {err}") from None
        cls = _cls(args, C.carrier.kind)
        v = points.classify_point(points.relation_point(C), cls)
        rep.verdict("special-congruence", v.in_class, str(v.violation), cls=cls.value)
    else:
        f = _hom(loader, path)
        cls = _cls(args, f.dom.kind)
        v = points.is_sigma_special(f, cls)
        rep.verdict("special", v.in_class, str(v.violation), cls=cls.value)


def cmd_regular_pushout(args, rep: Report, loader):
    f, fp, x, y = (_hom(loader, p) for p in (args.f, args.fp, args.x, args.y))
    try:
        v = points.is_regular_pushout(f, fp, x, y)
    except AlgebraError as err:
        raise Malformed(str(err)) from None
    wit = None
    if v.missed is not None:
        wit = f"pullback element ({y.dom.names[v.missed[0]]},{x.cod.names[v.missed[1]]}) not hit"
    rep.info(pushout=v.is_pushout, R_x_surjective=v.R_x_surjective, R_f_surjective=v.R_f_surjective)
    rep.verdict("regular-pushout", v.regular, wit)


def cmd_check_seq(args, rep: Report, loader):
    k, f = _hom(loader, args.k), _hom(loader, args.f)
    cls = SigmaClass(args.cls) if args.cls else None
    try:
        v = diagrams.check_exact_sequence(k, f, cls)
    except AlgebraError as err:
        raise Malformed(str(err)) from None
    rep.verdict("exact", v.exact, v.witness)
    if cls is not None:
        rep.verdict("sigma-exact", v.sigma_exact, "f is not special" if v.exact else v.witness, cls=cls.value)


def cmd_check_fork(args, rep: Report, loader):
    d0, d1, f = _hom(loader, args.d0), _hom(loader, args.d1), _hom(loader, args.f)
    cls = SigmaClass(args.cls) if args.cls else None
    try:
        v = diagrams.check_fork(diagrams.Fork(d0.dom, d0, d1, f), diagrams.Side.BOTH, cls)
    except AlgebraError as err:
        raise Malformed(str(err)) from None
    rep.verdict("left-exact", v.left, v.witness)
    rep.verdict("right-exact", v.right, v.witness)
    if cls is not None:
        rep.verdict("sigma-exact", v.sigma_exact, "f is not special" if v.exact else v.witness, cls=cls.value)


def cmd_check_3x3(args, rep: Report, loader):
    flavor, cls, objects, maps = loader.diagram(args.bundle)
    if args.flavor and Flavor(args.flavor) is not flavor:
        raise Malformed(f"bundle is {flavor.value}, not {args.flavor}")
    if args.cls:
        cls = SigmaClass(args.cls)
    for name, h in maps.items():
        try:
            maps[name] = make_homomorphism(h.dom, h.cod, h.map)
        except AlgebraError as err:
            raise Malformed(f"map {name}: {err}") from None
    try:
        d = diagrams.build_3x3(flavor, objects, maps, cls)
    except AlgebraError as err:
        raise Malformed(str(err)) from None
    variants = [Variant(args.variant)] if args.variant else list(Variant)
    for var in variants:
        v = diagrams.verify_lemma(d, var, args.drop)
        for c in v.clauses:
            hyps = ",".join(f"{h}:{_fmt(b)}" for h, b in c.hypotheses)
            rep.info(clause=f"{var.value}/{c.name}", status=c.status.value, hypotheses=hyps, witness=c.witness)
        rep.verdict(var.value, v.status, v.witness or "every clause is vacuous")


def _search_lemma(args, out: Path | None, rep: Report):
    flavor = Flavor(args.flavor or "denormalized")
    variant = Variant(args.variant or "upper")
    kind = Kind(args.kind)
    cls = _cls(args, kind)
    algebras = diagrams.candidate_algebras(kind, args.max_order)
    if args.sample:
        rng = np.random.default_rng(args.seed)
        pick = np.sort(rng.choice(len(algebras), size=min(args.sample, len(algebras)), replace=False))
        algebras = [algebras[i] for i in pick]
    stats = diagrams.SearchStats()
    phis = tuple(args.phi.split(",")) if args.phi else ("max",)
    hits = []
    for hit in diagrams.search_counterexamples(
        flavor, variant, cls, kind, args.max_order, args.drop, args.jobs, algebras, phis, stats
    ):
        hits.append(hit)
        if args.limit and len(hits) >= args.limit:
            break
    rep.info(
        target="lemma",
        flavor=flavor.value,
        variant=variant.value,
        cls=cls.value,
        kind=kind.value,
        max_order=args.max_order,
        drop=",".join(sorted(args.drop)) or "none",
        algebras=stats.algebras,
        grids=stats.grids,
        non_vacuous=stats.non_vacuous,
    )
    for i, hit in enumerate(hits):
        name = f"hit-{i:04d}"
        rep.verdict("grid", hit.verdict.status, hit.verdict.witness, hit=name, candidate=hit.index)
        if out is not None:
            d = hit.grid.materialize()
            io.write_diagram(d.flavor, d.objects, d.maps, out / name, "grid", d.cls)
    rep.verdict("no-counterexample", not hits, f"{len(hits)} failing grid(s)")


def _search_direct_image(args, out: Path | None, rep: Report):
    algebras = diagrams.candidate_algebras(Kind(args.kind), args.max_order)
    hits = []
    for f, R, d in relations.nontransitive_direct_images(algebras):
        hits.append((f, R, d))
        if len(hits) >= (args.limit or 1):
            break
    rep.info(target="direct-image", kind=args.kind, max_order=args.max_order)
    for i, (f, R, d) in enumerate(hits):
        name = f"hit-{i:04d}"
        a, b, c = d.witness
        Y = f.cod
        rep.verdict("transitive", False, f"{Y.names[a]}~{Y.names[b]}~{Y.names[c]}", hit=name)
        if out is not None:
            base = out / name
            base.mkdir(parents=True)
            px = io.write_algebra(f.dom, base / "X.alg")
            py = io.write_algebra(f.cod, base / "Y.alg")
            io.write_map(f, base / "f.map", px, py)
            io.write_congruence(R, base / "R.cong", px)
    rep.verdict("no-counterexample", not hits, f"{len(hits)} non-transitive image(s)")


def _search_pushout(args, out: Path | None, rep: Report):
    algebras = diagrams.candidate_algebras(Kind(args.kind), args.max_order)
    hits = []
    for sq, v in points.irregular_pushouts(algebras):
        hits.append((sq, v))
        if len(hits) >= (args.limit or 1):
            break
    rep.info(target="pushout", kind=args.kind, max_order=args.max_order)
    for i, ((f, fp, x, y), v) in enumerate(hits):
        name = f"hit-{i:04d}"
        wit = f"pullback element ({y.dom.names[v.missed[0]]},{x.cod.names[v.missed[1]]}) not hit"
        rep.verdict("regular-pushout", False, wit, hit=name, pushout=v.is_pushout)
        if out is not None:
            base = out / name
            base.mkdir(parents=True)
            files = {
                "X": io.write_algebra(f.dom, base / "X.alg"),
                "Y": io.write_algebra(f.cod, base / "Y.alg"),
                "Xp": io.write_algebra(x.cod, base / "Xp.alg"),
                "Yp": io.write_algebra(y.cod, base / "Yp.alg"),
            }
            for label, h, s, t in (("f", f, "X", "Y"), ("fp", fp, "Xp", "Yp"), ("x", x, "X", "Xp"), ("y", y, "Y", "Yp")):
                io.write_map(h, base / f"{label}.map", files[s], files[t])
    rep.verdict("no-counterexample", not hits, f"{len(hits)} irregular pushout(s)")


def cmd_search(args, rep: Report, loader):
    out = Path(args.out) if args.out else None
    if out is not None and out.exists() and any(out.iterdir()):
        raise Malformed(f"output directory {out} is not empty")
    {"lemma": _search_lemma, "direct-image": _search_direct_image, "pushout": _search_pushout}[args.target](args, out, rep)


def cmd_probe(args, rep: Report, loader):
    prop = ClassProperty(args.property)
    kind = Kind(args.kind)
    cls = _cls(args, kind)
    n = applicable = 0
    for X in diagrams.candidate_algebras(kind, args.max_order):
        for inst in points.probe_instances(prop, X, cls):
            v = points.probe_class_property(prop, inst, cls)
            n += 1
            applicable += v.applicable
            if not v.holds:
                rep.verdict("instance", False, f"conclusion fails over {X.names}", order=X.order)
    rep.info(property=prop.value, cls=cls.value, max_order=args.max_order, instances=n, applicable=applicable)
    rep.verdict(prop.value, not rep.failed, "violations above")


def cmd_direction(args, rep: Report, loader):
    E = _extension(loader, args.ext)
    r = baer.direction(E)
    D = r.direction
    rep.info(base_order=E.Y.order, kernel_order=E.A.order, classes=r.quotient.order, trivial_action=D.is_trivial_action)
    for y in range(E.Y.order):
        rep.info(action=E.Y.names[y], images=_names(E.A, D.phi[y]))
    rep.verdict("semidirect-iso", r.iso.is_bijective, "quotient is not the semidirect product")
    if args.out:
        io.write_extension(D.as_extension(), Path(args.out), "direction")


def cmd_baer_sum(args, rep: Report, loader):
    E1, E2 = _extension(loader, args.e1), _extension(loader, args.e2)
    try:
        S = baer.baer_sum(E1, E2)
    except AlgebraError as err:
        if err.code == "DIRECTION_MISMATCH":
            raise Malformed(str(err)) from None
        rep.verdict("congruence", False, str(err))
        return
    rep.info(order=S.X.order, split=any(True for _ in baer.splittings(S)))
    rep.verdict("direction-preserved", np.array_equal(S.action, E1.action))
    if args.out:
        io.write_extension(S, Path(args.out), "sum")


def cmd_push_forward(args, rep: Report, loader):
    E = _extension(loader, args.ext)
    h = _hom(loader, args.h)
    if args.action:
        Y, B, phi = loader.action(args.action)
    else:
        B, phi = h.cod, baer.trivial_action(E.Y, h.cod)
    try:
        target = baer.semidirect_product(E.Y, B, phi)
        R = baer.push_forward(E, h, target)
    except AlgebraError as err:
        if err.code in ("NOT_EQUIVARIANT", "KERNEL_NOT_ABELIAN", "AXIOM_VIOLATION", "SHAPE_ERROR"):
            raise Malformed(str(err)) from None
        rep.verdict("congruence", False, str(err))
        return
    rep.info(order=R.X.order, split=any(True for _ in baer.splittings(R)))
    rep.verdict("direction-preserved", np.array_equal(R.action, target.phi))
    if args.out:
        io.write_extension(R, Path(args.out), "pushed")


def cmd_ext_classify(args, rep: Report, loader):
    Y = _valid_algebra(loader.algebra(args.base), args.base)
    A = _valid_algebra(loader.algebra(args.kernel), args.kernel)
    if Y.order * A.order > args.max_order:
        raise Malformed(f"extensions have order {Y.order * A.order} > --max-order {args.max_order}")
    phi = loader.action(args.action)[2] if args.action else None
    try:
        exts = baer.extensions(Y, A, phi)
    except AlgebraError as err:
        raise Malformed(str(err)) from None
    classes = baer.classify_extensions(exts)
    rep.info(extensions=len(exts), classes=len(classes))
    for i, c in enumerate(classes):
        rep.info(cls_index=i, members=len(c.members), split=c.split, total=",".join(map(str, c.representative.X.mul.ravel())))
        if args.out:
            io.write_extension(c.representative, Path(args.out), f"class-{i:02d}")
    rep.verdict("nonempty", bool(classes), "no extension with this direction")


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sigmachase", description="Finite-algebra checks for Schreier-type 3x3 lemmas and Baer sums.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)

    def verb(name, fn, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(fn=fn)
        p.add_argument("--out", help="directory for report.txt and built objects")
        return p

    def with_class(p, required=False):
        p.add_argument("--class", dest="cls", choices=[c.value for c in SigmaClass], required=required)

    p = verb("validate", cmd_validate, "check the axioms of an .alg file")
    p.add_argument("file")

    p = verb("classify-point", cmd_classify_point, "classify a split epimorphism")
    with_class(p, required=True)
    p.add_argument("f")
    p.add_argument("s")

    p = verb("special", cmd_special, "is a map, congruence or object special")
    with_class(p, required=True)
    p.add_argument("file", help=".map, .cong or .alg")

    p = verb("regular-pushout", cmd_regular_pushout, "check a square of surjections fp x = y f")
    for a in ("f", "fp", "x", "y"):
        p.add_argument(a)

    p = verb("check-seq", cmd_check_seq, "exactness of k then f")
    with_class(p)
    p.add_argument("k")
    p.add_argument("f")

    p = verb("check-fork", cmd_check_fork, "exactness of a fork d0, d1 then f")
    with_class(p)
    for a in ("d0", "d1", "f"):
        p.add_argument(a)

    def lemma_flags(p):
        p.add_argument("--variant", choices=[v.value for v in Variant])
        p.add_argument("--flavor", choices=[f.value for f in Flavor])
        p.add_argument("--drop", action="append", default=[], choices=diagrams.DROPPABLE)

    p = verb("check-3x3", cmd_check_3x3, "evaluate the 3x3 lemma on a .3x3 bundle")
    with_class(p)
    lemma_flags(p)
    p.add_argument("bundle")

    p = verb("search", cmd_search, "exhaustive counterexample search")
    with_class(p)
    lemma_flags(p)
    p.add_argument("--target", choices=("lemma", "direct-image", "pushout"), default="lemma")
    p.add_argument("--kind", choices=[k.value for k in Kind], default="monoid")
    p.add_argument("--max-order", type=int, default=4)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="seed for --sample")
    p.add_argument("--sample", type=int, default=0, help="scan only this many candidate algebras")
    p.add_argument("--limit", type=int, default=0, help="stop after this many hits")
    p.add_argument("--phi", help="denormalized left-column variants, e.g. max,min")

    p = verb("probe", cmd_probe, "check a class property on every small instance")
    with_class(p, required=True)
    p.add_argument("--property", choices=[c.value for c in ClassProperty], required=True)
    p.add_argument("--kind", choices=[k.value for k in Kind], default="monoid")
    p.add_argument("--max-order", type=int, default=3)
    p.add_argument("--jobs", type=int, default=1)

    p = verb("direction", cmd_direction, "direction of an extension bundle")
    p.add_argument("ext")

    p = verb("baer-sum", cmd_baer_sum, "Baer sum of two extension bundles")
    p.add_argument("e1")
    p.add_argument("e2")

    p = verb("push-forward", cmd_push_forward, "push an extension forward along a kernel map")
    p.add_argument("ext")
    p.add_argument("h", help=".map from the kernel to the new kernel")
    p.add_argument("--action", help=".act for the new kernel (default trivial)")

    p = verb("ext-classify", cmd_ext_classify, "enumerate extensions and bucket them by equivalence")
    p.add_argument("--base", required=True)
    p.add_argument("--kernel", required=True)
    p.add_argument("--action", help=".act restricting the direction")
    p.add_argument("--max-order", type=int, default=6)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return EXIT_MALFORMED
    rep = Report(args.verb)
    try:
        args.fn(args, rep, io.Loader())
    except io.ParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_MALFORMED
    except (Malformed, AlgebraError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_MALFORMED
    out = Path(args.out) if args.out else None
    if args.verb == "search" and out is not None:
        out.mkdir(parents=True, exist_ok=True)
    rep.emit(out)
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())

import subprocess
import sys

import numpy as np
import pytest

from sigmachase import io
from sigmachase.algebra import Homomorphism, Kind, chain_semilattice, cyclic_group, make_homomorphism, subalgebra
from sigmachase.baer import make_extension, semidirect_product, trivial_action
from sigmachase.cli import main
from sigmachase.diagrams import Flavor, grids_over
from sigmachase.enumeration import algebras_up_to
from sigmachase.points import SigmaClass

Z2, Z4 = cyclic_group(2), cyclic_group(4)
MOD2 = make_homomorphism(Z4, Z2, [0, 1, 0, 1])


@pytest.fixture
def files(tmp_path):
    d = tmp_path / "in"
    d.mkdir()
    p = {
        "Z4": io.write_algebra(Z4, d / "Z4.alg"),
        "Z2": io.write_algebra(Z2, d / "Z2.alg"),
        "C3": io.write_algebra(chain_semilattice(), d / "C3.alg"),
    }
    p["mod2"] = io.write_map(MOD2, d / "mod2.map", p["Z4"], p["Z2"])
    p["id2"] = io.write_map(make_homomorphism(Z2, Z2, [0, 1]), d / "id2.map", p["Z2"], p["Z2"])
    p["sec"] = io.write_map(Homomorphism(Z2, Z4, np.array([0, 1])), d / "sec.map", p["Z2"], p["Z4"])
    p["dbl"] = io.write_map(make_homomorphism(Z2, Z4, [0, 2]), d / "dbl.map", p["Z2"], p["Z4"])
    _, iota = subalgebra(Z4, [0, 2])
    E = make_extension(MOD2, Homomorphism(Z2, Z4, iota.map))
    p["ext"] = io.write_extension(E, d / "z4", "z4")
    p["split"] = io.write_extension(semidirect_product(Z2, Z2, trivial_action(Z2, Z2)).as_extension(), d / "split", "split")
    (d / "bad.alg").write_text("kind monoid\norder 2\nnames e a\nunit e\nop mul\na a\na a\n")
    (d / "junk.alg").write_text("kind monoid\norder two\n")
    p["bad"], p["junk"] = d / "bad.alg", d / "junk.alg"
    return {k: str(v) for k, v in p.items()}


def run(*argv):
    return main([str(a) for a in argv])


def test_validate_exit_codes(files, capsys):
    assert run("validate", files["Z4"]) == 0
    assert "result=pass" in capsys.readouterr().out
    assert run("validate", files["bad"]) == 1
    out = capsys.readouterr().out
    assert "value=false" in out and "AXIOM_VIOLATION" in out
    assert run("validate", files["junk"]) == 2
    assert "PARSE_ERROR" in capsys.readouterr().err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as e:
        run("validate")
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        run("classify-point", "--class", "nope", "a", "b")
    assert e.value.code == 2


def test_classify_point(files, capsys):
    assert run("classify-point", "--class", "schreier", files["mod2"], files["dbl"]) == 2  # not a section
    # sec picks 0 -> 0, 1 -> 1 which is not a homomorphism Z2 -> Z4
    assert run("classify-point", "--class", "schreier", files["mod2"], files["sec"]) == 2
    assert run("classify-point", "--class", "acupuncturing", files["id2"], files["id2"]) == 2
    capsys.readouterr()
    assert run("classify-point", "--class", "schreier", files["id2"], files["id2"]) == 0
    out = capsys.readouterr().out
    assert out.count("name=identity value=true") == 5


def test_special_and_sequences(files, capsys):
    assert run("special", "--class", "schreier", files["mod2"]) == 0
    assert run("special", "--class", "schreier", files["Z4"]) == 0
    assert run("special", "--class", "schreier", files["C3"]) == 1
    assert run("check-seq", "--class", "schreier", files["dbl"], files["mod2"]) == 0
    assert run("check-seq", files["id2"], files["id2"]) == 1
    assert run("check-fork", files["id2"], files["id2"], files["id2"]) == 0
    assert run("regular-pushout", files["mod2"], files["id2"], files["mod2"], files["id2"]) == 0
    assert run("regular-pushout", files["mod2"], files["mod2"], files["id2"], files["id2"]) == 2


def test_check_3x3_bundle(tmp_path, capsys):
    X = algebras_up_to(Kind.MONOID, 4)[-1]
    g = next(iter(grids_over(X, Flavor.NORMALIZED, SigmaClass.SCHREIER)))
    d = g.materialize()
    man = io.write_diagram(d.flavor, d.objects, d.maps, tmp_path, "grid", d.cls)
    code = run("check-3x3", man)
    out = capsys.readouterr().out
    assert code in (0, 1) and "name=upper" in out and "name=lower" in out
    assert run("check-3x3", "--flavor", "denormalized", man) == 2


def test_report_file(files, tmp_path):
    out = tmp_path / "out"
    assert run("validate", files["Z2"], "--out", out) == 0
    text = (out / "report.txt").read_text()
    assert "name=axioms" in text and text.endswith("result=pass\n")


def test_baer_verbs(files, tmp_path, capsys):
    assert run("direction", files["ext"]) == 0
    assert "trivial_action=true" in capsys.readouterr().out
    assert run("baer-sum", files["ext"], files["ext"], "--out", tmp_path / "s") == 0
    assert "split=true" in capsys.readouterr().out
    assert (tmp_path / "s" / "sum.ext").exists()
    assert run("push-forward", files["ext"], files["dbl"]) == 0
    assert "order=8 split=true" in capsys.readouterr().out
    assert run("ext-classify", "--base", files["Z2"], "--kernel", files["Z2"]) == 0
    assert "extensions=4 classes=2" in capsys.readouterr().out
    assert run("ext-classify", "--base", files["Z4"], "--kernel", files["Z4"]) == 2


def test_baer_direction_mismatch(files, tmp_path):
    Z3 = cyclic_group(3)
    E = semidirect_product(Z2, Z3, trivial_action(Z2, Z3)).as_extension()
    other = io.write_extension(E, tmp_path, "z3")
    assert run("baer-sum", files["ext"], other) == 2


def test_search_and_probe(tmp_path, capsys):
    assert run("search", "--flavor", "normalized", "--max-order", 3) == 0
    assert run("search", "--flavor", "normalized", "--max-order", 4, "--drop", "lower-exact", "--limit", 1, "--out", tmp_path / "h") == 1
    assert (tmp_path / "h" / "hit-0000" / "grid.3x3").exists()
    assert run("search", "--max-order", 3, "--out", tmp_path / "h") == 2
    assert run("search", "--target", "pushout", "--max-order", 3) == 1
    assert run("search", "--target", "direct-image", "--max-order", 4) == 1
    assert run("probe", "--class", "schreier", "--property", "two-regular", "--max-order", 3) == 0
    assert run("search", "--jobs", 0) == 2


def _search_output(args):
    r = subprocess.run([sys.executable, "-m", "sigmachase.cli", *args], capture_output=True, text=True, check=False)
    return r.returncode, r.stdout


def test_search_deterministic(tmp_path):
    args = ["search", "--flavor", "denormalized", "--max-order", "4", "--drop", "lower-exact", "--sample", "6", "--seed", "3"]
    a, b = _search_output(args), _search_output(args)
    assert a == b and a[1]

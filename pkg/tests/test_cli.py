import json
import subprocess
import sys

import pytest

from specseq import io
from specseq.chain import INT, LesTemplate, Unknown
from specseq.cli import main
from specseq.fga import FgaGroup, GroupHom, image, kernel
from specseq.solver import ZERO, SparsePageTemplate, two_column_template

ZG = FgaGroup(1)


def run(capsys, *argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        import io as _io

        monkeypatch.setattr(sys, "stdin", _io.StringIO(stdin))
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def lib(tmp_path, capsys):
    """Write a library document to a file and return its path."""

    def make(*argv):
        path = tmp_path / ("_".join(str(a).strip("-") for a in argv) + ".json")
        assert main(["library", *map(str, argv), "--out", str(path), "--quiet"]) == 0
        capsys.readouterr()
        return path

    return make


def write(tmp_path, obj, name="doc.json"):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else io.emit(obj))
    return path


NOT_STABLE = {
    "version": 1, "kind": "filtered_complex",
    "levels": [
        {"ranks": [[0, 1], [1, 0]], "differentials": []},
        {"ranks": [[0, 1], [1, 1]], "differentials": [{"degree": 1, "matrix": {"rows": 1, "cols": 1, "data": [[1]]}}]},
    ],
    "inclusions": [[{"degree": 0, "matrix": {"rows": 1, "cols": 1, "data": [[1]]}}]],
}


# -- homology ---------------------------------------------------------------------------

def test_homology_sphere_two(lib, capsys):
    code, out, _ = run(capsys, "homology", lib("sphere", "--n", 2, "--cohomology"))
    assert code == 0 and out.strip() == "0: Z, 1: 0, 2: Z"


def test_homology_torus(lib, capsys):
    code, out, _ = run(capsys, "homology", lib("torus"))
    assert code == 0 and out.strip() == "0: Z, 1: Z^2, 2: Z"


def test_homology_at_single_index(lib, capsys):
    code, out, _ = run(capsys, "homology", lib("rp", "--n", 3), "--at", 1)
    assert code == 0 and out.strip() == "1: Z/2"


def test_homology_empty_complex(tmp_path, capsys):
    path = write(tmp_path, '{"version": 1, "kind": "chain_complex", "index_kind": "int", "groups": [], "maps": []}')
    code, out, _ = run(capsys, "homology", path)
    assert code == 0 and out.strip() == ""
    code, out, _ = run(capsys, "homology", path, "--json")
    assert code == 0 and json.loads(out) == {"homology": []}


def test_homology_json(lib, capsys):
    code, out, _ = run(capsys, "homology", lib("rp", "--n", 2), "--json")
    assert json.loads(out)["homology"] == [
        {"index": 0, "group": "Z"}, {"index": 1, "group": "Z/2"}, {"index": 2, "group": "0"},
    ]


def test_library_round_trip(lib, capsys):
    path = lib("sphere", "--n", 1, "--cohomology")
    text = path.read_text()
    assert io.emit(io.parse(text)) == text
    code, out, _ = run(capsys, "homology", path)
    assert code == 0 and out.strip() == "0: Z, 1: Z"


def test_stdin_input(lib, capsys, monkeypatch):
    text = lib("torus").read_text()
    code, out, _ = run(capsys, "homology", "-", stdin=text, monkeypatch=monkeypatch)
    assert code == 0 and out.strip() == "0: Z, 1: Z^2, 2: Z"


# -- exit codes -------------------------------------------------------------------------

@pytest.mark.parametrize("text", ["{}", "not json", '{"version": 1, "kind": "les_template"}'])
def test_schema_errors_exit_two(tmp_path, capsys, text):
    code, _, err = run(capsys, "homology", write(tmp_path, text))
    assert code == 2 and err.startswith("error:")


def test_wrong_kind_exit_two(lib, capsys):
    assert run(capsys, "les-solve", lib("torus"))[0] == 2


def test_missing_file_exit_two(tmp_path, capsys):
    assert run(capsys, "homology", tmp_path / "nope.json")[0] == 2


def test_bad_arguments_exit_two(capsys):
    assert run(capsys, "homology", "--bogus")[0] == 2


def broken_chain(tmp_path):
    Z = ZG.presentation()
    from specseq.chain import ChainComplex

    C = ChainComplex(INT, {0: Z, 1: Z, 2: Z}, {0: GroupHom(Z, Z, [[1]]), 1: GroupHom(Z, Z, [[1]])})
    return write(tmp_path, C, "broken.json")


def test_chain_violation_exit_three(tmp_path, capsys):
    code, _, err = run(capsys, "homology", broken_chain(tmp_path))
    assert code == 3 and "index 1" in err


def test_validate(tmp_path, lib, capsys):
    assert run(capsys, "validate", broken_chain(tmp_path))[0] == 3
    assert run(capsys, "validate", lib("rp", "--n", 3, "--filtered"))[0] == 0
    code, out, _ = run(capsys, "validate", lib("hopf"), "--json")
    assert code == 0 and json.loads(out)["valid"]


def test_exact_report(lib, capsys):
    code, out, _ = run(capsys, "exact", lib("sphere", "--n", 2))
    assert code == 3 and out.strip().endswith("not exact")
    bc = lib("bicomplex")
    # the grid's total complex is acyclic, but the grid itself is not a chain complex
    assert run(capsys, "exact", bc)[0] == 2


def test_not_stable_index_exit_four(tmp_path, capsys):
    path = write(tmp_path, json.dumps(NOT_STABLE))
    code, _, err = run(capsys, "converge", path, "--n", 1, "--s", 0)
    assert code == 4 and "stable" in err
    code, out, _ = run(capsys, "converge", path, "--n", 1)
    assert code == 0 and "chain: (empty)" in out


def test_underdetermined_exit_five(tmp_path, capsys):
    T = LesTemplate(INT, [0, 1, 2, 3, 4], {1: ZG, 2: Unknown("X"), 3: ZG})
    code, _, err = run(capsys, "les-solve", write(tmp_path, T))
    assert code == 5 and "unresolved: X" in err
    assert run(capsys, "solve", "two-line", "--pmax", 4, "--fiber", "Z", "Z/2")[0] == 5


def test_inconsistent_exit_six(tmp_path, capsys):
    T = SparsePageTemplate("two_line", 1, {(0, 0): ZERO}, p_range=0, q_range=1)
    assert run(capsys, "solve", "template", write(tmp_path, T))[0] == 6
    L = LesTemplate(INT, [0, 1, 2, 3], {1: ZG, 2: FgaGroup(0, (2,))})
    assert run(capsys, "les-solve", write(tmp_path, L, "les.json"))[0] == 6


# -- solvers ----------------------------------------------------------------------------

def test_les_solve_hopf(lib, capsys):
    code, out, _ = run(capsys, "les-solve", lib("hopf"))
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "pi2_S2 = Z"
    assert "pi3_S2 = pi3_S3" in lines


def test_solve_two_column(capsys):
    code, out, _ = run(capsys, "solve", "two-column", "--n", 3, "--kmax", 5)
    assert code == 0 and out.strip() == "Z 0 Z 0 Z 0"


def test_solve_two_line_json(capsys):
    code, out, _ = run(capsys, "solve", "two-line", "--m", 1, "--pmax", 4, "--json")
    assert json.loads(out) == {"groups": ["Z", "0", "Z", "0", "Z"]}


def test_solve_template_file(tmp_path, capsys):
    code, out, _ = run(capsys, "solve", "template", write(tmp_path, two_column_template(3, 5)), "--json")
    assert code == 0 and json.loads(out)["assignment"]["H2"] == "Z"


# -- pages, infinity, converge -----------------------------------------------------------

def pages_json(capsys, path, R):
    code, out, _ = run(capsys, "pages", path, "--max-page", R, "--json")
    assert code == 0
    return json.loads(out)["pages"]


def by_total_degree(page):
    """Groups of a page keyed by homological degree; (p, q) = (s - n, -s) so n = -(p + q)."""
    out = {}
    for g in page["groups"]:
        p, q = g["index"]
        out.setdefault(-(p + q), []).append(g["group"])
    return {n: sorted(v) for n, v in out.items()}


def test_pages_rp3(lib, capsys):
    pages = pages_json(capsys, lib("rp", "--n", 3, "--filtered"), 3)
    assert [p["page"] for p in pages] == [2, 3]
    d2 = pages[0]["differentials"]
    assert len(d2) == 1 and [abs(v) for v in d2[0]["matrix"]["data"][0]] == [2]
    assert tuple(pages[0]["degree"]) == (2, -1)
    assert by_total_degree(pages[1]) == {0: ["Z"], 1: ["Z/2"], 3: ["Z"]}
    code, out, _ = run(capsys, "pages", lib("rp", "--n", 3, "--filtered"), "--max-page", 3)
    assert "d_2:" in out and "Z/2" in out.split("E_3")[1]


def test_pages_single_step_filtration_is_constant(lib, capsys):
    pages = pages_json(capsys, lib("torus", "--trivial-filtration"), 5)
    assert len(pages) == 4
    assert all(p["groups"] == pages[0]["groups"] and not p["differentials"] for p in pages)


def test_pages_z4(lib, capsys):
    pages = pages_json(capsys, lib("z4"), 3)
    assert sorted(g["group"] for g in pages[1]["groups"]) == ["Z/2", "Z/2"]


def test_pages_accepts_couple_documents(tmp_path, capsys):
    from specseq.builders import couple_from_tower, reindex_cohomological, z4_extension_filtration

    C = couple_from_tower(z4_extension_filtration()).couple
    ns = pages_json(capsys, write(tmp_path, C, "ns.json"), 3)
    pq = pages_json(capsys, write(tmp_path, reindex_cohomological(C), "pq.json"), 3)
    assert ns == pq


def test_infinity_page(lib, capsys):
    code, out, _ = run(capsys, "infinity", lib("sphere", "--n", 2, "--filtered"), "--json")
    assert code == 0
    assert sorted(g["group"] for g in json.loads(out)["groups"]) == ["Z", "Z"]


def test_converge_sphere(lib, capsys):
    code, out, _ = run(capsys, "converge", lib("sphere", "--n", 2, "--filtered"), "--n", 2)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "target H_2 = Z"
    assert lines[1] == "chain: Z ->> 0"
    assert [l for l in lines if "[ok]" in l] == ["  0 -> Z -> Z -> 0 -> 0   [ok]"]


def test_converge_z4_text(lib, capsys):
    code, out, _ = run(capsys, "converge", lib("z4"), "--n", 0)
    assert code == 0 and "chain: Z/4 ->> Z/2 ->> 0" in out
    assert "FAILED" not in out


def test_converge_json_is_checkable(lib, capsys):
    """Re-check every short exact sequence from the emitted matrices alone."""
    code, out, _ = run(capsys, "converge", lib("z4"), "--n", 0, "--json")
    cert = json.loads(out)
    assert cert["target"] == "Z/4" and cert["cofiltration"][-1] == "0"
    for s in cert["sequences"]:
        A, B, Q = (io.group_from_json(s[k]) for k in ("piece", "middle", "quotient"))
        k = GroupHom(A, B, io.matrix_from_json(s["k"]))
        i = GroupHom(B, Q, io.matrix_from_json(s["i"]))
        assert s["verified"]
        assert k.is_injective() and i.is_surjective()
        assert (i @ k).is_zero()
        assert image(k).contains_subgroup(kernel(i))


def test_converge_needs_filtration(lib, capsys):
    assert run(capsys, "converge", lib("torus"), "--n", 0)[0] == 2


# -- determinism and entry point ------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ("pages", "--max-page", 4),
    ("converge", "--n", 0, "--json"),
    ("infinity",),
])
def test_output_is_deterministic(lib, capsys, argv):
    path = lib("z4")
    cmd, *rest = argv
    first = run(capsys, cmd, path, *rest)
    second = run(capsys, cmd, path, *rest)
    assert first == second


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "specseq", "solve", "two-column", "--n", "2", "--kmax", "3"],
                       capture_output=True, text=True, timeout=60)
    assert r.returncode == 0 and r.stdout.strip() == "Z Z Z Z"

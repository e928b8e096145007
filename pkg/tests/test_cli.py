import json
from pathlib import Path

import pytest

from sibtool.cli import main, run, validate_report
from sibtool.builders import disjoint_edges, eqrel, path
from sibtool.structure import parse_structure, serialize_structure

FIX = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, s in {"p3": path(3), "p5": path(5), "e3": disjoint_edges(3), "q33": eqrel([3, 3])}.items():
        f = tmp_path / f"{name}.str"
        f.write_text(serialize_structure(s))
        out[name] = str(f)
    return out


def call(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def call_json(capsys, *argv):
    code, out, err = call(capsys, "--json", *argv)
    assert code == 0, err
    doc = json.loads(out)
    validate_report(doc)
    return doc


def test_parse(capsys, files):
    code, out, _ = call(capsys, "parse", files["p3"])
    assert code == 0 and parse_structure(out) == path(3)
    doc = call_json(capsys, "parse", files["p3"])
    assert doc["result"]["size"] == 3


def test_cliques(capsys, files):
    doc = call_json(capsys, "cliques", "--k", "1", files["q33"])
    assert doc["result"]["census"] == {"3": 2}


def test_cliques_pool(capsys, files, tmp_path):
    pool = tmp_path / "pool.txt"
    pool.write_text("0\n1\n# comment\n3\n")
    doc = call_json(capsys, "cliques", "--k", "1", "--pool", str(pool), files["q33"])
    assert doc["result"]["cliques"] == [[[0], [1]], [[3]]]


def test_ma_components_pack(capsys, files):
    assert call_json(capsys, "ma", files["p5"])["result"]["bounds"] == {"S": 2}
    assert call_json(capsys, "ma", files["p5"], "--relation", "S")["result"]["bounds"] == {"S": 2}
    doc = call_json(capsys, "components", files["e3"])
    assert doc["result"]["components"] == [[0, 1], [2, 3], [4, 5]]
    assert doc["result"]["classes"][0]["multiplicity"] == 3
    doc = call_json(capsys, "pack", files["p5"], "--formula", "S(x1,x2)")
    assert doc["result"]["value"] == 2


def test_embed_iso_census_age(capsys, files):
    assert call_json(capsys, "embed", files["p3"], files["p5"])["result"]["embeds"]
    neg = call_json(capsys, "embed", files["p5"], files["p3"])
    assert neg["result"] == {"embeds": False, "map": None}
    iso = call_json(capsys, "iso", files["p3"], files["p3"])
    assert iso["result"] == {"isomorphic": True, "map": [0, 1, 2]}
    doc = call_json(capsys, "census", files["p3"], files["p5"], files["p3"])
    assert sorted(len(b["members"]) for b in doc["result"]["blocks"]) == [1, 2]
    assert call_json(capsys, "age", files["p3"], files["p3"], "--s", "2")["result"]["same_age"]


def test_presentation_verbs(capsys, tmp_path):
    pres = str(FIX / "edges_clique.pres.json")
    doc = call_json(capsys, "classify", pres)
    assert doc["result"]["verdict"] == "ALEPH0"
    assert call_json(capsys, "validate", pres, "--t", "4")["result"]["valid"]
    bad = call_json(capsys, "validate", str(FIX / "corrupted_edges.pres.json"), "--t", "4")
    assert not bad["result"]["valid"] and bad["result"]["problems"]
    out = tmp_path / "t.str"
    code, text, _ = call(capsys, "truncate", pres, "--t", "3", "-o", str(out))
    assert code == 0 and parse_structure(out.read_text()).size == 9 and text == f"wrote {out}\n"
    sep = call_json(capsys, "separate", pres, "--t", "7")
    assert sep["result"]["changed"] is False


def test_generators(capsys, tmp_path):
    grid = str(FIX / "grid_rank0_k1.pres.json")
    out = tmp_path / "nf.str"
    code, _, _ = call(capsys, "generate", "nf", "--spec", grid, "--cut", "a=5,b=7,c=9", "--t", "12", "-o", str(out))
    assert code == 0
    doc = call_json(capsys, "cliques", "--k", "1", str(out))
    assert doc["result"]["census"] == {"5": 1, "7": 1, "9": 1}
    doc = call_json(capsys, "generate", "eqrel", "--classes", "2,3")
    assert parse_structure(doc["result"]["structure"]) == eqrel([2, 3])
    doc = call_json(capsys, "generate", "mstar", "--spec", str(FIX / "edges_independent.pres.json"),
                    "--family", "0", "--ell", "2", "--t", "8")
    assert parse_structure(doc["result"]["structure"]).size == 8 * 2 - 3
    doc = call_json(capsys, "generate", "ns", "--spec", str(FIX / "path_chain.chain.json"), "--s", "0,2", "--t", "9")
    assert parse_structure(doc["result"]["structure"]).size == 2 + 4


def test_structure_output_is_byte_stable(capsys):
    grid = str(FIX / "grid_rank1_k2.pres.json")
    outs = {call(capsys, "--threads", str(n), "generate", "nf", "--spec", grid, "--cut", "a=8", "--t", "9")[1]
            for n in (1, 2, 4)}
    assert len(outs) == 1


def test_exit_codes(capsys, files, tmp_path):
    assert call(capsys, "cliques", files["p3"])[0] == 2
    assert call(capsys, "frobnicate")[0] == 2
    assert call(capsys, "--threads", "0", "parse", files["p3"])[0] == 2
    assert call(capsys, "parse", str(tmp_path / "missing.str"))[0] == 3
    bad = tmp_path / "bad.str"
    bad.write_text("language E/2\nuniverse 2\nE 0 9\n")
    code, _, err = call(capsys, "parse", str(bad))
    assert code == 3 and "line 3" in err
    assert call(capsys, "pack", files["p3"], "--formula", "S(x1,")[0] == 3
    assert call(capsys, "classify", str(FIX / "corrupted_edges.pres.json"))[0] == 3
    assert call(capsys, "generate", "nf", "--spec", str(FIX / "grid_rank0_k1.pres.json"),
                "--cut", "a=5,b=5", "--t", "12")[0] == 3


def test_time_guard_exit_code(capsys, tmp_path, monkeypatch):
    import random

    from sibtool.builders import random_structure
    from sibtool.structure import Signature

    sig = Signature([("E", 2)])
    a = tmp_path / "a.str"
    b = tmp_path / "b.str"
    a.write_text(serialize_structure(random_structure(random.Random(1), 14, sig, 0.5, symmetric=True, loops=False)))
    b.write_text(serialize_structure(random_structure(random.Random(2), 40, sig, 0.5, symmetric=True, loops=False)))
    monkeypatch.setenv("SIBTOOL_TIME_GUARD_SECS", "0")
    assert call(capsys, "embed", str(a), str(b))[0] == 4


def test_run_returns_report(files):
    rep = run(["iso", files["p3"], files["p3"]])
    assert rep.verb == "iso" and rep.result["isomorphic"]
    validate_report(rep.as_json())

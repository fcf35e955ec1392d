import json

import pytest

from descontrol.cli import main
from descontrol.fsa import dump_fsa, load_fsa, parse_fsa

G_TOY = """\
event a c
event u u
state q0 initial marked
state q1
trans q0 a q1
trans q1 u q0
"""

K_TOY = """\
event a c
event u u
state k0 initial marked
state k1 marked
trans k0 a k1
trans k0 u k0
"""


@pytest.fixture
def toy(tmp_path):
    g = tmp_path / "g.fsa"
    k = tmp_path / "k.fsa"
    g.write_text(G_TOY)
    k.write_text(K_TOY)
    return g, k


def test_supcon_toy(toy, tmp_path, capsys):
    g, k = toy
    out = tmp_path / "sup.fsa"
    assert main(["supcon", "--plant", str(g), "--spec", str(k), "--out", str(out)]) == 0
    sup = load_fsa(out)
    assert sup.num_states == 1 and sup.delta == {}
    listing = (tmp_path / "sup.fsa.disable").read_text()
    assert listing == "disable (q0,k0) a\n"
    assert main(["supcon", "--plant", str(g), "--spec", str(k)]) == 0
    assert "# disable (q0,k0) a" in capsys.readouterr().out


def test_supcon_empty_exits_one(tmp_path):
    g = tmp_path / "g.fsa"
    g.write_text("event u u\nstate p initial marked\ntrans p u p\n")
    k = tmp_path / "k.fsa"
    k.write_text("event u u\nstate k initial marked\n")
    assert main(["supcon", "--plant", str(g), "--spec", str(k)]) == 1


def test_check(toy, capsys):
    g, k = toy
    assert main(["check", "--plant", str(g), "--spec", str(g)]) == 0
    assert capsys.readouterr().out == "controllable\n"
    assert main(["check", "--plant", str(g), "--spec", str(k)]) == 1
    assert "violation spec=k1 plant=q1 event=u witness=a" in capsys.readouterr().out
    assert main(["check", "--plant", str(g), "--spec", str(k), "--format", "structured"]) == 1
    body = json.loads(capsys.readouterr().out)
    assert body["controllable"] is False and body["violations"][0]["witness"] == ["a"]


def test_usage_errors(toy, tmp_path, capsys):
    g, _ = toy
    assert main(["check", "--plant", str(g), "--bogus"]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["trim", str(tmp_path / "missing.fsa")]) == 2
    bad = tmp_path / "bad.fsa"
    bad.write_text("event a c\nstate q initial\ntrans q a q\ntrans q a q\n")
    assert main(["trim", str(bad)]) == 2
    assert "line 4" in capsys.readouterr().err


def test_product_sync_trim(toy, tmp_path, capsys):
    g, k = toy
    assert main(["product", str(g), str(k)]) == 0
    prod = parse_fsa(capsys.readouterr().out)
    assert prod.names == ("(q0,k0)", "(q1,k1)")
    assert main(["sync", str(g), str(k)]) == 0
    assert parse_fsa(capsys.readouterr().out).num_states == 2
    assert main(["sync", str(g)]) == 2
    assert main(["trim", str(g)]) == 0
    assert capsys.readouterr().out == G_TOY


def test_round_trip_is_bit_exact(toy, tmp_path):
    g, _ = toy
    out = tmp_path / "again.fsa"
    assert main(["trim", str(g), "--out", str(out)]) == 0
    assert out.read_text() == G_TOY
    assert dump_fsa(load_fsa(out)) == G_TOY


def test_flatten(tmp_path, capsys):
    chart = tmp_path / "c.sc"
    chart.write_text(
        "chart c\nevent e c\nvar v 0..2 init 0\nregion r {\n  state s initial marked\n"
        "    on e [v < 2] / v := v + 1 -> s\n}\n"
    )
    assert main(["flatten", str(chart)]) == 0
    assert parse_fsa(capsys.readouterr().out).num_states == 3


def test_simulate_and_reach(toy, tmp_path, capsys):
    g, _ = toy
    trace = tmp_path / "t.trace"
    trace.write_text("a u a\nu\n")
    assert main(["simulate", "--plant", str(g), "--sup", str(g), "--script", str(trace)]) == 0
    out = capsys.readouterr().out
    assert out.count("# source=") == 2
    assert "step=1 ev=u verdict=fired state=(0,0)" in out
    args = ["simulate", "--plant", str(g), "--sup", str(g), "--adversary", "--max-steps", "6"]
    assert main(args + ["--seed", "4"]) == 0
    first = capsys.readouterr().out
    assert main(args + ["--seed", "4"]) == 0
    assert capsys.readouterr().out == first
    assert main(["reach", "--plant", str(g), "--sup", str(g)]) == 0
    assert capsys.readouterr().out == "reachable 2\nviolations 0\n"
    assert main(["reach", "--plant", str(g), "--sup", str(g), "--forbid", "q1"]) == 1
    assert main(["reach", "--plant", str(g), "--sup", str(g), "--forbid", "q1",
                 "--forbid-on", "a"]) == 0


def test_repeat_runs_are_byte_identical(tmp_path):
    outs = []
    for run in range(2):
        d = tmp_path / f"run{run}"
        assert main(["elevator-gen", "--floors", "3", "--cars", "1", "--out", str(d)]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert outs[0] == outs[1]
    manifest = json.loads(outs[0]["manifest.json"])
    assert manifest["files"]["plant"] == "plant.fsa" and "trace" not in manifest["files"]
    assert "elevator.sc" in outs[0]

import math
import subprocess
import sys

import numpy as np
import pytest

from conftest import circle
from streamph import cli
from streamph.store import read_intervals


def parse(out):
    """Collect '#:' lines as a list of key=value dicts."""
    rows = []
    for line in out.splitlines():
        if line.startswith("#: "):
            rows.append(dict(kv.split("=", 1) for kv in line[3:].split() if "=" in kv))
    return rows


def lookup(rows, key):
    return next(r[key] for r in rows if key in r)


@pytest.fixture
def circle_file(tmp_path):
    p = tmp_path / "circle.txt"
    np.savetxt(p, circle(8), fmt="%.17g")
    return p


def compute(tmp_path, src, *extra, name="run"):
    return cli.main(["compute", "--input", str(src), "--max-dim", "2", "--max-epsilon", "2.1",
                     "--edges", str(tmp_path / f"{name}.edges"), "--intervals", str(tmp_path / f"{name}.iv"),
                     *extra])


def test_compute_circle(tmp_path, circle_file, capsys):
    assert compute(tmp_path, circle_file) == 0
    rows = parse(capsys.readouterr().out)
    bars = [r for r in rows if "dim" in r and "birth" in r]
    h1 = [r for r in bars if r["dim"] == "1"]
    assert float(h1[0]["birth"]) == pytest.approx(2 * math.sin(math.pi / 8), abs=1e-12)
    assert float(h1[0]["death"]) == pytest.approx(2 * math.sin(3 * math.pi / 8), abs=1e-12)
    assert len(h1) == 1
    assert [r for r in bars if r["dim"] == "0" and r["death"] == "inf"]
    assert lookup(rows, "open_dim0") == "1"
    assert lookup(rows, "edges") == "28"


def test_empty_input(tmp_path, capsys):
    p = tmp_path / "empty.txt"
    p.write_text("")
    assert compute(tmp_path, p) == cli.EXIT_INPUT
    assert not (tmp_path / "run.edges").exists() and not (tmp_path / "run.iv").exists()


def test_stop_epsilon_zero(tmp_path, circle_file):
    assert compute(tmp_path, circle_file, "--stop-epsilon", "0") == 0
    ivs = read_intervals(tmp_path / "run.iv")
    assert [iv.as_tuple() for iv in ivs] == [(0, 0.0, math.inf)] * 8


def test_resume_matches_one_shot(tmp_path, circle_file, capsys):
    assert compute(tmp_path, circle_file, name="one") == 0
    assert compute(tmp_path, circle_file, "--stop-epsilon", "0.8", "--checkpoint", str(tmp_path / "ck"),
                   name="two") == 0
    assert cli.main(["resume", "--checkpoint", str(tmp_path / "ck"), "--edges", str(tmp_path / "two.edges"),
                     "--intervals", str(tmp_path / "two.iv"), "--stop-epsilon", "2.1"]) == 0
    assert (tmp_path / "one.iv").read_bytes() == (tmp_path / "two.iv").read_bytes()
    assert (tmp_path / "one.edges").read_bytes() == (tmp_path / "two.edges").read_bytes()


def test_resume_at_same_epsilon_adds_nothing(tmp_path, circle_file):
    compute(tmp_path, circle_file, "--stop-epsilon", "0.8", "--checkpoint", str(tmp_path / "ck"))
    before = (tmp_path / "run.iv").read_bytes()
    assert cli.main(["resume", "--checkpoint", str(tmp_path / "ck"), "--edges", str(tmp_path / "run.edges"),
                     "--intervals", str(tmp_path / "run.iv"), "--stop-epsilon", "0.8"]) == 0
    assert (tmp_path / "run.iv").read_bytes() == before


def test_resume_wrong_edges_refused(tmp_path, circle_file):
    compute(tmp_path, circle_file, "--stop-epsilon", "0.8", "--checkpoint", str(tmp_path / "ck"))
    other = tmp_path / "other.txt"
    np.savetxt(other, circle(9))
    compute(tmp_path, other, name="other")
    code = cli.main(["resume", "--checkpoint", str(tmp_path / "ck"), "--edges", str(tmp_path / "other.edges"),
                     "--intervals", str(tmp_path / "run.iv")])
    assert code == cli.EXIT_CHECKPOINT


def test_checkpoint_every_and_determinism(tmp_path, circle_file):
    compute(tmp_path, circle_file, "--checkpoint", str(tmp_path / "a.ck"), "--checkpoint-every", "5", name="a")
    compute(tmp_path, circle_file, "--checkpoint", str(tmp_path / "b.ck"), "--checkpoint-every", "5", name="b")
    for ext in (".edges", ".iv", ".ck"):
        assert (tmp_path / f"a{ext}").read_bytes() == (tmp_path / f"b{ext}").read_bytes()


def test_inspect(tmp_path, circle_file, capsys):
    compute(tmp_path, circle_file, "--stop-epsilon", "0", "--checkpoint", str(tmp_path / "ck"))
    capsys.readouterr()
    assert cli.main(["inspect", "--checkpoint", str(tmp_path / "ck")]) == 0
    rows = parse(capsys.readouterr().out)
    assert lookup(rows, "offset") == "16"
    assert lookup(rows, "betti") == "8,0"
    assert lookup(rows, "clique_sizes") == "1:8"


def test_inspect_paper_graph(tmp_path, capsys):
    from conftest import PAPER_EDGES
    mat = np.full((7, 7), 30.0)
    np.fill_diagonal(mat, 0)
    for i, (s, t) in enumerate(PAPER_EDGES):
        mat[s, t] = mat[t, s] = i + 1
    mat[5, 6] = mat[6, 5] = 20
    p = tmp_path / "paper.mat"
    p.write_text("\n".join(" ".join(repr(float(x)) for x in mat[i, : i + 1]) for i in range(7)))
    assert cli.main(["compute", "--input", str(p), "--metric", "matrix", "--max-epsilon", "15",
                     "--max-dim", "4", "--edges", str(tmp_path / "e"), "--intervals", str(tmp_path / "iv"),
                     "--checkpoint", str(tmp_path / "ck")]) == 0
    capsys.readouterr()
    cli.main(["inspect", "--checkpoint", str(tmp_path / "ck")])
    rows = parse(capsys.readouterr().out)
    # abcf, abcg, def, deg
    assert lookup(rows, "clique_sizes") == "3:2,4:2"
    assert lookup(rows, "registry") == "4"


def test_inspect_corrupt(tmp_path, capsys):
    (tmp_path / "ck").write_bytes(b"garbage")
    assert cli.main(["inspect", "--checkpoint", str(tmp_path / "ck")]) == cli.EXIT_CHECKPOINT
    assert "CheckpointCorruptError" in capsys.readouterr().err


def test_plot_empty(tmp_path, capsys):
    from streamph.store import IntervalWriter
    IntervalWriter(tmp_path / "iv").finalize()
    assert cli.main(["plot", "--intervals", str(tmp_path / "iv")]) == 0
    assert capsys.readouterr().out == ""


def test_plot_single_infinite(tmp_path, capsys):
    from streamph.store import IntervalWriter
    from streamph.types import Interval
    w = IntervalWriter(tmp_path / "iv")
    w.finalize([Interval(0, 0.0)])
    assert cli.main(["plot", "--intervals", str(tmp_path / "iv"), "--width", "60"]) == 0
    line = capsys.readouterr().out.rstrip("\n")
    assert line.startswith("0 0.0 inf")
    assert line.endswith(">") and len(line) == 59
    assert cli.main(["plot", "--intervals", str(tmp_path / "iv"), "--format", "svg",
                     "--out", str(tmp_path / "p.svg")]) == 0
    svg = (tmp_path / "p.svg").read_text()
    assert svg.count("<rect") == 1 and "<polygon" in svg


def test_plot_circle_svg(tmp_path, circle_file):
    compute(tmp_path, circle_file)
    assert cli.main(["plot", "--intervals", str(tmp_path / "run.iv"), "--format", "svg",
                     "--min-length", "1e-9", "--out", str(tmp_path / "c.svg")]) == 0
    svg = (tmp_path / "c.svg").read_text()
    dim1 = [line for line in svg.split("<rect")[1:] if "dim1" in line]
    assert len(dim1) == 1
    assert 'data-birth="0.76536686473' in dim1[0] and 'data-death="1.84775906502' in dim1[0]


def test_plot_corrupt(tmp_path):
    (tmp_path / "iv").write_bytes(b"SPHX")
    assert cli.main(["plot", "--intervals", str(tmp_path / "iv")]) == cli.EXIT_IO


def test_selfcheck(capsys):
    assert cli.main(["selfcheck", "--seed", "3", "--trials", "3"]) == 0
    out = capsys.readouterr().out
    assert "clique: pass" in out and "barcode: pass" in out


def test_selfcheck_catches_listing_threshold(capsys):
    assert cli.main(["selfcheck", "--trials", "5", "--listing-threshold"]) == cli.EXIT_SELFCHECK
    captured = capsys.readouterr()
    assert "clique: FAIL" in captured.out
    assert "edge order=" in captured.err


def test_selfcheck_zero_trials(capsys):
    assert cli.main(["selfcheck", "--trials", "0"]) == 0
    assert "warning" in capsys.readouterr().err


def test_module_help():
    out = subprocess.run([sys.executable, "-m", "streamph", "compute", "--help"],
                         capture_output=True, text=True, check=True).stdout
    assert "exit codes" in out and "--representatives" in out


def test_representatives_file(tmp_path, circle_file):
    assert compute(tmp_path, circle_file, "--representatives") == 0
    lines = (tmp_path / "run.iv.reps").read_text().splitlines()
    h1 = [line for line in lines if line.startswith("1 0.76")]
    assert len(h1) == 1
    assert h1[0].count("-") == 8  # the 8-edge loop

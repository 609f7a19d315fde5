import re

import numpy as np
import pytest

from linecong import formats
from linecong.bde import phase_portrait
from linecong.classify import classify_point
from linecong.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, EXIT_VERIFY, run
from linecong.config import DEFAULT_NUMERICS
from linecong.congruence import Domain
from linecong.errors import ConfigError

from conftest import CONFIGS, darboux, example

GOOD = """# comment
[congruence]
mode = shape
a = 1 + v   # trailing comment
b = u
c = k
d = 1 + 3*v

[params]
k = 1

[domain]
umin = -0.5
umax = 0.5
vmin = -0.5
vmax = 0.5

[numerics]
step = 0.005
"""


def test_parse_good_config():
    cfg = formats.parse_config(GOOD, "x.cfg")
    assert cfg.congruence.params == {"k": 1.0}
    assert cfg.congruence.name == "x"
    assert cfg.numerics.step == 0.005
    assert cfg.congruence.domain.umax == 0.5


@pytest.mark.parametrize("edit,line,msg", [
    (("b = u", "b = u +"), 5, "b:"),
    (("[params]", "[parameters]"), 9, "unknown section"),
    (("step = 0.005", "stpe = 0.005"), 19, "unknown key"),
    (("c = k", "c = k\nc = 2"), 7, "duplicate"),
    (("k = 1", "k = one"), 10, "expected a real number"),
    (("umax = 0.5", "umax = -0.6"), 14, "min < max"),
    (("step = 0.005", "grid = 2.5"), 19, "integer"),
    (("d = 1 + 3*v", "d = 1 + 3*v\nxi1 = u"), 8, "does not belong"),
    (("k = 1", "q = 1"), 6, "unbound parameter(s) k"),
])
def test_config_errors_carry_line(edit, line, msg):
    text = GOOD.replace(*edit)
    with pytest.raises(ConfigError) as err:
        formats.parse_config(text)
    assert err.value.line == line
    assert msg in str(err.value) and f"line {line}" in str(err.value)


def test_config_round_trip():
    cfg = formats.load_config(CONFIGS / "helicoidal.cfg")
    again = formats.parse_config(formats.dump_config(cfg.congruence, cfg.numerics), "helicoidal.cfg")
    assert formats.dump_config(again.congruence, again.numerics) == formats.dump_config(cfg.congruence, cfg.numerics)


def test_all_configs_load():
    for path in sorted(CONFIGS.glob("*.cfg")):
        cfg = formats.load_config(path)
        assert cfg.congruence.name


def test_report_round_trip():
    reps = classify_point(example("disc"), (0.0, 0.0))
    text = formats.format_reports(reps)
    blocks = formats.parse_reports(text)
    assert len(blocks) == 1
    b = blocks[0]
    assert b["verdict"] == "DiscriminantCuspidalEdge"
    assert b["point"] == "0,0"
    assert float(b["quantity.alpha"]) == pytest.approx(-1.92)
    assert b["folded_type"] == "Saddle"


def test_csv_round_trip(tmp_path):
    from linecong.tracer import trace_ridges
    pl = trace_ridges(example("cusp"))[0]
    path = tmp_path / "r.csv"
    path.write_text(formats.polyline_csv(pl))
    assert path.read_text().splitlines()[0] == "u,v,branch,residual"
    data = formats.read_csv(path)
    np.testing.assert_allclose(data[:, :2], pl.points, atol=1e-11)
    assert np.all(data[:, 2] == pl.tags)


def test_obj_mesh_holes_and_parse():
    C = darboux(2.0)
    mesh = formats.focal_mesh(C, 1, 20)
    back = formats.read_obj(formats.mesh_obj(mesh))
    np.testing.assert_allclose(back.vertices, mesh.vertices, rtol=1e-9)
    assert np.array_equal(np.asarray(back.faces), np.asarray(mesh.faces))
    # the disk delta < 0 leaves a hole: fewer faces than a full grid
    assert 0 < len(mesh.faces) < 2 * 19 * 19


def test_svg_colors_and_versions():
    C = darboux(2.0, domain=Domain(-1.5, 1.5, -1.5, 1.5))
    pt = phase_portrait(C, 4, DEFAULT_NUMERICS)
    svg = formats.portrait_svg(pt, C.domain)
    assert svg.startswith("<svg") or svg.startswith("<?xml")
    assert formats.COLORS["discriminant"] in svg and formats.COLORS["separatrix"] in svg
    assert formats.FORMAT_VERSION in svg


def test_cli_analyze_swallowtail(tmp_path, capsys):
    rep = tmp_path / "s.report"
    assert run(["analyze", str(CONFIGS / "e_swal.cfg"), "--point", "0,0", "--report", str(rep)]) == EXIT_OK
    blocks = formats.parse_reports(rep.read_text())
    b1 = [b for b in blocks if b["branch"] == "1"][0]
    assert b1["verdict"] == "Swallowtail"
    assert float(b1["quantity.T"]) == 0.0 and float(b1["quantity.W"]) == pytest.approx(8.0)
    assert "Swallowtail" in capsys.readouterr().out


def test_cli_trace_alpha_fit(tmp_path):
    prefix = tmp_path / "disc"
    assert run(["trace", str(CONFIGS / "e_disc.cfg"), "--out", str(prefix)]) == EXIT_OK
    fits = []
    for path in tmp_path.glob("disc_ridge_*.csv"):
        d = formats.read_csv(path)
        near = np.abs(d[:, 1]) <= 0.05
        if near.sum() >= 5 and np.min(np.hypot(d[near, 0], d[near, 1])) < DEFAULT_NUMERICS.step:
            c2 = np.polyfit(d[near, 1], d[near, 0], 2)[0]
            fits.append(2 * c2)
    assert len(fits) == 1
    assert fits[0] == pytest.approx(-48 / 25, rel=0.02)


def test_cli_determinism(tmp_path):
    for k in range(2):
        run(["trace", str(CONFIGS / "e_disc.cfg"), "--out", str(tmp_path / f"r{k}")])
        run(["analyze", str(CONFIGS / "e_disc.cfg"), "--point", "0,0", "--report", str(tmp_path / f"a{k}.report")])
    for f in sorted(tmp_path.glob("r0_*.csv")):
        assert f.read_bytes() == (tmp_path / f.name.replace("r0_", "r1_")).read_bytes()
    assert (tmp_path / "a0.report").read_bytes() == (tmp_path / "a1.report").read_bytes()


def test_cli_focal_and_portrait(tmp_path):
    cfg = str(CONFIGS / "darboux_m2.cfg")
    assert run(["focal", cfg, "--out", str(tmp_path / "d"), "--grid", "16"]) == EXIT_OK
    for suffix in ("_F1.obj", "_F2.obj", "_curves.obj"):
        text = (tmp_path / f"d{suffix}").read_text()
        assert re.search(r"^v ", text, re.M)
    assert re.search(r"^l ", (tmp_path / "d_curves.obj").read_text(), re.M)
    assert run(["portrait", cfg, "--out", str(tmp_path / "p.svg"), "--seeds", "3"]) == EXIT_OK
    assert (tmp_path / "p.svg").read_text().count("<circle") >= 1


def test_cli_sweep_writes_one_file_per_value(tmp_path):
    cfg = str(CONFIGS / "darboux_m2.cfg")
    assert run(["analyze", cfg, "--point", "1,0", "--report", str(tmp_path / "d.report"),
                "--sweep", "m=1.5:2.5:3"]) == EXIT_OK
    assert {p.name for p in tmp_path.iterdir()} == {"d_m=1.5.report", "d_m=2.0.report", "d_m=2.5.report"}


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text(GOOD.replace("b = u", "b = u +"))
    assert run(["analyze", str(bad), "--point", "0,0"]) == EXIT_CONFIG
    # literal regular-discriminant data is not integrable: a numeric failure
    lit = tmp_path / "lit.cfg"
    lit.write_text(GOOD.replace("b = u", "b = v").replace("d = 1 + 3*v", "d = 1"))
    assert run(["analyze", str(lit), "--point", "0,0", "--report", str(tmp_path / "l.report")]) == EXIT_NUMERIC
    assert run(["verify", str(CONFIGS / "e_disc.cfg"), "--point", "0,0"]) == EXIT_OK
    assert run(["analyze", str(CONFIGS / "e_disc.cfg"), "--set", "k=1", "--point", "0,0",
                "--report", str(tmp_path / "x.report")]) == EXIT_OK
    assert EXIT_VERIFY == 1


def test_cli_verify_fails_on_broken_invariant(tmp_path, monkeypatch):
    from linecong import suites
    monkeypatch.setattr(suites, "equiaffine_residuals", lambda *a, **k: 1.0)
    assert run(["verify", str(CONFIGS / "e_disc.cfg"), "--point", "0,0"]) == EXIT_VERIFY

import json

import numpy as np
import pytest

from linefield.cli import main
from linefield.geometry import DomainSpec, stadium_curve
from linefield.io import save_domain

ANNULUS = {"curve": {"type": "fourier", "x": {"cos": [0, 1], "sin": [0, 0]},
                     "y": {"cos": [0, 0], "sin": [0, 1]}}, "delta": 0.4}
DISK = {"curve": ANNULUS["curve"], "mode": "raw"}


@pytest.fixture
def files(tmp_path):
    a = tmp_path / "annulus.json"
    a.write_text(json.dumps(ANNULUS))
    d = tmp_path / "disk.json"
    d.write_text(json.dumps(DISK))
    return tmp_path, a, d


def test_solve_and_verify(files, capsys):
    tmp, a, _ = files
    out = tmp / "sol.csv"
    rep = tmp / "rep.json"
    assert main(["solve", "--domain", str(a), "--h", "0.03125", "--out", str(out), "--report", str(rep)]) == 0
    r = json.loads(rep.read_text())
    assert r["verdict"]["pass"] and set(r) == {"conditions", "norms", "verdict"}
    assert main(["verify", "--field", str(out), "--refine", "2"]) == 0
    assert main(["verify", "--field", str(out), "--domain", str(a)]) == 0
    assert "pass" in capsys.readouterr().out


def test_solve_rejects_bad_domains(files, tmp_path):
    tmp, _, d = files
    big = tmp / "big.json"
    big.write_text(json.dumps(dict(ANNULUS, delta=1.2)))
    assert main(["solve", "--domain", str(big), "--h", "0.05", "--out", str(tmp / "x.csv")]) == 2
    assert main(["solve", "--domain", str(d), "--h", "0.05", "--out", str(tmp / "x.csv")]) == 2
    assert main(["solve", "--domain", str(tmp / "missing.json"), "--h", "0.05", "--out", str(tmp / "x.csv")]) == 2


def test_vortex_verify_fails(files, capsys):
    tmp, _, _ = files
    out = tmp / "v.csv"
    assert main(["pattern", "--name", "vortex", "--h", "0.03125", "--out", str(out)]) == 0
    assert main(["verify", "--field", str(out), "--refine", "2"]) == 1
    assert "div_in_L2: L2 growth" in capsys.readouterr().out


def test_classify_exit_codes(files):
    tmp, a, d = files
    rep = tmp / "c.json"
    assert main(["classify", "--domain", str(a), "--report", str(rep)]) == 0
    r = json.loads(rep.read_text())
    assert r["is_tubular"] and abs(r["delta"] - 0.4) < 1e-3
    assert main(["classify", "--domain", str(d)]) == 1
    st = tmp / "stadium.json"
    save_domain(st, DomainSpec(stadium_curve(0.5, 1.0, 64), mode="raw"))
    assert main(["classify", "--domain", str(st)]) == 1
    assert main(["classify", "--domain", str(a), "--samples", "8"]) == 2


def test_pattern_and_scan(files, capsys):
    tmp, _, _ = files
    for name, code in (("uturn", 1), ("constant", 0), ("vortex", 0)):
        out = tmp / f"{name}.csv"
        assert main(["pattern", "--name", name, "--h", "0.0625", "--out", str(out), "--raster", str(tmp / f"{name}.ppm")]) == 0
        rep = tmp / f"{name}.scan.json"
        assert main(["scan", "--field", str(out), "--report", str(rep), "--map", str(tmp / f"{name}.pgm")]) == code
        r = json.loads(rep.read_text())
        charges = [d["charge"] for d in r["defects"]]
        assert charges == {"uturn": [0.5], "constant": [], "vortex": [1.0]}[name]
    capsys.readouterr()


def test_pattern_usage_errors(files):
    tmp, a, _ = files
    with pytest.raises(SystemExit) as exc:
        main(["pattern", "--name", "spiral", "--out", str(tmp / "x.csv")])
    assert exc.value.code == 2
    assert main(["pattern", "--name", "grain", "--params", "theta_left", "--out", str(tmp / "x.csv")]) == 2
    assert main(["pattern", "--name", "grain", "--params", "theta_left=abc", "--out", str(tmp / "x.csv")]) == 2
    assert main(["pattern", "--name", "grain", "--params", "theta_left=0", "theta_right=0.5",
                 "--h", "0.0625", "--out", str(tmp / "g.csv")]) == 0


def test_norms_slope(files, capsys):
    tmp, _, _ = files
    out = tmp / "v.csv"
    main(["pattern", "--name", "vortex", "--h", "0.0078125", "--out", str(out)])
    rep = tmp / "n.json"
    assert main(["norms", "--field", str(out), "--p", "2", "--eps-list", "0.2", "0.1", "0.05", "0.025",
                 "--report", str(rep)]) == 0
    slope = json.loads(rep.read_text())["slope_vs_log_inv_eps"]
    assert abs(slope - 2 * np.pi) < 0.05 * 2 * np.pi
    rep1 = tmp / "n1.json"
    assert main(["norms", "--field", str(out), "--p", "1", "--eps-list", "0.2", "0.1", "0.05", "0.025",
                 "--report", str(rep1)]) == 0
    vals = [row["value"] for row in json.loads(rep1.read_text())["rows"]]
    assert max(vals) < 2 * np.pi  # int |div P| = 2 pi (1 - eps) stays bounded
    assert main(["norms", "--field", str(out), "--eps-list"]) == 2
    assert main(["norms", "--field", str(out), "--eps-list", "1.5"]) == 2
    capsys.readouterr()


def test_tampered_field_exit_2(files):
    tmp, _, _ = files
    out = tmp / "c.csv"
    main(["pattern", "--name", "constant", "--h", "0.0625", "--out", str(out)])
    lines = out.read_text().splitlines()
    k = next(i for i, l in enumerate(lines) if l.endswith(",1"))
    parts = lines[k].split(",")
    parts[3] = "0.5"
    lines[k] = ",".join(parts)
    out.write_text("\n".join(lines) + "\n")
    assert main(["scan", "--field", str(out)]) == 2


def test_missing_subcommand():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2

import io
import subprocess
import sys

import numpy as np
import pytest

from hybridqba.cli import main, read_spectrum_csv

SMALL = """preset = "fig23"

[grid]
start_hz = 1.262e6
stop_hz = 1.276e6
points = 141

[scenario]
name = "{scenario}"
quadrature = "phase"
"""


def run(argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture
def config(tmp_path):
    def make(scenario="hybrid-negative", extra=""):
        path = tmp_path / f"{scenario}.toml"
        path.write_text(extra + SMALL.format(scenario=scenario))
        return path
    return make


def _parse_csv(text):
    lines = text.strip().splitlines()
    return lines[0].split(","), np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])


def test_spectrum_csv(config):
    code, text = run(["spectrum", config()])
    assert code == 0
    header, data = _parse_csv(text)
    assert header == ["freq_hz", "total_sn", "shot", "spin_thermal", "interstage_vac",
                      "cavity_loss_vac", "membrane_thermal", "post_vac"]
    assert data.shape == (141, 8)
    np.testing.assert_allclose(data[:, 2:].sum(axis=1), data[:, 1], rtol=1e-10)


def test_spectrum_white_noise_column(config):
    _, text = run(["spectrum", config(extra="n_wn = 1.5\n")])
    assert text.splitlines()[0].endswith(",white_noise")


def test_spectrum_deterministic(config):
    path = config()
    assert run(["spectrum", path])[1] == run(["spectrum", path])[1]


def test_spectrum_uncoupled_is_shot_noise(config):
    _, text = run(["spectrum", config("mech-only", extra="g0_hz = 0\n")])
    _, data = _parse_csv(text)
    np.testing.assert_allclose(data[:, 1], 1.0, atol=1e-12)


def test_variance_output(config):
    code, text = run(["variance", config("mech-only"), "--band", "1.265e6,1.272e6", "--units", "zpf"])
    assert code == 0
    fields = dict(kv.split("=") for kv in text.split())
    assert fields["units"] == "zpf"
    assert fields["band"] == "1265000.0,1272000.0"
    assert float(fields["variance"]) > 0


def test_variance_bad_band(config):
    assert run(["variance", config(), "--band", "1e6,1.27e6"])[0] == 2
    assert run(["variance", config(), "--band", "abc"])[0] == 2


def test_calibrate_spin():
    code, text = run(["calibrate-spin", "--a", 2.8, "--b", 4.48, "--nwn", 1.2])
    assert code == 0
    fields = dict(kv.split("=") for kv in text.split())
    assert float(fields["ratio"]) == pytest.approx(1.0, abs=1e-12)
    assert float(fields["r_ba_sq"]) == pytest.approx(1.4)


def test_calibrate_spin_domain_and_input_errors():
    assert run(["calibrate-spin", "--a", 1, "--b", 2.5, "--nwn", 1])[0] == 4
    assert run(["calibrate-spin", "--a", 2, "--b", 1, "--nwn", 1])[0] == 2


def test_fit_bath_roundtrip(config, tmp_path):
    path = config("mech-only")
    _, text = run(["spectrum", path])
    data = tmp_path / "measured.csv"
    data.write_text(text)
    code, out = run(["fit-bath", path, "--data", data, "--tmin", 2, "--tmax", 20])
    assert code == 0
    fields = dict(kv.split("=") for kv in out.split())
    assert float(fields["t_bath"]) == pytest.approx(7.0, abs=1e-3)
    assert fields["converged"] == "true"


def test_fit_bath_edge_is_domain_error(config, tmp_path):
    path = config("mech-only")
    data = tmp_path / "measured.csv"
    data.write_text(run(["spectrum", path])[1])
    assert run(["fit-bath", path, "--data", data, "--tmin", 10, "--tmax", 30])[0] == 4


@pytest.mark.parametrize("content", [
    "",
    "freq,total\n1,2\n",
    "freq_hz,total_sn\n1.0,abc\n",
    "freq_hz,total_sn\n2.0,1.0\n1.0,1.0\n",
    "freq_hz,total_sn\n",
    "freq_hz,total_sn\n1.0,nan\n",
])
def test_malformed_csv(config, tmp_path, content):
    data = tmp_path / "bad.csv"
    data.write_text(content)
    with pytest.raises(ValueError):
        read_spectrum_csv(data)
    assert run(["fit-bath", config(), "--data", data])[0] == 2


def test_bad_config(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("kapa_hz = 1\n")
    assert run(["spectrum", path])[0] == 2
    assert run(["spectrum", tmp_path / "missing.toml"])[0] == 2


def test_blue_detuning_is_unstable(config):
    assert run(["spectrum", config(extra="detuning_hz = 4.7e6\n")])[0] == 3


def test_presets():
    code, text = run(["presets"])
    assert code == 0 and text.split() == ["fig23", "fig4"]
    code, text = run(["presets", "fig4"])
    assert code == 0
    from hybridqba.config import loads
    assert loads(text).values["kappa_hz"] == 7.7e6
    assert run(["presets", "fig5"])[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "hybridqba", "presets"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.split() == ["fig23", "fig4"]

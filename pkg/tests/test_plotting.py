import numpy as np

from effham import plotting


def test_embedded_data_roundtrip(tmp_path):
    x = np.linspace(0, 1, 11)
    p = plotting.plot_profile(x, {"a--b": x**2}, tmp_path / "f.svg", title="t")
    d = plotting.read_embedded(p)
    assert np.allclose(d["x"], x) and np.allclose(d["a--b"], x**2)


def test_svg_byte_stable(tmp_path):
    x = np.arange(5.0)
    a = plotting.plot_series(x, x**2, tmp_path / "a.svg", "x", "y", logy=False)
    b = plotting.plot_series(x, x**2, tmp_path / "b.svg", "x", "y", logy=False)
    assert open(a, "rb").read() == open(b, "rb").read()
    assert open(a).read().startswith("<?xml")

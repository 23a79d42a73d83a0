from fractions import Fraction
from pathlib import Path

import pytest

from projconf.affine import MetricField
from projconf.scene import SceneError, load_scene, parse_scene
from projconf.symkernel import Chart

SCENES = Path(__file__).parent / "scenes"


def test_minimal_flat_scene():
    s = parse_scene("[chart] n=3 vars=x0,x1,x2\n[metric] diag(1,1,1)\n")
    assert s.metric == MetricField.flat(Chart(3))
    assert s.connection is None and s.odes is None
    assert s.digest.startswith("sha256:")


def test_odes_only_scene():
    s = load_scene(SCENES / "odes.scene")
    assert s.metric is None and s.connection is None
    p1, p2 = s.odes.chart.var("p1"), s.odes.chart.var("p2")
    assert s.odes.f1 == p1**3 and s.odes.f2 == p1**2 * p2


def test_undeclared_variable_reports_line_and_column():
    text = "[chart]\nn = 3\nvars = x0, x1, x2\n[metric]\n0 0 = 1\n1 1 = 1 + x3\n2 2 = 1\n"
    with pytest.raises(SceneError) as info:
        parse_scene(text)
    assert info.value.line == 6
    assert info.value.column == 11


def test_syntax_error_reports_column():
    text = "[chart] n=3 vars=x0,x1,x2\n[connection]\n0 1 1 = x2 +* 1\n"
    with pytest.raises(SceneError) as info:
        parse_scene(text, path="bad.scene")
    assert info.value.line == 3 and info.value.column == 13
    assert "bad.scene" in str(info.value)


@pytest.mark.parametrize(
    "text",
    [
        "[metric] diag(1,1,1)\n",
        "[chart] n=3 vars=x0,x1,x2\n",
        "[chart] n=3 vars=x0,x1\n[metric] diag(1,1,1)\n",
        "[chart] n=3 vars=x0,x1,x2 signature=2\n[metric] diag(1,1,1)\n",
        "[chart] n=3 vars=x0,x1,x2\n[metric] diag(1,1)\n",
        "[chart] n=3 vars=x0,x1,x2\n[connection]\n0 1 = x0\n",
        "[chart] n=3 vars=x0,x1,x2\n[connection]\n0 1 3 = x0\n",
        "[chart] n=3 vars=x0,x1,x2\n[bogus]\n",
        "[chart] n=3 vars=x0,x1,x2\n[beta]\n1,0,0\n",
        "[quartic]\ncoeffs = 1, 2\n",
        "[chart] n=4 vars=x0,x1,x2,x3\n[odes]\nF1 = 0\nF2 = 0\n",
    ],
)
def test_invalid_scenes(text):
    with pytest.raises(SceneError):
        parse_scene(text)


def test_metric_forms_agree():
    diag = parse_scene("[chart] n=3 vars=x0,x1,x2\n[metric] diag(1, 1+x0^2, 1)\n").metric
    rows = parse_scene("[chart] n=3 vars=x0,x1,x2\n[metric]\n1, 0, 0\n0, 1+x0^2, 0\n0, 0, 1\n").metric
    entries = parse_scene("[chart] n=3 vars=x0,x1,x2\n[metric]\n0 0 = 1\n1 1 = 1 + x0^2\n2 2 = 1\n").metric
    assert diag == rows == entries


def test_signature_and_override():
    s = load_scene(SCENES / "lorentz.scene")
    assert s.metric.signature == -1
    assert s.with_signature(1).metric.signature == 1


def test_degree_bound_option():
    with pytest.raises(SceneError):
        parse_scene("[chart] n=3 vars=x0,x1,x2\n[metric] diag(1, 1+x0^8, 1)\n", degree_bound=4)


def test_optional_sections():
    s = load_scene(SCENES / "flat.scene")
    assert s.geodesic == {"x0": [0, 0, 0], "v0": [1, Fraction(1, 2), 0], "h": Fraction(1, 100), "steps": 5}
    s = load_scene(SCENES / "planted.scene")
    assert s.samples[1] == [1, 2, 3, Fraction(1, 2), 1]
    assert load_scene(SCENES / "quartic.scene").quartic == [1, 0, 0, 0, -1]
    assert not load_scene(SCENES / "weyl.scene").beta.is_zero()


def test_digest_depends_on_text():
    a = parse_scene("[chart] n=3 vars=x0,x1,x2\n[metric] diag(1,1,1)\n")
    b = parse_scene("[chart] n=3 vars=x0,x1,x2\n[metric] diag(1,1,2)\n")
    assert a.digest != b.digest

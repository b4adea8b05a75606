import pytest
from hypothesis import given
from hypothesis import strategies as st

from effham.config import SCHEMA, load_config, parse_config, schema_doc
from effham.errors import ConfigError

BASE = """
run.seeds = 0, 1, 2
env.momentum = |p|^3
env.class.gamma = 3
env.potential.kind = periodic_cosine
env.potential.amplitudes = 1.0, 0.3
theta.theta_grid = 1, -1, 0
"""


def test_parse_values_and_defaults():
    cfg = parse_config(BASE)
    assert cfg["run.seeds"] == [0, 1, 2]
    assert cfg["theta.theta_grid"] == [-1.0, 0.0, 1.0]
    assert cfg["parabolic.dx"] == SCHEMA["parabolic.dx"][1]
    spec = cfg.environment()
    assert spec.momentum == "|p|^3"
    assert spec.potential.params["amplitudes"] == [1.0, 0.3]


@pytest.mark.parametrize("text, msg", [
    ("foo.bar = 1", "unknown key"),
    ("run.seeds = 1\nrun.seeds = 2", "duplicate"),
    ("parabolic.dx = -1", "must be >"),
    ("theta.lambda_grid =", "empty value"),
    ("env.potential.kind = random_fourier\nenv.potential.decay = 1", "decay"),
    ("env.potential.kind = nope", "unknown field model"),
    ("env.potential.kind = constant\nenv.potential.amplitude = 2", "unknown key"),
    ("run.plots = maybe", "boolean"),
    ("just text", "expected"),
])
def test_rejects_bad_input(text, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(text)


def test_error_names_line():
    with pytest.raises(ConfigError, match="line 3"):
        parse_config("run.seeds = 0\n# c\nbad.key = 1\n")


@given(st.permutations(BASE.strip().splitlines()), st.booleans())
def test_hash_ignores_order_and_comments(lines, comment):
    text = "\n".join(ln + ("  # note" if comment else "") for ln in lines)
    assert parse_config(text).hash == parse_config(BASE).hash


def test_hash_sees_values():
    assert parse_config(BASE).hash != parse_config(BASE.replace("0.3", "0.4")).hash


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "none.cfg")


def test_schema_doc_lists_keys():
    doc = schema_doc()
    assert "theta.lambda_grid" in doc and "random_fourier" in doc

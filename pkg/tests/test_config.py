import math
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meanper.config import load_config, override, parse_config, parse_number
from meanper.errors import InvalidArgument, ParseError

MINIMAL = """
[convolver]
kind = gegenbauer
alpha = 0.5
r = 1
"""


def test_minimal_config_gets_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.convolver.alpha == 0.5 and cfg.convolver.r == 1.0
    assert cfg.run.quad_order == 256
    assert cfg.run.cutoff == 64
    assert cfg.run.grid_size == 801
    assert cfg.run.command == "extend"
    assert cfg.function.variant == "exponential"


def test_full_config():
    text = """
    # comment line
    [convolver]
    kind = weighted     # trailing comment
    alpha = 1/2
    h_coeffs = 1, 1
    r = 2

    [function]
    terms = pi, 0, -0.5j; -pi, 0, 0.5j
    half_width = 3
    smoothness_k = 5

    [run]
    command = coeffs
    R = 7.5
    q = 1
    gamma = 1.5
    threads = 4
    probes = -0.5, 0, 0.5
    deterministic = true
    """
    cfg = parse_config(text)
    assert cfg.convolver.kind == "weighted"
    assert cfg.convolver.h_coeffs == (1.0, 1.0)
    assert cfg.function.terms == ((math.pi, 0, -0.5j), (-math.pi, 0, 0.5j))
    assert cfg.run.R == 7.5 and cfg.run.threads == 4
    assert cfg.run.probes == (-0.5, 0.0, 0.5)


def test_alpha_constraint():
    with pytest.raises(ParseError, match="alpha > -1/2") as info:
        parse_config(MINIMAL.replace("alpha = 0.5", "alpha = -0.6"))
    assert info.value.line == 4
    assert info.value.key == "alpha"


def test_unknown_key_names_line():
    text = MINIMAL + "alpha_ = 3\n"
    with pytest.raises(ParseError) as info:
        parse_config(text)
    assert info.value.line == 6
    assert info.value.key == "alpha_"
    assert "line 6" in str(info.value) and "alpha_" in str(info.value)


@pytest.mark.parametrize(
    "text, line",
    [
        ("[convolver]\nkind = gegenbauer\nalpha = abc\n", 3),
        ("[convolver]\nkind = circle\n", 2),
        ("[nope]\n", 1),
        ("kind = tent\n", 1),
        ("[convolver]\nkind tent\n", 2),
        ("[convolver]\nkind = tent\nkind = tent\n", 3),
        ("[convolver]\nkind = tent\nalpha = 1\n", 3),
        ("[convolver]\nkind = tent\n[run]\ncutoff = 0\n", 4),
        ("[convolver]\nkind = tent\n[run]\ngrid_size = 2.5\n", 4),
        ("[convolver]\nkind = tent\n[run]\nR = -1\n", 4),
        ("[convolver]\nkind = tent\n[function]\nhalf_width = 0\n", 4),
        ("[convolver\n", 1),
    ],
)
def test_parse_errors(text, line):
    with pytest.raises(ParseError) as info:
        parse_config(text)
    assert info.value.line == line


def test_missing_alpha():
    with pytest.raises(ParseError, match="requires 'alpha'"):
        parse_config("[convolver]\nkind = gegenbauer\n")


def test_tent_config_without_alpha():
    cfg = parse_config("[convolver]\nkind = tent\nr = 2\n")
    assert cfg.convolver.alpha is None


def test_override_validates():
    cfg = parse_config(MINIMAL)
    assert override(cfg, "run", "R", "4").run.R == 4.0
    assert override(cfg, "convolver", "alpha", "3/2").convolver.alpha == 1.5
    with pytest.raises(ParseError):
        override(cfg, "convolver", "alpha", "-1")
    with pytest.raises(ParseError):
        override(cfg, "run", "nope", "1")
    with pytest.raises(ParseError):
        override(cfg, "run", "cutoff", "many")


def test_load_config(tmp_path):
    path = tmp_path / "a.cfg"
    path.write_text(MINIMAL, encoding="utf-8")
    cfg = load_config(path)
    assert cfg.base_dir == tmp_path
    with pytest.raises(InvalidArgument):
        load_config(tmp_path / "missing.cfg")


@settings(max_examples=60, deadline=None)
@given(x=st.floats(-1e6, 1e6, allow_nan=False))
def test_parse_number_round_trip(x):
    assert parse_number(repr(x)) == x


def test_parse_number_expressions():
    assert parse_number("2*pi") == 2 * math.pi
    assert parse_number("-0.5j") == -0.5j
    assert parse_number("1 + 2j") == 1 + 2j
    assert parse_number("pi/2 - 1") == math.pi / 2 - 1
    for bad in ("__import__('os')", "x", "1 +", "abs(1)", "1/0"):
        with pytest.raises(ValueError):
            parse_number(bad)

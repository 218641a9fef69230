from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from nonlocal_lab.config import RunConfig, config_from_text, load_config, parse_config_text
from nonlocal_lab.errors import ConfigError, DomainError, NonlocalError
from nonlocal_lab.io import (
    decode_form,
    dumps,
    encode_form,
    form_info,
    grid_frame,
    read_form,
    read_values,
    write_csv,
    write_form,
    write_json,
)
from nonlocal_lab.models import EllVariant, GridFunction, TailVariant

DEFAULT_CONF = Path(__file__).resolve().parents[1] / "configs" / "default.conf"


def test_default_config_file_loads():
    config = load_config(DEFAULT_CONF)
    assert config.kernel.tail_variant == TailVariant.POWER_DECAY
    assert config.kernel.tail_alpha2 == 0.5
    assert config.verify.checks[0] == "poincare"
    assert config.verify.seeds == 200
    domain = config.build_domain()
    assert domain.n_interior == 32


def test_missing_config_gives_defaults():
    config = load_config(None)
    assert config == RunConfig()
    assert config.kernel.ell_variant == EllVariant.CONSTANT
    assert config.r_ext == config.kernel.rho
    assert config.output_dir == Path("out")


def test_comments_and_blank_lines_are_ignored():
    entries = parse_config_text("# header\n\nrho = 0.5   # inline\n")
    assert entries == {"rho": ("0.5", 3)}


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("rho = 1\nell.gamma = 2\n", 2, "unknown key 'ell.gamma'"),
        ("rho = 1\n\nrho = 2\n", 3, "duplicate key 'rho' (first set on line 1)"),
        ("dimension 2\n", 1, "expected 'key = value'"),
        ("# c\nrho = wide\n", 2, "rho"),
        ("dimension = 3\n", 1, "dimension must be 1 or 2"),
        ("domain.h = -0.1\n", 1, "domain.h must be positive"),
        ("verify.checks = poincare, sobolev\n", 1, "valid checks"),
    ],
)
def test_config_errors_name_their_line(text, line, fragment):
    with pytest.raises(ConfigError) as excinfo:
        config_from_text(text)
    assert excinfo.value.line == line
    assert str(excinfo.value).startswith(f"line {line}: ")
    assert fragment in str(excinfo.value)


def test_inconsistent_sections_are_rejected():
    with pytest.raises(ConfigError, match="needs dimension = 1"):
        config_from_text("dimension = 2\ndomain.shape = interval\n")
    with pytest.raises(ConfigError, match="must be at least rho"):
        config_from_text("rho = 1.0\ndomain.r_ext = 0.5\n")


def test_kernel_and_source_from_config():
    config = config_from_text(
        "ell.variant = logpow\nell.beta = 2\nrho = 0.5\nsolver.sublinear_power = constant\nsolver.sublinear_scale = 3\n"
    )
    kernel = config.kernel_spec()
    assert kernel.rho == 0.5
    assert kernel.ell.beta == 2.0
    source = config.source()
    assert source.power is None
    assert float(source.f(7.0)) == 3.0


def test_box_and_ball_shapes():
    box = config_from_text("dimension = 2\ndomain.shape = box\ndomain.lower = 0, 0\ndomain.upper = 1, 0.5\n")
    assert box.domain.lower == [0.0, 0.0]
    assert box.shape().measure == pytest.approx(0.5)
    ball = config_from_text("dimension = 2\ndomain.shape = ball\ndomain.radius = 2\n")
    assert ball.shape().radius == 2.0


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "absent.conf")


def test_form_file_roundtrip(tmp_path, tailed_form):
    path = write_form(tmp_path / "form.bin", tailed_form)
    loaded = read_form(path)
    np.testing.assert_array_equal(loaded.weights, tailed_form.weights)
    np.testing.assert_array_equal(loaded.exterior_mass, tailed_form.exterior_mass)
    np.testing.assert_array_equal(loaded.interior_index, tailed_form.domain.interior_index)
    assert form_info(loaded) == form_info(tailed_form)
    assert not list(tmp_path.glob("*.tmp"))


def test_form_file_rejects_damaged_data(log_form):
    data = encode_form(log_form)
    with pytest.raises(NonlocalError, match="bad magic"):
        decode_form(b"XXXXXX" + data[6:])
    with pytest.raises(NonlocalError, match="does not match"):
        decode_form(data[:-8])
    with pytest.raises(NonlocalError, match="truncated"):
        decode_form(data[:10])


def test_form_info_fields(log_form):
    info = form_info(log_form)
    assert info["n_interior"] == 32
    assert info["lambda_min"] == pytest.approx(float(np.min(log_form.exterior_mass)))
    assert info["weight_count"] > 0


def test_csv_and_values(tmp_path, interval_domain):
    u = GridFunction.from_callable(interval_domain, lambda x: x[:, 0])
    path = write_csv(tmp_path / "u.csv", grid_frame(u))
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["x", "region", "value"]
    assert (frame["region"] == "interior").sum() == 32
    interior = frame[frame["region"] == "interior"]
    write_csv(tmp_path / "f.csv", interior[["x", "value"]])
    np.testing.assert_array_equal(read_values(tmp_path / "f.csv", 32), u.interior)


def test_read_values_validates(tmp_path):
    write_csv(tmp_path / "short.csv", {"value": [1.0, 2.0]})
    with pytest.raises(DomainError, match="expected 3"):
        read_values(tmp_path / "short.csv", 3)
    (tmp_path / "bad.csv").write_text("data\n1\nnope\n", encoding="utf-8")
    with pytest.raises(DomainError, match="non-numeric"):
        read_values(tmp_path / "bad.csv", 2)
    with pytest.raises(DomainError, match="not found"):
        read_values(tmp_path / "missing.csv", 1)


def test_json_is_sorted_and_plain(tmp_path):
    text = dumps({"b": np.float64(1.5), "a": np.array([1, 2]), "c": np.bool_(True)})
    assert text.index('"a"') < text.index('"b"')
    assert '"c": true' in text
    path = write_json(tmp_path / "out.json", {"x": 1}, timestamp=True)
    assert "generated_at" in path.read_text(encoding="utf-8")

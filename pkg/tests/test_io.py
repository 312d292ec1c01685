"""CSV and JSON round trips and input validation."""
import json

import numpy as np
import pytest

from resodecay import io
from resodecay.decay import ChannelRates
from resodecay.errors import InvalidInput
from resodecay.simulate import (
    BinnedCounts, DecayEvents, ScatteringEvents, bin_counts, sample_decays, sample_lineshape,
)
from resodecay.smatrix import ResonanceParams


def test_float_format_round_trips():
    rng = np.random.default_rng(1)
    for x in np.concatenate([rng.normal(size=1000) * 10.0 ** rng.integers(-300, 300, 1000),
                             [np.pi, 1e-320, 2.0**-1074]]):
        assert float(io.fmt(x)) == x
    assert "," not in io.fmt(1234567.5)


def test_scattering_round_trip(tmp_path):
    ev = sample_lineshape(500, ResonanceParams(2.0, 0.2), seed=9)
    path = tmp_path / "e.csv"
    io.write_events_csv(path, ev)
    back = io.read_csv(str(path))
    assert isinstance(back, ScatteringEvents)
    np.testing.assert_array_equal(back.energies, ev.energies)
    assert back.window == (1.0, 3.0) and back.seed == 9


def test_decay_round_trip(tmp_path):
    ev = sample_decays(500, ChannelRates((0.5, 1.5), ("pi", "mu")), seed=10)
    path = tmp_path / "d.csv"
    io.write_events_csv(path, ev)
    text = path.read_text().splitlines()
    assert text[0].startswith("# seed=10 model_digest=") and text[1] == "t,channel"
    back = io.read_csv(str(path))
    assert isinstance(back, DecayEvents)
    np.testing.assert_array_equal(back.times, ev.times)
    np.testing.assert_array_equal(back.channels, ev.channels)
    assert back.rates == ev.rates


def test_binned_round_trip(tmp_path):
    ev = sample_decays(2000, ChannelRates((1.0, 3.0)), seed=1)
    b = bin_counts(ev, np.linspace(0.0, 2.0, 11))
    path = tmp_path / "b.csv"
    io.write_binned_csv(path, b, 1, "abc")
    back = io.read_csv(str(path))
    assert isinstance(back, BinnedCounts) and back.kind == "time"
    np.testing.assert_array_equal(back.edges, b.edges)
    np.testing.assert_array_equal(back.counts, b.counts)
    assert back.labels == b.labels and back.total == 2000


def test_digest_is_order_independent():
    assert io.json_digest({"a": 1, "b": [1, 2]}) == io.json_digest({"b": [1, 2], "a": 1})
    assert io.json_digest({"a": 1}) != io.json_digest({"a": 2})


def test_write_json_sorted(tmp_path):
    path = tmp_path / "x.json"
    io.write_json(path, {"b": 1, "a": 2})
    assert list(json.loads(path.read_text())) == ["a", "b"]


@pytest.mark.parametrize("content,needle", [
    ("", "empty"),
    ("# seed=1 model_digest=x\n", "no column header"),
    ("E\n", "no data rows"),
    ("E\n1.0\nabc\n", "not a number"),
    ("E\n1.0\n-2.0\n", "negative energy"),
    ("t,channel\n1.0\n", "expected 2 columns"),
    ("t,channel\n-1.0,a\n", "negative decay time"),
    ("# labels=a\nt,channel\n1.0,b\n", "unknown channel"),
    ("t_lo,t_hi,channel,count\n0,1,a,1.5\n", "nonnegative integer"),
    ("x,y\n1,2\n", "unrecognised columns"),
    ("E\n1.0\nnan\n", "non-finite"),
])
def test_malformed_files_name_the_file(tmp_path, content, needle):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(InvalidInput) as info:
        io.read_csv(str(path))
    assert str(path) in str(info.value) and needle in str(info.value)


def test_missing_file(tmp_path):
    with pytest.raises(InvalidInput, match="no such file"):
        io.read_csv(str(tmp_path / "nope.csv"))

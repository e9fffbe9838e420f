"""Correlation families: per-formula values, decay diagnostics, metadata."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sgextremes.correlation import (
    Geometric,
    LogDecay,
    PowerDecay,
    berman_diagnostic,
    model_from_config,
    model_to_config,
    rho,
)


def test_rho_at_lag_zero_is_one():
    for model in (Geometric(0.5), Geometric(-0.3), PowerDecay(2.0, 1.0), LogDecay(1.0)):
        assert rho(model, 0) == 1.0


def test_geometric_values_by_hand():
    assert rho(Geometric(0.5), 3) == pytest.approx(0.125, abs=0)
    assert rho(Geometric(0.5), 1) == 0.5


def test_power_decay_value_by_hand():
    assert rho(PowerDecay(a=2.0, c=1.0), 1) == pytest.approx(0.25, abs=0)


def test_power_decay_cap():
    model = PowerDecay(a=0.1, c=5.0)
    assert rho(model, 1) == pytest.approx(0.999)
    assert abs(rho(model, 1)) < 1.0


def test_rho_vectorized():
    vals = rho(Geometric(0.5), np.arange(4))
    assert np.allclose(vals, [1.0, 0.5, 0.25, 0.125])


def test_rho_rejects_negative_lag():
    with pytest.raises(ValueError):
        rho(Geometric(0.5), -1)


@given(st.floats(-0.95, 0.95), st.integers(1, 40))
def test_geometric_ratio_property(r, k):
    model = Geometric(r)
    rk = rho(model, k)
    if rk != 0.0:
        assert rho(model, k + 1) / rk == pytest.approx(r, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize(
    "model", [Geometric(0.7), Geometric(-0.7), PowerDecay(1.5, 0.8), LogDecay(0.5)]
)
def test_monotone_decay_bound(model):
    lags = np.arange(1, 101)
    vals = np.abs(np.atleast_1d(rho(model, lags)))
    assert np.all(vals <= abs(rho(model, 1)) + 1e-15)


def test_berman_diagnostic_geometric_decreasing():
    tab = berman_diagnostic(Geometric(0.5), [4, 16, 256], delta=0.0)
    assert tab[0, 1] == pytest.approx(0.5**4 * math.log(4))
    assert tab[1, 1] == pytest.approx(0.5**16 * math.log(16))
    assert np.all(np.diff(tab[:, 1]) < 0)


def test_berman_diagnostic_log_decay_nonvanishing():
    grid = [math.e**2, math.e**4, math.e**8, math.e**12]
    tab = berman_diagnostic(LogDecay(1.0), grid, delta=0.0)
    # c / ln(n+e) * ln(n) -> c = 1: stays bounded away from zero
    assert np.all(tab[:, 1] > 0.5)
    assert tab[-1, 1] == pytest.approx(1.0, abs=1e-3)


def test_berman_diagnostic_zero_correlation():
    tab = berman_diagnostic(Geometric(0.0), [2], delta=0.0)
    assert tab[0, 1] == 0.0
    assert tab[0, 2] == 0.0


def test_berman_diagnostic_delta_column():
    tab = berman_diagnostic(Geometric(0.5), [4, 16], delta=0.5)
    assert tab[0, 2] == pytest.approx(0.5**4 * math.log(4) ** 1.5)


@pytest.mark.parametrize("model", [Geometric(0.5), PowerDecay(2.0, 1.0)])
def test_diagnostic_decreasing_beyond_crossover(model):
    # locate the crossover on a dense scan, then assert decay on a fixed grid
    dense = berman_diagnostic(model, np.arange(2, 64), delta=0.0)
    drops = np.nonzero(np.diff(dense[:, 1]) < 0)[0]
    assert drops.size > 0
    crossover = dense[drops[0], 0]
    grid = [int(crossover) + 2**j for j in range(1, 11)]
    tab = berman_diagnostic(model, grid, delta=0.0)
    assert np.all(np.diff(tab[:, 1]) < 0)


def test_berman_diagnostic_validation():
    with pytest.raises(ValueError):
        berman_diagnostic(Geometric(0.5), [1, 4])
    with pytest.raises(ValueError):
        berman_diagnostic(Geometric(0.5), [16, 4])
    with pytest.raises(ValueError):
        berman_diagnostic(Geometric(0.5), [4, 16], delta=-1.0)


def test_berman_ok_metadata():
    assert Geometric(0.5).berman_ok
    assert PowerDecay(2.0, 1.0).berman_ok
    assert not LogDecay(1.0).berman_ok


def test_parameter_validation():
    with pytest.raises(ValueError):
        Geometric(1.0)
    with pytest.raises(ValueError):
        Geometric(-1.0)
    with pytest.raises(ValueError):
        PowerDecay(a=0.0, c=1.0)
    with pytest.raises(ValueError):
        PowerDecay(a=1.0, c=-2.0)
    with pytest.raises(ValueError):
        LogDecay(0.0)


def test_config_round_trip():
    for model in (Geometric(0.3), PowerDecay(2.0, 0.7), LogDecay(1.2)):
        assert model_from_config(model_to_config(model)) == model


def test_config_errors():
    with pytest.raises(ValueError):
        model_from_config({"family": "nope"})
    with pytest.raises(ValueError):
        model_from_config({"r": 0.5})
    with pytest.raises(ValueError):
        model_from_config({"family": "geometric", "bogus": 1})

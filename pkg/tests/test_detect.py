import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from locscape import GridGeometry, Landscape, local_maxima, predict_threshold, superlevel_regions
from locscape.detect import Region, default_window
from locscape.errors import ThresholdWarning

values_1d = st.lists(st.integers(-5, 5).map(float), min_size=3, max_size=40)


def chain(values, alpha=1.0):
    v = np.asarray(values, dtype=float)
    return Landscape(v, alpha, GridGeometry.chain(v.size))


def peaks(L, window=1):
    return [r.peak_index for r in local_maxima(L, window)]


def test_simple_chain():
    L = chain([0, 1, 0, 3, 0])
    assert peaks(L) == [3, 1]
    assert [r.peak_value for r in local_maxima(L, 1)] == [3.0, 1.0]


def test_constant_landscape_is_one_plateau():
    assert peaks(chain(np.zeros(12)), 2) == [0]


def test_separated_plateaus_stay_separate():
    assert peaks(chain([2, 2, 0, -1, 0, 2, 2]), 1) == [0, 5]


def test_ties_sorted_by_index():
    assert peaks(chain([1, 0, 1, 0, 1]), 1) == [0, 2, 4]


def test_region_members_are_window_ball():
    r = local_maxima(chain([0, 0, 5, 0, 0, 0, 0]), 2)[0]
    assert list(r.indices) == [0, 1, 2, 3, 4]


def test_window_validation():
    with pytest.raises(ValueError):
        local_maxima(chain([0, 1, 0]), 0)


def test_default_window():
    assert default_window(GridGeometry.chain(300)) == 10
    assert default_window(GridGeometry.torus(48)) == 2
    assert default_window(GridGeometry.chain(10)) == 1


@settings(max_examples=60, deadline=None)
@given(values_1d)
def test_global_window_finds_argmax(values):
    v = np.asarray(values)
    assert peaks(chain(v), v.size) == [int(np.argmax(v))]


@settings(max_examples=60, deadline=None)
@given(values_1d, st.floats(-100, 100, allow_nan=False), st.integers(1, 4))
def test_shift_invariance(values, c, window):
    L = chain(values)
    shifted = chain(np.asarray(values) + c)
    assert peaks(L, window) == peaks(shifted, window)


@settings(max_examples=60, deadline=None)
@given(values_1d, st.integers(1, 4))
def test_monotone_transform_invariance(values, window):
    v = np.asarray(values)
    assert peaks(chain(v), window) == peaks(chain(np.exp(0.3 * v)), window)


@settings(max_examples=60, deadline=None)
@given(values_1d, st.integers(1, 4))
def test_peaks_dominate_their_window(values, window):
    L = chain(values)
    g = L.geometry
    for r in local_maxima(L, window):
        assert L.values[g.ball(r.peak_index, window)].max() <= r.peak_value


@settings(max_examples=40, deadline=None)
@given(values_1d, st.integers(1, 3))
def test_larger_window_gives_subset(values, window):
    L = chain(values)
    # a coarser window can only drop peak values, never create new ones
    fine = {r.peak_value for r in local_maxima(L, window)}
    assert {r.peak_value for r in local_maxima(L, window + 1)} <= fine


def test_cyclic_shift_equivariance_on_torus():
    rng = np.random.default_rng(3)
    grid = rng.standard_normal((12, 12))
    g = GridGeometry.torus(12)
    base = local_maxima(Landscape(grid.ravel(), 1.0, g), 2)
    moved = local_maxima(Landscape(np.roll(grid, (3, 5), axis=(0, 1)).ravel(), 1.0, g), 2)
    expect = sorted(((r // 12 + 3) % 12) * 12 + (r % 12 + 5) % 12 for r in (p.peak_index for p in base))
    assert sorted(p.peak_index for p in moved) == expect


def test_torus_wraps_across_the_seam():
    grid = np.zeros((10, 10))
    grid[0, 0] = 5.0
    grid[9, 9] = 4.0  # diagonal neighbour of (0, 0) through the corner
    g = GridGeometry.torus(10)
    assert [r.peak_index for r in local_maxima(Landscape(grid.ravel(), 1.0, g), 1)][:1] == [0]
    assert 99 not in [r.peak_index for r in local_maxima(Landscape(grid.ravel(), 1.0, g), 1)]
    comps = superlevel_regions(Landscape(grid.ravel(), 1.0, g), 3.0)
    assert len(comps) == 1 and sorted(comps[0].indices) == [0, 99]


def test_superlevel_components_chain():
    L = chain([0, 3, 4, 0, 5, 0, 2])
    regions = superlevel_regions(L, 2.0)
    assert [list(r.indices) for r in regions] == [[4], [1, 2], [6]]
    assert [r.peak_index for r in regions] == [4, 2, 6]
    assert superlevel_regions(L, 10.0) == []


def test_region_dict_round_trip():
    g = GridGeometry.torus(4)
    r = Region(np.array([1, 2, 5]), 5, 2.5)
    back = Region.from_dict(r.to_dict(g))
    assert list(back.indices) == [1, 2, 5] and back.peak_index == 5 and back.peak_value == 2.5


def test_predict_threshold_from_peaks():
    L = chain([0, 1, 0, 3, 0, 2, 0])
    assert predict_threshold(L, 1, window=1) == 3.0
    assert predict_threshold(L, 3, window=1) == 1.0


def test_predict_threshold_too_few_peaks_warns():
    L = chain([0, 1, 0, 3, 0])
    with pytest.warns(ThresholdWarning):
        y = predict_threshold(L, 4, window=1)
    assert y == 1.0


def test_predict_threshold_oracle():
    lam = np.array([5.0, 4.0, 1.0, 1.0])
    L = chain(np.zeros(4), alpha=10)
    y = predict_threshold(L, 2, eigenvalues=lam, J_max=1)
    assert y == pytest.approx(10 * np.log(4) - np.log(2), abs=1e-12)
    with pytest.raises(ValueError):
        predict_threshold(L, 2, eigenvalues=lam)
    with pytest.raises(ValueError):
        predict_threshold(L, 0)


def test_predict_threshold_second_peak():
    assert predict_threshold(chain([0, 5, 0, 3, 0]), 2, window=1) == 3.0


def test_superlevel_extremes():
    L = chain([1, 4, 2, 4, 0])
    top = superlevel_regions(L, 4.0)
    assert [list(r.indices) for r in top] == [[1], [3]]
    everything = superlevel_regions(L, -np.inf)
    assert len(everything) == 1 and list(everything[0].indices) == [0, 1, 2, 3, 4]


@settings(max_examples=60, deadline=None)
@given(values_1d, st.integers(-5, 5), st.integers(0, 4))
def test_superlevel_nesting(values, y1, dy):
    L = chain(values)
    coarse = [set(r.indices) for r in superlevel_regions(L, y1)]
    for r in superlevel_regions(L, y1 + dy):
        assert any(set(r.indices) <= c for c in coarse)
        assert r.peak_index in r.indices and r.peak_value == L.values[r.peak_index]
        idx = np.sort(r.indices)
        assert np.all(np.diff(idx) == 1)  # connected on the chain


def test_band_matrix_peaks_and_threshold(band300):
    from locscape import eig_symmetric, fit_profile, landscape_exact

    L = landscape_exact(band300, 50)
    assert len(local_maxima(L, 5)) >= 6
    S = eig_symmetric(band300)
    P = fit_profile(S, 6, L.geometry)
    assert P.J_max < 30 and P.beta > 0
    y = predict_threshold(L, 6, window=5)
    members = np.concatenate([r.indices for r in superlevel_regions(L, y)])
    hit = [np.intersect1d(J, members).size > 0 for J in P.half_mass_regions]
    assert sum(hit) >= 5

import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mallckpt.errors import ProfileError
from mallckpt.fixtures import TABLE_I, table_profile
from mallckpt.profile import (AppProfile, BenchmarkPoint, fit_profile, load_profile,
                              save_profile)


def test_exact_linear_power_law():
    pts = [BenchmarkPoint("work", 1, 2.0), BenchmarkPoint("work", 2, 4.0),
           BenchmarkPoint("ckpt", 1, 5.0)]
    p = fit_profile(pts, 4, recov_default=1.0)
    # c=2, b=1 through both points: 2*a
    np.testing.assert_allclose(p.work, [2, 4, 6, 8], rtol=1e-12)


def test_constant_fill_single_ckpt():
    pts = [("work", 1, 1.0), ("work", 3, 2.0), ("ckpt", 2, 9.55)]
    p = fit_profile(pts, 6, model="constant_fill", recov_default=0.0)
    assert p.ckpt.tolist() == [9.55] * 6
    assert p.work.tolist() == [1.0, 1.0, 2.0, 2.0, 2.0, 2.0]   # tie at a=2 -> smaller


def test_power_law_extrapolation():
    truth = lambda a: 3.0 * a ** 0.8
    pts = [("work", a, truth(a)) for a in (1, 2, 4, 8)] + [("ckpt", 1, 1.0)]
    p = fit_profile(pts, 16, recov_default=2.0)
    assert p.work_rate(16) == pytest.approx(truth(16), rel=0.01)


def test_degenerate_fit_falls_back():
    pts = [("work", 2, 3.0), ("work", 2, 5.0), ("ckpt", 1, 0.0), ("ckpt", 4, 2.0)]
    p = fit_profile(pts, 4, recov_default=1.0)
    assert p.work.tolist() == [4.0] * 4                  # averaged duplicate, constant
    assert p.ckpt.tolist() == [0.0, 0.0, 2.0, 2.0]        # zero value: no log fit


def test_recov_rules():
    base = [("work", 1, 1.0), ("work", 2, 2.0), ("ckpt", 1, 1.0)]
    p = fit_profile(base + [("recov", (1, 1), 4.0), ("recov", (2, 2), 8.0)], 3)
    # R = c (k+l)^b through (2, 4) and (4, 8) -> R = 2 (k+l)
    np.testing.assert_allclose(p.recov, 2.0 * (np.arange(1, 4)[:, None] + np.arange(1, 4)))
    p = fit_profile(base + [("recov", (1, 2), 6.0)], 3)
    assert np.all(p.recov == 6.0)
    p = fit_profile(base, 3, recov_default=7.5)
    assert np.all(p.recov == 7.5)
    with pytest.raises(ProfileError):
        fit_profile(base, 3)


@pytest.mark.parametrize("pts", [
    [("work", 1, 1.0), ("ckpt", 1, 1.0)],
    [("work", 1, 1.0), ("work", 2, 2.0)],
    [("work", 1, 1.0), ("work", 2, 0.0), ("ckpt", 1, 1.0)],
    [("work", 1, 1.0), ("work", 9, 2.0), ("ckpt", 1, 1.0)],
])
def test_fit_errors(pts):
    with pytest.raises(ProfileError):
        fit_profile(pts, 4, recov_default=1.0)


point_sets = st.lists(
    st.tuples(st.sampled_from(["work", "ckpt"]), st.integers(1, 12), st.floats(0.01, 1e3)),
    min_size=1, max_size=8)


@given(point_sets, st.lists(st.tuples(st.integers(1, 12), st.integers(1, 12),
                                      st.floats(0.01, 1e3)), max_size=4))
def test_measured_points_preserved(extra, rec):
    pts = [("work", 1, 2.0), ("work", 5, 7.0), ("ckpt", 3, 4.0)] + list(extra)
    pts += [("recov", (k, l), v) for k, l, v in rec]
    p = fit_profile(pts, 12, recov_default=1.0)
    groups = {}
    for kind, cfg, v in pts:
        groups.setdefault((kind, cfg), []).append(v)
    for (kind, cfg), vs in groups.items():
        got = {"work": lambda: p.work_rate(cfg), "ckpt": lambda: p.ckpt_cost(cfg),
               "recov": lambda: p.recov_cost(*cfg)}[kind]()
        assert got == pytest.approx(np.mean(vs), rel=1e-12)


@given(st.floats(0.1, 100.0), st.lists(st.floats(0.5, 50.0), min_size=3, max_size=3))
def test_power_law_scale_consistent(scale, vals):
    pts = [("work", a, v) for a, v in zip((1, 3, 7), vals)] + [("ckpt", 2, vals[0])]
    pts += [("recov", (1, 2), vals[1]), ("recov", (4, 4), vals[2])]
    p = fit_profile(pts, 10)
    q = fit_profile([(k, c, scale * v) for k, c, v in pts], 10)
    np.testing.assert_allclose(q.work, scale * p.work, rtol=1e-9)
    np.testing.assert_allclose(q.ckpt, scale * p.ckpt, rtol=1e-9)
    np.testing.assert_allclose(q.recov, scale * p.recov, rtol=1e-9)


def test_save_load_round_trip():
    p = table_profile("QR", 8)
    assert load_profile(save_profile(p)) == p


@pytest.mark.parametrize("mutate,msg", [
    (lambda d: d.pop("ckpt"), "missing"),
    (lambda d: d.__setitem__("work", d["work"][:-1]), "length"),
    (lambda d: d["recov"][0].__setitem__(0, -1.0), "negative"),
    (lambda d: d["work"].__setitem__(0, 0.0), "positive"),
    (lambda d: d.__setitem__("recov", d["recov"][:-1]), "shape"),
])
def test_load_errors(mutate, msg):
    d = table_profile("CG", 4).to_dict()
    mutate(d)
    with pytest.raises(ProfileError, match=msg):
        load_profile(json.dumps(d))


def test_qr_fixture_ranges():
    text = open(__file__.replace("test_profile.py", "data/qr_16.json")).read()
    p = load_profile(text)
    lo, avg, hi = TABLE_I["QR"]["ckpt"]
    assert lo == 91.90 and avg == 99.19 and hi == 117.28
    assert p.ckpt.min() >= 91.90 and p.ckpt.max() <= 117.28
    assert p.recov.min() >= 8.74 and p.recov.max() <= 32.97


def test_profile_is_immutable_value():
    p = table_profile("MD", 4)
    with pytest.raises(ValueError):
        p.work[0] = 1.0
    assert isinstance(p, AppProfile)


def test_representative_recovery():
    recov = np.array([[1.0, 2.0], [3.0, 10.0]])
    p = AppProfile(2, [1.0, 2.0], [0.5, 0.5], recov)
    assert p.representative_recovery(2, "mean_in") == 6.0
    assert p.representative_recovery(2, "max_in") == 10.0
    assert p.representative_recovery(1) == 2.0

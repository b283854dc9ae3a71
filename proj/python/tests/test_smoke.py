"""Smoke tests for the python module: wiring and a small end-to-end fit."""

import numpy as np
import pytest

import pctf3d


def test_coupling_generators():
    c = pctf3d.gen_balanced(7, 12, seed=0)
    assert len(c) == 12
    assert c.degree_sequence() == [5, 5, 5, 5, 5, 5, 6]
    assert c.step() == 1
    assert c.is_connected()

    full = pctf3d.gen_full(6)
    assert len(full) == pctf3d.max_triplets(6) == 20

    plus2 = pctf3d.gen_plus2(6)
    assert plus2.triplets == [(1, 2, 3), (1, 5, 6), (3, 4, 5)]

    rnd = pctf3d.gen_random(8, 10, seed=5)
    assert rnd.triplets == pctf3d.gen_random(8, 10, seed=5).triplets

    with pytest.raises(ValueError):
        pctf3d.gen_random(4, 100, seed=0)


def test_coupling_text_round_trip():
    c = pctf3d.gen_balanced(6, 9, seed=1)
    again = pctf3d.Coupling.parse(str(c))
    assert again.triplets == c.triplets


def test_lyndon_words():
    assert pctf3d.lyndon_words(6) == ["000111", "001011", "001101"]


def test_khatri_rao_against_numpy():
    rng = np.random.default_rng(0)
    a = rng.random((3, 2))
    b = rng.random((4, 2))
    got = pctf3d.khatri_rao(a, b)
    want = np.column_stack([np.kron(a[:, r], b[:, r]) for r in range(2)])
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_cpd3_reconstruct_shape_and_mass():
    model = pctf3d.init_model(3, 4, 2, seed=9)
    t = pctf3d.cpd3_reconstruct(model.weights, model.factor(1), model.factor(2),
                                model.factor(3))
    assert t.shape == (4, 4, 4)
    assert t.min() >= -1e-12
    assert abs(t.sum() - 1.0) < 1e-9


def test_simplex_project():
    v = pctf3d.simplex_project(np.array([2.0, 0.0, 0.0]))
    np.testing.assert_allclose(v, [1.0, 0.0, 0.0], atol=1e-12)


def test_model_json_round_trip():
    model = pctf3d.init_model(4, 5, 3, seed=21)
    back = pctf3d.FactorModel.from_json(model.to_json())
    np.testing.assert_array_equal(back.weights, model.weights)
    np.testing.assert_array_equal(back.factor(2), model.factor(2))


def test_fit_recovers_synthetic_model():
    truth = pctf3d.gen_nbm("uniform", var_count=5, rank=2, bins=6, seed=3)
    data = pctf3d.sample_nbm(truth, rows=20000, seed=4)
    assert data.shape == (20000, 5)
    assert data.min() >= 1 and data.max() <= 6

    coupling = pctf3d.gen_balanced(5, 6, seed=0)
    model, report = pctf3d.fit(data, bins=6, coupling=coupling, rank=2, max_outer=150,
                               eps=1e-8, seed=11, restarts=3)
    model.validate(1e-9)
    assert report["final_objective"] <= report["initial_objective"]
    assert report["iterations"] >= 1

    score, _perm = pctf3d.fms(truth, model)
    assert score / 2.0 > 0.95

    err = pctf3d.err_3d(truth, model)
    assert err < 1e-2


def test_fit_rejects_disconnected_couplings():
    data = pctf3d.sample_nbm(pctf3d.init_model(6, 3, 1, seed=0), rows=50, seed=1)
    broken = pctf3d.Coupling(6, [(1, 2, 3), (4, 5, 6)])
    assert not broken.is_connected()
    with pytest.raises(ValueError):
        pctf3d.fit(data, bins=3, coupling=broken, rank=1)


def test_marginal_3d_matches_objective_zero():
    model = pctf3d.init_model(4, 3, 2, seed=5)
    h = model.marginal_3d((1, 2, 4))
    assert h.shape == (3, 3, 3)
    assert abs(h.sum() - 1.0) < 1e-9

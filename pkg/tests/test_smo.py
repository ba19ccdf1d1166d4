import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from evgr.errors import DimensionMismatch, SingleClassInput, SizeLimitExceeded, VersionMismatch
from evgr.features import FeatureConfig, FeatureVector
from evgr.rubric import Concept
from evgr.svm import LinearModel, SmoParams, TrainingMeta, kkt_violation, predict, qp_oracle, train_smo
from evgr.svm import smo as smo_mod

TWO_X = np.array([[1.0], [-1.0]])
TWO_Y = [1, 0]

try:
    from evgr.svm import _smo_kernel  # noqa: F401
    HAVE_EXT = True
except ImportError:
    HAVE_EXT = False

BACKENDS = ["python"] + (["cython"] if HAVE_EXT else [])


def random_instance(rng, n_max=8, d_max=6):
    n = int(rng.integers(2, n_max + 1))
    d = int(rng.integers(1, d_max + 1))
    X = rng.normal(size=(n, d))
    y = rng.integers(0, 2, size=n)
    y[0], y[1] = 0, 1
    return X, [int(v) for v in y], float(rng.choice([0.1, 1.0, 10.0]))


@pytest.mark.parametrize("backend", BACKENDS)
def test_two_point_analytic(backend):
    model, dual = train_smo(TWO_X, TWO_Y, SmoParams(c=1.0), backend=backend)
    np.testing.assert_allclose(dual.alphas, [0.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(model.weights, [1.0], atol=1e-12)
    assert abs(model.bias) < 1e-12
    assert dual.objective == pytest.approx(0.5, abs=1e-12)
    assert model.training_meta.converged


def test_predict_examples():
    model, _ = train_smo(TWO_X, TWO_Y)
    label, margin = predict(model, [1.0])
    assert label == 1 and margin == pytest.approx(1.0, abs=1e-12)
    assert predict(model, [0.0]) == (0, pytest.approx(0.0, abs=1e-12))
    zero = LinearModel(np.zeros(3), -0.5, None, FeatureConfig(), "", TrainingMeta(0, 0, 0, True))
    assert predict(zero, [4.0, 1.0, 2.0]) == (0, -0.5)
    assert predict(zero, FeatureVector({1: 3}, 3)) == (0, -0.5)


def test_exact_zero_margin_is_label_zero():
    m = LinearModel(np.array([1.0, -1.0]), 0.0, None, FeatureConfig(), "", TrainingMeta(0, 0, 0, True))
    assert predict(m, [2.0, 2.0]) == (0, 0.0)


def test_errors():
    with pytest.raises(SingleClassInput):
        train_smo(TWO_X, [1, 1])
    with pytest.raises(DimensionMismatch):
        train_smo(TWO_X, [1, 0, 1])
    model, _ = train_smo(TWO_X, TWO_Y)
    with pytest.raises(DimensionMismatch):
        predict(model, [1.0, 2.0])
    with pytest.raises(DimensionMismatch):
        predict(model, FeatureVector({0: 1}, 2))


@pytest.mark.parametrize("kwargs", [{"c": 0}, {"kkt_tolerance": 1.0}, {"alpha_epsilon": 2.0}, {"max_passes": 0}])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        SmoParams(**kwargs)


def test_identical_vectors_with_opposite_labels_terminate():
    X = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    model, dual = train_smo(X, [1, 0, 1], SmoParams(c=1.0))
    assert np.all(np.isfinite(model.weights))
    assert np.all((dual.alphas >= 0) & (dual.alphas <= 1.0))


def test_weights_are_dual_combination():
    rng = np.random.default_rng(4)
    X, y, c = random_instance(rng)
    model, dual = train_smo(X, y, SmoParams(c=c))
    ys = np.where(np.array(y) == 1, 1.0, -1.0)
    np.testing.assert_allclose(model.weights, X.T @ (dual.alphas * ys), atol=1e-12)


def test_iteration_cap_reports_not_converged():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 5))
    y = (rng.random(40) < 0.5).astype(int)
    model, dual = train_smo(X, y, SmoParams(c=10.0, max_iterations=3))
    assert not model.training_meta.converged
    assert model.training_meta.iterations <= 3
    assert np.all((dual.alphas >= 0) & (dual.alphas <= 10.0))


def test_oracle_examples():
    assert qp_oracle(TWO_X, TWO_Y, 1.0).objective == pytest.approx(0.5, abs=1e-8)
    with pytest.raises(SizeLimitExceeded):
        qp_oracle(np.ones((13, 2)), [0, 1] * 6 + [1], 1.0)


def test_oracle_dominates_on_separable_n6():
    rng = np.random.default_rng(11)
    X = np.vstack([rng.normal(2.0, 0.5, size=(3, 2)), rng.normal(-2.0, 0.5, size=(3, 2))])
    y = [1, 1, 1, 0, 0, 0]
    _, dual = train_smo(X, y, SmoParams(c=1.0))
    assert qp_oracle(X, y, 1.0).objective >= dual.objective - 1e-4


@pytest.mark.parametrize("backend", BACKENDS)
def test_constraints_hold_at_every_step_and_objective_is_monotone(backend):
    rng = np.random.default_rng(7)
    for _ in range(60):
        X, y, c = random_instance(rng, n_max=10)
        model, dual, trace = train_smo(X, y, SmoParams(c=c), backend=backend, trace=True)
        steps = trace.steps
        assert steps.shape[1] == 4
        obj, eq, lo, hi = steps.T
        assert np.all(np.diff(np.concatenate([[0.0], obj])) >= -1e-12)
        assert np.all(np.abs(eq) <= 1e-9)
        assert np.all(lo >= 0.0) and np.all(hi <= c)
        if len(obj):
            assert obj[-1] == pytest.approx(dual.objective, abs=1e-9)


@pytest.mark.parametrize("backend", BACKENDS)
def test_kkt_certificate_and_oracle_agreement(backend):
    rng = np.random.default_rng(2024)
    params_tol = 1e-3
    for _ in range(100):
        X, y, c = random_instance(rng)
        model, dual = train_smo(X, y, SmoParams(c=c, kkt_tolerance=params_tol), backend=backend)
        assert model.training_meta.converged
        assert kkt_violation(X, y, dual.alphas, dual.bias, c) <= params_tol
        assert abs(qp_oracle(X, y, c).objective - dual.objective) <= 1e-4


def test_determinism_bitwise():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(30, 4))
    y = (X[:, 0] + 0.3 * rng.normal(size=30) > 0).astype(int)
    a, da = train_smo(X, y, SmoParams(rng_seed=99))
    b, db = train_smo(X, y, SmoParams(rng_seed=99))
    assert a.weights.tobytes() == b.weights.tobytes() and a.bias == b.bias
    assert da.alphas.tobytes() == db.alphas.tobytes()


@pytest.mark.skipif(not HAVE_EXT, reason="compiled kernel not built")
def test_backends_bitwise_identical():
    rng = np.random.default_rng(9)
    for _ in range(50):
        X, y, c = random_instance(rng, n_max=20, d_max=8)
        p, dp = train_smo(X, y, SmoParams(c=c, rng_seed=3), backend="python")
        q, dq = train_smo(X, y, SmoParams(c=c, rng_seed=3), backend="cython")
        assert dp.alphas.tobytes() == dq.alphas.tobytes()
        assert p.weights.tobytes() == q.weights.tobytes() and p.bias == q.bias
        assert p.training_meta == q.training_meta


def test_backend_selection():
    assert smo_mod.BACKEND in ("cython", "python")
    with pytest.raises(ValueError):
        train_smo(TWO_X, TWO_Y, backend="fortran")


def test_model_serialization_round_trip():
    rng = np.random.default_rng(1)
    X, y, c = random_instance(rng)
    model, _ = train_smo(X, y, SmoParams(c=c), concept=Concept.NEED, vocab_fingerprint="abc")
    again = LinearModel.from_dict(model.to_dict())
    assert again == model
    assert again.weights.tobytes() == model.weights.tobytes()
    doc = model.to_dict()
    assert doc["version"] == 1 and doc["concept"] == "Need"
    doc["version"] = 2
    with pytest.raises(VersionMismatch):
        LinearModel.from_dict(doc)


@given(st.integers(0, 2**32 - 1))
def test_label_symmetry(seed):
    rng = np.random.default_rng(seed)
    X, y, c = random_instance(rng)
    params = SmoParams(c=c, rng_seed=seed)
    m1, d1 = train_smo(X, y, params)
    m2, d2 = train_smo(X, [1 - v for v in y], params)
    # the dual depends on labels only through y_i*y_j, so the solver path is mirrored exactly
    assert np.array_equal(m2.weights, -m1.weights)
    assert m2.bias == -m1.bias
    assert np.array_equal(d1.alphas, d2.alphas)
    for x in X:
        l1, g1 = predict(m1, x)
        l2, g2 = predict(m2, x)
        assert g2 == -g1
        if g1 != 0.0:
            assert l1 != l2

import numpy as np
import pytest

from ksfront.attention import (
    AdditiveParams,
    AttentionInput,
    LocationParams,
    MultiHeadParams,
    additive_attention,
    additive_scores,
    dot_attention,
    extractor_output_shape,
    location_aware_attention,
    multi_head_attention,
    scaled_dot_backward,
)
from ksfront.errors import (
    BadAlignmentError,
    IndivisibleHeadsError,
    InputTooSmallError,
    ShapeMismatchError,
)
from oracles import additive_score, sliding_output_len, softmax_list


def _inp(rng, n_q=3, n_k=4, d_k=5, d_v=2):
    return AttentionInput(rng.normal(size=(n_q, d_k)), rng.normal(size=(n_k, d_k)), rng.normal(size=(n_k, d_v)))


def test_zero_query_uniform():
    rng = np.random.default_rng(0)
    inp = AttentionInput(np.zeros((2, 3)), rng.normal(size=(4, 3)), rng.normal(size=(4, 2)))
    out = dot_attention(inp)
    np.testing.assert_allclose(out.weights, 0.25)
    np.testing.assert_allclose(out.context, np.tile(inp.V.mean(axis=0), (2, 1)))


def test_single_key():
    rng = np.random.default_rng(1)
    inp = _inp(rng, n_k=1)
    out = dot_attention(inp)
    assert np.all(out.weights == 1.0)
    np.testing.assert_allclose(out.context, np.tile(inp.V[0], (3, 1)))


def test_scaled_two_key_example():
    # d_k=4, raw logits [2, 0] -> scaled [1, 0]
    inp = AttentionInput(np.array([[1.0, 1, 0, 0]]), np.array([[1.0, 1, 0, 0], [0, 0, 0, 0]]), np.eye(2))
    w = dot_attention(inp, scaled=True).weights[0]
    np.testing.assert_allclose(w, softmax_list([1.0, 0.0]), atol=1e-12)
    assert w[0] == pytest.approx(0.7310585786, abs=1e-9)
    np.testing.assert_allclose(dot_attention(inp, scaled=False).weights[0], softmax_list([2.0, 0.0]))


def test_shape_errors():
    with pytest.raises(ShapeMismatchError):
        dot_attention(AttentionInput(np.zeros((1, 3)), np.zeros((2, 4)), np.zeros((2, 1))))
    with pytest.raises(ShapeMismatchError):
        AttentionInput(np.zeros((1, 3)), np.zeros((2, 3)), np.zeros((3, 1)))


def test_additive_matches_scalar_oracle():
    rng = np.random.default_rng(2)
    inp = AttentionInput(rng.normal(size=(2, 3)), rng.normal(size=(3, 4)), rng.normal(size=(3, 2)))
    p = AdditiveParams(rng.normal(size=(5, 7)), rng.normal(size=5))
    scores = additive_scores(inp.Q, inp.K, p.W1, p.w2)
    for i, q in enumerate(inp.Q):
        for j, k in enumerate(inp.K):
            assert scores[i, j] == pytest.approx(additive_score(q, k, p.W1.tolist(), p.w2.tolist()), abs=1e-9)
        np.testing.assert_allclose(additive_attention(inp, p).weights[i], softmax_list(scores[i].tolist()))


def test_additive_zero_readout_uniform():
    rng = np.random.default_rng(3)
    inp = _inp(rng)
    out = additive_attention(inp, AdditiveParams(rng.normal(size=(4, 10)), np.zeros(4)))
    np.testing.assert_allclose(out.weights, 0.25)


def test_location_zero_params_uniform():
    rng = np.random.default_rng(4)
    inp = _inp(rng)
    out = location_aware_attention(inp, np.zeros(4), LocationParams.zeros(5, 5))
    np.testing.assert_allclose(out.weights, 0.25)


def test_location_without_U_ignores_alignment():
    rng = np.random.default_rng(5)
    inp = _inp(rng, n_k=6)
    h = 4
    p = LocationParams(rng.normal(size=(2, 3)), np.zeros((h, 2)), rng.normal(size=(h, 5)), rng.normal(size=(h, 5)),
                       rng.normal(size=h), rng.normal(size=h))
    a = location_aware_attention(inp, np.eye(6)[1], p)
    b = location_aware_attention(inp, np.eye(6)[4], p)
    np.testing.assert_allclose(a.weights, b.weights)
    # additive form with the same parameters: W1 = [W_q | W_k], bias folded into keys
    expected = np.tanh((inp.Q @ p.W_q.T)[:, None, :] + (inp.K @ p.W_k.T + p.b)[None]) @ p.w
    np.testing.assert_allclose(a.weights, np.array([softmax_list(r) for r in expected.tolist()]))


@pytest.mark.parametrize("j", [0, 3, 7])
def test_location_tracks_previous_peak(j):
    rng = np.random.default_rng(6)
    n_k, h = 8, 1
    inp = AttentionInput(rng.normal(size=(1, 2)) * 0.01, rng.normal(size=(n_k, 2)) * 0.01, np.eye(n_k))
    p = LocationParams(np.array([[0.0, 1.0, 0.0]]), np.array([[50.0]]), np.zeros((h, 2)), np.zeros((h, 2)),
                       np.array([1.0]), np.zeros(h))
    w = location_aware_attention(inp, np.eye(n_k)[j], p).weights[0]
    assert abs(int(np.argmax(w)) - j) <= 1


def test_location_bad_alignment():
    inp = _inp(np.random.default_rng(7))
    p = LocationParams.zeros(5, 5)
    with pytest.raises(BadAlignmentError):
        location_aware_attention(inp, [0.5, 0.5, 0.5, 0.0], p)
    with pytest.raises(BadAlignmentError):
        location_aware_attention(inp, [1.5, -0.5, 0.0, 0.0], p)
    with pytest.raises(ShapeMismatchError):
        location_aware_attention(inp, [1.0, 0.0], p)


def test_multi_head_identity_equals_dot():
    rng = np.random.default_rng(8)
    inp = _inp(rng, d_k=6, d_v=6)
    mh = multi_head_attention(inp, MultiHeadParams.identity(6))
    ref = dot_attention(inp, scaled=True)
    assert np.array_equal(mh.context, ref.context)
    assert np.array_equal(mh.weights[..., 0], ref.weights)


def test_multi_head_four_heads():
    rng = np.random.default_rng(9)
    inp = _inp(rng, n_q=3, n_k=5, d_k=8, d_v=8)
    p = MultiHeadParams.random(8, 4, rng)
    out = multi_head_attention(inp, p)
    assert out.context.shape == (3, 8) and out.weights.shape == (3, 5, 4)
    np.testing.assert_allclose(out.weights.sum(axis=1), 1.0)
    # per-head oracle via scalar loops
    heads = []
    for i in range(4):
        q, k, v = inp.Q @ p.W_q[i], inp.K @ p.W_k[i], inp.V @ p.W_v[i]
        rows = []
        for qi in q:
            w = softmax_list([float(qi @ kj) / np.sqrt(2) for kj in k])
            rows.append(sum(wj * vj for wj, vj in zip(w, v)))
        heads.append(np.array(rows))
    np.testing.assert_allclose(out.context, np.concatenate(heads, axis=1) @ p.W_o, atol=1e-9)
    with pytest.raises(IndivisibleHeadsError):
        MultiHeadParams.random(10, 4)


def _fd_grads(inp, G, eps=1e-5):
    def f(Q, K, V):
        return float(np.sum(G * dot_attention(AttentionInput(Q, K, V)).context))

    out = []
    for idx, name in enumerate("QKV"):
        arrs = [inp.Q.copy(), inp.K.copy(), inp.V.copy()]
        grad = np.zeros_like(arrs[idx])
        for pos in np.ndindex(grad.shape):
            plus = [a.copy() for a in arrs]
            minus = [a.copy() for a in arrs]
            plus[idx][pos] += eps
            minus[idx][pos] -= eps
            grad[pos] = (f(*plus) - f(*minus)) / (2 * eps)
        out.append(grad)
    return out


def test_backward_matches_finite_differences():
    rng = np.random.default_rng(10)
    inp = _inp(rng, n_q=3, n_k=4, d_k=4, d_v=3)
    G = rng.normal(size=(3, 3))
    for got, ref in zip(scaled_dot_backward(inp, G), _fd_grads(inp, G)):
        rel = np.max(np.abs(got - ref)) / max(np.max(np.abs(ref)), 1e-12)
        assert rel < 1e-4


def test_backward_degenerate_cases():
    rng = np.random.default_rng(11)
    inp = _inp(rng)
    assert all(not g.any() for g in scaled_dot_backward(inp, np.zeros((3, 2))))
    single = _inp(rng, n_k=1)
    G = rng.normal(size=(3, 2))
    dQ, dK, dV = scaled_dot_backward(single, G)
    assert not dQ.any() and not dK.any()
    np.testing.assert_allclose(dV, G.sum(axis=0, keepdims=True))


def test_vgg_shapes():
    assert extractor_output_shape("vgg", (99, 80)) == (24, 19, 128)
    with pytest.raises(InputTooSmallError):
        extractor_output_shape("vgg", (2, 80))


def test_ds2_shapes_match_enumeration():
    t = sliding_output_len(sliding_output_len(99, 11, 2), 11, 1)
    f = sliding_output_len(sliding_output_len(161, 41, 2), 21, 2)
    assert (t, f) == (35, 21)
    assert extractor_output_shape("ds2", (99, 161)) == (35, 21, 32)


def test_vgg_matches_enumeration():
    t, f = 99, 80
    for _ in range(2):
        t = sliding_output_len(sliding_output_len(sliding_output_len(t, 3, 1, 1), 3, 1, 1), 3, 2)
        f = sliding_output_len(sliding_output_len(sliding_output_len(f, 3, 1, 1), 3, 1, 1), 3, 2)
    assert (t, f) == (24, 19)

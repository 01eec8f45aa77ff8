import numpy as np
import pytest

from gak.errors import InfeasibleLength, InvalidEpsilon
from gak.toy import (
    ToyBatch,
    ToyConfig,
    finite_diff_check,
    forward,
    gen_synthetic,
    init_params,
    loss_and_gradients,
    prototypes,
    segment_layout,
    train,
)
from gak.toy.data import LEAD_SILENCE, TRAIL_SILENCE
from gak.toy.model import _backward, center_frame
from gak.tse import WordAlignment, compute_tse


def small_cfg(**kw):
    defaults = dict(n_frames=18, n_labels=4, vocab=8, d_in=5, d_model=8, steps=10)
    defaults.update(kw)
    return ToyConfig(**defaults)


# --- generator ---


def test_generator_is_deterministic():
    cfg = small_cfg()
    a = gen_synthetic(cfg, 7)
    b = gen_synthetic(cfg, 7)
    assert a.features.tobytes() == b.features.tobytes()
    assert a.label_ids == b.label_ids and a.segments == b.segments


def test_zero_noise_frames_equal_prototypes():
    cfg = small_cfg(noise_scale=0.0)
    batch = gen_synthetic(cfg, 3)
    protos = prototypes(cfg)
    start, end = batch.segments[0]
    for t in range(start - 1, end):
        np.testing.assert_array_equal(batch.features[t], protos[batch.label_ids[0]])


def test_nearest_prototype_recovers_segments():
    cfg = small_cfg(noise_scale=0.0)
    batch = gen_synthetic(cfg, 5)
    protos = prototypes(cfg)
    dists = np.linalg.norm(batch.features[:, None, :] - protos[None, :, :], axis=2)
    classified = dists.argmin(axis=1)
    expected = np.full(cfg.n_frames, cfg.vocab)
    for (s, e), vid in zip(batch.segments, batch.label_ids[:-1]):
        expected[s - 1 : e] = vid
    np.testing.assert_array_equal(classified, expected)


def test_silence_layout():
    cfg = small_cfg()
    spans = segment_layout(cfg)
    assert spans[0][0] == LEAD_SILENCE + 1
    assert spans[-1][1] == cfg.n_frames - TRAIL_SILENCE
    assert LEAD_SILENCE >= 2 and LEAD_SILENCE > TRAIL_SILENCE >= 1


def test_too_few_frames_rejected():
    cfg = small_cfg(n_frames=11)  # needs 2*4+4 = 12
    with pytest.raises(InfeasibleLength):
        gen_synthetic(cfg, 0)


def test_no_adjacent_repeated_labels():
    cfg = small_cfg()
    for seed in range(30):
        ids = gen_synthetic(cfg, seed).label_ids[:-1]
        assert all(a != b for a, b in zip(ids, ids[1:]))


# --- forward contracts ---


def test_hard_center_rows_are_one_hot():
    cfg = small_cfg(cross_attention_mode="hard_center")
    batch = gen_synthetic(cfg, 0)
    _, cross, _, _ = forward(init_params(cfg), batch, cfg)
    expected = np.zeros_like(cross)
    expected[:, center_frame(cfg.n_frames)] = 1.0
    np.testing.assert_array_equal(cross, expected)


def test_identity_mode_self_attention_is_identity():
    cfg = small_cfg(encoder_mode="identity_self_attention")
    batch = gen_synthetic(cfg, 0)
    _, _, self_att, _ = forward(init_params(cfg), batch, cfg)
    np.testing.assert_array_equal(self_att, np.eye(cfg.n_frames))


def test_reversed_mode_flips_encoder_output_exactly():
    base = small_cfg(encoder_mode="standard")
    flipped = small_cfg(encoder_mode="reversed")
    batch = gen_synthetic(base, 0)
    params = init_params(base)
    _, _, _, cache_std = forward(params, batch, base)
    _, _, _, cache_rev = forward(params, batch, flipped)
    np.testing.assert_array_equal(cache_rev.h, cache_std.h[::-1])


def test_rows_normalize():
    cfg = small_cfg()
    batch = gen_synthetic(cfg, 1)
    log_probs, cross, _, _ = forward(init_params(cfg), batch, cfg)
    np.testing.assert_allclose(np.exp(log_probs).sum(axis=1), 1.0, atol=1e-9)
    np.testing.assert_allclose(cross.sum(axis=1), 1.0, atol=1e-9)


# --- gradients ---


def test_unused_parameters_get_exactly_zero_gradient():
    cfg = small_cfg(encoder_mode="identity_self_attention", cross_attention_mode="hard_center")
    batch = gen_synthetic(cfg, 2)
    _, grads, _ = loss_and_gradients(init_params(cfg), batch, cfg, input_grads=False)
    for name in ("w_q", "w_k", "w_att_h", "w_att_q", "b_att", "v_att"):
        assert np.all(grads[name] == 0.0), name


def test_backward_is_linear_in_upstream():
    cfg = small_cfg()
    batch = gen_synthetic(cfg, 2)
    params = init_params(cfg)
    _, _, _, cache = forward(params, batch, cfg)
    rng = np.random.default_rng(0)
    d_logits = rng.normal(size=cache.logits.shape)
    g1, dx1 = _backward(params, cache, d_logits, cfg)
    g2, dx2 = _backward(params, cache, 2.0 * d_logits, cfg)
    np.testing.assert_array_equal(dx2, 2.0 * dx1)
    for name in g1:
        np.testing.assert_array_equal(g2[name], 2.0 * g1[name])


@pytest.mark.parametrize("enc", ["standard", "reversed", "identity_self_attention"])
@pytest.mark.parametrize("cross", ["learned_mlp", "hard_center"])
def test_finite_differences_all_modes(enc, cross):
    cfg = small_cfg(encoder_mode=enc, cross_attention_mode=cross)
    batch = gen_synthetic(cfg, 4)
    report = finite_diff_check(init_params(cfg), batch, cfg, eps=1e-5, tol=1e-4)
    assert report.passed, report.to_dict()


def test_finite_differences_linear_only_toy():
    # attention fully disabled, tiny dims, small activations: every tanh
    # sits in its linear regime, the loss surface is near-quadratic, and
    # central differences at a wider step become extremely accurate
    cfg = ToyConfig(
        n_frames=3, n_labels=2, vocab=4, d_in=2, d_model=2,
        encoder_mode="identity_self_attention", cross_attention_mode="hard_center",
        init_scale=0.3,
    )
    rng = np.random.default_rng(0)
    batch = ToyBatch(
        features=0.1 * rng.normal(size=(3, 2)),
        label_ids=[2, 1],
        tokens=["w02"],
        segments=[(2, 2)],
    )
    report = finite_diff_check(init_params(cfg), batch, cfg, eps=1e-4, tol=1e-8)
    assert report.max_rel_error < 1e-8, report.to_dict()


def test_zero_eps_rejected():
    cfg = small_cfg()
    batch = gen_synthetic(cfg, 0)
    with pytest.raises(InvalidEpsilon):
        finite_diff_check(init_params(cfg), batch, cfg, eps=0.0)


# --- training and export ---


def test_training_is_bit_deterministic():
    cfg = small_cfg(steps=25)
    r1 = train(cfg)
    r2 = train(cfg)
    assert r1.losses == r2.losses
    for name in r1.params:
        assert r1.params[name].tobytes() == r2.params[name].tobytes()


def test_export_round_trip(tmp_path):
    from gak.arrayio import load_array
    from gak.toy import export_artifacts

    cfg = small_cfg(steps=5)
    result = train(cfg)
    manifest = export_artifacts(result.params, result.eval_batch, cfg, tmp_path)
    grads = load_array(tmp_path / manifest["files"]["gradients"])
    assert grads.shape == (cfg.n_labels, cfg.n_frames, cfg.d_in)
    cross = load_array(tmp_path / manifest["files"]["cross_attention"])
    assert cross.shape == (cfg.n_labels, cfg.n_frames)
    tokens = (tmp_path / manifest["files"]["labels"]).read_text().split()
    assert tokens == result.eval_batch.tokens

    from gak.tse import parse_alignment

    ref = parse_alignment(tmp_path / manifest["files"]["reference"])
    report = compute_tse(ref, ref)
    assert report.boundary_tse_ms == 0.0 and report.center_tse_ms == 0.0

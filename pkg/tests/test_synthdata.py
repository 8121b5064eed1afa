import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from samwave import wavelets
from samwave.synthdata import (
    TASKS, CounterRNG, IntegrityError, gen_blobs, gen_camouflage, gen_defocus, gen_shadow, generate,
    load_dataset, save_dataset, threshold_oracle_iou,
)
from samwave.synthdata.generators import SHADOW_FACTOR, _detail_texture, blob_alpha

# regression pins for the documented Philox stream
PHILOX_KEY0 = [213000021201967259, 4455796210202625458, 2055444239878205049]


def test_counter_rng_pinned_stream():
    assert [int(v) for v in CounterRNG(0).raw(3)] == PHILOX_KEY0
    u = (PHILOX_KEY0[0] >> 11) + 0.5
    assert CounterRNG(0).uniform() == u / 2 ** 53


def test_counter_rng_distributions():
    r = CounterRNG(7)
    u = r.uniform(size=20000)
    assert 0 < u.min() and u.max() < 1 and abs(u.mean() - 0.5) < 0.01
    z = CounterRNG(8).normal(size=20001)
    assert z.shape == (20001,) and abs(z.mean()) < 0.03 and abs(z.std() - 1) < 0.03
    k = CounterRNG(9).integers(3, 7, size=1000)
    assert set(np.unique(k)) == {3, 4, 5, 6}
    assert sorted(CounterRNG(10).permutation(9)) == list(range(9))
    with pytest.raises(ValueError):
        CounterRNG(-1)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 63))
def test_counter_rng_replays(seed):
    a, b = CounterRNG(seed), CounterRNG(seed)
    assert np.array_equal(a.raw(5), b.raw(5))
    assert np.array_equal(a.normal(size=4), b.normal(size=4))


@pytest.mark.parametrize("task", TASKS)
def test_determinism_and_contract(task):
    a = generate(task, 11, 6, 32)
    b = generate(task, 11, 6, 32)
    assert a.images.tobytes() == b.images.tobytes() and a.gts.tobytes() == b.gts.tobytes()
    assert a.images.shape == (6, 32, 32, 3) and a.gts.shape == (6, 32, 32)
    assert a.images.min() >= 0 and a.images.max() <= 1
    assert set(np.unique(a.gts)) <= {0, 1}
    frac = a.gts.mean(axis=(1, 2))
    assert np.all((frac >= 0.10) & (frac <= 0.50))
    # sample i depends only on seed + i
    c = generate(task, 13, 2, 32)
    assert np.array_equal(c.images, a.images[2:4])


def test_generate_errors():
    with pytest.raises(ValueError):
        generate("polyp", 0, 2)
    with pytest.raises(ValueError):
        generate("blobs", 0, 0)


def test_camouflage_statistics_matched():
    ds = gen_camouflage(0, 25)
    for img, gt in ds:
        g = gt.astype(bool)
        fg, bg = img[g], img[~g]
        assert np.all(np.abs(fg.mean(0) - bg.mean(0)) <= 0.02)
        ratio = fg.var(0) / bg.var(0)
        assert np.all((ratio >= 0.8) & (ratio <= 1.25))


def _block_masks(gt):
    blocks = gt.reshape(gt.shape[0] // 2, 2, gt.shape[1] // 2, 2)
    return blocks.min(axis=(1, 3)).astype(bool), ~blocks.max(axis=(1, 3)).astype(bool)


def test_defocus_region_has_less_detail():
    for img, gt in gen_defocus(0, 20):
        s = wavelets.dwt2(img, "haar")
        e = (s.lh ** 2 + s.hl ** 2 + s.hh ** 2).sum(-1)
        inside, outside = _block_masks(gt)
        assert e[inside].mean() < e[outside].mean()


def test_shadow_factor():
    ds = gen_shadow(40, 10)
    for i, (img, gt) in enumerate(ds):
        rng = CounterRNG(40 + i)
        g = blob_alpha(rng, 64) >= 0.5
        lit = _detail_texture(rng, 64)
        assert np.array_equal(g, gt.astype(bool))
        assert abs(img[g].mean() - SHADOW_FACTOR * lit[g].mean()) <= 0.02


def test_task_difficulty_ordering():
    blobs = gen_blobs(0, 20)
    camo = gen_camouflage(0, 20)
    assert min(threshold_oracle_iou(x, g) for x, g in blobs) >= 0.95
    assert max(threshold_oracle_iou(x, g) for x, g in camo) <= 0.6


def test_dataset_roundtrip(tmp_path):
    ds = gen_camouflage(3, 5, 32)
    save_dataset(ds, tmp_path / "d")
    manifest = json.loads((tmp_path / "d" / "manifest.json").read_text())
    assert manifest["n"] == 5 and len(manifest["files"]) == 5
    assert {"task", "seed", "n", "size"} <= set(manifest)
    back = load_dataset(tmp_path / "d")
    assert np.max(np.abs(back.images - ds.images)) <= 1 / 255
    assert np.array_equal(back.images, ds.images)  # generator output is already on the 8-bit grid
    assert np.array_equal(back.gts, ds.gts)
    assert (back.task, back.seed, back.size) == ("camouflage", 3, 32)


def test_tampered_file_is_rejected(tmp_path):
    save_dataset(gen_blobs(0, 2, 16), tmp_path)
    target = tmp_path / "img_0001.png"
    target.write_bytes(target.read_bytes() + b"\0")
    with pytest.raises(IntegrityError):
        load_dataset(tmp_path)


def test_missing_manifest(tmp_path):
    with pytest.raises(IntegrityError):
        load_dataset(tmp_path)

import numpy as np
import pytest

from biwave.adaptive import AdaptivePolicy, format_progress, progress_rows, run_adaptive, sampling_rate
from biwave.optics import AcquisitionLog, DetectorModel, acquire_full
from biwave.patterns import PatternFamily, make_basis
from biwave.phantoms import Phantom, PhantomKind, generate_phantom
from biwave.recon import iwt_reconstruct

from conftest import sparse_scene

IDEAL = DetectorModel()


def fake_log(measured, n):
    return AcquisitionLog(
        family=PatternFamily.ROW_MAJOR_M, n=n, detector=IDEAL, full_scale=(1.0,),
        j=np.arange(measured), i1=np.zeros(measured), i2=np.zeros(measured), b=np.zeros(measured),
        skipped=np.arange(measured, n * n),
    )


def centered_square(n, duty):
    side = int(round(np.sqrt(duty) * n))
    scene = np.zeros((n, n))
    lo = (n - side) // 2
    scene[lo : lo + side, lo : lo + side] = 1.0
    return scene


def test_sampling_rate_examples():
    assert sampling_rate(fake_log(262144, 512)) == 1.0
    assert sampling_rate(fake_log(12614, 512)) == pytest.approx(0.0481, abs=5e-5)
    assert sampling_rate(fake_log(1, 2)) == 0.25


@pytest.mark.parametrize("family", ["m", "q"])
def test_all_zero_scene(family):
    basis = make_basis(family, 32)
    img, log = run_adaptive(np.zeros((32, 32)), basis, IDEAL)
    assert log.measured_count == 1 + len(basis.clusters[1])
    assert np.all(img.values == 0)
    assert set(log.skipped) == set(range(basis.clusters[2].start, len(basis)))


@pytest.mark.parametrize("family", ["m", "q"])
def test_all_ones_scene_measures_everything(family):
    basis = make_basis(family, 16)
    img, log = run_adaptive(np.ones((16, 16)), basis, IDEAL)
    assert log.measured_count == len(basis) and log.skipped.size == 0
    np.testing.assert_allclose(img.values, 1.0, atol=1e-12)


@pytest.mark.parametrize("family", ["m", "q"])
def test_lossless_on_sparse_scenes(family, rng):
    basis = make_basis(family, 32)
    for _ in range(10):
        scene = sparse_scene(rng, 32)
        img, log = run_adaptive(scene, basis, IDEAL)
        full = iwt_reconstruct(acquire_full(scene, basis, IDEAL), basis).values
        assert np.abs(img.values - full).max() <= 1e-9
        assert sampling_rate(log) < 1.0


@pytest.mark.parametrize("family", ["m", "q"])
def test_skipped_set_is_valid(family, rng):
    basis = make_basis(family, 32)
    scene = sparse_scene(rng, 32)
    _, log = run_adaptive(scene, basis, IDEAL)
    assert np.intersect1d(log.j, log.skipped).size == 0
    assert np.union1d(log.j, log.skipped).size == len(basis)
    assert not np.isin(log.skipped, np.r_[basis.clusters[0], basis.clusters[1]]).any()
    for j in log.skipped:
        assert scene[basis[j].entries != 0].max() == 0  # lossless pruning only drops empty support


@pytest.mark.parametrize("family", ["m", "q"])
def test_cluster_synchronous_order(family, rng):
    basis = make_basis(family, 16)
    _, log = run_adaptive(sparse_scene(rng, 16), basis, IDEAL)
    assert np.all(np.diff(basis.cluster_ids()[log.j]) >= 0)


@pytest.mark.parametrize("family", ["m", "q"])
def test_rate_grows_with_duty(family):
    basis = make_basis(family, 128)
    rates = [sampling_rate(run_adaptive(centered_square(128, d), basis, IDEAL)[1]) for d in (0.01, 0.05, 0.25)]
    assert rates[0] < rates[1] < rates[2]


def test_quadtree_not_worse_than_row_major_on_glyphs():
    for seed in range(5):
        scene = generate_phantom(Phantom(PhantomKind.GLYPH, 0.015, 256, seed, text="HELV"))
        rates = {f: sampling_rate(run_adaptive(scene, make_basis(f, 256), IDEAL)[1]) for f in ("m", "q")}
        assert rates["q"] <= rates["m"]


@pytest.mark.parametrize("family", ["m", "q"])
def test_thresholds_reduce_rate(family, rng):
    basis = make_basis(family, 32)
    scene = np.clip(sparse_scene(rng, 32, fill=0.3) + 0.02 * rng.random((32, 32)), 0, 1)
    rates = []
    for t in (0.0, 0.05, 0.2, 1.0):
        _, log = run_adaptive(scene, basis, IDEAL, AdaptivePolicy(coeff_threshold=t, region_threshold=t))
        rates.append(sampling_rate(log))
    assert all(a >= b for a, b in zip(rates, rates[1:]))
    assert rates[-1] < rates[0]


def test_relative_policy_resolves_against_dc():
    pol = AdaptivePolicy.from_dc(0.1, 0.5)
    assert pol.resolve(200.0, 100) == (20.0, 1.0)
    assert AdaptivePolicy(3, 4).resolve(200.0, 100) == (3, 4)
    with pytest.raises(ValueError):
        AdaptivePolicy(-1, 0)


def test_levels_restriction_disables_pruning():
    basis = make_basis("m", 16)
    _, log = run_adaptive(np.zeros((16, 16)), basis, IDEAL, AdaptivePolicy(levels=range(0)))
    assert log.measured_count == len(basis)


def test_rejects_baseline_families():
    with pytest.raises(ValueError):
        run_adaptive(np.zeros((4, 4)), make_basis("hadamard", 4), IDEAL)


def test_progress_rows_and_table(rng):
    basis = make_basis("q", 16)
    _, log = run_adaptive(sparse_scene(rng, 16), basis, IDEAL)
    rows = progress_rows(log, basis)
    assert len(rows) == len(basis.clusters)
    assert sum(r[1] for r in rows) == log.measured_count
    assert rows[-1][3] == pytest.approx(sampling_rate(log))
    text = format_progress(rows)
    assert text.splitlines()[0].split() == ["level", "measured", "skipped", "rate"]
    assert len(text.splitlines()) == len(rows) + 1

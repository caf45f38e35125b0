import math

import pytest

import selfupdate as su


def test_eer_fixed_example():
    assert su.compute_eer([0.1, 0.2, 0.3, 0.8], [0.5, 0.6, 0.7, 0.9]) == pytest.approx(0.25)
    roc = su.compute_roc([0.1], [0.9])
    assert roc[-1][0] == math.inf
    assert roc[-1][1:] == (1.0, 0.0)


def test_storage():
    assert su.storage_capped(6, 59, 128) == 45312
    assert su.storage_uncapped(1.0, 0, 6.0, 59, 128) == 0.0


def test_subset_selection_line():
    pts = [[0.0], [0.1], [0.2], [10.0]]
    assert su.select_mdist(pts, 3) == [0, 1, 2]
    assert su.select_dend(pts, 3) == [0, 1, 3]
    assert su.oracle_subset_select(pts, 3, maximize=True) == [0, 1, 3]


def test_kmeans_two_blobs():
    c = su.kmeans([[0, 0], [0.1, 0], [10, 10], [9.9, 10]], 2, labels=[1, 1, 2, 2])
    assert c["assignment"] == [0, 0, 1, 1]
    assert c["centroids"][0] == pytest.approx([0.05, 0.0])
    assert c["converged"]


def test_gallery_threshold_and_classify():
    g = su.Gallery.enroll([[0.0], [1.0], [1.4]], users=[1, 2, 3], cap=2)
    assert g.template_count == 3
    t = g.estimate_threshold("zero_far")
    assert t == pytest.approx(0.4)
    decisions = g.classify([[0.1], [0.7], [2.5]], t, ids=[10, 11, 12])
    assert [d[1] for d in decisions] == [1, 2, None]

    g2, report = g.update([[0.1]], true_users=[1], ids=[10], batch_index=1, p=2, t_star=0.5)
    assert report["n_accepted"] == 1
    assert g2.template_ids(1) == [0, 10]
    assert g.template_count == 3


def test_errors_carry_codes():
    with pytest.raises(su.SelfUpdateError) as info:
        su.Gallery.enroll([[0.0], [0.0, 1.0]], users=[1, 2])
    assert info.value.code == "dimension_mismatch"


def test_generate_and_run_experiment(tmp_path):
    ds = su.generate({"k_users": 3, "dim": 2, "samples_per_user": 5, "seed": 1})
    assert len(ds["features"]) == 15
    assert sorted(set(ds["users"])) == [1, 2, 3]

    rows = su.run_experiment(
        synth={"k_users": 5, "dim": 4, "samples_per_user": 20},
        methods=["mdist", "keep_all"],
        p=2,
        runs=2,
        policy="zero_far",
        record_timings=False,
        output_dir=tmp_path,
    )
    assert {r["method"] for r in rows} == {"none", "mdist", "keep_all"}
    assert all(0.0 <= r["eer"] <= 1.0 for r in rows)
    assert (tmp_path / "metrics.csv").exists()

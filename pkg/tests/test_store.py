import numpy as np
import pytest

from conftest import random_matrix
from firmvec.embed import CompanyRecord
from firmvec.errors import InputError, SnapshotFormatError
from firmvec.pca import fit_pca, transform_matrix
from firmvec.segment import fit_kmeans
from firmvec.store import (
    MAGIC,
    EngineSnapshot,
    join_metadata,
    load_snapshot,
    normalize_url,
    save_snapshot,
    snapshot_digest,
)


def build_snapshot(seed=0, k=15, dim=6, with_pca=True, with_seg=True) -> EngineSnapshot:
    rng = np.random.default_rng(seed)
    masked = min(2, max(0, k - 3))
    matrix = random_matrix(rng, k, dim, masked=masked)
    pca = None
    if with_pca:
        pca = fit_pca(matrix, variance_threshold=0.99, max_components=dim)
        matrix = transform_matrix(pca, matrix)
    usable = int((~matrix.empty_mask).sum())
    seg = fit_kmeans(matrix, k=min(3, usable), seed=seed) if with_seg else None
    return EngineSnapshot(
        matrix=matrix,
        strategy="append_tokens",
        pca=pca,
        segmentation=seg,
        provenance={"dataset": "synthetic", "seed": seed},
    )


def assert_snapshots_equal(a: EngineSnapshot, b: EngineSnapshot) -> None:
    assert a.matrix.company_ids == b.matrix.company_ids
    assert a.matrix.names == b.matrix.names
    assert a.strategy == b.strategy
    assert a.provenance == b.provenance
    np.testing.assert_array_equal(a.matrix.empty_mask, b.matrix.empty_mask)
    np.testing.assert_array_equal(
        np.asarray(a.matrix.rows, dtype=np.float32), np.asarray(b.matrix.rows, dtype=np.float32)
    )
    assert (a.pca is None) == (b.pca is None)
    if a.pca is not None:
        np.testing.assert_array_equal(
            a.pca.mean.astype(np.float32), b.pca.mean.astype(np.float32)
        )
        np.testing.assert_array_equal(
            a.pca.components.astype(np.float32), b.pca.components.astype(np.float32)
        )
        np.testing.assert_array_equal(
            a.pca.explained_ratio.astype(np.float32),
            b.pca.explained_ratio.astype(np.float32),
        )
    assert (a.segmentation is None) == (b.segmentation is None)
    if a.segmentation is not None:
        assert a.segmentation.k == b.segmentation.k
        assert a.segmentation.seed == b.segmentation.seed
        assert a.segmentation.iterations_run == b.segmentation.iterations_run
        np.testing.assert_array_equal(
            a.segmentation.centroids.astype(np.float32),
            b.segmentation.centroids.astype(np.float32),
        )
        np.testing.assert_array_equal(a.segmentation.assignments, b.segmentation.assignments)


def test_round_trip_full_snapshot(tmp_path):
    snapshot = build_snapshot()
    path = tmp_path / "s.c2v"
    save_snapshot(snapshot, path)
    assert_snapshots_equal(load_snapshot(path), snapshot)


def test_round_trip_without_optional_models(tmp_path):
    snapshot = build_snapshot(with_pca=False, with_seg=False)
    path = tmp_path / "s.c2v"
    save_snapshot(snapshot, path)
    loaded = load_snapshot(path)
    assert loaded.pca is None and loaded.segmentation is None
    assert_snapshots_equal(loaded, snapshot)


def test_round_trip_many_random_snapshots(tmp_path):
    for seed in range(15):
        snapshot = build_snapshot(
            seed=seed,
            k=int(5 + seed),
            dim=int(3 + seed % 4),
            with_pca=seed % 2 == 0,
            with_seg=seed % 3 == 0,
        )
        path = tmp_path / f"s{seed}.c2v"
        save_snapshot(snapshot, path)
        assert_snapshots_equal(load_snapshot(path), snapshot)


def test_truncation_always_rejected_cleanly(tmp_path):
    snapshot = build_snapshot()
    path = tmp_path / "s.c2v"
    save_snapshot(snapshot, path)
    blob = path.read_bytes()
    step = max(1, len(blob) // 60)
    for cut in range(0, len(blob) - 1, step):
        (tmp_path / "cut.c2v").write_bytes(blob[:cut])
        with pytest.raises(SnapshotFormatError):
            load_snapshot(tmp_path / "cut.c2v")


def test_bad_magic_rejected(tmp_path):
    snapshot = build_snapshot()
    path = tmp_path / "s.c2v"
    save_snapshot(snapshot, path)
    blob = bytearray(path.read_bytes())
    blob[:4] = b"NOPE"
    path.write_bytes(bytes(blob))
    with pytest.raises(SnapshotFormatError, match="magic"):
        load_snapshot(path)


def test_future_version_rejected(tmp_path):
    snapshot = build_snapshot()
    path = tmp_path / "s.c2v"
    save_snapshot(snapshot, path)
    blob = bytearray(path.read_bytes())
    blob[4:8] = (99).to_bytes(4, "little")
    path.write_bytes(bytes(blob))
    with pytest.raises(SnapshotFormatError, match="version"):
        load_snapshot(path)


def test_corrupted_payload_rejected(tmp_path):
    snapshot = build_snapshot()
    path = tmp_path / "s.c2v"
    save_snapshot(snapshot, path)
    blob = bytearray(path.read_bytes())
    # scramble the META JSON region
    meta_at = blob.find(b'{"format_version"')
    blob[meta_at : meta_at + 8] = b"xxxxxxxx"
    path.write_bytes(bytes(blob))
    with pytest.raises(SnapshotFormatError):
        load_snapshot(path)


def test_inconsistent_snapshot_refused_before_write(tmp_path):
    snapshot = build_snapshot(with_pca=True, with_seg=False)
    rng = np.random.default_rng(1)
    snapshot.pca = fit_pca(rng.normal(size=(10, 9)), variance_threshold=0.5, max_components=2)
    snapshot.pca.components = np.linalg.qr(rng.normal(size=(9, 9)))[0][:7]
    snapshot.pca.explained_ratio = np.linspace(0.5, 0.1, 7)
    snapshot.pca.output_dim = 7  # now mismatches the reduced matrix dim
    with pytest.raises(InputError):
        save_snapshot(snapshot, tmp_path / "bad.c2v")
    assert not (tmp_path / "bad.c2v").exists()


def test_digest_stable_and_content_sensitive(tmp_path):
    snapshot = build_snapshot()
    path_a = tmp_path / "a.c2v"
    path_b = tmp_path / "b.c2v"
    save_snapshot(snapshot, path_a)
    save_snapshot(snapshot, path_b)
    assert snapshot_digest(path_a) == snapshot_digest(path_b)
    other = build_snapshot(seed=9)
    save_snapshot(other, path_b)
    assert snapshot_digest(path_a) != snapshot_digest(path_b)


# --- URL join -----------------------------------------------------------------


def test_normalize_url_rules():
    assert normalize_url("https://X.de/") == "x.de"
    assert normalize_url("http://www.Foo.DE/Path/") == "www.foo.de/Path"
    assert normalize_url("x.de") == "x.de"


def test_join_matches_after_normalization():
    records = [CompanyRecord(id="r1", name="X", url="https://X.de/")]
    scraped = {"x.de": (["Haus"], ["Plakat"], ["Logo"])}
    joined = join_metadata(records, scraped)
    assert joined[0].text_tokens == ["Haus"]
    assert joined[0].image_tokens == ["Plakat"]
    assert joined[0].alt_tokens == ["Logo"]


def test_join_unmatched_keeps_empty_channels():
    records = [CompanyRecord(id="r1", name="X", url="https://ghost.de")]
    joined = join_metadata(records, {"x.de": (["a"], [], [])})
    assert joined[0].text_tokens == []
    assert joined[0].alt_tokens == []


def test_join_duplicate_scrape_first_wins(caplog):
    records = [CompanyRecord(id="r1", name="X", url="x.de")]
    scraped = {"http://x.de": (["first"], [], []), "https://x.de/": (["second"], [], [])}
    with caplog.at_level("WARNING"):
        joined = join_metadata(records, scraped)
    assert joined[0].text_tokens == ["first"]
    assert any("duplicate" in r.message for r in caplog.records)

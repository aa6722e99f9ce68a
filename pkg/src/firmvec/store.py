"""Snapshot persistence and the URL foreign-key join.

Snapshot container layout (all integers little-endian):

    bytes 0-3   magic "C2V1"
    bytes 4-7   u32 format version
    bytes 8-11  u32 section count
    then        section table entries: 4-byte tag, u64 offset, u64 length
    then        section payloads

Sections: META (UTF-8 JSON scalars/lists), EMBD (float32 rows), MASK (u8),
and when present PMEA/PCMP/PRAT for the PCA model and SCEN/SASG for the
segmentation. Float payloads are float32 on disk; loading promotes back to
the in-memory float64 working types. Every load fully re-validates the
snapshot before returning it, so a truncated or corrupted file can never
produce partial state.
"""

from __future__ import annotations

import hashlib
import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import urlparse

import numpy as np

from .embed import CompanyRecord, EmbeddingMatrix
from .errors import InputError, SnapshotFormatError
from .pca import PcaModel
from .segment import SegmentationModel

log = logging.getLogger(__name__)

MAGIC = b"C2V1"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sII")
_SECTION = struct.Struct("<4sQQ")


@dataclass
class EngineSnapshot:
    """Everything the query service needs, in one self-contained file."""

    matrix: EmbeddingMatrix
    strategy: str
    pca: PcaModel | None = None
    segmentation: SegmentationModel | None = None
    provenance: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def validate(self) -> None:
        if self.pca is not None and self.pca.output_dim != self.matrix.dim:
            raise InputError(
                f"PCA output dim {self.pca.output_dim} != matrix dim {self.matrix.dim}"
            )
        if self.segmentation is not None:
            if self.segmentation.dim != self.matrix.dim:
                raise InputError(
                    f"segmentation dim {self.segmentation.dim} != matrix dim {self.matrix.dim}"
                )
            if len(self.segmentation.assignments) != self.matrix.size:
                raise InputError("segmentation assignments do not cover the matrix")


def _f32_bytes(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f4").tobytes()


def save_snapshot(snapshot: EngineSnapshot, path: str | Path) -> None:
    """Serialize after dimension checks; refuses inconsistent snapshots."""
    snapshot.validate()
    matrix = snapshot.matrix

    meta = {
        "format_version": snapshot.format_version,
        "strategy": snapshot.strategy,
        "count": matrix.size,
        "dim": matrix.dim,
        "company_ids": matrix.company_ids,
        "names": matrix.names,
        "provenance": snapshot.provenance,
    }
    sections: list[tuple[bytes, bytes]] = []
    if snapshot.pca is not None:
        meta["pca"] = {
            "input_dim": snapshot.pca.input_dim,
            "output_dim": snapshot.pca.output_dim,
            "standardized": snapshot.pca.scale is not None,
        }
    if snapshot.segmentation is not None:
        meta["segmentation"] = {
            "k": snapshot.segmentation.k,
            "seed": snapshot.segmentation.seed,
            "iterations_run": snapshot.segmentation.iterations_run,
        }

    sections.append((b"META", json.dumps(meta, ensure_ascii=False).encode("utf-8")))
    sections.append((b"EMBD", _f32_bytes(snapshot.matrix.rows)))
    sections.append((b"MASK", np.asarray(matrix.empty_mask, dtype=np.uint8).tobytes()))
    if snapshot.pca is not None:
        sections.append((b"PMEA", _f32_bytes(snapshot.pca.mean)))
        sections.append((b"PCMP", _f32_bytes(snapshot.pca.components)))
        sections.append((b"PRAT", _f32_bytes(snapshot.pca.explained_ratio)))
        if snapshot.pca.scale is not None:
            sections.append((b"PSCL", _f32_bytes(snapshot.pca.scale)))
    if snapshot.segmentation is not None:
        sections.append((b"SCEN", _f32_bytes(snapshot.segmentation.centroids)))
        sections.append(
            (b"SASG", np.asarray(snapshot.segmentation.assignments, dtype="<i4").tobytes())
        )

    header = _HEADER.pack(MAGIC, snapshot.format_version, len(sections))
    table_size = len(sections) * _SECTION.size
    offset = len(header) + table_size
    table = b""
    for tag, payload in sections:
        table += _SECTION.pack(tag, offset, len(payload))
        offset += len(payload)

    with open(path, "wb") as handle:
        handle.write(header)
        handle.write(table)
        for _, payload in sections:
            handle.write(payload)


def _read_sections(data: bytes, path: Path) -> dict[bytes, bytes]:
    if len(data) < _HEADER.size:
        raise SnapshotFormatError(f"{path}: file too short for a snapshot header")
    magic, version, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {magic!r}")
    if version > FORMAT_VERSION:
        raise SnapshotFormatError(
            f"{path}: format version {version} is newer than supported {FORMAT_VERSION}"
        )
    table_end = _HEADER.size + count * _SECTION.size
    if len(data) < table_end:
        raise SnapshotFormatError(f"{path}: truncated section table")
    sections: dict[bytes, bytes] = {}
    for i in range(count):
        tag, offset, length = _SECTION.unpack_from(data, _HEADER.size + i * _SECTION.size)
        if offset + length > len(data):
            raise SnapshotFormatError(f"{path}: section {tag!r} runs past end of file")
        if tag in sections:
            raise SnapshotFormatError(f"{path}: duplicate section {tag!r}")
        sections[tag] = data[offset : offset + length]
    return sections


def _require(sections: dict[bytes, bytes], tag: bytes, path: Path) -> bytes:
    if tag not in sections:
        raise SnapshotFormatError(f"{path}: missing section {tag!r}")
    return sections[tag]


def _f32_array(raw: bytes, shape: tuple[int, ...], tag: bytes, path: Path) -> np.ndarray:
    expected = int(np.prod(shape)) * 4
    if len(raw) != expected:
        raise SnapshotFormatError(
            f"{path}: section {tag!r} holds {len(raw)} bytes, expected {expected}"
        )
    return np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float64)


def load_snapshot(path: str | Path) -> EngineSnapshot:
    """Parse and fully validate a snapshot file."""
    path = Path(path)
    data = path.read_bytes()
    sections = _read_sections(data, path)

    try:
        meta = json.loads(_require(sections, b"META", path).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SnapshotFormatError(f"{path}: unreadable META section ({exc})") from exc

    try:
        count = int(meta["count"])
        dim = int(meta["dim"])
        ids = list(meta["company_ids"])
        names = list(meta["names"])
        strategy = str(meta["strategy"])
        version = int(meta["format_version"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotFormatError(f"{path}: META is missing fields ({exc})") from exc
    if len(ids) != count or len(names) != count:
        raise SnapshotFormatError(f"{path}: id/name list lengths do not match count")

    rows = _f32_array(_require(sections, b"EMBD", path), (count, dim), b"EMBD", path)
    mask_raw = _require(sections, b"MASK", path)
    if len(mask_raw) != count:
        raise SnapshotFormatError(f"{path}: MASK holds {len(mask_raw)} bytes for {count} rows")
    mask = np.frombuffer(mask_raw, dtype=np.uint8).astype(bool)

    try:
        matrix = EmbeddingMatrix(
            company_ids=ids, rows=rows.astype(np.float32), empty_mask=mask, names=names
        )
    except InputError as exc:
        raise SnapshotFormatError(f"{path}: invalid matrix ({exc})") from exc

    pca = None
    if "pca" in meta:
        try:
            input_dim = int(meta["pca"]["input_dim"])
            output_dim = int(meta["pca"]["output_dim"])
            standardized = bool(meta["pca"].get("standardized", False))
        except (KeyError, TypeError, ValueError) as exc:
            raise SnapshotFormatError(f"{path}: malformed pca metadata ({exc})") from exc
        mean = _f32_array(_require(sections, b"PMEA", path), (input_dim,), b"PMEA", path)
        components = _f32_array(
            _require(sections, b"PCMP", path), (output_dim, input_dim), b"PCMP", path
        )
        ratios = _f32_array(_require(sections, b"PRAT", path), (output_dim,), b"PRAT", path)
        scale = None
        if standardized:
            scale = _f32_array(_require(sections, b"PSCL", path), (input_dim,), b"PSCL", path)
        _check_pca_payload(components, ratios, path)
        try:
            pca = PcaModel(
                mean=mean,
                components=components,
                explained_ratio=ratios,
                input_dim=input_dim,
                output_dim=output_dim,
                scale=scale,
            )
        except InputError as exc:
            raise SnapshotFormatError(f"{path}: invalid PCA model ({exc})") from exc

    segmentation = None
    if "segmentation" in meta:
        try:
            k = int(meta["segmentation"]["k"])
            seed = int(meta["segmentation"]["seed"])
            iterations = int(meta["segmentation"]["iterations_run"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SnapshotFormatError(f"{path}: malformed segmentation metadata ({exc})") from exc
        centroids = _f32_array(_require(sections, b"SCEN", path), (k, matrix.dim), b"SCEN", path)
        asg_raw = _require(sections, b"SASG", path)
        if len(asg_raw) != count * 4:
            raise SnapshotFormatError(f"{path}: SASG holds {len(asg_raw)} bytes for {count} rows")
        assignments = np.frombuffer(asg_raw, dtype="<i4").astype(np.int32)
        if assignments.size and (assignments.min() < -1 or assignments.max() >= k):
            raise SnapshotFormatError(f"{path}: assignment labels out of range [−1, {k})")
        try:
            segmentation = SegmentationModel(
                k=k,
                centroids=centroids,
                assignments=assignments,
                seed=seed,
                iterations_run=iterations,
            )
        except InputError as exc:
            raise SnapshotFormatError(f"{path}: invalid segmentation ({exc})") from exc

    snapshot = EngineSnapshot(
        matrix=matrix,
        strategy=strategy,
        pca=pca,
        segmentation=segmentation,
        provenance=dict(meta.get("provenance", {})),
        format_version=version,
    )
    try:
        snapshot.validate()
    except InputError as exc:
        raise SnapshotFormatError(f"{path}: inconsistent snapshot ({exc})") from exc
    return snapshot


def _check_pca_payload(components: np.ndarray, ratios: np.ndarray, path: Path) -> None:
    """Re-check the PCA invariants that float32 storage must preserve."""
    gram = components @ components.T
    if not np.allclose(gram, np.eye(components.shape[0]), atol=1e-5):
        raise SnapshotFormatError(f"{path}: PCA components are not orthonormal")
    if np.any(ratios <= 0.0) or np.any(ratios > 1.0 + 1e-6):
        raise SnapshotFormatError(f"{path}: explained ratios outside (0, 1]")
    if np.any(np.diff(ratios) > 1e-9):
        raise SnapshotFormatError(f"{path}: explained ratios are not non-increasing")
    if float(ratios.sum()) > 1.0 + 1e-6:
        raise SnapshotFormatError(f"{path}: explained ratios sum above 1")


def snapshot_digest(path: str | Path) -> str:
    """Stable identity of a snapshot file (sha256 prefix)."""
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return digest[:16]


def normalize_url(url: str) -> str:
    """Join key: scheme stripped, host lowercased, trailing slash trimmed."""
    url = url.strip()
    parsed = urlparse(url if "://" in url else f"http://{url}")
    host = (parsed.netloc or "").lower()
    path = parsed.path.rstrip("/")
    return f"{host}{path}"


def join_metadata(
    records: list[CompanyRecord],
    scraped: dict[str, tuple[list[str], list[str], list[str]]],
) -> list[CompanyRecord]:
    """Left join of company metadata onto scraped token channels by URL.

    `scraped` maps URLs to (text_tokens, image_tokens, alt_tokens). Records
    whose URL never got scraped keep empty channels; duplicate scrape URLs
    collapse to the first occurrence with a warning.
    """
    by_key: dict[str, tuple[list[str], list[str], list[str]]] = {}
    for url, channels in scraped.items():
        key = normalize_url(url)
        if key in by_key:
            log.warning("duplicate scrape row for %s; keeping the first", key)
            continue
        by_key[key] = channels

    joined = []
    for record in records:
        channels = by_key.get(normalize_url(record.url), ([], [], []))
        joined.append(
            CompanyRecord(
                id=record.id,
                name=record.name,
                url=record.url,
                nace_level1=record.nace_level1,
                nace_level2=record.nace_level2,
                text_tokens=list(channels[0]),
                image_tokens=list(channels[1]),
                alt_tokens=list(channels[2]),
            )
        )
    return joined

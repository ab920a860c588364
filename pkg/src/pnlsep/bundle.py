"""The serialized run artifact consumed by reports and the explorer UI.

A bundle is one self-describing JSON document: run configuration and
provenance, the mixtures (and ground truth when known), every archive entry
with its genotype, unmixing matrix, objective scores, retrieved waveforms
and optional SIR report, the two mono-objective baselines in the same shape,
and the robustness-sweep table when one was produced.

Serialization is canonical (sorted keys, no whitespace), so two runs with
the same seed produce byte-identical files apart from the manifest
timestamp. Infinite SIR values are stored as the JSON string "inf".
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError
from .objectives import EvaluatedCandidate
from .signals import SignalMatrix, SirReport

FORMAT_VERSION = "pnlsep.bundle/1"
TOOLKIT_VERSION = "0.1.0"


def _encode_db(value: float) -> float | str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return float(value)


def _decode_db(value) -> float:
    if value == "inf":
        return math.inf
    if value == "-inf":
        return -math.inf
    return float(value)


def _matrix_rows(matrix: np.ndarray) -> list[list[float]]:
    return [[float(v) for v in row] for row in np.asarray(matrix)]


@dataclass(frozen=True, eq=False)
class ArchiveEntry:
    """One solution: slope genotype, unmixing matrix, scores, waveforms."""

    slopes: tuple[float, ...]
    unmixing: tuple[tuple[float, ...], ...]
    slope_similarity: float
    off_diagonality: float
    retrieved: tuple[tuple[float, ...], ...]
    sir: SirReport | None = None

    @classmethod
    def from_candidate(
        cls, candidate: EvaluatedCandidate, sir: SirReport | None = None
    ) -> "ArchiveEntry":
        return cls(
            slopes=tuple(float(v) for v in candidate.genotype),
            unmixing=tuple(tuple(float(v) for v in row) for row in candidate.unmixing),
            slope_similarity=candidate.objectives.slope_similarity,
            off_diagonality=candidate.objectives.off_diagonality,
            retrieved=tuple(tuple(float(v) for v in row) for row in candidate.retrieved.data),
            sir=sir,
        )

    def to_document(self) -> dict:
        doc = {
            "slopes": list(self.slopes),
            "w": [list(row) for row in self.unmixing],
            "j1": float(self.slope_similarity),
            "j2": float(self.off_diagonality),
            "y": [list(row) for row in self.retrieved],
            "sir": None,
        }
        if self.sir is not None:
            doc["sir"] = {
                "per_source_db": [_encode_db(v) for v in self.sir.per_source_db],
                "permutation": list(self.sir.permutation),
                "gains": [float(g) for g in self.sir.gains],
                "average_db": _encode_db(self.sir.average_db),
            }
        return doc

    @classmethod
    def from_document(cls, doc: dict) -> "ArchiveEntry":
        sir = None
        if doc.get("sir") is not None:
            raw = doc["sir"]
            sir = SirReport(
                per_source_db=tuple(_decode_db(v) for v in raw["per_source_db"]),
                permutation=tuple(int(v) for v in raw["permutation"]),
                gains=tuple(float(v) for v in raw["gains"]),
                average_db=_decode_db(raw["average_db"]),
            )
        return cls(
            slopes=tuple(float(v) for v in doc["slopes"]),
            unmixing=tuple(tuple(float(v) for v in row) for row in doc["w"]),
            slope_similarity=float(doc["j1"]),
            off_diagonality=float(doc["j2"]),
            retrieved=tuple(tuple(float(v) for v in row) for row in doc["y"]),
            sir=sir,
        )


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce a run byte for byte."""

    command: str
    argv: tuple[str, ...]
    inputs: dict
    seed: int
    created_utc: str
    toolkit_version: str = TOOLKIT_VERSION

    def to_document(self) -> dict:
        return {
            "command": self.command,
            "argv": list(self.argv),
            "inputs": dict(self.inputs),
            "seed": int(self.seed),
            "created_utc": self.created_utc,
            "toolkit_version": self.toolkit_version,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "RunManifest":
        return cls(
            command=doc["command"],
            argv=tuple(doc["argv"]),
            inputs=dict(doc["inputs"]),
            seed=int(doc["seed"]),
            created_utc=doc["created_utc"],
            toolkit_version=doc["toolkit_version"],
        )


@dataclass(frozen=True)
class SweepPoint:
    reference_mv: float
    best_average_sir_db: float

    def to_document(self) -> dict:
        return {
            "reference_mv": float(self.reference_mv),
            "best_average_sir_db": _encode_db(self.best_average_sir_db),
        }

    @classmethod
    def from_document(cls, doc: dict) -> "SweepPoint":
        return cls(
            reference_mv=float(doc["reference_mv"]),
            best_average_sir_db=_decode_db(doc["best_average_sir_db"]),
        )


def _signals_to_document(signals: SignalMatrix | None) -> dict | None:
    if signals is None:
        return None
    return {
        "labels": list(signals.labels) if signals.labels is not None else None,
        "shape": [signals.n_channels, signals.n_samples],
        "data": _matrix_rows(signals.data),
    }


def _signals_from_document(doc: dict | None) -> SignalMatrix | None:
    if doc is None:
        return None
    labels = tuple(doc["labels"]) if doc.get("labels") else None
    return SignalMatrix(doc["data"], labels=labels)


@dataclass(eq=False)
class SolutionBundle:
    """Container for one complete run, ready for serialization."""

    manifest: RunManifest
    config: dict
    mixtures: SignalMatrix
    truth: SignalMatrix | None = None
    archive: list[ArchiveEntry] = field(default_factory=list)
    baselines: dict[str, ArchiveEntry] = field(default_factory=dict)
    best_index: int | None = None
    sweep: list[SweepPoint] | None = None
    format_version: str = FORMAT_VERSION

    def __post_init__(self):
        # Archive order is part of the format: ascending similarity score.
        self.archive = sorted(
            self.archive,
            key=lambda e: (e.slope_similarity, e.off_diagonality, e.slopes),
        )

    def to_document(self) -> dict:
        return {
            "format_version": self.format_version,
            "manifest": self.manifest.to_document(),
            "config": self.config,
            "mixtures": _signals_to_document(self.mixtures),
            "truth": _signals_to_document(self.truth),
            "archive": [entry.to_document() for entry in self.archive],
            "baselines": {
                name: entry.to_document() for name, entry in sorted(self.baselines.items())
            },
            "best_index": self.best_index,
            "sweep": (
                None if self.sweep is None else [p.to_document() for p in self.sweep]
            ),
        }

    @classmethod
    def from_document(cls, doc: dict) -> "SolutionBundle":
        version = doc.get("format_version")
        if version != FORMAT_VERSION:
            raise DataError(
                f"unsupported bundle format {version!r}; this toolkit reads {FORMAT_VERSION!r}"
            )
        return cls(
            manifest=RunManifest.from_document(doc["manifest"]),
            config=doc["config"],
            mixtures=_signals_from_document(doc["mixtures"]),
            truth=_signals_from_document(doc.get("truth")),
            archive=[ArchiveEntry.from_document(e) for e in doc["archive"]],
            baselines={
                name: ArchiveEntry.from_document(e)
                for name, e in doc.get("baselines", {}).items()
            },
            best_index=doc.get("best_index"),
            sweep=(
                None
                if doc.get("sweep") is None
                else [SweepPoint.from_document(p) for p in doc["sweep"]]
            ),
            format_version=version,
        )


def bundle_bytes(bundle: SolutionBundle) -> bytes:
    """Canonical serialization: sorted keys, compact separators."""
    return json.dumps(
        bundle.to_document(), sort_keys=True, separators=(",", ":"), allow_nan=False
    ).encode("utf-8")


def save_bundle(bundle: SolutionBundle, path: str | Path) -> None:
    Path(path).write_bytes(bundle_bytes(bundle))


def load_bundle(path: str | Path) -> SolutionBundle:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed bundle {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise DataError(f"{path} does not contain a bundle object")
    return SolutionBundle.from_document(doc)

"""Dataset ingestion, frequency-band averaging, and synthetic connectomes.

File formats are plain text (human-auditable, diff-able, adequate at the
34 x 34 scale of connectivity matrices):

- matrix file: line ``I``, then I lines of I decimals
- stacked tensor: line ``I F``, then F blocks of I lines, block f holding the
  slice for frequency f Hz (1-indexed)
- manifest: CSV with header ``path,label,group``; relative paths resolve
  against the manifest's directory

``#``-prefixed lines are comments in the matrix formats. All writers emit 17
significant digits, so a save/load cycle is exact.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from . import _textio
from ._textio import DataFileError
from .core import FactorSet, SymmetricMatrix

__all__ = [
    "BUILTIN_BANDS",
    "BandSpec",
    "DataFileError",
    "ManifestRow",
    "SampleManifest",
    "StackedBandTensor",
    "SyntheticConfig",
    "SyntheticDataset",
    "band_average",
    "band_by_name",
    "generate_synthetic",
    "load_factors",
    "load_manifest",
    "load_matrix",
    "load_stacked",
    "save_factors",
    "save_manifest",
    "save_matrix",
    "save_stacked",
]

GROUPS = ("train", "test")


@dataclass(frozen=True)
class BandSpec:
    """A contiguous inclusive Hz range; frequencies are 1-indexed."""

    name: str
    lo_hz: int
    hi_hz: int

    def __post_init__(self):
        if self.lo_hz < 1 or self.hi_hz < self.lo_hz:
            raise ValueError(
                f"band needs 1 <= lo <= hi, got ({self.lo_hz}, {self.hi_hz})"
            )


BUILTIN_BANDS = {
    "delta": BandSpec("delta", 1, 3),
    "theta": BandSpec("theta", 4, 7),
    "alpha": BandSpec("alpha", 8, 12),
    "beta": BandSpec("beta", 13, 30),
    "all": BandSpec("all", 1, 30),
}


def band_by_name(name: str) -> BandSpec:
    """Looks up a built-in band, case-insensitively."""
    band = BUILTIN_BANDS.get(name.lower())
    if band is None:
        known = ", ".join(b.name for b in BUILTIN_BANDS.values())
        raise KeyError(f"unknown band {name!r}; built-ins are: {known}")
    return band


@dataclass(frozen=True, eq=False)
class StackedBandTensor:
    """Per-frequency connectivity slices; ``slices[f]`` is frequency f+1 Hz."""

    slices: tuple[SymmetricMatrix, ...]

    def __post_init__(self):
        if len(self.slices) < 1:
            raise ValueError("tensor needs at least one frequency slice")
        dims = {s.dim for s in self.slices}
        if len(dims) > 1:
            raise ValueError(f"slices have mixed dimensions: {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.slices[0].dim

    @property
    def num_freqs(self) -> int:
        return len(self.slices)


def band_average(tensor: StackedBandTensor, band: BandSpec) -> SymmetricMatrix:
    """Elementwise mean of the slices for lo..hi Hz inclusive.

    Accumulates in ascending frequency order, so the result is reproducible
    bit for bit.
    """
    if band.hi_hz > tensor.num_freqs:
        raise ValueError(
            f"band {band.name} needs {band.hi_hz} frequencies, tensor has "
            f"{tensor.num_freqs}"
        )
    total = np.zeros((tensor.dim, tensor.dim))
    for f in range(band.lo_hz - 1, band.hi_hz):
        total += tensor.slices[f].values
    return SymmetricMatrix(total / (band.hi_hz - band.lo_hz + 1))


@dataclass(frozen=True)
class ManifestRow:
    """One sample: path as written in the file, label (None when the manifest
    has no label column), and train/test group."""

    path: str
    label: str | None
    group: str


@dataclass(frozen=True)
class SampleManifest:
    """Ordered sample listing; ``base_dir`` anchors relative paths."""

    rows: tuple[ManifestRow, ...]
    base_dir: str = "."

    def __post_init__(self):
        seen = set()
        for row in self.rows:
            if row.path in seen:
                raise ValueError(f"duplicate path {row.path!r}")
            seen.add(row.path)
            if row.group not in GROUPS:
                raise ValueError(
                    f"unknown group {row.group!r} for {row.path!r}; "
                    f"allowed values: {', '.join(GROUPS)}"
                )
            if row.label is not None and row.label == "":
                raise ValueError(f"empty label for {row.path!r}")

    def resolved_path(self, row: ManifestRow) -> str:
        if os.path.isabs(row.path):
            return row.path
        return os.path.join(self.base_dir, row.path)

    @property
    def labels(self) -> list[str | None]:
        return [row.label for row in self.rows]

    @property
    def has_labels(self) -> bool:
        return all(row.label is not None for row in self.rows)


def load_manifest(path: str) -> SampleManifest:
    """Reads a ``path,label,group`` CSV; the label column may be absent."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            records = list(csv.reader(fh))
    except OSError as exc:
        raise DataFileError(f"{path}: cannot read file: {exc}") from exc
    if not records:
        raise DataFileError(f"{path}:1: empty manifest, expected a header row")
    header = [col.strip() for col in records[0]]
    if header not in (["path", "label", "group"], ["path", "group"]):
        raise DataFileError(
            f"{path}:1: expected header 'path,label,group' (label optional), "
            f"got {','.join(header)!r}"
        )
    has_label = "label" in header
    rows = []
    for lineno, record in enumerate(records[1:], start=2):
        if not record or (len(record) == 1 and not record[0].strip()):
            continue
        if len(record) != len(header):
            raise DataFileError(
                f"{path}:{lineno}: expected {len(header)} columns, got {len(record)}"
            )
        fields = [col.strip() for col in record]
        if has_label:
            rows.append(ManifestRow(fields[0], fields[1], fields[2]))
        else:
            rows.append(ManifestRow(fields[0], None, fields[1]))
    try:
        return SampleManifest(tuple(rows), os.path.dirname(path) or ".")
    except ValueError as exc:
        raise DataFileError(f"{path}: {exc}") from exc


def save_manifest(manifest: SampleManifest, path: str) -> None:
    """Writes rows with the label column unless every label is None."""
    with_labels = any(row.label is not None for row in manifest.rows)
    lines = ["path,label,group" if with_labels else "path,group"]
    for row in manifest.rows:
        if with_labels:
            lines.append(f"{row.path},{row.label if row.label is not None else ''},{row.group}")
        else:
            lines.append(f"{row.path},{row.group}")
    _textio.write_lines(path, lines)


def _read_header_ints(reader: _textio.LineReader, count: int, what: str) -> list[int]:
    line = reader.next_data_line()
    if line is None:
        reader.fail(f"empty file, expected {what}")
    tokens = line.split()
    if len(tokens) != count or not all(t.isdigit() and int(t) >= 1 for t in tokens):
        reader.fail(f"expected {what}, got {line.strip()!r}")
    return [int(t) for t in tokens]


def load_matrix(path: str) -> SymmetricMatrix:
    """Reads a matrix file; input is symmetrized like any matrix construction."""
    reader = _textio.LineReader(path)
    (dim,) = _read_header_ints(reader, 1, "matrix dimension I")
    values = _textio.read_square_block(reader, dim)
    _textio.expect_end(reader)
    return SymmetricMatrix(values)


def save_matrix(x: SymmetricMatrix, path: str) -> None:
    lines = [str(x.dim)]
    lines.extend(_textio.format_row(row) for row in x.values)
    _textio.write_lines(path, lines)


def load_factors(path: str) -> FactorSet:
    """Reads a factor file: line ``I R``, then R lines of I decimals."""
    reader = _textio.LineReader(path)
    dim, rank = _read_header_ints(reader, 2, "header 'I R'")
    rows = []
    for _ in range(rank):
        line = reader.next_data_line()
        if line is None:
            reader.fail(f"unexpected end of file, expected {rank} factor rows")
        rows.append(_textio.parse_floats(reader, line, dim))
    _textio.expect_end(reader)
    return FactorSet(np.vstack(rows))


def save_factors(factors: FactorSet, path: str) -> None:
    lines = [f"{factors.dim} {factors.rank}"]
    lines.extend(_textio.format_row(row) for row in factors.vectors)
    _textio.write_lines(path, lines)


def load_stacked(path: str) -> StackedBandTensor:
    """Reads an ``I F`` stacked tensor file."""
    reader = _textio.LineReader(path)
    dim, num_freqs = _read_header_ints(reader, 2, "header 'I F'")
    slices = []
    for _ in range(num_freqs):
        slices.append(SymmetricMatrix(_textio.read_square_block(reader, dim)))
    _textio.expect_end(reader)
    return StackedBandTensor(tuple(slices))


def save_stacked(tensor: StackedBandTensor, path: str) -> None:
    lines = [f"{tensor.dim} {tensor.num_freqs}"]
    for s in tensor.slices:
        lines.extend(_textio.format_row(row) for row in s.values)
    _textio.write_lines(path, lines)


@dataclass(frozen=True)
class SyntheticConfig:
    """Low-rank class templates plus symmetric Gaussian noise."""

    num_classes: int = 3
    dim: int = 16
    template_rank: int = 3
    noise_sigma: float = 0.2
    train_per_class: int = 20
    test_per_class: int = 10
    seed: int = 7

    def __post_init__(self):
        counts = (
            self.num_classes,
            self.dim,
            self.template_rank,
            self.train_per_class,
            self.test_per_class,
        )
        if any(v < 1 for v in counts):
            raise ValueError("all synthetic counts must be positive")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


@dataclass(frozen=True, eq=False)
class SyntheticDataset:
    """In-memory dataset; matrices align with their manifest rows."""

    train_manifest: SampleManifest
    train_matrices: tuple[SymmetricMatrix, ...]
    test_manifest: SampleManifest
    test_matrices: tuple[SymmetricMatrix, ...]
    templates: tuple[SymmetricMatrix, ...]


def generate_synthetic(config: SyntheticConfig) -> SyntheticDataset:
    """Draws per-class low-rank templates and noisy samples around them.

    Class c gets a template ``T_c = B_c B_c^T`` with B_c an (I, R0) standard
    normal draw; each sample is ``T_c + sigma * (E + E^T) / 2`` with E standard
    normal. The stream is NumPy's PCG64 generator seeded with ``config.seed``,
    consumed in a fixed order: all templates class by class, then all training
    samples class by class, then all test samples class by class. Given the
    config, the result is deterministic down to the bit.
    """
    rng = np.random.default_rng(config.seed)
    labels = [f"class{c}" for c in range(config.num_classes)]
    templates = []
    for _ in range(config.num_classes):
        b = rng.standard_normal((config.dim, config.template_rank))
        templates.append(SymmetricMatrix(b @ b.T))

    def draw(template: SymmetricMatrix) -> SymmetricMatrix:
        e = rng.standard_normal((config.dim, config.dim))
        return SymmetricMatrix(template.values + config.noise_sigma * 0.5 * (e + e.T))

    def block(group: str, per_class: int):
        rows, matrices = [], []
        for c, label in enumerate(labels):
            for s in range(per_class):
                rows.append(ManifestRow(f"{group}/{label}_{s:02d}.txt", label, group))
                matrices.append(draw(templates[c]))
        return SampleManifest(tuple(rows)), tuple(matrices)

    train_manifest, train_matrices = block("train", config.train_per_class)
    test_manifest, test_matrices = block("test", config.test_per_class)
    return SyntheticDataset(
        train_manifest, train_matrices, test_manifest, test_matrices, tuple(templates)
    )

"""Letter corpus ingestion, class statistics, and pair-stratified splitting.

A corpus is a flat collection of pre-segmented letter images, each carrying a
composite label: which of the 28 Arabic letters it is, and which of the four
positional forms (Beginning, Middle, End, Isolated) it takes. Splits are
produced per (letter, position) pair so every observed pair is represented
proportionally in train/validation/test.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

# Canonical romanized letter names; index order is fixed and shipped with the
# toolkit so label vectors are comparable across runs and machines.
LETTER_NAMES = (
    "Alef", "Ayn", "Baa", "Dad", "Dal", "Faa", "Ghyn", "Ha", "Haa", "Jeem",
    "Kaf", "Kha", "Lam", "Noon", "Qaf", "Raa", "Saad", "Seen", "Sheen", "Taa",
    "Thaa", "Ttaa", "Waw", "Yaa", "Zay", "Dhaa", "Dhal", "Meem",
)
NUM_LETTERS = len(LETTER_NAMES)
NUM_POSITIONS = 4

_NAME_TO_INDEX = {name.lower(): i for i, name in enumerate(LETTER_NAMES)}

IMAGE_SUFFIXES = (".png", ".bmp")

MANIFEST_CSV_HEADER = ["sample_id", "image_path", "letter", "position"]


class CorpusError(ValueError):
    """Raised when on-disk corpus content violates the manifest contract."""


@dataclass(frozen=True, order=True)
class LetterClass:
    """One of the 28 Arabic letter identities."""

    index: int
    name: str

    def __post_init__(self):
        if not (0 <= self.index < NUM_LETTERS):
            raise ValueError(f"letter index {self.index} out of range [0, {NUM_LETTERS})")
        if LETTER_NAMES[self.index] != self.name:
            raise ValueError(f"letter name {self.name!r} does not match index {self.index}")

    @classmethod
    def from_name(cls, name: str) -> "LetterClass":
        idx = _NAME_TO_INDEX.get(name.strip().lower())
        if idx is None:
            raise CorpusError(f"unknown letter name {name!r}")
        return cls(idx, LETTER_NAMES[idx])

    @classmethod
    def from_index(cls, index: int) -> "LetterClass":
        return cls(index, LETTER_NAMES[index])


class PositionClass(Enum):
    """Positional form of a letter within a word."""

    BEGINNING = "B"
    MIDDLE = "M"
    END = "E"
    ISOLATED = "I"

    @property
    def code(self) -> str:
        return self.value

    @property
    def index(self) -> int:
        return _POSITION_ORDER.index(self)

    @classmethod
    def from_code(cls, code: str) -> "PositionClass":
        try:
            return cls(code.strip().upper())
        except ValueError:
            raise CorpusError(f"unknown position code {code!r}") from None

    @classmethod
    def from_index(cls, index: int) -> "PositionClass":
        return _POSITION_ORDER[index]


_POSITION_ORDER = (
    PositionClass.BEGINNING,
    PositionClass.MIDDLE,
    PositionClass.END,
    PositionClass.ISOLATED,
)


@dataclass(frozen=True)
class LetterSample:
    """One letter image with its composite (letter, position) label."""

    sample_id: str
    image_path: Path
    letter: LetterClass
    position: PositionClass

    @property
    def pair(self) -> tuple[LetterClass, PositionClass]:
        return (self.letter, self.position)


class CorpusManifest:
    """Immutable catalog of letter samples with per-pair counts."""

    def __init__(self, samples: list[LetterSample]):
        if not samples:
            raise CorpusError("no samples found")
        ordered = sorted(samples, key=lambda s: (s.letter.index, s.position.code, s.sample_id))
        seen: set[str] = set()
        for s in ordered:
            if s.sample_id in seen:
                raise CorpusError(f"duplicate sample_id {s.sample_id!r}")
            seen.add(s.sample_id)
        pair_counts: dict[tuple[LetterClass, PositionClass], int] = {}
        for s in ordered:
            pair_counts[s.pair] = pair_counts.get(s.pair, 0) + 1
        self.samples: tuple[LetterSample, ...] = tuple(ordered)
        self.pair_counts: dict[tuple[LetterClass, PositionClass], int] = pair_counts
        self._by_id: dict[str, LetterSample] = {s.sample_id: s for s in ordered}

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, sample_id: str) -> LetterSample:
        try:
            return self._by_id[sample_id]
        except KeyError:
            raise CorpusError(f"unknown sample_id {sample_id!r}") from None

    def sample_ids(self) -> list[str]:
        return [s.sample_id for s in self.samples]

    def observed_pairs(self) -> list[tuple[LetterClass, PositionClass]]:
        return sorted(self.pair_counts, key=lambda p: (p[0].index, p[1].code))

    def write_csv(self, path: Path) -> None:
        """Write the manifest as CSV with image paths relative to `path`'s directory."""
        path = Path(path)
        base = path.parent.resolve()
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(MANIFEST_CSV_HEADER)
            for s in self.samples:
                img = Path(s.image_path).resolve()
                try:
                    rel = img.relative_to(base)
                    stored = rel.as_posix()
                except ValueError:
                    stored = img.as_posix()
                writer.writerow([s.sample_id, stored, s.letter.name, s.position.code])


def _check_image_readable(path: Path) -> None:
    if path.suffix.lower() not in IMAGE_SUFFIXES:
        raise CorpusError(f"unsupported image format (want PNG or BMP): {path}")
    try:
        with Image.open(path) as im:
            im.verify()
    except (OSError, UnidentifiedImageError, SyntaxError) as exc:
        raise CorpusError(f"unreadable image file {path}: {exc}") from exc


def _scan_tree(root: Path) -> list[LetterSample]:
    samples = []
    for letter_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        try:
            letter = LetterClass.from_name(letter_dir.name)
        except CorpusError:
            raise CorpusError(f"unknown letter name {letter_dir.name!r} in path {letter_dir}") from None
        for pos_dir in sorted(p for p in letter_dir.iterdir() if p.is_dir()):
            try:
                position = PositionClass.from_code(pos_dir.name)
            except CorpusError:
                raise CorpusError(f"invalid position code {pos_dir.name!r} in path {pos_dir}") from None
            for img in sorted(pos_dir.iterdir()):
                if not img.is_file() or img.suffix.lower() not in IMAGE_SUFFIXES:
                    continue
                _check_image_readable(img)
                sample_id = img.relative_to(root).as_posix()
                samples.append(LetterSample(sample_id, img, letter, position))
    return samples


def _read_csv(csv_path: Path) -> list[LetterSample]:
    base = csv_path.parent
    samples = []
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(MANIFEST_CSV_HEADER) - set(reader.fieldnames or [])
        if missing:
            raise CorpusError(f"manifest.csv missing columns {sorted(missing)} in {csv_path}")
        for row in reader:
            letter = LetterClass.from_name(row["letter"])
            position = PositionClass.from_code(row["position"])
            img = Path(row["image_path"])
            if not img.is_absolute():
                img = base / img
            _check_image_readable(img)
            samples.append(LetterSample(row["sample_id"], img, letter, position))
    return samples


def load_manifest(root: Path | str) -> CorpusManifest:
    """Build a manifest from `root`.

    If `root/manifest.csv` exists it is authoritative; otherwise the directory
    tree `<letter_name>/<position_code>/*.{png,bmp}` is scanned and the layout
    doubles as the labeling.
    """
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"corpus root is not a directory: {root}")
    csv_path = root / "manifest.csv"
    if csv_path.is_file():
        samples = _read_csv(csv_path)
    else:
        samples = _scan_tree(root)
    return CorpusManifest(samples)


@dataclass(frozen=True)
class SplitManifest:
    """Disjoint, exhaustive split of a manifest's sample ids."""

    seed: int
    ratios: tuple[float, float, float]
    train: tuple[str, ...]
    validation: tuple[str, ...]
    test: tuple[str, ...]

    def to_json(self) -> str:
        payload = {
            "seed": self.seed,
            "ratios": list(self.ratios),
            "train": list(self.train),
            "validation": list(self.validation),
            "test": list(self.test),
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SplitManifest":
        payload = json.loads(text)
        return cls(
            seed=int(payload["seed"]),
            ratios=tuple(payload["ratios"]),
            train=tuple(payload["train"]),
            validation=tuple(payload["validation"]),
            test=tuple(payload["test"]),
        )

    def save(self, path: Path | str) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Path | str) -> "SplitManifest":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


DEFAULT_RATIOS = (0.70, 0.10, 0.20)


def _allocate(n: int, ratios: tuple[float, float, float]) -> list[int]:
    """Largest-remainder allocation of n items over three buckets.

    Pairs of size 1 go entirely to train; pairs of size 2 go to train and
    test, keeping rare pairs visible at evaluation time. For n >= 10 every
    bucket is guaranteed at least one item.
    """
    if n == 1:
        return [1, 0, 0]
    if n == 2:
        return [1, 0, 1]
    quotas = [n * r for r in ratios]
    alloc = [int(q) for q in quotas]
    remainders = sorted(
        range(3), key=lambda i: (-(quotas[i] - alloc[i]), i)
    )
    leftover = n - sum(alloc)
    for i in range(leftover):
        alloc[remainders[i % 3]] += 1
    if n >= 10:
        # Degenerate ratios can round a bucket to zero; keep every split
        # populated by taking from the fullest bucket.
        for i in range(3):
            while alloc[i] == 0:
                donor = max(range(3), key=lambda j: alloc[j])
                alloc[donor] -= 1
                alloc[i] += 1
    return alloc


def stratified_split(
    manifest: CorpusManifest,
    ratios: tuple[float, float, float] = DEFAULT_RATIOS,
    seed: int = 0,
) -> SplitManifest:
    """Split the manifest per (letter, position) pair with a seeded shuffle."""
    if len(ratios) != 3:
        raise ValueError("ratios must have exactly three entries")
    if any(r < 0 for r in ratios):
        raise ValueError("ratios must be non-negative")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")

    by_pair: dict[tuple[LetterClass, PositionClass], list[str]] = {}
    for s in manifest.samples:
        by_pair.setdefault(s.pair, []).append(s.sample_id)

    train: list[str] = []
    validation: list[str] = []
    test: list[str] = []
    for pair in manifest.observed_pairs():
        ids = sorted(by_pair[pair])
        rng = np.random.default_rng([seed & 0xFFFFFFFF, pair[0].index, pair[1].index])
        rng.shuffle(ids)
        n_train, n_val, n_test = _allocate(len(ids), tuple(ratios))
        train.extend(ids[:n_train])
        validation.extend(ids[n_train : n_train + n_val])
        test.extend(ids[n_train + n_val :])
    return SplitManifest(
        seed=seed,
        ratios=tuple(float(r) for r in ratios),
        train=tuple(sorted(train)),
        validation=tuple(sorted(validation)),
        test=tuple(sorted(test)),
    )


def class_counts(manifest: CorpusManifest, subset: list[str]) -> tuple[np.ndarray, np.ndarray]:
    """Count letters and positions over `subset` (sample ids from the manifest)."""
    letter_counts = np.zeros(NUM_LETTERS, dtype=np.int64)
    position_counts = np.zeros(NUM_POSITIONS, dtype=np.int64)
    for sample_id in subset:
        sample = manifest[sample_id]
        letter_counts[sample.letter.index] += 1
        position_counts[sample.position.index] += 1
    return letter_counts, position_counts

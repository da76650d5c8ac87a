"""Bit-exact template serialization and the on-disk template database.

Wire format (all integers little-endian):

    magic           4 bytes  b"FBX1"
    version         u16
    label_len       u8
    label           label_len bytes, UTF-8
    working_width   u16
    working_height  u16
    feature_count   u32
    features        feature_count x 40-byte records

Each feature record is the 32-byte descriptor followed by the 8-byte
minutia record: x u16, y u16, angle u16 (units of 2*pi/65536), kind u8
(0 = ending, 1 = bifurcation), reserved u8 = 0. One feature therefore
costs exactly 320 bits.
"""

from __future__ import annotations

import math
import os
import re
import struct
import tempfile
from pathlib import Path

from .config import MatchConfig
from .descriptor import Descriptor256, Template
from .errors import BadMagicError, BadVersionError, TruncatedTemplateError, TemplateFormatError
from .matcher import MatchResult, match_score
from .minutiae import Minutia, MinutiaKind

MAGIC = b"FBX1"
SUPPORTED_VERSION = 1
FEATURE_SIZE = 40  # bytes: 32 descriptor + 8 minutia record
FIXED_HEADER = struct.Struct("<4sHB")
DIMS_AND_COUNT = struct.Struct("<HHI")
MINUTIA_RECORD = struct.Struct("<HHHBB")

TWO_PI = 2.0 * math.pi
ANGLE_UNIT = TWO_PI / 65536.0


def angle_to_u16(angle: float) -> int:
    return int(math.floor(angle / ANGLE_UNIT + 0.5)) % 65536


def u16_to_angle(units: int) -> float:
    return units * ANGLE_UNIT


def header_size(label: str) -> int:
    return FIXED_HEADER.size + len(label.encode("utf-8")) + DIMS_AND_COUNT.size


def serialize(t: Template) -> bytes:
    """Encode a template; the angle is quantized to the 16-bit grid."""
    label_bytes = t.label.encode("utf-8")
    if len(label_bytes) > 255:
        raise ValueError(f"label is {len(label_bytes)} bytes, limit is 255")
    if len(t.features) >= 1 << 32:
        raise ValueError("too many features for the u32 count field")
    parts = [
        FIXED_HEADER.pack(MAGIC, t.version, len(label_bytes)),
        label_bytes,
        DIMS_AND_COUNT.pack(t.working_width, t.working_height, len(t.features)),
    ]
    for m, d in t.features:
        parts.append(d.bits)
        parts.append(MINUTIA_RECORD.pack(m.x, m.y, angle_to_u16(m.angle), int(m.kind), 0))
    return b"".join(parts)


def deserialize(data: bytes) -> Template:
    """Decode a template file; magic, version, and length are all validated."""
    if len(data) < FIXED_HEADER.size:
        raise TruncatedTemplateError(
            f"file is {len(data)} bytes, shorter than the {FIXED_HEADER.size}-byte fixed header"
        )
    magic, version, label_len = FIXED_HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != SUPPORTED_VERSION:
        raise BadVersionError(f"unsupported version {version}, expected {SUPPORTED_VERSION}")
    pos = FIXED_HEADER.size
    if len(data) < pos + label_len + DIMS_AND_COUNT.size:
        raise TruncatedTemplateError("file ends inside the header")
    try:
        label = data[pos : pos + label_len].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise TemplateFormatError(f"label is not valid UTF-8: {exc}") from None
    pos += label_len
    width, height, count = DIMS_AND_COUNT.unpack_from(data, pos)
    pos += DIMS_AND_COUNT.size
    expected = pos + count * FEATURE_SIZE
    if len(data) != expected:
        raise TruncatedTemplateError(
            f"expected {expected} bytes for {count} features, got {len(data)}"
        )
    features = []
    for _ in range(count):
        bits = data[pos : pos + 32]
        x, y, angle_units, kind, _reserved = MINUTIA_RECORD.unpack_from(data, pos + 32)
        if kind not in (0, 1):
            raise TemplateFormatError(f"unknown minutia kind byte {kind}")
        features.append(
            (
                Minutia(x=x, y=y, kind=MinutiaKind(kind), angle=u16_to_angle(angle_units)),
                Descriptor256(bits),
            )
        )
        pos += FEATURE_SIZE
    return Template(
        version=version,
        label=label,
        working_width=width,
        working_height=height,
        features=features,
    )


_ID_RE = re.compile(r"^(?P<label>.*)-(?P<num>\d{6})$")
_SAFE = re.compile(r"[^A-Za-z0-9_-]")


class TemplateDb:
    """One template per file under a root directory; writes are atomic.

    Filenames are ``<label>-<NNNNNN>.fpt`` with a db-wide monotonic suffix.
    Stray temp files from interrupted writes are ignored by every reader.
    """

    SUFFIX = ".fpt"

    def __init__(self, root: str | Path, create: bool = True) -> None:
        self.root = Path(root)
        if create:
            self.root.mkdir(parents=True, exist_ok=True)

    def entries(self) -> list[str]:
        """Sorted entry ids (filename stems) of every template in the db."""
        return sorted(p.stem for p in self.root.glob(f"*{self.SUFFIX}") if p.is_file())

    def path_of(self, entry_id: str) -> Path:
        return self.root / f"{entry_id}{self.SUFFIX}"

    def load(self, entry_id: str) -> Template:
        return deserialize(self.path_of(entry_id).read_bytes())

    def _next_suffix(self) -> int:
        highest = 0
        for stem in self.entries():
            m = _ID_RE.match(stem)
            if m:
                highest = max(highest, int(m.group("num")))
        return highest + 1

    def enroll(self, t: Template) -> str:
        """Atomically add a template; returns the new entry id.

        The payload lands in a temp file first and is linked into place
        exclusively, so concurrent enrollments can never clobber each other
        and readers never observe a partial file.
        """
        data = serialize(t)
        safe_label = _SAFE.sub("_", t.label) or "unlabeled"
        fd, tmp_name = tempfile.mkstemp(prefix=".tmp-", dir=self.root)
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            suffix = self._next_suffix()
            while True:
                entry_id = f"{safe_label}-{suffix:06d}"
                target = self.path_of(entry_id)
                try:
                    os.link(tmp_name, target)
                    return entry_id
                except FileExistsError:
                    suffix += 1
        finally:
            os.unlink(tmp_name)

    def identify(self, probe: Template, cfg: MatchConfig | None = None) -> list[tuple[str, str, MatchResult]]:
        """Score the probe against every entry, best first (ties by entry id)."""
        results = []
        for entry_id in self.entries():
            t = self.load(entry_id)
            results.append((entry_id, t.label, match_score(probe, t, cfg)))
        results.sort(key=lambda item: (-item[2].score, item[0]))
        return results

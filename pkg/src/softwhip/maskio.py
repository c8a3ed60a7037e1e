"""Mask file I/O: netpbm (P1/P2/P4/P5) and run-length text, auto-detected.

The run-length format is one text line per pixel row, alternating background
and foreground run lengths starting with background, e.g. ``0 5 3`` is five
foreground pixels after none of background, then three background. Row sums
must agree across lines.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError
from .maskpipe import BinaryMask


def _tokenize_netpbm(data: bytes):
    """Yield whitespace-separated tokens, skipping '#' comments."""
    i = 0
    n = len(data)
    while i < n:
        ch = data[i:i + 1]
        if ch.isspace():
            i += 1
        elif ch == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
        else:
            j = i
            while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
                j += 1
            yield data[i:j], j
            i = j


def _read_netpbm(data: bytes, pitch: float) -> BinaryMask:
    toks = _tokenize_netpbm(data)
    magic, _ = next(toks)
    magic = magic.decode("ascii")
    header_need = 2 if magic in ("P1", "P4") else 3
    header = []
    end = 0
    for tok, end in toks:
        header.append(int(tok))
        if len(header) == header_need:
            break
    if len(header) < header_need:
        raise InvalidArgumentError(f"truncated {magic} header")
    w, h = header[0], header[1]
    maxval = header[2] if header_need == 3 else 1
    if maxval < 1 or maxval > 255:
        raise InvalidArgumentError(f"unsupported maxval {maxval}")

    if magic == "P1":
        digits = [c for c in data[end:].decode("ascii") if c in "01"]
        if len(digits) < w * h:
            raise InvalidArgumentError("truncated P1 pixel data")
        bits = np.array(digits[:w * h], dtype=np.uint8).reshape(h, w) == 1
    elif magic == "P2":
        vals = []
        for tok, _ in toks:
            vals.append(int(tok))
            if len(vals) == w * h:
                break
        if len(vals) < w * h:
            raise InvalidArgumentError("truncated P2 pixel data")
        bits = np.array(vals, dtype=np.int64).reshape(h, w) * 2 > maxval
    elif magic == "P4":
        body = data[end + 1:]
        stride = (w + 7) // 8
        if len(body) < stride * h:
            raise InvalidArgumentError("truncated P4 pixel data")
        raw = np.frombuffer(body[:stride * h], dtype=np.uint8).reshape(h, stride)
        bits = np.unpackbits(raw, axis=1)[:, :w] == 1
    elif magic == "P5":
        body = data[end + 1:]
        if len(body) < w * h:
            raise InvalidArgumentError("truncated P5 pixel data")
        raw = np.frombuffer(body[:w * h], dtype=np.uint8).reshape(h, w)
        bits = raw.astype(np.int64) * 2 > maxval
    else:
        raise InvalidArgumentError(f"unsupported netpbm magic {magic}")
    return BinaryMask(bits, pitch)


def _read_rle(text: str, pitch: float) -> BinaryMask:
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            runs = [int(tok) for tok in line.split()]
        except ValueError as exc:
            raise InvalidArgumentError(f"RLE line {lineno}: {exc}") from exc
        if any(r < 0 for r in runs):
            raise InvalidArgumentError(f"RLE line {lineno}: negative run length")
        total = sum(runs)
        if width is None:
            width = total
        elif total != width:
            raise InvalidArgumentError(
                f"RLE line {lineno}: row width {total} != {width}")
        row = np.zeros(total, dtype=bool)
        pos = 0
        fg = False  # rows start with a background run
        for run in runs:
            if fg:
                row[pos:pos + run] = True
            pos += run
            fg = not fg
        rows.append(row)
    if not rows:
        raise InvalidArgumentError("RLE file has no pixel rows")
    return BinaryMask(np.array(rows), pitch)


def read_mask(path: str | Path, pitch: float) -> BinaryMask:
    """Load a mask file; format is detected from the leading bytes."""
    data = Path(path).read_bytes()
    head = data.lstrip()[:2]
    if head in (b"P1", b"P2", b"P4", b"P5"):
        return _read_netpbm(data, pitch)
    return _read_rle(data.decode("ascii"), pitch)


def write_mask(path: str | Path, mask: BinaryMask, fmt: str = "P1") -> None:
    """Write a mask as ASCII PBM (P1), binary PBM (P4), or run-length text."""
    path = Path(path)
    h, w = mask.bits.shape
    if fmt == "P1":
        lines = [f"P1\n{w} {h}\n"]
        for row in mask.bits:
            lines.append(" ".join("1" if v else "0" for v in row) + "\n")
        path.write_text("".join(lines))
    elif fmt == "P4":
        packed = np.packbits(mask.bits.astype(np.uint8), axis=1)
        path.write_bytes(f"P4\n{w} {h}\n".encode("ascii") + packed.tobytes())
    elif fmt == "RLE":
        lines = []
        for row in mask.bits:
            runs = []
            current = False  # background first
            count = 0
            for v in row:
                if bool(v) == current:
                    count += 1
                else:
                    runs.append(count)
                    current = bool(v)
                    count = 1
            runs.append(count)
            lines.append(" ".join(str(r) for r in runs) + "\n")
        path.write_text("".join(lines))
    else:
        raise InvalidArgumentError(f"unsupported mask format {fmt!r}")

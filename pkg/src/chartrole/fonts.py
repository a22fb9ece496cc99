"""Built-in 5x7 monospaced bitmap font.

Each glyph is five column bytes, bit 0 = top row. Glyph cells are 5x7 at
scale 1 with a one-column advance gap, so drawn ink always stays inside the
layout cell returned by draw_text; that cell is the ground-truth bbox used
by the synthetic chart generator.
"""

from __future__ import annotations

import numpy as np

from chartrole.geometry import BoundingBox

GLYPH_W = 5
GLYPH_H = 7
ADVANCE = 6  # glyph + 1 column gap

GLYPHS: dict[str, tuple[int, int, int, int, int]] = {
    " ": (0x00, 0x00, 0x00, 0x00, 0x00),
    "0": (0x3E, 0x51, 0x49, 0x45, 0x3E),
    "1": (0x00, 0x42, 0x7F, 0x40, 0x00),
    "2": (0x42, 0x61, 0x51, 0x49, 0x46),
    "3": (0x21, 0x41, 0x45, 0x4B, 0x31),
    "4": (0x18, 0x14, 0x12, 0x7F, 0x10),
    "5": (0x27, 0x45, 0x45, 0x45, 0x39),
    "6": (0x3C, 0x4A, 0x49, 0x49, 0x30),
    "7": (0x01, 0x71, 0x09, 0x05, 0x03),
    "8": (0x36, 0x49, 0x49, 0x49, 0x36),
    "9": (0x06, 0x49, 0x49, 0x29, 0x1E),
    "A": (0x7E, 0x11, 0x11, 0x11, 0x7E),
    "B": (0x7F, 0x49, 0x49, 0x49, 0x36),
    "C": (0x3E, 0x41, 0x41, 0x41, 0x22),
    "D": (0x7F, 0x41, 0x41, 0x22, 0x1C),
    "E": (0x7F, 0x49, 0x49, 0x49, 0x41),
    "F": (0x7F, 0x09, 0x09, 0x09, 0x01),
    "G": (0x3E, 0x41, 0x49, 0x49, 0x7A),
    "H": (0x7F, 0x08, 0x08, 0x08, 0x7F),
    "I": (0x00, 0x41, 0x7F, 0x41, 0x00),
    "J": (0x20, 0x40, 0x41, 0x3F, 0x01),
    "K": (0x7F, 0x08, 0x14, 0x22, 0x41),
    "L": (0x7F, 0x40, 0x40, 0x40, 0x40),
    "M": (0x7F, 0x02, 0x0C, 0x02, 0x7F),
    "N": (0x7F, 0x04, 0x08, 0x10, 0x7F),
    "O": (0x3E, 0x41, 0x41, 0x41, 0x3E),
    "P": (0x7F, 0x09, 0x09, 0x09, 0x06),
    "Q": (0x3E, 0x41, 0x51, 0x21, 0x5E),
    "R": (0x7F, 0x09, 0x19, 0x29, 0x46),
    "S": (0x46, 0x49, 0x49, 0x49, 0x31),
    "T": (0x01, 0x01, 0x7F, 0x01, 0x01),
    "U": (0x3F, 0x40, 0x40, 0x40, 0x3F),
    "V": (0x1F, 0x20, 0x40, 0x20, 0x1F),
    "W": (0x3F, 0x40, 0x38, 0x40, 0x3F),
    "X": (0x63, 0x14, 0x08, 0x14, 0x63),
    "Y": (0x07, 0x08, 0x70, 0x08, 0x07),
    "Z": (0x61, 0x51, 0x49, 0x45, 0x43),
    "a": (0x20, 0x54, 0x54, 0x54, 0x78),
    "b": (0x7F, 0x48, 0x44, 0x44, 0x38),
    "c": (0x38, 0x44, 0x44, 0x44, 0x20),
    "d": (0x38, 0x44, 0x44, 0x48, 0x7F),
    "e": (0x38, 0x54, 0x54, 0x54, 0x18),
    "f": (0x08, 0x7E, 0x09, 0x01, 0x02),
    "g": (0x0C, 0x52, 0x52, 0x52, 0x3E),
    "h": (0x7F, 0x08, 0x04, 0x04, 0x78),
    "i": (0x00, 0x44, 0x7D, 0x40, 0x00),
    "j": (0x20, 0x40, 0x44, 0x3D, 0x00),
    "k": (0x7F, 0x10, 0x28, 0x44, 0x00),
    "l": (0x00, 0x41, 0x7F, 0x40, 0x00),
    "m": (0x7C, 0x04, 0x18, 0x04, 0x78),
    "n": (0x7C, 0x08, 0x04, 0x04, 0x78),
    "o": (0x38, 0x44, 0x44, 0x44, 0x38),
    "p": (0x7C, 0x14, 0x14, 0x14, 0x08),
    "q": (0x08, 0x14, 0x14, 0x18, 0x7C),
    "r": (0x7C, 0x08, 0x04, 0x04, 0x08),
    "s": (0x48, 0x54, 0x54, 0x54, 0x20),
    "t": (0x04, 0x3F, 0x44, 0x40, 0x20),
    "u": (0x3C, 0x40, 0x40, 0x20, 0x7C),
    "v": (0x1C, 0x20, 0x40, 0x20, 0x1C),
    "w": (0x3C, 0x40, 0x30, 0x40, 0x3C),
    "x": (0x44, 0x28, 0x10, 0x28, 0x44),
    "y": (0x0C, 0x50, 0x50, 0x50, 0x3C),
    "z": (0x44, 0x64, 0x54, 0x4C, 0x44),
    ".": (0x00, 0x60, 0x60, 0x00, 0x00),
    ",": (0x00, 0x50, 0x30, 0x00, 0x00),
    "-": (0x08, 0x08, 0x08, 0x08, 0x08),
    "+": (0x08, 0x08, 0x3E, 0x08, 0x08),
    "%": (0x23, 0x13, 0x08, 0x64, 0x62),
    "(": (0x00, 0x1C, 0x22, 0x41, 0x00),
    ")": (0x00, 0x41, 0x22, 0x1C, 0x00),
    ":": (0x00, 0x36, 0x36, 0x00, 0x00),
    "/": (0x20, 0x10, 0x08, 0x04, 0x02),
}

_FALLBACK = (0x7F, 0x41, 0x41, 0x41, 0x7F)  # hollow box for unmapped chars


def text_size(text: str, scale: int = 1) -> tuple[int, int]:
    """(width, height) of the layout cell for `text`, without a trailing gap."""
    if not text:
        return (0, 0)
    return ((len(text) * ADVANCE - 1) * scale, GLYPH_H * scale)


def glyph_mask(ch: str) -> np.ndarray:
    """7x5 boolean ink mask for one character."""
    cols = GLYPHS.get(ch, _FALLBACK)
    mask = np.zeros((GLYPH_H, GLYPH_W), dtype=bool)
    for c, bits in enumerate(cols):
        for r in range(GLYPH_H):
            if (bits >> r) & 1:
                mask[r, c] = True
    return mask


def text_mask(text: str, scale: int = 1) -> np.ndarray:
    """Boolean ink mask of the whole layout cell."""
    w, h = text_size(text, scale)
    mask = np.zeros((h, w), dtype=bool)
    for i, ch in enumerate(text):
        g = glyph_mask(ch)
        if scale > 1:
            g = np.kron(g, np.ones((scale, scale), dtype=bool))
        x = i * ADVANCE * scale
        mask[:, x:x + GLYPH_W * scale] |= g
    return mask


def draw_text(canvas: np.ndarray, x: int, y: int, text: str, scale: int = 1,
              color: tuple[int, int, int] = (0, 0, 0),
              out_ink: np.ndarray | None = None) -> BoundingBox:
    """Draw `text` with its cell's top-left at (x, y); returns the cell as a bbox.

    Ink falling outside the canvas is clipped, but the returned bbox is the
    full layout cell, so callers should keep cells inside the canvas. When
    `out_ink` (H x W bool) is given, painted pixels are OR-ed into it.
    """
    mask = text_mask(text, scale)
    h, w = mask.shape
    ch, cw = canvas.shape[:2]
    x0, y0 = max(x, 0), max(y, 0)
    x1, y1 = min(x + w, cw), min(y + h, ch)
    if x1 > x0 and y1 > y0:
        sub = mask[y0 - y:y1 - y, x0 - x:x1 - x]
        canvas[y0:y1, x0:x1][sub] = color
        if out_ink is not None:
            out_ink[y0:y1, x0:x1] |= sub
    return BoundingBox(float(x), float(y), float(w), float(h))

"""WCAG relative luminance and contrast-ratio math, plus the small slice of
CSS color syntax the static scanner can resolve without a layout engine."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ValidationError

# Normal text needs 4.5:1; large text (>= 24 px, or >= 18.66 px bold) 3.0:1.
NORMAL_TEXT_MIN_RATIO = 4.5
LARGE_TEXT_MIN_RATIO = 3.0
LARGE_TEXT_PX = 24.0
LARGE_TEXT_BOLD_PX = 18.66

NAMED_COLORS = {
    "black": (0, 0, 0),
    "silver": (192, 192, 192),
    "gray": (128, 128, 128),
    "grey": (128, 128, 128),
    "white": (255, 255, 255),
    "maroon": (128, 0, 0),
    "red": (255, 0, 0),
    "purple": (128, 0, 128),
    "fuchsia": (255, 0, 255),
    "magenta": (255, 0, 255),
    "green": (0, 128, 0),
    "lime": (0, 255, 0),
    "olive": (128, 128, 0),
    "yellow": (255, 255, 0),
    "navy": (0, 0, 128),
    "blue": (0, 0, 255),
    "teal": (0, 128, 128),
    "aqua": (0, 255, 255),
    "cyan": (0, 255, 255),
    "orange": (255, 165, 0),
    "darkgray": (169, 169, 169),
    "darkgrey": (169, 169, 169),
    "lightgray": (211, 211, 211),
    "lightgrey": (211, 211, 211),
    "dimgray": (105, 105, 105),
    "dimgrey": (105, 105, 105),
    "whitesmoke": (245, 245, 245),
    "gainsboro": (220, 220, 220),
    "darkblue": (0, 0, 139),
    "darkgreen": (0, 100, 0),
    "darkred": (139, 0, 0),
    "brown": (165, 42, 42),
    "pink": (255, 192, 203),
    "gold": (255, 215, 0),
    "beige": (245, 245, 220),
    "ivory": (255, 255, 240),
}

_RGB_FN_RE = re.compile(
    r"rgba?\(\s*(\d{1,3})\s*,\s*(\d{1,3})\s*,\s*(\d{1,3})\s*(?:,\s*([\d.]+)\s*)?\)",
    re.IGNORECASE,
)


@dataclass(frozen=True)
class ColorPair:
    foreground: tuple[int, int, int]
    background: tuple[int, int, int]
    font_size_px: float = 16.0
    is_bold: bool = False

    def __post_init__(self):
        for channel in (*self.foreground, *self.background):
            if not 0 <= channel <= 255:
                raise ValidationError(f"channel {channel} outside [0, 255]")
        if self.font_size_px <= 0:
            raise ValidationError("font_size_px must be positive")


def parse_css_color(value: str) -> tuple[int, int, int] | None:
    """Resolve a CSS color literal to sRGB, or None when it needs cascade or
    alpha compositing (rgba with a<1, gradients, var(), currentcolor...)."""
    if not value:
        return None
    value = value.strip().lower()
    if value.startswith("#"):
        hexpart = value[1:]
        if len(hexpart) == 3 and re.fullmatch(r"[0-9a-f]{3}", hexpart):
            return tuple(int(c * 2, 16) for c in hexpart)  # type: ignore[return-value]
        if len(hexpart) == 6 and re.fullmatch(r"[0-9a-f]{6}", hexpart):
            return (
                int(hexpart[0:2], 16),
                int(hexpart[2:4], 16),
                int(hexpart[4:6], 16),
            )
        return None
    m = _RGB_FN_RE.fullmatch(value)
    if m:
        r, g, b = (int(m.group(i)) for i in (1, 2, 3))
        if max(r, g, b) > 255:
            return None
        alpha = m.group(4)
        if alpha is not None and float(alpha) < 1.0:
            return None
        return (r, g, b)
    return NAMED_COLORS.get(value)


def _linearize(channel: int) -> float:
    c = channel / 255.0
    return c / 12.92 if c <= 0.03928 else ((c + 0.055) / 1.055) ** 2.4


def relative_luminance(rgb: tuple[int, int, int]) -> float:
    """L = 0.2126 R' + 0.7152 G' + 0.0722 B' over linearized channels."""
    for channel in rgb:
        if not 0 <= channel <= 255:
            raise ValidationError(f"channel {channel} outside [0, 255]")
    r, g, b = rgb
    return 0.2126 * _linearize(r) + 0.7152 * _linearize(g) + 0.0722 * _linearize(b)


def contrast_ratio(pair: ColorPair) -> float:
    """(L_lighter + 0.05) / (L_darker + 0.05), in [1, 21]."""
    lf = relative_luminance(pair.foreground)
    lb = relative_luminance(pair.background)
    lighter, darker = max(lf, lb), min(lf, lb)
    return (lighter + 0.05) / (darker + 0.05)


def is_large_text(font_size_px: float, is_bold: bool) -> bool:
    return font_size_px >= LARGE_TEXT_PX or (
        is_bold and font_size_px >= LARGE_TEXT_BOLD_PX
    )


def required_ratio(pair: ColorPair) -> float:
    return (
        LARGE_TEXT_MIN_RATIO
        if is_large_text(pair.font_size_px, pair.is_bold)
        else NORMAL_TEXT_MIN_RATIO
    )


def violates_contrast(pair: ColorPair) -> bool:
    return contrast_ratio(pair) < required_ratio(pair)

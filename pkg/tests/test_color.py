"""Luminance / contrast math against independently computed oracle values."""

import pytest
from hypothesis import given, strategies as st

from a11yrepair.color import (
    ColorPair,
    contrast_ratio,
    is_large_text,
    parse_css_color,
    relative_luminance,
    required_ratio,
    violates_contrast,
)
from a11yrepair.errors import ValidationError

# Oracle: the linearization formula evaluated by hand/in a standalone script
# (c/12.92 if c<=0.03928 else ((c+0.055)/1.055)^2.4, channels normalized),
# cross-checked against an established contrast calculator.
ORACLE_LUMINANCE = [
    ((0, 0, 0), 0.0),
    ((255, 255, 255), 1.0),
    ((119, 119, 119), 0.184474994500441),
    ((255, 0, 0), 0.2126),
    ((0, 255, 0), 0.7152),
    ((0, 0, 255), 0.0722),
]


class TestRelativeLuminance:
    @pytest.mark.parametrize("rgb,expected", ORACLE_LUMINANCE)
    def test_oracle_values(self, rgb, expected):
        assert relative_luminance(rgb) == pytest.approx(expected, abs=1e-9)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValidationError):
            relative_luminance((0, 0, 256))
        with pytest.raises(ValidationError):
            relative_luminance((-1, 0, 0))

    @given(st.tuples(*[st.integers(0, 255)] * 3))
    def test_bounded(self, rgb):
        assert 0.0 <= relative_luminance(rgb) <= 1.0


class TestContrastRatio:
    def test_black_on_white_is_21(self):
        assert contrast_ratio(ColorPair((0, 0, 0), (255, 255, 255))) == pytest.approx(21.0)

    def test_self_contrast_is_exactly_one(self):
        assert contrast_ratio(ColorPair((119, 40, 7), (119, 40, 7))) == 1.0

    def test_gray_777_on_white(self):
        # Oracle: (1.0 + 0.05) / (0.184475 + 0.05) = 4.4781
        pair = ColorPair((119, 119, 119), (255, 255, 255), 16.0, False)
        assert contrast_ratio(pair) == pytest.approx(4.478, abs=0.01)
        assert violates_contrast(pair)

    def test_gray_777_passes_at_24px(self):
        pair = ColorPair((119, 119, 119), (255, 255, 255), 24.0, False)
        assert not violates_contrast(pair)

    @given(st.tuples(*[st.integers(0, 255)] * 3), st.tuples(*[st.integers(0, 255)] * 3))
    def test_symmetry_and_bounds(self, fg, bg):
        forward = contrast_ratio(ColorPair(fg, bg))
        backward = contrast_ratio(ColorPair(bg, fg))
        assert forward == pytest.approx(backward)
        assert 1.0 <= forward <= 21.0

    @given(st.integers(0, 254))
    def test_monotone_in_lighter_luminance(self, level):
        darker = ColorPair((level, level, level), (0, 0, 0))
        lighter = ColorPair((level + 1, level + 1, level + 1), (0, 0, 0))
        assert contrast_ratio(lighter) >= contrast_ratio(darker)


class TestThresholds:
    def test_large_text_rules(self):
        assert is_large_text(24.0, False)
        assert is_large_text(18.66, True)
        assert not is_large_text(18.66, False)
        assert not is_large_text(23.9, False)

    def test_required_ratio(self):
        assert required_ratio(ColorPair((0, 0, 0), (255, 255, 255), 16.0, False)) == 4.5
        assert required_ratio(ColorPair((0, 0, 0), (255, 255, 255), 24.0, False)) == 3.0
        assert required_ratio(ColorPair((0, 0, 0), (255, 255, 255), 19.0, True)) == 3.0

    def test_invalid_pair_rejected(self):
        with pytest.raises(ValidationError):
            ColorPair((0, 0, 300), (0, 0, 0))
        with pytest.raises(ValidationError):
            ColorPair((0, 0, 0), (0, 0, 0), font_size_px=0)


class TestColorParsing:
    @pytest.mark.parametrize(
        "value,expected",
        [
            ("#fff", (255, 255, 255)),
            ("#123456", (18, 52, 86)),
            ("rgb(1, 2, 3)", (1, 2, 3)),
            ("rgba(1,2,3,1)", (1, 2, 3)),
            ("white", (255, 255, 255)),
            ("Navy", (0, 0, 128)),
        ],
    )
    def test_parses(self, value, expected):
        assert parse_css_color(value) == expected

    @pytest.mark.parametrize(
        "value",
        ["", "#12", "rgba(0,0,0,0.5)", "var(--x)", "currentcolor",
         "linear-gradient(red, blue)", "rgb(300,0,0)", "notacolor"],
    )
    def test_unresolvable(self, value):
        assert parse_css_color(value) is None

"""
溯因解释测试
"""
import dataclasses

import numpy as np
import pytest

from src.axp.constants import COLOR_BACKGROUND, COLOR_CONNECTED, COLOR_NEGATIVE, COLOR_POSITIVE, LiteralOrder
from src.axp.exceptions import DuplicateVariable, InitialTermNotEntailed, TimeOutOfRange
from src.axp.schemas import Literal, Term
from src.axp.service import (
    audit_connectivity,
    background,
    compute_axp,
    explain_batch,
    explanation_from_export,
    explanation_to_export,
    initial_term,
    render_explanation,
    summarize,
    verify_axp,
)
from src.causal.schemas import Variable
from src.common.constants import Backend, Encoding
from src.snn.constants import Layer
from src.snn.encoding import encode
from src.snn.schemas import NeuronId
from src.utils.ppm import decode_netpbm
from tests.conftest import make_sequence


def lit(index: int, polarity: bool, t: int = 1) -> Literal:
    return Literal(Variable(NeuronId(Layer.INPUT, index), t), polarity)


TINY_AXP = (lit(0, True), lit(1, True), lit(2, False))


@pytest.fixture
def tiny_input(tiny_image):
    return encode(tiny_image, Encoding.THRESHOLDED, 1)


def test_initial_term_and_background(tiny_input):
    """测试完整项与背景取值"""
    term = initial_term(tiny_input, 1)
    assert term.literals == (lit(0, True), lit(1, True), lit(2, False), lit(3, True))
    fixed = background(tiny_input, 1)
    assert len(fixed) == 4
    assert all(v.time == 0 and value == 0 for v, value in fixed.items())


def test_duplicate_variable_rejected():
    """测试项中重复变量"""
    with pytest.raises(DuplicateVariable):
        Term((lit(0, True), lit(0, False)))


@pytest.mark.parametrize("backend", list(Backend))
@pytest.mark.parametrize("order_seed", [0, 1, 2, 3])
def test_tiny_axp_is_unique(tiny_arch, tiny_input, backend, order_seed):
    """测试唯一的溯因解释与文字顺序无关"""
    expl = compute_axp(tiny_arch, tiny_input, 1, backend, order_seed, audit=True)
    assert expl.term.literals == TINY_AXP
    assert expl.certificates.passed
    assert expl.solver_calls >= len(initial_term(tiny_input, 1))
    assert audit_connectivity(expl, tiny_arch) == []


def test_raster_order(tiny_arch, tiny_input):
    expl = compute_axp(tiny_arch, tiny_input, 1, order=LiteralOrder.RASTER)
    assert expl.term.literals == TINY_AXP
    assert expl.order is LiteralOrder.RASTER


@pytest.mark.parametrize("backend", list(Backend))
def test_ternary_axp(ternary_arch, backend):
    """测试三值网络：需要 i1 静默与 i3 抑制"""
    sequence = make_sequence([[1, 0, 1, 1]])
    expl = compute_axp(ternary_arch, sequence, 1, backend, audit=True)
    assert expl.term.literals == (lit(0, True), lit(1, False), lit(3, True))
    assert expl.certificates.passed


@pytest.mark.parametrize("backend", list(Backend))
def test_time_zero_is_empty(tiny_arch, tiny_input, backend):
    """测试 t = 0 时输出恒为静默，解释为空项"""
    expl = compute_axp(tiny_arch, tiny_input, 0, backend, audit=True)
    assert len(expl.term) == 0
    assert expl.explanandum.positive == ()
    assert expl.certificates.passed


def test_time_out_of_range(tiny_arch, tiny_input):
    with pytest.raises(TimeOutOfRange):
        compute_axp(tiny_arch, tiny_input, 2)


def test_certificates_only_after_audit(tiny_arch, tiny_input):
    """测试未复核的解释不带证书"""
    expl = compute_axp(tiny_arch, tiny_input, 1)
    assert expl.certificates is None
    assert expl.solver_calls == len(initial_term(tiny_input, 1)) + 1
    assert explanation_to_export(expl, tiny_arch).certificates is None


class NeverEntails:
    """任何项都不蕴含结论的会话"""
    calls = 0

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False

    def entails(self, term):
        self.calls += 1
        return False


def test_initial_term_must_entail(tiny_arch, tiny_input, monkeypatch):
    """测试完整输入项不蕴含输出时在删除前报错"""
    monkeypatch.setattr("src.axp.service.open_session", lambda *args, **kwargs: NeverEntails())
    with pytest.raises(InitialTermNotEntailed):
        compute_axp(tiny_arch, tiny_input, 1)


def test_verify_detects_broken_explanations(tiny_arch, tiny_input):
    """测试复核分别识别三个条件的失败"""
    expl = compute_axp(tiny_arch, tiny_input, 1)

    padded = dataclasses.replace(expl, term=Term(TINY_AXP + (lit(3, True),)))
    certificates = verify_axp(padded, tiny_arch, tiny_input)
    assert certificates.i and certificates.ii and not certificates.iii
    assert audit_connectivity(padded, tiny_arch) == [3]

    missing = dataclasses.replace(expl, term=Term(TINY_AXP[1:]))
    assert not verify_axp(missing, tiny_arch, tiny_input).ii

    flipped = dataclasses.replace(expl, term=Term((lit(0, True), lit(1, True), lit(2, True))))
    assert not verify_axp(flipped, tiny_arch, tiny_input).i


def test_export_roundtrip(tiny_arch, tiny_input):
    """测试导出后读回得到相同的项、观测与输入"""
    expl = compute_axp(tiny_arch, tiny_input, 1, image_index=4)
    export = explanation_to_export(expl, tiny_arch)
    assert [(item.x, item.y) for item in export.literals] == [(0, 0), (1, 0), (0, 1)]
    assert export.input == ["0000", "1101"]

    restored = explanation_from_export(export)
    assert restored.term == expl.term
    assert restored.explanandum == expl.explanandum
    assert restored.image_index == 4
    np.testing.assert_array_equal(restored.input.spikes, tiny_input.spikes)
    assert verify_axp(restored, tiny_arch, restored.input).passed


def test_render_explanation(tiny_arch, tiny_input):
    """测试渲染颜色：正文字红、负文字黄、无连接特征保持背景色"""
    expl = compute_axp(tiny_arch, tiny_input, 1)
    data = render_explanation(expl, tiny_arch)
    assert data.startswith(b"P6\n2 2\n255\n")
    assert render_explanation(expl, tiny_arch) == data

    pixels = decode_netpbm(data)
    assert tuple(pixels[0, 0]) == COLOR_POSITIVE
    assert tuple(pixels[0, 1]) == COLOR_POSITIVE
    assert tuple(pixels[1, 0]) == COLOR_NEGATIVE
    assert tuple(pixels[1, 1]) == COLOR_BACKGROUND

    empty = dataclasses.replace(expl, term=Term())
    pixels = decode_netpbm(render_explanation(empty, tiny_arch))
    assert tuple(pixels[0, 0]) == COLOR_CONNECTED
    assert tuple(pixels[1, 1]) == COLOR_BACKGROUND


def test_batch_and_summary(tiny_arch, tiny_image):
    """测试批量解释与汇总统计"""
    images = [(0, tiny_image), (1, tiny_image)]
    explanations = explain_batch(
        tiny_arch, images, 1, Backend.CNF_SAT, 0, LiteralOrder.SHUFFLE,
        Encoding.THRESHOLDED, 1, 0, 0.5, workers=1,
    )
    assert [e.image_index for e in explanations] == [0, 1]
    assert all(e.term.literals == TINY_AXP for e in explanations)

    summary = summarize(explanations, tiny_arch)
    assert summary.instances == 2
    assert summary.mean_length == 3.0
    assert summary.mean_length_pct == pytest.approx(75.0)
    assert summary.zero_connection_violations == 0
    assert summary.certificates_passed == 0

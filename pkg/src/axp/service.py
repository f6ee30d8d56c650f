"""
溯因解释 - 业务逻辑层
删除式线性搜索求子集极小的溯因解释，并复核其三个条件
"""
import time
from concurrent.futures import ProcessPoolExecutor
from itertools import combinations

import numpy as np

from src.axp.constants import (
    BRUTE_FORCE_MAX_LITERALS,
    COLOR_BACKGROUND,
    COLOR_CONNECTED,
    COLOR_NEGATIVE,
    COLOR_POSITIVE,
    LiteralOrder,
)
from src.axp.exceptions import InitialTermNotEntailed, TimeOutOfRange
from src.axp.schemas import (
    Certificates,
    Explanandum,
    Explanation,
    ExplanationExport,
    ExplanationSummary,
    Literal,
    LiteralExport,
    Term,
    output_neuron,
)
from src.causal.schemas import Variable
from src.causal.service import build_bcm
from src.common.config import settings
from src.common.constants import Backend, Encoding
from src.snn.constants import Layer
from src.snn.encoding import encode
from src.snn.schemas import DynamicsTrace, Image, InputSequence, NetworkArchitecture, NeuronId
from src.snn.service import simulate
from src.solver.service import EntailmentSession, open_session
from src.utils.logger import get_logger
from src.utils.ppm import encode_pgm, encode_ppm
from src.utils.rng import substream

logger = get_logger("axp")


# ========== 项与解释对象 ==========

def _check_time(t: int, t_end: int) -> None:
    if not 0 <= t <= t_end:
        raise TimeOutOfRange(t, t_end)


def initial_term(input: InputSequence, t: int) -> Term:
    """
    完整项 λ_init：时刻 t 每个输入一个文字，极性等于实际输入

    Raises:
        TimeOutOfRange: t 不在 0..t_end
    """
    _check_time(t, input.t_end)
    return Term(
        tuple(
            Literal(Variable(NeuronId(Layer.INPUT, j), t), bool(bit))
            for j, bit in enumerate(input.at(t))
        )
    )


def explanandum_of(trace: DynamicsTrace, t: int) -> Explanandum:
    """时刻 t 发放的输出神经元为正，其余为负"""
    _check_time(t, trace.t_end)
    row = trace.output_firing[t]
    return Explanandum(
        t=t,
        positive=tuple(output_neuron(int(z)) for z in np.flatnonzero(row == 1)),
        negative=tuple(output_neuron(int(z)) for z in np.flatnonzero(row == 0)),
    )


def background(input: InputSequence, t: int) -> dict[Variable, int]:
    """时刻 t 以外的输入固定为实际取值"""
    return {
        Variable(NeuronId(Layer.INPUT, j), s): int(input.spikes[s, j])
        for s in range(input.t_end + 1)
        if s != t
        for j in range(input.input_count)
    }


def _open(arch: NetworkArchitecture, input: InputSequence, t: int, backend: Backend) -> tuple[EntailmentSession, Explanandum]:
    trace = simulate(arch, input)
    explanandum = explanandum_of(trace, t)
    model = build_bcm(arch, trace)
    session = open_session(model, background(input, t), explanandum.conclusion(), backend)
    return session, explanandum


def literal_order(count: int, order: LiteralOrder, order_seed: int) -> list[int]:
    if order is LiteralOrder.RASTER:
        return list(range(count))
    return [int(i) for i in substream(order_seed).permutation(count)]


# ========== 计算 ==========

def compute_axp(
    arch: NetworkArchitecture,
    input: InputSequence,
    t: int,
    backend: Backend = Backend.CNF_SAT,
    order_seed: int = 0,
    order: LiteralOrder = LiteralOrder.SHUFFLE,
    audit: bool = False,
    image_index: int | None = None,
) -> Explanation:
    """
    删除式线性搜索：依次尝试删除每个文字，删除后仍蕴含输出则保留删除

    Args:
        arch: 网络结构
        input: 实际输入序列
        t: 解释时刻
        backend: 蕴含检查后端
        order_seed: 文字顺序种子
        order: shuffle 或 raster
        audit: 结束后再做一次证书复核；否则 certificates 为 None

    Raises:
        TimeOutOfRange: t 越界
        InitialTermNotEntailed: 完整输入项不蕴含输出
        SolverException: 求解器失败（不返回部分结果）
    """
    start_time = time.perf_counter()
    lam = initial_term(input, t)
    session, explanandum = _open(arch, input, t, backend)

    with session:
        if not session.entails(lam.literals):
            raise InitialTermNotEntailed(t)
        kept = [True] * len(lam)
        for position in literal_order(len(lam), order, order_seed):
            kept[position] = False
            candidate = [lit for lit, keep in zip(lam, kept) if keep]
            if not session.entails(candidate):
                kept[position] = True
        term = Term(tuple(lit for lit, keep in zip(lam, kept) if keep))
        calls = session.calls

        certificates = None
        if audit:
            certificates = _certify(term, input, t, session)
            calls = session.calls

    elapsed = (time.perf_counter() - start_time) * 1000
    logger.info(
        f"AXp t={t} 后端={backend.value}: {len(term)}/{len(lam)} 个文字, "
        f"{calls} 次查询, 耗时={elapsed:.1f}ms"
    )
    return Explanation(
        term=term,
        explanandum=explanandum,
        backend=backend,
        certificates=certificates,
        order_seed=order_seed,
        order=order,
        solver_calls=calls,
        wall_time_ms=elapsed,
        input=input,
        image_index=image_index,
    )


def _certify(term: Term, input: InputSequence, t: int, session: EntailmentSession) -> Certificates:
    # (i) 实际输入满足项
    cond_i = all(
        literal.variable.time == t
        and literal.variable.neuron.layer is Layer.INPUT
        and int(input.spikes[t, literal.variable.neuron.index]) == int(literal.polarity)
        for literal in term
    )
    # (ii) 项蕴含输出
    cond_ii = session.entails(term)
    # (iii) 删除任意一个文字都不再蕴含
    cond_iii = all(not session.entails(term.without(k)) for k in range(len(term)))
    if cond_iii and 0 < len(term) <= BRUTE_FORCE_MAX_LITERALS:
        cond_iii = not any(
            session.entails(subset)
            for size in range(len(term) - 1)
            for subset in combinations(term.literals, size)
        )
    return Certificates(i=cond_i, ii=cond_ii, iii=cond_iii)


def verify_axp(expl: Explanation, arch: NetworkArchitecture, input: InputSequence) -> Certificates:
    """
    独立复核解释的三个条件

    (i) 直接对照输入；(ii) 一次蕴含查询；(iii) 逐个删除文字，文字数不超过 12 时再枚举全部子集
    """
    t = expl.explanandum.t
    session, _ = _open(arch, input, t, expl.backend)
    with session:
        return _certify(expl.term, input, t, session)


def audit_connectivity(expl: Explanation, arch: NetworkArchitecture) -> list[int]:
    """项中与隐藏层没有任何非零连接的输入特征"""
    connected = arch.connected_inputs
    return [index for index in expl.features if not connected[index]]


# ========== 批量与汇总 ==========

def _explain_one(
    arch: NetworkArchitecture,
    image: Image,
    index: int,
    t: int,
    backend: Backend,
    order_seed: int,
    order: LiteralOrder,
    encoding: Encoding,
    t_end: int,
    seed: int,
    theta: float,
) -> Explanation:
    sequence = encode(image, encoding, t_end, seed, index, theta)
    return compute_axp(arch, sequence, t, backend, order_seed, order, image_index=index)


def explain_batch(
    arch: NetworkArchitecture,
    images: list[tuple[int, Image]],
    t: int,
    backend: Backend,
    order_seed: int,
    order: LiteralOrder,
    encoding: Encoding,
    t_end: int,
    seed: int,
    theta: float,
    workers: int | None = None,
) -> list[Explanation]:
    """
    多个实例并行解释，每个工作进程持有自己的求解器会话

    Args:
        images: (图像索引, 图像) 列表
    """
    workers = min(workers or settings.MAX_WORKERS, max(len(images), 1))
    args = [
        (arch, image, index, t, backend, order_seed, order, encoding, t_end, seed, theta)
        for index, image in images
    ]
    if workers == 1:
        return [_explain_one(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(_explain_one, *a) for a in args]
        return [f.result() for f in futures]


def summarize(explanations: list[Explanation], arch: NetworkArchitecture) -> ExplanationSummary:
    """平均搜索时间、平均长度及其占输入特征的比例"""
    count = len(explanations)
    lengths = [len(e.term) for e in explanations]
    mean_length = float(np.mean(lengths)) if count else 0.0
    return ExplanationSummary(
        backend=explanations[0].backend if count else Backend.CNF_SAT,
        instances=count,
        input_count=arch.input_count,
        mean_search_time_ms=float(np.mean([e.wall_time_ms for e in explanations])) if count else 0.0,
        mean_length=mean_length,
        mean_length_pct=100.0 * mean_length / arch.input_count,
        certificates_passed=sum(
            e.certificates is not None and e.certificates.passed for e in explanations
        ),
        zero_connection_violations=sum(len(audit_connectivity(e, arch)) for e in explanations),
    )


# ========== 导出与渲染 ==========

def _bits(row: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in row)


def explanation_to_export(expl: Explanation, arch: NetworkArchitecture) -> ExplanationExport:
    literals = []
    for literal in expl.term:
        index = literal.variable.neuron.index
        x, y = arch.feature_xy(index)
        literals.append(
            LiteralExport(x=x, y=y, time=literal.variable.time, polarity=literal.polarity, index=index)
        )
    return ExplanationExport(
        t=expl.explanandum.t,
        literals=literals,
        certificates=expl.certificates,
        backend=expl.backend,
        order_seed=expl.order_seed,
        order=expl.order,
        solver_calls=expl.solver_calls,
        wall_time_ms=round(expl.wall_time_ms, 3),
        positive_outputs=[c.index for c in expl.explanandum.positive],
        negative_outputs=[c.index for c in expl.explanandum.negative],
        image_index=expl.image_index,
        input=[_bits(row) for row in expl.input.spikes],
    )


def explanation_from_export(export: ExplanationExport) -> Explanation:
    spikes = [[int(c) for c in row] for row in export.input]
    term = Term(
        tuple(
            Literal(Variable(NeuronId(Layer.INPUT, item.index), item.time), item.polarity)
            for item in export.literals
        )
    )
    return Explanation(
        term=term,
        explanandum=Explanandum(
            t=export.t,
            positive=tuple(output_neuron(z) for z in export.positive_outputs),
            negative=tuple(output_neuron(z) for z in export.negative_outputs),
        ),
        backend=export.backend,
        certificates=export.certificates,
        order_seed=export.order_seed,
        order=export.order,
        solver_calls=export.solver_calls,
        wall_time_ms=export.wall_time_ms,
        input=InputSequence(t_end=len(spikes) - 1, spikes=spikes),
        image_index=export.image_index,
    )


def connection_canvas(arch: NetworkArchitecture) -> np.ndarray:
    """黑色背景，与隐藏层有非零连接的特征涂绿"""
    width, height = arch.image_shape
    canvas = np.zeros((height, width, 3), dtype=np.uint8)
    canvas[:, :] = COLOR_BACKGROUND
    mask = arch.connected_inputs.reshape(height, width)
    canvas[mask] = COLOR_CONNECTED
    return canvas


def render_explanation(expl: Explanation, arch: NetworkArchitecture) -> bytes:
    """P6 图像：绿 = 有连接，红 = 正文字，黄 = 负文字"""
    canvas = connection_canvas(arch)
    for literal in expl.term:
        x, y = arch.feature_xy(literal.variable.neuron.index)
        canvas[y, x] = COLOR_POSITIVE if literal.polarity else COLOR_NEGATIVE
    return encode_ppm(canvas)


def render_image(image: Image) -> bytes:
    """P5 灰度图"""
    pixels = np.clip(np.round(image.intensities * 255.0), 0, 255).astype(np.uint8)
    return encode_pgm(pixels.reshape(image.height, image.width))

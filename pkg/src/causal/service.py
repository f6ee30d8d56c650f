"""
因果模型 - 业务逻辑层
构建二值因果模型、布尔表达式求值与化简、因果图以及兼容性检查
"""
from collections.abc import Iterable, Mapping
from itertools import combinations

import networkx as nx
import numpy as np

from src.causal.constants import SUBSET_FORM_MAX_FANIN
from src.causal.exceptions import SubsetFormUnavailable, UnboundVariable
from src.causal.schemas import (
    FALSE,
    TRUE,
    And,
    BoolExpr,
    CausalModel,
    CausalModelExport,
    Const,
    Equation,
    EquationExport,
    Iff,
    Implies,
    Interpretation,
    Not,
    Or,
    Threshold,
    Var,
    Variable,
    make_threshold,
)
from src.common.constants import WeightScale
from src.snn.constants import Layer
from src.snn.schemas import DynamicsTrace, NetworkArchitecture, NeuronId
from src.snn.service import check_trace_shape
from src.utils.logger import get_logger

logger = get_logger("causal")


# ========== 构建 ==========

def build_bcm(arch: NetworkArchitecture, trace: DynamicsTrace) -> CausalModel:
    """
    由网络结构与一次运行构建二值因果模型

    方程以阈值条件保存；上一时刻膜电位作为常量从轨迹读取

    Raises:
        DimensionMismatch: 轨迹与网络不一致
    """
    check_trace_shape(arch, trace)
    times = range(trace.t_end + 1)

    exogenous = tuple(Variable(x, t) for t in times for x in arch.neurons(Layer.INPUT))
    endogenous = tuple(Variable(x, t) for t in times for x in arch.non_input_neurons())

    predecessors = {x: arch.predecessors(x) for x in arch.non_input_neurons()}
    equations: dict[Variable, Equation] = {}
    for variable in endogenous:
        x, t = variable
        if t == 0:
            equations[variable] = Equation(target=variable, previous=None)
            continue
        positive, negative = predecessors[x]
        equations[variable] = Equation(
            target=variable,
            previous=Variable(x, t - 1),
            positives=tuple(Variable(q, t) for q in positive),
            negatives=tuple(Variable(q, t) for q in negative),
            threshold=arch.threshold(x),
            carried=trace.potential(t - 1, x),
            fired_prev=trace.firing(t - 1, x),
        )

    logger.debug(f"因果模型: {len(exogenous)} 个外生变量, {len(endogenous)} 个内生变量")
    return CausalModel(
        t_end=trace.t_end,
        weight_scale=arch.weight_scale,
        exogenous=exogenous,
        endogenous=endogenous,
        equations=equations,
    )


def interpretation_from_trace(arch: NetworkArchitecture, trace: DynamicsTrace) -> Interpretation:
    """I(p_{X,t}) := F_X(t)"""
    neurons = arch.neurons(Layer.INPUT) + arch.non_input_neurons()
    return {
        Variable(x, t): trace.firing(t, x)
        for t in range(trace.t_end + 1)
        for x in neurons
    }


# ========== 求值与化简 ==========

def variables(expr: BoolExpr) -> set[Variable]:
    """表达式中出现的变量"""
    match expr:
        case Const():
            return set()
        case Var(var):
            return {var}
        case Not(arg):
            return variables(arg)
        case And(args) | Or(args):
            return set().union(*(variables(a) for a in args))
        case Implies(lhs, rhs) | Iff(lhs, rhs):
            return variables(lhs) | variables(rhs)
        case Threshold(positives, negatives, _):
            return set(positives) | set(negatives)
    raise TypeError(f"未知的表达式节点: {expr!r}")


def _lookup(interpretation: Mapping[Variable, int], var: Variable) -> int:
    try:
        return interpretation[var]
    except KeyError:
        raise UnboundVariable(var) from None


def evaluate(expr: BoolExpr, interpretation: Mapping[Variable, int]) -> int:
    """
    在解释下求值，返回 0/1

    Raises:
        UnboundVariable: 解释缺少表达式中的变量
    """
    match expr:
        case Const(value):
            return int(value)
        case Var(var):
            return int(bool(_lookup(interpretation, var)))
        case Not(arg):
            return 1 - evaluate(arg, interpretation)
        case And(args):
            return int(all(evaluate(a, interpretation) for a in args))
        case Or(args):
            return int(any(evaluate(a, interpretation) for a in args))
        case Implies(lhs, rhs):
            return int(not evaluate(lhs, interpretation) or bool(evaluate(rhs, interpretation)))
        case Iff(lhs, rhs):
            return int(evaluate(lhs, interpretation) == evaluate(rhs, interpretation))
        case Threshold(positives, negatives, bound):
            total = sum(_lookup(interpretation, v) for v in positives)
            total -= sum(_lookup(interpretation, v) for v in negatives)
            return int(total >= bound)
    raise TypeError(f"未知的表达式节点: {expr!r}")


def _negate(expr: BoolExpr) -> BoolExpr:
    if isinstance(expr, Const):
        return Const(not expr.value)
    if isinstance(expr, Not):
        return expr.arg
    return Not(expr)


def _junction(args: Iterable[BoolExpr], unit: Const, zero: Const, node: type) -> BoolExpr:
    kept: list[BoolExpr] = []
    for arg in args:
        if arg == zero:
            return zero
        if arg != unit and arg not in kept:
            kept.append(arg)
    if not kept:
        return unit
    if len(kept) == 1:
        return kept[0]
    return node(tuple(kept))


def simplify(expr: BoolExpr, partial: Mapping[Variable, int] | None = None) -> BoolExpr:
    """
    在部分赋值下做常量折叠

    Args:
        expr: 表达式
        partial: 已知变量取值（可为空）
    """
    partial = partial or {}
    match expr:
        case Const():
            return expr
        case Var(var):
            return Const(bool(partial[var])) if var in partial else expr
        case Not(arg):
            return _negate(simplify(arg, partial))
        case And(args):
            return _junction((simplify(a, partial) for a in args), TRUE, FALSE, And)
        case Or(args):
            return _junction((simplify(a, partial) for a in args), FALSE, TRUE, Or)
        case Implies(lhs, rhs):
            left, right = simplify(lhs, partial), simplify(rhs, partial)
            if left == FALSE or right == TRUE:
                return TRUE
            if left == TRUE:
                return right
            if right == FALSE:
                return _negate(left)
            return Implies(left, right)
        case Iff(lhs, rhs):
            left, right = simplify(lhs, partial), simplify(rhs, partial)
            if isinstance(left, Const) and isinstance(right, Const):
                return Const(left.value == right.value)
            for const, other in ((left, right), (right, left)):
                if isinstance(const, Const):
                    return other if const.value else _negate(other)
            return Iff(left, right)
        case Threshold(positives, negatives, bound):
            bound -= sum(partial[v] for v in positives if v in partial)
            bound += sum(partial[v] for v in negatives if v in partial)
            return make_threshold(
                tuple(v for v in positives if v not in partial),
                tuple(v for v in negatives if v not in partial),
                bound,
            )
    raise TypeError(f"未知的表达式节点: {expr!r}")


# ========== 因果图 ==========

def causal_graph(model: CausalModel) -> nx.DiGraph:
    """
    因果图：q 出现在 ω_p 中时连边 q → p
    """
    graph = nx.DiGraph()
    graph.add_nodes_from(model.variables)
    for target, equation in model.equations.items():
        graph.add_edges_from((source, target) for source in variables(equation.omega))
    return graph


def cone_of_influence(model: CausalModel, roots: Iterable[Variable]) -> set[Variable]:
    """roots 及其在因果图中的全部祖先"""
    graph = causal_graph(model)
    cone = set(roots)
    for root in list(cone):
        cone |= nx.ancestors(graph, root)
    return cone


def propagate(model: CausalModel, exogenous: Mapping[Variable, int]) -> Interpretation:
    """
    给定外生变量取值，沿因果图拓扑序求出唯一的完整解释
    """
    interpretation: Interpretation = {v: int(exogenous[v]) for v in model.exogenous}
    for variable in nx.topological_sort(causal_graph(model)):
        if variable in model.equations:
            interpretation[variable] = evaluate(model.equations[variable].omega, interpretation)
    return interpretation


# ========== 兼容性检查 ==========

_LAYER_ORDER = {Layer.INPUT: 0, Layer.HIDDEN: 1, Layer.OUTPUT: 2}


def _recurrence_mismatches(
    potential: np.ndarray,
    firing: np.ndarray,
    source_firing: np.ndarray,
    weights: np.ndarray,
    layer: Layer,
) -> set[Variable]:
    """A(X,0) = 0，A(X,t) = A(X,t-1)·(1 - F_X(t-1)) + Σ W·F(t)"""
    expected = np.zeros_like(potential)
    expected[1:] = potential[:-1] * (1 - firing[:-1]) + source_firing[1:] @ weights.T
    rows, cols = np.nonzero(expected != potential)
    return {Variable(NeuronId(layer, int(j)), int(t)) for t, j in zip(rows, cols)}


def potential_violations(arch: NetworkArchitecture, trace: DynamicsTrace) -> set[Variable]:
    """轨迹中膜电位不满足积分递推的 (神经元, 时刻)"""
    check_trace_shape(arch, trace)
    hidden_firing = trace.hidden_firing.astype(np.int64)
    return _recurrence_mismatches(
        trace.hidden_potential, hidden_firing, trace.input_firing.astype(np.int64),
        arch.hidden_weights, Layer.HIDDEN,
    ) | _recurrence_mismatches(
        trace.output_potential, trace.output_firing.astype(np.int64), hidden_firing,
        arch.output_weights, Layer.OUTPUT,
    )


def find_violations(arch: NetworkArchitecture, trace: DynamicsTrace) -> list[Variable]:
    """
    返回轨迹不满足方程或膜电位递推的全部内生变量（按时间、层、索引排序）

    方程从轨迹读取上一时刻电位，因此两项检查合起来才等价于重新仿真
    """
    model = build_bcm(arch, trace)
    interpretation = interpretation_from_trace(arch, trace)
    broken = {
        variable
        for variable, equation in model.equations.items()
        if evaluate(equation.omega, interpretation) != interpretation[variable]
    }
    violations = sorted(
        broken | potential_violations(arch, trace),
        key=lambda v: (v.time, _LAYER_ORDER[v.neuron.layer], v.neuron.index),
    )
    if violations:
        logger.warning(f"轨迹与因果模型不兼容: {len(violations)} 处, 首个 {violations[0]}")
    return violations


def check_compatibility(arch: NetworkArchitecture, trace: DynamicsTrace) -> bool:
    """轨迹是否满足全部方程与膜电位递推"""
    return not find_violations(arch, trace)


# ========== 子集析取展开 ==========

def _subset_disjunction(candidates: tuple[Variable, ...], minimum: int) -> BoolExpr:
    """⋁_{Ω ⊆ candidates, |Ω| ≥ minimum} ⋀_{q ∈ Ω} q，不做任何化简"""
    terms = [
        And(tuple(Var(q) for q in subset))
        for size in range(max(minimum, 0), len(candidates) + 1)
        for subset in combinations(candidates, size)
    ]
    return Or(tuple(terms))


def subset_form(model: CausalModel, variable: Variable) -> BoolExpr:
    """
    方程的逐子集析取展开（仅用作阈值形式的等价性对照）

    Raises:
        SubsetFormUnavailable: 三值模型或扇入过大
    """
    equation = model.equations[variable]
    if equation.previous is None:
        return Iff(Var(variable), FALSE)
    if model.weight_scale is not WeightScale.BINARY or equation.negatives:
        raise SubsetFormUnavailable("子集析取展开只适用于二值权重")
    if len(equation.positives) > SUBSET_FORM_MAX_FANIN:
        raise SubsetFormUnavailable(
            f"扇入 {len(equation.positives)} 超过上限 {SUBSET_FORM_MAX_FANIN}"
        )
    prev = Var(equation.previous)
    silent = _subset_disjunction(equation.positives, equation.threshold - equation.carried)
    fired = _subset_disjunction(equation.positives, equation.threshold)
    return Iff(Var(variable), And((Implies(Not(prev), silent), Implies(prev, fired))))


# ========== 导出 ==========

def model_to_export(model: CausalModel) -> CausalModelExport:
    def names(vs: Iterable[Variable]) -> list[str]:
        return [str(v) for v in vs]

    return CausalModelExport(
        t_end=model.t_end,
        weight_scale=model.weight_scale,
        exogenous=names(model.exogenous),
        endogenous=names(model.endogenous),
        equations=[
            EquationExport(
                target=str(eq.target),
                previous=str(eq.previous) if eq.previous is not None else None,
                positives=names(eq.positives),
                negatives=names(eq.negatives),
                threshold=eq.threshold,
                carried=eq.carried,
                fired_prev=eq.fired_prev,
            )
            for eq in (model.equations[v] for v in model.endogenous)
        ],
    )


def model_from_export(export: CausalModelExport) -> CausalModel:
    def parse(names: list[str]) -> tuple[Variable, ...]:
        return tuple(Variable.parse(n) for n in names)

    equations = {}
    for item in export.equations:
        target = Variable.parse(item.target)
        equations[target] = Equation(
            target=target,
            previous=Variable.parse(item.previous) if item.previous else None,
            positives=parse(item.positives),
            negatives=parse(item.negatives),
            threshold=item.threshold,
            carried=item.carried,
            fired_prev=item.fired_prev,
        )
    return CausalModel(
        t_end=export.t_end,
        weight_scale=export.weight_scale,
        exogenous=parse(export.exogenous),
        endogenous=parse(export.endogenous),
        equations=equations,
    )

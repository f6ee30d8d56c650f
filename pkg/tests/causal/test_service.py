"""
二值因果模型测试
"""
import dataclasses
from itertools import product

import networkx as nx
import numpy as np
import pytest

from src.causal.exceptions import SubsetFormUnavailable, UnboundVariable
from src.causal.schemas import FALSE, TRUE, And, Iff, Not, Threshold, Var, Variable
from src.causal.service import (
    build_bcm,
    causal_graph,
    check_compatibility,
    cone_of_influence,
    evaluate,
    find_violations,
    interpretation_from_trace,
    model_from_export,
    model_to_export,
    potential_violations,
    propagate,
    simplify,
    subset_form,
    variables,
)
from src.snn.constants import Layer
from src.snn.schemas import NeuronId
from src.snn.service import simulate
from tests.conftest import make_arch, make_sequence


def v(name: str) -> Variable:
    return Variable.parse(name)


@pytest.fixture
def tiny_run(tiny_arch):
    sequence = make_sequence([[1, 1, 0, 1], [0, 1, 1, 0], [1, 0, 0, 0]])
    return tiny_arch, simulate(tiny_arch, sequence)


# ========== 构建 ==========

def test_build_bcm_shapes(tiny_run):
    """测试变量划分与 t = 0 的方程"""
    arch, trace = tiny_run
    model = build_bcm(arch, trace)

    assert len(model.exogenous) == 4 * 4
    assert len(model.endogenous) == 4 * 4
    assert all(variable.exogenous for variable in model.exogenous)
    assert model.equations[v("h0@0")].omega == FALSE
    assert model.equations[v("h0@2")].previous == v("h0@1")


def test_carried_constant_comes_from_trace(chain_arch):
    """测试方程中的运行常量取自上一时刻的电位与发放位"""
    trace = simulate(chain_arch, make_sequence([[1], [1], [1]]))
    model = build_bcm(chain_arch, trace)

    assert model.equations[v("h0@2")].slice_constant == (1, 0)
    assert model.equations[v("h0@3")].slice_constant == (2, 1)
    assert model.equations[v("h0@2")].silent_branch == Threshold((v("i0@2"),), (), 1)


def test_simulated_trace_is_compatible(tiny_run, ternary_arch):
    """测试仿真轨迹与因果模型兼容"""
    arch, trace = tiny_run
    assert check_compatibility(arch, trace)

    ternary_trace = simulate(ternary_arch, make_sequence([[1, 0, 1, 1], [0, 1, 1, 0]]))
    assert check_compatibility(ternary_arch, ternary_trace)


def test_flipped_bit_is_reported(tiny_run):
    """测试翻转一个发放位后报告对应坐标"""
    arch, trace = tiny_run
    hidden = trace.hidden_firing.copy()
    hidden[1, 0] = 1 - hidden[1, 0]
    corrupted = trace.model_copy(update={"hidden_firing": hidden})

    violations = find_violations(arch, corrupted)
    assert v("h0@1") in violations
    assert not check_compatibility(arch, corrupted)


def test_doctored_potentials_are_reported(chain_arch):
    """测试发放位自洽但膜电位不满足积分递推的轨迹被拒绝"""
    trace = simulate(chain_arch, make_sequence([[1], [1], [1]]))
    assert trace.hidden_firing[:, 0].tolist() == [0, 0, 1, 0]

    doctored = trace.model_copy(
        update={
            "hidden_firing": np.array([[0], [0], [0], [1]]),
            "hidden_potential": np.array([[0], [0], [1], [2]]),
            "output_firing": np.array([[0], [0], [0], [1]]),
            "output_potential": np.array([[0], [0], [0], [1]]),
        }
    )
    assert potential_violations(chain_arch, doctored) == {v("h0@1")}
    assert find_violations(chain_arch, doctored) == [v("h0@1")]
    assert not check_compatibility(chain_arch, doctored)
    assert potential_violations(chain_arch, trace) == set()


def test_propagate_reproduces_trace(tiny_run):
    """测试由外生变量沿拓扑序传播得到轨迹本身"""
    arch, trace = tiny_run
    model = build_bcm(arch, trace)
    actual = interpretation_from_trace(arch, trace)
    exogenous = {variable: actual[variable] for variable in model.exogenous}
    assert propagate(model, exogenous) == actual


# ========== 阈值形式与子集析取展开等价 ==========

def test_threshold_form_equals_subset_form(chain_arch, tiny_arch):
    """测试每个方程在其全部变量的所有赋值下与子集析取展开取值相同"""
    runs = [
        (chain_arch, make_sequence([[1], [1], [0], [1]])),
        (tiny_arch, make_sequence([[1, 1, 0, 1], [0, 1, 1, 0], [1, 1, 1, 1]])),
    ]
    for arch, sequence in runs:
        model = build_bcm(arch, simulate(arch, sequence))
        for target, equation in model.equations.items():
            threshold_form = equation.as_expr()
            expanded = subset_form(model, target)
            scope = sorted(variables(threshold_form) | variables(expanded))
            for bits in product((0, 1), repeat=len(scope)):
                assignment = dict(zip(scope, bits))
                assert evaluate(threshold_form, assignment) == evaluate(expanded, assignment)


FANINS = [1, 2, 3, 4, 5, *(pytest.param(n, marks=pytest.mark.slow) for n in range(6, 11))]


@pytest.mark.parametrize("fan_in", FANINS)
def test_subset_form_with_carried_constants(fan_in):
    """测试扇入至多 10 时，对每个阈值与每个可能的携带电位，阈值形式与子集析取展开等价"""
    target = v("h0@1")
    for threshold in sorted({1, (fan_in + 1) // 2, fan_in, fan_in + 1}):
        arch = make_arch(hidden=[[1] * fan_in], output=[[1]], thresholds=[threshold, 1])
        model = build_bcm(arch, simulate(arch, make_sequence([[0] * fan_in])))
        for carried in range(threshold + 1):
            equation = dataclasses.replace(model.equations[target], carried=carried)
            variant = dataclasses.replace(model, equations={**model.equations, target: equation})
            expanded = subset_form(variant, target)
            scope = [equation.previous, *equation.positives]
            for bits in product((0, 1), repeat=len(scope)):
                assignment = dict(zip(scope, bits))
                assert evaluate(equation.omega, assignment) == evaluate(expanded.rhs, assignment)


def test_subset_form_rejects_ternary(ternary_arch):
    """测试三值模型不提供子集析取展开"""
    model = build_bcm(ternary_arch, simulate(ternary_arch, make_sequence([[1, 1, 1, 1]])))
    with pytest.raises(SubsetFormUnavailable):
        subset_form(model, v("h0@1"))


# ========== 因果图 ==========

def test_causal_graph_edges(tiny_run):
    """测试前驱连边与自身历史连边，且图无环"""
    arch, trace = tiny_run
    graph = causal_graph(build_bcm(arch, trace))

    assert graph.has_edge(v("i0@1"), v("h0@1"))
    assert graph.has_edge(v("h0@0"), v("h0@1"))
    assert graph.has_edge(v("h1@2"), v("o1@2"))
    assert not graph.has_edge(v("i3@1"), v("h0@1"))
    assert nx.is_directed_acyclic_graph(graph)


def test_cone_of_influence(tiny_run):
    """测试影响锥只包含祖先"""
    arch, trace = tiny_run
    cone = cone_of_influence(build_bcm(arch, trace), [v("o1@1")])
    assert {v("o1@1"), v("h1@1"), v("i2@1"), v("h1@0"), v("o1@0")} <= cone
    assert v("i0@1") not in cone
    assert v("i3@1") not in cone


# ========== 表达式 ==========

def test_simplify_folds_thresholds():
    """测试部分赋值下的阈值折叠"""
    a, b = v("i0@1"), v("i1@1")
    expr = Threshold((a, b), (), 2)
    assert simplify(expr, {a: 1}) == Threshold((b,), (), 1)
    assert simplify(expr, {a: 0}) == FALSE
    assert simplify(Iff(Var(a), Not(Var(b))), {a: 1, b: 0}) == TRUE
    assert simplify(And((Var(a), TRUE)), {}) == Var(a)


def test_evaluate_unbound_variable():
    """测试缺少变量取值时报错"""
    with pytest.raises(UnboundVariable):
        evaluate(Var(v("h0@1")), {})


def test_model_export_roundtrip(tiny_run):
    """测试因果模型导出再导入后方程不变"""
    arch, trace = tiny_run
    model = build_bcm(arch, trace)
    restored = model_from_export(model_to_export(model))
    assert restored.endogenous == model.endogenous
    assert restored.equations == model.equations


def test_variable_names():
    """测试变量名的格式与解析"""
    variable = Variable(NeuronId(Layer.HIDDEN, 3), 2)
    assert str(variable) == "h3@2"
    assert Variable.parse("h3@2") == variable

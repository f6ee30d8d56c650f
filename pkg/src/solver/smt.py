"""
求解器编码 - SMT-LIB2（QF_LIA）
每个变量是取值于 {0, 1} 的整数，方程写成线性不等式
"""
import re
import shlex
import subprocess
import time
from collections.abc import Iterable, Mapping

from src.causal.schemas import (
    And,
    BoolExpr,
    CausalModel,
    Const,
    Equation,
    Iff,
    Implies,
    Not,
    Or,
    Threshold,
    Var,
    Variable,
)
from src.causal.service import cone_of_influence
from src.common.constants import WeightScale
from src.snn.constants import Layer
from src.snn.schemas import NeuronId
from src.solver.constants import Verdict
from src.solver.exceptions import SolverCrash, SolverOutputError, SolverTimeout
from src.solver.schemas import SmtScript, SolverVerdict
from src.utils.solver_logger import solver_logger

_NAME_PATTERN = re.compile(r"^p_([iho])(\d+)_t(\d+)$")
_VALUE_PATTERN = re.compile(r"\(\s*([^\s()]+)\s+(\(\s*-\s*\d+\s*\)|-?\d+)\s*\)")


def smt_name(variable: Variable) -> str:
    """p_{X,t} → p_h3_t2"""
    return f"p_{variable.neuron.layer.value}{variable.neuron.index}_t{variable.time}"


def parse_smt_name(name: str) -> Variable:
    match = _NAME_PATTERN.match(name)
    if match is None:
        raise ValueError(f"不是模型变量名: {name}")
    layer, index, t = match.groups()
    return Variable(NeuronId(Layer(layer), int(index)), int(t))


def _int(value: int) -> str:
    return str(value) if value >= 0 else f"(- {-value})"


def _sum(variables: Iterable[Variable]) -> str:
    names = [smt_name(v) for v in variables]
    if not names:
        return "0"
    if len(names) == 1:
        return names[0]
    return f"(+ {' '.join(names)})"


def _weighted_sum(positives: tuple[Variable, ...], negatives: tuple[Variable, ...], scale: WeightScale) -> str:
    if scale is WeightScale.TERNARY and negatives:
        return f"(- {_sum(positives)} {_sum(negatives)})"
    return _sum(positives)


def tr(expr: BoolExpr) -> str:
    """布尔表达式 → SMT 布尔项，tr(p) = (= p 1)"""
    match expr:
        case Const(value):
            return "true" if value else "false"
        case Var(var):
            return f"(= {smt_name(var)} 1)"
        case Not(arg):
            return f"(not {tr(arg)})"
        case And(args):
            return f"(and {' '.join(tr(a) for a in args)})" if args else "true"
        case Or(args):
            return f"(or {' '.join(tr(a) for a in args)})" if args else "false"
        case Implies(lhs, rhs):
            return f"(=> {tr(lhs)} {tr(rhs)})"
        case Iff(lhs, rhs):
            return f"(= {tr(lhs)} {tr(rhs)})"
        case Threshold(positives, negatives, bound):
            return f"(>= {_weighted_sum(positives, negatives, WeightScale.TERNARY)} {_int(bound)})"
    raise TypeError(f"未知的表达式节点: {expr!r}")


def equation_assertion(equation: Equation, scale: WeightScale) -> str:
    """
    t = 0：p = 0；
    t > 0：(p = 1) ↔ ((prev = 0 → Σ + A ≥ τ) ∧ (prev = 1 → Σ ≥ τ))
    """
    p = smt_name(equation.target)
    if equation.previous is None:
        return f"(assert (= {p} 0))"
    prev = smt_name(equation.previous)
    total = _weighted_sum(equation.positives, equation.negatives, scale)
    silent = f"(>= (+ {total} {_int(equation.carried)}) {_int(equation.threshold)})"
    fired = f"(>= {total} {_int(equation.threshold)})"
    return (
        f"(assert (= (= {p} 1) (and (=> (= {prev} 0) {silent}) (=> (= {prev} 1) {fired}))))"
    )


def emit_smtlib(
    model: CausalModel,
    assumptions: Iterable[tuple[Variable, bool]],
    conclusion: BoolExpr,
    weight_scale: WeightScale,
    fixed: Mapping[Variable, int] | None = None,
    roots: Iterable[Variable] | None = None,
) -> SmtScript:
    """
    生成蕴含查询脚本：方程 ∧ hyp_S ∧ 固定取值 ∧ tr(λ) ∧ ¬tr(ω0)
    unsat 当且仅当蕴含成立

    Args:
        model: 因果模型
        assumptions: 项 λ 的文字 (变量, 极性)
        conclusion: 结论 ω0
        weight_scale: 决定求和写法
        fixed: 背景取值
        roots: 仅输出这些变量的影响锥（None 为整个模型）
    """
    scope = set(model.variables) if roots is None else cone_of_influence(model, roots)
    ordered = [v for v in model.variables if v in scope]

    declarations = [f"(declare-fun {smt_name(v)} () Int)" for v in ordered]
    assertions = [f"(assert (or (= {smt_name(v)} 1) (= {smt_name(v)} 0)))" for v in ordered]
    assertions += [
        equation_assertion(model.equations[v], weight_scale)
        for v in model.endogenous
        if v in scope
    ]
    assertions += [
        f"(assert (= {smt_name(v)} {int(value)}))"
        for v, value in (fixed or {}).items()
        if v in scope
    ]
    return SmtScript(
        declarations=declarations,
        assertions=assertions,
        query=query_assertions(assumptions, conclusion, scope),
    )


def query_assertions(
    assumptions: Iterable[tuple[Variable, bool]],
    conclusion: BoolExpr,
    scope: set[Variable] | None = None,
) -> list[str]:
    """tr(λ) 与 ¬tr(ω0)；影响锥外的假设文字与结论无关，直接略去"""
    lines = [
        f"(assert {tr(Var(v)) if polarity else tr(Not(Var(v)))})"
        for v, polarity in assumptions
        if scope is None or v in scope
    ]
    lines.append(f"(assert (not {tr(conclusion)}))")
    return lines


def parse_status(output: str, command: str) -> tuple[Verdict, str]:
    """取第一条状态行，返回 (判定, 剩余输出)"""
    lines = output.strip().splitlines()
    if not lines:
        raise SolverOutputError(command, output)
    status = lines[0].strip()
    if status not in (Verdict.SAT.value, Verdict.UNSAT.value):
        raise SolverOutputError(command, output)
    return Verdict(status), "\n".join(lines[1:])


def parse_values(text: str) -> dict[str, int]:
    """解析 get-value 的输出 ((p 1) (q 0))"""
    values = {}
    for name, raw in _VALUE_PATTERN.findall(text):
        values[name] = int(re.sub(r"[()\s]", "", raw))
    return values


def run_external_solver(script: SmtScript, command: str, timeout: float) -> SolverVerdict:
    """
    以子进程运行外部求解器，脚本经 stdin 输入

    Raises:
        SolverTimeout: 超时
        SolverCrash: 无法启动，或异常退出且没有给出状态
        SolverOutputError: 输出无法解析
    """
    start_time = time.perf_counter()
    try:
        result = subprocess.run(
            shlex.split(command),
            input=script.text,
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except subprocess.TimeoutExpired as e:
        error = SolverTimeout(command, timeout)
        solver_logger.log_error("smt", error)
        raise error from e
    except OSError as e:
        error = SolverCrash(command, str(e))
        solver_logger.log_error("smt", error)
        raise error from e

    elapsed = (time.perf_counter() - start_time) * 1000
    if result.returncode != 0 and not result.stdout.strip():
        error = SolverCrash(command, f"退出码 {result.returncode}: {result.stderr.strip()[:200]}")
        solver_logger.log_error("smt", error)
        raise error

    status, rest = parse_status(result.stdout, command)
    model = parse_values(rest) if status is Verdict.SAT and script.get_values else None
    solver_logger.log_query("smt", "script", status.value, elapsed, len(script.text))
    return SolverVerdict(status=status, model=model, stats={"wall_time_ms": elapsed})

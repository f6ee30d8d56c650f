"""
溯因解释 - 类型定义
"""
from collections.abc import Iterator
from dataclasses import dataclass
from typing import NamedTuple

from pydantic import Field

from src.axp.constants import LiteralOrder
from src.axp.exceptions import DuplicateVariable
from src.causal.schemas import And, BoolExpr, Not, Var, Variable
from src.common.constants import Backend
from src.common.schemas import CustomModel
from src.snn.constants import Layer
from src.snn.schemas import InputSequence, NeuronId


class Literal(NamedTuple):
    """文字：变量及其极性"""
    variable: Variable
    polarity: bool

    def as_expr(self) -> BoolExpr:
        return Var(self.variable) if self.polarity else Not(Var(self.variable))


@dataclass(frozen=True)
class Term:
    """文字的合取，每个变量至多出现一次"""
    literals: tuple[Literal, ...] = ()

    def __post_init__(self):
        seen = set()
        for literal in self.literals:
            if literal.variable in seen:
                raise DuplicateVariable(literal.variable)
            seen.add(literal.variable)

    def __len__(self) -> int:
        return len(self.literals)

    def __iter__(self) -> Iterator[Literal]:
        return iter(self.literals)

    def without(self, position: int) -> "Term":
        return Term(self.literals[:position] + self.literals[position + 1 :])

    def issubset(self, other: "Term") -> bool:
        return set(self.literals) <= set(other.literals)

    def as_expr(self) -> BoolExpr:
        return And(tuple(literal.as_expr() for literal in self.literals))


@dataclass(frozen=True)
class Explanandum:
    """时刻 t 的输出观测：发放与未发放的输出神经元"""
    t: int
    positive: tuple[NeuronId, ...]
    negative: tuple[NeuronId, ...]

    def conclusion(self) -> BoolExpr:
        """out_{S,t}"""
        literals = [Var(Variable(c, self.t)) for c in self.positive]
        literals += [Not(Var(Variable(c, self.t))) for c in self.negative]
        return And(tuple(literals))


class Certificates(CustomModel):
    """三个条件各自的检查结果"""
    i: bool
    ii: bool
    iii: bool

    @property
    def passed(self) -> bool:
        return self.i and self.ii and self.iii


@dataclass
class Explanation:
    """一次溯因解释及其证书"""
    term: Term
    explanandum: Explanandum
    backend: Backend
    certificates: Certificates | None
    order_seed: int
    order: LiteralOrder
    solver_calls: int
    wall_time_ms: float
    input: InputSequence
    image_index: int | None = None

    @property
    def features(self) -> list[int]:
        return [literal.variable.neuron.index for literal in self.term]


# ========== 导出格式 ==========

class LiteralExport(CustomModel):
    x: int
    y: int
    time: int
    polarity: bool
    index: int = Field(..., description="输入神经元索引")


class ExplanationExport(CustomModel):
    """解释导出"""
    t: int
    literals: list[LiteralExport]
    certificates: Certificates | None = None
    backend: Backend
    order_seed: int
    order: LiteralOrder = LiteralOrder.SHUFFLE
    solver_calls: int
    wall_time_ms: float
    positive_outputs: list[int] = Field(default_factory=list)
    negative_outputs: list[int] = Field(default_factory=list)
    image_index: int | None = None
    input: list[str] = Field(default_factory=list, description="逐时刻输入位图，用于复核")


class ExplanationSummary(CustomModel):
    """多个实例的解释汇总"""
    backend: Backend
    instances: int
    input_count: int
    mean_search_time_ms: float
    mean_length: float
    mean_length_pct: float
    certificates_passed: int
    zero_connection_violations: int


def output_neuron(index: int) -> NeuronId:
    return NeuronId(Layer.OUTPUT, index)


class BenchReport(CustomModel):
    """两个后端在同一批实例上的对比"""
    indices: list[int]
    t: int
    summaries: list[ExplanationSummary]
    agreement: float = Field(..., description="两个后端文字集合完全一致的实例比例")


# ========== 复核报告 ==========

class VerifyItem(CustomModel):
    file: str
    kind: str  # trace | explanation
    passed: bool
    failures: list[str] = Field(default_factory=list, description="未通过的变量坐标或证书条件")


class VerifyReport(CustomModel):
    total: int
    passed: int
    items: list[VerifyItem] = Field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return self.passed == self.total

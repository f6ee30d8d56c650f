"""
因果模型 - 类型定义
变量、布尔表达式、方程与二值因果模型，以及 JSON 导出格式
"""
from dataclasses import dataclass, field
from typing import NamedTuple, Union

from pydantic import Field

from src.common.constants import WeightScale
from src.common.schemas import CustomModel
from src.snn.constants import Layer
from src.snn.schemas import NeuronId


class Variable(NamedTuple):
    """布尔变量 p_{X,t}"""
    neuron: NeuronId
    time: int

    @property
    def exogenous(self) -> bool:
        return self.neuron.layer is Layer.INPUT

    def __str__(self) -> str:
        return f"{self.neuron}@{self.time}"

    @classmethod
    def parse(cls, text: str) -> "Variable":
        """解析 "h3@2" 形式的变量名"""
        name, time = text.split("@")
        return cls(NeuronId(Layer(name[0]), int(name[1:])), int(time))


# ========== 布尔表达式 ==========

@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Var:
    var: Variable


@dataclass(frozen=True)
class Not:
    arg: "BoolExpr"


@dataclass(frozen=True)
class And:
    args: tuple["BoolExpr", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["BoolExpr", ...]


@dataclass(frozen=True)
class Implies:
    lhs: "BoolExpr"
    rhs: "BoolExpr"


@dataclass(frozen=True)
class Iff:
    lhs: "BoolExpr"
    rhs: "BoolExpr"


@dataclass(frozen=True)
class Threshold:
    """Σ positives − Σ negatives ≥ bound"""
    positives: tuple[Variable, ...]
    negatives: tuple[Variable, ...]
    bound: int


BoolExpr = Union[Const, Var, Not, And, Or, Implies, Iff, Threshold]

TRUE = Const(True)
FALSE = Const(False)


def make_threshold(
    positives: tuple[Variable, ...],
    negatives: tuple[Variable, ...],
    bound: int,
) -> BoolExpr:
    """
    构造阈值条件，退化情形立即折叠：
    bound ≤ −|negatives| 恒真，bound > |positives| 恒假
    """
    if bound <= -len(negatives):
        return TRUE
    if bound > len(positives):
        return FALSE
    return Threshold(tuple(positives), tuple(negatives), int(bound))


# ========== 方程与模型 ==========

class SliceConstant(NamedTuple):
    """方程中的运行常量：上一时刻膜电位 A(X,t−1) 与上一时刻发放位 F_X(t−1)"""
    carried: int
    fired_prev: int


@dataclass(frozen=True)
class Equation:
    """
    p ↔ ω_p

    t = 0 时 previous 为 None，ω_p = ⊥；
    t > 0 时 ω_p = (¬prev → 静默分支) ∧ (prev → 发放分支)
    """
    target: Variable
    previous: Variable | None
    positives: tuple[Variable, ...] = ()
    negatives: tuple[Variable, ...] = ()
    threshold: int = 0
    carried: int = 0
    fired_prev: int = 0

    @property
    def silent_branch(self) -> BoolExpr:
        """上一时刻未发放：Σ + A(X,t−1) ≥ τ"""
        return make_threshold(self.positives, self.negatives, self.threshold - self.carried)

    @property
    def fired_branch(self) -> BoolExpr:
        """上一时刻已发放（电位复位）：Σ ≥ τ"""
        return make_threshold(self.positives, self.negatives, self.threshold)

    @property
    def omega(self) -> BoolExpr:
        if self.previous is None:
            return FALSE
        prev = Var(self.previous)
        return And((Implies(Not(prev), self.silent_branch), Implies(prev, self.fired_branch)))

    def as_expr(self) -> BoolExpr:
        return Iff(Var(self.target), self.omega)

    @property
    def slice_constant(self) -> SliceConstant:
        return SliceConstant(self.carried, self.fired_prev)


@dataclass(frozen=True)
class CausalModel:
    """
    单次运行的二值因果模型：外生变量（输入）、内生变量与逐变量方程
    构造后只读
    """
    t_end: int
    weight_scale: WeightScale
    exogenous: tuple[Variable, ...]
    endogenous: tuple[Variable, ...]
    equations: dict[Variable, Equation] = field(hash=False)

    @property
    def variables(self) -> tuple[Variable, ...]:
        return self.exogenous + self.endogenous

    @property
    def slice_constants(self) -> dict[Variable, SliceConstant]:
        return {v: eq.slice_constant for v, eq in self.equations.items() if eq.previous is not None}

    def exogenous_at(self, t: int) -> list[Variable]:
        return [v for v in self.exogenous if v.time == t]


# 解释：变量 → 0/1 的完整赋值
Interpretation = dict[Variable, int]


# ========== 导出格式 ==========

class EquationExport(CustomModel):
    """阈值形式的单个方程"""
    target: str
    previous: str | None = None
    positives: list[str] = Field(default_factory=list)
    negatives: list[str] = Field(default_factory=list)
    threshold: int = 0
    carried: int = 0
    fired_prev: int = 0


class CausalModelExport(CustomModel):
    """因果模型导出：变量表、运行常量与阈值形式方程"""
    t_end: int
    weight_scale: WeightScale
    exogenous: list[str]
    endogenous: list[str]
    equations: list[EquationExport]

"""
求解器编码 - 类型定义
"""
from dataclasses import dataclass, field

from pydantic import Field

from src.causal.schemas import Interpretation, Variable
from src.common.schemas import CustomModel
from src.solver.constants import SMT_LOGIC, Verdict


@dataclass
class CnfFormula:
    """
    子句形式的公式

    varmap 只覆盖模型变量（辅助变量不在其中）；
    known 记录常量传播后已确定取值、因而不再出现在子句中的模型变量
    """
    variable_count: int = 0
    clauses: list[list[int]] = field(default_factory=list)
    varmap: dict[Variable, int] = field(default_factory=dict)
    known: dict[Variable, int] = field(default_factory=dict)

    def literal(self, variable: Variable, polarity: bool = True) -> int:
        index = self.varmap[variable]
        return index if polarity else -index

    def project(self, model: list[int]) -> Interpretation:
        """把 SAT 模型投影回模型变量（含已知常量）"""
        positive = {lit for lit in model if lit > 0}
        interpretation: Interpretation = dict(self.known)
        for variable, index in self.varmap.items():
            interpretation[variable] = int(index in positive)
        return interpretation


class SmtScript(CustomModel):
    """
    SMT-LIB2 脚本
    声明、约束与查询分开保存，便于进程内引擎复用核心部分
    """
    logic: str = SMT_LOGIC
    declarations: list[str] = Field(default_factory=list)
    assertions: list[str] = Field(default_factory=list, description="方程、hyp_S 与背景取值")
    query: list[str] = Field(default_factory=list, description="tr(λ) 与 ¬tr(ω0)")
    get_values: list[str] = Field(default_factory=list, description="sat 时读取取值的变量")

    @property
    def text(self) -> str:
        lines = [f"(set-logic {self.logic})", *self.declarations, *self.assertions, *self.query]
        lines.append("(check-sat)")
        if self.get_values:
            lines.append(f"(get-value ({' '.join(self.get_values)}))")
        lines.append("(exit)")
        return "\n".join(lines) + "\n"


class SolverVerdict(CustomModel):
    """求解结果：状态、可选模型与统计信息"""
    status: Verdict
    model: dict[str, int] | None = None
    stats: dict[str, float] = Field(default_factory=dict)

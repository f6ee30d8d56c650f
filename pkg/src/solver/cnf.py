"""
求解器编码 - CNF
常量传播、影响锥裁剪、保结构子句化与基数约束的具体化编码
"""
from collections.abc import Iterable, Mapping

import networkx as nx
from pysat.card import CardEnc, EncType
from pysat.formula import IDPool

from src.causal.schemas import (
    And,
    BoolExpr,
    CausalModel,
    Const,
    Iff,
    Implies,
    Not,
    Or,
    Threshold,
    Var,
    Variable,
)
from src.causal.service import causal_graph, simplify
from src.common.config import settings
from src.solver.constants import DIMACS_KNOWN_PREFIX, DIMACS_VAR_PREFIX, SEQCOUNTER_MAX_FANIN
from src.solver.exceptions import DimacsFormatError
from src.solver.schemas import CnfFormula

Clause = list[int]


def card_encoding(fan_in: int) -> int:
    """按配置选择 pysat 基数编码"""
    name = settings.CARD_ENCODING
    if name == "auto":
        name = "seqcounter" if fan_in <= SEQCOUNTER_MAX_FANIN else "cardnetwrk"
    return getattr(EncType, name)


def reified_at_least(
    literals: list[int],
    bound: int,
    gate: int,
    pool: IDPool,
) -> list[Clause]:
    """
    gate ↔ (literals 中至少 bound 个为真)

    退化界折叠为单元子句；bound 为 1 / n 时分别是析取 / 合取；
    其余情形用两份带条件的基数编码：至少 bound 个（gate 为真时生效）
    与至多 bound − 1 个（gate 为假时生效）
    """
    n = len(literals)
    if bound <= 0:
        return [[gate]]
    if bound > n:
        return [[-gate]]
    if bound == 1:
        return [[-gate, *literals]] + [[-lit, gate] for lit in literals]
    if bound == n:
        return [[gate, *(-lit for lit in literals)]] + [[-gate, lit] for lit in literals]

    encoding = card_encoding(n)
    at_least = CardEnc.atleast(lits=literals, bound=bound, vpool=pool, encoding=encoding)
    at_most = CardEnc.atmost(lits=literals, bound=bound - 1, vpool=pool, encoding=encoding)
    return [clause + [-gate] for clause in at_least.clauses] + [
        clause + [gate] for clause in at_most.clauses
    ]


class CnfBuilder:
    """
    增量构造 CNF：模型变量与 Tseitin 门共享同一个 IDPool
    """

    def __init__(self):
        self.pool = IDPool()
        self.clauses: list[Clause] = []
        self.varmap: dict[Variable, int] = {}
        self.known: dict[Variable, int] = {}
        self._gates: dict[BoolExpr, int] = {}
        self._true: int | None = None
        self._aux = 0

    # ---------- 变量 ----------

    def var(self, variable: Variable) -> int:
        if variable not in self.varmap:
            self.varmap[variable] = self.pool.id(variable)
        return self.varmap[variable]

    def fresh(self) -> int:
        self._aux += 1
        return self.pool.id(("aux", self._aux))

    def constant(self, value: bool) -> int:
        """恒真 / 恒假文字"""
        if self._true is None:
            self._true = self.fresh()
            self.clauses.append([self._true])
        return self._true if value else -self._true

    # ---------- Tseitin ----------

    def literal(self, expr: BoolExpr) -> int:
        """返回与 expr 等价的文字，必要时引入门变量"""
        match expr:
            case Const(value):
                return self.constant(value)
            case Var(var):
                return self.var(var)
            case Not(arg):
                return -self.literal(arg)
        if expr in self._gates:
            return self._gates[expr]
        gate = self.fresh()
        self.define(gate, expr)
        self._gates[expr] = gate
        return gate

    def define(self, gate: int, expr: BoolExpr) -> None:
        """添加 gate ↔ expr 的子句"""
        match expr:
            case Const(value):
                self.clauses.append([gate] if value else [-gate])
            case Var() | Not():
                lit = self.literal(expr)
                self.clauses.extend([[-gate, lit], [gate, -lit]])
            case And(args):
                lits = [self.literal(a) for a in args]
                self.clauses.append([gate, *(-lit for lit in lits)])
                self.clauses.extend([-gate, lit] for lit in lits)
            case Or(args):
                lits = [self.literal(a) for a in args]
                self.clauses.append([-gate, *lits])
                self.clauses.extend([-lit, gate] for lit in lits)
            case Implies(lhs, rhs):
                self.define(gate, Or((Not(lhs), rhs)))
            case Iff(lhs, rhs):
                a, b = self.literal(lhs), self.literal(rhs)
                self.clauses.extend(
                    [[-gate, -a, b], [-gate, a, -b], [gate, a, b], [gate, -a, -b]]
                )
            case Threshold(positives, negatives, bound):
                # Σpos − Σneg ≥ c  ⟺  Σpos + Σ(1 − neg) ≥ c + |neg|
                lits = [self.var(v) for v in positives] + [-self.var(v) for v in negatives]
                self.clauses.extend(
                    reified_at_least(lits, bound + len(negatives), gate, self.pool)
                )
            case _:
                raise TypeError(f"未知的表达式节点: {expr!r}")

    def contradiction(self) -> None:
        lit = self.constant(True)
        self.clauses.append([-lit])

    def formula(self) -> CnfFormula:
        return CnfFormula(
            variable_count=self.pool.top,
            clauses=[list(c) for c in self.clauses],
            varmap=dict(self.varmap),
            known=dict(self.known),
        )


def _scope(model: CausalModel, roots: Iterable[Variable] | None) -> tuple[nx.DiGraph, set[Variable]]:
    graph = causal_graph(model)
    if roots is None:
        return graph, set(model.variables)
    scope = set(roots)
    for root in list(scope):
        scope |= nx.ancestors(graph, root)
    return graph, scope


def encode_model(
    model: CausalModel,
    fixed: Mapping[Variable, int],
    roots: Iterable[Variable] | None = None,
) -> CnfBuilder:
    """
    在拓扑序上做常量传播，剩余方程逐个子句化

    Args:
        model: 因果模型
        fixed: 固定取值的模型变量
        roots: 只保留这些变量的影响锥（None 表示整个模型）
    """
    builder = CnfBuilder()
    graph, scope = _scope(model, roots)

    for variable in nx.topological_sort(graph):
        if variable not in scope:
            continue
        equation = model.equations.get(variable)
        if equation is None:
            # 外生变量
            if variable in fixed:
                builder.known[variable] = int(fixed[variable])
            else:
                builder.var(variable)
            continue

        omega = simplify(equation.omega, builder.known)
        if isinstance(omega, Const):
            value = int(omega.value)
            builder.known[variable] = value
            if variable in fixed and int(fixed[variable]) != value:
                builder.contradiction()
            continue

        gate = builder.var(variable)
        builder.define(gate, omega)
        if variable in fixed:
            builder.clauses.append([gate if fixed[variable] else -gate])

    return builder


def encode_cnf(
    model: CausalModel,
    fixed: Mapping[Variable, int] | None = None,
    roots: Iterable[Variable] | None = None,
) -> CnfFormula:
    """
    因果模型方程 ∧ 固定取值 → 等可满足的 CNF

    每个满足赋值投影到模型变量（加上 known）都满足全部方程，反之亦然
    """
    return encode_model(model, fixed or {}, roots).formula()


# ========== DIMACS ==========

def emit_dimacs(formula: CnfFormula) -> str:
    """
    标准 DIMACS 文本；模型变量名与已知常量写在注释行
    """
    lines = [f"{DIMACS_VAR_PREFIX} {index} {variable}" for variable, index in formula.varmap.items()]
    lines += [f"{DIMACS_KNOWN_PREFIX} {variable} {value}" for variable, value in formula.known.items()]
    lines.append(f"p cnf {formula.variable_count} {len(formula.clauses)}")
    lines += [" ".join(map(str, clause)) + " 0" for clause in formula.clauses]
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfFormula:
    """
    解析 DIMACS 文本（子句可跨行，以 0 结尾）

    Raises:
        DimacsFormatError: 缺少文件头、字面量越界或子句数不符
    """
    formula = CnfFormula()
    declared_clauses: int | None = None
    pending: list[int] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line == "%":
            continue
        if line.startswith(DIMACS_VAR_PREFIX + " "):
            _, _, index, name = line.split(maxsplit=3)
            formula.varmap[Variable.parse(name)] = int(index)
            continue
        if line.startswith(DIMACS_KNOWN_PREFIX + " "):
            _, _, name, value = line.split(maxsplit=3)
            formula.known[Variable.parse(name)] = int(value)
            continue
        if line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsFormatError(line_no, f"文件头格式错误: {line}")
            formula.variable_count, declared_clauses = int(parts[2]), int(parts[3])
            continue
        if declared_clauses is None:
            raise DimacsFormatError(line_no, "子句出现在文件头之前")
        for token in line.split():
            lit = int(token)
            if lit == 0:
                formula.clauses.append(pending)
                pending = []
            elif abs(lit) > formula.variable_count:
                raise DimacsFormatError(line_no, f"文字 {lit} 超出变量数 {formula.variable_count}")
            else:
                pending.append(lit)

    if declared_clauses is None:
        raise DimacsFormatError(0, "缺少 p cnf 文件头")
    if pending:
        formula.clauses.append(pending)
    if len(formula.clauses) != declared_clauses:
        raise DimacsFormatError(0, f"声明 {declared_clauses} 个子句，实际 {len(formula.clauses)}")
    return formula

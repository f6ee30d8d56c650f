"""
求解器编码 - 业务逻辑层
统一的蕴含检查接口：一次编码方程核心，之后按假设文字反复查询
"""
import threading
import time
from abc import ABC, abstractmethod
from collections.abc import Iterable, Mapping

import z3
from pysat.solvers import Solver

from src.causal.schemas import TRUE, BoolExpr, CausalModel, Const, Variable
from src.causal.service import cone_of_influence, simplify, variables
from src.common.config import settings
from src.common.constants import Backend
from src.solver.cnf import encode_model
from src.solver.constants import Verdict
from src.solver.exceptions import SolverOutputError
from src.solver.smt import emit_smtlib, query_assertions, run_external_solver, smt_name
from src.solver.schemas import SmtScript
from src.utils.logger import get_logger
from src.utils.solver_logger import solver_logger

logger = get_logger("solver")

# 限制同时运行的外部求解器进程数
_process_slots = threading.BoundedSemaphore(settings.SMT_PROCESS_CAP)

TermLiterals = Iterable[tuple[Variable, bool]]


class EntailmentSession(ABC):
    """
    一个会话对应一个 (模型, 背景取值, 结论)
    entails(λ) 判断 方程 ∧ 背景 ∧ λ ⊨ 结论
    """
    backend: Backend

    def __init__(self, model: CausalModel, fixed: Mapping[Variable, int], conclusion: BoolExpr):
        self.model = model
        self.fixed = dict(fixed)
        self.conclusion = conclusion
        self.calls = 0

    def entails(self, term: TermLiterals) -> bool:
        literals = list(term)
        self.calls += 1
        start_time = time.perf_counter()
        result = self._entails(literals)
        elapsed = (time.perf_counter() - start_time) * 1000
        solver_logger.log_query(
            self.backend.value,
            "entailment",
            Verdict.UNSAT.value if result else Verdict.SAT.value,
            elapsed,
            len(literals),
        )
        return result

    @abstractmethod
    def _entails(self, literals: list[tuple[Variable, bool]]) -> bool: ...

    def close(self) -> None:
        pass

    def __enter__(self) -> "EntailmentSession":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


class SatSession(EntailmentSession):
    """
    增量 CDCL 会话：方程核心编码一次，结论取反作为假设文字
    """
    backend = Backend.CNF_SAT

    def __init__(self, model: CausalModel, fixed: Mapping[Variable, int], conclusion: BoolExpr):
        super().__init__(model, fixed, conclusion)
        builder = encode_model(model, self.fixed, roots=variables(conclusion))
        self.known = builder.known
        goal = simplify(conclusion, builder.known)
        # 结论在背景下已成定值时无需调用求解器
        self.constant_goal = goal.value if isinstance(goal, Const) else None
        self.goal = builder.literal(goal) if self.constant_goal is None else None
        self.varmap = builder.varmap

        self.formula = builder.formula()
        self.solver = Solver(name=settings.SAT_SOLVER, bootstrap_with=self.formula.clauses)
        logger.debug(
            f"SAT 会话: {self.formula.variable_count} 个变量, {len(self.formula.clauses)} 个子句"
        )

    def _assumptions(self, literals: list[tuple[Variable, bool]]) -> list[int] | None:
        """假设文字 → 求解器文字；与背景矛盾时返回 None"""
        assumptions = []
        for variable, polarity in literals:
            if variable in self.known:
                if self.known[variable] != int(polarity):
                    return None
            elif variable in self.varmap:
                index = self.varmap[variable]
                assumptions.append(index if polarity else -index)
        return assumptions

    def _entails(self, literals: list[tuple[Variable, bool]]) -> bool:
        assumptions = self._assumptions(literals)
        if assumptions is None:
            return True
        if self.constant_goal is True:
            return True
        if self.constant_goal is False:
            return not self.solver.solve(assumptions=assumptions)
        return not self.solver.solve(assumptions=assumptions + [-self.goal])

    def close(self) -> None:
        if self.solver is not None:
            self.solver.delete()
            self.solver = None


class SmtSession(EntailmentSession):
    """
    SMT-LIA 会话
    进程内模式：Z3 读入核心脚本，每次查询 push / pop；
    外部模式：每次查询发送完整脚本
    """
    backend = Backend.SMT_LIA

    def __init__(
        self,
        model: CausalModel,
        fixed: Mapping[Variable, int],
        conclusion: BoolExpr,
        command: str | None = None,
        timeout: float | None = None,
    ):
        super().__init__(model, fixed, conclusion)
        self.command = settings.SMT_SOLVER_CMD if command is None else command
        self.timeout = settings.SMT_TIMEOUT_S if timeout is None else timeout
        self.scope = cone_of_influence(model, variables(conclusion))
        self.core: SmtScript = emit_smtlib(
            model, [], conclusion, model.weight_scale, fixed=self.fixed, roots=self.scope
        )

        self.solver: z3.Solver | None = None
        if not self.command:
            self.decls = {smt_name(v): z3.Int(smt_name(v)) for v in self.scope}
            self.solver = z3.Solver()
            self.solver.set("timeout", int(self.timeout * 1000))
            self.solver.add(z3.parse_smt2_string("\n".join(self.core.assertions), decls=self.decls))

    def _entails(self, literals: list[tuple[Variable, bool]]) -> bool:
        query = query_assertions(literals, self.conclusion, self.scope)
        if self.solver is None:
            script = self.core.model_copy(update={"query": query})
            with _process_slots:
                verdict = run_external_solver(script, self.command, self.timeout)
            return verdict.status is Verdict.UNSAT

        self.solver.push()
        try:
            self.solver.add(z3.parse_smt2_string("\n".join(query), decls=self.decls))
            result = self.solver.check()
        finally:
            self.solver.pop()
        if result == z3.unknown:
            raise SolverOutputError("z3", f"unknown ({self.solver.reason_unknown()})")
        return result == z3.unsat

    def close(self) -> None:
        self.solver = None


def open_session(
    model: CausalModel,
    fixed: Mapping[Variable, int],
    conclusion: BoolExpr,
    backend: Backend,
) -> EntailmentSession:
    """打开指定后端的蕴含检查会话"""
    if backend is Backend.CNF_SAT:
        return SatSession(model, fixed, conclusion)
    return SmtSession(model, fixed, conclusion)


def check_entailment(
    model: CausalModel,
    assumptions: TermLiterals,
    conclusion: BoolExpr,
    backend: Backend,
    fixed: Mapping[Variable, int] | None = None,
) -> bool:
    """
    方程 ∧ 背景 ∧ 假设 ∧ ¬结论 是否不可满足

    Raises:
        SolverException: 求解器失败（不会被当作判定结果）
    """
    if conclusion == TRUE:
        return True
    with open_session(model, fixed or {}, conclusion, backend) as session:
        return session.entails(assumptions)

"""Multi-commodity flow instances, their LP form, and verified solutions.

The team utility of an agent configuration is the optimal value of a
flow problem on the complete directed graph over the agents: each
commodity k is consumed by task agent k and injected by its source
agents, relay agents conserve every commodity, and the total flow on a
directed edge is capped by the pairwise link capacity.  The objective
is a weighted sum over commodities of the smallest injection among the
commodity's sources, linearized with one epigraph variable per
commodity.

The capacity rows are kept verbatim, one per ordered pair, so their
duals are exactly the shadow prices the ascent direction needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .capacity import capacity_matrix
from .lp import LpResult, SolverOptions, StandardFormLP, check_kkt, solve
from .network import CommoditySpec, Scenario, validate_weights

# Epigraph variables are conceptually free, but a zero-weight commodity
# leaves its epigraph value on an unbounded optimal ray and interior-point
# iterates drift along it.  A deep floor keeps them bounded; optimal
# epigraph values always lie in [0, 1] (injections are nonnegative and
# capacities are at most 1), so the floor is never active at an optimum
# and leaves values and duals unchanged.
_EPIGRAPH_FLOOR = -1e3


@dataclass
class McfpInstance:
    """Capacity matrix plus commodity structure, ready to solve."""

    capacities: np.ndarray
    commodities: tuple[CommoditySpec, ...]
    weights: np.ndarray
    relay_set: tuple[int, ...]

    def __post_init__(self) -> None:
        c = np.asarray(self.capacities, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError(f"capacity matrix must be square, got {c.shape}")
        if np.any(c < 0.0) or np.any(c > 1.0):
            raise ValueError("capacities must lie in [0, 1]")
        if not np.allclose(c, c.T, atol=1e-12):
            raise ValueError("capacity matrix must be symmetric")
        if np.any(np.diag(c) != 0.0):
            raise ValueError("capacity diagonal must be zero (no self links)")
        self.capacities = c
        self.commodities = tuple(self.commodities)
        self.weights = validate_weights(self.weights, len(self.commodities))
        self.relay_set = tuple(sorted(int(i) for i in self.relay_set))
        n = c.shape[0]
        for k, com in enumerate(self.commodities):
            if max((com.sink, *com.sources)) >= n:
                raise ValueError(f"commodity {k} references agent outside the graph")
        if self.relay_set and (min(self.relay_set) < 0 or max(self.relay_set) >= n):
            raise ValueError("relay indices out of range")

    @property
    def num_agents(self) -> int:
        return self.capacities.shape[0]

    @property
    def num_commodities(self) -> int:
        return len(self.commodities)

    def with_capacities(self, new_c: np.ndarray) -> "McfpInstance":
        return McfpInstance(new_c, self.commodities, self.weights, self.relay_set)


def build_instance(scenario: Scenario, weights) -> McfpInstance:
    """Evaluate all pairwise capacities and bundle the commodity data."""
    c = capacity_matrix(scenario.capacity_model, scenario.positions())
    w = validate_weights(weights, len(scenario.commodities))
    return McfpInstance(c, scenario.commodities, w, scenario.relay_indices())


@dataclass
class McfpIndexMap:
    """Column/row layout of the flow LP.

    Variables: flows r for every ordered pair and commodity (pair-major,
    commodity-minor), then injections a per (commodity, source), then
    one epigraph variable t per commodity.  The capacity row of each
    ordered pair is recorded so its dual can be read back as a shadow
    price.
    """

    num_agents: int
    num_commodities: int
    pairs: list
    pair_pos: dict
    a_cols: dict
    t_col0: int
    num_vars: int
    e1_rows: dict
    s1_rows: dict
    cap_row0: int
    r1_rows: dict
    num_ineq: int
    num_eq: int

    def r_col(self, i: int, j: int, k: int) -> int:
        return self.pair_pos[(i, j)] * self.num_commodities + k

    def cap_row(self, i: int, j: int) -> int:
        return self.cap_row0 + self.pair_pos[(i, j)]


def build_lp(inst: McfpInstance) -> tuple[StandardFormLP, McfpIndexMap]:
    """Emit the flow LP in standard form.

    Inequality rows, in order: epigraph rows (t_k <= a_i^k), injection
    rows (a_i^k bounded by net outflow of source i), capacity rows (one
    per ordered pair).  Equality rows: relay conservation.  Flows live
    in [0, 1], injections are nonnegative, epigraph variables are free.
    """
    n = inst.num_agents
    num_k = inst.num_commodities
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    pair_pos = {pair: p for p, pair in enumerate(pairs)}
    num_r = len(pairs) * num_k

    a_cols = {}
    col = num_r
    for k, com in enumerate(inst.commodities):
        for i in com.sources:
            a_cols[(k, i)] = col
            col += 1
    t_col0 = col
    num_vars = t_col0 + num_k

    def r_col(i, j, k):
        return pair_pos[(i, j)] * num_k + k

    rows_i: list[int] = []
    cols_j: list[int] = []
    vals: list[float] = []

    def put(row, col_, val):
        rows_i.append(row)
        cols_j.append(col_)
        vals.append(val)

    row = 0
    e1_rows = {}
    for k, com in enumerate(inst.commodities):
        for i in com.sources:
            put(row, t_col0 + k, 1.0)
            put(row, a_cols[(k, i)], -1.0)
            e1_rows[(k, i)] = row
            row += 1

    s1_rows = {}
    for k, com in enumerate(inst.commodities):
        for i in com.sources:
            put(row, a_cols[(k, i)], 1.0)
            for j in range(n):
                if j == i:
                    continue
                put(row, r_col(i, j, k), -1.0)
                put(row, r_col(j, i, k), 1.0)
            s1_rows[(k, i)] = row
            row += 1

    cap_row0 = row
    b_ub = np.zeros(cap_row0 + len(pairs))
    for p, (i, j) in enumerate(pairs):
        for k in range(num_k):
            put(row, r_col(i, j, k), 1.0)
        b_ub[row] = inst.capacities[i, j]
        row += 1
    num_ineq = row
    a_ub = sp.csr_matrix(
        (vals, (rows_i, cols_j)), shape=(num_ineq, num_vars)
    )

    rows_i, cols_j, vals = [], [], []
    row = 0
    r1_rows = {}
    for k in range(num_k):
        for i in inst.relay_set:
            for j in range(n):
                if j == i:
                    continue
                put(row, r_col(i, j, k), 1.0)
                put(row, r_col(j, i, k), -1.0)
            r1_rows[(k, i)] = row
            row += 1
    num_eq = row
    a_eq = sp.csr_matrix((vals, (rows_i, cols_j)), shape=(num_eq, num_vars))

    c_obj = np.zeros(num_vars)
    c_obj[t_col0 : t_col0 + num_k] = inst.weights

    lo = np.zeros(num_vars)
    hi = np.ones(num_vars)
    hi[num_r:] = np.inf
    lo[t_col0:] = _EPIGRAPH_FLOOR

    lp = StandardFormLP(
        c=c_obj,
        a_ub=a_ub,
        b_ub=b_ub,
        a_eq=a_eq,
        b_eq=np.zeros(num_eq),
        lo=lo,
        hi=hi,
    )
    index = McfpIndexMap(
        num_agents=n,
        num_commodities=num_k,
        pairs=pairs,
        pair_pos=pair_pos,
        a_cols=a_cols,
        t_col0=t_col0,
        num_vars=num_vars,
        e1_rows=e1_rows,
        s1_rows=s1_rows,
        cap_row0=cap_row0,
        r1_rows=r1_rows,
        num_ineq=num_ineq,
        num_eq=num_eq,
    )
    return lp, index


@dataclass
class FlowSolution:
    """Optimal flows, injections, utility and all dual variables."""

    phi: float
    r: np.ndarray  # (N, N, K) flows, zero diagonal
    a: np.ndarray  # (K, N) injections, nonzero only at sources
    t: np.ndarray  # (K,) epigraph values
    lam: np.ndarray  # (K, N) injection-row duals
    nu: np.ndarray  # (K, N) relay-conservation duals
    mu: np.ndarray  # (N, N) capacity shadow prices
    gap: float
    status: str
    iterations: int
    lp: Optional[StandardFormLP] = field(default=None, repr=False)
    lp_result: Optional[LpResult] = field(default=None, repr=False)
    index: Optional[McfpIndexMap] = field(default=None, repr=False)


class McfpSolveError(RuntimeError):
    """The flow LP did not reach a verified optimum."""

    def __init__(self, message: str, lp_result: Optional[LpResult] = None, report=None):
        super().__init__(message)
        self.lp_result = lp_result
        self.report = report


def _trivial_solution(inst: McfpInstance) -> FlowSolution:
    n, num_k = inst.num_agents, inst.num_commodities
    return FlowSolution(
        phi=0.0,
        r=np.zeros((n, n, num_k)),
        a=np.zeros((num_k, n)),
        t=np.zeros(num_k),
        lam=np.zeros((num_k, n)),
        nu=np.zeros((num_k, n)),
        mu=np.zeros((n, n)),
        gap=0.0,
        status="optimal",
        iterations=0,
    )


def solve_mcfp(
    inst: McfpInstance,
    opts: Optional[SolverOptions] = None,
    verify_tol: float = 1e-6,
) -> FlowSolution:
    """Solve the flow LP and return a verified primal-dual solution.

    Raises :class:`McfpSolveError` if the LP engine fails or the
    returned point does not pass :func:`verify_solution`, so callers
    never see unverified output.
    """
    opts = opts if opts is not None else SolverOptions()
    if inst.num_commodities == 0 or inst.num_agents < 2:
        return _trivial_solution(inst)

    lp, index = build_lp(inst)
    result = solve(lp, opts)
    if not result.optimal:
        raise McfpSolveError(
            f"flow LP solve failed with status {result.status}: {result.message}",
            lp_result=result,
        )

    n, num_k = inst.num_agents, inst.num_commodities
    x = result.x
    num_pairs = len(index.pairs)
    ii = np.fromiter((p[0] for p in index.pairs), dtype=int, count=num_pairs)
    jj = np.fromiter((p[1] for p in index.pairs), dtype=int, count=num_pairs)

    r = np.zeros((n, n, num_k))
    r[ii, jj, :] = x[: num_pairs * num_k].reshape(num_pairs, num_k)

    a = np.zeros((num_k, n))
    for (k, i), col in index.a_cols.items():
        a[k, i] = x[col]
    t = x[index.t_col0 : index.t_col0 + num_k].copy()

    lam = np.zeros((num_k, n))
    for (k, i), row in index.s1_rows.items():
        lam[k, i] = result.y_ineq[row]
    nu = np.zeros((num_k, n))
    for (k, i), row in index.r1_rows.items():
        nu[k, i] = result.y_eq[row]
    mu = np.zeros((n, n))
    mu[ii, jj] = result.y_ineq[index.cap_row0 : index.cap_row0 + num_pairs]

    sol = FlowSolution(
        phi=float(result.objective),
        r=r,
        a=a,
        t=t,
        lam=lam,
        nu=nu,
        mu=mu,
        gap=float(result.gap),
        status=result.status,
        iterations=result.iterations,
        lp=lp,
        lp_result=result,
        index=index,
    )
    report = verify_solution(inst, sol, tol=verify_tol)
    if not report.passed:
        raise McfpSolveError(
            f"flow solution failed verification: {report}", lp_result=result, report=report
        )
    return sol


@dataclass(frozen=True)
class VerificationReport:
    """Residuals of a flow solution, all expected at or below the pass tolerance.

    primal_residual and dual_residual are relative KKT residuals of the
    underlying LP; complementarity is the largest capacity-row product
    mu_ij * (C_ij - total flow on (i, j)); slack_mu_max is the largest
    shadow price on a row with at least ``slack_threshold`` spare
    capacity, which should carry no price at an optimum.
    """

    primal_residual: float
    dual_residual: float
    complementarity: float
    gap: float
    slack_mu_max: float
    tol: float
    slack_threshold: float

    @property
    def passed(self) -> bool:
        return (
            max(
                self.primal_residual,
                self.dual_residual,
                self.complementarity,
                self.gap,
                self.slack_mu_max,
            )
            <= self.tol
        )


def verify_solution(
    inst: McfpInstance,
    sol: FlowSolution,
    tol: float = 1e-6,
    slack_threshold: float = 1e-3,
) -> VerificationReport:
    """Recompute feasibility, optimality and shadow-price hygiene residuals.

    Primal feasibility is evaluated directly on the solution arrays
    (flows, injections, epigraph values), so a hand-edited solution is
    caught regardless of what the solver reported.  Stationarity and
    the duality gap come from the KKT check of the underlying LP pair
    when it is attached.
    """
    total_flow = sol.r.sum(axis=2)
    slack = inst.capacities - total_flow
    off_diag = ~np.eye(inst.num_agents, dtype=bool)

    residuals = [
        float(np.max(-slack[off_diag], initial=0.0)),  # capacity respected
        float(np.max(-sol.r, initial=0.0)),  # flow bounds
        float(np.max(sol.r - 1.0, initial=0.0)),
        float(np.max(-sol.a, initial=0.0)),  # injections nonnegative
        float(np.max(np.abs(_relay_imbalance(inst, sol)), initial=0.0)),
    ]
    out_flow = sol.r.sum(axis=1)  # (N, K): total outflow per node
    in_flow = sol.r.sum(axis=0)
    for k, com in enumerate(inst.commodities):
        for i in com.sources:
            net = out_flow[i, k] - in_flow[i, k]
            residuals.append(float(sol.a[k, i] - net))  # injection bounded by net outflow
            residuals.append(float(sol.t[k] - sol.a[k, i]))  # epigraph feasibility
    primal = max(0.0, *residuals)

    dual = max(
        float(np.max(-sol.mu, initial=0.0)),
        float(np.max(-sol.lam, initial=0.0)),
    )
    comp = float(np.max(np.abs(sol.mu * slack), initial=0.0))
    is_slack = off_diag & (slack >= slack_threshold)
    slack_mu = float(np.max(sol.mu[is_slack], initial=0.0))

    if sol.lp is not None and sol.lp_result is not None:
        kkt = check_kkt(sol.lp, sol.lp_result)
        dual = max(dual, kkt.stationarity, kkt.dual_feasibility)
        gap = kkt.gap
    else:
        gap = float(sol.gap)

    return VerificationReport(
        primal_residual=primal,
        dual_residual=dual,
        complementarity=comp,
        gap=gap,
        slack_mu_max=slack_mu,
        tol=tol,
        slack_threshold=slack_threshold,
    )


def _relay_imbalance(inst: McfpInstance, sol: FlowSolution) -> np.ndarray:
    """Net outflow minus inflow per (commodity, relay)."""
    if not inst.relay_set:
        return np.zeros(0)
    out_flow = sol.r.sum(axis=1)  # (N, K) total outflow per node
    in_flow = sol.r.sum(axis=0)
    rows = np.asarray(inst.relay_set, dtype=int)
    return (out_flow[rows, :] - in_flow[rows, :]).ravel()


def flow_solution_to_dict(sol: FlowSolution, drop_tol: float = 1e-9) -> dict:
    """JSON form: phi, dense mu, sparse r triples, injections, gap, status."""
    n, _, num_k = sol.r.shape
    r_entries = [
        [int(i), int(j), int(k), float(sol.r[i, j, k])]
        for i in range(n)
        for j in range(n)
        for k in range(num_k)
        if sol.r[i, j, k] > drop_tol
    ]
    a_entries = [
        [int(k), int(i), float(sol.a[k, i])]
        for k in range(sol.a.shape[0])
        for i in range(n)
        if sol.a[k, i] > drop_tol
    ]
    return {
        "phi": float(sol.phi),
        "mu": [[float(v) for v in row] for row in sol.mu],
        "r": r_entries,
        "a": a_entries,
        "gap": float(sol.gap),
        "status": sol.status,
    }

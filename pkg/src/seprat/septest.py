"""Decide separable rationalizability of a dataset over its finite grid.

A dataset is accepted when some strict total order on the grid's
z-projections (the u-order, which must rank componentwise-dominating
projections higher) makes the combined preference relation acyclic.  The
combined relation joins three edge families over grid points:

  1-edges     observation k  ->  any affordable grid point (tie mode decides
              whether equal cost counts);
  2-edges     (z, o) -> (z', o) whenever the u-order puts z above z';
  dominance   (z, o) -> (z', o') whenever z is ranked at or above z' and
              o >= o', with at least one of the two strict.

An accepting run yields a witness: the u-order plus a topological order of
the combined relation (the v-order), which together act as finite value
tables for the two utility layers.  Witnesses are re-verified before being
returned.

Two deciders share these semantics: an order-enumeration brute force for
small grids, and a lazy SAT encoding that learns a blocking clause from
each cycle found (counterexample-guided refinement).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

from . import cnf as cnf_mod
from . import satcore
from .numerics import Dominance, dominates
from .reduction import Dataset, base_points
from .rpcore import (Grid, build_grid, find_cycle_in_adjacency,
                     revealed_relation, topological_order)

log = logging.getLogger(__name__)

BRUTEFORCE_ZPART_GUARD = 9
AUTO_BRUTEFORCE_LIMIT = 8


class GuardExceeded(ValueError):
    """Too many z-parts for order enumeration; use the refinement decider."""


class WitnessConstructionError(RuntimeError):
    """No cycle-free order is compatible with the given truth assignment."""


@dataclass(frozen=True)
class SeparabilityWitness:
    u_order: tuple      # z-part indices, best first
    v_order: tuple      # grid point indices, best first
    method: str
    iterations: int = 0


@dataclass(frozen=True)
class TestVerdict:
    status: str         # "rationalizable" | "not-rationalizable"
    witness: SeparabilityWitness | None
    stats: dict

    @property
    def rationalizable(self) -> bool:
        return self.status == "rationalizable"


@dataclass(frozen=True)
class WitnessCheck:
    valid: bool
    reason: str | None = None


class _Arena:
    """Order-independent precomputation for one (dataset, grid, tie mode).

    Edges that do not depend on the u-order (1-edges and same-z dominance
    hops) are frozen once.  2-edges within an o-column are realized as the
    rank-consecutive chain, which has the same reachability as the full
    family; dominance edges across distinct z-parts are kept as candidate
    pairs gated by a single rank comparison.
    """

    def __init__(self, ds: Dataset, grid: Grid, tie_mode: str):
        self.grid = grid
        self.tie_mode = tie_mode
        self.n_points = len(grid.points)
        self.nz = len(grid.z_parts)
        base = revealed_relation(ds, grid, tie_mode)
        self.one_edges = [(e.src, e.dst) for e in base.edges]

        o_ge = {}
        for a, oa in enumerate(grid.o_parts):
            for b, ob in enumerate(grid.o_parts):
                if a != b and dominates(oa, ob) is Dominance.STRICTLY_GREATER:
                    o_ge[(a, b)] = True

        self.always = list(self.one_edges)
        self.dom_candidates = []  # (src_pt, dst_pt, z_src, z_dst)
        by_zo = {}
        for j in range(self.n_points):
            by_zo[(grid.pt_z[j], grid.pt_o[j])] = j
        for i in range(self.n_points):
            zi, oi = grid.pt_z[i], grid.pt_o[i]
            for j in range(self.n_points):
                if i == j:
                    continue
                zj, oj = grid.pt_z[j], grid.pt_o[j]
                if oi == oj:
                    continue  # same column: handled by 2-edge chains
                if (oi, oj) not in o_ge:
                    continue
                if zi == zj:
                    self.always.append((i, j))
                else:
                    self.dom_candidates.append((i, j, zi, zj))

        self.columns = {}
        for j in range(self.n_points):
            self.columns.setdefault(grid.pt_o[j], []).append(j)
        self.columns = {o: pts for o, pts in self.columns.items() if len(pts) > 1}

        self.z_dom_pairs = []
        for a in range(self.nz):
            for b in range(self.nz):
                if a != b and dominates(grid.z_parts[a], grid.z_parts[b]) \
                        is Dominance.STRICTLY_GREATER:
                    self.z_dom_pairs.append((a, b))
        self.always_set = set(self.always)

    def adjacency_under(self, rank: list) -> list:
        adj = [[] for _ in range(self.n_points)]
        for s, d in self.always:
            adj[s].append(d)
        for pts in self.columns.values():
            chain = sorted(pts, key=lambda j: rank[self.grid.pt_z[j]])
            for s, d in zip(chain, chain[1:]):
                adj[s].append(d)
        for s, d, zs, zd in self.dom_candidates:
            if rank[zs] < rank[zd]:
                adj[s].append(d)
        return adj

    def respects_dominance(self, rank: list) -> bool:
        return all(rank[a] < rank[b] for a, b in self.z_dom_pairs)

    def classify(self, src: int, dst: int) -> tuple | None:
        """Order condition behind an edge of a cycle; None if unconditional."""
        if (src, dst) in self.always_set:
            return None
        zs, zd = self.grid.pt_z[src], self.grid.pt_z[dst]
        if zs == zd:
            return None
        return (zs, zd)


def _witness_from_order(arena: _Arena, perm, method: str,
                        iterations: int) -> SeparabilityWitness | None:
    rank = [0] * arena.nz
    for pos, z in enumerate(perm):
        rank[z] = pos
    order = topological_order(arena.adjacency_under(rank))
    if order is None:
        return None
    return SeparabilityWitness(tuple(perm), tuple(order), method, iterations)


def decide_bruteforce(ds: Dataset, grid: Grid,
                      tie_mode: str = "weak") -> TestVerdict:
    """Enumerate strict total orders lexicographically; first acyclic wins."""
    arena = _Arena(ds, grid, tie_mode)
    if arena.nz > BRUTEFORCE_ZPART_GUARD:
        raise GuardExceeded(
            f"{arena.nz} z-parts exceeds the enumeration guard of "
            f"{BRUTEFORCE_ZPART_GUARD}; use decide_cegar")
    explored = 0
    rank = [0] * arena.nz
    for perm in itertools.permutations(range(arena.nz)):
        for pos, z in enumerate(perm):
            rank[z] = pos
        if not arena.respects_dominance(rank):
            continue
        explored += 1
        order = topological_order(arena.adjacency_under(rank))
        if order is not None:
            witness = SeparabilityWitness(tuple(perm), tuple(order),
                                          "bruteforce", 0)
            _assert_valid(ds, grid, witness, tie_mode)
            return TestVerdict("rationalizable", witness,
                               {"method": "bruteforce",
                                "orders_explored": explored})
    return TestVerdict("not-rationalizable", None,
                       {"method": "bruteforce", "orders_explored": explored})


def _order_var_map(nz: int):
    """SAT variables above(a, b) for every ordered pair of z-parts."""
    var = {}
    for a in range(nz):
        for b in range(nz):
            if a != b:
                var[(a, b)] = len(var) + 1
    return var


def _order_instance(nz: int, var: dict,
                    extra_units=()) -> satcore.SatInstance:
    clauses = []
    for a in range(nz):
        for b in range(a + 1, nz):
            clauses.append([var[(a, b)], var[(b, a)]])
            clauses.append([-var[(a, b)], -var[(b, a)]])
    for a, b, c in itertools.permutations(range(nz), 3):
        clauses.append([-var[(a, b)], -var[(b, c)], var[(a, c)]])
    for a, b in extra_units:
        clauses.append([var[(a, b)]])
    return satcore.SatInstance(len(var), clauses)


def _cegar_search(arena: _Arena, extra_units=(),
                  conflict_limit: int | None = None):
    """Shared refinement loop; returns (witness_order, iterations) with
    witness_order None when every admissible order has a cycle."""
    if topological_order(_unconditional_adjacency(arena)) is None:
        return None, 0
    nz = arena.nz
    if nz == 1:
        rank = [0]
        if topological_order(arena.adjacency_under(rank)) is not None:
            return (0,), 0
        return None, 0
    var = _order_var_map(nz)
    units = list(arena.z_dom_pairs) + list(extra_units)
    solver = satcore.Solver(_order_instance(nz, var, units), conflict_limit)
    iterations = 0
    while True:
        result = solver.solve()
        if result.status == "unsat":
            return None, iterations
        rank = _rank_from_model(nz, var, result.model)
        adj = arena.adjacency_under(rank)
        if topological_order(adj) is not None:
            perm = sorted(range(nz), key=lambda z: rank[z])
            return tuple(perm), iterations
        for lst in adj:
            lst.sort()
        cycle = find_cycle_in_adjacency(adj)
        conditions = []
        for s, d in zip(cycle, cycle[1:] + cycle[:1]):
            cond = arena.classify(s, d)
            if cond is not None and cond not in conditions:
                conditions.append(cond)
        if not conditions:
            return None, iterations  # cycle held by unconditional edges only
        solver.add_clause([-var[c] for c in conditions])
        iterations += 1
        log.debug("refinement %d: blocked %d order literals",
                  iterations, len(conditions))


def _unconditional_adjacency(arena: _Arena) -> list:
    adj = [[] for _ in range(arena.n_points)]
    for s, d in arena.always:
        adj[s].append(d)
    return adj


def _rank_from_model(nz: int, var: dict, model: list) -> list:
    score = [0] * nz
    for (a, b), v in var.items():
        if model[v - 1]:
            score[a] += 1
    order = sorted(range(nz), key=lambda a: (-score[a], a))
    rank = [0] * nz
    for pos, z in enumerate(order):
        rank[z] = pos
    return rank


def decide_cegar(ds: Dataset, grid: Grid, tie_mode: str = "weak",
                 conflict_limit: int | None = None) -> TestVerdict:
    """Lazy SAT search over u-orders with cycle-driven blocking clauses."""
    arena = _Arena(ds, grid, tie_mode)
    perm, iterations = _cegar_search(arena, (), conflict_limit)
    if perm is None:
        return TestVerdict("not-rationalizable", None,
                           {"method": "cegar", "iterations": iterations})
    witness = _witness_from_order(arena, perm, "cegar", iterations)
    _assert_valid(ds, grid, witness, tie_mode)
    return TestVerdict("rationalizable", witness,
                       {"method": "cegar", "iterations": iterations})


def decide(ds: Dataset, tie_mode: str = "weak",
           grid_mode: str = "per-level-union", method: str = "auto",
           conflict_limit: int | None = None) -> TestVerdict:
    """Grid construction plus method dispatch (auto favors brute force only
    on grids with at most 8 z-parts)."""
    grid = build_grid(ds, grid_mode)
    if method == "auto":
        method = "bruteforce" if len(grid.z_parts) <= AUTO_BRUTEFORCE_LIMIT \
            else "cegar"
    if method == "bruteforce":
        return decide_bruteforce(ds, grid, tie_mode)
    if method == "cegar":
        return decide_cegar(ds, grid, tie_mode, conflict_limit)
    raise ValueError(f"unknown method {method!r}")


# -- witness verification ----------------------------------------------------

def verify_witness(ds: Dataset, grid: Grid, witness: SeparabilityWitness,
                   tie_mode: str = "weak") -> WitnessCheck:
    """Full check of both orders against every constraint family.

    This path deliberately rebuilds all edges pairwise instead of reusing
    the decider's chain shortcut, so the two sides stay independent.
    """
    nz, npts = len(grid.z_parts), len(grid.points)
    if sorted(witness.u_order) != list(range(nz)):
        return WitnessCheck(False, "u-order is not a permutation of z-parts")
    if sorted(witness.v_order) != list(range(npts)):
        return WitnessCheck(False, "v-order is not a permutation of grid points")
    urank = [0] * nz
    for pos, z in enumerate(witness.u_order):
        urank[z] = pos
    vrank = [0] * npts
    for pos, j in enumerate(witness.v_order):
        vrank[j] = pos

    for a in range(nz):
        for b in range(nz):
            if a != b and dominates(grid.z_parts[a], grid.z_parts[b]) \
                    is Dominance.STRICTLY_GREATER and urank[a] > urank[b]:
                return WitnessCheck(
                    False, f"u-order inverts the dominated z-part pair "
                           f"({a}, {b})")

    base = revealed_relation(ds, grid, tie_mode)
    for e in base.edges:
        if vrank[e.src] > vrank[e.dst]:
            k = e.provenance[1]
            return WitnessCheck(
                False, f"v-order puts an affordable point above the chosen "
                       f"bundle of observation {k}")

    for i in range(npts):
        zi, oi = grid.pt_z[i], grid.pt_o[i]
        for j in range(npts):
            if i == j:
                continue
            zj, oj = grid.pt_z[j], grid.pt_o[j]
            if oi == oj:
                if urank[zi] < urank[zj] and vrank[i] > vrank[j]:
                    return WitnessCheck(
                        False, f"v-order violates the order edge between "
                               f"z-parts {zi} and {zj}")
            else:
                cmp = dominates(grid.o_parts[oi], grid.o_parts[oj])
                if cmp is Dominance.STRICTLY_GREATER and \
                        (zi == zj or urank[zi] < urank[zj]) and \
                        vrank[i] > vrank[j]:
                    return WitnessCheck(
                        False, f"v-order violates the dominance edge from "
                               f"point {i} to {j}")
    return WitnessCheck(True, None)


def _assert_valid(ds, grid, witness, tie_mode):
    check = verify_witness(ds, grid, witness, tie_mode)
    if not check.valid:
        raise RuntimeError(f"internal error: produced witness fails its own "
                           f"verification: {check.reason}")


# -- from truth assignments to witnesses -------------------------------------

def truth_assignment_to_witness(f: cnf_mod.CnfFormula, ds: Dataset,
                                grid: Grid, assignment: dict,
                                tie_mode: str = "weak") -> SeparabilityWitness:
    """Turn a satisfying assignment into an ordering witness.

    A true variable ranks its second base bundle above the first, which
    disarms that variable's link in the clause chain cycle.  The pair
    constraints plus z-dominance are extended to a total order by a
    lowest-index topological pass; if that particular extension still
    leaves a cycle, the refinement search is rerun with the pair
    constraints pinned, and only if no compatible order exists at all does
    construction fail.
    """
    if not cnf_mod.evaluate(f, assignment):
        raise WitnessConstructionError("assignment does not satisfy the formula")
    bp = base_points(f.var_count)
    z_index = {part: idx for idx, part in enumerate(grid.z_parts)}
    pairs = []
    for v in range(1, f.var_count + 1):
        first = z_index.get(bp.z[(v, 1)])
        second = z_index.get(bp.z[(v, 2)])
        if first is None or second is None:
            continue  # variable unused by any clause
        pairs.append((second, first) if assignment[v] else (first, second))

    arena = _Arena(ds, grid, tie_mode)
    constraints = list(arena.z_dom_pairs) + pairs
    adj = [[] for _ in range(arena.nz)]
    for a, b in constraints:
        adj[a].append(b)
    extension = topological_order(adj)
    if extension is not None:
        witness = _witness_from_order(arena, tuple(extension), "assignment", 0)
        if witness is not None:
            _assert_valid(ds, grid, witness, tie_mode)
            return witness
    perm, iterations = _cegar_search(arena, pairs)
    if perm is None:
        raise WitnessConstructionError(
            "every order compatible with the assignment leaves a preference "
            "cycle on the grid")
    witness = _witness_from_order(arena, perm, "assignment", iterations)
    _assert_valid(ds, grid, witness, tie_mode)
    return witness


# -- witness serialization ----------------------------------------------------

def witness_to_json(witness: SeparabilityWitness) -> dict:
    return {"u_order": list(witness.u_order),
            "v_order": list(witness.v_order),
            "method": witness.method,
            "iterations": witness.iterations}


def witness_from_json(doc: dict) -> SeparabilityWitness:
    return SeparabilityWitness(
        u_order=tuple(int(v) for v in doc["u_order"]),
        v_order=tuple(int(v) for v in doc["v_order"]),
        method=str(doc.get("method", "unknown")),
        iterations=int(doc.get("iterations", 0)))

import random
from fractions import Fraction

import pytest

from seprat import cnf
from seprat.reduction import Dataset, EvaluationPoint, Observation

SINGLE_CLAUSE = "p cnf 3 1\n1 2 3 0\n"

# Every sign pattern over (x1, x2, x3): unsatisfiable, and the smallest
# 3SAT instance that is (eight clauses partition the assignment cube).
ALL_SIGN_PATTERNS = "p cnf 3 8\n" + "".join(
    f"{'-' if a else ''}1 {'-' if b else ''}2 {'-' if c else ''}3 0\n"
    for a in (0, 1) for b in (0, 1) for c in (0, 1))

# Satisfiable, but the two clauses impose contradictory cross-variable
# order constraints through the chain slots (see the septest tests).
SLOT_CONFLICT = "p cnf 4 2\n2 1 3 0\n-1 -2 4 0\n"


@pytest.fixture
def single_clause():
    return cnf.parse_dimacs(SINGLE_CLAUSE)


@pytest.fixture
def all_sign_patterns():
    return cnf.parse_dimacs(ALL_SIGN_PATTERNS)


def random_fraction(rng: random.Random, lo=0, hi=4) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.randint(1, 3))


def random_foreign_dataset(rng: random.Random, max_z_parts=6):
    """Small random dataset with positive prices, nothing to do with any
    reduction output."""
    n_z, n_o = 2, rng.randint(1, 2)
    while True:
        obs = []
        for _ in range(rng.randint(2, 4)):
            x = tuple(random_fraction(rng) for _ in range(n_z + n_o))
            p = tuple(random_fraction(rng, 1) + Fraction(1, 4)
                      for _ in range(n_z + n_o))
            obs.append(Observation(x=x, p=p))
        evs = [
            EvaluationPoint(
                x=tuple(random_fraction(rng) for _ in range(n_z + n_o)))
            for _ in range(rng.randint(0, 2))]
        ds = Dataset(n_z=n_z, n_o=n_o, observations=tuple(obs),
                     evaluation_points=tuple(evs))
        z_parts = {tuple(o.x[:n_z]) for o in obs}
        z_parts |= {tuple(e.x[:n_z]) for e in evs}
        if len(z_parts) <= max_z_parts:
            return ds

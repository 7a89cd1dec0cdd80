"""Role partitioning and value scaling for the approximation scheme.

Resources split into R1 (Agent 1 values strictly more), R2 (Agent 2
strictly more) and R0 (ties). A role case decides which side the ties sit
on and whether the agents' names are swapped for the run; all four
combinations are emitted.

Scaling follows a guess (j0, j1, j2) naming the maximum-price resource of
the sale set and the maximum-utility resources of each bundle (any of them
may be marked empty). Values above a guessed maximum are replaced by a
sentinel that keeps the resource out of that set; the rest are divided by
K = eps' * m_max / n and rounded up for u1, down for u2, and both ways for
the price.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import BadGuess
from .model import Instance

PLUS_INF = math.inf
MINUS_INF = -math.inf

Scaled = Union[int, float]


@dataclass(frozen=True)
class RoleCase:
    """One of the four (agent naming, tie side) combinations.

    a1/a2 are resource-name sets expressed in the naming the run uses: when
    swap_agents is set, the run exchanges u1 and u2 first, and a1/a2 refer
    to the swapped utilities.
    """

    swap_agents: bool
    ties_to_one: bool
    a1: frozenset[str]
    a2: frozenset[str]


@dataclass(frozen=True)
class ScaledInstance:
    """Per-resource scaled values aligned with instance resource order.

    u1_scaled rounds up (+inf marks exclusion from S1), u2_scaled rounds
    down (-inf marks exclusion from S2), and the price scales both ways
    (excluded resources carry -inf/+inf and cannot be sold).
    """

    u1_scaled: tuple[Scaled, ...]
    u2_scaled: tuple[Scaled, ...]
    p_scaled_down: tuple[Scaled, ...]
    p_scaled_up: tuple[Scaled, ...]
    k_param: Fraction
    eps_prime: Fraction
    m_max: int
    guess: tuple[Optional[str], Optional[str], Optional[str]]
    resources: tuple


def partition_roles(inst: Instance):
    """(A1, A2, cases): the default role assignment and all four cases."""
    r0 = frozenset(r.name for r in inst.resources if r.u1 == r.u2)
    r1 = frozenset(r.name for r in inst.resources if r.u1 > r.u2)
    r2 = frozenset(r.name for r in inst.resources if r.u2 > r.u1)
    cases = []
    for swap in (False, True):
        # in the swapped naming the strict sides trade places; ties stay ties
        s1, s2 = (r2, r1) if swap else (r1, r2)
        for ties_to_one in (False, True):
            a1 = s1 | r0 if ties_to_one else s1
            a2 = s2 if ties_to_one else s2 | r0
            cases.append(RoleCase(swap, ties_to_one, a1, a2))
    return r1, r2 | r0, cases


def to_eps(eps) -> Fraction:
    """Exact epsilon: floats convert through their decimal string form."""
    if isinstance(eps, float):
        eps = Fraction(str(eps))
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    return eps


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def _resolve_guess(inst: Instance, entry) -> Optional[str]:
    if entry is None:
        return None
    if isinstance(entry, int):
        if not 0 <= entry < inst.n:
            raise BadGuess(f"guess index {entry} out of range")
        return inst.resources[entry].name
    names = {r.name for r in inst.resources}
    if entry not in names:
        raise BadGuess(f"guess names unknown resource {entry!r}")
    return entry


def scale_instance(inst: Instance, guess, eps) -> ScaledInstance:
    """Scale all values for one guess of per-set maxima.

    guess = (j0, j1, j2): resources bounding the price of the sale set and
    the utilities of the two bundles; None marks the set as guessed empty,
    excluding every resource from it.
    """
    eps = to_eps(eps)
    if inst.n == 0:
        raise BadGuess("cannot scale an empty instance")
    j0, j1, j2 = (_resolve_guess(inst, e) for e in guess)
    by_name = {r.name: r for r in inst.resources}
    caps = []
    p_cap = by_name[j0].p if j0 is not None else None
    u1_cap = by_name[j1].u1 if j1 is not None else None
    u2_cap = by_name[j2].u2 if j2 is not None else None
    caps = [v for v in (p_cap, u1_cap, u2_cap) if v is not None]
    if not caps or max(caps) == 0:
        raise BadGuess(f"guess {guess!r} admits no positive values")
    m_max = -(-max(caps) // 2)
    eps_prime = eps / (eps + 2)
    k = eps_prime * m_max / inst.n

    u1s, u2s, pdn, pup = [], [], [], []
    for r in inst.resources:
        if u1_cap is not None and r.u1 <= u1_cap:
            u1s.append(_ceil(Fraction(r.u1) / k))
        else:
            u1s.append(PLUS_INF)
        if u2_cap is not None and r.u2 <= u2_cap:
            u2s.append(_floor(Fraction(r.u2) / k))
        else:
            u2s.append(MINUS_INF)
        if p_cap is not None and r.p <= p_cap:
            pdn.append(_floor(Fraction(r.p) / k))
            pup.append(_ceil(Fraction(r.p) / k))
        else:
            pdn.append(MINUS_INF)
            pup.append(PLUS_INF)
    return ScaledInstance(
        u1_scaled=tuple(u1s),
        u2_scaled=tuple(u2s),
        p_scaled_down=tuple(pdn),
        p_scaled_up=tuple(pup),
        k_param=k,
        eps_prime=eps_prime,
        m_max=m_max,
        guess=(j0, j1, j2),
        resources=inst.resources,
    )

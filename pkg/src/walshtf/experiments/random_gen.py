"""Seeded generators for functions, sets, collections and pinned trees.

Every generator takes an explicit random.Random so drivers can derive
independent deterministic streams from one configured seed.  Quartiles
are always emitted valid for the grid box: scales in [2 - m, J] and
frequencies resolvable at cell width 2^-m.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from ..exact import pow2_fraction
from ..geometry import DyadicInterval, Quartile, Tree, containing_interval
from ..operators import FrequencySet
from ..wavepacket import StepFunction


def sign_function(
    rng: random.Random, domain_exp: int, resolution_exp: int
) -> StepFunction:
    """Cell values drawn uniformly from {-1, 0, 1}."""
    values = [
        rng.choice((-1, 0, 1)) for _ in range(1 << (domain_exp + resolution_exp))
    ]
    return StepFunction(domain_exp, resolution_exp, values)


def dyadic_function(
    rng: random.Random,
    domain_exp: int,
    resolution_exp: int,
    denom_exp: int = 3,
) -> StepFunction:
    """Cell values on the dyadic grid of step 2^-denom_exp inside [-1, 1]."""
    denom = 1 << denom_exp
    values = [
        Fraction(rng.randint(-denom, denom), denom)
        for _ in range(1 << (domain_exp + resolution_exp))
    ]
    return StepFunction(domain_exp, resolution_exp, values)


def dyadic_set(
    rng: random.Random,
    domain_exp: int,
    resolution_exp: int,
    density: float = 0.5,
) -> StepFunction:
    """Indicator of a random union of grid cells, never empty."""
    total = 1 << (domain_exp + resolution_exp)
    values = [1 if rng.random() < density else 0 for _ in range(total)]
    if not any(values):
        values[rng.randrange(total)] = 1
    return StepFunction(domain_exp, resolution_exp, values)


def masked_signs(rng: random.Random, mask: StepFunction) -> StepFunction:
    """Random signs on the support of mask, zero elsewhere."""
    values = [rng.choice((-1, 1)) if v else 0 for v in mask.values]
    return StepFunction(mask.domain_exp, mask.resolution_exp, values)


def random_quartile(
    rng: random.Random,
    domain_exp: int,
    resolution_exp: int,
    scale_range: tuple[int, int] | None = None,
) -> Quartile:
    lo = 2 - resolution_exp
    hi = domain_exp
    if scale_range is not None:
        lo, hi = max(lo, scale_range[0]), min(hi, scale_range[1])
    if lo > hi:
        raise ValueError("empty quartile scale range")
    k = rng.randint(lo, hi)
    time = DyadicInterval(rng.randrange(1 << (domain_exp - k)), k)
    freq = DyadicInterval(rng.randrange(1 << (resolution_exp + k - 2)), 2 - k)
    return Quartile(time, freq)


def quartile_collection(
    rng: random.Random,
    count: int,
    domain_exp: int,
    resolution_exp: int,
    scale_range: tuple[int, int] | None = None,
) -> list[Quartile]:
    """Distinct quartiles sampled without replacement; overlaps allowed.

    Every time scale carries the same number of grid quartiles, so the
    scale-then-position draw of random_quartile is uniform over the
    whole box and rejection only has to dodge exact repeats.
    """
    seen: set[Quartile] = set()
    out: list[Quartile] = []
    budget = 60 * count + 60
    while len(out) < count and budget:
        budget -= 1
        q = random_quartile(rng, domain_exp, resolution_exp, scale_range)
        if q not in seen:
            seen.add(q)
            out.append(q)
    if len(out) < count:
        raise RuntimeError(
            f"could not draw {count} distinct quartiles "
            f"in a (J={domain_exp}, m={resolution_exp}) box"
        )
    return out


def _quartiles_clash(a: Quartile, b: Quartile) -> bool:
    return a.time.intersects(b.time) and a.freq.intersects(b.freq)


def disjoint_collection(
    rng: random.Random,
    count: int,
    domain_exp: int,
    resolution_exp: int,
    scale_range: tuple[int, int] | None = None,
) -> list[Quartile]:
    """Pairwise disjoint quartiles by rejection sampling.

    Raises RuntimeError when the box is too crowded to fit the request;
    callers should keep the fill factor modest.
    """
    out: list[Quartile] = []
    budget = 300 * count + 300
    while len(out) < count:
        if budget == 0:
            raise RuntimeError(
                f"could not place {count} disjoint quartiles "
                f"in a (J={domain_exp}, m={resolution_exp}) box"
            )
        budget -= 1
        q = random_quartile(rng, domain_exp, resolution_exp, scale_range)
        if all(not _quartiles_clash(q, p) for p in out):
            out.append(q)
    return out


def pinned_tree(
    rng: random.Random,
    pin: int,
    domain_exp: int,
    resolution_exp: int,
    depth: int = 3,
    max_per_scale: int = 3,
) -> Tree:
    """A uniformly pin-overlapping tree inside the grid box.

    The top frequency is assembled digit by digit: a member at time
    scale k forces the two digits of weight 2^(1-k) and 2^-k to spell
    the pin.  When those two digits differ, consecutive member scales
    would contradict each other, so the drawn scales are thinned to
    leave gaps of at least two.  Unconstrained digits are sprinkled at
    random, which keeps distinct trees at distinct top frequencies.
    """
    if pin not in (1, 2, 3, 4):
        raise ValueError("pin must be 1, 2, 3 or 4")
    hi, lo = divmod(pin - 1, 2)
    k_min = 2 - resolution_exp
    avail = list(range(k_min, domain_exp + 1))
    drawn = sorted(rng.sample(avail, min(max(depth, 1), len(avail))))
    if hi != lo:
        scales = []
        for k in drawn:
            if not scales or k - scales[-1] >= 2:
                scales.append(k)
    else:
        scales = drawn
    digits: dict[int, int] = {}
    for k in scales:
        digits[k - 1] = hi
        digits[k] = lo
    for j in range(k_min - 1, resolution_exp + 1):
        if j not in digits and rng.random() < 0.25:
            digits[j] = 1
    xi = sum(
        (pow2_fraction(-j) for j, d in digits.items() if d), Fraction(0)
    )
    top_scale = rng.randint(scales[-1], domain_exp)
    top = DyadicInterval(rng.randrange(1 << (domain_exp - top_scale)), top_scale)
    members: list[Quartile] = []
    for k in scales:
        room = 1 << (top_scale - k)
        base = top.index * room
        for off in rng.sample(range(room), min(rng.randint(1, max_per_scale), room)):
            members.append(
                Quartile(DyadicInterval(base + off, k), containing_interval(xi, 2 - k))
            )
    return Tree(members, top, xi)


def pinned_forest(
    rng: random.Random,
    pin: int,
    domain_exp: int,
    resolution_exp: int,
    count: int,
    depth: int = 3,
) -> list[Tree]:
    """Several pin-overlapping trees with pairwise distinct top frequencies."""
    trees: list[Tree] = []
    seen: set[Fraction] = set()
    attempts = 50 * count + 50
    while len(trees) < count and attempts:
        attempts -= 1
        tree = pinned_tree(rng, pin, domain_exp, resolution_exp, depth)
        xi = tree.top_freq.as_fraction()
        if xi in seen:
            continue
        seen.add(xi)
        trees.append(tree)
    if len(trees) < count:
        raise RuntimeError("could not draw enough distinct top frequencies")
    return trees


def tree_coefficients(
    rng: random.Random, members: Sequence[Quartile], denom_exp: int = 3
) -> dict[Quartile, Fraction]:
    """Random dyadic weights in [-1, 1], one per member."""
    denom = 1 << denom_exp
    return {q: Fraction(rng.randint(-denom, denom), denom) for q in members}


def frequency_set(
    rng: random.Random,
    count: int,
    resolution_exp: int,
    top_exp: int = 3,
) -> FrequencySet:
    """Distinct dyadic frequencies in [0, 2^top_exp) at step 2^-resolution_exp."""
    total = 1 << (resolution_exp + top_exp)
    picks = rng.sample(range(total), min(count, total))
    return FrequencySet(
        Fraction(n, 1 << resolution_exp) for n in sorted(picks)
    )

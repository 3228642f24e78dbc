import random

import pytest
from hypothesis import strategies as st

from scatord.ordinals import ZERO, add, mul, nat, omega_pow


def small_ordinal(terms):
    """Build sum of w^e * c from (e, c) pairs with e < 4, in any order (absorption applies)."""
    out = ZERO
    for e, c in terms:
        if c:
            out = add(out, mul(omega_pow(nat(e)), nat(c)))
    return out


ordinals_below_w4 = st.lists(st.tuples(st.integers(0, 3), st.integers(0, 5)), max_size=4).map(small_ordinal)


def sample_below_w4(rng: random.Random, n: int):
    """n distinct ordinals below w^4 (plus w^4 itself when asked for at least 100)."""
    seen = set()
    while len(seen) < n:
        terms = sorted(((rng.randint(0, 3), rng.randint(0, 6)) for _ in range(rng.randint(1, 4))), reverse=True)
        seen.add(small_ordinal(terms))
    out = sorted(seen)
    if n >= 100:
        out[-1] = omega_pow(nat(4))
    return out


@pytest.fixture
def rng():
    return random.Random(20240611)

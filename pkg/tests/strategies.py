"""Hypothesis strategies for stationary MAR models."""

import numpy as np
from hypothesis import strategies as st

from martail import MarModel

root = st.floats(min_value=-0.85, max_value=0.85).filter(lambda x: abs(x) > 0.05)
positive_root = st.floats(min_value=0.05, max_value=0.85)


def _poly(roots):
    # 1 - c_1 z - ... = prod (1 - r z)
    coeffs = np.poly(roots) if roots else np.array([1.0])
    return tuple(-coeffs[1:])


@st.composite
def mar_models(draw, max_p=2, max_q=2, min_p=0, min_q=0, positive=False):
    r = positive_root if positive else root
    p = draw(st.integers(min_p, max_p))
    q = draw(st.integers(min_q, max_q))
    if p + q == 0:
        q = 1
    lam = draw(st.lists(r, min_size=p, max_size=p))
    mu = draw(st.lists(r, min_size=q, max_size=q))
    return MarModel(_poly(lam), _poly(mu))


alphas = st.floats(min_value=0.5, max_value=2.0)

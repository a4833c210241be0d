"""Shared matrix builders and hypothesis strategies."""

from fractions import Fraction

from hypothesis import strategies as st

from lvpir.model import CharMatrix


def identity(n):
    return CharMatrix(tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)))


@st.composite
def char_matrices(draw, max_K=6, max_T=4):
    """Column-stochastic rational matrices; columns come from a small pool so
    repeated columns and private subsets show up often."""
    T = draw(st.integers(1, max_T))
    K = draw(st.integers(1, max_K))
    pool_size = draw(st.integers(1, K))
    pool = []
    for _ in range(pool_size):
        w = draw(st.lists(st.integers(0, 6), min_size=T, max_size=T).filter(lambda v: sum(v) > 0))
        pool.append([Fraction(x, sum(w)) for x in w])
    idx = draw(st.lists(st.integers(0, pool_size - 1), min_size=K, max_size=K))
    cols = [pool[i] for i in idx]
    return CharMatrix(tuple(tuple(c[t] for c in cols) for t in range(T)))

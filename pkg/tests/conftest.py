"""Shared fixtures and hypothesis strategies."""

import pytest
from hypothesis import strategies as st
from sympy import QQ

from src.models.algebra_core import base_ring
from src.models.diffop import PolyDiffOp

PLANE = ("x", "y")


@pytest.fixture
def plane():
    return base_ring(PLANE)


@pytest.fixture
def phase_space():
    return base_ring(("x", "p"))


def multi_indices(nvars: int = 2, max_order: int = 2):
    return st.lists(st.integers(0, max_order), min_size=nvars, max_size=nvars).map(tuple).filter(
        lambda idx: sum(idx) <= max_order)


def polynomials(names=PLANE, max_degree: int = 2, max_terms: int = 3):
    ring = base_ring(names)
    term = st.tuples(multi_indices(len(names), max_degree), st.integers(-3, 3))
    return st.lists(term, max_size=max_terms).map(
        lambda terms: ring({exps: QQ(c) for exps, c in dict(terms).items() if c}) if terms else ring.zero)


def operators(names=PLANE, arity: int = 1, max_order: int = 2, max_terms: int = 3):
    ring = base_ring(names)
    key = st.tuples(*[multi_indices(len(names), max_order)] * arity)
    term = st.tuples(key, polynomials(names, 1, 2))
    return st.lists(term, max_size=max_terms).map(lambda terms: PolyDiffOp(ring, arity, dict(terms)))

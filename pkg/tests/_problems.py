"""Shared problem builders for the test suite."""

import numpy as np

from vsturm import PotentialSpec, make_problem
from vsturm.trigpoly import cosine, poly, sine


def free_problem(n):
    return make_problem(PotentialSpec.zero(n))


def const_problem(matrix, h_left=None, h_right=None):
    return make_problem(PotentialSpec.constant(matrix), h_left, h_right)


def coupled_problem():
    """Constant off-diagonal coupling, eigenchannels q = +-1."""
    return const_problem([[0.0, 1.0], [1.0, 0.0]])


def two_i_problem():
    return const_problem([[2.0, 0.0], [0.0, 2.0]])


def diag_mixed_problem():
    """P = diag(1 + cos x, 4) with diagonal Robin data."""
    spec = PotentialSpec.diagonal([poly(1.0) + cosine(1.0), poly(4.0)])
    return make_problem(spec, np.diag([0.0, 1.0]), np.diag([1.0, 0.0]))


def generic_problem():
    """P = [[sin x, x/pi], [x/pi, 1]], H_L = 0, H_R = I."""
    spec = PotentialSpec.dense(
        2, [sine(1.0), poly(0.0, 1.0 / np.pi), poly(1.0)])
    return make_problem(spec, np.zeros((2, 2)), np.eye(2))


def scalar_problem(q=None, h_left=0.0, h_right=0.0):
    spec = PotentialSpec.diagonal([q if q is not None else 0.0])
    return make_problem(spec, [[h_left]], [[h_right]])

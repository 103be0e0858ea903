"""Hermite and Laguerre polynomials by three-term recurrence."""

import math

import numpy as np


def hermite(m: int, x):
    """Physicists' Hermite polynomial H_m(x)."""
    x = np.asarray(x, dtype=float)
    h_prev, h = np.zeros_like(x), np.ones_like(x)
    for j in range(m):
        h_prev, h = h, 2 * x * h - 2 * j * h_prev
    return h if h.ndim else float(h)


def hermite_function(m: int, x):
    """Normalized oscillator eigenfunction H_m(x) exp(-x^2/2) / sqrt(sqrt(pi) 2^m m!).

    Uses the normalized recurrence, which stays finite where H_m itself
    would overflow.
    """
    x = np.asarray(x, dtype=float)
    h_prev = np.zeros_like(x)
    h = np.pi**-0.25 * np.exp(-0.5 * x * x)
    for j in range(m):
        h_prev, h = h, math.sqrt(2.0 / (j + 1)) * x * h - math.sqrt(j / (j + 1)) * h_prev
    return h if h.ndim else float(h)


def laguerre(m: int, x):
    """Laguerre polynomial L_m(x)."""
    x = np.asarray(x, dtype=float)
    l_prev, l = np.zeros_like(x), np.ones_like(x)
    for j in range(m):
        l_prev, l = l, ((2 * j + 1 - x) * l - j * l_prev) / (j + 1)
    return l if l.ndim else float(l)

"""Published SU(4) structure constants, used only for cross-checking.

The library never reads these to drive dynamics; :func:`structure_constants`
computes f from the generators.
"""
from math import sqrt

SU4_TABLE = {
    (1, 2, 9): -0.5,
    (1, 3, 8): -0.5,
    (1, 4, 11): -0.5,
    (1, 5, 10): -0.5,
    (1, 7, 13): 1.0,
    (2, 3, 7): 0.5,
    (2, 5, 12): -0.5,
    (2, 6, 11): -0.5,
    (2, 8, 13): -0.5,
    (2, 8, 14): sqrt(3) / 2,
    (3, 4, 12): -0.5,
    (3, 6, 10): -0.5,
    (3, 9, 13): 0.5,
    (3, 9, 14): sqrt(3) / 2,
    (4, 5, 7): -0.5,
    (4, 6, 9): -0.5,
    (4, 10, 13): 0.5,
    (4, 10, 14): 1 / (2 * sqrt(3)),
    (4, 10, 15): sqrt(2) / sqrt(3),
    (5, 6, 8): -0.5,
    (5, 11, 13): -0.5,
    (5, 11, 14): 1 / (2 * sqrt(3)),
    (5, 11, 15): sqrt(2) / sqrt(3),
    (6, 12, 14): -1 / sqrt(3),
    (6, 12, 15): sqrt(2) / sqrt(3),
    (7, 8, 9): 0.5,
    (7, 10, 11): -0.5,
    (8, 11, 12): -0.5,
    (9, 10, 12): -0.5,
}

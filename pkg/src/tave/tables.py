"""Published reference instances and tabulated values.

Indices below are 1-based, as printed.
"""

from __future__ import annotations

import numpy as np

from .tensor import SignDiagonal, Tensor

# Random symmetric nonnegative B in S(4,4), one value per sorted index.
TABLE5_B = {
    "1111": 0.8147, "1112": 0.9058, "1113": 0.1270, "1114": 0.9134, "1122": 0.6324,
    "1123": 0.0975, "1124": 0.2785, "1133": 0.5469, "1134": 0.9575, "1144": 0.9649,
    "1222": 0.1576, "1223": 0.9706, "1224": 0.9572, "1233": 0.4854, "1234": 0.8003,
    "1244": 0.1419, "1333": 0.4218, "1334": 0.9157, "1344": 0.7922, "1444": 0.9595,
    "2222": 0.6557, "2223": 0.0357, "2224": 0.8491, "2233": 0.9340, "2234": 0.6787,
    "2244": 0.7577, "2333": 0.7431, "2334": 0.3922, "2344": 0.6555, "2444": 0.1712,
    "3333": 0.7060, "3334": 0.0318, "3344": 0.2769, "3444": 0.0462, "4444": 0.0971,
}

# A = c I - B with c = 1 + 1.01 max_i (B e^3)_i.
TABLE6_A = {
    "1111": 40.8037, "1112": -0.9058, "1113": -0.1270, "1114": -0.9134, "1122": -0.6324,
    "1123": -0.0975, "1124": -0.2785, "1133": -0.5469, "1134": -0.9575, "1144": -0.9649,
    "1222": -0.1576, "1223": -0.9706, "1224": -0.9572, "1233": -0.4854, "1234": -0.8003,
    "1244": -0.1419, "1333": -0.4218, "1334": -0.9157, "1344": -0.7922, "1444": -0.9595,
    "2222": 40.9627, "2223": -0.0357, "2224": -0.8491, "2233": -0.9340, "2234": -0.6787,
    "2244": -0.7577, "2333": -0.7431, "2334": -0.3922, "2344": -0.6555, "2444": -0.1712,
    "3333": 40.9124, "3334": -0.0318, "3344": -0.2769, "3444": -0.0462, "4444": 41.5213,
}

# Shift implied by the two tables: a_1111 + b_1111.
TABLE6_SHIFT = 41.6184

# (x, b) pairs solved on the TABLE6_A instance.
TABLE7 = [
    ((0.8100, 0.7881, 0.7786, 0.8003), (1.4193, 0.2916, 0.1978, 1.5877)),
    ((0.7285, 0.7212, 0.7156, 0.7098), (0.8045, 0.6966, 0.8351, 0.2437)),
    ((0.7219, 0.7313, 0.7230, 0.7098), (0.2157, 1.1658, 1.1480, 0.1049)),
    ((0.8453, 0.8603, 0.8294, 0.8276), (0.7223, 2.5855, 0.6669, 0.1873)),
    ((0.8445, 0.8584, 0.8321, 0.8507), (0.0825, 1.9330, 0.4390, 1.7947)),
    ((0.7104, 0.7055, 0.6849, 0.6957), (0.8404, 0.8880, 0.1001, 0.5445)),
    ((0.6775, 0.6771, 0.6677, 0.6750), (0.3035, 0.6003, 0.4900, 0.7394)),
    ((0.9021, 0.8787, 0.8894, 0.8805), (1.7119, 0.1941, 2.1384, 0.8396)),
    ((0.8104, 0.8007, 0.7908, 0.7841), (1.3546, 1.0722, 0.9610, 0.1240)),
    ((0.8957, 0.8939, 0.8661, 0.8808), (1.4367, 1.9609, 0.1977, 1.2078)),
]

# Solutions on TABLE6_A with b = (-1, 1, 1, 1).
TABLE8_B = (-1.0, 1.0, 1.0, 1.0)
TABLE8_X = [
    (0.0800, 0.3629, 0.3543, 0.3505),
    (-0.2593, 0.2948, 0.2891, 0.2903),
    (0.6258, 0.6600, 0.6522, 0.6537),
]
TABLE8_POSITIVE = TABLE8_X[2]

# z* for the sign-diagonal sweep on a random C in S(4,10).
SWEEP_Z_STAR = (0.1040, 0.7455, 0.7363, 0.5619, 0.1842, 0.5972, 0.2999, 0.1341, 0.2126, 0.8949)

# The five sign patterns used for the solver runs of the sweep.
TABLE2_SIGNS = [
    (-1, -1, -1, -1, -1, -1, -1, -1, -1, -1),
    (-1, 1, -1, 1, -1, 1, -1, -1, -1, 1),
    (1, 1, -1, -1, 1, 1, -1, -1, -1, -1),
    (-1, 1, -1, 1, -1, 1, -1, -1, 1, 1),
    (1, -1, 1, 1, 1, 1, -1, 1, -1, 1),
]

# Parameters of the reported runs.
SOLVER_DEFAULTS = {"epsilon": 1e-6, "rho_descent": 1e-10, "p": 2.1, "beta": 1e-4, "mu": 0.3, "max_iter": 300}


def _symmetric_from_table(table: dict[str, float]) -> Tensor:
    entries = {tuple(int(c) - 1 for c in key): v for key, v in table.items()}
    return Tensor.from_entries(4, 4, entries, symmetric=True)


def table5_B() -> Tensor:
    return _symmetric_from_table(TABLE5_B)


def table6_A() -> Tensor:
    return _symmetric_from_table(TABLE6_A)


def cd_example_C() -> Tensor:
    """C in T(4,2) with c_1111 = c_1222 = c_2111 = c_2222 = 1."""
    return Tensor.from_entries(4, 2, {(0, 0, 0, 0): 1, (0, 1, 1, 1): 1, (1, 0, 0, 0): 1, (1, 1, 1, 1): 1})


CD_EXAMPLE_SIGNS = SignDiagonal((1, -1))
CD_EXAMPLE_Z = np.array([2.0, 2.0])
CD_EXAMPLE_B = np.array([8.0, 8.0])
CD_EXAMPLE_X = np.array([2.0, -2.0])


def cd_example_A() -> Tensor:
    """A = C D with a_1111 = a_2111 = 1, a_1222 = a_2222 = -1."""
    return Tensor.from_entries(4, 2, {(0, 0, 0, 0): 1, (1, 0, 0, 0): 1, (0, 1, 1, 1): -1, (1, 1, 1, 1): -1})


def no_solution_A() -> Tensor:
    """Tensor of the displayed no-solution system.

    x1^3 - x2^3 - |x1|^3 = 1 and -2 x1^3 + x2^3 - |x2|^3 = 2, so
    a_1111 = 1, a_1222 = -1, a_2111 = -2, a_2222 = 1.
    """
    return Tensor.from_entries(4, 2, {(0, 0, 0, 0): 1, (0, 1, 1, 1): -1, (1, 0, 0, 0): -2, (1, 1, 1, 1): 1})


NO_SOLUTION_B = np.array([1.0, 2.0])
# min ||H|| of the no-solution instance over [-3,3]^2 sampled at 0.01 is about 5.545
NO_SOLUTION_H_FLOOR = 0.1

"""Published parameter values and iteration counts for the two benchmark examples.

Keys are ``(example, grid)`` where ``grid`` is the side length ``m``
(``n = m**2``). PGSOR entries are kept for completeness but no solver here
uses them.
"""

GRIDS = (16, 32, 64, 128, 256)

_PARAMS = {
    1: {
        "mhss": (1.06, 0.75, 0.54, 0.40, 0.30),
        "sbts": (0.532, 0.525, 0.520, 0.518, 0.517),
        "pgsor": ((0.990, 0.657), (0.988, 0.624), (0.986, 0.602), (0.984, 0.590), (0.983, 0.583)),
        "psbts": ((0.881, 0.657), (0.864, 0.624), (0.854, 0.602), (0.849, 0.590), (0.844, 0.583)),
        "ssts-opt": ((1.019, 0.657), (1.025, 0.624), (1.030, 0.602), (1.033, 0.590), (1.035, 0.583)),
        "ssts-exp": ((1.04, 0.601), (1.04, 0.602), (1.045, 0.605), (1.05, 0.61), (1.05, 0.61)),
    },
    2: {
        "mhss": (0.21, 0.08, 0.04, 0.02, 0.01),
        "sbts": (11.986, 11.898, 11.875, 11.868, 11.863),
        "pgsor": ((0.898, 1.308), (0.896, 1.324), (0.896, 1.328), (0.895, 1.330), (0.895, 1.330)),
        "psbts": ((0.689, 1.308), (0.688, 1.324), (0.687, 1.328), (0.687, 1.330), (0.687, 1.330)),
        "ssts-opt": ((1.254, 1.308), (1.259, 1.324), (1.261, 1.328), (1.262, 1.330), (1.262, 1.330)),
        "ssts-exp": ((1.34, 1.38), (1.38, 1.32), (1.38, 1.33), (1.40, 1.33), (1.41, 1.38)),
    },
}

# Iteration counts (sweeps) of the stationary methods.
_ITERATIONS = {
    1: {
        "mhss": (40, 54, 73, 98, 133),
        "sbts": (24, 32, 39, 45, 48),
        "pgsor": (4, 4, 5, 5, 5),
        "psbts": (4, 4, 4, 4, 4),
        "ssts-opt": (4, 5, 5, 5, 5),
        "ssts-exp": (4, 4, 4, 4, 4),
    },
    2: {
        "mhss": (34, 38, 50, 81, 139),
        "sbts": (78, 77, 77, 77, 77),
        "pgsor": (8, 7, 8, 8, 8),
        "psbts": (8, 9, 9, 9, 9),
        "ssts-opt": (9, 9, 10, 10, 10),
        "ssts-exp": (8, 8, 7, 7, 6),
    },
}

# GMRES(10) as (cycles, steps in last cycle); attributed to the first example.
_GMRES = {
    "gmres": ((5, 4), (8, 1), (12, 6), (20, 4), (35, 3)),
    "ssts-opt-gmres": ((1, 4),) * 5,
    "ssts-exp-gmres": ((1, 4), (1, 4), (1, 4), (1, 5), (1, 5)),
}


def _index(grid: int) -> int:
    try:
        return GRIDS.index(grid)
    except ValueError:
        raise KeyError(f"no published entry for grid {grid}") from None


def table1(example: int, grid: int, method: str):
    """Published parameter(s): a float ``alpha`` or an ``(alpha, omega)`` pair."""
    return _PARAMS[example][method][_index(grid)]


def published_iterations(example: int, grid: int, method: str) -> int:
    return _ITERATIONS[example][method][_index(grid)]


def published_gmres(grid: int, method: str) -> tuple[int, int]:
    return _GMRES[method][_index(grid)]

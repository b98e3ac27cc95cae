from dataclasses import dataclass


@dataclass
class SolverConfig:
    """Numerical tolerances of the constraint expansion and the Groebner basis solver"""

    # relative to the largest coefficient of a polynomial
    prune_tolerance: float = 1e-12
    # relative to the largest coefficient of a row; anything dropped above this
    # while re-expressing a row in a smaller basis marks the instance degenerate
    structural_tolerance: float = 1e-6
    # relative to the largest |entry| of the pivot column
    pivot_tolerance: float = 1e-10
    # |Im lambda| <= complex_tolerance * (1 + |Re lambda|)
    complex_tolerance: float = 1e-6
    # eigenvectors whose 1-coordinate is below this fraction of their norm lie at infinity
    infinity_tolerance: float = 1e-12
    # |F| below this is treated as the zero matrix
    zero_matrix_tolerance: float = 1e-12
    # roots with p at or below this are not returned
    min_p: float = 1e-9

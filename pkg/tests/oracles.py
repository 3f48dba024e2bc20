"""Independent reference values.

Everything here is computed without the package's linear algebra (sympy's
Smith form over explicit small resolutions) or by hand, then frozen.
"""

from fractions import Fraction

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors


def sympy_divisors(dense):
    """Nonzero invariant factors of an integer matrix, via sympy."""
    if not dense or not dense[0]:
        return ()
    return tuple(int(d) for d in invariant_factors(Matrix(dense), domain=ZZ) if d != 0)


def cohomology_from_coboundaries(dims, maps):
    """``H^k`` of ``Z^{dims[0]} -> Z^{dims[1]} -> ...`` as (free rank, torsion).

    ``maps[k]`` is the dense matrix of ``Z^{dims[k]} -> Z^{dims[k+1]}``.
    """
    out = []
    for k, n in enumerate(dims):
        into = sympy_divisors(maps[k - 1]) if k >= 1 else ()
        outof = sympy_divisors(maps[k]) if k < len(maps) else ()
        free = n - len(outof) - len(into)
        out.append((free, tuple(d for d in into if d > 1)))
    return out


def cyclic_group_cohomology(m, top):
    """Periodic resolution for ``Z/m`` with trivial coefficients: ``Z -0-> Z -m-> Z -0-> ...``."""
    dims = [1] * (top + 2)
    maps = [[[0]] if k % 2 == 0 else [[m]] for k in range(top + 1)]
    return cohomology_from_coboundaries(dims, maps)[: top + 1]


def klein_group_cohomology(top):
    """Tensor square of the periodic Z/2 resolution; cochains ``Hom(P_a (x) P_b, Z)``."""
    def d1(a):
        return 0 if a % 2 == 0 else 2  # coboundary P^a -> P^{a+1} for one factor

    dims = [n + 1 for n in range(top + 2)]
    maps = []
    for n in range(top + 1):
        rows = []
        for a2 in range(n + 2):
            b2 = n + 1 - a2
            row = []
            for a in range(n + 1):
                b = n - a
                v = 0
                if a2 == a + 1 and b2 == b:
                    v = d1(a)
                elif a2 == a and b2 == b + 1:
                    v = (-1) ** a * d1(b)
                row.append(v)
            rows.append(row)
        maps.append(rows)
    return cohomology_from_coboundaries(dims, maps)[: top + 1]


def cycle_cohomology(n):
    """Simplicial n-gon: ``Z^n -> Z^n`` by ``f -> f(v_{i+1}) - f(v_i)``."""
    d = [[0] * n for _ in range(n)]
    for i in range(n):
        d[i][i] -= 1
        d[i][(i + 1) % n] += 1
    return cohomology_from_coboundaries([n, n], [d])


# Frozen values (groups written as display strings of the package's CohomologyGroup).
BZ2_INTEGRAL = ["Z", "0", "Z/2", "0", "Z/2"]
BKLEIN_INTEGRAL = ["Z", "0", "Z/2 + Z/2", "Z/2", "Z/2 + Z/2 + Z/2"]
CIRCLE_INTEGRAL = ["Z", "Z"]
TORUS_INTEGRAL = ["Z", "Z^2", "Z"]
# Free Z/3 action on the triangle: Borel construction is the quotient circle.
CIRCLE_Z3_INTEGRAL = ["Z", "Z", "0", "0"]
# Pi-rotation on T^2: rational part is the invariant cohomology (Q, 0, Q); above
# degree 2 the four isolated fixed points each contribute H^n(BZ/2).
TORUS_Z2_INTEGRAL = ["Z", "0", "Z + Z/2 + Z/2 + Z/2", "0", "Z/2 + Z/2 + Z/2 + Z/2"]

# Weight-q classes: degree n < q gives H^{n-1}(R/Z), n = q adds closed forms
# with integral periods (none on a point), n > q gives H^n(Z).
#   H^*(BZ/2; Q/Z) = Q/Z, Z/2, 0, Z/2, ...
PT_Z2_WEIGHT2 = ["0", "Q/Z", "Z/2", "0", "Z/2"]
# Deligne weight q on pt/Z2 for q = 1, 2, 3 agrees in degrees 0..4 by the same count.
PT_Z2_DELIGNE = ["0", "Q/Z", "Z/2", "0", "Z/2"]
# Z3 circle (Borel = circle), q = 2: H^{-1}, H^0(R/Z) = Q/Z, H^1(R/Z) = Q/Z, H^3 = 0
CIRCLE_Z3_WEIGHT2 = ["0", "Q/Z", "Q/Z", "0"]
# T^2/Z2, q = 3: 0, H^0(R/Z), H^1(R/Z) = tors H^2(Z) = (Z/2)^3, H^2(R/Z) = Q/Z (+ no 3-forms), H^4(Z)
TORUS_Z2_WEIGHT3 = ["0", "Q/Z", "Z/2 + Z/2 + Z/2", "Q/Z", "Z/2 + Z/2 + Z/2 + Z/2"]

# Characters of weight 2 on pt/Z2 evaluated on the 1-cycle given by the non-identity arrow.
PT_Z2_CHARACTER_VALUES = [Fraction(0), Fraction(1, 2)]
# Klein discrete torsion rho(a, b) = a_1 b_2 / 2: holonomy on [g|h] - [h|g] with g=(1,0), h=(0,1).
KLEIN_TORUS_HOLONOMY = Fraction(1, 2)

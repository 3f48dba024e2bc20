"""Exact linear algebra for cochain complexes over Z and Q.

Everything here works with Python ints and ``fractions.Fraction``; there is no
floating point anywhere.  Matrices are stored sparse, one ``dict`` per row.

Conventions
-----------
* A ``FiniteComplex`` is a *cochain* complex: ``diffs[k]`` maps degree ``k`` to
  degree ``k + 1`` and has shape ``(dim(k + 1), dim(k))`` acting on column
  vectors.
* Chains live in the dual bases, so ``boundary`` is the transpose of
  ``coboundary`` and ``pair(coboundary(c), z) == pair(c, boundary(z))``.
* Circle-valued data are stored additively in cycle units: a value ``x`` in
  ``Q/Z`` stands for the phase ``exp(2*pi*i*x)`` and is kept as its canonical
  representative in ``[0, 1)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

Number = int | Fraction


class ChainError(Exception):
    """Base class for errors raised by the linear algebra layer."""


class RingMismatch(ChainError):
    pass


class DegreeMismatch(ChainError):
    pass


class SignConventionViolation(ChainError):
    pass


class CoefficientRing(enum.Enum):
    INTEGERS = "Z"
    RATIONALS = "Q"
    RATIONALS_MOD_1 = "Q/Z"


def mod1(x: Number) -> Fraction:
    """Canonical representative of ``x`` in ``[0, 1)``."""
    x = Fraction(x)
    return x - math.floor(x)


def parse_rational(s: str | int | Fraction) -> Fraction:
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    return Fraction(str(s).strip())


def format_rational(x: Number) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _clean(x: Number) -> Number:
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


# ---------------------------------------------------------------------------
# Sparse matrices


class Matrix:
    """Sparse matrix with exact entries, stored as a list of row dicts."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: list[dict[int, Number]] | None = None):
        self.rows = rows
        self.cols = cols
        if data is None:
            data = [{} for _ in range(rows)]
        if len(data) != rows:
            raise ValueError("row count does not match data")
        self.data = data

    @classmethod
    def zeros(cls, rows: int, cols: int) -> Matrix:
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> Matrix:
        return cls(n, n, [{i: 1} for i in range(n)])

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[Number]], cols: int | None = None) -> Matrix:
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        data = []
        for r in rows:
            if len(r) != cols:
                raise ValueError("ragged matrix")
            data.append({j: _clean(v) for j, v in enumerate(r) if v != 0})
        return cls(len(rows), cols, data)

    @classmethod
    def from_triplets(cls, rows: int, cols: int, entries: Iterable[tuple[int, int, Number]]) -> Matrix:
        m = cls(rows, cols)
        for i, j, v in entries:
            if v == 0:
                continue
            row = m.data[i]
            nv = row.get(j, 0) + v
            if nv == 0:
                row.pop(j, None)
            else:
                row[j] = _clean(nv)
        return m

    def copy(self) -> Matrix:
        return Matrix(self.rows, self.cols, [dict(r) for r in self.data])

    def to_dense(self) -> list[list[Number]]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for i, r in enumerate(self.data):
            for j, v in r.items():
                out[i][j] = v
        return out

    def triplets(self) -> list[tuple[int, int, Number]]:
        return [(i, j, r[j]) for i, r in enumerate(self.data) for j in sorted(r)]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def nnz(self) -> int:
        return sum(len(r) for r in self.data)

    def is_zero(self) -> bool:
        return all(not r for r in self.data)

    def is_integral(self) -> bool:
        return all(
            isinstance(v, int) or Fraction(v).denominator == 1
            for r in self.data
            for v in r.values()
        )

    def transpose(self) -> Matrix:
        t = Matrix(self.cols, self.rows)
        for i, r in enumerate(self.data):
            for j, v in r.items():
                t.data[j][i] = v
        return t

    def __matmul__(self, other: Matrix) -> Matrix:
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = Matrix(self.rows, other.cols)
        for i, r in enumerate(self.data):
            acc: dict[int, Number] = {}
            for k, a in r.items():
                for j, b in other.data[k].items():
                    acc[j] = acc.get(j, 0) + a * b
            out.data[i] = {j: _clean(v) for j, v in acc.items() if v != 0}
        return out

    def __add__(self, other: Matrix) -> Matrix:
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        out = self.copy()
        for i, r in enumerate(other.data):
            row = out.data[i]
            for j, v in r.items():
                nv = row.get(j, 0) + v
                if nv == 0:
                    row.pop(j, None)
                else:
                    row[j] = _clean(nv)
        return out

    def __neg__(self) -> Matrix:
        return self.scale(-1)

    def __sub__(self, other: Matrix) -> Matrix:
        return self + (-other)

    def scale(self, s: Number) -> Matrix:
        if s == 0:
            return Matrix(self.rows, self.cols)
        return Matrix(self.rows, self.cols, [{j: _clean(v * s) for j, v in r.items()} for r in self.data])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self.data == other.data

    def __repr__(self) -> str:
        return f"Matrix({self.rows}x{self.cols}, nnz={self.nnz()})"

    def apply(self, vec: Sequence[Number]) -> list[Number]:
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        den = 1
        for x in vec:
            if isinstance(x, Fraction) and x.denominator != 1:
                den = den * x.denominator // math.gcd(den, x.denominator)
        # clear denominators once and accumulate in plain ints
        ivec = [int(x * den) for x in vec]
        out: list[Number] = []
        for r in self.data:
            s = 0
            for j, v in r.items():
                x = ivec[j]
                if x:
                    if type(v) is not int:
                        break
                    s += v * x
            else:
                out.append(s // den if s % den == 0 else Fraction(s, den))
                continue
            break
        else:
            return out
        out = []
        for r in self.data:
            t: Number = 0
            for j, v in r.items():
                x = vec[j]
                if x:
                    t += v * x
            out.append(_clean(t))
        return out

    def column(self, j: int) -> list[Number]:
        return [r.get(j, 0) for r in self.data]

    def hstack(self, other: Matrix) -> Matrix:
        if self.rows != other.rows:
            raise ValueError("row mismatch")
        data = [dict(a) for a in self.data]
        for i, r in enumerate(other.data):
            for j, v in r.items():
                data[i][j + self.cols] = v
        return Matrix(self.rows, self.cols + other.cols, data)

    def vstack(self, other: Matrix) -> Matrix:
        if self.cols != other.cols:
            raise ValueError("column mismatch")
        return Matrix(self.rows + other.rows, self.cols, [dict(r) for r in self.data] + [dict(r) for r in other.data])

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[i, j, format_rational(v)] for i, j, v in self.triplets()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> Matrix:
        return cls.from_triplets(
            obj["rows"], obj["cols"], ((i, j, parse_rational(v)) for i, j, v in obj["entries"])
        )


def columns_matrix(vectors: Sequence[Sequence[Number]], rows: int) -> Matrix:
    """Matrix whose columns are the given vectors."""
    m = Matrix(rows, len(vectors))
    for j, vec in enumerate(vectors):
        for i, v in enumerate(vec):
            if v:
                m.data[i][j] = _clean(v)
    return m


# ---------------------------------------------------------------------------
# Rational elimination


def _rref(A: Matrix) -> tuple[list[dict[int, Fraction]], list[int]]:
    """Reduced row echelon form over Q. Returns (nonzero rows, pivot columns)."""
    work = [{j: Fraction(v) for j, v in r.items()} for r in A.data if r]
    pivots: list[int] = []
    done: list[dict[int, Fraction]] = []
    # Pick pivot columns in increasing order; sparse-friendly because we only
    # scan the remaining rows for their leading column.
    while work:
        lead = min(min(r) for r in work)
        # Choose the sparsest row containing the lead column.
        best = None
        for idx, r in enumerate(work):
            if lead in r and (best is None or len(r) < len(work[best])):
                best = idx
        prow = work.pop(best)
        inv = 1 / prow[lead]
        prow = {j: v * inv for j, v in prow.items()}
        new_work = []
        for r in work:
            f = r.get(lead)
            if f:
                for j, v in prow.items():
                    nv = r.get(j, 0) - f * v
                    if nv:
                        r[j] = nv
                    else:
                        r.pop(j, None)
            if r:
                new_work.append(r)
        work = new_work
        done.append(prow)
        pivots.append(lead)
    # back substitution
    for k in range(len(done) - 1, -1, -1):
        p = pivots[k]
        prow = done[k]
        for i in range(k):
            f = done[i].get(p)
            if f:
                r = done[i]
                for j, v in prow.items():
                    nv = r.get(j, 0) - f * v
                    if nv:
                        r[j] = nv
                    else:
                        r.pop(j, None)
    order = sorted(range(len(pivots)), key=pivots.__getitem__)
    return [done[i] for i in order], [pivots[i] for i in order]


def rank(A: Matrix) -> int:
    """Rank over Q."""
    if A.rows == 0 or A.cols == 0:
        return 0
    return len(_rref(A)[1])


def nullspace(A: Matrix) -> list[list[Fraction]]:
    """Basis of ``{x : A x = 0}`` over Q (one free variable per vector)."""
    rows, pivots = _rref(A)
    pset = set(pivots)
    basis = []
    for free in range(A.cols):
        if free in pset:
            continue
        x = [Fraction(0)] * A.cols
        x[free] = Fraction(1)
        for r, p in zip(rows, pivots):
            v = r.get(free)
            if v:
                x[p] = -v
        basis.append(x)
    return basis


def solve(A: Matrix, b: Sequence[Number]) -> list[Fraction] | None:
    """Some rational ``x`` with ``A x = b``, or None if inconsistent."""
    if len(b) != A.rows:
        raise ValueError("rhs length mismatch")
    aug = Matrix(A.rows, A.cols + 1, [dict(r) for r in A.data])
    for i, v in enumerate(b):
        if v:
            aug.data[i][A.cols] = Fraction(v)
    rows, pivots = _rref(aug)
    if pivots and pivots[-1] == A.cols:
        return None
    x = [Fraction(0)] * A.cols
    for r, p in zip(rows, pivots):
        x[p] = r.get(A.cols, Fraction(0))
    return x


def left_annihilator(A: Matrix) -> Matrix:
    """Integer matrix L with ``ker L == image(A)`` over Q (rows primitive)."""
    basis = nullspace(A.transpose())
    rows = []
    for vec in basis:
        den = math.lcm(*(Fraction(v).denominator for v in vec)) if vec else 1
        ints = [int(Fraction(v) * den) for v in vec]
        g = math.gcd(*ints) if ints else 1
        rows.append([v // g for v in ints] if g else ints)
    return Matrix.from_dense(rows, A.rows) if rows else Matrix(0, A.rows)


# ---------------------------------------------------------------------------
# Smith normal form


class _SNF:
    """Sparse integer diagonalisation by unimodular row/column operations.

    Pivot rule: the smallest nonzero absolute value among the active entries,
    ties broken by row-major position.  ``U`` is kept as rows, ``Uinv`` and
    ``V`` as columns so every update is a cheap dict operation.
    """

    def __init__(self, A: Matrix, track: bool):
        if not A.is_integral():
            raise RingMismatch("Smith normal form needs an integer matrix")
        self.m, self.n = A.rows, A.cols
        self.A = [{j: int(v) for j, v in r.items()} for r in A.data]
        self.colidx: list[set[int]] = [set() for _ in range(self.n)]
        for i, r in enumerate(self.A):
            for j in r:
                self.colidx[j].add(i)
        self.track = track
        if track:
            self.U = [{i: 1} for i in range(self.m)]
            self.Uinv = [{i: 1} for i in range(self.m)]  # columns
            self.V = [{j: 1} for j in range(self.n)]  # columns
        self.pivots: list[list[int]] = []  # [row, col, value]

    @staticmethod
    def _axpy(target: dict[int, int], src: dict[int, int], q: int) -> None:
        for k, v in src.items():
            nv = target.get(k, 0) + q * v
            if nv:
                target[k] = nv
            else:
                target.pop(k, None)

    def row_add(self, i: int, r: int, q: int) -> None:
        """row_i += q * row_r"""
        Ai, Ar = self.A[i], self.A[r]
        for k, v in Ar.items():
            old = Ai.get(k, 0)
            nv = old + q * v
            if nv:
                Ai[k] = nv
                if not old:
                    self.colidx[k].add(i)
            else:
                Ai.pop(k, None)
                self.colidx[k].discard(i)
        if self.track:
            self._axpy(self.U[i], self.U[r], q)
            self._axpy(self.Uinv[r], self.Uinv[i], -q)

    def col_add(self, j: int, c: int, q: int) -> None:
        """col_j += q * col_c"""
        for i in list(self.colidx[c]):
            row = self.A[i]
            v = row[c]
            old = row.get(j, 0)
            nv = old + q * v
            if nv:
                row[j] = nv
                if not old:
                    self.colidx[j].add(i)
            else:
                row.pop(j, None)
                self.colidx[j].discard(i)
        if self.track:
            self._axpy(self.V[j], self.V[c], q)

    def negate_row(self, i: int) -> None:
        for k in self.A[i]:
            self.A[i][k] = -self.A[i][k]
        if self.track:
            self.U[i] = {k: -v for k, v in self.U[i].items()}
            self.Uinv[i] = {k: -v for k, v in self.Uinv[i].items()}

    def run(self) -> None:
        active_rows = set(range(self.m))
        while True:
            best = None
            for i in sorted(active_rows):
                for j, v in self.A[i].items():
                    key = (abs(v), i, j)
                    if best is None or key < best:
                        best = key
            if best is None:
                break
            _, r, c = best
            while True:
                a = self.A[r][c]
                for i in sorted(self.colidx[c] - {r}):
                    self.row_add(i, r, -(self.A[i][c] // a))
                for j in sorted(set(self.A[r]) - {c}):
                    self.col_add(j, c, -(self.A[r][j] // a))
                cand = [(abs(self.A[i][c]), i, c) for i in self.colidx[c] if i != r]
                cand += [(abs(v), r, j) for j, v in self.A[r].items() if j != c]
                if not cand:
                    break
                cand.append((abs(a), r, c))
                _, r, c = min(cand)
            if self.A[r][c] < 0:
                self.negate_row(r)
            self.pivots.append([r, c, self.A[r][c]])
            active_rows.discard(r)
            # Row r and column c are now isolated; drop the column from the
            # index so later scans ignore it.
            self.colidx[c] = set()
            del self.A[r][c]

    def fix_divisibility(self) -> None:
        piv = self.pivots
        for a_i in range(len(piv)):
            for b_i in range(a_i + 1, len(piv)):
                ra, ca, a = piv[a_i]
                rb, cb, b = piv[b_i]
                if b % a == 0:
                    continue
                g, x, y = _xgcd(a, b)
                if self.track:
                    Ua, Ub = self.U[ra], self.U[rb]
                    newa, newb = {}, {}
                    self._axpy(newa, Ua, x)
                    self._axpy(newa, Ub, y)
                    self._axpy(newb, Ua, -(b // g))
                    self._axpy(newb, Ub, a // g)
                    self.U[ra], self.U[rb] = newa, newb
                    Ia, Ib = self.Uinv[ra], self.Uinv[rb]
                    newa, newb = {}, {}
                    self._axpy(newa, Ia, a // g)
                    self._axpy(newa, Ib, b // g)
                    self._axpy(newb, Ia, -y)
                    self._axpy(newb, Ib, x)
                    self.Uinv[ra], self.Uinv[rb] = newa, newb
                    Va, Vb = self.V[ca], self.V[cb]
                    newa, newb = {}, {}
                    self._axpy(newa, Va, 1)
                    self._axpy(newa, Vb, 1)
                    self._axpy(newb, Va, -(y * b // g))
                    self._axpy(newb, Vb, x * a // g)
                    self.V[ca], self.V[cb] = newa, newb
                piv[a_i][2] = g
                piv[b_i][2] = a * b // g


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with x*a + y*b == g == gcd(a, b) > 0."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


@dataclass(frozen=True)
class SmithForm:
    U: Matrix
    D: Matrix
    V: Matrix
    Uinv: Matrix
    diagonal: tuple[int, ...]  # nonzero invariant factors, d_i | d_{i+1}

    @property
    def rank(self) -> int:
        return len(self.diagonal)


def smith_form(A: Matrix) -> SmithForm:
    """Full Smith normal form with transforms: ``U @ A @ V == D``."""
    s = _SNF(A, track=True)
    s.run()
    s.fix_divisibility()
    m, n = A.rows, A.cols
    prow = [p[0] for p in s.pivots]
    pcol = [p[1] for p in s.pivots]
    row_order = prow + sorted(set(range(m)) - set(prow))
    col_order = pcol + sorted(set(range(n)) - set(pcol))
    U = Matrix(m, m, [dict(s.U[r]) for r in row_order])
    Uinv_cols = [s.Uinv[r] for r in row_order]
    Uinv = Matrix(m, m)
    for k, col in enumerate(Uinv_cols):
        for i, v in col.items():
            Uinv.data[i][k] = v
    V = Matrix(n, n)
    for k, c in enumerate(col_order):
        for i, v in s.V[c].items():
            V.data[i][k] = v
    diag = tuple(p[2] for p in s.pivots)
    D = Matrix(m, n, [({k: diag[k]} if k < len(diag) else {}) for k in range(m)])
    return SmithForm(U, D, V, Uinv, diag)


def smith_normal_form(A: Matrix) -> tuple[Matrix, Matrix, Matrix]:
    """``(U, D, V)`` with ``U A V = D``, U and V unimodular, D in Smith form."""
    f = smith_form(A)
    return f.U, f.D, f.V


def elementary_divisors(A: Matrix) -> tuple[int, ...]:
    """Nonzero invariant factors of an integer matrix (no transforms kept)."""
    s = _SNF(A, track=False)
    s.run()
    s.fix_divisibility()
    return tuple(p[2] for p in s.pivots)


def integer_kernel(A: Matrix) -> list[list[int]]:
    """Z-basis of ``{x in Z^n : A x = 0}``."""
    f = smith_form(A)
    return [[f.V.data[i].get(k, 0) for i in range(A.cols)] for k in range(f.rank, A.cols)]


def solve_integer(A: Matrix, b: Sequence[Number]) -> list[int] | None:
    """Some integer ``x`` with ``A x = b``, or None."""
    if any(Fraction(v).denominator != 1 for v in b):
        return None
    f = smith_form(A)
    ub = f.U.apply([int(v) for v in b])
    y = [0] * A.cols
    for k, v in enumerate(ub):
        if k < f.rank:
            d = f.diagonal[k]
            if v % d:
                return None
            y[k] = v // d
        elif v:
            return None
    return [int(v) for v in f.V.apply(y)]


# ---------------------------------------------------------------------------
# Complexes and cohomology


@dataclass(frozen=True)
class CohomologyGroup:
    """A group ``Z^free + (+) Z/t_i + (Q/Z)^divisible + Q^rational``.

    ``torsion`` is a divisibility chain of integers >= 2.  The last two summands
    only occur for complexes with rational or circle-valued coefficients.
    """

    free_rank: int = 0
    torsion: tuple[int, ...] = ()
    divisible_rank: int = 0
    rational_rank: int = 0

    def __post_init__(self):
        t = tuple(self.torsion)
        object.__setattr__(self, "torsion", t)
        if any(x < 2 for x in t):
            raise ValueError("torsion entries must be >= 2")
        if any(t[i + 1] % t[i] for i in range(len(t) - 1)):
            raise ValueError("torsion must be a divisibility chain")

    @property
    def is_zero(self) -> bool:
        return not (self.free_rank or self.torsion or self.divisible_rank or self.rational_rank)

    @property
    def is_finite(self) -> bool:
        return not (self.free_rank or self.divisible_rank or self.rational_rank)

    @property
    def order(self) -> int | None:
        """Order of the group, or None when it is infinite."""
        return math.prod(self.torsion) if self.is_finite else None

    def __str__(self) -> str:
        parts = []
        if self.free_rank:
            parts.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        parts += [f"Z/{t}" for t in self.torsion]
        if self.divisible_rank:
            parts.append("Q/Z" if self.divisible_rank == 1 else f"(Q/Z)^{self.divisible_rank}")
        if self.rational_rank:
            parts.append("Q" if self.rational_rank == 1 else f"Q^{self.rational_rank}")
        return " + ".join(parts) if parts else "0"

    def to_json(self) -> dict:
        return {
            "free_rank": self.free_rank,
            "torsion": list(self.torsion),
            "divisible_rank": self.divisible_rank,
            "rational_rank": self.rational_rank,
            "display": str(self),
        }


def normalize_torsion(values: Iterable[int]) -> tuple[int, ...]:
    """Invariant-factor form of a list of cyclic orders (drops 1s)."""
    primes: dict[int, list[int]] = {}
    for v in values:
        v = abs(v)
        if v <= 1:
            continue
        n, p = v, 2
        while p * p <= n:
            if n % p == 0:
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                primes.setdefault(p, []).append(p**e)
            p += 1
        if n > 1:
            primes.setdefault(n, []).append(n)
    length = max((len(v) for v in primes.values()), default=0)
    out = [1] * length
    for p, powers in primes.items():
        powers.sort(reverse=True)
        for k, q in enumerate(powers):
            out[length - 1 - k] *= q
    return tuple(x for x in out if x > 1)


class FiniteComplex:
    """Graded free modules with ordered bases and differentials ``D_k``.

    ``D_{k+1} @ D_k == 0`` is verified at construction.
    """

    def __init__(self, bases: Sequence[Sequence[Hashable]], diffs: Sequence[Matrix], check: bool = True):
        self.bases = tuple(tuple(b) for b in bases)
        self.diffs = tuple(diffs)
        if len(self.diffs) != max(len(self.bases) - 1, 0):
            raise ValueError("need one differential between consecutive degrees")
        self._index = [{s: i for i, s in enumerate(b)} for b in self.bases]
        for k, d in enumerate(self.diffs):
            if d.shape != (len(self.bases[k + 1]), len(self.bases[k])):
                raise ValueError(f"differential {k} has shape {d.shape}")
        if check:
            for k in range(len(self.diffs) - 1):
                if not (self.diffs[k + 1] @ self.diffs[k]).is_zero():
                    raise SignConventionViolation(f"D_{k + 1} D_{k} != 0")

    @property
    def top(self) -> int:
        return len(self.bases) - 1

    def dim(self, k: int) -> int:
        return len(self.bases[k]) if 0 <= k < len(self.bases) else 0

    def index(self, k: int, ident: Hashable) -> int:
        return self._index[k][ident]

    def has(self, k: int, ident: Hashable) -> bool:
        return 0 <= k < len(self.bases) and ident in self._index[k]

    def differential(self, k: int) -> Matrix:
        """``D_k : C^k -> C^{k+1}``, a zero matrix outside the stored range."""
        if 0 <= k < len(self.diffs):
            return self.diffs[k]
        return Matrix(self.dim(k + 1), self.dim(k))

    def is_integral(self) -> bool:
        return all(d.is_integral() for d in self.diffs)


def cohomology(complex: FiniteComplex, degree: int, ring: CoefficientRing = CoefficientRing.INTEGERS) -> CohomologyGroup:
    """``ker D_n / im D_{n-1}`` with coefficients in ``ring``.

    Over ``RATIONALS_MOD_1`` the complex must be integral and the answer comes
    from the universal coefficient theorem: ``(Q/Z)^{b_n} + tors H^{n+1}``.
    Degrees beyond the stored range are only trustworthy when the caller
    built the complex at least one degree higher than ``degree``.
    """
    if degree < 0 or degree > complex.top:
        return CohomologyGroup()
    if ring is CoefficientRing.RATIONALS_MOD_1:
        here = cohomology(complex, degree, CoefficientRing.INTEGERS)
        above = cohomology(complex, degree + 1, CoefficientRing.INTEGERS) if degree + 1 <= complex.top else CohomologyGroup()
        return CohomologyGroup(divisible_rank=here.free_rank, torsion=above.torsion)
    out_d = complex.differential(degree)
    in_d = complex.differential(degree - 1) if degree > 0 else Matrix(complex.dim(0), 0)
    if ring is CoefficientRing.RATIONALS:
        return CohomologyGroup(rational_rank=complex.dim(degree) - rank(out_d) - rank(in_d))
    if not (out_d.is_integral() and in_d.is_integral()):
        raise RingMismatch("integer cohomology of a complex with rational differentials")
    divs = elementary_divisors(in_d)
    r_out = len(elementary_divisors(out_d))
    free = complex.dim(degree) - r_out - len(divs)
    return CohomologyGroup(free_rank=free, torsion=tuple(d for d in divs if d > 1))


def torsion_generators(complex: FiniteComplex, degree: int) -> list[tuple[int, list[int]]]:
    """Integer cocycles generating the torsion of ``H^degree``, with orders."""
    if degree <= 0:
        return []
    f = smith_form(complex.differential(degree - 1))
    out = []
    for k, d in enumerate(f.diagonal):
        if d > 1:
            out.append((d, [f.Uinv.data[i].get(k, 0) for i in range(f.Uinv.rows)]))
    return out


# ---------------------------------------------------------------------------
# Double complexes


@dataclass
class DoubleComplex:
    """First-quadrant double complex with entries indexed by ``(p, j)``.

    ``bar[(p, j)]`` maps ``(p, j) -> (p + 1, j)`` and ``inner[(p, j)]`` maps
    ``(p, j) -> (p, j + 1)``.  The total differential is
    ``bar + (-1)**p * inner``.
    """

    bases: dict[tuple[int, int], tuple]
    bar: dict[tuple[int, int], Matrix] = field(default_factory=dict)
    inner: dict[tuple[int, int], Matrix] = field(default_factory=dict)

    def dim(self, p: int, j: int) -> int:
        return len(self.bases.get((p, j), ()))

    def check(self) -> list[str]:
        """Violations of ``bar^2 = 0``, ``inner^2 = 0``, ``bar inner = inner bar``."""
        problems = []
        for (p, j) in self.bases:
            b1, b2 = self.bar.get((p, j)), self.bar.get((p + 1, j))
            if b1 is not None and b2 is not None and not (b2 @ b1).is_zero():
                problems.append(f"bar^2 != 0 at {(p, j)}")
            i1, i2 = self.inner.get((p, j)), self.inner.get((p, j + 1))
            if i1 is not None and i2 is not None and not (i2 @ i1).is_zero():
                problems.append(f"inner^2 != 0 at {(p, j)}")
            if b1 is not None and i1 is not None:
                i_up, b_right = self.inner.get((p + 1, j)), self.bar.get((p, j + 1))
                if i_up is not None and b_right is not None:
                    if not (i_up @ b1 - b_right @ i1).is_zero():
                        problems.append(f"bar and inner do not commute at {(p, j)}")
        return problems


def total_complex(dc: DoubleComplex, max_degree: int | None = None) -> FiniteComplex:
    """Total complex with basis ids ``(p, j, local_id)`` and ``D = bar + (-1)^p inner``."""
    if not dc.bases:
        return FiniteComplex([()], [])
    top = max(p + j for p, j in dc.bases)
    if max_degree is not None:
        top = min(top, max_degree)
    slots: list[list[tuple[int, int]]] = [[] for _ in range(top + 1)]
    for (p, j) in sorted(dc.bases):
        if p + j <= top:
            slots[p + j].append((p, j))
    bases = []
    offsets: list[dict[tuple[int, int], int]] = []
    for n in range(top + 1):
        off, b = {}, []
        for pj in slots[n]:
            off[pj] = len(b)
            b.extend((pj[0], pj[1], s) for s in dc.bases[pj])
        bases.append(b)
        offsets.append(off)
    diffs = []
    for n in range(top):
        D = Matrix(len(bases[n + 1]), len(bases[n]))
        for (p, j) in slots[n]:
            src = offsets[n][(p, j)]
            pieces = []
            if (p + 1, j) in offsets[n + 1] and (p, j) in dc.bar:
                pieces.append((dc.bar[(p, j)], offsets[n + 1][(p + 1, j)], 1))
            if (p, j + 1) in offsets[n + 1] and (p, j) in dc.inner:
                pieces.append((dc.inner[(p, j)], offsets[n + 1][(p, j + 1)], -1 if p % 2 else 1))
            for mat, dst, sign in pieces:
                for i, row in enumerate(mat.data):
                    drow = D.data[dst + i]
                    for k, v in row.items():
                        drow[src + k] = sign * v
        diffs.append(D)
    try:
        return FiniteComplex(bases, diffs)
    except SignConventionViolation as exc:
        raise SignConventionViolation(f"total differential does not square to zero: {exc}") from exc


# ---------------------------------------------------------------------------
# Cochains, chains and the pairing


@dataclass(frozen=True)
class Cochain:
    """A degree-``degree`` cochain on ``space``; absent ids are zero."""

    space: FiniteComplex
    degree: int
    values: dict
    ring: CoefficientRing = CoefficientRing.RATIONALS

    def __post_init__(self):
        if not 0 <= self.degree <= self.space.top:
            raise DegreeMismatch(f"degree {self.degree} outside 0..{self.space.top}")
        vals = {}
        for k, v in self.values.items():
            if not self.space.has(self.degree, k):
                raise KeyError(f"{k!r} is not a degree-{self.degree} basis element")
            v = Fraction(v)
            if self.ring is CoefficientRing.RATIONALS_MOD_1:
                v = mod1(v)
            elif self.ring is CoefficientRing.INTEGERS and v.denominator != 1:
                raise RingMismatch(f"non-integer value {v} in an integer cochain")
            if v:
                vals[k] = v
        object.__setattr__(self, "values", vals)

    @classmethod
    def zero(cls, space: FiniteComplex, degree: int, ring: CoefficientRing = CoefficientRing.RATIONALS) -> Cochain:
        return cls(space, degree, {}, ring)

    @classmethod
    def from_vector(cls, space: FiniteComplex, degree: int, vec: Sequence[Number],
                    ring: CoefficientRing = CoefficientRing.RATIONALS) -> Cochain:
        basis = space.bases[degree]
        return cls(space, degree, {basis[i]: v for i, v in enumerate(vec) if v}, ring)

    def vector(self) -> list[Fraction]:
        vec = [Fraction(0)] * self.space.dim(self.degree)
        for k, v in self.values.items():
            vec[self.space.index(self.degree, k)] = v
        return vec

    def __getitem__(self, key) -> Fraction:
        return self.values.get(key, Fraction(0))

    def _check_same(self, other: Cochain) -> None:
        if other.space is not self.space or other.degree != self.degree:
            raise DegreeMismatch("cochains live on different spaces or degrees")

    def __add__(self, other: Cochain) -> Cochain:
        self._check_same(other)
        vals = dict(self.values)
        for k, v in other.values.items():
            vals[k] = vals.get(k, 0) + v
        return Cochain(self.space, self.degree, vals, _join(self.ring, other.ring))

    def __neg__(self) -> Cochain:
        return Cochain(self.space, self.degree, {k: -v for k, v in self.values.items()}, self.ring)

    def __sub__(self, other: Cochain) -> Cochain:
        return self + (-other)

    def scale(self, s: Number) -> Cochain:
        ring = self.ring
        if ring is CoefficientRing.INTEGERS and Fraction(s).denominator != 1:
            ring = CoefficientRing.RATIONALS
        return Cochain(self.space, self.degree, {k: v * s for k, v in self.values.items()}, ring)

    def as_ring(self, ring: CoefficientRing) -> Cochain:
        return Cochain(self.space, self.degree, self.values, ring)

    def reduce_mod1(self) -> Cochain:
        return self.as_ring(CoefficientRing.RATIONALS_MOD_1)

    def is_zero(self) -> bool:
        return not self.values

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.values.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Cochain):
            return NotImplemented
        return (self.space is other.space and self.degree == other.degree
                and self.values == other.values)

    def __hash__(self):
        return hash((id(self.space), self.degree, frozenset(self.values.items())))


def _join(a: CoefficientRing, b: CoefficientRing) -> CoefficientRing:
    if CoefficientRing.RATIONALS_MOD_1 in (a, b):
        return CoefficientRing.RATIONALS_MOD_1
    if CoefficientRing.RATIONALS in (a, b):
        return CoefficientRing.RATIONALS
    return CoefficientRing.INTEGERS


@dataclass(frozen=True)
class Chain:
    """A degree-``degree`` chain with exact coefficients."""

    space: FiniteComplex
    degree: int
    coeffs: dict

    def __post_init__(self):
        vals = {}
        for k, v in self.coeffs.items():
            if not self.space.has(self.degree, k):
                raise KeyError(f"{k!r} is not a degree-{self.degree} basis element")
            v = _clean(Fraction(v))
            if v:
                vals[k] = v
        object.__setattr__(self, "coeffs", vals)

    @classmethod
    def from_vector(cls, space: FiniteComplex, degree: int, vec: Sequence[Number]) -> Chain:
        basis = space.bases[degree]
        return cls(space, degree, {basis[i]: v for i, v in enumerate(vec) if v})

    def vector(self) -> list[Number]:
        vec: list[Number] = [0] * self.space.dim(self.degree)
        for k, v in self.coeffs.items():
            vec[self.space.index(self.degree, k)] = v
        return vec

    def __add__(self, other: Chain) -> Chain:
        if other.space is not self.space or other.degree != self.degree:
            raise DegreeMismatch("chains live on different spaces or degrees")
        vals = dict(self.coeffs)
        for k, v in other.coeffs.items():
            vals[k] = vals.get(k, 0) + v
        return Chain(self.space, self.degree, vals)

    def __neg__(self) -> Chain:
        return Chain(self.space, self.degree, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: Chain) -> Chain:
        return self + (-other)

    def scale(self, s: Number) -> Chain:
        return Chain(self.space, self.degree, {k: v * s for k, v in self.coeffs.items()})

    def is_zero(self) -> bool:
        return not self.coeffs


def pair(c: Cochain, z: Chain) -> Fraction:
    """``<c, z>``; reduced mod 1 when ``c`` is circle valued."""
    if c.space is not z.space or c.degree != z.degree:
        raise DegreeMismatch(f"cannot pair degree {c.degree} with degree {z.degree}")
    s = sum((Fraction(c.values.get(k, 0)) * v for k, v in z.coeffs.items()), Fraction(0))
    return mod1(s) if c.ring is CoefficientRing.RATIONALS_MOD_1 else s


def coboundary(c: Cochain) -> Cochain:
    if c.degree + 1 > c.space.top:
        raise DegreeMismatch(f"no degree {c.degree + 1} in this complex")
    vec = c.space.differential(c.degree).apply(c.vector())
    return Cochain.from_vector(c.space, c.degree + 1, vec, c.ring)


def boundary(z: Chain) -> Chain:
    if z.degree == 0:
        raise DegreeMismatch("boundary of a 0-chain")
    D = z.space.differential(z.degree - 1)
    vec = D.transpose().apply(z.vector())
    return Chain.from_vector(z.space, z.degree - 1, vec)


# ---------------------------------------------------------------------------
# Mixed integer / rational complexes


@dataclass
class MixedComplex:
    """Cone-shaped complex ``K^n = Z^{a_n} (+) Q^{b_n}``.

    The integer part is a complex of free Z-modules, the rational part a
    complex of Q-vector spaces, and ``link[n]`` maps integer degree ``n``
    into rational degree ``n + 1``.  The differential is
    ``D(x, y) = (Dz x, link x + Dq y)``; there are no maps from Q to Z, which
    is exactly what every complex in this package looks like.
    """

    integral: FiniteComplex
    rational: FiniteComplex
    link: dict[int, Matrix]

    def link_at(self, n: int) -> Matrix:
        m = self.link.get(n)
        if m is None:
            return Matrix(self.rational.dim(n + 1), self.integral.dim(n))
        return m

    def differential(self, n: int) -> Matrix:
        """Full differential as one rational matrix (integer block first)."""
        a0, b0 = self.integral.dim(n), self.rational.dim(n)
        a1, b1 = self.integral.dim(n + 1), self.rational.dim(n + 1)
        D = Matrix(a1 + b1, a0 + b0)
        for i, row in enumerate(self.integral.differential(n).data):
            D.data[i].update(row)
        for i, row in enumerate(self.link_at(n).data):
            D.data[a1 + i].update(row)
        for i, row in enumerate(self.rational.differential(n).data):
            for k, v in row.items():
                D.data[a1 + i][a0 + k] = v
        return D

    def check(self) -> None:
        top = min(self.integral.top, self.rational.top)
        for n in range(top - 1):
            if not (self.differential(n + 1) @ self.differential(n)).is_zero():
                raise SignConventionViolation(f"mixed differential squares to nonzero at {n}")


def _connecting_rank(mc: MixedComplex, n: int) -> int:
    """Q-rank of ``H^n(int) -> H^{n+1}(rat)``, ``[x] -> [link x]``."""
    if mc.integral.dim(n) == 0:
        return 0
    kernel = nullspace(mc.integral.differential(n))
    if not kernel:
        return 0
    L = mc.link_at(n)
    images = columns_matrix([L.apply(v) for v in kernel], mc.rational.dim(n + 1))
    Dq = mc.rational.differential(n) if n >= 0 else Matrix(mc.rational.dim(n + 1), 0)
    return rank(images.hstack(Dq)) - rank(Dq)


def mixed_cohomology(mc: MixedComplex, n: int) -> CohomologyGroup:
    """Cohomology via the long exact sequence of the cone.

    ``H^n = coker(H^{n-1}(int) -> H^n(rat)) (+) ker(H^n(int) -> H^{n+1}(rat))``.
    The cokernel is a quotient of a Q-vector space by a finitely generated
    subgroup, hence ``(Q/Z)^r (+) Q^s``; it is divisible so the extension
    splits.
    """
    if n < 0:
        return CohomologyGroup()
    hz = cohomology(mc.integral, n, CoefficientRing.INTEGERS) if n <= mc.integral.top else CohomologyGroup()
    hq = cohomology(mc.rational, n, CoefficientRing.RATIONALS) if n <= mc.rational.top else CohomologyGroup()
    r_in = _connecting_rank(mc, n - 1) if n >= 1 else 0
    r_out = _connecting_rank(mc, n) if n <= mc.integral.top else 0
    return CohomologyGroup(
        free_rank=hz.free_rank - r_out,
        torsion=hz.torsion,
        divisible_rank=r_in,
        rational_rank=hq.rational_rank - r_in,
    )


def mixed_torsion_representatives(mc: MixedComplex, n: int) -> list[tuple[int, list[int], list[Fraction]]]:
    """Cocycles ``(x, y)`` representing the torsion summands of ``H^n``.

    Each entry is ``(order, integer part, rational part)`` with
    ``Dz x = 0`` and ``link x + Dq y = 0``.
    """
    out = []
    Dq = mc.rational.differential(n)
    L = mc.link_at(n)
    for order, x in torsion_generators(mc.integral, n):
        rhs = [-v for v in L.apply(x)]
        y = solve(Dq, rhs) if Dq.cols else ([] if not any(rhs) else None)
        if y is None:
            raise ChainError("torsion class does not lift: connecting map nonzero on torsion")
        out.append((order, x, y))
    return out

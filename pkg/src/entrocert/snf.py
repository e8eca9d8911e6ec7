"""Exact integer matrix kit: Smith normal form with transforms.

Matrices are plain lists of lists of Python ints, so coefficients can grow
without overflow.  The SNF routine tracks U, V and their inverses under
every elementary operation; homology code uses them to extract kernels,
quotient bases and coordinates of cycles.
"""

from typing import NamedTuple

__all__ = [
    "SNF",
    "smith_normal_form",
    "integer_rank",
    "mat_mul",
    "mat_vec",
    "identity",
]


def identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(A, B):
    n = len(A)
    m = len(B[0]) if B else 0
    k = len(B)
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        row = out[i]
        for t in range(k):
            a = Ai[t]
            if a:
                Bt = B[t]
                for j in range(m):
                    b = Bt[j]
                    if b:
                        row[j] += a * b
    return out


def mat_vec(A, v):
    out = []
    for row in A:
        s = 0
        for a, x in zip(row, v):
            if a and x:
                s += a * x
        out.append(s)
    return out


class SNF(NamedTuple):
    D: list          # m x n diagonal, nonnegative, divisibility-ordered
    U: list          # m x m unimodular, U A V = D
    V: list          # n x n unimodular
    Uinv: list
    Vinv: list
    rank: int

    @property
    def factors(self):
        return [self.D[k][k] for k in range(self.rank)]


def smith_normal_form(A):
    m = len(A)
    n = len(A[0]) if m else 0
    D = [list(row) for row in A]
    U = identity(m)
    Ui = identity(m)
    V = identity(n)
    Vi = identity(n)

    def row_add(dst, src, c):
        # R_dst += c * R_src; U gets the same op, Uinv the inverse column op
        Dd, Ds = D[dst], D[src]
        for j in range(n):
            if Ds[j]:
                Dd[j] += c * Ds[j]
        Ud, Us = U[dst], U[src]
        for j in range(m):
            if Us[j]:
                Ud[j] += c * Us[j]
        for i in range(m):
            if Ui[i][dst]:
                Ui[i][src] -= c * Ui[i][dst]

    def col_add(dst, src, c):
        for i in range(m):
            if D[i][src]:
                D[i][dst] += c * D[i][src]
        for i in range(n):
            if V[i][src]:
                V[i][dst] += c * V[i][src]
        Vd = Vi[dst]
        Vs = Vi[src]
        for j in range(n):
            if Vd[j]:
                Vs[j] -= c * Vd[j]

    def row_swap(a, b):
        if a == b:
            return
        D[a], D[b] = D[b], D[a]
        U[a], U[b] = U[b], U[a]
        for i in range(m):
            Ui[i][a], Ui[i][b] = Ui[i][b], Ui[i][a]

    def col_swap(a, b):
        if a == b:
            return
        for i in range(m):
            D[i][a], D[i][b] = D[i][b], D[i][a]
        for i in range(n):
            V[i][a], V[i][b] = V[i][b], V[i][a]
        Vi[a], Vi[b] = Vi[b], Vi[a]

    def row_neg(a):
        D[a] = [-x for x in D[a]]
        U[a] = [-x for x in U[a]]
        for i in range(m):
            Ui[i][a] = -Ui[i][a]

    k = 0
    while True:
        # smallest nonzero |entry| in the remaining block
        piv = None
        best = None
        for i in range(k, m):
            Di = D[i]
            for j in range(k, n):
                x = Di[j]
                if x:
                    ax = abs(x)
                    if best is None or ax < best:
                        best = ax
                        piv = (i, j)
                        if ax == 1:
                            break
            if best == 1:
                break
        if piv is None:
            break
        row_swap(k, piv[0])
        col_swap(k, piv[1])
        while True:
            # clear the pivot column
            dirty = False
            for i in range(k + 1, m):
                x = D[i][k]
                if x:
                    q = x // D[k][k]
                    if q:
                        row_add(i, k, -q)
                    if D[i][k]:
                        # remainder smaller than pivot: swap it up and retry
                        row_swap(k, i)
                        dirty = True
            if dirty:
                continue
            for j in range(k + 1, n):
                x = D[k][j]
                if x:
                    q = x // D[k][k]
                    if q:
                        col_add(j, k, -q)
                    if D[k][j]:
                        col_swap(k, j)
                        dirty = True
            if not dirty:
                break
        if D[k][k] < 0:
            row_neg(k)
        k += 1
        if k >= m or k >= n:
            break

    rank = sum(1 for t in range(min(m, n)) if D[t][t] != 0)

    # enforce divisibility d1 | d2 | ...
    changed = True
    while changed:
        changed = False
        for t in range(rank - 1):
            a, b = D[t][t], D[t + 1][t + 1]
            if b % a:
                # fold the pair: gcd/lcm via elementary ops
                col_add(t, t + 1, 1)
                while True:
                    x = D[t + 1][t]
                    if not x:
                        break
                    q = x // D[t][t]
                    if q:
                        row_add(t + 1, t, -q)
                    if D[t + 1][t]:
                        row_swap(t, t + 1)
                while True:
                    x = D[t][t + 1]
                    if not x:
                        break
                    q = x // D[t][t]
                    if q:
                        col_add(t + 1, t, -q)
                    if D[t][t + 1]:
                        col_swap(t, t + 1)
                if D[t][t] < 0:
                    row_neg(t)
                if D[t + 1][t + 1] < 0:
                    row_neg(t + 1)
                changed = True
    return SNF(D, U, V, Ui, Vi, rank)


def integer_rank(A):
    """Rank over Q by fraction-free (Bareiss) elimination."""
    m = len(A)
    n = len(A[0]) if m else 0
    M = [list(row) for row in A]
    rank = 0
    prev = 1
    for col in range(n):
        piv = None
        for i in range(rank, m):
            if M[i][col]:
                piv = i
                break
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        p = M[rank][col]
        for i in range(rank + 1, m):
            xi = M[i][col]
            for j in range(col, n):
                M[i][j] = (p * M[i][j] - xi * M[rank][j]) // prev
        prev = p
        rank += 1
        if rank == m:
            break
    return rank

"""Free power series with matrix coefficients, truncated by total degree.

A FreeSeries is a map from words to complex p x q coefficient matrices.
Evaluation at a d-tuple of n x n matrices Z follows the convention

    F(Z) = sum_alpha Z^alpha (x) F_alpha,   Z^alpha = Z_{i1} ... Z_{i|alpha|},

with the matrix level as the outer Kronecker factor.  Products clip to the
smaller carried degree; overflow coefficients are dropped, never wrapped.

The heavy operations (multiply, invert, evaluate) run on dense
grade-indexed coefficient arrays with cached factorization index tables,
so Cayley transforms at degree 12..16 over d = 2 stay fast.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .fock import Side
from .words import enumerate_tuples, index_map, word_count


@dataclass
class FreeSeries:
    d: int
    deg: int
    p: int
    q: int
    coeffs: dict[tuple[int, ...], np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for w, m in self.coeffs.items():
            w = tuple(w)
            if len(w) > self.deg:
                raise ValueError(f"word {w} exceeds degree {self.deg}")
            if any(not 1 <= k <= self.d for k in w):
                raise ValueError(f"word {w} has letters outside 1..{self.d}")
            m = np.asarray(m, dtype=complex)
            if m.shape != (self.p, self.q):
                raise ValueError(
                    f"coefficient at {w} has shape {m.shape}, "
                    f"expected ({self.p}, {self.q})")
            clean[w] = m
        self.coeffs = clean

    def coeff(self, word) -> np.ndarray:
        return self.coeffs.get(tuple(word),
                               np.zeros((self.p, self.q), dtype=complex))

    def copy(self) -> "FreeSeries":
        return FreeSeries(self.d, self.deg, self.p, self.q,
                          {w: m.copy() for w, m in self.coeffs.items()})

    def truncate(self, deg: int) -> "FreeSeries":
        return FreeSeries(self.d, deg, self.p, self.q,
                          {w: m for w, m in self.coeffs.items()
                           if len(w) <= deg})

    def __add__(self, other: "FreeSeries") -> "FreeSeries":
        _check_same_shape(self, other)
        deg = min(self.deg, other.deg)
        out = {w: m.copy() for w, m in self.coeffs.items() if len(w) <= deg}
        for w, m in other.coeffs.items():
            if len(w) <= deg:
                out[w] = out.get(w, 0) + m
        return FreeSeries(self.d, deg, self.p, self.q, out)

    def __sub__(self, other: "FreeSeries") -> "FreeSeries":
        return self + (other * (-1.0))

    def __mul__(self, scalar) -> "FreeSeries":
        return FreeSeries(self.d, self.deg, self.p, self.q,
                          {w: m * scalar for w, m in self.coeffs.items()})

    __rmul__ = __mul__

    def max_coeff_diff(self, other: "FreeSeries") -> float:
        words = set(self.coeffs) | set(other.coeffs)
        if not words:
            return 0.0
        return max(float(np.max(np.abs(self.coeff(w) - other.coeff(w))))
                   for w in words)

    def to_json(self) -> dict:
        terms = []
        for w in sorted(self.coeffs, key=lambda t: (len(t), t)):
            m = self.coeffs[w]
            terms.append({"word": list(w),
                          "re": m.real.tolist(),
                          "im": m.imag.tolist()})
        return {"d": self.d, "deg": self.deg, "p": self.p, "q": self.q,
                "terms": terms}

    @classmethod
    def from_json(cls, data: dict) -> "FreeSeries":
        coeffs = {}
        for t in data["terms"]:
            m = np.array(t["re"], dtype=complex) + 1j * np.array(t["im"])
            coeffs[tuple(t["word"])] = m
        return cls(data["d"], data["deg"], data["p"], data["q"], coeffs)


@dataclass
class MatrixPoint:
    """A d-tuple of complex n x n matrices; a point of the NC unit ball
    when the row norm is strictly below 1."""

    d: int
    n: int
    mats: list[np.ndarray]

    def __post_init__(self):
        if len(self.mats) != self.d:
            raise ValueError(f"expected {self.d} matrices, got {len(self.mats)}")
        self.mats = [np.asarray(m, dtype=complex).reshape(self.n, self.n)
                     for m in self.mats]

    def row_norm(self) -> float:
        return float(np.linalg.norm(np.hstack(self.mats), 2))

    def word_product(self, word) -> np.ndarray:
        out = np.eye(self.n, dtype=complex)
        for k in word:
            out = out @ self.mats[k - 1]
        return out

    def direct_sum(self, other: "MatrixPoint") -> "MatrixPoint":
        mats = []
        for a, b in zip(self.mats, other.mats):
            m = np.zeros((self.n + other.n, self.n + other.n), dtype=complex)
            m[:self.n, :self.n] = a
            m[self.n:, self.n:] = b
            mats.append(m)
        return MatrixPoint(self.d, self.n + other.n, mats)


def zero_point(d: int, n: int = 1) -> MatrixPoint:
    return MatrixPoint(d, n, [np.zeros((n, n), dtype=complex)] * d)


def _check_same_shape(F: FreeSeries, G: FreeSeries):
    if (F.d, F.p, F.q) != (G.d, G.p, G.q):
        raise ValueError("series shape/alphabet mismatch")


def identity_series(d: int, deg: int, p: int = 1) -> FreeSeries:
    return FreeSeries(d, deg, p, p, {(): np.eye(p, dtype=complex)})


def constant_series(d: int, deg: int, mat) -> FreeSeries:
    mat = np.atleast_2d(np.asarray(mat, dtype=complex))
    return FreeSeries(d, deg, mat.shape[0], mat.shape[1], {(): mat})


def letter_series(d: int, deg: int, k: int, p: int = 1) -> FreeSeries:
    """The series Z_k with identity coefficient."""
    return FreeSeries(d, deg, p, p, {(k,): np.eye(p, dtype=complex)})


# ---------------------------------------------------------------------------
# dense layout + factorization tables

def _offsets(d: int, deg: int) -> list[int]:
    return [word_count(d, g - 1) if g > 0 else 0 for g in range(deg + 2)]


@lru_cache(maxsize=None)
def _split_tables(d: int, deg: int):
    """Per grade g: index triples (a, b, c) over all factorizations
    word_a = word_b . word_c with |a| = g, as numpy arrays.

    Index arithmetic in the graded-lex layout: a word of grade g with
    digit value r sits at offset(g) + r, and concatenation stacks digits,
    so prefix/suffix indices come from divmod by powers of d.
    """
    off = _offsets(d, deg)
    tables = []
    for g in range(deg + 1):
        rel = np.arange(d ** g, dtype=np.int64)
        a_parts, b_parts, c_parts, s_parts = [], [], [], []
        for s in range(g + 1):
            tail = d ** (g - s)
            a_parts.append(off[g] + rel)
            b_parts.append(off[s] + rel // tail)
            c_parts.append(off[g - s] + rel % tail)
            s_parts.append(np.full(d ** g, s, dtype=np.int64))
        tables.append((np.concatenate(a_parts), np.concatenate(b_parts),
                       np.concatenate(c_parts), np.concatenate(s_parts)))
    return tables


def to_dense(F: FreeSeries, deg: int | None = None) -> np.ndarray:
    """Coefficient array of shape (word_count, p, q) in graded-lex order."""
    if deg is None:
        deg = F.deg
    idx = index_map(F.d, deg)
    out = np.zeros((len(idx), F.p, F.q), dtype=complex)
    for w, m in F.coeffs.items():
        if len(w) <= deg:
            out[idx[w]] = m
    return out


def from_dense(d: int, deg: int, arr: np.ndarray) -> FreeSeries:
    basis = enumerate_tuples(d, deg)
    p, q = arr.shape[1], arr.shape[2]
    coeffs = {w: arr[i] for i, w in enumerate(basis) if np.any(arr[i])}
    return FreeSeries(d, deg, p, q, coeffs)


# ---------------------------------------------------------------------------
# arithmetic

def multiply(F: FreeSeries, G: FreeSeries) -> FreeSeries:
    """Coefficient convolution (FG)_a = sum_{bc=a} F_b G_c, clipped to the
    smaller carried degree."""
    if F.q != G.p or F.d != G.d:
        raise ValueError("shape mismatch in series product")
    deg = min(F.deg, G.deg)
    Fd = to_dense(F, deg)
    Gd = to_dense(G, deg)
    out = np.zeros((word_count(F.d, deg), F.p, G.q), dtype=complex)
    for a, b, c, _ in _split_tables(F.d, deg):
        prods = np.einsum("spk,skq->spq", Fd[b], Gd[c])
        np.add.at(out, a, prods)
    return from_dense(F.d, deg, out)


def dagger_series(F: FreeSeries) -> FreeSeries:
    """Transpose symbol: coefficient at alpha moves to the reversed word."""
    return FreeSeries(F.d, F.deg, F.p, F.q,
                      {w[::-1]: m.copy() for w, m in F.coeffs.items()})


def invert_series(F: FreeSeries) -> FreeSeries:
    """Two-sided inverse up to the carried degree, by grade recursion."""
    if F.p != F.q:
        raise ValueError("only square series are invertible")
    F0 = F.coeff(())
    try:
        F0inv = np.linalg.inv(F0)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError("constant term is singular") from None
    deg = F.deg
    Fd = to_dense(F)
    out = np.zeros_like(Fd)
    out[0] = F0inv
    tables = _split_tables(F.d, deg)
    for g in range(1, deg + 1):
        a, b, c, s = tables[g]
        keep = s >= 1  # G_a = -F0inv . sum over splits with nonempty F factor
        a, b, c = a[keep], b[keep], c[keep]
        lo, hi = word_count(F.d, g - 1), word_count(F.d, g)
        acc = np.zeros((hi - lo, F.p, F.q), dtype=complex)
        prods = np.einsum("spk,skq->spq", Fd[b], out[c])
        np.add.at(acc, a - lo, prods)
        out[lo:hi] = -np.einsum("pk,skq->spq", F0inv, acc)
    return from_dense(F.d, deg, out)


def cayley(F: FreeSeries, direction: str) -> FreeSeries:
    """Fractional-linear bijection between the Schur and Herglotz classes.

    direction "schur_to_herglotz": H = (I + B)(I - B)^{-1}, needs ||B_0|| < 1.
    direction "herglotz_to_schur": B = (H - I)(H + I)^{-1}.
    """
    if F.p != F.q:
        raise ValueError("cayley needs square coefficients")
    I = identity_series(F.d, F.deg, F.p)
    if direction == "schur_to_herglotz":
        if np.linalg.norm(F.coeff(()), 2) >= 1:
            raise np.linalg.LinAlgError("constant term not a strict contraction")
        return multiply(I + F, invert_series(I - F))
    if direction == "herglotz_to_schur":
        H0 = F.coeff(())
        if np.linalg.cond(np.eye(F.p) + H0) > 1e14:
            raise np.linalg.LinAlgError("I + H(0) numerically singular")
        return multiply(F - I, invert_series(F + I))
    raise ValueError(f"unknown direction {direction!r}")


# ---------------------------------------------------------------------------
# evaluation

def word_powers(Z: MatrixPoint, deg: int) -> np.ndarray:
    """Array of Z^alpha for every word of length <= deg, graded-lex order."""
    off = _offsets(Z.d, deg)
    n = Z.n
    out = np.zeros((word_count(Z.d, deg), n, n), dtype=complex)
    out[0] = np.eye(n)
    for g in range(deg):
        parents = out[off[g]:off[g + 1]]
        for k in range(Z.d):
            child = off[g + 1] + np.arange(len(parents)) * Z.d + k
            out[child] = parents @ Z.mats[k]
    return out


def evaluate(F: FreeSeries, Z: MatrixPoint) -> np.ndarray:
    """F(Z) = sum Z^alpha (x) F_alpha, an (n p) x (n q) matrix."""
    if F.d != Z.d:
        raise ValueError("alphabet mismatch between series and point")
    n = Z.n
    if len(F.coeffs) <= 32:
        out = np.zeros((n * F.p, n * F.q), dtype=complex)
        for w, m in F.coeffs.items():
            out += np.kron(Z.word_product(w), m)
        return out
    Zp = word_powers(Z, F.deg)
    C = to_dense(F)
    return np.einsum("wij,wab->iajb", Zp, C).reshape(n * F.p, n * F.q)


# ---------------------------------------------------------------------------
# multiplication operators on the truncated Fock space

def multiplier_matrix(F: FreeSeries, side: Side, N: int) -> np.ndarray:
    """Matrix of the left (or right) multiplication operator by F on
    F2(d, N) (x) C^q, mapping into F2(d, N) (x) C^p.

    Layout is word-major: basis vector (alpha, j) sits at row
    index(alpha) * p + j.  Left action sends e_beta (x) v to
    sum_alpha e_{alpha.beta} (x) F_alpha v; right action appends the
    coefficient word instead.  Words past grade N are dropped.
    """
    if F.deg > N:
        raise ValueError("series degree exceeds Fock truncation")
    d = F.d
    nw = word_count(d, N)
    off = _offsets(d, N)
    out = np.zeros((nw, F.p, nw, F.q), dtype=complex)
    for w, m in F.coeffs.items():
        ga = len(w)
        rel_a = index_map(d, N)[w] - off[ga]
        for gb in range(N - ga + 1):
            relb = np.arange(d ** gb, dtype=np.int64)
            cols = off[gb] + relb
            if side is Side.LEFT:
                rows = off[ga + gb] + rel_a * (d ** gb) + relb
            else:
                rows = off[ga + gb] + relb * (d ** ga) + rel_a
            out[rows, :, cols, :] += m
    return out.reshape(nw * F.p, nw * F.q)


def right_product(F: FreeSeries, G: FreeSeries) -> FreeSeries:
    """The series H with M^R_H = M^R_F . M^R_G on the truncated Fock space.

    Coefficients are read off the vacuum action of the composition; in the
    scalar case this equals multiply(G, F).
    """
    if F.q != G.p or F.d != G.d:
        raise ValueError("shape mismatch in right product")
    deg = min(F.deg, G.deg)
    MF = multiplier_matrix(F.truncate(deg), Side.RIGHT, deg)
    MG = multiplier_matrix(G.truncate(deg), Side.RIGHT, deg)
    comp = MF @ MG
    # columns of the vacuum block give e_gamma (x) H_gamma v
    vac = comp[:, :G.q]
    arr = vac.reshape(word_count(F.d, deg), F.p, G.q)
    return from_dense(F.d, deg, arr)


def schur_norm_estimate(F: FreeSeries, N: int) -> float:
    """Operator norm of the truncated left multiplication matrix: a lower
    bound for the multiplier norm, nondecreasing in N."""
    return float(np.linalg.norm(multiplier_matrix(F, Side.LEFT, N), 2))


def normalize_schur(F: FreeSeries, N: int, target: float = 0.9) -> FreeSeries:
    """Scale F so the truncated multiplier norm estimate equals target."""
    est = schur_norm_estimate(F, N)
    if est == 0:
        return F.copy()
    return F * (target / est)

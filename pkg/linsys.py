"""
Linear systems over the non-commutative Kondratiev algebra.

Matrices carry NcSeries entries that share one TruncationPolicy. A system
y_n = sum_{m<=n} h_m (x) u_{n-m} with h_0 = D, h_k = C A^{k-1} B is the Taylor
expansion of H(z) = D + z C (I - zA)^{-1} B. The observability matrix stacks the
blocks C, CA, ..., CA^{steps-1} vertically and acts on column vectors in algebra^N.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from exceptions import DimensionMismatch, DomainError, PreconditionFailed
from freeword import enumerate_words
from quantization import EmbeddingSpec, vage_constant
from series import NcSeries, TruncationPolicy, add, expectation, norm_p, scale, wick_mul
from series import allclose as series_allclose
from series import retruncate as series_retruncate

logger = logging.getLogger(__name__)


class AlgebraMatrix:
    """Dense row-major grid of series with a shared truncation policy."""

    __slots__ = ("entries", "trunc")

    def __init__(self, entries: Sequence[Sequence[NcSeries]], trunc: Optional[TruncationPolicy] = None):
        grid = [list(row) for row in entries]
        if not grid or not grid[0]:
            raise DimensionMismatch("a matrix needs at least one row and one column")
        width = len(grid[0])
        if any(len(row) != width for row in grid):
            raise DimensionMismatch(f"ragged rows: {[len(row) for row in grid]}")

        policies = {f.trunc for row in grid for f in row}
        if trunc is None:
            trunc = next(iter(policies))
            for other in policies:
                trunc = trunc.coarsen(other)
            if len(policies) > 1:
                logger.warning(f"Mixed truncation policies in matrix entries; coercing to {trunc}")
        if policies != {trunc}:
            grid = [[f if f.trunc == trunc else series_retruncate(f, trunc) for f in row] for row in grid]
        self.entries: List[List[NcSeries]] = grid
        self.trunc = trunc

    @classmethod
    def zeros(cls, rows: int, cols: int, trunc: TruncationPolicy) -> "AlgebraMatrix":
        return cls([[NcSeries.zero(trunc) for _ in range(cols)] for _ in range(rows)], trunc)

    @classmethod
    def identity(cls, n: int, trunc: TruncationPolicy) -> "AlgebraMatrix":
        return cls(
            [[NcSeries.unit(trunc) if i == j else NcSeries.zero(trunc) for j in range(n)] for i in range(n)],
            trunc,
        )

    @classmethod
    def from_complex(cls, values, trunc: TruncationPolicy) -> "AlgebraMatrix":
        """Constant series matrix from a 2-d array of scalars."""
        array = np.atleast_2d(np.asarray(values, dtype=complex))
        if array.ndim != 2:
            raise DimensionMismatch(f"expected a 2-d array, got shape {array.shape}")
        return cls([[NcSeries.constant(complex(v), trunc) for v in row] for row in array], trunc)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[NcSeries]], trunc: Optional[TruncationPolicy] = None) -> "AlgebraMatrix":
        return cls(rows, trunc)

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def entry(self, i: int, j: int) -> NcSeries:
        return self.entries[i][j]

    def letters(self) -> List[int]:
        return sorted({letter for row in self.entries for f in row for letter in f.letters()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    __hash__ = None

    def __matmul__(self, other: "AlgebraMatrix") -> "AlgebraMatrix":
        return mat_mul(self, other)

    def __add__(self, other: "AlgebraMatrix") -> "AlgebraMatrix":
        return mat_add(self, other)

    def __repr__(self) -> str:
        return f"AlgebraMatrix({self.rows}x{self.cols}, max_len={self.trunc.max_len})"


def mat_mul(X: AlgebraMatrix, Y: AlgebraMatrix, deterministic: bool = False) -> AlgebraMatrix:
    """(X Y)_ij = sum_k X_ik (x) Y_kj, factors kept in the written order."""
    if X.cols != Y.rows:
        raise DimensionMismatch(f"cannot multiply {X.rows}x{X.cols} by {Y.rows}x{Y.cols}")
    trunc = X.trunc.coarsen(Y.trunc)
    if trunc != X.trunc or trunc != Y.trunc:
        logger.warning(f"Matrix product of different truncation policies; coercing to {trunc}")
    out = []
    for i in range(X.rows):
        row = []
        for j in range(Y.cols):
            total = NcSeries.zero(trunc)
            for k in range(X.cols):
                total = add(total, wick_mul(X.entries[i][k], Y.entries[k][j], deterministic))
            row.append(total)
        out.append(row)
    return AlgebraMatrix(out, trunc)


def mat_add(X: AlgebraMatrix, Y: AlgebraMatrix) -> AlgebraMatrix:
    if X.shape != Y.shape:
        raise DimensionMismatch(f"cannot add {X.shape} and {Y.shape}")
    return AlgebraMatrix(
        [[add(x, y) for x, y in zip(row_x, row_y)] for row_x, row_y in zip(X.entries, Y.entries)]
    )


def mat_scale(c: complex, X: AlgebraMatrix) -> AlgebraMatrix:
    return AlgebraMatrix([[scale(c, f) for f in row] for row in X.entries], X.trunc)


def mat_pow(X: AlgebraMatrix, k: int, deterministic: bool = False) -> AlgebraMatrix:
    if X.rows != X.cols:
        raise DimensionMismatch(f"matrix power needs a square matrix, got {X.shape}")
    if k < 0:
        raise DomainError(f"matrix power needs k >= 0, got {k}")
    result = AlgebraMatrix.identity(X.rows, X.trunc)
    for _ in range(k):
        result = mat_mul(result, X, deterministic)
    return result


def vstack(blocks: Sequence[AlgebraMatrix]) -> AlgebraMatrix:
    if not blocks:
        raise DimensionMismatch("nothing to stack")
    cols = {block.cols for block in blocks}
    if len(cols) != 1:
        raise DimensionMismatch(f"blocks have different column counts {sorted(cols)}")
    return AlgebraMatrix([row for block in blocks for row in block.entries])


def retruncate(X: AlgebraMatrix, trunc: TruncationPolicy) -> AlgebraMatrix:
    return AlgebraMatrix([[series_retruncate(f, trunc) for f in row] for row in X.entries], trunc)


def allclose(X: AlgebraMatrix, Y: AlgebraMatrix, atol: Optional[float] = None, rtol: Optional[float] = None) -> bool:
    if X.shape != Y.shape:
        return False
    return all(
        series_allclose(x, y, atol, rtol)
        for row_x, row_y in zip(X.entries, Y.entries)
        for x, y in zip(row_x, row_y)
    )


def expectation_matrix(X: AlgebraMatrix) -> np.ndarray:
    """Entry-wise generalized expectation; a homomorphism onto complex matrices."""
    return np.array([[expectation(f) for f in row] for row in X.entries], dtype=complex)


@dataclass(frozen=True)
class SystemDef:
    """Realization quadruple (A, B, C, D): A is N x N, B N x q_in, C p_out x N, D p_out x q_in."""

    A: AlgebraMatrix
    B: AlgebraMatrix
    C: AlgebraMatrix
    D: AlgebraMatrix

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        n = self.A.rows
        if self.A.cols != n:
            raise DimensionMismatch(f"A must be square, got {self.A.shape}")
        if self.B.rows != n:
            raise DimensionMismatch(f"B has {self.B.rows} rows, A is {n}x{n}")
        if self.C.cols != n:
            raise DimensionMismatch(f"C has {self.C.cols} columns, A is {n}x{n}")
        if self.D.shape != (self.C.rows, self.B.cols):
            raise DimensionMismatch(f"D must be {self.C.rows}x{self.B.cols}, got {self.D.shape}")

    @property
    def n_states(self) -> int:
        return self.A.rows

    @property
    def q_in(self) -> int:
        return self.B.cols

    @property
    def p_out(self) -> int:
        return self.C.rows


def simulate(h: Sequence[AlgebraMatrix], u: Sequence[AlgebraMatrix], n_steps: int, deterministic: bool = False) -> List[AlgebraMatrix]:
    """
    y_n = sum_{m=0}^{n} h_m (x) u_{n-m} for n < n_steps.

    Sequences shorter than n_steps are padded with zero matrices.
    """
    if n_steps < 0:
        raise DomainError(f"n_steps must be >= 0, got {n_steps}")
    if not h or not u:
        raise DimensionMismatch("simulate needs at least one kernel matrix and one input")
    p, q = h[0].shape
    if any(hm.shape != (p, q) for hm in h):
        raise DimensionMismatch(f"kernel matrices must all be {p}x{q}")
    r = u[0].cols
    if any(un.shape != (q, r) for un in u):
        raise DimensionMismatch(f"inputs must all be {q}x{r} to match {p}x{q} kernels")

    trunc = h[0].trunc
    for matrix in list(h) + list(u):
        trunc = trunc.coarsen(matrix.trunc)

    outputs = []
    for n in range(n_steps):
        y = AlgebraMatrix.zeros(p, r, trunc)
        for m in range(n + 1):
            if m < len(h) and n - m < len(u):
                y = mat_add(y, mat_mul(h[m], u[n - m], deterministic))
        outputs.append(y)
    logger.debug(f"Simulated {n_steps} steps of a {p}x{q} system")
    return outputs


def impulse(q_in: int, n_steps: int, trunc: TruncationPolicy) -> List[AlgebraMatrix]:
    """u_0 = identity, u_n = 0 afterwards; simulate(h, impulse(...)) returns h."""
    if n_steps < 1:
        raise DomainError(f"an impulse needs n_steps >= 1, got {n_steps}")
    return [AlgebraMatrix.identity(q_in, trunc)] + [AlgebraMatrix.zeros(q_in, q_in, trunc) for _ in range(n_steps - 1)]


def transfer_taylor(system: SystemDef, K: int, deterministic: bool = False) -> List[AlgebraMatrix]:
    """
    (h_0, ..., h_K) with h_0 = D and h_k = C A^{k-1} B.

    The expansion of (I - zA)^{-1} converges for |z| below realization_radius; the
    truncated coefficients are computed regardless.
    """
    if K < 0:
        raise DomainError(f"K must be >= 0, got {K}")
    system.validate()
    coefficients = [system.D]
    ca = system.C
    for _ in range(K):
        coefficients.append(mat_mul(ca, system.B, deterministic))
        ca = mat_mul(ca, system.A, deterministic)
    return coefficients


def realization_radius(system: SystemDef, p: int = 0) -> float:
    """1 / (N B_2 max_ij ||A_ij||_p); the Neumann expansion of (I - zA)^{-1} converges inside it."""
    largest = max(norm_p(f, p) for row in system.A.entries for f in row)
    if largest == 0.0:
        return math.inf
    b2 = vage_constant(EmbeddingSpec.from_kondratiev(q=p + 2, p=p))
    return 1.0 / (system.n_states * b2 * largest)


def _check_pair(C: AlgebraMatrix, A: AlgebraMatrix, steps: int) -> None:
    if A.rows != A.cols:
        raise DimensionMismatch(f"A must be square, got {A.shape}")
    if C.cols != A.rows:
        raise DimensionMismatch(f"C has {C.cols} columns, A is {A.rows}x{A.cols}")
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")


def observability_matrix(C: AlgebraMatrix, A: AlgebraMatrix, steps: int, deterministic: bool = False) -> AlgebraMatrix:
    """Vertical stack of C A^k, k = 0..steps-1."""
    _check_pair(C, A, steps)
    blocks = [C]
    for _ in range(steps - 1):
        blocks.append(mat_mul(blocks[-1], A, deterministic))
    return vstack(blocks)


def _expectation_observability(C: AlgebraMatrix, A: AlgebraMatrix, steps: int) -> np.ndarray:
    ec = expectation_matrix(C)
    ea = expectation_matrix(A)
    blocks = [ec]
    for _ in range(steps - 1):
        blocks.append(blocks[-1] @ ea)
    return np.vstack(blocks)


def numerical_rank(M: np.ndarray, rank_rtol: Optional[float] = None) -> int:
    """Singular values above sigma_max * max(dim) * rank_rtol."""
    if M.size == 0:
        return 0
    rtol = Config.RANK_RTOL if rank_rtol is None else rank_rtol
    sigma_max = np.linalg.norm(M, 2)
    if sigma_max == 0.0:
        return 0
    return int(np.linalg.matrix_rank(M, tol=sigma_max * max(M.shape) * rtol))


def expectation_rank(C: AlgebraMatrix, A: AlgebraMatrix, steps: int, rank_rtol: Optional[float] = None) -> int:
    _check_pair(C, A, steps)
    return numerical_rank(_expectation_observability(C, A, steps), rank_rtol)


def is_observable_expectation(
    C: AlgebraMatrix,
    A: AlgebraMatrix,
    steps: int,
    strong: bool = False,
    rank_rtol: Optional[float] = None,
) -> bool:
    """Full column rank of the stacked E[C] E[A]^k; strong mode uses steps = N."""
    if strong:
        steps = A.rows
    return expectation_rank(C, A, steps, rank_rtol) == A.rows


def _coefficient_blocks(O: AlgebraMatrix) -> Dict[Tuple[int, ...], np.ndarray]:
    """O_beta: the complex matrix of beta-coefficients of every entry of O."""
    blocks: Dict[Tuple[int, ...], np.ndarray] = {}
    for i, row in enumerate(O.entries):
        for j, f in enumerate(row):
            for w, c in f._terms.items():
                block = blocks.get(w)
                if block is None:
                    block = blocks[w] = np.zeros(O.shape, dtype=complex)
                block[i, j] = c
    blocks.setdefault((), np.zeros(O.shape, dtype=complex))
    return blocks


def _alphabet(C: AlgebraMatrix, A: AlgebraMatrix) -> int:
    letters = sorted(set(C.letters()) | set(A.letters()))
    top = letters[-1] if letters else 1
    if C.trunc.max_letter is not None:
        top = min(top, C.trunc.max_letter)
    return top


def kernel_trivial_check(
    C: AlgebraMatrix,
    A: AlgebraMatrix,
    steps: int,
    residual_tol: Optional[float] = None,
    rank_rtol: Optional[float] = None,
    seed: int = 0,
) -> bool:
    """
    Confirm that O f = 0 forces f = 0 over the truncated algebra, word by word.

    The gamma-coefficient of O f reads M_0 f_gamma = y_gamma - sum_{beta nonempty prefix of gamma}
    O_beta f_{beta^{-1} gamma}, with M_0 = E[O]. Words are visited by length, so the right
    side only involves shorter words, and every step has exactly one solution when M_0 has a
    left inverse. That is checked once on pinv(M_0), then each step is solved for a seeded
    nonzero trial series and must return its coefficient. Steps use the trial's exact
    lower-order coefficients, so rounding does not compound across lengths.
    """
    if not is_observable_expectation(C, A, steps, rank_rtol=rank_rtol):
        raise PreconditionFailed("the expectation pair (E[C], E[A]) is not observable for this horizon")
    tol = Config.RESIDUAL_TOL if residual_tol is None else residual_tol
    recovery_tol = math.sqrt(tol)
    O = observability_matrix(C, A, steps)
    blocks = _coefficient_blocks(O)
    m0 = blocks[()]
    pinv = np.linalg.pinv(m0)
    n = A.rows

    left_error = np.linalg.norm(pinv @ m0 - np.eye(n), 2)
    if not left_error <= recovery_tol:
        logger.warning(f"E[O] has no usable left inverse: ||pinv(E[O]) E[O] - I|| = {left_error:.3g}")
        return False

    rng = np.random.default_rng(seed)
    m0_norm = np.linalg.norm(m0, 2)
    trial: Dict[Tuple[int, ...], np.ndarray] = {}
    visited = 0
    for gamma in enumerate_words(_alphabet(C, A), O.trunc.max_len):
        key = tuple(gamma)
        visited += 1
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        trial[key] = x
        lower = np.zeros(O.rows, dtype=complex)
        for k in range(1, len(key) + 1):
            block = blocks.get(key[:k])
            if block is not None:
                lower += block @ trial[key[k:]]
        y = m0 @ x + lower
        rhs = y - lower
        f_gamma = pinv @ rhs
        scale_rhs = max(1.0, m0_norm * float(np.linalg.norm(x)), float(np.linalg.norm(y)))
        residual = np.linalg.norm(m0 @ f_gamma - rhs)
        if not residual <= tol * scale_rhs:
            logger.warning(f"Kernel recursion inconsistent at word {list(key)}: residual {residual:.3g}")
            return False
        error = np.linalg.norm(f_gamma - x)
        if not error <= recovery_tol * max(1.0, float(np.linalg.norm(x))):
            logger.warning(f"Kernel recursion is not unique at word {list(key)}: recovery error {error:.3g}")
            return False
    logger.debug(f"Kernel recursion solved {visited} words for N={n}, steps={steps}")
    return True


def truncated_kernel_dimension(
    C: AlgebraMatrix,
    A: AlgebraMatrix,
    steps: int,
    max_len: Optional[int] = None,
    max_words: int = 2000,
    rank_rtol: Optional[float] = None,
) -> int:
    """
    Nullity of f -> O f on coefficient vectors indexed by words up to max_len.

    Row block gamma, column block delta holds O_beta whenever gamma = beta delta, so the
    matrix is block lower triangular by length with E[O] on the diagonal.
    """
    _check_pair(C, A, steps)
    O = observability_matrix(C, A, steps)
    length = O.trunc.max_len if max_len is None else min(max_len, O.trunc.max_len)
    words = [tuple(w) for w in enumerate_words(_alphabet(C, A), length)]
    if len(words) > max_words:
        raise DomainError(f"{len(words)} words exceed max_words={max_words}; lower max_len")
    index = {w: i for i, w in enumerate(words)}
    blocks = _coefficient_blocks(O)
    p_rows, n = O.shape
    big = np.zeros((len(words) * p_rows, len(words) * n), dtype=complex)
    for gamma in words:
        r = index[gamma] * p_rows
        for k in range(len(gamma) + 1):
            beta = gamma[:k]
            block = blocks.get(beta)
            if block is None:
                continue
            c = index[gamma[k:]] * n
            big[r:r + p_rows, c:c + n] = block
    return big.shape[1] - numerical_rank(big, rank_rtol)

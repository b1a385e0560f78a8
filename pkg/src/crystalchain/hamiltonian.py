"""Ladder operators on crystal labels and symbolic Hamiltonian assembly.

The mutation model couples basis states through short chains of ladder
operators: the spin-flip steps J+/J- and the label shifts A_i / A_{i,k}
with their adjoints.  Chains act right to left, and an intermediate result
outside the admissible label set annihilates the whole chain.  Every
surviving chain adds exactly +1 to the integer coefficient matrix of one
coupling constant, so the Hamiltonian structure stays exact and parameter
free until `evaluate` substitutes numbers.

The baseline builder instead couples words at Hamming distance one with a
single coupling.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Optional

import numpy as np

from .crystal import (
    BasisMap,
    CrystalLabels,
    Spin,
    SpinWord,
    enumerate_basis,
    labels_valid,
    reduce_word,
)

# A ladder operator either annihilates (None) or yields admissible labels.
LadderResult = Optional[CrystalLabels]


class CouplingSymbol(Enum):
    """The six coupling constants, keyed by their manifest/CLI names."""

    MU0 = "mu0"
    EPS = "eps"
    GAMMA = "gamma"
    DELTA = "delta"
    ETA = "eta"
    BETA = "beta"


OFFDIAG_SYMBOLS = (
    CouplingSymbol.EPS,
    CouplingSymbol.GAMMA,
    CouplingSymbol.DELTA,
    CouplingSymbol.ETA,
    CouplingSymbol.BETA,
)


@dataclass(frozen=True)
class CouplingValues:
    """Numeric coupling values, in units of the diagonal scale mu0."""

    mu0: float = 1.0
    eps: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0
    eta: float = 0.0
    beta: float = 0.0

    def __post_init__(self) -> None:
        for name, value in self.as_dict().items():
            if not math.isfinite(value):
                raise ValueError(f"coupling {name} must be finite, got {value!r}")

    def value(self, symbol: CouplingSymbol) -> float:
        return getattr(self, symbol.value)

    def as_dict(self) -> dict[str, float]:
        return {
            "mu0": self.mu0,
            "eps": self.eps,
            "gamma": self.gamma,
            "delta": self.delta,
            "eta": self.eta,
            "beta": self.beta,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, float]) -> "CouplingValues":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown coupling names: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})


def apply_j_plus(labels: CrystalLabels) -> LadderResult:
    """Raise 2J3 by 2 inside the irrep; annihilate past the top rung."""
    out = labels.with_two_j3(labels.two_j3 + 2)
    return out if abs(out.two_j3) <= out.two_j_top else None


def apply_j_minus(labels: CrystalLabels) -> LadderResult:
    """Lower 2J3 by 2 inside the irrep; annihilate past the bottom rung."""
    out = labels.with_two_j3(labels.two_j3 - 2)
    return out if abs(out.two_j3) <= out.two_j_top else None


def _check_a_index(i: int, n: int) -> None:
    if not 2 <= i <= n:
        raise ValueError(f"index i must satisfy 2 <= i <= {n}, got {i}")


def _check_a_ik_indices(i: int, k: int, n: int) -> None:
    if not 2 <= i <= n - 1:
        raise ValueError(f"index i must satisfy 2 <= i <= {n - 1}, got {i}")
    if not i + 1 <= k <= n:
        raise ValueError(f"index k must satisfy {i + 1} <= k <= {n}, got {k}")


def apply_a(i: int, labels: CrystalLabels) -> LadderResult:
    """Lower every 2J^l for i <= l <= N by 2; annihilate if inadmissible."""
    _check_a_index(i, labels.n)
    out = labels.with_shift(i, labels.n, -2)
    return out if labels_valid(out) else None


def apply_a_dagger(i: int, labels: CrystalLabels) -> LadderResult:
    """Raise every 2J^l for i <= l <= N by 2; annihilate if inadmissible."""
    _check_a_index(i, labels.n)
    out = labels.with_shift(i, labels.n, 2)
    return out if labels_valid(out) else None


def apply_a_ik(i: int, k: int, labels: CrystalLabels) -> LadderResult:
    """Lower 2J^l for i <= l <= k-1 by 2, leaving l >= k untouched."""
    _check_a_ik_indices(i, k, labels.n)
    out = labels.with_shift(i, k - 1, -2)
    return out if labels_valid(out) else None


def apply_a_ik_dagger(i: int, k: int, labels: CrystalLabels) -> LadderResult:
    """Raise 2J^l for i <= l <= k-1 by 2, leaving l >= k untouched."""
    _check_a_ik_indices(i, k, labels.n)
    out = labels.with_shift(i, k - 1, 2)
    return out if labels_valid(out) else None


@dataclass(frozen=True)
class MutationContext:
    """Free-letter counts around one site, before and after its flip.

    `r_l` counts unmatched R's strictly left of the site, `y_r` unmatched
    Y's strictly right of it (each side reduced on its own).  The in/fi
    fields include the flipping site itself in the matched-pair bookkeeping
    before and after the flip.
    """

    position: int
    initial: Spin
    r_l: int
    y_r: int
    r_in: int
    y_in: int
    r_fi: int
    y_fi: int


def mutation_context(word: "SpinWord | str", position: int) -> MutationContext:
    """Diagnostic context for a single-site flip at 1-based `position`."""
    word = word if isinstance(word, SpinWord) else SpinWord.parse(word)
    if not 1 <= position <= len(word):
        raise ValueError(f"position {position} outside 1..{len(word)}")
    r_l = reduce_word(word.spins[: position - 1]).b
    y_r = reduce_word(word.spins[position:]).a
    initial = word.spin_at(position)
    if initial is Spin.R:
        r_in, y_in = r_l + 1, y_r
        r_fi, y_fi = r_l, y_r + 1
    else:
        r_in, y_in = r_l, y_r + 1
        r_fi, y_fi = r_l + 1, y_r
    return MutationContext(position, initial, r_l, y_r, r_in, y_in, r_fi, y_fi)


@dataclass(frozen=True)
class SymbolicHamiltonian:
    """Exact Hamiltonian structure: one integer matrix per coupling.

    `diag` holds 2*J3 per state (the mu0 multiplier); `coeffs` maps each
    interaction symbol to a symmetric nonnegative integer matrix with zero
    diagonal.  `provenance` records, per (row, col), how many chains of
    each term family produced the entry.
    """

    n: int
    basis: BasisMap
    diag: np.ndarray
    coeffs: Mapping[CouplingSymbol, np.ndarray]
    provenance: Mapping[tuple[int, int], Counter]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coefficient(self, symbol: CouplingSymbol) -> np.ndarray:
        matrix = self.coeffs.get(symbol)
        if matrix is None:
            return np.zeros((self.dim, self.dim), dtype=np.int64)
        return matrix

    def evaluate(self, values: CouplingValues) -> np.ndarray:
        h = np.diag(values.mu0 * self.diag.astype(float))
        for symbol, matrix in self.coeffs.items():
            v = values.value(symbol)
            if v != 0.0:
                h = h + v * matrix
        return h

    def allowed_transitions(self, state: int) -> set[int]:
        connected = np.zeros(self.dim, dtype=bool)
        for matrix in self.coeffs.values():
            connected |= matrix[:, state] != 0
        connected[state] = False
        return set(int(f) for f in np.nonzero(connected)[0])

    def dump(self) -> str:
        """One line per entry: `row col SYMBOL multiplicity`, 1-based.

        The diagonal is emitted as `row row MU0 <2J3>`; lines are sorted by
        (row, col, symbol).  This text is the exact comparison surface.
        """
        entries: list[tuple[int, int, str, int]] = []
        for r in range(self.dim):
            entries.append((r + 1, r + 1, CouplingSymbol.MU0.name, int(self.diag[r])))
        for symbol, matrix in self.coeffs.items():
            rows, cols = np.nonzero(matrix)
            for r, c in zip(rows, cols):
                entries.append((int(r) + 1, int(c) + 1, symbol.name, int(matrix[r, c])))
        entries.sort()
        return "\n".join(f"{r} {c} {s} {m}" for r, c, s, m in entries)


_Chain = tuple[Callable[[CrystalLabels], LadderResult], ...]


def _a(i: int) -> Callable[[CrystalLabels], LadderResult]:
    return lambda labels: apply_a(i, labels)


def _a_dag(i: int) -> Callable[[CrystalLabels], LadderResult]:
    return lambda labels: apply_a_dagger(i, labels)


def _a_ik(i: int, k: int) -> Callable[[CrystalLabels], LadderResult]:
    return lambda labels: apply_a_ik(i, k, labels)


def _a_ik_dag(i: int, k: int) -> Callable[[CrystalLabels], LadderResult]:
    return lambda labels: apply_a_ik_dagger(i, k, labels)


def _model_terms(n: int) -> list[tuple[str, CouplingSymbol, _Chain]]:
    """Interaction chains, each listed in application order (first op first).

    Term families and ranges:
      H2 (delta): plain spin flips J- and J+.
      H1 (gamma): interior-label shifts, i = 2..N-1, k = i+1..N.
      H3 (eps):   irrep-lowering flips, i = 2..N.
      H5 (eps):   irrep-raising flips, m = 2..N.
      H6 (eta):   raise-then-shift flips, i = 2..N-2, k = i+1..N-1.
    Within every product the spin flip and the label shifts keep the
    written order: lower J3 before shrinking the irrep, and enlarge the
    irrep before raising J3, otherwise admissible moves would annihilate.
    """
    terms: list[tuple[str, CouplingSymbol, _Chain]] = [
        ("H2", CouplingSymbol.DELTA, (apply_j_minus,)),
        ("H2", CouplingSymbol.DELTA, (apply_j_plus,)),
    ]
    for i in range(2, n):
        for k in range(i + 1, n + 1):
            terms.append(("H1", CouplingSymbol.GAMMA, (apply_j_minus, _a_ik(i, k))))
            terms.append(("H1", CouplingSymbol.GAMMA, (_a_ik_dag(i, k), apply_j_plus)))
    for i in range(2, n + 1):
        terms.append(("H3", CouplingSymbol.EPS, (apply_j_minus, _a(i))))
        terms.append(("H3", CouplingSymbol.EPS, (_a_dag(i), apply_j_plus)))
    for m in range(2, n + 1):
        terms.append(("H5", CouplingSymbol.EPS, (_a_dag(m), apply_j_minus)))
        terms.append(("H5", CouplingSymbol.EPS, (apply_j_plus, _a(m))))
    for i in range(2, n - 1):
        for k in range(i + 1, n):
            terms.append(
                ("H6", CouplingSymbol.ETA, (_a_dag(k + 1), apply_j_minus, _a_ik(i, k)))
            )
            terms.append(
                ("H6", CouplingSymbol.ETA, (apply_j_plus, _a(k + 1), _a_ik_dag(i, k)))
            )
    return terms


def _check_structure(
    coeffs: Mapping[CouplingSymbol, np.ndarray], n: int
) -> None:
    for symbol, matrix in coeffs.items():
        if not (matrix == matrix.T).all():
            raise AssertionError(f"{symbol.name} coefficient matrix not symmetric")
        if np.diag(matrix).any():
            raise AssertionError(f"{symbol.name} coefficient matrix has diagonal entries")
        if (matrix < 0).any():
            raise AssertionError(f"{symbol.name} coefficient matrix has negative entries")
    eta = coeffs.get(CouplingSymbol.ETA)
    if n == 3 and eta is not None and eta.any():
        raise AssertionError("eta coefficients must vanish for three-site chains")


def build_model(n: int) -> SymbolicHamiltonian:
    """Assemble the mutation-model Hamiltonian structure for n sites.

    Every chain is applied to every basis state; surviving chains add +1
    at (final, initial).  Adjoint halves make each coefficient matrix
    symmetric by construction (verified).
    """
    basis = enumerate_basis(n)
    dim = len(basis)
    coeffs = {
        symbol: np.zeros((dim, dim), dtype=np.int64)
        for symbol in (
            CouplingSymbol.EPS,
            CouplingSymbol.GAMMA,
            CouplingSymbol.DELTA,
            CouplingSymbol.ETA,
        )
    }
    provenance: dict[tuple[int, int], Counter] = {}
    terms = _model_terms(n)
    for col in range(dim):
        start = basis.labels[col]
        for term_id, symbol, chain in terms:
            labels: LadderResult = start
            for op in chain:
                labels = op(labels)
                if labels is None:
                    break
            if labels is None:
                continue
            row = basis.index_of(labels)
            coeffs[symbol][row, col] += 1
            provenance.setdefault((row, col), Counter())[term_id] += 1
    _check_structure(coeffs, n)
    diag = np.array([labels.two_j3 for labels in basis.labels], dtype=np.int64)
    return SymbolicHamiltonian(n, basis, diag, coeffs, provenance)


def build_hamming(n: int, include_diagonal: bool = True) -> SymbolicHamiltonian:
    """Baseline structure: unit coupling between words one flip apart.

    Not a parameter choice of the mutation model; the connectivity pattern
    itself differs.  `include_diagonal=False` zeroes the 2*J3 diagonal for
    the factorized, exactly-plateaued variant.
    """
    basis = enumerate_basis(n)
    dim = len(basis)
    beta = np.zeros((dim, dim), dtype=np.int64)
    provenance: dict[tuple[int, int], Counter] = {}
    for col, word in enumerate(basis.words):
        for position in range(1, n + 1):
            row = basis.index_of_word(word.flip(position))
            beta[row, col] = 1
            provenance.setdefault((row, col), Counter())["HAMMING"] += 1
    coeffs = {CouplingSymbol.BETA: beta}
    _check_structure(coeffs, n)
    if include_diagonal:
        diag = np.array([labels.two_j3 for labels in basis.labels], dtype=np.int64)
    else:
        diag = np.zeros(dim, dtype=np.int64)
    return SymbolicHamiltonian(n, basis, diag, coeffs, provenance)


def evaluate(sym: SymbolicHamiltonian, values: CouplingValues) -> np.ndarray:
    """Dense symmetric matrix mu0*diag(2J3) + sum of coupling * structure."""
    return sym.evaluate(values)


def allowed_transitions(sym: SymbolicHamiltonian, state: int) -> set[int]:
    """Basis indices reachable from `state` by any nonzero coefficient."""
    return sym.allowed_transitions(state)


def dump_symbolic(sym: SymbolicHamiltonian) -> str:
    return sym.dump()

"""Battery Hamiltonians in the coherence basis."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import MAX_DIM

STRUCTURES = ("qubit-general", "diagonal", "off-diagonal", "mixed", "custom-diagonal")


@dataclass(frozen=True)
class BatteryHamiltonian:
    """A Hermitian energy operator plus the tag used to pick analytic formulas.

    ``params`` holds the constructor arguments and derived quantities:
    (h1, h3, h2, theta) for qubits, (alpha1, alpha2, alpha, phi) for the
    off-diagonal family, additionally (alpha3, alpha_bar) for the mixed family
    and ``epsilons`` for diagonal ones.
    """

    operator: np.ndarray
    structure: str
    params: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        op = np.array(self.operator, dtype=np.complex128)
        op.setflags(write=False)
        object.__setattr__(self, "operator", op)
        if self.structure not in STRUCTURES:
            raise ValueError(f"unknown structure tag {self.structure!r}")
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise ValueError("Hamiltonian must be square")
        if np.max(np.abs(op - op.conj().T)) > 1e-12:
            raise ValueError("Hamiltonian must be Hermitian")
        diag = np.diag(np.diag(op))
        if self.structure in ("diagonal", "custom-diagonal") and np.max(np.abs(op - diag)) > 1e-12:
            raise ValueError("diagonal Hamiltonian has off-diagonal entries")
        if self.structure == "off-diagonal" and np.max(np.abs(diag)) > 1e-12:
            raise ValueError("off-diagonal Hamiltonian has diagonal entries")

    @property
    def dim(self) -> int:
        return self.operator.shape[0]

    @property
    def levels(self) -> np.ndarray:
        """Diagonal entries (the spectrum for diagonal Hamiltonians)."""
        return np.diag(self.operator).real.copy()

    def gap(self, i: int, j: int) -> float:
        """Delta epsilon_{i,j} = epsilon_j - epsilon_i of the diagonal entries."""
        lv = self.levels
        return float(lv[j] - lv[i])


def _check_dim(d: int) -> int:
    if not isinstance(d, (int, np.integer)) or not 2 <= d <= MAX_DIM:
        raise ValueError(f"dimension must be an integer in [2, {MAX_DIM}], got {d!r}")
    return int(d)


def qubit_hamiltonian(h1: float, h3: float, h2: float, theta: float) -> BatteryHamiltonian:
    """h1|0><0| + h3|1><1| + h2 e^{-i theta}|0><1| + h2 e^{i theta}|1><0|."""
    if h2 < 0:
        raise ValueError("h2 must be nonnegative")
    op = np.array([[h1, h2 * np.exp(-1j * theta)], [h2 * np.exp(1j * theta), h3]])
    return BatteryHamiltonian(
        op, "qubit-general", dict(h1=float(h1), h3=float(h3), h2=float(h2), theta=float(theta)),
        name=f"qubit({h1:g},{h3:g},{h2:g},{theta:g})",
    )


def _jz_matrix(d: int) -> np.ndarray:
    return np.diag(2.0 / (d - 1) * (np.arange(d) - (d - 1) / 2.0)).astype(np.complex128)


def _jx_matrix(d: int) -> np.ndarray:
    return (np.eye(d, k=1) + np.eye(d, k=-1)).astype(np.complex128)


def _jy_matrix(d: int) -> np.ndarray:
    # i(|i><i-1| - |i-1><i|)
    return 1j * (np.eye(d, k=-1) - np.eye(d, k=1))


def jz(d: int) -> BatteryHamiltonian:
    """Equispaced diagonal Hamiltonian with levels from -1 to 1."""
    d = _check_dim(d)
    op = _jz_matrix(d)
    return BatteryHamiltonian(op, "diagonal", dict(epsilons=tuple(np.diag(op).real)), name="jz")


def jx(d: int) -> BatteryHamiltonian:
    """Uniform nearest-neighbour coupling sum |i><i-1| + |i-1><i|."""
    return j_offdiagonal(d, 1.0, 0.0)


def jy(d: int) -> BatteryHamiltonian:
    """i sum (|i><i-1| - |i-1><i|); equals sigma_y for d=2."""
    return j_offdiagonal(d, 0.0, 1.0)


def j_offdiagonal(d: int, alpha1: float, alpha2: float) -> BatteryHamiltonian:
    """alpha1 J_x + alpha2 J_y with alpha = |alpha1 + i alpha2| and phi its argument."""
    d = _check_dim(d)
    if alpha1 == 0 and alpha2 == 0:
        raise ValueError("alpha1 and alpha2 cannot both vanish")
    op = alpha1 * _jx_matrix(d) + alpha2 * _jy_matrix(d)
    params = dict(alpha1=float(alpha1), alpha2=float(alpha2),
                  alpha=float(np.hypot(alpha1, alpha2)), phi=float(np.arctan2(alpha2, alpha1)))
    return BatteryHamiltonian(op, "off-diagonal", params, name=f"offdiag({alpha1:g},{alpha2:g})")


def j_mixed(d: int, alpha1: float, alpha2: float, alpha3: float) -> BatteryHamiltonian:
    """alpha1 J_x + alpha2 J_y + alpha3 J_z.

    ``alpha_bar = alpha / alpha3`` is stored when alpha3 != 0 (``inf`` otherwise).
    """
    d = _check_dim(d)
    op = alpha1 * _jx_matrix(d) + alpha2 * _jy_matrix(d) + alpha3 * _jz_matrix(d)
    alpha = float(np.hypot(alpha1, alpha2))
    params = dict(alpha1=float(alpha1), alpha2=float(alpha2), alpha3=float(alpha3), alpha=alpha,
                  phi=float(np.arctan2(alpha2, alpha1)),
                  alpha_bar=alpha / alpha3 if alpha3 != 0 else float("inf"))
    if alpha == 0:
        structure = "diagonal"
    elif alpha3 == 0:
        structure = "off-diagonal"
    else:
        structure = "mixed"
    return BatteryHamiltonian(op, structure, params, name=f"mixed({alpha1:g},{alpha2:g},{alpha3:g})")


def custom_diagonal(epsilons) -> BatteryHamiltonian:
    """sum_i epsilon_i |i><i| with the levels kept in the given basis order."""
    eps = np.asarray(epsilons, dtype=float)
    if eps.ndim != 1 or eps.size < 2:
        raise ValueError("need at least two energy levels")
    if eps.size > MAX_DIM:
        raise ValueError(f"at most {MAX_DIM} levels supported")
    name = "diag(" + ",".join(f"{e:g}" for e in eps) + ")"
    return BatteryHamiltonian(np.diag(eps).astype(np.complex128), "custom-diagonal",
                              dict(epsilons=tuple(eps)), name=name)


def parse_hamiltonian(spec: str, d: int) -> BatteryHamiltonian:
    """Build a Hamiltonian from a textual spec ``kind[:p1,p2,...]``.

    Kinds: ``jz``, ``jx``, ``jy``, ``offdiag:a1,a2``, ``mixed:a1,a2,a3``,
    ``qubit:h1,h3,h2,theta`` (d must be 2) and ``diag:e1,...,ed``.
    """
    kind, _, rest = spec.strip().partition(":")
    kind = kind.strip().lower()
    try:
        vals = [float(v) for v in rest.split(",")] if rest.strip() else []
    except ValueError:
        raise ValueError(f"bad numeric parameters in Hamiltonian spec {spec!r}") from None
    arity = {"jz": 0, "jx": 0, "jy": 0, "offdiag": 2, "mixed": 3, "qubit": 4}
    if kind in arity and len(vals) != arity[kind]:
        raise ValueError(f"Hamiltonian kind {kind!r} takes {arity[kind]} parameters, got {len(vals)}")
    if kind == "jz":
        return jz(d)
    if kind == "jx":
        return jx(d)
    if kind == "jy":
        return jy(d)
    if kind == "offdiag":
        return j_offdiagonal(d, *vals)
    if kind == "mixed":
        return j_mixed(d, *vals)
    if kind == "qubit":
        if d != 2:
            raise ValueError("qubit Hamiltonian requires dimension 2")
        return qubit_hamiltonian(*vals)
    if kind == "diag":
        if len(vals) != d:
            raise ValueError(f"diag Hamiltonian needs {d} levels, got {len(vals)}")
        return custom_diagonal(vals)
    raise ValueError(f"unknown Hamiltonian kind {kind!r}")

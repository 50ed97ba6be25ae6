"""Collective spin operators on a fixed-J Dicke manifold.

States are |J, M> with M ascending from -J, so index 0 is |J, -J>.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from steady_squeeze.errors import InvalidSpinError
from steady_squeeze.utils.operator_core import CollectiveOps, HilbertBasis, Operator

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DickeLadderTable:
    """coeff_plus[k] = <J, M+1|J^+|J, M> for M = -J + k, k = 0 ... 2J-1."""

    spin: float
    coeff_plus: np.ndarray

    @classmethod
    def from_spin(cls, spin: float) -> "DickeLadderTable":
        m = cls.m_values_for(spin)[:-1]
        coeff = np.sqrt(spin * (spin + 1) - m * (m + 1))
        coeff.setflags(write=False)
        return cls(spin, coeff)

    @staticmethod
    def m_values_for(spin: float) -> np.ndarray:
        return -spin + np.arange(int(round(2 * spin)) + 1)

    @property
    def m_values(self) -> np.ndarray:
        return self.m_values_for(self.spin)

    def raising_matrix(self) -> sp.csr_matrix:
        dim = self.coeff_plus.size + 1
        return sp.diags(self.coeff_plus.astype(complex), offsets=-1, shape=(dim, dim), format="csr")


@lru_cache(maxsize=64)
def _cached_ops(n_emitters: int, spin: float) -> CollectiveOps:
    basis = HilbertBasis.dicke(n_emitters, spin)
    table = DickeLadderTable.from_spin(basis.spin)
    jplus = table.raising_matrix()
    jminus = jplus.T.tocsr()
    jz = sp.diags(table.m_values.astype(complex), format="csr")
    return CollectiveOps(
        n_emitters=n_emitters,
        jx=Operator(basis, (jplus + jminus) * 0.5, True),
        jy=Operator(basis, (jplus - jminus) * (-0.5j), True),
        jz=Operator(basis, jz, True),
        jplus=Operator(basis, jplus),
        jminus=Operator(basis, jminus),
    )


def collective_ops(n_emitters: int, spin: float | None = None) -> CollectiveOps:
    """J^x, J^y, J^z, J^+ and J^- on the (2J+1)-dimensional manifold (default J = N/2)."""
    if spin is None:
        spin = n_emitters / 2
    # HilbertBasis validates 2J and its parity against N
    return _cached_ops(int(n_emitters), float(spin))


def dicke_state(basis: HilbertBasis, m: float) -> np.ndarray:
    """Unit vector of |J, M>."""
    index = int(round(m + basis.spin))
    if not 0 <= index < basis.dimension or abs(m + basis.spin - index) > 1e-12:
        raise InvalidSpinError(f"M={m} is not a level of J={basis.spin}")
    vec = np.zeros(basis.dimension, dtype=complex)
    vec[index] = 1.0
    return vec


def dicke_xxz_energy(n_emitters: int, j_mean: float, j_z: float, spin: float, m: float) -> float:
    """E(J, M) = (J/N) J(J+1) + ((Jz - J)/N) M^2 of the all-to-all XXZ Hamiltonian."""
    if abs(m) > spin + 1e-12:
        raise InvalidSpinError(f"|M| = {abs(m)} exceeds J = {spin}")
    return (j_mean / n_emitters) * spin * (spin + 1) + ((j_z - j_mean) / n_emitters) * m**2

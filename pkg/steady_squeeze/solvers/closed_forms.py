"""Analytic first- and second-order results for the built-in models.

Two-emitter drives (XYZ, TFI) couple |N/2, -N/2> only to |N/2, -N/2+2>, so
to first order everything follows from

    F(theta) = alpha e^{2i theta} / (beta - i gamma),   xi^2 = 1 - 8 Re F / N

with beta the transition energy E_2 - E_0 and gamma the individual decay
rate. The driven Dicke model is summarized by its second-order expectation
values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from steady_squeeze.errors import ModelError, PerturbationError


@dataclass(frozen=True)
class TwoEmitterClosedForm:
    model: str
    n_emitters: int
    alpha: float
    beta: float
    gamma: float
    coupling_element: float
    alpha_rate: float

    def __post_init__(self):
        if self.beta == 0 and self.gamma == 0:
            raise PerturbationError(
                f"{self.model}: transition energy and decay rate both vanish; first-order denominator is zero"
            )

    @property
    def denominator(self) -> complex:
        return complex(self.beta, -self.gamma)

    def F(self, theta):
        """alpha e^{2i theta} / (beta - i gamma); accepts scalars or arrays."""
        return self.alpha * np.exp(2j * np.asarray(theta)) / self.denominator

    def re_f(self, theta):
        return np.real(self.F(theta))

    @property
    def theta_ex(self) -> tuple[float, float]:
        """(squeezing angle, anti-squeezing angle) in [0, pi); NaN when alpha = 0.

        Re F peaks at 2 theta = -atan2(gamma, beta) for alpha > 0 and a
        quarter turn later for alpha < 0.
        """
        if self.alpha == 0:
            return (math.nan, math.nan)
        base = -0.5 * math.atan2(self.gamma, self.beta)
        if self.alpha < 0:
            base += math.pi / 2
        best = base % math.pi
        return (best, (best + math.pi / 2) % math.pi)

    @property
    def squeezing_angle(self) -> float:
        return self.theta_ex[0]

    @property
    def re_f_extremal(self) -> float:
        return abs(self.alpha) / math.hypot(self.beta, self.gamma)

    def xi2(self, theta=None, coupling: float = 1.0):
        """First-order squeezing parameter, at the optimal angle by default."""
        if theta is None:
            return 1.0 - 8.0 * coupling * self.re_f_extremal / self.n_emitters
        return 1.0 - 8.0 * coupling * self.re_f(theta) / self.n_emitters

    @property
    def xi2_slope(self) -> float:
        """d xi^2 / d(drive strength) at zero drive for the optimal angle."""
        return -8.0 * abs(self.alpha_rate) / (self.n_emitters * math.hypot(self.beta, self.gamma))

    @property
    def zeta(self) -> float:
        """Amplitude on |N/2, -N/2+2> without the decay term in the denominator."""
        if self.beta == 0:
            return math.nan
        return -self.coupling_element / self.beta

    @property
    def zeta_dissipative(self) -> complex:
        """First-order amplitude on |N/2, -N/2+2>, -m / (beta - i gamma)."""
        return -self.coupling_element / self.denominator

    @property
    def pair_norm(self) -> float:
        return math.sqrt(2 * self.n_emitters * (self.n_emitters - 1))

    @property
    def zeta_prime(self) -> float:
        """<S_i^x S_j^x> = -<S_i^y S_j^y> predicted from zeta."""
        return self.zeta / self.pair_norm

    @property
    def zeta_prime_dissipative(self) -> float:
        return self.zeta_dissipative.real / self.pair_norm

    def as_dict(self) -> dict:
        squeeze, anti = self.theta_ex
        return {
            "model": self.model,
            "n_emitters": self.n_emitters,
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "re_f_extremal": self.re_f_extremal,
            "theta_squeeze": squeeze,
            "theta_anti": anti,
            "zeta": self.zeta,
            "zeta_prime": self.zeta_prime,
            "zeta_prime_dissipative": self.zeta_prime_dissipative,
        }


def _check_n(n_emitters: int):
    if n_emitters < 3:
        raise ModelError(f"Two-emitter closed forms need N >= 3, got N={n_emitters}")


def xyz_closed_form(
    n_emitters: int, jx: float, jy: float, jz: float, gamma: float = 1.0
) -> TwoEmitterClosedForm:
    """alpha = (N-1) dJ / 4 and beta = 2 (N-2)(J - Jz) / N."""
    _check_n(n_emitters)
    n = n_emitters
    j_mean, delta_j = 0.5 * (jx + jy), 0.5 * (jx - jy)
    return TwoEmitterClosedForm(
        model="xyz",
        n_emitters=n,
        alpha=(n - 1) * delta_j / 4,
        beta=2 * (n - 2) * (j_mean - jz) / n,
        gamma=gamma,
        coupling_element=(delta_j / 2) * math.sqrt(2 * (n - 1) / n),
        alpha_rate=(n - 1) / 4,
    )


def tfi_closed_form(n_emitters: int, jx: float, delta: float, gamma: float = 1.0) -> TwoEmitterClosedForm:
    """alpha = Jx (N-1) / 8 and beta = 2 Delta."""
    _check_n(n_emitters)
    n = n_emitters
    return TwoEmitterClosedForm(
        model="tfi",
        n_emitters=n,
        alpha=jx * (n - 1) / 8,
        beta=2 * delta,
        gamma=gamma,
        coupling_element=(jx / 4) * math.sqrt(2 * (n - 1) / n),
        alpha_rate=(n - 1) / 8,
    )


DICKE_OBSERVABLES = (
    "Jx", "Jy", "Jz", "Jz_mean_squared", "Jx2", "Jy2", "Jz2",
    "JxJy_sym", "JxJz_sym", "JyJz_sym", "Jphi_perp2",
)


def dicke_observables(n_emitters: int, omega: float, big_gamma: float) -> dict[str, float]:
    """Second-order expectation values of the driven Dicke steady state.

    ``*_sym`` entries are anticommutators <AB + BA>; ``Jphi_perp2`` is the
    second moment of the in-plane component orthogonal to the mean spin.
    """
    n = n_emitters
    r = omega / big_gamma
    r2 = r * r
    return {
        "Jx": 0.0,
        "Jy": -r * n,
        "Jz": -n / 2 + r2 * n,
        "Jz_mean_squared": n**2 / 4 - r2 * n**2,
        "Jx2": n / 4 - r2 * n / 2,
        "Jy2": n / 4 + 0.5 * r2 * n * (2 * n - 1),
        "Jz2": n**2 / 4 - r2 * n * (n - 1),
        "JxJy_sym": 0.0,
        "JxJz_sym": 0.0,
        "JyJz_sym": r * n * (n - 1),
        "Jphi_perp2": n / 4 + n * r2 / 2,
    }


def dicke_perturbed_amplitudes(n_emitters: int, omega: float, big_gamma: float) -> dict[float, complex]:
    """Amplitudes of the second-order state on M = -N/2, -N/2+1, -N/2+2."""
    n = n_emitters
    r = omega / big_gamma
    low = -n / 2
    amplitudes = {
        low: complex(1 - n * r * r / 2),
        low + 1: 1j * r * math.sqrt(n),
    }
    if n >= 2:
        amplitudes[low + 2] = complex(-(r * r) * n**2 / math.sqrt(2 * n * (n - 1)))
    return amplitudes


def dicke_spin_angle(n_emitters: int, omega: float, big_gamma: float) -> tuple[float, float]:
    """(cos phi, sin phi) of the mean spin (0, cos phi, sin phi), to second order."""
    r = omega / big_gamma
    return (-2 * r, -(1 - 2 * r * r))


def dicke_xi2(omega: float, big_gamma: float, theta) -> np.ndarray | float:
    """1 + 2 (Omega/Gamma)^2 (sin^2 theta - cos^2 theta)."""
    r2 = (omega / big_gamma) ** 2
    theta = np.asarray(theta, dtype=float)
    value = 1 + 2 * r2 * (np.sin(theta) ** 2 - np.cos(theta) ** 2)
    return float(value) if value.ndim == 0 else value

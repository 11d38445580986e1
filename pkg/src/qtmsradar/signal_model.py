"""Covariance models for the two-mode noise (TMN) and two-mode squeezed
vacuum (TMSV) radars.

Both models produce a zero-mean Gaussian vector ``x = [I1, Q1, I2, Q2]``
whose 4x4 covariance has the block form::

    [[ s1^2 I      R12  ],
     [ R12^T     s2^2 I ]],   R12 = rho*s1*s2 * [[cos p,  sin p],
                                                  [sin p, -cos p]]

The TMN parameters are the source noise power, per-channel added noise and
gains; the TMSV parameters are the squeezing magnitude ``r`` and phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

__all__ = [
    "InvalidParamsError",
    "PhaseNonzeroError",
    "TmnParams",
    "TmsvParams",
    "Covariance4",
    "PhysicalReport",
    "squeeze_coefficients",
    "tmn_covariance",
    "tmsv_covariance",
    "block_covariance",
    "squeezed_variances",
    "entanglement_witness",
    "validate_physical",
]

SYMMETRY_RTOL = 1e-12
PSD_TOL = 1e-10


class InvalidParamsError(ValueError):
    pass


class PhaseNonzeroError(ValueError):
    pass


def squeeze_coefficients(r: float) -> tuple[float, float]:
    """Return ``(cosh 2r, sinh 2r)`` built from ``expm1`` to avoid cancellation."""
    em = math.expm1(2.0 * r)
    ep = em + 1.0
    s = em * (em + 2.0) / (2.0 * ep)
    c = 1.0 + em * em / (2.0 * ep)
    return c, s


@dataclass(frozen=True)
class TmnParams:
    """Generative parameters of the classical two-mode noise radar.

    Attributes
    ----------
    sigma_sq : float
        Variance of each quadrature of the source Gaussian noise.
    noise1_sq, noise2_sq : float
        Added-noise variance per quadrature on channels 1 and 2.
    gain1, gain2 : float
        Amplitude factors (amplifier gains times all losses).
    phase : float
        Inter-channel phase in radians.
    """

    sigma_sq: float
    noise1_sq: float = 0.0
    noise2_sq: float = 0.0
    gain1: float = 1.0
    gain2: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        vals = (self.sigma_sq, self.noise1_sq, self.noise2_sq, self.gain1, self.gain2, self.phase)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParamsError(f"non-finite TMN parameter in {self!r}")
        if self.sigma_sq < 0 or self.noise1_sq < 0 or self.noise2_sq < 0:
            raise InvalidParamsError("variances must be non-negative")
        if self.gain1 <= 0 or self.gain2 <= 0:
            raise InvalidParamsError("gains must be positive")
        if self.sigma_sq + self.noise1_sq == 0 or self.sigma_sq + self.noise2_sq == 0:
            raise InvalidParamsError("a channel with zero total power has no defined correlation")

    @property
    def sigma1_sq(self) -> float:
        return self.gain1**2 * (self.sigma_sq + self.noise1_sq)

    @property
    def sigma2_sq(self) -> float:
        return self.gain2**2 * (self.sigma_sq + self.noise2_sq)

    @property
    def rho(self) -> float:
        """Pearson correlation between the channels."""
        if self.sigma_sq == 0:
            return 0.0
        return 1.0 / math.sqrt(
            (1.0 + self.noise1_sq / self.sigma_sq) * (1.0 + self.noise2_sq / self.sigma_sq)
        )


@dataclass(frozen=True)
class TmsvParams:
    """Squeezing magnitude/phase plus diagonal post-source noise (vacuum units)."""

    squeeze_r: float
    phase: float = 0.0
    extra_noise1_sq: float = 0.0
    extra_noise2_sq: float = 0.0

    def __post_init__(self):
        vals = (self.squeeze_r, self.phase, self.extra_noise1_sq, self.extra_noise2_sq)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParamsError(f"non-finite TMSV parameter in {self!r}")
        if self.squeeze_r < 0:
            raise InvalidParamsError("squeeze_r must be non-negative")
        if self.extra_noise1_sq < 0 or self.extra_noise2_sq < 0:
            raise InvalidParamsError("extra noise must be non-negative")

    @property
    def cosh2r(self) -> float:
        return squeeze_coefficients(self.squeeze_r)[0]

    @property
    def sinh2r(self) -> float:
        return squeeze_coefficients(self.squeeze_r)[1]

    @property
    def rho(self) -> float:
        """Correlation coefficient after the extra noise is added."""
        c, s = squeeze_coefficients(self.squeeze_r)
        return s / math.sqrt((c + self.extra_noise1_sq) * (c + self.extra_noise2_sq))


@dataclass(frozen=True, eq=False)
class Covariance4:
    """Symmetric 4x4 covariance over ``(I1, Q1, I2, Q2)``."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("covariance has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.T)) > SYMMETRY_RTOL * scale:
            raise ValueError("covariance is not symmetric")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __eq__(self, other):
        if not isinstance(other, Covariance4):
            return NotImplemented
        return bool(np.array_equal(self.matrix, other.matrix))

    def __repr__(self):
        return f"Covariance4({self.matrix.tolist()!r})"

    @property
    def r11(self) -> np.ndarray:
        return self.matrix[:2, :2]

    @property
    def r12(self) -> np.ndarray:
        return self.matrix[:2, 2:]

    @property
    def r21(self) -> np.ndarray:
        return self.matrix[2:, :2]

    @property
    def r22(self) -> np.ndarray:
        return self.matrix[2:, 2:]

    @property
    def sigma1(self) -> float:
        """RMS quadrature amplitude of channel 1."""
        return math.sqrt(0.5 * (self.matrix[0, 0] + self.matrix[1, 1]))

    @property
    def sigma2(self) -> float:
        return math.sqrt(0.5 * (self.matrix[2, 2] + self.matrix[3, 3]))

    @property
    def rho(self) -> float:
        """Magnitude of the cross-channel correlation, ``|R12| / (sqrt(2) s1 s2)``."""
        s = self.sigma1 * self.sigma2
        if s == 0:
            return 0.0
        return float(np.sqrt(np.sum(self.r12**2) / 2.0)) / s

    def with_cross_block(self, r12: np.ndarray) -> Covariance4:
        m = np.array(self.matrix)
        m[:2, 2:] = r12
        m[2:, :2] = np.asarray(r12).T
        return Covariance4(m)

    def to_text(self) -> str:
        """Row-major, whitespace separated, 17 significant digits."""
        return "".join(" ".join(f"{v:.17g}" for v in row) + "\n" for row in self.matrix)

    @classmethod
    def from_text(cls, text: str) -> Covariance4:
        rows = [line.split() for line in text.splitlines() if line.strip()]
        if len(rows) != 4 or any(len(r) != 4 for r in rows):
            raise ValueError("expected 4 rows of 4 numbers")
        return cls(np.array([[float(v) for v in r] for r in rows]))


def block_covariance(var1: float, var2: float, cross: float, phase: float) -> Covariance4:
    """Assemble the common TMN/TMSV block matrix.

    ``cross`` is the correlated amplitude ``rho*s1*s2`` (or ``sinh 2r``).
    """
    c = cross * math.cos(phase)
    s = cross * math.sin(phase)
    return Covariance4(
        np.array(
            [
                [var1, 0.0, c, s],
                [0.0, var1, s, -c],
                [c, s, var2, 0.0],
                [s, -c, 0.0, var2],
            ]
        )
    )


def tmn_covariance(params: TmnParams) -> Covariance4:
    """Covariance of the classical TMN radar quadratures."""
    v1 = params.sigma1_sq
    v2 = params.sigma2_sq
    return block_covariance(v1, v2, params.rho * math.sqrt(v1 * v2), params.phase)


def tmsv_covariance(params: TmsvParams) -> Covariance4:
    """Covariance of TMSV quadratures, with extra noise added on the diagonal."""
    c, s = squeeze_coefficients(params.squeeze_r)
    return block_covariance(
        c + params.extra_noise1_sq, c + params.extra_noise2_sq, s, params.phase
    )


def squeezed_variances(params: TmsvParams) -> tuple[float, float]:
    """Variances of ``(I1 - I2)/sqrt 2`` and ``(I1 + I2)/sqrt 2``.

    Evaluated as quadratic forms on the covariance matrix. Requires zero
    phase and no extra noise.
    """
    if params.phase != 0.0:
        raise PhaseNonzeroError("rotate to zero phase before computing squeezed variances")
    if params.extra_noise1_sq or params.extra_noise2_sq:
        raise InvalidParamsError("squeezed variances are defined for the noiseless state")
    m = tmsv_covariance(params).matrix
    minus = np.array([1.0, 0.0, -1.0, 0.0])
    plus = np.array([1.0, 0.0, 1.0, 0.0])
    return float(minus @ m @ minus) / 2.0, float(plus @ m @ plus) / 2.0


def entanglement_witness(cov: Covariance4) -> float:
    """Determinant of the cross block ``R12``; negative for TMSV and ideal TMN."""
    r = cov.r12
    return float(r[0, 0] * r[1, 1] - r[0, 1] * r[1, 0])


@dataclass
class PhysicalReport:
    symmetric: bool
    psd: bool
    min_eigenvalue: float
    mode_uncertainty: tuple[bool, bool] | None = None
    min_symplectic_eigenvalue: float | None = None
    joint_uncertainty: bool | None = None

    @property
    def ok(self) -> bool:
        checks = [self.symmetric, self.psd]
        if self.mode_uncertainty is not None:
            checks.extend(self.mode_uncertainty)
        if self.joint_uncertainty is not None:
            checks.append(self.joint_uncertainty)
        return all(checks)

    def failures(self) -> list[str]:
        out = []
        if not self.symmetric:
            out.append("symmetric")
        if not self.psd:
            out.append("psd")
        if self.mode_uncertainty is not None:
            for k, good in enumerate(self.mode_uncertainty, start=1):
                if not good:
                    out.append(f"uncertainty_mode{k}")
        if self.joint_uncertainty is False:
            out.append("uncertainty_joint")
        return out


_OMEGA = np.array(
    [[0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]]
)


def validate_physical(
    cov: Covariance4 | np.ndarray, units: Literal["volts", "vacuum"] = "volts"
) -> PhysicalReport:
    """Check symmetry and positive semidefiniteness of a covariance.

    In ``"vacuum"`` units two quantum checks are added: the per-mode product
    ``var(I) * var(Q) >= 1/4`` and the joint condition that every symplectic
    eigenvalue is at least 1/2. The joint check is what rejects the perfectly
    correlated (rho = 1) TMN matrix.
    """
    if units not in ("volts", "vacuum"):
        raise ValueError(f"unknown units {units!r}")
    m = np.asarray(cov.matrix if isinstance(cov, Covariance4) else cov, dtype=float)
    scale = max(1.0, float(np.max(np.abs(m))))
    symmetric = bool(np.max(np.abs(m - m.T)) <= SYMMETRY_RTOL * scale)
    eig = np.linalg.eigvalsh(0.5 * (m + m.T))
    lam_min = float(eig[0])
    report = PhysicalReport(symmetric=symmetric, psd=lam_min >= -PSD_TOL * scale, min_eigenvalue=lam_min)
    if units == "vacuum":
        tol = 1e-12
        report.mode_uncertainty = (
            bool(m[0, 0] * m[1, 1] >= 0.25 - tol),
            bool(m[2, 2] * m[3, 3] >= 0.25 - tol),
        )
        # symplectic eigenvalues are the moduli of the eigenvalues of i*Omega*V
        sym = np.abs(np.linalg.eigvals(1j * _OMEGA @ m))
        nu_min = float(np.min(sym))
        report.min_symplectic_eigenvalue = nu_min
        report.joint_uncertainty = bool(nu_min >= 0.5 - 1e-9 * scale)
    return report

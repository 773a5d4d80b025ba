"""
Closed-form sideband observables for a squeezed-vacuum perturbation mixed
with two neighbouring harmonic fields.

The interaction exponent is the anti-Hermitian two-mode generator
``K = g a0 asb^+ + f a0^+ asb^+ - h.c.`` with sum-frequency coupling
``g = gamma_t * eps1`` and difference-frequency coupling
``f = gamma_t * eps2``.  All observables of the sideband mode follow from
the Bogoliubov transform of the sideband annihilation operator,

    S^+ asb S = asb cosh(N) + (g* a0^+ + f* a0) sinh(N)/N,

with N^2 = |f|^2 - |g|^2 continued to the trigonometric branch when the
sum-frequency channel dominates (N^2 < 0).  Quadratures are normalised so
the vacuum has unit variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# series fallback window for sinh(N)/N and cosh(N) around N^2 = 0
_TAYLOR_WINDOW = 1e-12


def _canonical_angle(phi: float) -> float:
    """Map an angle to the (-pi, pi] interval."""
    out = math.remainder(phi, math.tau)
    if out <= -math.pi:
        out += math.tau
    return out


@dataclass(frozen=True)
class SqueezeParams:
    """Squeezed-vacuum perturbation: magnitude r >= 0 and phase phi."""

    r: float
    phi: float = 0.0

    def __post_init__(self) -> None:
        if not self.r >= 0.0:
            raise ValueError(f"squeezing magnitude must be >= 0, got {self.r}")
        object.__setattr__(self, "phi", _canonical_angle(float(self.phi)))

    @property
    def sinh_r(self) -> float:
        return math.sinh(self.r)

    @property
    def cosh_r(self) -> float:
        return math.cosh(self.r)

    @property
    def mean_photons(self) -> float:
        return math.sinh(self.r) ** 2


@dataclass(frozen=True)
class HarmonicField:
    """Classical harmonic amplitude |eps| with spectral phase theta."""

    amp: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        if not self.amp >= 0.0:
            raise ValueError(f"harmonic amplitude must be >= 0, got {self.amp}")

    @property
    def value(self) -> complex:
        return self.amp * complex(math.cos(self.theta), math.sin(self.theta))


@dataclass(frozen=True)
class ModelParams:
    """Full input of the analytic model."""

    squeeze: SqueezeParams
    eps1: HarmonicField
    eps2: HarmonicField
    gamma_t: float

    def __post_init__(self) -> None:
        if not self.gamma_t > 0.0:
            raise ValueError(f"coupling gamma_t must be > 0, got {self.gamma_t}")

    @classmethod
    def from_values(
        cls,
        r: float,
        phi: float = 0.0,
        amp1: float = 1.0,
        theta1: float = 0.0,
        amp2: float = 1.0,
        theta2: float = 0.0,
        gamma_t: float = 0.1,
    ) -> "ModelParams":
        return cls(
            squeeze=SqueezeParams(r=r, phi=phi),
            eps1=HarmonicField(amp=amp1, theta=theta1),
            eps2=HarmonicField(amp=amp2, theta=theta2),
            gamma_t=gamma_t,
        )


@dataclass(frozen=True)
class CouplingSet:
    """Derived couplings and the hyperbolic factors of the Bogoliubov map."""

    g: complex
    f: complex
    n_sq: float
    cosh_n: float
    sinhc_n: float
    m_sq: float


@dataclass(frozen=True)
class SidebandObservables:
    """Second moments of the sideband mode (vacuum variance = 1)."""

    mean_n: float
    var_x: float
    var_p: float
    a_sq: complex

    @property
    def a_dag_sq(self) -> complex:
        return self.a_sq.conjugate()

    @property
    def cov_xp(self) -> float:
        """Symmetrised X-P covariance; zero only when a_sq is real."""
        return 2.0 * self.a_sq.imag

    @property
    def var_min(self) -> float:
        """Smaller principal variance of the covariance ellipse."""
        return 1.0 + 2.0 * self.mean_n - 2.0 * abs(self.a_sq)

    @property
    def var_max(self) -> float:
        """Larger principal variance of the covariance ellipse."""
        return 1.0 + 2.0 * self.mean_n + 2.0 * abs(self.a_sq)


def hyperbolic_factors(n_sq):
    """cosh(N) and sinh(N)/N for N^2 = n_sq, on either branch.

    n_sq < 0 switches to cos / sinc (beam-splitter-dominant regime);
    |n_sq| below the Taylor window uses the series to avoid 0/0.
    Accepts scalars or arrays.
    """
    x = np.asarray(n_sq, dtype=float)
    small = np.abs(x) < _TAYLOR_WINDOW
    root = np.sqrt(np.abs(np.where(small, 1.0, x)))
    pos = x > 0.0
    cosh_n = np.where(pos, np.cosh(root), np.cos(root))
    sinhc_n = np.where(pos, np.sinh(root), np.sin(root)) / root
    cosh_series = 1.0 + x * (0.5 + x * (1.0 / 24.0 + x / 720.0))
    sinhc_series = 1.0 + x * (1.0 / 6.0 + x * (1.0 / 120.0 + x / 5040.0))
    cosh_n = np.where(small, cosh_series, cosh_n)
    sinhc_n = np.where(small, sinhc_series, sinhc_n)
    return cosh_n, sinhc_n


def coupling_fields(amp1, theta1, amp2, theta2, gamma_t):
    """Vectorised g, f and hyperbolic factors; returns a dict of arrays."""
    g = gamma_t * amp1 * np.exp(1j * np.asarray(theta1, dtype=float))
    f = gamma_t * amp2 * np.exp(1j * np.asarray(theta2, dtype=float))
    n_sq = np.abs(f) ** 2 - np.abs(g) ** 2
    cosh_n, sinhc_n = hyperbolic_factors(n_sq)
    return {
        "g": g,
        "f": f,
        "n_sq": n_sq,
        "cosh_n": cosh_n,
        "sinhc_n": sinhc_n,
        "m_sq": sinhc_n**2,
    }


def observable_fields(r, phi, amp1, theta1, amp2, theta2, gamma_t):
    """Vectorised sideband observables over broadcastable parameter arrays.

    Returns (mean_n, var_x, var_p, a_sq).  This is the single evaluation
    path: the scalar API and the phase-map scans both call it, so grids are
    guaranteed to equal pointwise evaluations.
    """
    cf = coupling_fields(amp1, theta1, amp2, theta2, gamma_t)
    g, f, m_sq = cf["g"], cf["f"], cf["m_sq"]
    s = np.sinh(np.asarray(r, dtype=float))
    c = np.cosh(np.asarray(r, dtype=float))
    e_iphi = np.exp(1j * np.asarray(phi, dtype=float))

    amp = f * c - g * e_iphi * s
    mean_n = m_sq * np.abs(amp) ** 2
    a_sq = m_sq * (f * g * (s * s + c * c) - (f * f / e_iphi + g * g * e_iphi) * s * c)
    var_x = 1.0 + 2.0 * mean_n + 2.0 * a_sq.real
    var_p = 1.0 + 2.0 * mean_n - 2.0 * a_sq.real
    return mean_n, var_x, var_p, a_sq


def _unpack(params: ModelParams):
    return (
        params.squeeze.r,
        params.squeeze.phi,
        params.eps1.amp,
        params.eps1.theta,
        params.eps2.amp,
        params.eps2.theta,
        params.gamma_t,
    )


def derive_couplings(params: ModelParams) -> CouplingSet:
    """Couplings g, f and the analytically continued hyperbolic factors."""
    r, phi, a1, t1, a2, t2, gt = _unpack(params)
    cf = coupling_fields(a1, t1, a2, t2, gt)
    return CouplingSet(
        g=complex(cf["g"]),
        f=complex(cf["f"]),
        n_sq=float(cf["n_sq"]),
        cosh_n=float(cf["cosh_n"]),
        sinhc_n=float(cf["sinhc_n"]),
        m_sq=float(cf["m_sq"]),
    )


def sideband_moments(params: ModelParams) -> tuple[complex, complex, float]:
    """(<a^2>, <a^+2>, <n>) of the sideband mode; <a^+2> = conj(<a^2>)."""
    mean_n, _, _, a_sq = observable_fields(*_unpack(params))
    a_sq = complex(a_sq)
    return a_sq, a_sq.conjugate(), float(mean_n)


def sideband_mean_photons(params: ModelParams) -> float:
    """Mean sideband photon number <n>."""
    return sideband_moments(params)[2]


def quadrature_variances(params: ModelParams) -> tuple[float, float]:
    """(var_x, var_p) of the fixed X = a+a^+ and P = -i(a-a^+) quadratures."""
    _, var_x, var_p, _ = observable_fields(*_unpack(params))
    return float(var_x), float(var_p)


def observables(params: ModelParams) -> SidebandObservables:
    """All second-moment observables of the sideband mode."""
    mean_n, var_x, var_p, a_sq = observable_fields(*_unpack(params))
    return SidebandObservables(
        mean_n=float(mean_n),
        var_x=float(var_x),
        var_p=float(var_p),
        a_sq=complex(a_sq),
    )


def conversion_efficiency(params: ModelParams) -> float:
    """Sideband photons per perturbation photon, <n_sb> / sinh^2 r."""
    if params.squeeze.r == 0.0:
        raise ValueError("conversion efficiency is undefined at r = 0")
    return sideband_mean_photons(params) / params.squeeze.mean_photons

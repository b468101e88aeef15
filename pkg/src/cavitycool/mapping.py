"""Mapping of raw experimental configurations onto the two-oscillator model.

Two setups are supported:

* a ring cavity whose two counter-propagating driven modes form the optical
  lattice themselves (the symmetric standing-wave mode is macroscopically
  occupied, the antisymmetric one provides the cooling channel), and
* a standing-wave cavity used only for cooling, with the lattice produced by
  a separate pair of external laser beams.

Both reduce, after adiabatic elimination of the internal excited states, to
the same abstract parameters (nu, nu_c, g_eff, kappa).  The Lamb-Dicke
parameter is defined as eta = sqrt(k^2 / (2 m nu)) for both setups (the
dimensionally consistent form).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

from .model import ModelParams

__all__ = [
    "InvalidRegime",
    "RingCavityConfig",
    "StandingWaveConfig",
    "DerivedLattice",
    "steady_cavity_amplitude",
    "ring_model_params",
    "standing_model_params",
    "n_qubit_params",
]


class InvalidRegime(ValueError):
    """The configuration leaves the validity domain of the harmonic model."""


@dataclass(frozen=True)
class RingCavityConfig:
    """Ring-cavity setup: the driven cavity provides both lattice and cooling.

    Attributes
    ----------
    g : float
        Single-photon Rabi frequency.
    delta : float
        Laser-atom detuning (nonzero; the trap frequency is real for
        delta > 0 with the positive-root convention used here).
    delta_c : float
        Laser-cavity detuning.
    kappa : float
        Cavity photon loss rate, > 0.
    k : float
        Laser wavevector, > 0.
    m : float
        Atomic mass, > 0.
    beta_in : complex
        Coherent drive amplitude (symmetric driving of both running-wave
        modes).
    """

    g: float
    delta: float
    delta_c: float
    kappa: float
    k: float
    m: float
    beta_in: complex

    def __post_init__(self):
        if self.delta == 0:
            raise ValueError("delta must be nonzero")
        if self.m <= 0 or self.k <= 0:
            raise ValueError("m and k must be positive")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")


@dataclass(frozen=True)
class StandingWaveConfig:
    """Standing-wave-cavity setup: external lasers trap, the cavity cools.

    ``omega`` is the classical Rabi frequency of the lattice lasers, ``k``
    and ``k_c`` the wavevectors of the lattice laser and the cavity mode.
    """

    g: float
    omega: float
    delta: float
    delta_c: float
    kappa: float
    k: float
    k_c: float
    m: float

    def __post_init__(self):
        if self.delta == 0:
            raise ValueError("delta must be nonzero")
        if self.m <= 0 or self.k <= 0 or self.k_c <= 0:
            raise ValueError("m, k and k_c must be positive")


@dataclass(frozen=True)
class DerivedLattice:
    """Derived lattice quantities: depth, Lamb-Dicke parameter, steady amplitude.

    ``alpha`` is the real intracavity amplitude |alpha| in the ring setup and
    zero in the standing-wave setup (its cooling mode starts empty).
    """

    v0: float
    eta: float
    alpha: float


def steady_cavity_amplitude(config: RingCavityConfig) -> complex:
    """Steady coherent amplitude of the driven symmetric cavity mode.

    alpha = sqrt(2 kappa) beta_in / (-i delta_c + kappa/2); the undriven
    antisymmetric mode settles to zero.  The denominator cannot vanish for
    kappa > 0.
    """
    return (
        math.sqrt(2 * config.kappa)
        * complex(config.beta_in)
        / (-1j * config.delta_c + config.kappa / 2)
    )


def _lamb_dicke(k: float, m: float, nu: float) -> float:
    return math.sqrt(k**2 / (2 * m * nu))


_HARMONIC_ETA_WARN = 0.35  # ground-state kinetic energy ~ eta^2 * V0


def ring_model_params(config: RingCavityConfig, g_eff_override=None):
    """Model parameters and lattice quantities for the ring-cavity setup.

    The lattice depth is V0 = 2 g^2 alpha^2 / |delta| and each well is
    harmonic with nu = 2 g alpha k / sqrt(m delta) (equivalently
    nu = k sqrt(2 V0 / m)).  The effective phonon-photon coupling uses the
    canonical parse g_eff = nu / (2 alpha eta); pass ``g_eff_override`` as a
    callable (nu, alpha, eta, config) -> float to substitute another reading
    without touching library code.

    Raises
    ------
    InvalidRegime
        If the trap-frequency radicand is non-positive (m delta <= 0), or if
        the coupling/drive vanishes so no lattice forms.
    """
    if config.m * config.delta <= 0:
        raise InvalidRegime(
            "trap frequency not real: need m * delta > 0 (blue detuning convention)"
        )
    alpha = abs(steady_cavity_amplitude(config))
    if config.g == 0 or alpha == 0:
        raise InvalidRegime("no lattice: g = 0 or undriven cavity (alpha = 0)")

    nu = 2 * config.g * alpha * config.k / math.sqrt(config.m * config.delta)
    if nu <= 0:
        raise InvalidRegime(f"non-positive trap frequency nu = {nu}")
    v0 = 2 * config.g**2 * alpha**2 / abs(config.delta)
    eta = _lamb_dicke(config.k, config.m, nu)
    if eta > _HARMONIC_ETA_WARN:
        # <p^2>/2m ~ eta^2 V0: harmonic expansion of the wells is marginal
        warnings.warn(
            f"Lamb-Dicke parameter eta = {eta:.3f}: harmonic (deep-lattice) "
            "approximation is questionable",
            UserWarning,
        )
    if g_eff_override is not None:
        g_eff = float(g_eff_override(nu, alpha, eta, config))
    else:
        g_eff = nu / (2 * alpha * eta)
    nu_c = -config.delta_c + 2 * config.g**2 / config.delta
    params = ModelParams(nu=nu, nu_c=nu_c, g_eff=g_eff, kappa=config.kappa)
    return params, DerivedLattice(v0=v0, eta=eta, alpha=alpha)


def standing_model_params(config: StandingWaveConfig):
    """Model parameters and lattice quantities for the standing-wave setup.

    nu and eta are mutually dependent (nu = omega^2 eta^2 / delta with
    eta = sqrt(k^2 / 2 m nu)); eliminating eta gives the closed form
    nu = omega k / sqrt(2 m delta), which is verified self-consistent to
    1e-12 before returning.
    """
    if config.omega == 0:
        raise InvalidRegime("no lattice: omega = 0")
    if config.m * config.delta <= 0:
        raise InvalidRegime("need m * delta > 0 for a real trap frequency")

    nu = abs(config.omega) * config.k / math.sqrt(2 * config.m * config.delta)
    if nu <= 0:
        raise InvalidRegime(f"non-positive trap frequency nu = {nu}")
    eta = _lamb_dicke(config.k, config.m, nu)
    # fixed-point verification of the eliminated pair (nu, eta)
    nu_check = config.omega**2 * eta**2 / config.delta
    if abs(nu_check - nu) > 1e-12 * nu:
        raise InvalidRegime(
            f"(nu, eta) self-consistency failed: nu = {nu}, recomputed {nu_check}"
        )
    if eta > _HARMONIC_ETA_WARN:
        warnings.warn(
            f"Lamb-Dicke parameter eta = {eta:.3f}: harmonic (deep-lattice) "
            "approximation is questionable",
            UserWarning,
        )
    g_eff = config.g * config.omega * eta / (2 * config.delta)
    nu_c = -config.delta_c + config.g**2 / config.delta
    v0 = config.omega**2 / (4 * config.delta)
    params = ModelParams(nu=nu, nu_c=nu_c, g_eff=g_eff, kappa=config.kappa)
    return params, DerivedLattice(v0=v0, eta=eta, alpha=0.0)


def n_qubit_params(params: ModelParams, config_shift: float, n: int) -> ModelParams:
    """Collective center-of-mass parameters for n identical qubits.

    The center-of-mass mode couples with the collectively enhanced strength
    sqrt(n) g_eff, and the dispersive shift of the cavity frequency grows
    linearly with atom number: nu_c(n) = nu_c(1) + (n - 1) * config_shift,
    where ``config_shift`` is the single-particle shift (2 g^2 / delta in the
    ring setup, g^2 / delta in the standing-wave setup).
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n}")
    n = int(n)
    return ModelParams(
        nu=params.nu,
        nu_c=params.nu_c + (n - 1) * config_shift,
        g_eff=math.sqrt(n) * params.g_eff,
        kappa=params.kappa,
    )

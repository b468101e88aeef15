"""Steady state, decay spectrum, cooling time and limit estimates.

The motional energy E_atom(t) = nu <c+c>_t of the damped coupled-oscillator
model relaxes as a sum of exponentials

    E_atom(t) = sum_k c_k exp(lambda_k t) + E_0,

where the lambda_k are eigenvalues of the linear part of the moment system
and E_0 is the steady-state energy.  1/min|Re lambda_k| is an upper bound
for the cooling time.

The closed-form steady energy of the full (non-RWA) system is

    E_0 = g^2/(2 nu) + (kappa^2 + 4 (nu - nu_c)^2) / (16 nu_c)
          + 8 g^4 nu_c / (nu [kappa^2 nu + 4 nu_c (nu nu_c - 4 g^2)])

which this module cross-certifies against the numeric fixed point of the
moment equations.  Two analytic limits are exposed for orientation:
the unresolved-sideband ("Doppler") estimates tau ~ kappa/(4 g^2),
k_B T ~ kappa/4, and the resolved-sideband estimates tau ~ 2/kappa,
k_B T ~ g^2/(2 nu).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .model import ModelParams, MomentState, VACUUM, atom_energy
from .dynamics import (
    MODE_NONRWA,
    MODE_RWA,
    _normalize_mode,
    expand_state,
    moment_system,
    reduce_state,
    rwa_matrix,
)

__all__ = [
    "UnstableSystem",
    "DegenerateDenominator",
    "SingularSystem",
    "SpectralDecomposition",
    "stability_margin",
    "steady_state_energy",
    "numeric_steady_state",
    "spectral_decomposition",
    "cooling_time",
    "LimitEstimates",
    "limit_estimates",
    "classify_regime",
    "fit_decay_rate",
]

# eigenvalue real parts above this count as unstable; exactly marginal modes
# (free phonon evolution at g_eff = 0) sit at Re = 0 and are tolerated
STABILITY_TOL = 1e-12


class UnstableSystem(RuntimeError):
    """The moment system has an eigenvalue with non-negative real part."""


class DegenerateDenominator(ZeroDivisionError):
    """A denominator of the closed-form steady energy vanishes."""


class SingularSystem(RuntimeError):
    """The linear part of the moment system is singular."""


def _linear_part(params: ModelParams, mode: str) -> np.ndarray:
    mode = _normalize_mode(mode)
    if mode == MODE_RWA:
        return rwa_matrix(params)
    return moment_system(params, MODE_NONRWA)[0]


def stability_margin(params: ModelParams, mode: str = MODE_NONRWA) -> float:
    """max Re lambda over the moment spectrum (negative means stable)."""
    return float(np.max(np.linalg.eigvals(_linear_part(params, mode)).real))


def _check_stable(params: ModelParams, mode: str = MODE_NONRWA) -> None:
    margin = stability_margin(params, mode)
    if margin > STABILITY_TOL:
        raise UnstableSystem(
            f"moment system unstable: max Re(lambda) = {margin:.3e} for {params}"
        )


def steady_state_energy(params: ModelParams) -> float:
    """Closed-form steady-state motional energy E_0 (= k_B T_f, hbar = 1).

    Evaluated from the printed three-term expression; certified against the
    exact affine fixed point by :func:`numeric_steady_state`.

    Raises
    ------
    DegenerateDenominator
        If nu_c = 0 or the third-term denominator vanishes.
    UnstableSystem
        If the full moment system is not asymptotically stable (checked for
        g_eff > 0; the decoupled g_eff = 0 case is marginal and the formula
        value is returned as the limit).
    """
    nu, nu_c, g, kappa = params.nu, params.nu_c, params.g_eff, params.kappa
    if nu_c == 0:
        raise DegenerateDenominator("nu_c = 0 in steady-state formula")
    denom = kappa**2 * nu + 4 * nu_c * (-4 * g**2 + nu * nu_c)
    if denom == 0:
        raise DegenerateDenominator(
            "kappa^2 nu + 4 nu_c (nu nu_c - 4 g^2) = 0; steady formula degenerate"
        )
    if g > 0:
        _check_stable(params, MODE_NONRWA)
    return (
        g**2 / (2 * nu)
        + (kappa**2 + 4 * (nu - nu_c) ** 2) / (16 * nu_c)
        + 8 * g**4 * nu_c / (nu * denom)
    )


def numeric_steady_state(params: ModelParams) -> MomentState:
    """Exact fixed point of the affine moment system (A y = -b).

    For g_eff = 0 the linear part is singular (the phonon sector is
    decoupled and undamped); the vacuum is returned as the natural limit.
    """
    if params.g_eff == 0:
        return VACUUM
    A, b = moment_system(params, MODE_NONRWA)
    try:
        y = np.linalg.solve(A, -b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"singular moment system for {params}") from exc
    residual = np.max(np.abs(A @ y + b))
    if residual > 1e-8 * max(1.0, float(np.max(np.abs(y)))):
        raise SingularSystem(f"ill-conditioned moment system (residual {residual:.2e})")
    return reduce_state(y)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Modal expansion E_atom(t) = sum_k c_k exp(lambda_k t) + e0.

    ``robust`` is set when the eigenvector basis was too ill-conditioned to
    trust the modal coefficients; :meth:`reconstruct` then falls back to
    dense matrix-exponential propagation of the same linear system.
    """

    lambdas: np.ndarray
    coeffs: np.ndarray
    e0: float
    mode: str
    robust: bool = False
    _A: np.ndarray = field(repr=False, default=None)
    _dy0: np.ndarray = field(repr=False, default=None)
    _nu: float = field(repr=False, default=1.0)

    def reconstruct(self, t) -> np.ndarray:
        """E_atom at times ``t`` from the modal sum (or robust fallback)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if not self.robust:
            vals = (self.coeffs[None, :] * np.exp(np.outer(t, self.lambdas))).sum(axis=1)
            return self.e0 + vals.real
        out = np.empty(len(t))
        for i, ti in enumerate(t):
            out[i] = self.e0 + self._nu * (expm(self._A * ti) @ self._dy0)[0].real
        return out

    @property
    def slowest_rate(self) -> float:
        """min |Re lambda_k| over modes with non-negligible coefficient."""
        keep = np.abs(self.coeffs) > 1e-12
        lam = self.lambdas[keep] if np.any(keep) else self.lambdas
        return float(np.min(np.abs(lam.real)))


def spectral_decomposition(
    params: ModelParams, y0: MomentState, mode: str = MODE_NONRWA
) -> SpectralDecomposition:
    """Eigen-decompose the moment system and project the initial state.

    The coefficients c_k are obtained by expanding y0 - y_ss in the right
    eigenvector basis and reading off the <c+c> component of each mode;
    purely neutral modes (|lambda| ~ 0, present only at g_eff = 0) are
    folded into the constant e0.
    """
    mode = _normalize_mode(mode)
    nu = params.nu
    if mode == MODE_RWA:
        A = rwa_matrix(params)
        yfull = expand_state(y0)
        yvec = np.array([yfull[0], yfull[1], yfull[3], yfull[4]])
        y_ss = np.zeros(4, dtype=complex)
    else:
        A, b = moment_system(params, MODE_NONRWA)
        yvec = expand_state(y0)
        if params.g_eff == 0:
            y_ss = np.zeros(10, dtype=complex)  # homogeneous: b = 0 at g = 0
        else:
            y_ss = np.linalg.solve(A, -b)

    lam, V = np.linalg.eig(A)
    dy0 = yvec - y_ss
    cond = np.linalg.cond(V)
    robust = False
    if cond > 1e8:
        warnings.warn(
            f"moment eigenbasis ill-conditioned (cond = {cond:.2e}); "
            "falling back to dense propagation for reconstruction",
            RuntimeWarning,
        )
        robust = True
        alpha = np.linalg.lstsq(V, dy0, rcond=None)[0]
    else:
        alpha = np.linalg.solve(V, dy0)

    coeffs = nu * V[0, :] * alpha
    e0 = nu * float(np.real(y_ss[0]))
    neutral = np.abs(lam) < 1e-12
    if np.any(neutral):
        e0 += float(np.sum(coeffs[neutral]).real)
        coeffs = coeffs[~neutral]
        lam = lam[~neutral]
    return SpectralDecomposition(
        lambdas=lam, coeffs=coeffs, e0=e0, mode=mode, robust=robust,
        _A=A, _dy0=dy0, _nu=nu,
    )


def cooling_time(params: ModelParams, mode: str = MODE_NONRWA) -> float:
    """Upper bound on the cooling time, tau = 1/min_k |Re lambda_k|.

    RWA mode uses the 4x4 matrix of the energy-like moments; non-RWA uses
    the full 10x10 linear part.

    Raises
    ------
    UnstableSystem
        If any eigenvalue has real part above the stability tolerance.
    """
    lam = np.linalg.eigvals(_linear_part(params, mode))
    if float(np.max(lam.real)) > STABILITY_TOL:
        raise UnstableSystem(f"unstable system, max Re(lambda) = {np.max(lam.real):.3e}")
    slowest = float(np.min(np.abs(lam.real)))
    if slowest <= STABILITY_TOL:
        return float("inf")
    return 1.0 / slowest


@dataclass(frozen=True)
class LimitEstimates:
    """Closed-form limit numbers plus a coarse regime label."""

    doppler_tau: float
    doppler_temp: float
    sideband_tau: float
    sideband_temp: float
    regime: str


def classify_regime(params: ModelParams) -> str:
    """Coarse classification: 'doppler' when g << nu << kappa, 'sideband'
    when kappa << nu and g stays perturbative, else 'intermediate'.

    Thresholds (ratios <= 0.1, g/nu <= 0.3 for sideband) are artifact
    conventions for reporting only; no physics depends on them.
    """
    nu, g, kappa = params.nu, params.g_eff, params.kappa
    if g / nu <= 0.1 and kappa > 0 and nu / kappa <= 0.1:
        return "doppler"
    if kappa / nu <= 0.1 and g / nu <= 0.3:
        return "sideband"
    return "intermediate"


def limit_estimates(params: ModelParams) -> LimitEstimates:
    """Doppler and sideband estimates for cooling time and final temperature."""
    nu, g, kappa = params.nu, params.g_eff, params.kappa
    return LimitEstimates(
        doppler_tau=kappa / (4 * g**2) if g > 0 else float("inf"),
        doppler_temp=kappa / 4,
        sideband_tau=2 / kappa if kappa > 0 else float("inf"),
        sideband_temp=g**2 / (2 * nu),
        regime=classify_regime(params),
    )


def fit_decay_rate(t, e_atom, e0, tau_est, window=(2.0, 6.0)):
    """Least-squares exponential-decay rate of E_atom - e0.

    Fits log(E - e0) linearly over the window [window[0], window[1]] * tau_est
    (measured from t[0]), skipping the multi-exponential transient.

    Returns
    -------
    (rate, window_ok) : (float, bool)
        Fitted decay rate (positive for decay) and whether the window was
        fully covered with enough usable samples.  rate is nan when the fit
        is impossible.
    """
    t = np.asarray(t, dtype=float)
    e = np.asarray(e_atom, dtype=float)
    lo = t[0] + window[0] * tau_est
    hi = t[0] + window[1] * tau_est
    window_ok = bool(t[-1] >= hi - 1e-9)
    mask = (t >= lo) & (t <= hi)
    resid = e - e0
    floor = 1e-14 * max(1.0, float(np.max(np.abs(resid)))) if len(resid) else 0.0
    mask &= resid > floor
    if np.count_nonzero(mask) < 8:
        return float("nan"), False
    slope = np.polyfit(t[mask], np.log(resid[mask]), 1)[0]
    return -float(slope), window_ok

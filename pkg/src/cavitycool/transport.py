"""Moving-lattice dynamics: non-adiabatic heating and switchable re-cooling.

Shifting the relative phase phi(t) of the lattice beams moves the trap
minimum; in the frame of the lattice the Hamiltonian picks up linear drives
on both modes,

    H(t) = nu c+c + nu_c(t) a+a - (nu alpha/2)(c + c+)
           - i g alpha cos(phi) (a+ - a) + i g cos(phi) (c + c+)(a+ - a),

with alpha(t) = phi(t)/eta the phase excursion in units of the wavepacket
size.  Every term proportional to the atom-cavity coupling g is multiplied
by a switch s(t) that turns the cooling channel on at ``cooling_on_time``
(instantaneous step).

Linear drives displace the means only, so the mean-subtracted (central)
second moments obey the static moment equations with the instantaneous
coupling g(t) = g cos(phi(t)) s(t); the means carry the transport dynamics.

The transport-frame atomic energy is reported in two variants:

* ``literal``: the printed expression
  nu<c+c> - (nu alpha/2)(<c>+<c+>) + (nu^2/4) alpha^2
  - (i nu alpha_dot/2)(<c+>-<c>) + (nu^2/4) alpha_dot, kept verbatim even
  though its last two terms are dimensionally suspect (they coincide with
  the physical form only at nu = 1 and alpha_dot = 0);
* ``regularized``: the kinetic-plus-potential energy relative to the moving
  well, nu<c+c> - (nu alpha/2)(<c>+<c+>) + (nu/4) alpha^2
  - (i alpha_dot/2)(<c+>-<c>) + alpha_dot^2/(4 nu), which vanishes for the
  displaced ground state co-moving with the lattice.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .model import ModelParams, MomentState, central_second_moments
from .dynamics import (
    PACKED_DIM,
    P_AA, P_CA, P_CAD, P_CC, P_MA, P_MC, P_NA, P_NC,
    IntegratorSettings,
    StepSizeUnderflow,
    _sample_times,
    format_csv_row,
    moment_system,
    packed_system,
)

__all__ = [
    "PhaseProfile",
    "TransportState",
    "TransportTrajectory",
    "make_transport_profile",
    "lattice_alpha",
    "accel_rhs",
    "transport_energy",
    "integrate_transport",
    "write_transport_csv",
]


@dataclass(frozen=True)
class PhaseProfile:
    """Time-dependent lattice phase and the cooling-channel parameters.

    Attributes
    ----------
    phi, phi_dot : callable
        Relative lattice phase phi(t) and its time derivative (consistent
        pair; see tests for the finite-difference check).
    eta : float
        Lamb-Dicke parameter converting phase to mode displacement,
        alpha = phi / eta.
    cooling_on_time : float
        Instant at which the atom-cavity coupling is switched on.
    g_bare : float
        Bare coupling entering every interaction term as g_bare cos(phi).
    nu_c_shift : float
        Depth of the cos^2(phi) modulation of the cavity frequency
        (dispersive shift); 0 freezes nu_c at its nominal value.
    """

    phi: Callable[[float], float]
    phi_dot: Callable[[float], float]
    eta: float
    cooling_on_time: float
    g_bare: float
    nu_c_shift: float = 0.0

    def switch(self, t: float) -> float:
        return 1.0 if t >= self.cooling_on_time else 0.0

    def coupling(self, t: float) -> float:
        """Instantaneous coupling g_bare * cos(phi(t)) * s(t)."""
        return self.g_bare * math.cos(self.phi(t)) * self.switch(t)

    def nu_c_at(self, t: float, nu_c0: float) -> float:
        if self.nu_c_shift == 0.0:
            return nu_c0
        return nu_c0 - self.nu_c_shift * (1.0 - math.cos(self.phi(t)) ** 2)


@dataclass(frozen=True)
class TransportState:
    """Moments plus derived mean position at one instant of a transport run."""

    moments: MomentState
    t: float
    x_mean: float  # <x> in units of 1/k: 2 eta Re<c>


def lattice_alpha(profile: PhaseProfile, t: float) -> float:
    """Scaled lattice displacement alpha(t) = phi(t) / eta."""
    return profile.phi(t) / profile.eta


def make_transport_profile(
    displacement: float,
    duration: float,
    shape: str = "raised_cosine",
    eta: float = 0.25,
    cooling_on_time: float = 0.0,
    g_bare: float = 0.0,
    k: float = 1.0,
    nu_c_shift: float = 0.0,
) -> PhaseProfile:
    """Smooth point-to-point transport profile.

    The phase ramps from phi(0) = 0 to phi(duration) = k * displacement with
    vanishing initial and final velocity, then stays constant.

    Shapes
    ------
    ``raised_cosine``
        phi_dot ~ 1 - cos(2 pi t / T); peak velocity 2 phi_end / T.
    ``minimum_jerk``
        quintic ramp 10 s^3 - 15 s^4 + 6 s^5; peak velocity 1.875 phi_end / T.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    phi_end = k * displacement
    T = float(duration)

    if shape == "raised_cosine":

        def phi(t, _e=phi_end, _T=T):
            if t <= 0:
                return 0.0
            if t >= _T:
                return _e
            return _e * (t / _T - math.sin(2 * math.pi * t / _T) / (2 * math.pi))

        def phi_dot(t, _e=phi_end, _T=T):
            if t <= 0 or t >= _T:
                return 0.0
            return (_e / _T) * (1 - math.cos(2 * math.pi * t / _T))

    elif shape == "minimum_jerk":

        def phi(t, _e=phi_end, _T=T):
            if t <= 0:
                return 0.0
            if t >= _T:
                return _e
            s = t / _T
            return _e * (10 * s**3 - 15 * s**4 + 6 * s**5)

        def phi_dot(t, _e=phi_end, _T=T):
            if t <= 0 or t >= _T:
                return 0.0
            s = t / _T
            return (_e / _T) * 30 * s**2 * (1 - s) ** 2

    else:
        raise ValueError(f"unknown profile shape {shape!r}")

    return PhaseProfile(
        phi=phi,
        phi_dot=phi_dot,
        eta=eta,
        cooling_on_time=cooling_on_time,
        g_bare=g_bare,
        nu_c_shift=nu_c_shift,
    )


def _transport_generators(params: ModelParams):
    """Packed real generators of the time-dependent system.

    The moment and mean matrices are entrywise linear in g and in nu_c with
    no cross terms, so rhs(y; g, nu_c) = (B00 + g Bg + nu_c Bnuc) y + g sg
    and three evaluations pin the whole family.
    """
    def build(g, nu_c):
        p = ModelParams(nu=params.nu, nu_c=nu_c, g_eff=g, kappa=params.kappa)
        return packed_system(p, "nonrwa")

    B00, s00 = build(0.0, 0.0)
    B10, s10 = build(1.0, 0.0)
    B01, _ = build(0.0, 1.0)
    Bg = B10 - B00
    Bnuc = B01 - B00
    sg = s10 - s00  # source is exactly linear in g, zero at g = 0
    return B00, Bg, Bnuc, sg


def _transport_rhs_factory(params: ModelParams, profile: PhaseProfile):
    B00, Bg, Bnuc, sg = _transport_generators(params)
    nu = params.nu
    nu_c0 = params.nu_c
    eta = profile.eta

    def rhs(t, y):
        g_t = profile.coupling(t)
        nu_c_t = profile.nu_c_at(t, nu_c0)
        alpha = profile.phi(t) / eta
        dy = (B00 + g_t * Bg + nu_c_t * Bnuc) @ y + g_t * sg
        # linear drives on the means: +i nu alpha/2 on <c>, -g alpha cos(phi) s on <a>
        dy[P_MC + 1] += nu * alpha / 2.0
        dy[P_MA] += -g_t * alpha
        return dy

    return rhs


def accel_rhs(
    params: ModelParams, profile: PhaseProfile, t: float, state: MomentState
) -> MomentState:
    """Time derivative of the raw moments under the moving-lattice Hamiltonian.

    The central second moments follow the static moment equations with
    coupling g_bare cos(phi) s(t); raw-moment derivatives are recovered with
    the product rule.  Reduces exactly to the static right-hand side when
    phi = 0, alpha = 0 and the switch is on.
    """
    n_c_c, n_a_c, ca_c, cad_c, cc_c, aa_c = central_second_moments(state)
    g_t = profile.coupling(t)
    nu_c_t = profile.nu_c_at(t, params.nu_c)
    alpha = lattice_alpha(profile, t)

    # central-moment derivative: static system at coupling g_t
    A0, _ = moment_system(ModelParams(params.nu, nu_c_t, 0.0, params.kappa), "nonrwa")
    A1, _ = moment_system(ModelParams(params.nu, nu_c_t, 1.0, params.kappa), "nonrwa")
    central = np.array(
        [n_c_c, n_a_c, ca_c, cad_c, np.conj(cad_c), np.conj(ca_c),
         cc_c, aa_c, np.conj(cc_c), np.conj(aa_c)], dtype=complex)
    b = np.zeros(10, dtype=complex)
    b[2] = b[5] = g_t
    dcentral = (A0 + g_t * (A1 - A0)) @ central + b

    mc, ma = state.mean_c, state.mean_a
    dmc = -1j * params.nu * mc + 1j * params.nu * alpha / 2.0 + g_t * (np.conj(ma) - ma)
    dma = (-1j * nu_c_t - params.kappa / 2.0) * ma + g_t * (mc + np.conj(mc)) - g_t * alpha

    return MomentState(
        n_c=float((dcentral[0] + 2 * np.real(np.conj(mc) * dmc)).real),
        n_a=float((dcentral[1] + 2 * np.real(np.conj(ma) * dma)).real),
        ca=complex(dcentral[2] + dmc * ma + mc * dma),
        ca_dag=complex(dcentral[3] + dmc * np.conj(ma) + mc * np.conj(dma)),
        cc=complex(dcentral[6] + 2 * mc * dmc),
        aa=complex(dcentral[7] + 2 * ma * dma),
        mean_c=complex(dmc),
        mean_a=complex(dma),
    )


def transport_energy(
    state: MomentState,
    params: ModelParams,
    profile: PhaseProfile,
    t: float,
    variant: str = "literal",
) -> float:
    """Transport-frame atomic energy E_A at time t (see module docstring)."""
    nu = params.nu
    alpha = lattice_alpha(profile, t)
    alpha_dot = profile.phi_dot(t) / profile.eta
    re_c = state.mean_c.real
    im_c = state.mean_c.imag
    if variant == "literal":
        return (
            nu * state.n_c
            - nu * alpha * re_c
            + nu**2 * alpha**2 / 4.0
            - nu * alpha_dot * im_c
            + nu**2 * alpha_dot / 4.0
        )
    if variant == "regularized":
        return (
            nu * state.n_c
            - nu * alpha * re_c
            + nu * alpha**2 / 4.0
            - alpha_dot * im_c
            + alpha_dot**2 / (4.0 * nu)
        )
    raise ValueError(f"unknown transport energy variant {variant!r}")


@dataclass(frozen=True)
class TransportTrajectory:
    """Sampled transport run.

    ``y`` rows hold the packed means and *central* second moments; raw
    moments are reconstructed on access.
    """

    t: np.ndarray
    y: np.ndarray
    params: ModelParams
    profile: PhaseProfile

    def __len__(self):
        return len(self.t)

    def state(self, i: int) -> MomentState:
        """Raw MomentState at sample i."""
        row = self.y[i]
        mc = complex(row[P_MC], row[P_MC + 1])
        ma = complex(row[P_MA], row[P_MA + 1])
        return MomentState(
            n_c=float(row[P_NC] + abs(mc) ** 2),
            n_a=float(row[P_NA] + abs(ma) ** 2),
            ca=complex(row[P_CA], row[P_CA + 1]) + mc * ma,
            ca_dag=complex(row[P_CAD], row[P_CAD + 1]) + mc * np.conj(ma),
            cc=complex(row[P_CC], row[P_CC + 1]) + mc**2,
            aa=complex(row[P_AA], row[P_AA + 1]) + ma**2,
            mean_c=mc,
            mean_a=ma,
        )

    def transport_state(self, i: int) -> TransportState:
        st = self.state(i)
        return TransportState(
            moments=st, t=float(self.t[i]),
            x_mean=2.0 * self.profile.eta * st.mean_c.real,
        )

    @property
    def mean_c(self) -> np.ndarray:
        return self.y[:, P_MC] + 1j * self.y[:, P_MC + 1]

    @property
    def x_mean(self) -> np.ndarray:
        return 2.0 * self.profile.eta * self.y[:, P_MC]

    @property
    def phi_values(self) -> np.ndarray:
        return np.array([self.profile.phi(ti) for ti in self.t])

    @property
    def n_c(self) -> np.ndarray:
        """Raw <c+c> (central part plus mean contribution)."""
        return self.y[:, P_NC] + self.y[:, P_MC] ** 2 + self.y[:, P_MC + 1] ** 2

    @property
    def n_a(self) -> np.ndarray:
        return self.y[:, P_NA] + self.y[:, P_MA] ** 2 + self.y[:, P_MA + 1] ** 2

    def central_n_c(self) -> np.ndarray:
        return self.y[:, P_NC].copy()

    def e_a(self, variant: str = "literal") -> np.ndarray:
        return np.array(
            [
                transport_energy(self.state(i), self.params, self.profile,
                                 float(self.t[i]), variant)
                for i in range(len(self.t))
            ]
        )


def _pack_transport(state: MomentState) -> np.ndarray:
    n_c_c, n_a_c, ca_c, cad_c, cc_c, aa_c = central_second_moments(state)
    y = np.empty(PACKED_DIM)
    y[P_NC], y[P_NA] = float(np.real(n_c_c)), float(np.real(n_a_c))
    for idx, val in ((P_CA, ca_c), (P_CAD, cad_c), (P_CC, cc_c), (P_AA, aa_c),
                     (P_MC, state.mean_c), (P_MA, state.mean_a)):
        y[idx] = np.real(val)
        y[idx + 1] = np.imag(val)
    return y


def integrate_transport(
    params: ModelParams,
    profile: PhaseProfile,
    t_span,
    y0: MomentState,
    settings: IntegratorSettings | None = None,
    sample_dt: float = 0.05,
) -> TransportTrajectory:
    """Integrate a transport run, splitting at the cooling switch-on step."""
    settings = settings or IntegratorSettings()
    rhs = _transport_rhs_factory(params, profile)
    t0, t1 = float(t_span[0]), float(t_span[1])
    times = _sample_times((t0, t1), sample_dt)
    t_on = profile.cooling_on_time
    breakpoints = [t0] + ([t_on] if t0 < t_on < t1 else []) + [t1]

    ys = []
    ts = []
    y_cur = _pack_transport(y0)
    for seg0, seg1 in zip(breakpoints[:-1], breakpoints[1:]):
        seg_mask = (times >= seg0 - 1e-12) & (times <= seg1 + 1e-12)
        seg_times = times[seg_mask]
        seg_eval = np.unique(np.concatenate(([seg0], seg_times, [seg1])))
        sol = solve_ivp(
            rhs,
            (seg0, seg1),
            y_cur,
            method="DOP853",
            rtol=settings.rel_tol,
            atol=settings.abs_tol,
            max_step=settings.resolve_max_step(params),
            t_eval=seg_eval,
        )
        if not sol.success:
            raise StepSizeUnderflow(sol.message)
        y_cur = sol.y[:, -1].copy()
        for k, tk in enumerate(sol.t):
            if ts and abs(tk - ts[-1]) < 1e-12:
                continue
            if np.any(np.abs(times - tk) < 1e-9):
                ts.append(tk)
                ys.append(sol.y[:, k])
    return TransportTrajectory(
        t=np.array(ts), y=np.array(ys), params=params, profile=profile
    )


TRANSPORT_COLUMNS = ("t", "e_A", "x_mean", "phi", "n_c", "n_a")


def transport_csv_text(traj: TransportTrajectory, variant: str = "literal") -> str:
    buf = io.StringIO()
    buf.write(",".join(TRANSPORT_COLUMNS) + "\n")
    e_a = traj.e_a(variant)
    x = traj.x_mean
    phis = traj.phi_values
    n_c = traj.n_c
    n_a = traj.n_a
    for i in range(len(traj)):
        buf.write(format_csv_row((traj.t[i], e_a[i], x[i], phis[i], n_c[i], n_a[i])) + "\n")
    return buf.getvalue()


def write_transport_csv(path, traj: TransportTrajectory, variant: str = "literal") -> None:
    with open(path, "w", newline="") as fh:
        fh.write(transport_csv_text(traj, variant))

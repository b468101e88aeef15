"""Closed moment equations of the damped two-oscillator model and their integration.

For the quadratic Hamiltonian

    H = nu c+c + nu_c a+a + i g_eff (c + c+)(a+ - a)

with the cavity loss dissipator (kappa/2)(2 a rho a+ - a+a rho - rho a+a),
the ten second-order moments close on themselves and obey an affine linear
system  dy/dt = A y + b.  The constant source b (the ``+g_eff`` entries in
the <ca> and <c+a+> lines) is the ordering constant left behind by the
counter-rotating part of the coupling.

Dropping the counter-rotating terms (rotating wave approximation, valid for
g_eff << nu ~ nu_c) decouples the energy-like moments
y = (<c+c>, <a+a>, <ca+>, <c+a>) into the homogeneous 4x4 system
dy/dt = M y; :func:`rwa_matrix` returns that M.

The full 10-component ordering used everywhere in this module is::

    [<c+c>, <a+a>, <ca>, <ca+>, <c+a>, <c+a+>, <c^2>, <a^2>, <c+^2>, <a+^2>]

First moments evolve separately:

    d<c>/dt = -i nu <c> + g_eff (<a+> - <a>)
    d<a>/dt = (-i nu_c - kappa/2) <a> + g_eff (<c> + <c+>)

and, in RWA, d<c>/dt = -i nu <c> - g_eff <a>,
d<a>/dt = (-i nu_c - kappa/2)<a> + g_eff <c>.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .model import ModelParams, MomentState

__all__ = [
    "MODE_NONRWA",
    "MODE_RWA",
    "MOMENT_LABELS",
    "IntegratorSettings",
    "StepSizeUnderflow",
    "moment_system",
    "rhs_nonrwa",
    "rwa_matrix",
    "mean_matrix",
    "expand_state",
    "reduce_state",
    "pack_state",
    "unpack_state",
    "packed_system",
    "MomentTrajectory",
    "integrate",
    "write_trajectory_csv",
]

MODE_NONRWA = "nonrwa"
MODE_RWA = "rwa"

MOMENT_LABELS = (
    "n_c", "n_a", "ca", "ca_dag", "cda", "cdad", "cc", "aa", "cdcd", "adad",
)

# packed real layout used by the integrator (14 components)
P_NC, P_NA = 0, 1
P_CA, P_CAD, P_CC, P_AA = 2, 4, 6, 8        # Re at index, Im at index+1
P_MC, P_MA = 10, 12
PACKED_DIM = 14


class StepSizeUnderflow(RuntimeError):
    """The adaptive integrator could not meet the requested tolerances."""


@dataclass(frozen=True)
class IntegratorSettings:
    """Adaptive Runge-Kutta error control.

    ``max_step`` of None resolves to 0.05 / max(nu, |nu_c|, kappa), small
    enough that the mildly stiff kappa >> nu regime stays accurate.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float | None = None

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_step is not None and self.max_step <= 0:
            raise ValueError("max_step must be positive")

    def resolve_max_step(self, params: ModelParams) -> float:
        if self.max_step is not None:
            return self.max_step
        return 0.05 / max(params.nu, abs(params.nu_c), params.kappa, 1e-12)


def _normalize_mode(mode: str) -> str:
    m = mode.lower().replace("-", "").replace("_", "")
    if m in ("nonrwa", "full"):
        return MODE_NONRWA
    if m == "rwa":
        return MODE_RWA
    raise ValueError(f"unknown mode {mode!r} (expected 'nonrwa' or 'rwa')")


def moment_system(params: ModelParams, mode: str = MODE_NONRWA):
    """Affine system (A, b) for the ten second moments, dy/dt = A y + b.

    In RWA mode b = 0 and the 4x4 block of the energy-like moments equals
    :func:`rwa_matrix` exactly; the anomalous moments still evolve (they
    rotate and decay) but no longer feed the occupations.
    """
    mode = _normalize_mode(mode)
    nu, nu_c, g, kappa = params.nu, params.nu_c, params.g_eff, params.kappa
    i = 1j
    A = np.zeros((10, 10), dtype=complex)
    b = np.zeros(10, dtype=complex)

    if mode == MODE_NONRWA:
        # d<c+c>/dt = g(<ca> - <ca+> - <c+a> + <c+a+>)
        A[0, 2], A[0, 3], A[0, 4], A[0, 5] = g, -g, -g, g
        # d<a+a>/dt = g(<ca> + <ca+> + <c+a> + <c+a+>) - kappa <a+a>
        A[1, 2] = A[1, 3] = A[1, 4] = A[1, 5] = g
        A[1, 1] = -kappa
        # d<ca>/dt = g(<c+c> + <a+a> + <c^2> - <a^2>) + (-i nu - i nu_c - kappa/2)<ca> + g
        A[2, 0], A[2, 1], A[2, 6], A[2, 7] = g, g, g, -g
        A[2, 2] = -i * nu - i * nu_c - kappa / 2
        b[2] = g
        # d<ca+>/dt = g(<c+c> - <a+a> + <c^2> + <a+^2>) + (-i nu + i nu_c - kappa/2)<ca+>
        A[3, 0], A[3, 1], A[3, 6], A[3, 9] = g, -g, g, g
        A[3, 3] = -i * nu + i * nu_c - kappa / 2
        # d<c+a>/dt: conjugate of the <ca+> line
        A[4, 0], A[4, 1], A[4, 8], A[4, 7] = g, -g, g, g
        A[4, 4] = i * nu - i * nu_c - kappa / 2
        # d<c+a+>/dt: conjugate of the <ca> line (source included)
        A[5, 0], A[5, 1], A[5, 8], A[5, 9] = g, g, g, -g
        A[5, 5] = i * nu + i * nu_c - kappa / 2
        b[5] = g
        # d<c^2>/dt = 2g(<ca+> - <ca>) - 2 i nu <c^2>
        A[6, 3], A[6, 2] = 2 * g, -2 * g
        A[6, 6] = -2 * i * nu
        # d<a^2>/dt = 2g(<ca> + <c+a>) + (-2 i nu_c - kappa)<a^2>
        A[7, 2], A[7, 4] = 2 * g, 2 * g
        A[7, 7] = -2 * i * nu_c - kappa
        # d<c+^2>/dt: conjugate of the <c^2> line
        A[8, 4], A[8, 5] = 2 * g, -2 * g
        A[8, 8] = 2 * i * nu
        # d<a+^2>/dt: conjugate of the <a^2> line
        A[9, 5], A[9, 3] = 2 * g, 2 * g
        A[9, 9] = 2 * i * nu_c - kappa
    else:
        # energy-like 4-sector (identical to rwa_matrix)
        A[0, 3] = A[0, 4] = -g
        A[1, 1] = -kappa
        A[1, 3] = A[1, 4] = g
        A[3, 0], A[3, 1] = g, -g
        A[3, 3] = i * (nu_c - nu) - kappa / 2
        A[4, 0], A[4, 1] = g, -g
        A[4, 4] = i * (nu - nu_c) - kappa / 2
        # anomalous sector closes on itself under the exchange coupling
        A[2, 6], A[2, 7] = g, -g
        A[2, 2] = -i * nu - i * nu_c - kappa / 2
        A[5, 8], A[5, 9] = g, -g
        A[5, 5] = i * nu + i * nu_c - kappa / 2
        A[6, 2] = -2 * g
        A[6, 6] = -2 * i * nu
        A[7, 2] = 2 * g
        A[7, 7] = -2 * i * nu_c - kappa
        A[8, 5] = -2 * g
        A[8, 8] = 2 * i * nu
        A[9, 5] = 2 * g
        A[9, 9] = 2 * i * nu_c - kappa
    return A, b


def rhs_nonrwa(params: ModelParams, y: np.ndarray) -> np.ndarray:
    """Time derivative of the full 10-component moment vector (no RWA)."""
    y = np.asarray(y, dtype=complex)
    if y.shape != (10,):
        raise ValueError(f"expected a 10-component moment vector, got shape {y.shape}")
    A, b = moment_system(params, MODE_NONRWA)
    return A @ y + b


def rwa_matrix(params: ModelParams) -> np.ndarray:
    """4x4 evolution matrix of (<c+c>, <a+a>, <ca+>, <c+a>) in RWA."""
    g, kappa = params.g_eff, params.kappa
    return np.array(
        [
            [0, 0, -g, -g],
            [0, -kappa, g, g],
            [g, -g, 1j * (params.nu_c - params.nu) - kappa / 2, 0],
            [g, -g, 0, 1j * (params.nu - params.nu_c) - kappa / 2],
        ],
        dtype=complex,
    )


def mean_matrix(params: ModelParams, mode: str = MODE_NONRWA) -> np.ndarray:
    """Evolution matrix of the means.

    NonRWA couples (<c>, <a>) to their conjugates, so the matrix acts on
    (<c>, <c>*, <a>, <a>*); RWA closes on (<c>, <a>) and the returned 4x4
    is block-structured accordingly.
    """
    mode = _normalize_mode(mode)
    nu, nu_c, g, kappa = params.nu, params.nu_c, params.g_eff, params.kappa
    M = np.zeros((4, 4), dtype=complex)
    if mode == MODE_NONRWA:
        M[0, 0] = -1j * nu
        M[0, 3], M[0, 2] = g, -g
        M[1, 1] = 1j * nu
        M[1, 2], M[1, 3] = g, -g
        M[2, 2] = -1j * nu_c - kappa / 2
        M[2, 0] = M[2, 1] = g
        M[3, 3] = 1j * nu_c - kappa / 2
        M[3, 0] = M[3, 1] = g
    else:
        M[0, 0] = -1j * nu
        M[0, 2] = -g
        M[1, 1] = 1j * nu
        M[1, 3] = -g
        M[2, 2] = -1j * nu_c - kappa / 2
        M[2, 0] = g
        M[3, 3] = 1j * nu_c - kappa / 2
        M[3, 1] = g
    return M


def expand_state(state: MomentState) -> np.ndarray:
    """MomentState -> full 10-component vector (conjugate entries derived)."""
    return np.array(
        [
            state.n_c,
            state.n_a,
            state.ca,
            state.ca_dag,
            np.conj(state.ca_dag),
            np.conj(state.ca),
            state.cc,
            state.aa,
            np.conj(state.cc),
            np.conj(state.aa),
        ],
        dtype=complex,
    )


def reduce_state(y: np.ndarray, mean_c: complex = 0j, mean_a: complex = 0j) -> MomentState:
    """Full 10-component vector -> MomentState (keeps the independent entries)."""
    y = np.asarray(y, dtype=complex)
    return MomentState(
        n_c=float(y[0].real),
        n_a=float(y[1].real),
        ca=complex(y[2]),
        ca_dag=complex(y[3]),
        cc=complex(y[6]),
        aa=complex(y[7]),
        mean_c=complex(mean_c),
        mean_a=complex(mean_a),
    )


def pack_state(state: MomentState) -> np.ndarray:
    """MomentState -> 14-component real vector used by the integrator."""
    y = np.empty(PACKED_DIM)
    y[P_NC] = state.n_c
    y[P_NA] = state.n_a
    for idx, val in ((P_CA, state.ca), (P_CAD, state.ca_dag), (P_CC, state.cc),
                     (P_AA, state.aa), (P_MC, state.mean_c), (P_MA, state.mean_a)):
        y[idx] = np.real(val)
        y[idx + 1] = np.imag(val)
    return y


def unpack_state(y: np.ndarray) -> MomentState:
    """14-component real vector -> MomentState."""
    return MomentState(
        n_c=float(y[P_NC]),
        n_a=float(y[P_NA]),
        ca=complex(y[P_CA], y[P_CA + 1]),
        ca_dag=complex(y[P_CAD], y[P_CAD + 1]),
        cc=complex(y[P_CC], y[P_CC + 1]),
        aa=complex(y[P_AA], y[P_AA + 1]),
        mean_c=complex(y[P_MC], y[P_MC + 1]),
        mean_a=complex(y[P_MA], y[P_MA + 1]),
    )


def _packed_to_full(y: np.ndarray) -> np.ndarray:
    out = np.empty(10, dtype=complex)
    out[0] = y[P_NC]
    out[1] = y[P_NA]
    out[2] = complex(y[P_CA], y[P_CA + 1])
    out[3] = complex(y[P_CAD], y[P_CAD + 1])
    out[4] = np.conj(out[3])
    out[5] = np.conj(out[2])
    out[6] = complex(y[P_CC], y[P_CC + 1])
    out[7] = complex(y[P_AA], y[P_AA + 1])
    out[8] = np.conj(out[6])
    out[9] = np.conj(out[7])
    return out


def packed_system(params: ModelParams, mode: str = MODE_NONRWA):
    """Real affine system (A_real, b_real) equivalent to the complex moment
    system plus the mean equations, acting on the packed 14-vector.

    Built column-by-column from the complex system so the integrator and the
    spectral analysis can never drift apart.
    """
    A, b = moment_system(params, mode)
    Mm = mean_matrix(params, mode)

    def rhs_packed(y):
        full = _packed_to_full(y)
        dfull = A @ full + b
        mc = complex(y[P_MC], y[P_MC + 1])
        ma = complex(y[P_MA], y[P_MA + 1])
        mvec = np.array([mc, np.conj(mc), ma, np.conj(ma)])
        dm = Mm @ mvec
        out = np.empty(PACKED_DIM)
        out[P_NC] = dfull[0].real
        out[P_NA] = dfull[1].real
        for idx, val in ((P_CA, dfull[2]), (P_CAD, dfull[3]), (P_CC, dfull[6]),
                         (P_AA, dfull[7]), (P_MC, dm[0]), (P_MA, dm[2])):
            out[idx] = val.real
            out[idx + 1] = val.imag
        return out

    A_real = np.empty((PACKED_DIM, PACKED_DIM))
    zero = rhs_packed(np.zeros(PACKED_DIM))
    for j in range(PACKED_DIM):
        e = np.zeros(PACKED_DIM)
        e[j] = 1.0
        A_real[:, j] = rhs_packed(e) - zero
    return A_real, zero


@dataclass(frozen=True)
class MomentTrajectory:
    """Sampled moment evolution: times ``t`` and packed moments ``y`` (n, 14)."""

    t: np.ndarray
    y: np.ndarray
    mode: str

    def __len__(self):
        return len(self.t)

    def state(self, i: int) -> MomentState:
        return unpack_state(self.y[i])

    def states(self):
        return [unpack_state(row) for row in self.y]

    @property
    def n_c(self) -> np.ndarray:
        return self.y[:, P_NC]

    @property
    def n_a(self) -> np.ndarray:
        return self.y[:, P_NA]

    @property
    def mean_c(self) -> np.ndarray:
        return self.y[:, P_MC] + 1j * self.y[:, P_MC + 1]

    @property
    def mean_a(self) -> np.ndarray:
        return self.y[:, P_MA] + 1j * self.y[:, P_MA + 1]

    def atom_energy(self, params: ModelParams) -> np.ndarray:
        return params.nu * self.n_c

    def cavity_energy(self, params: ModelParams) -> np.ndarray:
        return params.nu_c * self.n_a


def _sample_times(t_span, sample_dt):
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 <= t0:
        raise ValueError("t_span must satisfy t1 > t0")
    n = int(np.floor((t1 - t0) / sample_dt + 1e-9))
    times = t0 + sample_dt * np.arange(n + 1)
    if times[-1] < t1 - 1e-12 * max(1.0, abs(t1)):
        times = np.append(times, t1)
    else:
        times[-1] = t1
    return times


def integrate(
    params: ModelParams,
    y0: MomentState,
    t_span,
    settings: IntegratorSettings | None = None,
    mode: str = MODE_NONRWA,
    sample_dt: float | None = None,
    t_eval=None,
) -> MomentTrajectory:
    """Integrate the moment equations over ``t_span`` = (t0, t1).

    Parameters
    ----------
    params : ModelParams
    y0 : MomentState
        Initial first and second moments.
    settings : IntegratorSettings, optional
        Error control; defaults are tight enough that steady-state checks at
        1e-6 are integrator-noise free.
    mode : {'nonrwa', 'rwa'}
    sample_dt : float, optional
        Uniform output sampling step.  Mutually exclusive with ``t_eval``.
    t_eval : array, optional
        Explicit output times.

    Raises
    ------
    StepSizeUnderflow
        If the adaptive integrator cannot satisfy the tolerances.
    """
    mode = _normalize_mode(mode)
    settings = settings or IntegratorSettings()
    if t_eval is None:
        t_eval = _sample_times(t_span, sample_dt) if sample_dt else None
    A_real, b_real = packed_system(params, mode)

    sol = solve_ivp(
        lambda t, y: A_real @ y + b_real,
        (float(t_span[0]), float(t_span[1])),
        pack_state(y0),
        method="DOP853",
        rtol=settings.rel_tol,
        atol=settings.abs_tol,
        max_step=settings.resolve_max_step(params),
        t_eval=t_eval,
        dense_output=False,
    )
    if not sol.success:
        raise StepSizeUnderflow(sol.message)
    return MomentTrajectory(t=sol.t, y=sol.y.T.copy(), mode=mode)


# CSV export: fixed 17-significant-digit format, '.' decimal, '\n' endings
CSV_FMT = "%.17g"

TRAJECTORY_COLUMNS = (
    "t", "e_atom", "e_cavity", "n_c", "n_a",
    "re_ca", "im_ca", "re_ca_dag", "im_ca_dag",
    "re_cc", "im_cc", "re_aa", "im_aa",
    "re_mean_c", "im_mean_c", "re_mean_a", "im_mean_a",
)


def format_csv_row(values) -> str:
    return ",".join(CSV_FMT % v for v in values)


def trajectory_csv_text(traj: MomentTrajectory, params: ModelParams) -> str:
    """Render a trajectory as deterministic CSV text."""
    buf = io.StringIO()
    buf.write(",".join(TRAJECTORY_COLUMNS) + "\n")
    e_at = traj.atom_energy(params)
    e_cv = traj.cavity_energy(params)
    y = traj.y
    for i in range(len(traj)):
        row = (
            traj.t[i], e_at[i], e_cv[i], y[i, P_NC], y[i, P_NA],
            y[i, P_CA], y[i, P_CA + 1], y[i, P_CAD], y[i, P_CAD + 1],
            y[i, P_CC], y[i, P_CC + 1], y[i, P_AA], y[i, P_AA + 1],
            y[i, P_MC], y[i, P_MC + 1], y[i, P_MA], y[i, P_MA + 1],
        )
        buf.write(format_csv_row(row) + "\n")
    return buf.getvalue()


def write_trajectory_csv(path, traj: MomentTrajectory, params: ModelParams) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(trajectory_csv_text(traj, params))

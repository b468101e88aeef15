"""Abstract two-oscillator model and Gaussian moment state.

The system is a pair of coupled bosonic modes: mode ``c`` is the quantized
motion of an atom in one well of an optical lattice (trap frequency ``nu``),
mode ``a`` is a damped cavity mode (frequency ``nu_c`` in the frame rotating
with the drive laser, photon loss rate ``kappa``).  The phonon-photon
exchange coupling is ``g_eff``.

All frequencies and rates are expressed in units of ``nu`` (``nu = 1`` is the
canonical choice) and times in units of ``1/nu``, matching the dimensionless
axes used throughout the analysis.

Because the Hamiltonian is quadratic and the loss is linear, first and second
moments evolve autonomously (Gaussian dynamics).  ``MomentState`` stores the
six independent second moments plus the two mode means; the remaining four
second moments are fixed by conjugation and never stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelParams",
    "MomentState",
    "EnergyRecord",
    "VACUUM",
    "coherent_initial_state",
    "atom_energy",
    "cavity_energy",
    "central_second_moments",
    "covariance_matrix",
    "symplectic_eigenvalues",
    "moments_from_covariance",
    "is_physical",
    "assert_physical",
]


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the two-oscillator model (all in units of the trap frequency).

    Attributes
    ----------
    nu : float
        Trap frequency of the atomic motion, > 0.  Sets the unit system.
    nu_c : float
        Effective cavity-mode frequency in the rotating frame (may be
        negative for far blue cavity detuning).
    g_eff : float
        Effective phonon-photon coupling strength, >= 0.
    kappa : float
        Cavity photon (energy) loss rate, >= 0.

    Stability of the damped coupled system is *not* guaranteed by
    construction; it is certified from the moment-evolution spectrum in
    :mod:`cavitycool.spectral`.
    """

    nu: float
    nu_c: float
    g_eff: float
    kappa: float

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"nu must be > 0, got {self.nu}")
        if self.g_eff < 0:
            raise ValueError(f"g_eff must be >= 0, got {self.g_eff}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")


@dataclass(frozen=True)
class MomentState:
    """First and second moments of the two-mode Gaussian state.

    Stored moments (raw, not mean-subtracted):

    ==========  =====================
    field       operator expectation
    ==========  =====================
    ``n_c``     <c+ c>   (real)
    ``n_a``     <a+ a>   (real)
    ``ca``      <c a>
    ``ca_dag``  <c a+>
    ``cc``      <c^2>
    ``aa``      <a^2>
    ``mean_c``  <c>
    ``mean_a``  <a>
    ==========  =====================

    The conjugate partners <c+ a> = conj(<c a+>), <c+ a+> = conj(<c a>),
    <c+^2> = conj(<c^2>) and <a+^2> = conj(<a^2>) are derived on demand,
    which makes the conjugation identities exact by construction.
    """

    n_c: float = 0.0
    n_a: float = 0.0
    ca: complex = 0j
    ca_dag: complex = 0j
    cc: complex = 0j
    aa: complex = 0j
    mean_c: complex = 0j
    mean_a: complex = 0j

    @property
    def cda(self) -> complex:
        """<c+ a> = conj(<c a+>)."""
        return np.conj(self.ca_dag)

    @property
    def cdad(self) -> complex:
        """<c+ a+> = conj(<c a>)."""
        return np.conj(self.ca)

    @property
    def cdcd(self) -> complex:
        """<c+^2> = conj(<c^2>)."""
        return np.conj(self.cc)

    @property
    def adad(self) -> complex:
        """<a+^2> = conj(<a^2>)."""
        return np.conj(self.aa)


VACUUM = MomentState()


@dataclass(frozen=True)
class EnergyRecord:
    """Energies of both modes at one instant (units of nu, times in 1/nu)."""

    t: float
    e_atom: float
    e_cavity: float


def coherent_initial_state(beta_c: complex, beta_a: complex) -> MomentState:
    """Moments of the product coherent state |beta_c> x |beta_a>.

    For a coherent state all raw moments factorize into products of the
    amplitudes: <c+c> = |beta_c|^2, <c^2> = beta_c^2, <c a> = beta_c beta_a,
    and so on.

    Parameters
    ----------
    beta_c, beta_a : complex
        Coherent amplitudes of the motional and cavity modes.
    """
    beta_c = complex(beta_c)
    beta_a = complex(beta_a)
    return MomentState(
        n_c=abs(beta_c) ** 2,
        n_a=abs(beta_a) ** 2,
        ca=beta_c * beta_a,
        ca_dag=beta_c * np.conj(beta_a),
        cc=beta_c**2,
        aa=beta_a**2,
        mean_c=beta_c,
        mean_a=beta_a,
    )


def atom_energy(state: MomentState, params: ModelParams) -> float:
    """Motional energy nu <c+ c> (ground-state energy excluded)."""
    return params.nu * state.n_c


def cavity_energy(state: MomentState, params: ModelParams) -> float:
    """Cavity-mode energy nu_c <a+ a>."""
    return params.nu_c * state.n_a


def central_second_moments(state: MomentState):
    """Mean-subtracted second moments as a tuple.

    Returns
    -------
    (n_c, n_a, ca, ca_dag, cc, aa) with the mean products removed, e.g.
    <c+c>_central = <c+c> - |<c>|^2.
    """
    mc, ma = state.mean_c, state.mean_a
    return (
        state.n_c - abs(mc) ** 2,
        state.n_a - abs(ma) ** 2,
        state.ca - mc * ma,
        state.ca_dag - mc * np.conj(ma),
        state.cc - mc**2,
        state.aa - ma**2,
    )


def covariance_matrix(state: MomentState) -> np.ndarray:
    """4x4 central covariance matrix of the quadratures (x_c, p_c, x_a, p_a).

    Quadrature convention: x = (b + b+)/sqrt(2), p = i(b+ - b)/sqrt(2) for
    either mode b, so the vacuum has variance 1/2 in every quadrature.
    Entries are sigma_ij = <{dR_i, dR_j}>/2 with dR = R - <R>.
    """
    n_c, n_a, ca, cad, cc, aa = central_second_moments(state)
    n_c, n_a = float(np.real(n_c)), float(np.real(n_a))

    sig = np.empty((4, 4))
    # single-mode blocks
    sig[0, 0] = n_c + cc.real + 0.5
    sig[1, 1] = n_c - cc.real + 0.5
    sig[0, 1] = sig[1, 0] = cc.imag
    sig[2, 2] = n_a + aa.real + 0.5
    sig[3, 3] = n_a - aa.real + 0.5
    sig[2, 3] = sig[3, 2] = aa.imag
    # cross block
    sig[0, 2] = sig[2, 0] = (ca + cad).real
    sig[0, 3] = sig[3, 0] = ca.imag - cad.imag
    sig[1, 2] = sig[2, 1] = ca.imag + cad.imag
    sig[1, 3] = sig[3, 1] = cad.real - ca.real
    return sig


# standard symplectic form on (x_c, p_c, x_a, p_a)
_OMEGA = np.array(
    [
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]
)


def symplectic_eigenvalues(sigma: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues of a covariance matrix, sorted ascending.

    Physical Gaussian states satisfy sigma + i Omega/2 >= 0, equivalently
    both symplectic eigenvalues >= 1/2.
    """
    ev = np.sort(np.abs(np.linalg.eigvals(1j * _OMEGA @ sigma)))
    # moduli come in degenerate +/- pairs; average each pair
    return ev.reshape(-1, 2).mean(axis=1)


def moments_from_covariance(
    sigma: np.ndarray, mean_c: complex = 0j, mean_a: complex = 0j
) -> MomentState:
    """Inverse of :func:`covariance_matrix` (plus means): build a MomentState."""
    n_c = (sigma[0, 0] + sigma[1, 1] - 1.0) / 2.0
    cc = (sigma[0, 0] - sigma[1, 1]) / 2.0 + 1j * sigma[0, 1]
    n_a = (sigma[2, 2] + sigma[3, 3] - 1.0) / 2.0
    aa = (sigma[2, 2] - sigma[3, 3]) / 2.0 + 1j * sigma[2, 3]
    re_ca = (sigma[0, 2] - sigma[1, 3]) / 2.0
    re_cad = (sigma[0, 2] + sigma[1, 3]) / 2.0
    im_ca = (sigma[1, 2] + sigma[0, 3]) / 2.0
    im_cad = (sigma[1, 2] - sigma[0, 3]) / 2.0
    mc, ma = complex(mean_c), complex(mean_a)
    return MomentState(
        n_c=n_c + abs(mc) ** 2,
        n_a=n_a + abs(ma) ** 2,
        ca=re_ca + 1j * im_ca + mc * ma,
        ca_dag=re_cad + 1j * im_cad + mc * np.conj(ma),
        cc=cc + mc**2,
        aa=aa + ma**2,
        mean_c=mc,
        mean_a=ma,
    )


def is_physical(state: MomentState, tol: float = 1e-9) -> bool:
    """Check the Gaussian uncertainty relation (symplectic eigenvalues >= 1/2 - tol)."""
    if state.n_c < abs(state.mean_c) ** 2 - tol:
        return False
    if state.n_a < abs(state.mean_a) ** 2 - tol:
        return False
    nus = symplectic_eigenvalues(covariance_matrix(state))
    return bool(np.all(nus >= 0.5 - tol))


def assert_physical(state: MomentState, tol: float = 1e-9) -> None:
    """Raise AssertionError if the state violates physicality beyond ``tol``.

    Dynamics may transiently violate physicality only within integrator
    tolerance, so this is a diagnostic utility, not a constructor guard.
    """
    if not is_physical(state, tol):
        nus = symplectic_eigenvalues(covariance_matrix(state))
        raise AssertionError(
            f"unphysical moment state: symplectic eigenvalues {nus}, "
            f"n_c={state.n_c}, |mean_c|^2={abs(state.mean_c) ** 2}"
        )

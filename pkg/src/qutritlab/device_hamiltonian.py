"""Circuit quantization of two fixed-frequency transmons bridged by a
flux-tunable coupler junction.

The lumped model has three nodes (transmon 1, transmon 2, coupler).
Charging energy comes from the node capacitance matrix, inductive energy
from the two transmon junctions (each connecting its node to the coupler
node) and from the coupler junction to ground, whose effective Josephson
energy is tuned by the external flux as E_Jc cos(pi Phi_ext / Phi0).

Quantization proceeds in normal modes: the quadratic form is brought to
Sum_k (n_k**2 + D_k phi_k**2), each mode is truncated to a Fock ladder,
and the full junction cosines are reinserted via spectral decomposition
of the dressed flux operators. Dressed eigenstates are labeled by their
dominant bare-product component, which gives transition frequencies and
the dispersive (cross-Kerr) shifts between the two qutrits.

Units: capacitances in fF, energies and frequencies in GHz (h = 1),
cross-Kerr coefficients in kHz, flux in units of the flux quantum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qutrit_core import QutritLabError

# e**2 / 2h in GHz * fF:
K_C = 1.602176634e-19**2 / (2.0 * 6.62607015e-34) * 1e15 * 1e-9

_REQUIRED_LABELS = [(m, n) for m in range(3) for n in range(3)] + [(3, 0), (3, 1)]


class DeviceModelError(QutritLabError, RuntimeError):
    """Base for device-model failures."""


class NormalFormError(DeviceModelError):
    """The quadratic Hamiltonian has no positive-definite normal form."""


class TruncationError(DeviceModelError, ValueError):
    """The Fock truncation is too small to be meaningful."""


class FluxRangeError(DeviceModelError, ValueError):
    """The flux bias drives the coupler junction energy nonpositive."""


class LabelingError(DeviceModelError):
    """Dressed states cannot be assigned bare labels unambiguously."""


@dataclass(frozen=True)
class DeviceParams:
    """Lumped circuit parameters and flux bias."""

    c_q1: float = 178.0
    c_q2: float = 131.0
    c_c: float = 193.6
    c_q12: float = 2.0
    e_j1: float = 13.6
    e_j2: float = 13.3
    e_jc: float = 1140.0
    flux: float = 0.185
    n_levels: int = 8

    def __post_init__(self):
        for name in ("c_q1", "c_q2", "c_c"):
            if getattr(self, name) <= 0:
                raise DeviceModelError(f"{name} must be positive")
        if self.c_q12 < 0:
            raise DeviceModelError("c_q12 cannot be negative")
        if min(self.e_j1, self.e_j2, self.e_jc) < 0:
            raise DeviceModelError("Josephson energies cannot be negative")
        if self.n_levels < 1:
            raise TruncationError("n_levels must be at least 1")

    def with_flux(self, flux: float) -> "DeviceParams":
        return DeviceParams(
            self.c_q1, self.c_q2, self.c_c, self.c_q12,
            self.e_j1, self.e_j2, self.e_jc, float(flux), self.n_levels,
        )

    def squid_cos(self) -> float:
        """Flux factor of the coupler junction energy."""
        return math.cos(math.pi * self.flux)

    def coupler_energy(self) -> float:
        """Effective coupler Josephson energy at the current bias."""
        value = self.e_jc * self.squid_cos()
        if value <= 0.0:
            raise FluxRangeError(
                f"coupler junction energy {value:.3g} GHz at flux {self.flux}; must stay positive"
            )
        return value


def capacitance_matrix(params: DeviceParams) -> np.ndarray:
    """Node capacitance matrix (transmon 1, transmon 2, coupler)."""
    c1, c2, cc, c12 = params.c_q1, params.c_q2, params.c_c, params.c_q12
    m = np.array(
        [
            [c1 + c12, -c12, 0.0],
            [-c12, c2 + c12, 0.0],
            [0.0, 0.0, c1 + c2 + cc],
        ]
    )
    if np.any(np.diag(m) <= 0):
        raise DeviceModelError("capacitance matrix has non-positive diagonal entries")
    return m


def _charging_form(params: DeviceParams) -> np.ndarray:
    return 4.0 * K_C * np.linalg.inv(capacitance_matrix(params))


def _inductive_form(params: DeviceParams, decoupled: bool = False) -> np.ndarray:
    ej1, ej2 = params.e_j1, params.e_j2
    ejc_eff = params.coupler_energy()
    if decoupled:
        # diagnostic limit: every junction to ground, no coupling structure
        return 0.5 * np.diag([ej1, ej2, ej1 + ej2 + ejc_eff])
    return 0.5 * np.array(
        [
            [ej1, 0.0, -ej1],
            [0.0, ej2, -ej2],
            [-ej1, -ej2, ej1 + ej2 + ejc_eff],
        ]
    )


@dataclass(frozen=True)
class NormalForm:
    """Simultaneous normal form of the charging and inductive quadratics.

    phi = u @ phi_tilde and n = inv(u).T @ n_tilde turn the quadratic
    Hamiltonian into sum_k (c_tilde_k n_k**2 + d_tilde_k phi_k**2) with
    every c_tilde_k equal to 1.
    """

    u: np.ndarray
    c_tilde: np.ndarray
    d_tilde: np.ndarray
    orthogonal: np.ndarray
    mode_to_node: tuple[int, ...]

    @property
    def mode_freqs(self) -> np.ndarray:
        """2 sqrt(c d) per mode, in GHz."""
        return 2.0 * np.sqrt(self.c_tilde * self.d_tilde)


def normal_mode_transform(params: DeviceParams, decoupled: bool = False) -> NormalForm:
    """Diagonalize the charging and quadratic inductive forms together.

    Charges and fluxes are rescaled so the charging part becomes the
    identity, then the inductive part is orthogonally diagonalized.
    """
    a = _charging_form(params)
    b = _inductive_form(params, decoupled)
    wa, va = np.linalg.eigh(a)
    if wa.min() <= 0:
        raise NormalFormError("charging form is not positive definite")
    a_half = (va * np.sqrt(wa)) @ va.T
    lam, orth = np.linalg.eigh(a_half @ b @ a_half)
    if lam.min() <= 0:
        raise NormalFormError(
            f"inductive form is not positive definite at flux {params.flux} (min eigenvalue {lam.min():.3g})"
        )
    u = a_half @ orth
    mode_to_node = tuple(int(np.argmax(np.abs(u[:, k]))) for k in range(3))
    return NormalForm(u=u, c_tilde=np.ones(3), d_tilde=lam, orthogonal=orth, mode_to_node=mode_to_node)


def _mode_operators(nf: NormalForm, n_levels: int):
    """Per-mode flux operators and the summed charging term."""
    n = n_levels
    ladder = np.diag(np.sqrt(np.arange(1.0, n)), 1)
    phis = []
    charging = np.zeros((n**3, n**3))
    for k in range(3):
        lam = nf.d_tilde[k]
        phi_k = lam**-0.25 / math.sqrt(2.0) * (ladder + ladder.T)
        phis.append(phi_k)
        # n_tilde = i lam^(1/4) (a_dag - a)/sqrt(2), so n**2 is real:
        nsq = -math.sqrt(lam) / 2.0 * (ladder.T - ladder) @ (ladder.T - ladder)
        ops = [np.eye(n)] * 3
        ops[k] = nsq
        charging += np.kron(np.kron(ops[0], ops[1]), ops[2])
    return phis, charging


def _cosine_of(weights: np.ndarray, phis: list[np.ndarray]) -> np.ndarray:
    """cos(sum_k w_k phi_k) via single-mode spectral exponentials."""
    exps = []
    for k in range(3):
        ev, evec = np.linalg.eigh(weights[k] * phis[k])
        exps.append((evec * np.exp(1j * ev)) @ evec.conj().T)
    prod = np.kron(np.kron(exps[0], exps[1]), exps[2])
    return np.real((prod + prod.conj().T) / 2.0)


def build_full_hamiltonian(params: DeviceParams, linearize: bool = False) -> np.ndarray:
    """Full Hamiltonian on the truncated three-mode Fock space, in GHz.

    With linearize=True the junction cosines are replaced by their
    quadratic expansions, leaving an exactly harmonic spectrum; this is
    the reference limit for the nonlinearity. Literally zero Josephson
    energies leave free modes with no normal form and raise instead.
    """
    if params.n_levels < 4:
        raise TruncationError(f"n_levels = {params.n_levels} is too small (need at least 4)")
    nf = normal_mode_transform(params)
    phis, h = _mode_operators(nf, params.n_levels)
    if linearize:
        n = params.n_levels
        for k in range(3):
            ops = [np.eye(n)] * 3
            ops[k] = nf.d_tilde[k] * (phis[k] @ phis[k])
            h = h + np.kron(np.kron(ops[0], ops[1]), ops[2])
        return (h + h.T) / 2.0
    u = nf.u
    junction1 = u[0, :] - u[2, :]
    junction2 = u[1, :] - u[2, :]
    coupler = u[2, :]
    h = h - params.e_j1 * _cosine_of(junction1, phis)
    h = h - params.e_j2 * _cosine_of(junction2, phis)
    h = h - params.coupler_energy() * _cosine_of(coupler, phis)
    return (h + h.T) / 2.0


_ZZ_DEFS = {
    "zz": (((1, 1), (0, 1)), ((1, 0), (0, 0))),
    "zz_2110": (((2, 1), (1, 1)), ((2, 0), (1, 0))),
    "zz_1021": (((1, 2), (1, 1)), ((0, 2), (0, 1))),
    "zz_2120": (((2, 2), (1, 2)), ((2, 0), (1, 0))),
    "zz_2021": (((2, 2), (2, 1)), ((0, 2), (0, 1))),
    "zz_1020": (((1, 2), (0, 2)), ((1, 0), (0, 0))),
    "zz_2010": (((2, 1), (2, 0)), ((0, 1), (0, 0))),
}


@dataclass(frozen=True)
class SpectrumReport:
    """Labeled spectrum and dispersive shifts at one flux point."""

    flux: float
    n_levels: int
    energies: dict = field(repr=False)
    w01_q1: float = 0.0
    w12_q1: float = 0.0
    w01_q2: float = 0.0
    w12_q2: float = 0.0
    j11: float = 0.0
    j21: float = 0.0
    j12: float = 0.0
    j22: float = 0.0
    zz: dict = field(default_factory=dict)
    coupler_ghz: float = 0.0
    min_overlap: float = 0.0
    sweet_spot: bool = False

    def __post_init__(self):
        if not (self.w12_q1 < self.w01_q1 and self.w12_q2 < self.w01_q2):
            raise LabelingError("anharmonicity sign violated: expected w12 < w01 on both qutrits")

    def j_values(self) -> tuple[float, float, float, float]:
        return (self.j11, self.j21, self.j12, self.j22)

    def chi_from_j(self, m: int, n: int) -> float:
        """Dispersive shift of |mn> reconstructed from the J polynomial, kHz."""
        return (
            self.j11 * m * n
            + self.j21 * m * m * n
            + self.j12 * m * n * n
            + self.j22 * m * m * n * n
        )

    def to_row(self) -> str:
        cells = [
            self.flux,
            self.w01_q1, self.w12_q1, self.w01_q2, self.w12_q2,
            self.j11, self.j21, self.j12, self.j22,
        ]
        return ",".join(f"{x:.9g}" for x in cells)


def _label_eigenstates(params: DeviceParams):
    nf = normal_mode_transform(params)
    h = build_full_hamiltonian(params)
    evals, evecs = np.linalg.eigh(h)
    n = params.n_levels
    weights = np.abs(evecs) ** 2
    found: dict[tuple[int, int, int], tuple[float, float]] = {}
    for idx in range(evals.shape[0]):
        j = int(np.argmax(weights[:, idx]))
        overlap = float(weights[j, idx])
        trip = np.unravel_index(j, (n, n, n))
        occ = [0, 0, 0]
        for k in range(3):
            occ[nf.mode_to_node[k]] = int(trip[k])
        key = (occ[0], occ[1], occ[2])
        if key not in found or found[key][1] < overlap:
            found[key] = (float(evals[idx] - evals[0]), overlap)
    return nf, found


def labeled_spectrum(params: DeviceParams) -> SpectrumReport:
    """Transition frequencies, cross-Kerr coefficients and dispersive
    shift combinations from the labeled dressed spectrum.

    States are labeled by their dominant bare product component; any
    required |m n 0> label with dominant weight under 0.5 is reported as
    an error.
    """
    nf, found = _label_eigenstates(params)
    energies: dict[tuple[int, int], float] = {}
    bad = []
    min_overlap = 1.0
    for m, n in _REQUIRED_LABELS:
        got = found.get((m, n, 0))
        if got is None:
            bad.append(f"|{m}{n}0> missing")
            continue
        energy, overlap = got
        if overlap < 0.5:
            bad.append(f"|{m}{n}0> overlap {overlap:.3f}")
            continue
        energies[(m, n)] = energy
        min_overlap = min(min_overlap, overlap)
    if bad:
        raise LabelingError("ambiguous dressed-state labels: " + ", ".join(bad))

    def e(m, n):
        return energies[(m, n)]

    chi = {
        (m, n): e(m, n) - e(m, 0) - e(0, n) + e(0, 0)
        for m, n in [(1, 1), (2, 1), (1, 2), (2, 2)]
    }
    # invert the monomial table m**j n**k over the four shifts:
    coeffs = np.array(
        [[1, 1, 1, 1], [2, 4, 2, 4], [2, 2, 4, 4], [4, 8, 8, 16]], dtype=float
    )
    rhs = np.array([chi[(1, 1)], chi[(2, 1)], chi[(1, 2)], chi[(2, 2)]])
    j11, j21, j12, j22 = np.linalg.solve(coeffs, rhs) * 1e6

    zz = {}
    for name, (pair_a, pair_b) in _ZZ_DEFS.items():
        (a1, a2), (b1, b2) = pair_a, pair_b
        zz[name] = (e(*a1) - e(*a2)) * 1e6 - (e(*b1) - e(*b2)) * 1e6

    coupler_mode = nf.mode_to_node.index(2)
    return SpectrumReport(
        flux=params.flux,
        n_levels=params.n_levels,
        energies=energies,
        w01_q1=e(1, 0) - e(0, 0),
        w12_q1=e(2, 0) - e(1, 0),
        w01_q2=e(0, 1) - e(0, 0),
        w12_q2=e(0, 2) - e(0, 1),
        j11=float(j11),
        j21=float(j21),
        j12=float(j12),
        j22=float(j22),
        zz=zz,
        coupler_ghz=float(nf.mode_freqs[coupler_mode]),
        min_overlap=min_overlap,
        sweet_spot=(params.flux == 0.0),
    )


def flux_sweep(params: DeviceParams, flux_grid) -> list[SpectrumReport]:
    """labeled_spectrum at each grid point, in grid order."""
    return [labeled_spectrum(params.with_flux(f)) for f in np.asarray(flux_grid, dtype=float)]


SWEEP_CSV_HEADER = "flux,w01_q1,w12_q1,w01_q2,w12_q2,J11,J21,J12,J22"


def sweep_to_csv(reports: list[SpectrumReport]) -> str:
    lines = [SWEEP_CSV_HEADER]
    lines.extend(r.to_row() for r in reports)
    return "\n".join(lines) + "\n"


def toy_couplings(params: DeviceParams, flux: float | None = None) -> tuple[float, float]:
    """Closed-form coupling rates of the adiabatic toy model, in MHz.

    g1 is the junction-mediated rate, suppressed by the coupler energy;
    g2 is the capacitive rate. Frequencies come from the labeled
    spectrum at the same bias.
    """
    p = params if flux is None else params.with_flux(flux)
    denominator = p.e_jc * p.squid_cos()
    if denominator <= 0.0:
        raise FluxRangeError(f"coupler energy nonpositive at flux {p.flux}")
    if p.e_j1 == 0.0 or p.e_j2 == 0.0:
        # a junctionless transmon is a free mode at zero frequency, so
        # the sqrt(w1 w2) factor kills both rates
        return (0.0, 0.0)
    report = labeled_spectrum(p)
    w_product = math.sqrt(report.w01_q1 * report.w01_q2)
    g1_ghz = math.sqrt(p.e_j1 * p.e_j2) / (2.0 * denominator) * w_product
    if p.c_q12 <= 0.0:
        raise DeviceModelError("capacitive rate needs a positive bridge capacitance")
    g2_ghz = math.sqrt(p.c_q1 * p.c_q2) / (2.0 * p.c_q12) * w_product
    return (g1_ghz * 1e3, g2_ghz * 1e3)

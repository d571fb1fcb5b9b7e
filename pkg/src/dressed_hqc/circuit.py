"""Circuit parameters of the three-resonator cell with a grounding SQUID.

Inputs are SI (H/m, F/m, m, A, F; flux biases as fractions of the flux
quantum Phi0 = h/2e). Outputs are angular frequencies in rad/ns like the
rest of the package. Rms flux fluctuations ``phi`` are dimensionless, in
units of Phi0 (the device defaults are taken as inputs).

The SQUID Josephson energy is E_J0 cos(pi Phi_ext / Phi0).
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np
from scipy.constants import e, hbar, physical_constants

from .units import TWO_PI

FLUX_QUANTUM = physical_constants["mag. flux quantum"][0]  # h / 2e in Wb
REDUCED_FLUX_QUANTUM = hbar / (2.0 * e)

PAIRS = ((1, 2), (1, 3), (2, 3))


def _rad_per_ns(omega_si: float) -> float:
    return float(omega_si * 1e-9)


def _require_positive(**values):
    for name, value in values.items():
        if not np.all(np.asarray(value) > 0):
            raise ValueError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class DeviceSpec:
    """Resonator lines and grounding SQUID of one cell (representative values by default)."""

    l: float = 4.1e-7
    c: float = 1.6e-10
    lengths: tuple[float, float, float] = (10.2e-3, 8.5e-3, 9.57e-3)
    I_J0: float = 46e-6
    dc_bias: float = 0.43
    C_J: float = 0.5e-12
    ac_amplitudes: dict = field(default_factory=lambda: {(1, 3): 0.0153, (2, 3): 0.0166})
    phi_rms: tuple[float, float, float] = (3.6e-3, 3.4e-3, 3.1e-3)

    def __post_init__(self):
        _require_positive(l=self.l, c=self.c, lengths=self.lengths, I_J0=self.I_J0, C_J=self.C_J)
        _require_positive(dc_bias=self.dc_bias, phi_rms=self.phi_rms)
        _require_positive(ac_amplitudes=list(self.ac_amplitudes.values()))

    def warnings(self) -> list[str]:
        out = []
        for pair, amplitude in sorted(self.ac_amplitudes.items()):
            if amplitude > 0.1 * self.dc_bias:
                out.append(
                    f"ac amplitude {amplitude:g} Phi0 on pair {pair} exceeds 10% of the dc bias "
                    f"{self.dc_bias:g} Phi0; the linear flux expansion is questionable"
                )
        return out


def tlr_eigenfrequency(l: float, c: float, L: float) -> float:
    """Half-wavelength mode pi / (L sqrt(l c)) of a line of length L, in rad/ns."""
    _require_positive(l=l, c=c, L=L)
    return _rad_per_ns(np.pi / (L * np.sqrt(l * c)))


def josephson_energy(I_J0: float) -> float:
    """E_J0 = I_J0 Phi0 / 2pi expressed as an angular frequency E_J0/hbar (rad/ns)."""
    _require_positive(I_J0=I_J0)
    return _rad_per_ns(I_J0 * FLUX_QUANTUM / (TWO_PI * hbar))


def josephson_inductance(I_J: float, dc_bias: float) -> float:
    """L_J = Phi0 / (2 pi I_J cos(pi dc_bias)) in H."""
    cos = np.cos(np.pi * dc_bias)
    if abs(cos) < 1e-12:
        raise ValueError(f"dc bias {dc_bias} switches the SQUID off; the Josephson inductance diverges")
    return FLUX_QUANTUM / (TWO_PI * I_J * cos)


def plasma_frequency(I_J: float, C_J: float, dc_bias: float = 0.0) -> float:
    """omega_p = 1 / sqrt(L_J C_J) in rad/ns."""
    _require_positive(I_J=I_J, C_J=C_J)
    return _rad_per_ns(1.0 / np.sqrt(josephson_inductance(I_J, dc_bias) * C_J))


def dc_mixing(phi_m: float, phi_n: float, E_J0: float, dc_bias: float) -> float:
    """Static mode mixing phi_m phi_n E_J0 cos(pi dc_bias) (rad/ns)."""
    return float(phi_m * phi_n * E_J0 * np.cos(np.pi * dc_bias))


def fourth_order_term(phi: float, E_J0: float, dc_bias: float) -> float:
    """Quartic correction phi^4 E_J0 cos(pi dc_bias) / 48 (rad/ns)."""
    return float(phi**4 * E_J0 * np.cos(np.pi * dc_bias) / 48.0)


def fourth_order_ratio(phi: float, dc_bias: float, E_J0: float = 1.0) -> float:
    """Quartic term relative to the quadratic mixing it corrects, = phi^2 / 48."""
    quadratic = dc_mixing(phi, phi, E_J0, dc_bias)
    if quadratic == 0.0 or abs(np.cos(np.pi * dc_bias)) < 1e-12:
        raise ValueError("the quadratic coupling vanishes at this bias; the ratio is undefined")
    return fourth_order_term(phi, E_J0, dc_bias) / quadratic


def parametric_hopping(phi_m: float, phi_n: float, E_J0: float, dc_bias: float, ac_amplitude: float) -> float:
    """Hopping amplitude T_mn of a_m^dag a_n induced by a resonant flux tone (rad/ns).

    A tone ac_amplitude cos(w t) (fraction of Phi0) modulates
    E_J0 cos(pi Phi / Phi0) by -pi ac_amplitude sin(pi dc_bias) E_J0 cos(w t).
    Acting on (1/4)[sum_m phi_m (a_m + a_m^dag)]^2, the m != n cross term
    appears twice and the co-rotating half of the cosine keeps 1/2, so

        T_mn = (pi / 4) ac_amplitude sin(pi dc_bias) phi_m phi_n E_J0.

    For dressed states the hopping amplitude of the resonator photon is
    shared between |-> and |+>, which is compensated by doubling the tone.
    """
    return float(0.25 * np.pi * ac_amplitude * np.sin(np.pi * dc_bias) * phi_m * phi_n * E_J0)


def estimate_phi_rms(l: float, c: float, L: float, I_J0: float, dc_bias: float) -> float:
    """Rough rms flux across the SQUID for the half-wave mode of one line.

    The mode flux sqrt(hbar / 2 c omega) sqrt(2/L) sin(pi x / L) carries a
    current (pi / L) sqrt(2/L) sqrt(hbar / 2 c omega) / l at the shorted end;
    the SQUID drops L_J times that current. Returned in units of hbar/2e.
    Only the order of magnitude is meaningful.
    """
    _require_positive(l=l, c=c, L=L, I_J0=I_J0)
    omega = np.pi / (L * np.sqrt(l * c))
    zero_point = np.sqrt(hbar / (2.0 * c * omega)) * np.sqrt(2.0 / L)
    current = zero_point * (np.pi / L) / l
    return float(josephson_inductance(I_J0, dc_bias) * current / REDUCED_FLUX_QUANTUM)


@dataclass(frozen=True)
class DerivedCellParams:
    omega_c: tuple[float, float, float]
    phi_rms: tuple[float, float, float]
    phi_rms_estimated: tuple[float, float, float]
    E_J0: float
    J_dc: dict
    T_ac: dict
    omega_p: float
    delta_c: float
    fourth_order_ratio: float
    checks: dict
    warnings: tuple[str, ...] = ()


def derive_cell_params(device: DeviceSpec | None = None) -> DerivedCellParams:
    """Evaluate the full parameter chain for one cell and its validity checks.

    ``delta_c`` is the spacing omega_c3 - omega_c1 of the two closest lines.
    The mixing of each pair is compared with one seventh of that pair's own
    frequency spacing.
    """
    device = DeviceSpec() if device is None else device
    omega_c = tuple(tlr_eigenfrequency(device.l, device.c, L) for L in device.lengths)
    E_J0 = josephson_energy(device.I_J0)
    phi = device.phi_rms
    estimated = tuple(estimate_phi_rms(device.l, device.c, L, device.I_J0, device.dc_bias) for L in device.lengths)
    J_dc = {(m, n): dc_mixing(phi[m - 1], phi[n - 1], E_J0, device.dc_bias) for m, n in PAIRS}
    T_ac = {
        pair: parametric_hopping(phi[pair[0] - 1], phi[pair[1] - 1], E_J0, device.dc_bias, amplitude)
        for pair, amplitude in sorted(device.ac_amplitudes.items())
    }
    omega_p = plasma_frequency(device.I_J0, device.C_J, device.dc_bias)
    delta_c = abs(omega_c[2] - omega_c[0])
    ratio = max(fourth_order_ratio(p, device.dc_bias, E_J0) for p in phi)
    checks = {
        "J_dc_13_below_delta_c_over_7": J_dc[(1, 3)] < delta_c / 7.0,
        "J_dc_below_pair_spacing_over_7": all(
            J_dc[(m, n)] < abs(omega_c[m - 1] - omega_c[n - 1]) / 7.0 for m, n in PAIRS
        ),
        "plasma_frequency_ratio_above_10": omega_p / delta_c > 10.0,
        "fourth_order_ratio_below_1e-5": ratio < 1e-5,
        "all_positive_finite": all(
            np.isfinite(v) and v > 0
            for v in (*omega_c, *estimated, E_J0, omega_p, delta_c, ratio, *J_dc.values(), *T_ac.values())
        ),
    }
    checks = {name: bool(value) for name, value in checks.items()}
    return DerivedCellParams(
        omega_c, tuple(phi), estimated, E_J0, J_dc, T_ac, omega_p, delta_c, ratio, checks, tuple(device.warnings())
    )


def scaling_check(E_J0_values, device: DeviceSpec | None = None, pair: tuple[int, int] = (1, 3)):
    """Mixing strength along a sweep of the maximal Josephson energy.

    The rms fluxes follow the shorted-end estimate, phi proportional to L_J,
    i.e. to 1/E_J0, normalised so the device's own E_J0 reproduces its
    ``phi_rms``. Returns ``(table, slope)`` where ``table`` rows are
    (E_J0, J_dc) in rad/ns and ``slope`` is the log-log regression slope.
    """
    device = DeviceSpec() if device is None else device
    values = np.asarray(E_J0_values, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise ValueError("the sweep needs at least two E_J0 values")
    if np.any(values <= 0) or np.any(np.diff(values) <= 0):
        raise ValueError("the sweep must be positive and strictly increasing")
    m, n = pair
    E_ref = josephson_energy(device.I_J0)
    reference = [estimate_phi_rms(device.l, device.c, device.lengths[k - 1], device.I_J0, device.dc_bias) for k in pair]
    rows = []
    for E in values:
        I_J0 = device.I_J0 * E / E_ref
        scale = [
            estimate_phi_rms(device.l, device.c, device.lengths[k - 1], I_J0, device.dc_bias) / ref
            for k, ref in zip(pair, reference)
        ]
        phi_m = device.phi_rms[m - 1] * scale[0]
        phi_n = device.phi_rms[n - 1] * scale[1]
        rows.append((E, dc_mixing(phi_m, phi_n, E, device.dc_bias)))
    table = np.array(rows)
    slope = float(np.polyfit(np.log(table[:, 0]), np.log(table[:, 1]), 1)[0])
    return table, slope

"""Transverse dynamics: exact mode decomposition and real-space solvers.

Two complementary routes:

* run_cycle_quasi1d - for a homogeneous control field the transverse
  Fourier modes decouple exactly: rescaling the coherence by e^(gamma t)
  with gamma = D k_perp^2 maps every mode onto the same 1D problem, so a
  single longitudinal solve serves all modes and each one just carries
  the decay e^(-gamma (2 t + t_hold)) at read offset t.

* run_cycle_realspace - for a transversely varying control field the
  columns stop being equivalent (local Rabi frequency shifts both the
  coupling and the two-photon detuning), so the cycle is stepped on an
  explicit transverse grid: transverse diffusion half-steps around the
  longitudinal split step of solver1d, applied column by column.  An
  axisymmetric problem runs on a radial finite-volume grid (conservative
  Crank-Nicolson diffusion); the general case runs on a Cartesian grid
  with spectral transverse diffusion.

Beam observables (intensity profile, fitted width, spin-wave phase maps,
effective diffusion rate) are extracted from the records here as well.
Diffraction is neglected throughout: the field propagates along z only,
which is what decouples the columns.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import fft2, ifft2
from scipy.linalg import solve_banded
from scipy.optimize import curve_fit

from .model import (
    ParameterError,
    PhysicalParams,
    StorageProtocol,
    derive_groups,
    stark_residual,
)
from .pulses import ControlProfile, SignalSpec, control_rabi, sample_temporal, sample_transverse
from .solver1d import (
    CycleRecord,
    Grid1D,
    StepKernels,
    _check_guard,
    advance_step,
    run_cycle,
    slave_field,
)

_PHASES = ("write", "hold", "read")


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------


def _edge_amplitude_ok(values: np.ndarray, threshold: float = 1e-6) -> bool:
    """True when the outermost samples stay below threshold * peak."""
    peak = float(np.max(np.abs(values)))
    if peak == 0.0:
        return True
    edge = max(
        float(np.max(np.abs(values[0]))),
        float(np.max(np.abs(values[-1]))),
        float(np.max(np.abs(values[..., 0]))),
        float(np.max(np.abs(values[..., -1]))),
    )
    return edge <= threshold * peak


@dataclass(frozen=True, eq=False)
class ModeGrid:
    """Square transverse Fourier grid for the quasi-1D decomposition."""

    x: np.ndarray
    y: np.ndarray
    kx: np.ndarray
    ky: np.ndarray
    window: float

    @classmethod
    def build(
        cls,
        waist: float,
        mode: tuple[int, int] = (0, 0),
        n: int = 64,
        window_factor: float = 8.0,
    ) -> "ModeGrid":
        """Grid sized for a given beam: window >= 6 waists, spectrum resolved.

        Raises when the sampled mode does not decay to 1e-6 of its peak at
        both the window edge and the Nyquist edge of the k grid.
        """
        if window_factor < 6.0:
            raise ParameterError("transverse window must span at least 6 waists")
        if n < 8 or n % 2:
            raise ParameterError("transverse grid size must be an even number >= 8")
        window = window_factor * waist
        dx = window / n
        axis = (np.arange(n) - n // 2) * dx
        k_axis = 2.0 * math.pi * np.fft.fftfreq(n, dx)
        probe = SignalSpec(
            amplitude=1.0, t_width=1.0, t_lead=0.0, waist=waist, mode=mode
        )
        samples = sample_transverse(probe, axis[:, None], axis[None, :])
        if not _edge_amplitude_ok(samples):
            raise ParameterError(
                "transverse window too small for mode %r (edge amplitude above "
                "1e-6 of peak); increase window_factor" % (mode,)
            )
        spectrum = np.fft.fftshift(fft2(samples))
        if not _edge_amplitude_ok(spectrum):
            raise ParameterError(
                "transverse grid too coarse for mode %r (spectrum not resolved "
                "to 1e-6 at Nyquist); increase n" % (mode,)
            )
        return cls(x=axis, y=axis, kx=k_axis, ky=k_axis, window=window)

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    def k_squared(self) -> np.ndarray:
        """kx^2 + ky^2 mesh in FFT order."""
        return self.kx[:, None] ** 2 + self.ky[None, :] ** 2


@dataclass(frozen=True, eq=False)
class TransverseGrid:
    """Real-space transverse grid: radial (axisymmetric) or Cartesian.

    Radial grids are staggered, r_j = (j + 1/2) dr, which gives the
    finite-volume diffusion operator its natural no-flux condition at the
    axis and makes every cell weight 2 pi r_j dr.
    """

    kind: str
    r: np.ndarray
    dr: float
    x: np.ndarray | None = None
    y: np.ndarray | None = None

    @classmethod
    def radial(
        cls, waist: float, n_r: int = 96, window_factor: float = 8.0
    ) -> "TransverseGrid":
        if window_factor < 6.0:
            raise ParameterError("transverse window must span at least 6 waists")
        if n_r < 8:
            raise ParameterError("radial grid needs at least 8 cells")
        window = window_factor * waist
        dr = window / n_r
        r = (np.arange(n_r) + 0.5) * dr
        return cls(kind="radial", r=r, dr=dr)

    @classmethod
    def cartesian(
        cls, waist: float, n: int = 64, window_factor: float = 8.0
    ) -> "TransverseGrid":
        if window_factor < 6.0:
            raise ParameterError("transverse window must span at least 6 waists")
        if n < 8 or n % 2:
            raise ParameterError("cartesian grid size must be an even number >= 8")
        window = window_factor * waist
        dx = window / n
        axis = (np.arange(n) - n // 2) * dx
        r = np.sqrt(axis[:, None] ** 2 + axis[None, :] ** 2).ravel()
        return cls(kind="cartesian", r=r, dr=dx, x=axis, y=axis)

    @property
    def n_cols(self) -> int:
        return self.r.size

    @property
    def weights(self) -> np.ndarray:
        """Transverse quadrature weight of each column (area element)."""
        if self.kind == "radial":
            return 2.0 * math.pi * self.r * self.dr
        return np.full(self.n_cols, self.dr * self.dr)


# ---------------------------------------------------------------------------
# quasi-1D decomposition (homogeneous control)
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class Quasi1DRecord:
    """One shared 1D cycle plus per-mode transverse decay factors.

    The mode with transverse wavenumber k_perp sees the shared output
    scaled by exp(-gamma (2 t + t_hold)), gamma = D k_perp^2, t the read
    offset; everything else is the mode amplitude.  Efficiencies follow by
    quadrature over the mode spectrum, in k space directly or in real
    space via the inverse transform (the two agree by Parseval).
    """

    base: CycleRecord
    mode_grid: ModeGrid
    mode_amp: np.ndarray
    gamma: np.ndarray

    @property
    def read_offsets(self) -> np.ndarray:
        return self.base.t_out - self.base.protocol.t_hold

    def perp_factor(self, gamma) -> np.ndarray:
        """Transverse decay factor for one gamma over the read window."""
        t = self.read_offsets
        return np.exp(-np.asarray(gamma) * (2.0 * t + self.base.protocol.t_hold))

    def f_out_mode(self, i: int, j: int) -> np.ndarray:
        """Output field record of mode (kx[i], ky[j])."""
        return self.base.f_out * (self.mode_amp[i, j] * self.perp_factor(self.gamma[i, j]))

    def _spectral_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Unique gamma values and their spectral weights sum |amp|^2."""
        gam = self.gamma.ravel()
        weight = np.abs(self.mode_amp.ravel()) ** 2
        uniq, inverse = np.unique(gam, return_inverse=True)
        sums = np.zeros(uniq.size)
        np.add.at(sums, inverse, weight)
        return uniq, sums

    def efficiency_kspace(self) -> float:
        """Cycle efficiency by quadrature over the mode spectrum."""
        uniq, weight = self._spectral_weights()
        out_t = np.abs(self.base.f_out) ** 2
        factors = np.exp(
            -2.0 * uniq[:, None] * (2.0 * self.read_offsets + self.base.protocol.t_hold)
        )
        out = np.trapezoid(factors * out_t, self.base.t_out, axis=-1)
        total_out = float(np.sum(weight * out))
        total_in = float(np.sum(weight)) * self.base.input_energy
        return total_out / total_in

    def efficiency_realspace(self) -> float:
        """Same efficiency via the inverse transform (Parseval route)."""
        dx = self.mode_grid.dx
        spec = self.mode_amp[..., None] * np.exp(
            -self.gamma[..., None]
            * (2.0 * self.read_offsets + self.base.protocol.t_hold)
        )
        # (n, n, nt) transverse profile factors; recombine with f_out(t)
        fields = ifft2(spec, axes=(0, 1)) / dx**2
        out_sq = np.abs(fields) ** 2 * np.abs(self.base.f_out) ** 2
        per_cell = np.trapezoid(out_sq, self.base.t_out, axis=-1)
        total_out = float(np.sum(per_cell)) * dx**2
        profile = ifft2(self.mode_amp) / dx**2
        total_in = (
            float(np.sum(np.abs(profile) ** 2)) * dx**2 * self.base.input_energy
        )
        return total_out / total_in

    def intensity_realspace(self) -> tuple[np.ndarray, np.ndarray]:
        """Time-integrated output intensity I(x, y) on the real-space grid."""
        spec = self.mode_amp[..., None] * np.exp(
            -self.gamma[..., None]
            * (2.0 * self.read_offsets + self.base.protocol.t_hold)
        )
        # ifft2 undoes the forward transform of the centred samples, so the
        # result is indexed by the grid axes directly (no shift needed)
        fields = ifft2(spec, axes=(0, 1)) / self.mode_grid.dx**2
        out_sq = np.abs(fields) ** 2 * np.abs(self.base.f_out) ** 2
        return self.mode_grid.x, np.trapezoid(out_sq, self.base.t_out, axis=-1)


def run_cycle_quasi1d(
    params: PhysicalParams,
    protocol: StorageProtocol,
    signal: SignalSpec,
    grid: ModeGrid,
    control: ControlProfile | None = None,
    **solver_kwargs,
) -> Quasi1DRecord:
    """Full 3D cycle for a homogeneous control via one 1D solve.

    The tilded longitudinal system is identical for every transverse
    Fourier mode, so exactly one solver1d cycle is run; each mode then
    carries its own decay factor.  A transversely varying control breaks
    the equivalence; such profiles must go through run_cycle_realspace.
    """
    if control is not None and not control.is_homogeneous:
        raise ParameterError(
            "quasi-1D decomposition requires a homogeneous control; "
            "use run_cycle_realspace for a gaussian control beam"
        )
    base = run_cycle(params, protocol, signal, **solver_kwargs)
    samples = sample_transverse(signal, grid.x[:, None], grid.y[None, :])
    mode_amp = fft2(samples) * grid.dx * grid.dx
    gamma = params.diffusivity * grid.k_squared()
    return Quasi1DRecord(base=base, mode_grid=grid, mode_amp=mode_amp, gamma=gamma)


# ---------------------------------------------------------------------------
# real-space transverse solver (inhomogeneous control)
# ---------------------------------------------------------------------------


class _RadialDiffusion:
    """Conservative Crank-Nicolson half-step for radial diffusion.

    Finite-volume discretization of (1/r) d/dr (r d/dr) on the staggered
    grid; no-flux at the axis (built in by r_{-1/2} = 0) and at the outer
    edge.  Unconditionally stable; second order in dr and dt.
    """

    def __init__(self, grid: TransverseGrid, diffusivity: float, dt_half: float):
        n = grid.n_cols
        r = grid.r
        dr = grid.dr
        lower_face = r - 0.5 * dr
        upper_face = r + 0.5 * dr
        lower_face[0] = 0.0
        a = lower_face / (r * dr * dr)
        c = upper_face / (r * dr * dr)
        c[-1] = 0.0
        coef = 0.5 * diffusivity * dt_half
        self._a = coef * a
        self._c = coef * c
        self._band = np.zeros((3, n), dtype=complex)
        self._band[0, 1:] = -self._c[:-1]
        self._band[1, :] = 1.0 + self._a + self._c
        self._band[2, :-1] = -self._a[1:]

    def apply(self, sigma: np.ndarray) -> np.ndarray:
        """One half-step on sigma of shape (n_r, n_z)."""
        rhs = (1.0 - self._a - self._c)[:, None] * sigma
        rhs[1:] += self._a[1:, None] * sigma[:-1]
        rhs[:-1] += self._c[:-1, None] * sigma[1:]
        return solve_banded((1, 1), self._band, rhs)


class _CartesianDiffusion:
    """Spectral transverse diffusion half-step on the Cartesian grid."""

    def __init__(self, grid: TransverseGrid, diffusivity: float, dt_half: float):
        n = grid.x.size
        kx = 2.0 * math.pi * np.fft.fftfreq(n, grid.dr)
        k_sq = kx[:, None] ** 2 + kx[None, :] ** 2
        self._n = n
        self._kernel = np.exp(-diffusivity * k_sq * dt_half)[..., None]

    def apply(self, sigma: np.ndarray) -> np.ndarray:
        """One half-step on sigma of shape (n_x * n_y, n_z)."""
        n = self._n
        cube = sigma.reshape(n, n, -1)
        cube = ifft2(fft2(cube, axes=(0, 1)) * self._kernel, axes=(0, 1))
        return cube.reshape(sigma.shape)


@dataclass(eq=False)
class RealspaceRecord:
    """Record of a transverse real-space cycle.

    Fields are sampled at the medium exit face per transverse column;
    intensity is the time-integrated |f_out|^2 per column.  Coherence
    snapshots have shape (n_cols, n_z) in the solver frame.
    """

    params: PhysicalParams
    protocol: StorageProtocol
    signal: SignalSpec
    control: ControlProfile
    grid: Grid1D
    tgrid: TransverseGrid
    t_out: np.ndarray
    f_out: np.ndarray | None
    intensity: np.ndarray
    intensity_in: np.ndarray
    input_energy: float
    output_energy: float
    sigma_frames: list[tuple[float, np.ndarray]] = field(default_factory=list)
    guard_ratio: dict[str, float] = field(default_factory=dict)

    @property
    def efficiency(self) -> float:
        if self.input_energy == 0.0:
            raise ParameterError("cycle recorded no input energy")
        return self.output_energy / self.input_energy


def run_cycle_realspace(
    params: PhysicalParams,
    protocol: StorageProtocol,
    signal: SignalSpec,
    control: ControlProfile,
    tgrid: TransverseGrid,
    *,
    n_medium: int = 192,
    pad_fraction: float = 0.25,
    steps_per_width: float = 64.0,
    dt: float | None = None,
    t_read: float | None = None,
    diffusion_phases: tuple[str, ...] = _PHASES,
    sigma_times=(),
    guard_threshold: float = 1e-4,
    store_fields: bool | None = None,
) -> RealspaceRecord:
    """Full cycle on an explicit transverse grid with a local control field.

    Per step: transverse diffusion half-step, longitudinal split step with
    column-local coupling and light shift, transverse half-step.  The
    radial grid requires an axisymmetric input mode; Cartesian grids take
    any mode.  A coherence snapshot at mid-hold is always recorded (the
    phase-map extraction needs it); extra snapshot times may be requested.
    """
    for name in diffusion_phases:
        if name not in _PHASES:
            raise ParameterError("unknown diffusion phase %r" % (name,))
    if tgrid.kind == "radial" and signal.mode != (0, 0):
        raise ParameterError(
            "radial grid is restricted to the axisymmetric (0,0) mode; "
            "use a cartesian grid for mode %r" % (signal.mode,)
        )
    if abs(control.rabi_peak - params.rabi_control) > 1e-9 * abs(params.rabi_control):
        raise ParameterError(
            "control.rabi_peak must match params.rabi_control (the light-shift "
            "bias and far-detuning checks are anchored to it)"
        )
    derive_groups(params, protocol, signal)

    grid = Grid1D.build(params.half_length, n_medium, pad_fraction)
    k_matched = params.k_matched
    density = params.density
    light_speed = params.light_speed
    face_phase = cmath.exp(1j * params.dispersion_shift * params.half_length)

    dt0 = dt if dt is not None else signal.t_width / steps_per_width
    t_write_len = protocol.write_window(signal)
    t_read_len = t_read if t_read is not None else t_write_len
    if store_fields is None:
        store_fields = tgrid.kind == "radial"

    # column-local control: Rabi frequency, coupling, light-shift residual
    rabi_cols = control_rabi(control, tgrid.r)[:, None]
    g_eff_cols = params.coupling_g * rabi_cols / params.detuning
    res_on_cols = stark_residual(params, rabi_cols)
    res_off = stark_residual(params, 0.0)

    if tgrid.kind == "radial":
        profile = sample_transverse(signal, tgrid.r[:, None], np.zeros((1, 1)))[:, 0]
    else:
        profile = sample_transverse(
            signal, tgrid.x[:, None], tgrid.y[None, :]
        ).ravel()
    profile = profile[:, None]

    sigma = np.zeros((tgrid.n_cols, grid.n_z), dtype=complex)

    snap_times = sorted(set(float(t) for t in sigma_times) | {protocol.flip_time()})
    snap_frames: list[tuple[float, np.ndarray]] = []

    weights = tgrid.weights
    intensity = np.zeros(tgrid.n_cols)
    out_rows: list[np.ndarray] = []
    out_times: list[float] = []
    energy_out = 0.0
    guard: dict[str, float] = {}

    def fin_write(t: float):
        return face_phase * complex(sample_temporal(signal, t)) * profile

    def fin_zero(t: float):
        return 0.0j

    state = {"prev_t": None, "prev_row": None}

    def record_read(t: float, exit_field: np.ndarray) -> None:
        nonlocal energy_out
        row_sq = np.abs(exit_field) ** 2
        if state["prev_t"] is not None and t > state["prev_t"]:
            panel = 0.5 * (t - state["prev_t"]) * (row_sq + state["prev_row"])
            intensity[:] += panel
            energy_out += float(np.sum(weights * panel))
        state["prev_t"] = t
        state["prev_row"] = row_sq
        if store_fields:
            out_times.append(t)
            out_rows.append(exit_field.copy())

    def advance_span(t0, duration, eta, drive_on, res_cols, fin_fn, use_diff, on_read):
        nonlocal sigma
        pending = [s for s in snap_times if t0 < s <= t0 + duration + 1e-15 * max(1.0, abs(t0))]
        trans_active = use_diff and params.diffusivity > 0.0
        exact_ok = (not drive_on) and eta == 0.0
        if exact_ok:
            # longitudinal part is exact at any step size; the transverse
            # Crank-Nicolson is not, so sub-step it when diffusion is on
            cuts = [t0] + [s for s in pending if t0 < s < t0 + duration] + [t0 + duration]
            plan = [
                (
                    cuts[i],
                    cuts[i + 1] - cuts[i],
                    max(1, math.ceil((cuts[i + 1] - cuts[i]) / dt0))
                    if trans_active
                    else 1,
                )
                for i in range(len(cuts) - 1)
            ]
        else:
            n_steps = max(1, math.ceil(duration / dt0))
            plan = [(t0, duration, n_steps)]

        for start, span, n_steps in plan:
            step = span / n_steps
            kern = StepKernels.build(
                grid, step, eta, params.diffusivity, k_matched, use_diff
            )
            trans = None
            if trans_active:
                if tgrid.kind == "radial":
                    trans = _RadialDiffusion(tgrid, params.diffusivity, 0.5 * step)
                else:
                    trans = _CartesianDiffusion(tgrid, params.diffusivity, 0.5 * step)
            res_full = np.exp(-1j * res_cols * step)
            res_half = np.exp(-1j * res_cols * (0.5 * step))
            t = start
            if on_read and state["prev_t"] is None:
                e = slave_field(sigma, grid, g_eff_cols, density, light_speed, fin_fn(t))
                record_read(t, face_phase * e[:, grid.i_right])
            for j in range(n_steps):
                if trans is not None:
                    sigma = trans.apply(sigma)
                sigma = advance_step(
                    sigma,
                    kern,
                    grid,
                    coupling_eff=g_eff_cols,
                    res_full=res_full,
                    res_half=res_half,
                    fin_now=fin_fn(t),
                    fin_mid=fin_fn(t + 0.5 * step),
                    drive_on=drive_on,
                    density=density,
                    light_speed=light_speed,
                )
                if trans is not None:
                    sigma = trans.apply(sigma)
                t = start + (j + 1) * step
                while pending and pending[0] <= t + 1e-15 * max(1.0, abs(t)):
                    pending.pop(0)
                    snap_frames.append((t, sigma.copy()))
                if on_read:
                    e = slave_field(
                        sigma, grid, g_eff_cols, density, light_speed, fin_fn(t)
                    )
                    record_read(t, face_phase * e[:, grid.i_right])

    # -- write -----------------------------------------------------------
    advance_span(
        -t_write_len,
        t_write_len,
        protocol.eta_write,
        True,
        res_on_cols,
        fin_write,
        "write" in diffusion_phases,
        False,
    )
    peak_ref = float(np.max(np.abs(sigma)))
    guard["write"] = _check_guard(sigma, grid, guard_threshold, "write", peak_ref)

    # -- hold ------------------------------------------------------------
    if protocol.t_hold > 0.0:
        drive_hold = protocol.control_on_hold
        res_hold = res_on_cols if drive_hold else np.full_like(res_on_cols, res_off)
        use_diff_hold = "hold" in diffusion_phases
        if protocol.eta_hold != 0.0:
            flip = protocol.flip_time()
            spans = [
                (0.0, flip, protocol.eta_hold),
                (flip, protocol.t_hold - flip, -protocol.eta_hold),
            ]
        else:
            spans = [(0.0, protocol.t_hold, 0.0)]
        for start, span, eta_h in spans:
            if span <= 0.0:
                continue
            advance_span(
                start, span, eta_h, drive_hold, res_hold, fin_zero, use_diff_hold, False
            )
    peak_ref = max(peak_ref, float(np.max(np.abs(sigma))))
    guard["hold"] = _check_guard(sigma, grid, guard_threshold, "hold", peak_ref)

    # -- read ------------------------------------------------------------
    advance_span(
        protocol.t_hold,
        t_read_len,
        -protocol.eta_write,
        True,
        res_on_cols,
        fin_zero,
        "read" in diffusion_phases,
        True,
    )
    guard["read"] = _check_guard(sigma, grid, guard_threshold, "read", peak_ref)

    envelope_energy = float(
        np.trapezoid(
            np.abs(sample_temporal(signal, np.linspace(-t_write_len, 0.0, 2049))) ** 2,
            np.linspace(-t_write_len, 0.0, 2049),
        )
    )
    intensity_in = np.abs(profile[:, 0]) ** 2 * envelope_energy
    input_energy = float(np.sum(weights * intensity_in))

    return RealspaceRecord(
        params=params,
        protocol=protocol,
        signal=signal,
        control=control,
        grid=grid,
        tgrid=tgrid,
        t_out=np.array(out_times) if store_fields else np.array([]),
        f_out=np.array(out_rows).T if store_fields and out_rows else None,
        intensity=intensity,
        intensity_in=intensity_in,
        input_energy=input_energy,
        output_energy=energy_out,
        sigma_frames=snap_frames,
        guard_ratio=guard,
    )


# ---------------------------------------------------------------------------
# beam observables
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BeamProfile:
    """Radial intensity profile with fitted and moment widths.

    width is the scale of the fitted I0 exp(-r^2 / (2 w^2)); width_moment
    is sqrt(<r^2>/2), which equals the fitted width for an exact Gaussian.
    fit_ok is False when the least-squares fit failed to converge, in
    which case width falls back to the moment value.
    """

    r: np.ndarray
    intensity: np.ndarray
    width: float
    width_moment: float
    fit_residual: float
    fit_ok: bool
    asymmetry: float | None = None


def _radial_profile(record: RealspaceRecord) -> tuple[np.ndarray, np.ndarray, float | None]:
    """Column intensities mapped to radius; asymmetry norm on 2D grids."""
    if record.tgrid.kind == "radial":
        return record.tgrid.r, record.intensity, None
    n = record.tgrid.x.size
    image = record.intensity.reshape(n, n)
    peak = float(np.max(image))
    asym = 0.0
    if peak > 0.0:
        # x -> -x on the centred even grid is flip plus one-cell roll (the
        # axis runs -n/2 .. n/2 - 1; the domain is periodic for the
        # spectral transverse step, so the wrap is exact)
        for other in (
            image.T,
            np.roll(image[::-1, :], 1, axis=0),
            np.roll(image[:, ::-1], 1, axis=1),
        ):
            asym = max(asym, float(np.max(np.abs(image - other))) / peak)
    return record.tgrid.r, record.intensity, asym


def intensity_and_width(record: RealspaceRecord) -> BeamProfile:
    """Fit the time-integrated output intensity to a Gaussian profile.

    Primary width from least squares on I(r) = I0 exp(-r^2/(2 w^2));
    second-moment width reported alongside as a diagnostic.  If the fit
    fails, the moment width is returned with fit_ok = False.
    """
    r, intensity, asym = _radial_profile(record)
    weights = record.tgrid.weights
    total = float(np.sum(weights * intensity))
    if total <= 0.0:
        raise ParameterError("output intensity is empty; nothing to fit")
    moment = math.sqrt(float(np.sum(weights * intensity * r**2)) / total / 2.0)

    def model(r_, i0, w):
        return i0 * np.exp(-(r_**2) / (2.0 * w**2))

    try:
        popt, _ = curve_fit(
            model,
            r,
            intensity,
            p0=(float(np.max(intensity)), moment),
            maxfev=10000,
        )
        width = abs(float(popt[1]))
        resid = intensity - model(r, *popt)
        fit_residual = float(np.sqrt(np.mean(resid**2))) / float(np.max(intensity))
        fit_ok = True
    except RuntimeError:
        width = moment
        fit_residual = math.nan
        fit_ok = False
    return BeamProfile(
        r=r,
        intensity=intensity,
        width=width,
        width_moment=moment,
        fit_residual=fit_residual,
        fit_ok=fit_ok,
        asymmetry=asym,
    )


@dataclass(frozen=True, eq=False)
class PhaseMap:
    """Spin-wave phase difference theta(r, z) at one snapshot time."""

    t: float
    r: np.ndarray
    z: np.ndarray
    theta: np.ndarray

    def at_z(self, z_value: float) -> tuple[np.ndarray, np.ndarray]:
        """theta(r) at the grid plane nearest z_value (NaN where masked)."""
        idx = int(np.argmin(np.abs(self.z - z_value)))
        return self.r, self.theta[:, idx]


def _find_frame(record: RealspaceRecord, t: float) -> np.ndarray:
    for ft, frame in record.sigma_frames:
        if abs(ft - t) <= 1e-9 * max(abs(t), 1e-12) + 1e-15:
            return frame
    raise ParameterError(
        "no coherence snapshot at t = %.6g; request it via sigma_times" % t
    )


def extract_phase(
    record_inhomo: RealspaceRecord,
    record_homo: RealspaceRecord,
    t: float | None = None,
) -> PhaseMap:
    """Phase difference of the stored spin wave, inhomogeneous minus homogeneous.

    Both records must hold coherence snapshots at the comparison time
    (default: mid-hold, which run_cycle_realspace always records).  The
    phase is unwrapped radially outward from the axis, and samples where
    either coherence falls below 1e-6 of its peak are NaN-masked.
    """
    if record_inhomo.tgrid.kind != record_homo.tgrid.kind:
        raise ParameterError("phase extraction needs records on matching grids")
    when = t if t is not None else record_inhomo.protocol.flip_time()
    sig_i = _find_frame(record_inhomo, when)
    sig_h = _find_frame(record_homo, when)
    med = record_inhomo.grid.medium
    sig_i = sig_i[:, med]
    sig_h = sig_h[:, med]
    cross = sig_i * np.conj(sig_h)
    theta = np.unwrap(np.angle(cross), axis=0)
    bad = (np.abs(sig_i) < 1e-6 * np.max(np.abs(sig_i))) | (
        np.abs(sig_h) < 1e-6 * np.max(np.abs(sig_h))
    )
    theta = np.where(bad, np.nan, theta)
    z = record_inhomo.grid.z[med]
    return PhaseMap(t=when, r=record_inhomo.tgrid.r, z=z, theta=theta)


def fit_effective_diffusion(t_holds, widths_squared) -> float:
    """Apparent diffusion rate: least-squares slope of w^2 versus hold time."""
    t_holds = np.asarray(t_holds, dtype=float)
    widths_squared = np.asarray(widths_squared, dtype=float)
    if t_holds.size < 4:
        raise ParameterError("effective-diffusion fit needs at least 4 hold times")
    slope, _ = np.polyfit(t_holds, widths_squared, 1)
    return float(slope)

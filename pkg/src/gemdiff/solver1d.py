"""Split-step integrator for the one-dimensional storage cycle.

The solver works in the frame where the field's linear dispersion phase
and the coherence's carrier oscillation are factored out: the field obeys
d_z E = i (g_eff N / c) sigma with no explicit phase factor, and the
coherence obeys

    d_t sigma = -i (eta(t) z + delta_res) sigma + i g_eff E
                + D (d_z + i k_matched)^2 sigma,

so the spectral diffusion kernel is exp(-D (q + k_matched)^2 dt) with q
the grid wavenumber (physical spin-wave wavenumber k = q + k_matched).
Physical-frame fields are recovered at the cell faces by the constant
phases exp(i dispersion_shift * half_length).

Each time step is a symmetric split: exact spectral diffusion half-steps
around a midpoint rule for the gradient rotation and the field drive.
The rotation sub-flow is exact, and the field is re-slaved to the
coherence at every evaluation (d_z E integrated from the entrance face),
so the only stepping error is the second-order midpoint error of the
drive coupling.  Phase boundaries land exactly because the step size is
re-fitted to each phase; holds with everything off are advanced in a
single exact step.

All step kernels broadcast over leading axes of sigma, with per-row
couplings and detunings passed as (..., 1) arrays; the transverse module
reuses them column by column.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import fft, ifft
from scipy.integrate import cumulative_trapezoid

from .model import (
    GuardBandError,
    ParameterError,
    PhysicalParams,
    StorageProtocol,
    derive_groups,
    stark_residual,
)
from .pulses import SignalSpec, sample_temporal

_PHASES = ("write", "hold", "read")


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Uniform z grid with the medium faces exactly on grid points.

    The medium occupies [-half_length, half_length]; the grid extends
    beyond it by a padding band on each side so the periodic spectral
    diffusion never wraps coherence back into the medium.  Grid sizes are
    powers of two for the FFT.
    """

    z: np.ndarray
    dz: float
    i_left: int
    i_right: int
    half_length: float

    @classmethod
    def build(
        cls, half_length: float, n_medium: int = 256, pad_fraction: float = 0.25
    ) -> "Grid1D":
        if n_medium < 16 or n_medium % 2:
            raise ParameterError("n_medium must be an even number >= 16")
        if pad_fraction <= 0.0:
            raise ParameterError("pad_fraction must be positive")
        dz = 2.0 * half_length / n_medium
        needed = n_medium * (1.0 + 2.0 * pad_fraction)
        n_z = 1 << max(5, math.ceil(math.log2(needed)))
        centre = n_z // 2
        z = (np.arange(n_z) - centre) * dz
        return cls(
            z=z,
            dz=dz,
            i_left=centre - n_medium // 2,
            i_right=centre + n_medium // 2,
            half_length=half_length,
        )

    @property
    def n_z(self) -> int:
        return self.z.size

    @property
    def medium(self) -> slice:
        """Index slice covering the medium, faces included."""
        return slice(self.i_left, self.i_right + 1)

    @property
    def mask(self) -> np.ndarray:
        """1.0 inside the medium, 0.0 in the padding."""
        m = np.zeros(self.n_z)
        m[self.medium] = 1.0
        return m

    @property
    def q(self) -> np.ndarray:
        """FFT wavenumbers of the grid (rad/m, unshifted order)."""
        return 2.0 * math.pi * np.fft.fftfreq(self.n_z, self.dz)

    def guard_slices(self) -> tuple[slice, slice]:
        """Outer half of each padding band, where coherence must stay tiny."""
        left_pad = self.i_left
        right_pad = self.n_z - 1 - self.i_right
        return slice(0, left_pad // 2), slice(self.n_z - right_pad // 2, self.n_z)


def slave_field(
    sigma: np.ndarray,
    grid: Grid1D,
    coupling_eff,
    density: float,
    light_speed: float,
    fin_tilde,
) -> np.ndarray:
    """Field slaved to the coherence: E(z) = fin + i (g N / c) int sigma dz'.

    The integral runs from the entrance face; the field is constant in the
    padding (fin before the medium, the exit value after it).  Per-row
    couplings and inputs broadcast over leading axes when shaped (..., 1).
    """
    cum = cumulative_trapezoid(sigma[..., grid.medium], dx=grid.dz, axis=-1, initial=0.0)
    e = np.empty(sigma.shape, dtype=complex)
    e[..., : grid.i_left] = fin_tilde
    e[..., grid.medium] = fin_tilde + 1j * (coupling_eff * density / light_speed) * cum
    e[..., grid.i_right + 1 :] = e[..., grid.i_right : grid.i_right + 1]
    return e


@dataclass(eq=False)
class StepKernels:
    """Precomputed per-phase factors for one step size."""

    dt: float
    rot_full: np.ndarray
    rot_half: np.ndarray
    diff_half: np.ndarray | None

    @classmethod
    def build(
        cls,
        grid: Grid1D,
        dt: float,
        eta: float,
        diffusivity: float,
        k_matched: float,
        use_diffusion: bool,
    ) -> "StepKernels":
        diff_half = None
        if use_diffusion and diffusivity > 0.0:
            diff_half = np.exp(-diffusivity * (grid.q + k_matched) ** 2 * (0.5 * dt))
        return cls(
            dt=dt,
            rot_full=np.exp(-1j * eta * grid.z * dt),
            rot_half=np.exp(-1j * eta * grid.z * (0.5 * dt)),
            diff_half=diff_half,
        )


def advance_step(
    sigma: np.ndarray,
    kern: StepKernels,
    grid: Grid1D,
    *,
    coupling_eff,
    res_full,
    res_half,
    fin_now,
    fin_mid,
    drive_on: bool,
    density: float,
    light_speed: float,
) -> np.ndarray:
    """One symmetric split step: diffusion half, rotation + drive, diffusion half.

    The drive uses the midpoint rule: the field is slaved once at the step
    start for the predictor and once at mid-step for the corrector.  With
    the drive off the step is a pure (exact) rotation between exact
    diffusion half-steps.
    """
    if kern.diff_half is not None:
        sigma = ifft(fft(sigma, axis=-1) * kern.diff_half, axis=-1)
    if drive_on:
        dt = kern.dt
        mask = grid.mask
        e_now = slave_field(sigma, grid, coupling_eff, density, light_speed, fin_now)
        sig_p = (kern.rot_half * res_half) * (
            sigma + (0.5 * dt) * (1j * coupling_eff) * e_now * mask
        )
        e_mid = slave_field(sig_p, grid, coupling_eff, density, light_speed, fin_mid)
        sigma = (kern.rot_full * res_full) * sigma + dt * (kern.rot_half * res_half) * (
            (1j * coupling_eff) * e_mid * mask
        )
    else:
        sigma = (kern.rot_full * res_full) * sigma
    if kern.diff_half is not None:
        sigma = ifft(fft(sigma, axis=-1) * kern.diff_half, axis=-1)
    return sigma


@dataclass(eq=False)
class CycleRecord:
    """Everything recorded from one write / hold / read cycle.

    Field samples are in the physical frame at the cell faces; coherence
    snapshots stay in the solver frame (multiply by exp(i k_matched z) via
    to_physical_frame for the lab-frame coherence).  Spectrum frames hold
    |sigma(k)|^2 on the physical wavenumber axis spectrum_k, normalisation
    arbitrary but common to all frames.
    """

    params: PhysicalParams
    protocol: StorageProtocol
    signal: SignalSpec
    grid: Grid1D
    t_write: np.ndarray
    f_in: np.ndarray
    f_trans: np.ndarray
    t_hold: np.ndarray
    f_hold_leak: np.ndarray
    t_out: np.ndarray
    f_out: np.ndarray
    sigma_end_write: np.ndarray
    sigma_end_hold: np.ndarray
    sigma_end_read: np.ndarray
    sigma_frames: list[tuple[float, np.ndarray]] = field(default_factory=list)
    spectrum_k: np.ndarray | None = None
    spectrum_frames: list[tuple[float, np.ndarray]] = field(default_factory=list)
    input_energy: float = 0.0
    transmitted_energy: float = 0.0
    output_energy: float = 0.0
    hold_leak_energy: float = 0.0
    stored_end_write: float = 0.0
    stored_end_hold: float = 0.0
    stored_end_read: float = 0.0
    guard_ratio: dict[str, float] = field(default_factory=dict)

    @property
    def echo_peak_time(self) -> float:
        """Time of the strongest output sample."""
        return float(self.t_out[np.argmax(np.abs(self.f_out))])


def efficiency_1d(record: CycleRecord) -> float:
    """Time-integrated output over input intensity of a recorded cycle."""
    if record.input_energy == 0.0:
        raise ParameterError("cycle recorded no input energy")
    return record.output_energy / record.input_energy


def to_physical_frame(sigma: np.ndarray, grid: Grid1D, k_matched: float) -> np.ndarray:
    """Lab-frame coherence sigma_12 = exp(i k_matched z) * sigma."""
    return sigma * np.exp(1j * k_matched * grid.z)


def spinwave_spectrum(
    sigma: np.ndarray, grid: Grid1D, k_matched: float
) -> tuple[np.ndarray, np.ndarray]:
    """Spin-wave power spectrum on the physical wavenumber axis.

    Returns (k, power) with k ascending; power normalisation is arbitrary
    (fixed by the grid), adequate for centroids and drift slopes.
    """
    power = np.abs(np.fft.fftshift(fft(sigma, axis=-1), axes=-1)) ** 2
    k = np.fft.fftshift(grid.q) + k_matched
    return k, power


def spectrum_centroid(k: np.ndarray, power: np.ndarray) -> float:
    """First moment of a power spectrum."""
    total = float(np.sum(power))
    if total == 0.0:
        raise ParameterError("empty spectrum has no centroid")
    return float(np.sum(k * power) / total)


class _FrameTaker:
    """Collects coherence and spectrum snapshots as step boundaries pass."""

    def __init__(self, sigma_times, spectrum_times, grid: Grid1D, k_matched: float):
        self.pending_sigma = sorted(float(t) for t in sigma_times)
        self.pending_spec = sorted(float(t) for t in spectrum_times)
        self.grid = grid
        self.k_matched = k_matched
        self.sigma_frames: list[tuple[float, np.ndarray]] = []
        self.spectrum_frames: list[tuple[float, np.ndarray]] = []

    def pending_in(self, t0: float, t1: float) -> list[float]:
        eps = 1e-12 * max(1.0, abs(t0), abs(t1))
        merged = sorted(set(self.pending_sigma) | set(self.pending_spec))
        return [t for t in merged if t0 + eps < t < t1 - eps]

    def take(self, t: float, sigma: np.ndarray) -> None:
        eps = 1e-12 * max(1.0, abs(t))
        while self.pending_sigma and self.pending_sigma[0] <= t + eps:
            self.pending_sigma.pop(0)
            self.sigma_frames.append((t, sigma.copy()))
        while self.pending_spec and self.pending_spec[0] <= t + eps:
            self.pending_spec.pop(0)
            _, power = spinwave_spectrum(sigma, self.grid, self.k_matched)
            self.spectrum_frames.append((t, power))


def _check_guard(
    sigma: np.ndarray, grid: Grid1D, threshold: float, phase: str, peak_ref: float = 0.0
) -> float:
    """Coherence at the outer padding must stay below threshold * peak.

    The reference peak is the largest coherence seen so far in the cycle;
    without it a nearly complete readout would inflate the ratio (the
    stored wave is depleted, the harmless spectral-ringing floor in the
    padding is not).
    """
    peak = max(float(np.max(np.abs(sigma))), peak_ref)
    if peak == 0.0:
        return 0.0
    left, right = grid.guard_slices()
    edge = max(
        float(np.max(np.abs(sigma[..., left]), initial=0.0)),
        float(np.max(np.abs(sigma[..., right]), initial=0.0)),
    )
    ratio = edge / peak
    if ratio > threshold:
        raise GuardBandError(
            phase,
            "coherence reached the grid padding (edge/peak %.2e > %.0e); "
            "increase pad_fraction or n_medium, or shorten the cycle" % (ratio, threshold),
        )
    return ratio


def run_cycle(
    params: PhysicalParams,
    protocol: StorageProtocol,
    signal: SignalSpec,
    *,
    n_medium: int = 256,
    pad_fraction: float = 0.25,
    steps_per_width: float = 100.0,
    dt: float | None = None,
    t_read: float | None = None,
    diffusion_phases: tuple[str, ...] = _PHASES,
    sigma_times=(),
    spectrum_times=(),
    guard_threshold: float = 1e-4,
) -> CycleRecord:
    """Integrate one full write / hold / read cycle and record it.

    The write phase covers [-t_write, 0] with the input envelope injected
    at the entrance face, the hold [0, t_hold] (gradient and control per
    the protocol), and the read [t_hold, t_hold + t_read] with the
    gradient reversed.  diffusion_phases restricts which phases see the
    diffusion operator, which isolates per-phase decay in tests; physical
    runs keep all three.

    Raises GuardBandError if coherence reaches the outer padding band.
    """
    for name in diffusion_phases:
        if name not in _PHASES:
            raise ParameterError("unknown diffusion phase %r" % (name,))
    if steps_per_width <= 0.0:
        raise ParameterError("steps_per_width must be positive")
    if dt is not None and dt <= 0.0:
        raise ParameterError("dt must be positive")

    derive_groups(params, protocol, signal)  # validates gradient and widths
    grid = Grid1D.build(params.half_length, n_medium, pad_fraction)
    g_eff = params.coupling_eff
    k_matched = params.k_matched
    density = params.density
    light_speed = params.light_speed
    face_phase = cmath.exp(1j * params.dispersion_shift * params.half_length)

    dt0 = dt if dt is not None else signal.t_width / steps_per_width
    t_write_len = protocol.write_window(signal)
    t_read_len = t_read if t_read is not None else t_write_len
    if t_read_len <= 0.0:
        raise ParameterError("t_read must be positive")

    res_on = stark_residual(params, params.rabi_control)
    res_off = stark_residual(params, 0.0)

    frames = _FrameTaker(sigma_times, spectrum_times, grid, k_matched)
    sigma = np.zeros(grid.n_z, dtype=complex)

    def fin_write(t: float) -> complex:
        return face_phase * complex(sample_temporal(signal, t))

    def advance_span(t0, duration, eta, drive_on, residual, fin_fn, use_diff, recorder):
        """Run one constant-gradient span; recorder(t, sigma, e) per boundary."""
        nonlocal sigma
        exact_ok = (not drive_on) and eta == 0.0
        if exact_ok:
            cuts = [t0] + frames.pending_in(t0, t0 + duration) + [t0 + duration]
            pieces = [(cuts[i], cuts[i + 1] - cuts[i]) for i in range(len(cuts) - 1)]
            plan = [(start, span, 1) for start, span in pieces]
        else:
            n_steps = max(1, math.ceil(duration / dt0))
            plan = [(t0, duration, n_steps)]

        first = True
        for start, span, n_steps in plan:
            step = span / n_steps
            kern = StepKernels.build(grid, step, eta, params.diffusivity, k_matched, use_diff)
            res_full = cmath.exp(-1j * residual * step)
            res_half = cmath.exp(-1j * residual * (0.5 * step))
            t = start
            if first:
                e = (
                    slave_field(sigma, grid, g_eff, density, light_speed, fin_fn(t))
                    if drive_on
                    else None
                )
                recorder(t, sigma, e)
                frames.take(t, sigma)
                first = False
            for j in range(n_steps):
                sigma = advance_step(
                    sigma,
                    kern,
                    grid,
                    coupling_eff=g_eff,
                    res_full=res_full,
                    res_half=res_half,
                    fin_now=fin_fn(t),
                    fin_mid=fin_fn(t + 0.5 * step),
                    drive_on=drive_on,
                    density=density,
                    light_speed=light_speed,
                )
                t = start + (j + 1) * step
                e = (
                    slave_field(sigma, grid, g_eff, density, light_speed, fin_fn(t))
                    if drive_on
                    else None
                )
                recorder(t, sigma, e)
                frames.take(t, sigma)

    # -- write ---------------------------------------------------------
    t_w, in_w, out_w = [], [], []

    def rec_write(t, sig, e):
        t_w.append(t)
        in_w.append(complex(sample_temporal(signal, t)))
        out_w.append(face_phase * e[grid.i_right])

    advance_span(
        -t_write_len,
        t_write_len,
        protocol.eta_write,
        True,
        res_on,
        fin_write,
        "write" in diffusion_phases,
        rec_write,
    )
    peak_ref = float(np.max(np.abs(sigma)))
    guard_write = _check_guard(sigma, grid, guard_threshold, "write", peak_ref)
    sigma_end_write = sigma.copy()

    # -- hold ----------------------------------------------------------
    t_h, out_h = [], []

    def rec_hold(t, sig, e):
        if e is not None:
            t_h.append(t)
            out_h.append(face_phase * e[grid.i_right])

    def rec_quiet(t, sig, e):
        pass

    if protocol.t_hold > 0.0:
        drive_hold = protocol.control_on_hold
        res_hold = res_on if drive_hold else res_off
        use_diff_hold = "hold" in diffusion_phases
        if protocol.eta_hold != 0.0:
            flip = protocol.flip_time()
            hold_spans = [(0.0, flip, protocol.eta_hold), (flip, protocol.t_hold - flip, -protocol.eta_hold)]
        else:
            hold_spans = [(0.0, protocol.t_hold, 0.0)]
        for start, span, eta_h in hold_spans:
            if span <= 0.0:
                continue
            advance_span(
                start,
                span,
                eta_h,
                drive_hold,
                res_hold,
                lambda t: 0.0j,
                use_diff_hold,
                rec_hold if drive_hold else rec_quiet,
            )
    peak_ref = max(peak_ref, float(np.max(np.abs(sigma))))
    guard_hold = _check_guard(sigma, grid, guard_threshold, "hold", peak_ref)
    sigma_end_hold = sigma.copy()

    # -- read ----------------------------------------------------------
    t_r, out_r = [], []

    def rec_read(t, sig, e):
        t_r.append(t)
        out_r.append(face_phase * e[grid.i_right])

    advance_span(
        protocol.t_hold,
        t_read_len,
        -protocol.eta_write,
        True,
        res_on,
        lambda t: 0.0j,
        "read" in diffusion_phases,
        rec_read,
    )
    guard_read = _check_guard(sigma, grid, guard_threshold, "read", peak_ref)

    t_write_axis = np.array(t_w)
    f_in = np.array(in_w)
    f_trans = np.array(out_w)
    t_hold_axis = np.array(t_h)
    f_hold = np.array(out_h)
    t_out = np.array(t_r)
    f_out = np.array(out_r)

    stored_scale = density / light_speed
    spectrum_k = None
    if frames.spectrum_frames:
        spectrum_k, _ = spinwave_spectrum(sigma, grid, k_matched)

    return CycleRecord(
        params=params,
        protocol=protocol,
        signal=signal,
        grid=grid,
        t_write=t_write_axis,
        f_in=f_in,
        f_trans=f_trans,
        t_hold=t_hold_axis,
        f_hold_leak=f_hold,
        t_out=t_out,
        f_out=f_out,
        sigma_end_write=sigma_end_write,
        sigma_end_hold=sigma_end_hold,
        sigma_end_read=sigma.copy(),
        sigma_frames=frames.sigma_frames,
        spectrum_k=spectrum_k,
        spectrum_frames=frames.spectrum_frames,
        input_energy=float(np.trapezoid(np.abs(f_in) ** 2, t_write_axis)),
        transmitted_energy=float(np.trapezoid(np.abs(f_trans) ** 2, t_write_axis)),
        output_energy=float(np.trapezoid(np.abs(f_out) ** 2, t_out)),
        hold_leak_energy=(
            float(np.trapezoid(np.abs(f_hold) ** 2, t_hold_axis)) if t_h else 0.0
        ),
        stored_end_write=stored_scale
        * float(np.trapezoid(np.abs(sigma_end_write) ** 2, grid.z)),
        stored_end_hold=stored_scale
        * float(np.trapezoid(np.abs(sigma_end_hold) ** 2, grid.z)),
        stored_end_read=stored_scale * float(np.trapezoid(np.abs(sigma) ** 2, grid.z)),
        guard_ratio={"write": guard_write, "hold": guard_hold, "read": guard_read},
    )

"""The three dimensionless decay laws, traced point by point.

Diffusion costs the echo efficiency through exactly three groups: the
write/read sweeps collapse onto exp(-tau_W), the hold onto
exp(-2 tau_H), and the transverse spreading onto 1/(1 + tau_perp).
This script builds each curve from scratch with small solver grids,
always as the ratio eps(D)/eps(0) so discretisation bias divides out.
Takes around half a minute.

    python3 demos/collapse_curves.py [--out demo_output/collapse_curves]
"""

import argparse
import math
from dataclasses import replace
from pathlib import Path

import numpy as np

from gemdiff import (
    ModeGrid,
    SignalSpec,
    StorageProtocol,
    derive_groups,
    efficiency_1d,
    run_cycle,
    run_cycle_quasi1d,
    svgplot,
)
from gemdiff.config import load_config

ROOT = Path(__file__).resolve().parent.parent
CONFIG = ROOT / "configs" / "rubidium_benchmark.cfg"
SOLVER = dict(n_medium=96, steps_per_width=20.0)


def solve_for_diffusivity(params, protocol, signal, attr: str, target: float) -> float:
    """Diffusivity at which the dimensionless group named attr hits target."""
    probe = derive_groups(params.with_diffusivity(1.0), protocol, signal)
    return target / getattr(probe, attr)  # every tau is linear in D


def write_curve(params, protocol, signal):
    """eps(D)/eps(0) during the write/read sweeps against exp(-tau_W)."""
    rows = []
    base = efficiency_1d(
        run_cycle(
            params.with_diffusivity(0.0),
            protocol,
            signal,
            diffusion_phases=("write",),
            **SOLVER,
        )
    )
    for tau in (0.25, 0.5, 1.0, 1.5):
        diff = solve_for_diffusivity(params, protocol, signal, "tau_write", tau)
        eff = efficiency_1d(
            run_cycle(
                params.with_diffusivity(diff),
                protocol,
                signal,
                diffusion_phases=("write",),
                **SOLVER,
            )
        )
        rows.append((tau, eff / base, math.exp(-tau)))
    return rows


def hold_curve(params, protocol, signal):
    """eps(D)/eps(0) over the hold against exp(-2 tau_H)."""
    held = replace(protocol, t_hold=50e-6)
    short = SignalSpec(
        amplitude=signal.amplitude, t_width=0.4e-6, t_lead=10e-6, waist=signal.waist
    )
    rows = []
    base = efficiency_1d(
        run_cycle(
            params.with_diffusivity(0.0),
            held,
            short,
            diffusion_phases=("hold",),
            **SOLVER,
        )
    )
    for tau in (0.25, 0.75, 1.5, 2.0):
        diff = solve_for_diffusivity(params, held, short, "tau_hold", tau)
        eff = efficiency_1d(
            run_cycle(
                params.with_diffusivity(diff),
                held,
                short,
                diffusion_phases=("hold",),
                **SOLVER,
            )
        )
        rows.append((tau, eff / base, math.exp(-2.0 * tau)))
    return rows


def transverse_curve(params, protocol, signal):
    """Quasi-1D eps against 1/(1 + tau_perp), sweeping the hold time."""
    grid = ModeGrid.build(signal.waist, n=32)
    rows = []
    for tau in (0.5, 1.0, 2.0, 3.0):
        # tau_perp = 4 D (t_hold + 2 t_lead) / waist^2, solved for t_hold
        t_hold = tau * signal.waist**2 / (4.0 * params.diffusivity) - 2.0 * signal.t_lead
        held = replace(protocol, t_hold=t_hold)
        rec = run_cycle_quasi1d(params, held, signal, grid, **SOLVER)
        ratio = rec.efficiency_kspace() / efficiency_1d(rec.base)
        rows.append((tau, ratio, 1.0 / (1.0 + tau)))
    return rows


def report(title, rows):
    print(title)
    print("  tau      numeric   predicted  deviation")
    for tau, ratio, predicted in rows:
        print(
            f"  {tau:5.2f}   {ratio:8.5f}   {predicted:8.5f}  "
            f"{ratio / predicted - 1.0:+9.2%}"
        )
    print()


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", type=Path, default=CONFIG)
    ap.add_argument("--out", type=Path, default=Path("demo_output/collapse_curves"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    cfg = load_config(args.config)
    params, protocol, signal = cfg.params, cfg.protocol, cfg.signal

    curves = (
        ("write sweeps: eps(D)/eps(0) vs exp(-tau_W)", "tau_W",
         write_curve(params, protocol, signal), lambda x: np.exp(-x)),
        ("hold: eps(D)/eps(0) vs exp(-2 tau_H)", "tau_H",
         hold_curve(params, protocol, signal), lambda x: np.exp(-2.0 * x)),
        ("transverse: eps vs 1/(1 + tau_perp)", "tau_perp",
         transverse_curve(params, protocol, signal), lambda x: 1.0 / (1.0 + x)),
    )
    for title, name, rows, law in curves:
        report(title, rows)
        taus = np.array([row[0] for row in rows])
        curve = np.linspace(0.0, taus.max() * 1.05, 200)
        svgplot.line_plot(
            args.out / f"{name}.svg",
            title,
            name,
            "efficiency ratio",
            [
                ("numeric", taus, [row[1] for row in rows], "markers"),
                ("law", curve, law(curve), "dashed"),
            ],
        )
    print(f"wrote 3 plots under {args.out}")


if __name__ == "__main__":
    main()

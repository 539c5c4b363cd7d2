"""Shared fixtures: the warm-vapour benchmark parameter set.

Matches configs/rubidium_benchmark.cfg; every module tests against the
same medium so the derived groups (beta = -3.77, k_matched = 1.05 rad/m)
are recognisable across the suite.
"""

import math

import pytest

from gemdiff import PhysicalParams, SignalSpec, StorageProtocol

TAU = 2.0 * math.pi

# One line per acceptance criterion, collected by the record_acceptance
# fixture and replayed after the test summary so the PASS/FAIL verdicts
# survive pytest's output capture.
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def record_acceptance():
    """Return a callback that logs one acceptance verdict line.

    Usage: record(3, "hold collapse", ok, "max dev 2.0% of 3%, 1.3 s").
    The line is printed immediately (visible under -s) and stored for the
    terminal summary.
    """

    def record(index: int, label: str, passed: bool, detail: str = "") -> None:
        verdict = "PASS" if passed else "FAIL"
        line = f"ACCEPTANCE {index:02d} {verdict} {label}"
        if detail:
            line += f" | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def bench_params() -> PhysicalParams:
    return PhysicalParams(
        coupling_g=TAU * 4.5,
        rabi_control=TAU * 20e6,
        detuning=-TAU * 1.5e9,
        density=0.5e18,
        half_length=0.1,
        carrier_mismatch=TAU * 6.8e9 / 299_792_458.0,
        diffusivity=0.004,
    )


@pytest.fixture(scope="session")
def bench_protocol() -> StorageProtocol:
    return StorageProtocol.standard(eta_write=-TAU * 10e6, t_hold=0.0)


@pytest.fixture(scope="session")
def bench_signal() -> SignalSpec:
    return SignalSpec(amplitude=1.0, t_width=1e-6, t_lead=5e-6, waist=1.45e-3)

from __future__ import annotations

import pytest

from quadbounds import CaseConfig, Potential, QuadraticPencil, assemble_forms, build_mesh, MeshSpec
from quadbounds.experiments import residual_sweep, run_case

# lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []

SWEEP_GRID = [100, 150, 200, 250, 300, 350, 400]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def harmonic_100():
    return assemble_forms(build_mesh(MeshSpec(6.0, 100)), Potential.harmonic())


@pytest.fixture(scope="session")
def pencil_100(harmonic_100):
    return QuadraticPencil.from_forms(harmonic_100)


@pytest.fixture(scope="session")
def case_harmonic_400():
    return run_case(CaseConfig(potential=Potential.harmonic(), n=400))


@pytest.fixture(scope="session")
def case_anharmonic_400():
    return run_case(CaseConfig(potential=Potential.anharmonic(), n=400))


@pytest.fixture(scope="session")
def sweeps():
    return {name: residual_sweep(CaseConfig(potential=Potential.parse(name)), SWEEP_GRID, [1, 2, 3])
            for name in ("harmonic", "anharmonic")}

import math

import pytest

from bosegas import lattice
from bosegas.single_mode import GrandSpec
from bosegas import grand_canonical

# ---------------------------------------------------------------------------
# Acceptance reporting: one pass/fail line per criterion in the summary
# ---------------------------------------------------------------------------

ACCEPTANCE_RESULTS: dict = {}


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS[name] = (passed, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[name]
        status = "PASS" if passed else "FAIL"
        line = f"{name}: {status}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)


# ---------------------------------------------------------------------------
# The standard supercritical setup shared by the heavy ladder studies
# ---------------------------------------------------------------------------

STANDARD = dict(d=3, kinetic=1.0, eps0=-1.0, g0=1.0, gk_profile=1.0)
BETA = 1.0


def standard_params(L: float) -> lattice.ModelParams:
    return lattice.ModelParams(L=L, **STANDARD)


@pytest.fixture(scope="session")
def rho_supercritical():
    from bosegas import tdlimit
    return tdlimit.rho_c_I(BETA, standard_params(8.0)) + 0.5


@pytest.fixture(scope="session")
def mu_ladder(rho_supercritical):
    """Solved finite-volume chemical potentials on the acceptance ladder."""
    out = {}
    for L in (8.0, 12.0, 16.0, 20.0, 24.0, 28.0, 32.0):
        p = standard_params(L)
        spec = GrandSpec(beta=BETA, mu=0.0, V=p.volume)
        out[L] = grand_canonical.solve_mu(p, spec, rho_supercritical)
    return out

import random

import pytest

from hevoice import paillier


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    rows = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            if getattr(report, "when", None) != "call":
                continue
            if "acceptance" in getattr(report, "keywords", {}):
                rows.append((report.nodeid.split("::")[-1], outcome))
    if not rows:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in sorted(rows):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")

# Fixed probable primes (verified at generation time) so the cheap fixtures
# skip prime search entirely.
P64 = 17158257266946116539
Q64 = 18347929573442976149
P128 = 298447555276110571029993701798832238957
Q128 = 307814418114577271335654491821148614567


@pytest.fixture(scope="session")
def tiny_keypair():
    """128-bit modulus from fixed primes: fast integer-arithmetic checks."""
    return paillier.keypair_from_primes(P64, Q64)


@pytest.fixture(scope="session")
def small_keypair():
    """256-bit modulus from fixed primes: float-codec and linalg checks."""
    return paillier.keypair_from_primes(P128, Q128)


@pytest.fixture(scope="session")
def keypair_512():
    """512-bit test key (deterministic); used by the acceptance suite."""
    return paillier.keygen(512, seed=512512)


@pytest.fixture()
def rng():
    return random.Random(987654321)

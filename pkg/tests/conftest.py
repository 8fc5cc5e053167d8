import numpy as np
import pytest

from eegend.signals import SynthSpec, segment_dataset, synthesize_dataset


@pytest.fixture(scope="session")
def planted_ds():
    """10+10 subjects, 19 channels, planted {0, 2, 5}, two segments each."""
    spec = SynthSpec(n_per_class=10, n_samples=4096, n_channels=19, planted_channels=(0, 2, 5))
    return segment_dataset(synthesize_dataset(spec, 7), 2048)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(number, ok, detail):
        status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        line = f"ACCEPTANCE {number:>2} {status}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)

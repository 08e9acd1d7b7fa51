import pytest

from prescribe.lexicon import Lexicon, LexiconEntry, load_seed_lexicon


def pytest_runtest_logreport(report):
    """One visible PASS/FAIL/SKIP line per acceptance criterion."""
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.skipped:
        reason = report.longrepr[2] if isinstance(report.longrepr, tuple) else ""
        print(f"\n[ACCEPTANCE] {name}: SKIP ({reason})")
    elif report.when == "call":
        print(f"\n[ACCEPTANCE] {name}: {'PASS' if report.passed else 'FAIL'}")

# The two case-study tweets quoted in full by the benchmark write-up.
CASE_STUDY_1 = (
    "And apparently I'm committed to going to a new level since I used the key. "
    "Well, FUCK. Curiosity killed the Cat(hy)"
)
CASE_STUDY_2 = (
    "I ain't never seen a bitch so obsessed with they nigga&#128514. "
    "I'm obsessed with mine&#128529"
)
FLAT_EARTH = "how come your people really believe in flat earth?"


@pytest.fixture(scope="session")
def seed_lexicon() -> Lexicon:
    return load_seed_lexicon()


def make_lexicon(*rows: tuple[str, "object"]) -> Lexicon:
    from prescribe.lexicon import parse_category

    entries = []
    for pattern, category in rows:
        cat = category if not isinstance(category, str) else parse_category(category)
        entries.append(LexiconEntry(pattern, cat))
    return Lexicon(entries)

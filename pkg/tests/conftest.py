import hashlib
from pathlib import Path

import pytest

from doomsight.mapgen import demo_level, demo_wad, orbit_track
from doomsight.wad import parse_archive

# acceptance criteria record (name, passed, detail) here; printed at the end of the run
ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")


def tree_digest(root: Path) -> dict[str, str]:
    """Relative path -> SHA-256 of every file under ``root``."""
    return {p.relative_to(root).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture(scope="session")
def demo_bytes() -> bytes:
    return demo_wad(["MAP01", "MAP09", "MAP17", "MAP25"], seed=3, size=5)


@pytest.fixture(scope="session")
def demo_archive(demo_bytes):
    return parse_archive(demo_bytes)


@pytest.fixture(scope="session")
def demo_wad_file(tmp_path_factory, demo_bytes) -> Path:
    path = tmp_path_factory.mktemp("wad") / "demo.wad"
    path.write_bytes(demo_bytes)
    return path


def track_text(map_name: str, samples: int, seed: int = 3, size: int = 5, start_tic: int = 0) -> str:
    return orbit_track(demo_level(map_name, seed, size), samples, start_tic)

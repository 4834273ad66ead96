import logging
from pathlib import Path
from typing import Iterable, Union

from pydantic import ValidationError

from .clopen import Region
from .config import settings
from .errors import InvalidIndex, PreconditionViolation
from .hyperspaces import FullClosedName, OpenName, closed_set_from_region, whole_space_set
from .schemas import BallSpec, FixtureSpec, SchemeSpec
from .spaces import Cell, SpaceDescriptor, parse_rational, space_from_string

logger = logging.getLogger(__name__)

WHOLE = "whole"


def ball_cell(space: SpaceDescriptor, ball: BallSpec, closed: bool = True) -> Cell:
    """The cell of a ball description; closed radii use ≤, open radii use <."""
    center = space.parse_center(ball.center)
    radius = parse_rational(ball.radius)
    if radius <= 0:
        raise InvalidIndex(f"radius {ball.radius} is not positive")
    depth = space.depth_atmost(radius) if closed else space.depth_below(radius)
    return space.cell_of(center, depth)


def fixture_region(spec: FixtureSpec, space: SpaceDescriptor = None) -> Region:
    space = space or space_from_string(spec.space)
    closed = spec.kind == "closed"
    return Region(space, [ball_cell(space, ball, closed) for ball in spec.balls])


def fixture_from_spec(spec: FixtureSpec, space: SpaceDescriptor = None) -> Union[FullClosedName, OpenName]:
    space = space or space_from_string(spec.space)
    region = fixture_region(spec, space)
    if spec.kind == "open":
        return OpenName.from_cells(space, region.cells)
    return closed_set_from_region(region)


def _resolve(path: Union[str, Path]) -> Path:
    candidate = Path(path)
    if not candidate.exists() and not candidate.is_absolute():
        candidate = Path(settings.fixture_dir) / candidate
    if not candidate.exists():
        raise PreconditionViolation("fixture file", f"{path} not found")
    return candidate


def read_fixture(path: Union[str, Path]) -> FixtureSpec:
    return FixtureSpec.model_validate_json(_resolve(path).read_text())


def load_fixture(source: Union[str, Path, FixtureSpec], space: SpaceDescriptor):
    """A FullClosedName (or OpenName) for a fixture file, a spec, or the keyword ``whole``."""
    if isinstance(source, str) and source == WHOLE:
        return whole_space_set(space)
    spec = source if isinstance(source, FixtureSpec) else read_fixture(source)
    declared = space_from_string(spec.space)
    if declared != space:
        raise PreconditionViolation("fixture space", f"fixture lives in {declared.name}, not {space.name}")
    logger.debug("loaded %s fixture with %d balls", spec.kind, len(spec.balls))
    return fixture_from_spec(spec, space)


def closed_fixture(space: SpaceDescriptor, balls: Iterable) -> FullClosedName:
    """Shorthand: (center, radius) pairs, or bare centers with radius 1."""
    specs = []
    for ball in balls:
        center, radius = ball if isinstance(ball, tuple) else (ball, "1")
        specs.append(BallSpec(center=center, radius=radius))
    return fixture_from_spec(FixtureSpec(space=space.name, kind="closed", balls=specs), space)


def read_scheme(path: Union[str, Path]) -> SchemeSpec:
    try:
        return SchemeSpec.model_validate_json(_resolve(path).read_text())
    except ValidationError:
        logger.warning("scheme file %s does not validate", path)
        raise

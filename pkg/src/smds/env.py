"""Agent kinematics and exploration sampling for the three environments.

Three agents share one stepping/sensing vocabulary:

- lattice: a 6x6 grid walker with quarter-turn rotations and unit
  forward steps, sensing its node and absolute orientation as one-hot
  blocks;
- forward: a continuous-world agent that turns then drives forward,
  sensing 9 range readings across a field of view centered on its body
  axis;
- holonomic: a continuous-world agent with longitudinal and lateral
  translation, body rotation, and an absolutely-set head angle carrying
  the sensor fan.

Moves that would touch or cross a wall (or leave the grid) are
rejected; exploration resamples a rejected command in place so every
rollout has exactly T commands. All sampling draws from an explicit
`numpy.random.Generator`, so rollouts with independent generators can
run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geom import OutsideWorldError, Ray, WorldGeometry, path_collides, ray_cast

TAU = 2.0 * math.pi
GRID = 6  # lattice side length
REJECTION_LIMIT = 10_000  # consecutive rejections before declaring the agent stuck


class StuckAgentError(RuntimeError):
    """Raised when rejection sampling cannot find an accepted move."""


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    w = a % TAU
    return w - TAU if w > math.pi else w


# ---------------------------------------------------------------------------
# poses and states


@dataclass(frozen=True)
class AgentPose:
    """Position plus body and head orientation in the continuous world.

    ``head`` is relative to the body and stays 0 for agents without a
    head. Angles are wrapped to (-pi, pi].
    """

    x: float
    y: float
    body: float
    head: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "body", wrap_angle(self.body))
        object.__setattr__(self, "head", wrap_angle(self.head))

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


# Direction index -> angle; index k faces k * pi/2 (0 = +x, 1 = +y, ...).
_DIR_ANGLES = (0.0, math.pi / 2, math.pi, -math.pi / 2)
_DIR_STEPS = ((1, 0), (0, 1), (-1, 0), (0, -1))


@dataclass(frozen=True)
class LatticeState:
    """Node (i, j) on the 6x6 grid plus a quarter-turn orientation index."""

    i: int
    j: int
    direction: int  # 0..3, facing direction * pi/2

    def __post_init__(self) -> None:
        if not (0 <= self.i < GRID and 0 <= self.j < GRID):
            raise ValueError(f"node ({self.i}, {self.j}) outside the {GRID}x{GRID} lattice")
        if self.direction not in (0, 1, 2, 3):
            raise ValueError(f"direction index must be 0..3, got {self.direction}")

    @property
    def orientation(self) -> float:
        """Orientation in radians, one of {0, pi/2, pi, -pi/2}."""
        return _DIR_ANGLES[self.direction]

    def as_pose(self) -> AgentPose:
        """Pose view of the lattice state (node coordinates as position)."""
        return AgentPose(float(self.i), float(self.j), self.orientation)


# ---------------------------------------------------------------------------
# motor commands


@dataclass(frozen=True)
class LatticeCommand:
    """Quarter-turn (-1, 0, +1 of pi/2) then an optional unit forward step."""

    turn: int  # -1, 0, 1
    forward: int  # 0, 1

    def __post_init__(self) -> None:
        if self.turn not in (-1, 0, 1):
            raise ValueError("turn must be -1, 0 or 1")
        if self.forward not in (0, 1):
            raise ValueError("forward must be 0 or 1")

    @property
    def theta_body(self) -> float:
        return self.turn * (math.pi / 2)


@dataclass(frozen=True)
class ForwardCommand:
    """Body rotation followed by a forward translation."""

    theta_body: float
    delta_forward: float


@dataclass(frozen=True)
class HolonomicCommand:
    """Body rotation, longitudinal/lateral translation, absolute head angle."""

    theta_body: float
    delta_long: float
    delta_lat: float
    theta_head: float


MotorCommand = LatticeCommand | ForwardCommand | HolonomicCommand


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class EnvConfig:
    """Agent kind, motor bounds, sensor geometry and the world.

    ``include_orientation`` appends (cos, sin) of the absolute body
    orientation to continuous-agent sensor vectors; the default keeps
    sensors range-only. Lattice sensors are always node + orientation
    one-hot blocks.
    """

    agent_kind: str  # "lattice" | "forward" | "holonomic"
    theta_body_max: float = 0.0
    delta_forward_max: float = 0.0
    delta_long_max: float = 0.0
    delta_lat_max: float = 0.0
    theta_head_max: float = 0.0
    sensor_count: int = 9
    sensor_range: float = 10.0
    fov: float = math.pi
    world: WorldGeometry | None = None
    include_orientation: bool = False

    def __post_init__(self) -> None:
        if self.agent_kind not in ("lattice", "forward", "holonomic"):
            raise ValueError(f"unknown agent kind {self.agent_kind!r}")
        if self.sensor_count < 2:
            raise ValueError("sensor_count must be >= 2")
        if not (0.0 < self.fov <= TAU):
            raise ValueError("fov must be in (0, 2*pi]")
        for name in ("theta_body_max", "delta_forward_max", "delta_long_max",
                     "delta_lat_max", "theta_head_max"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.agent_kind != "lattice" and self.world is None:
            raise ValueError("continuous agents require a world")

    @property
    def sensor_dim(self) -> int:
        if self.agent_kind == "lattice":
            return GRID * GRID + 4
        return self.sensor_count + (2 if self.include_orientation else 0)

    @property
    def motor_dim(self) -> int:
        """Per-step motor vector length as fed to the encoder."""
        return {"lattice": 5, "forward": 2, "holonomic": 4}[self.agent_kind]


# ---------------------------------------------------------------------------
# sensing


def read_sensors(state: AgentPose | LatticeState, cfg: EnvConfig) -> np.ndarray:
    """Sensor vector for a pose (range fan) or lattice state (one-hots).

    Continuous agents cast ``sensor_count`` rays at absolute angles
    body + head + fov * (k/(N-1) - 1/2), k = 0..N-1, so index 0 is the
    rightmost ray and index N-1 the leftmost.
    """
    if cfg.agent_kind == "lattice":
        if not isinstance(state, LatticeState):
            raise TypeError("lattice config requires a LatticeState")
        s = np.zeros(GRID * GRID + 4)
        s[state.i * GRID + state.j] = 1.0
        s[GRID * GRID + state.direction] = 1.0
        return s

    if not isinstance(state, AgentPose):
        raise TypeError("continuous config requires an AgentPose")
    world = cfg.world
    assert world is not None
    n = cfg.sensor_count
    center = state.body + state.head
    offsets = cfg.fov * (np.arange(n) / (n - 1) - 0.5)
    values = np.empty(n)
    for k, off in enumerate(offsets):
        ang = center + off
        values[k] = ray_cast(
            Ray(state.x, state.y, math.cos(ang), math.sin(ang), cfg.sensor_range), world
        )
    if cfg.include_orientation:
        values = np.concatenate([values, [math.cos(state.body), math.sin(state.body)]])
    return values


# ---------------------------------------------------------------------------
# stepping


def step_lattice(state: LatticeState, cmd: LatticeCommand) -> LatticeState | None:
    """Apply turn-then-step; None when the move would leave the grid."""
    direction = (state.direction + cmd.turn) % 4
    di, dj = _DIR_STEPS[direction]
    i = state.i + cmd.forward * di
    j = state.j + cmd.forward * dj
    if not (0 <= i < GRID and 0 <= j < GRID):
        return None
    return LatticeState(i, j, direction)


def step_forward(pose: AgentPose, cmd: ForwardCommand, world: WorldGeometry) -> AgentPose | None:
    """Rotate body, then translate along it; None on wall contact."""
    body = wrap_angle(pose.body + cmd.theta_body)
    x = pose.x + cmd.delta_forward * math.cos(body)
    y = pose.y + cmd.delta_forward * math.sin(body)
    if path_collides((pose.x, pose.y), (x, y), world):
        return None
    return AgentPose(x, y, body, 0.0)


def step_holonomic(
    pose: AgentPose, cmd: HolonomicCommand, world: WorldGeometry
) -> AgentPose | None:
    """Rotate, translate longitudinally then laterally, set the head.

    The two translation sub-segments are collision-checked separately;
    a hit on either rejects the whole composite command.
    """
    body = wrap_angle(pose.body + cmd.theta_body)
    cx, sx = math.cos(body), math.sin(body)
    x1 = pose.x + cmd.delta_long * cx
    y1 = pose.y + cmd.delta_long * sx
    if path_collides((pose.x, pose.y), (x1, y1), world):
        return None
    x2 = x1 - cmd.delta_lat * sx
    y2 = y1 + cmd.delta_lat * cx
    if path_collides((x1, y1), (x2, y2), world):
        return None
    return AgentPose(x2, y2, body, cmd.theta_head)


def step(state, cmd, cfg: EnvConfig):
    """Dispatch to the agent-specific step function."""
    if cfg.agent_kind == "lattice":
        return step_lattice(state, cmd)
    if cfg.agent_kind == "forward":
        return step_forward(state, cmd, cfg.world)
    return step_holonomic(state, cmd, cfg.world)


# ---------------------------------------------------------------------------
# sampling


def sample_command(cfg: EnvConfig, rng: np.random.Generator) -> MotorCommand:
    """Draw each motor component uniformly over its configured set."""
    if cfg.agent_kind == "lattice":
        return LatticeCommand(int(rng.integers(-1, 2)), int(rng.integers(0, 2)))
    if cfg.agent_kind == "forward":
        return ForwardCommand(
            float(rng.uniform(-cfg.theta_body_max, cfg.theta_body_max)),
            float(rng.uniform(0.0, cfg.delta_forward_max)),
        )
    return HolonomicCommand(
        float(rng.uniform(-cfg.theta_body_max, cfg.theta_body_max)),
        float(rng.uniform(-cfg.delta_long_max, cfg.delta_long_max)),
        float(rng.uniform(-cfg.delta_lat_max, cfg.delta_lat_max)),
        float(rng.uniform(-cfg.theta_head_max, cfg.theta_head_max)),
    )


def command_to_vector(cmd: MotorCommand) -> np.ndarray:
    """Flat per-step motor vector as fed to the sequence encoder."""
    if isinstance(cmd, LatticeCommand):
        v = np.zeros(5)
        v[cmd.turn + 1] = 1.0
        v[3 + cmd.forward] = 1.0
        return v
    if isinstance(cmd, ForwardCommand):
        return np.array([cmd.theta_body, cmd.delta_forward])
    return np.array([cmd.theta_body, cmd.delta_long, cmd.delta_lat, cmd.theta_head])


def vector_to_command(vec: np.ndarray, cfg: EnvConfig) -> MotorCommand:
    """Inverse of :func:`command_to_vector` (exact for stored vectors)."""
    if cfg.agent_kind == "lattice":
        return LatticeCommand(int(np.argmax(vec[:3])) - 1, int(np.argmax(vec[3:5])))
    if cfg.agent_kind == "forward":
        return ForwardCommand(float(vec[0]), float(vec[1]))
    return HolonomicCommand(float(vec[0]), float(vec[1]), float(vec[2]), float(vec[3]))


def sample_start(cfg: EnvConfig, rng: np.random.Generator):
    """Uniform collision-free start state.

    Continuous agents: position uniform over the interior (rejecting
    points on a wall), body orientation uniform over (-pi, pi], head
    uniform within its bound. Lattice: uniform node and orientation.
    """
    if cfg.agent_kind == "lattice":
        return LatticeState(int(rng.integers(GRID)), int(rng.integers(GRID)), int(rng.integers(4)))
    world = cfg.world
    for _ in range(REJECTION_LIMIT):
        x = float(rng.uniform(0.0, world.width))
        y = float(rng.uniform(0.0, world.height))
        if not world.contains_interior(x, y):
            continue
        if path_collides((x, y), (x, y), world):
            continue
        body = wrap_angle(float(rng.uniform(-math.pi, math.pi)))
        head = 0.0
        if cfg.agent_kind == "holonomic":
            head = float(rng.uniform(-cfg.theta_head_max, cfg.theta_head_max))
        return AgentPose(x, y, body, head)
    raise StuckAgentError("could not sample a collision-free start position")


@dataclass
class RolloutResult:
    """One exploration episode of exactly T accepted commands."""

    states: list  # T+1 states, start first
    commands: list[MotorCommand]
    command_vectors: np.ndarray  # (T, motor_dim)
    sensors_start: np.ndarray
    sensors_end: np.ndarray
    displacement: "GroundTruthDisplacement"


def rollout(start, cfg: EnvConfig, T: int, rng: np.random.Generator) -> RolloutResult:
    """Execute T sampled commands, resampling each rejection in place.

    Sensor vectors are recorded at the start and after the T-th step;
    the net displacement is expressed in the start state's body frame.
    Raises :class:`StuckAgentError` after ``REJECTION_LIMIT`` consecutive
    rejections at a single step.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    states = [start]
    commands: list[MotorCommand] = []
    current = start
    for _ in range(T):
        cmd = sample_command(cfg, rng)
        nxt = step(current, cmd, cfg)
        rejections = 0
        while nxt is None:
            rejections += 1
            if rejections >= REJECTION_LIMIT:
                raise StuckAgentError(
                    f"{REJECTION_LIMIT} consecutive rejections at step {len(commands)}"
                )
            cmd = sample_command(cfg, rng)
            nxt = step(current, cmd, cfg)
        commands.append(cmd)
        states.append(nxt)
        current = nxt

    start_pose = start.as_pose() if isinstance(start, LatticeState) else start
    end_pose = current.as_pose() if isinstance(current, LatticeState) else current
    return RolloutResult(
        states=states,
        commands=commands,
        command_vectors=np.stack([command_to_vector(c) for c in commands]),
        sensors_start=read_sensors(start, cfg),
        sensors_end=read_sensors(current, cfg),
        displacement=compute_displacement(start_pose, end_pose),
    )


# ---------------------------------------------------------------------------
# ground-truth displacement


@dataclass(frozen=True)
class GroundTruthDisplacement:
    """Net displacement in the start body frame plus orientation change.

    Never an input to any model; kept only for analysis and labeling.
    """

    dlong: float
    dlat: float
    dtheta: float  # wrapped to (-pi, pi]

    def as_array(self) -> np.ndarray:
        return np.array([self.dlong, self.dlat, self.dtheta])


def compute_displacement(start: AgentPose, end: AgentPose) -> GroundTruthDisplacement:
    """Rotate the world-frame offset into the start body frame."""
    dx = end.x - start.x
    dy = end.y - start.y
    c = math.cos(-start.body)
    s = math.sin(-start.body)
    return GroundTruthDisplacement(
        dlong=c * dx - s * dy,
        dlat=s * dx + c * dy,
        dtheta=wrap_angle(end.body - start.body),
    )

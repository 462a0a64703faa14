"""Per-track motion models: Kalman filter, particle filter and stationary baseline.

All three share the 7-dimensional state layout (cx, cy, s, r, vx, vy, vs) and
the 4-dimensional observation (cx, cy, s, r) from :mod:`rtmot.core`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import BoundingBox, Observation, from_observation, iou_matrix, to_observation

DIM_X = 7
DIM_Z = 4


def transition_matrix(dt: float = 1.0) -> np.ndarray:
    """Constant-velocity transition; the aspect ratio carries no velocity."""
    A = np.eye(DIM_X)
    A[0, 4] = A[1, 5] = A[2, 6] = dt
    return A


def observation_matrix() -> np.ndarray:
    H = np.zeros((DIM_Z, DIM_X))
    H[:, :DIM_Z] = np.eye(DIM_Z)
    return H


@dataclass
class KalmanModel:
    A: np.ndarray = field(default_factory=transition_matrix)
    H: np.ndarray = field(default_factory=observation_matrix)
    Q: np.ndarray = field(default_factory=lambda: np.diag([1.0, 1.0, 1.0, 1e-2, 1e-2, 1e-2, 1e-4]))
    R: np.ndarray = field(default_factory=lambda: np.diag([1.0, 1.0, 10.0, 10.0]))
    P0: np.ndarray = field(default_factory=lambda: np.diag([10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4]))

    def __post_init__(self):
        for name, shape in (("A", (7, 7)), ("H", (4, 7)), ("Q", (7, 7)), ("R", (4, 4)), ("P0", (7, 7))):
            value = np.asarray(getattr(self, name), dtype=float)
            if value.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {value.shape}")
            setattr(self, name, value)
        if not np.allclose(self.R, self.R.T) or np.linalg.eigvalsh(self.R).min() <= 0:
            raise ValueError("R must be symmetric positive definite")
        for name in ("Q", "P0"):
            m = getattr(self, name)
            if not np.allclose(m, m.T) or np.linalg.eigvalsh(m).min() < -1e-12:
                raise ValueError(f"{name} must be symmetric positive semi-definite")
        self._A_cache = {1.0: self.A}

    def transition(self, dt: float = 1.0) -> np.ndarray:
        """A for a time step of ``dt`` processed frames (``dt == 1`` returns ``A``)."""
        A = self._A_cache.get(dt)
        if A is None:
            A = self.A.copy()
            A[0, 4] *= dt
            A[1, 5] *= dt
            A[2, 6] *= dt
            self._A_cache[dt] = A
        return A


@dataclass
class KalmanState:
    x_hat: np.ndarray
    P: np.ndarray
    # diagnostics of the most recent update
    innovation: Optional[np.ndarray] = None
    gain: Optional[np.ndarray] = None
    asymmetry: float = 0.0
    # last physically valid area/ratio, used by the clamping rule
    last_s: float = 1.0
    last_r: float = 1.0

    def observation(self) -> Observation:
        return Observation(*(float(v) for v in self.x_hat[:DIM_Z]))

    def copy(self) -> "KalmanState":
        return KalmanState(self.x_hat.copy(), self.P.copy(), self.innovation, self.gain,
                           self.asymmetry, self.last_s, self.last_r)


def _clamp(x: np.ndarray, last_s: float, last_r: float) -> None:
    if x[2] <= 0:
        x[6] = 0.0
        x[2] = max(last_s, 1.0)
    if x[3] <= 0:
        x[3] = last_r


def kalman_init(z: Observation, model: KalmanModel) -> KalmanState:
    x = np.zeros(DIM_X)
    x[:DIM_Z] = z
    return KalmanState(x, model.P0.copy(), last_s=float(z[2]), last_r=float(z[3]))


def kalman_predict(state: KalmanState, model: KalmanModel, dt: float = 1.0):
    """Prior step, in place. Returns ``(state, predicted_observation)``."""
    A = model.transition(dt)
    x = A @ state.x_hat
    _clamp(x, state.last_s, state.last_r)
    state.x_hat = x
    state.P = A @ state.P @ A.T + model.Q
    return state, state.observation()


def kalman_update(state: KalmanState, model: KalmanModel, z) -> KalmanState:
    """Posterior step, in place: gain, state correction, covariance shrink."""
    H = model.H
    P = state.P
    PHt = P @ H.T
    S = H @ PHt + model.R
    # S is SPD whenever R is; solve instead of inverting
    K = np.linalg.solve(S, PHt.T).T
    innovation = np.asarray(z, dtype=float) - H @ state.x_hat
    x = state.x_hat + K @ innovation
    P_new = (np.eye(DIM_X) - K @ H) @ P
    state.asymmetry = float(np.abs(P_new - P_new.T).max())
    state.P = 0.5 * (P_new + P_new.T)
    _clamp(x, state.last_s, state.last_r)
    state.x_hat = x
    state.last_s = float(x[2])
    state.last_r = float(x[3])
    state.innovation = innovation
    state.gain = K
    return state


def stationary_predict(state: Observation) -> Observation:
    return state


@dataclass
class ParticleConfig:
    n: int = 100
    init_sigmas: tuple = (5.0, 5.0, 20.0, 0.05, 1.0, 1.0, 1.0)
    process_sigmas: tuple = (2.0, 2.0, 10.0, 0.01, 0.5, 0.5, 0.5)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("particle count must be >= 1")
        if len(self.init_sigmas) != DIM_X or len(self.process_sigmas) != DIM_X:
            raise ValueError("particle sigmas must have 7 components")


@dataclass
class ParticleSet:
    particles: np.ndarray  # (n, 7)
    process_sigmas: np.ndarray
    init_sigmas: np.ndarray

    @property
    def n(self) -> int:
        return self.particles.shape[0]

    def mean_observation(self) -> Observation:
        m = self.particles[:, :DIM_Z].mean(axis=0)
        return Observation(*(float(v) for v in m))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def particle_init(z: Observation, cfg: ParticleConfig, rng) -> ParticleSet:
    """Spread ``cfg.n`` particles normally around the first observation, zero mean velocity."""
    rng = _rng(rng)
    centre = np.zeros(DIM_X)
    centre[:DIM_Z] = z
    sig = np.asarray(cfg.init_sigmas, dtype=float)
    particles = centre + rng.standard_normal((cfg.n, DIM_X)) * sig
    _clamp_particles(particles, z[2], z[3])
    return ParticleSet(particles, np.asarray(cfg.process_sigmas, dtype=float), sig)


def _clamp_particles(p: np.ndarray, s_floor_ref: float, r_ref: float) -> None:
    bad_s = p[:, 2] <= 0
    if bad_s.any():
        p[bad_s, 2] = max(float(s_floor_ref), 1.0)
        p[bad_s, 6] = 0.0
    bad_r = p[:, 3] <= 0
    if bad_r.any():
        p[bad_r, 3] = r_ref


def particle_predict(ps: ParticleSet, has_pending_detection: bool, rng=None, dt: float = 1.0):
    """Propagate every particle; add process noise only when no detection follows."""
    p = ps.particles.copy()
    p[:, 0] += dt * p[:, 4]
    p[:, 1] += dt * p[:, 5]
    p[:, 2] += dt * p[:, 6]
    if not has_pending_detection:
        p += _rng(rng).standard_normal(p.shape) * ps.process_sigmas
    ref = ps.mean_observation()
    _clamp_particles(p, ref.s, ref.r if ref.r > 0 else 1.0)
    ps = ParticleSet(p, ps.process_sigmas, ps.init_sigmas)
    return ps, ps.mean_observation()


def diffuse(ps: ParticleSet, rng=None) -> ParticleSet:
    """Process noise for a track that went unmatched after its noiseless prediction."""
    p = ps.particles + _rng(rng).standard_normal(ps.particles.shape) * ps.process_sigmas
    ref = ps.mean_observation()
    _clamp_particles(p, ref.s, ref.r if ref.r > 0 else 1.0)
    return ParticleSet(p, ps.process_sigmas, ps.init_sigmas)


def _particle_boxes(particles: np.ndarray) -> np.ndarray:
    s = particles[:, 2]
    r = particles[:, 3]
    w = np.sqrt(s * r)
    h = np.sqrt(s / r)
    return np.column_stack([particles[:, 0] - w / 2, particles[:, 1] - h / 2, w, h])


def particle_weights(ps: ParticleSet, z) -> np.ndarray:
    """Normalised IoU weights; uniform when no particle overlaps ``z``."""
    zbox = from_observation(z)
    w = iou_matrix(_particle_boxes(ps.particles), np.array([zbox]))[:, 0]
    total = w.sum()
    if total <= 0:
        return np.full(ps.n, 1.0 / ps.n)
    return w / total


def particle_update(ps: ParticleSet, z, rng_seed=None) -> ParticleSet:
    """Resample with replacement by IoU weight; ``n`` is preserved."""
    rng = _rng(rng_seed)
    weights = particle_weights(ps, z)
    idx = rng.choice(ps.n, size=ps.n, replace=True, p=weights)
    return ParticleSet(ps.particles[idx].copy(), ps.process_sigmas, ps.init_sigmas)


class Predictor:
    """Common surface used by the tracker: ``predict()``, ``update(z)``, ``propagate()``, ``box()``."""

    kind = ""

    def predict(self, dt: float = 1.0) -> BoundingBox:
        raise NotImplementedError

    def update(self, z: Observation) -> None:
        raise NotImplementedError

    def propagate(self) -> None:
        """Called for tracks left unmatched after ``predict``; the prior stands."""

    def observation(self) -> Observation:
        raise NotImplementedError

    def box(self) -> BoundingBox:
        return from_observation(self.observation())


class KalmanPredictor(Predictor):
    kind = "kalman"

    def __init__(self, box: BoundingBox, model: KalmanModel):
        self.model = model
        self.state = kalman_init(to_observation(box), model)

    def predict(self, dt=1.0):
        kalman_predict(self.state, self.model, dt)
        return self.box()

    def update(self, z):
        kalman_update(self.state, self.model, z)

    def observation(self):
        return self.state.observation()


class StationaryPredictor(Predictor):
    kind = "stationary"

    def __init__(self, box: BoundingBox):
        self.state = to_observation(box)

    def predict(self, dt=1.0):
        self.state = stationary_predict(self.state)
        return self.box()

    def update(self, z):
        self.state = Observation(*z)

    def observation(self):
        return self.state


class ParticlePredictor(Predictor):
    kind = "particle"

    def __init__(self, box: BoundingBox, cfg: ParticleConfig, rng: np.random.Generator):
        self.rng = rng
        self.state = particle_init(to_observation(box), cfg, rng)

    def predict(self, dt=1.0):
        # noiseless here; unmatched tracks get their noise in propagate()
        self.state, _ = particle_predict(self.state, True, self.rng, dt)
        return self.box()

    def update(self, z):
        self.state = particle_update(self.state, z, self.rng)

    def propagate(self):
        self.state = diffuse(self.state, self.rng)

    def observation(self):
        return self.state.mean_observation()

"""Quadratic games: gradients, regularity certificates, and Nash solvers.

A game couples N cost functions f_i(y) through a shared action profile
y in R^N (one scalar action per player). Everything downstream only ever
touches the game through own-action partial gradients, so the interface
is gradient evaluation, not cost evaluation.

For the quadratic family the stacked gradient (pseudo-gradient) is affine,
F(y) = R y + r, which makes the Nash equilibrium the root of a linear
system and gives two independent solution routes: a direct solve and
damped gradient-play iteration. The pair is used as a cross-checking
oracle throughout the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import ConvergenceError, IllConditionedGameError, MonotonicityError

__all__ = [
    "GameModel",
    "QuadraticGame",
    "GameCertificate",
    "check_game",
    "solve_nash_closed_form",
    "solve_nash_gradient_play",
    "ring_game",
]

_COND_LIMIT = 1e12


class GameModel:
    """Abstract N-player game seen through own-action gradients.

    Subclasses must set ``n_players`` and implement :meth:`gradient`.
    """

    n_players: int

    def gradient(self, i: int, y: NDArray[np.floating]) -> float:
        """Partial gradient of player i's cost in its own action, at profile y."""
        raise NotImplementedError

    def pseudo_gradient(self, y: NDArray[np.floating]) -> NDArray[np.float64]:
        """Stacked own-action gradients, all evaluated at the same profile y."""
        return np.array([self.gradient(i, y) for i in range(self.n_players)])

    def self_gradients(self, profiles: NDArray[np.floating]) -> NDArray[np.float64]:
        """Each player's gradient at its *own* estimated profile.

        ``profiles`` is (N, N); row i is the profile player i believes in.
        Unlike :meth:`pseudo_gradient` the evaluation point differs per player.
        """
        return np.array([self.gradient(i, profiles[i]) for i in range(self.n_players)])


@dataclass(frozen=True)
class QuadraticGame(GameModel):
    """Game whose pseudo-gradient is the affine map y -> jacobian @ y + offset.

    ``jacobian[i, j]`` is the sensitivity of player i's own-action gradient
    to player j's action. The matrix need not be symmetric.
    """

    jacobian: NDArray[np.float64]
    offset: NDArray[np.float64]

    def __post_init__(self):
        jac = np.asarray(self.jacobian, dtype=float)
        off = np.asarray(self.offset, dtype=float).ravel()
        if jac.ndim != 2 or jac.shape[0] != jac.shape[1]:
            raise ValueError(f"jacobian must be square, got shape {jac.shape}")
        if off.shape[0] != jac.shape[0]:
            raise ValueError(
                f"offset length {off.shape[0]} does not match jacobian size {jac.shape[0]}"
            )
        if not (np.isfinite(jac).all() and np.isfinite(off).all()):
            raise ValueError("game coefficients must be finite")
        jac = jac.copy()
        off = off.copy()
        jac.flags.writeable = False
        off.flags.writeable = False
        object.__setattr__(self, "jacobian", jac)
        object.__setattr__(self, "offset", off)

    @property
    def n_players(self) -> int:  # type: ignore[override]
        return self.offset.shape[0]

    def gradient(self, i: int, y: NDArray[np.floating]) -> float:
        if not 0 <= i < self.n_players:
            raise IndexError(f"player index {i} out of range for {self.n_players} players")
        y = np.asarray(y, dtype=float)
        return float(self.jacobian[i] @ y + self.offset[i])

    def pseudo_gradient(self, y: NDArray[np.floating]) -> NDArray[np.float64]:
        y = np.asarray(y, dtype=float)
        return self.jacobian @ y + self.offset

    def self_gradients(self, profiles: NDArray[np.floating]) -> NDArray[np.float64]:
        # row i of profiles dotted with row i of the jacobian
        return (self.jacobian * profiles).sum(axis=1) + self.offset


@dataclass(frozen=True)
class GameCertificate:
    """Regularity constants of a quadratic game.

    ``monotonicity`` is the smallest eigenvalue of the symmetrized gradient
    Jacobian; positive means the pseudo-gradient is strongly monotone and
    the Nash equilibrium exists and is unique. ``lipschitz[i]`` bounds how
    fast player i's gradient can change across profiles (row 2-norm).
    """

    monotonicity: float
    lipschitz: NDArray[np.float64] = field(repr=False)

    @property
    def strongly_monotone(self) -> bool:
        return self.monotonicity > 0.0


def check_game(game: QuadraticGame) -> GameCertificate:
    """Compute the monotonicity modulus and per-player Lipschitz constants.

    The symmetric part of the Jacobian is formed explicitly before the
    eigensolve, so nearly-symmetric input needs no tolerance decision.
    A non-positive modulus is reported, not raised: some callers only want
    the numbers, and the simulator records the violation instead of dying.
    """
    jac = game.jacobian
    sym = 0.5 * (jac + jac.T)
    modulus = float(np.linalg.eigvalsh(sym)[0])
    lips = np.linalg.norm(jac, axis=1)
    return GameCertificate(monotonicity=modulus, lipschitz=lips)


def solve_nash_closed_form(game: QuadraticGame) -> NDArray[np.float64]:
    """Nash equilibrium as the root of jacobian @ y + offset = 0.

    Raises :class:`IllConditionedGameError` when the Jacobian is numerically
    singular, which is how an (undetected) monotonicity violation usually
    surfaces here.
    """
    cond = float(np.linalg.cond(game.jacobian))
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise IllConditionedGameError(cond)
    y = np.linalg.solve(game.jacobian, -game.offset)
    residual = np.abs(game.pseudo_gradient(y)).max()
    scale = max(1.0, float(np.abs(game.offset).max()))
    if residual > 1e-10 * scale:
        raise IllConditionedGameError(cond)
    return y


def solve_nash_gradient_play(
    game: QuadraticGame,
    y0: NDArray[np.floating] | None = None,
    step: float | None = None,
    tol: float = 1e-10,
    max_iters: int = 200_000,
) -> NDArray[np.float64]:
    """Damped fixed-point iteration y <- y - step * F(y).

    The default step 0.9 * modulus / max(lipschitz)^2 is a heuristic; it is
    contractive for the games used in this package but not for every strongly
    monotone game, so callers with adversarial Jacobians should pass their
    own step. Convergence is declared on the gradient residual, which also
    certifies the answer independently of the iteration count.
    """
    y = np.zeros(game.n_players) if y0 is None else np.asarray(y0, dtype=float).copy()
    if step is None:
        cert = check_game(game)
        if not cert.strongly_monotone:
            raise MonotonicityError(cert.monotonicity)
        step = 0.9 * cert.monotonicity / float(cert.lipschitz.max()) ** 2
    for _ in range(max_iters):
        grad = game.pseudo_gradient(y)
        if np.abs(grad).max() < tol:
            return y
        y -= step * grad
    raise ConvergenceError(float(np.abs(game.pseudo_gradient(y)).max()), max_iters)


def ring_game(n: int) -> QuadraticGame:
    """Cyclically coupled quadratic game used by the bundled reference scenario.

    Player i's cost is y_i^2 + y_i + (y_i - y_{i+1})^2 with the successor
    index wrapping around, so the gradient is 4 y_i - 2 y_{i+1} + 1 and the
    equilibrium is y_i = -1/2 for every n >= 2.
    """
    if n < 2:
        raise ValueError(f"ring game needs at least 2 players, got {n}")
    succ = np.zeros((n, n))
    for i in range(n):
        succ[i, (i + 1) % n] = 1.0
    return QuadraticGame(jacobian=4.0 * np.eye(n) - 2.0 * succ, offset=np.ones(n))

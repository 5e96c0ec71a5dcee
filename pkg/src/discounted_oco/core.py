"""Problem data for discounted online convex optimization.

A problem is a Euclidean ball domain, the global bounds ``G`` (gradient norm)
and ``D`` (diameter), and a sequence of convex loss oracles whose values lie
in ``[0, G*D]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KINDS = ("piecewise-stationary-absolute", "drifting-linear", "adversarial-worst-case")
DEFAULT_SEGMENT_LENGTH = 50
GRAD_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class Domain:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float)).copy()
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    @classmethod
    def ball(cls, center, radius: float) -> "Domain":
        return cls(np.atleast_1d(np.asarray(center, dtype=float)), radius)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, point, atol: float = 1e-12) -> bool:
        return float(np.linalg.norm(np.asarray(point) - self.center)) <= self.radius + atol


@dataclass(frozen=True)
class ProblemBounds:
    G: float
    D: float

    def __post_init__(self):
        if not (self.G > 0 and self.D > 0):
            raise ValueError("G and D must be positive")

    @property
    def GD(self) -> float:
        return self.G * self.D


def project(domain: Domain, point) -> np.ndarray:
    """Euclidean projection onto the ball."""
    p = np.asarray(point, dtype=float)
    if p.shape != domain.center.shape:
        raise ValueError(f"dimension mismatch: point {p.shape} vs domain {domain.center.shape}")
    diff = p - domain.center
    dist = float(np.sqrt(diff @ diff))
    if dist <= domain.radius:
        return p.copy()
    return domain.center + (domain.radius / dist) * diff


@dataclass
class LossSequence:
    """Per-round convex losses on a ball.

    Two loss families are used:

    * ``absolute``: ``f_t(w) = G * ||w - theta_t||``; the subgradient at the
      kink is the zero vector.
    * ``linear``: ``f_t(w) = <g_t, w - center> + radius * ||g_t||``, which is
      ``<g_t, w - w_min>`` shifted so its minimum over the ball is exactly 0.

    Rounds are 1-indexed in the public methods. The adversarial generator is
    adaptive: its gradient for round ``t`` is fixed by :meth:`observe` from the
    learner's move, so a fresh copy (see :meth:`fresh`) must be used per run.
    """

    kind: str
    T: int
    domain: Domain
    bounds: ProblemBounds
    seed: int
    segment_boundaries: tuple[int, ...] = ()
    thetas: np.ndarray | None = None
    grads: np.ndarray | None = None
    _last: np.ndarray | None = field(default=None, repr=False)
    _observed: int = field(default=0, repr=False)

    @property
    def family(self) -> str:
        return "absolute" if self.thetas is not None else "linear"

    @property
    def adaptive(self) -> bool:
        return self.kind == "adversarial-worst-case"

    def fresh(self) -> "LossSequence":
        return make_loss_sequence(
            self.kind, self.T, self.domain, self.bounds, self.seed,
            segment_boundaries=self.segment_boundaries or None,
        )

    def observe(self, t: int, decision) -> None:
        """Reveal the learner's round-``t`` decision before its loss is queried."""
        if not self.adaptive or t <= self._observed:
            return
        if t != self._observed + 1:
            raise ValueError(f"rounds must be observed in order (expected {self._observed + 1}, got {t})")
        w = np.asarray(decision, dtype=float)
        G = self.bounds.G
        if t > 1:
            move = w - self._last
            norm = float(np.linalg.norm(move))
            if norm > 1e-15:
                # loss increases along the learner's last move
                self.grads[t - 1] = G * move / norm
            else:
                self.grads[t - 1] = -self.grads[t - 2]
        self._last = w.copy()
        self._observed = t

    def _check_round(self, t: int) -> int:
        if not 1 <= t <= self.T:
            raise IndexError(f"round {t} outside 1..{self.T}")
        if self.adaptive and t > self._observed:
            raise RuntimeError(f"adversarial round {t} queried before observe()")
        return t - 1

    def value(self, t: int, w) -> float:
        i = self._check_round(t)
        w = np.asarray(w, dtype=float)
        if self.thetas is not None:
            diff = w - self.thetas[i]
            return self.bounds.G * float(np.sqrt(diff @ diff))
        g = self.grads[i]
        return float(g @ (w - self.domain.center)) + self.domain.radius * float(np.sqrt(g @ g))

    def gradient(self, t: int, w) -> np.ndarray:
        i = self._check_round(t)
        w = np.asarray(w, dtype=float)
        if self.thetas is not None:
            diff = w - self.thetas[i]
            norm = float(np.sqrt(diff @ diff))
            if norm == 0.0:
                return np.zeros_like(w)
            return self.bounds.G * diff / norm
        return self.grads[i].copy()

    def oracle(self, t: int, w) -> tuple[float, np.ndarray]:
        return self.value(t, w), self.gradient(t, w)

    # vectorized views used by the regret lab

    def _rounds(self, horizon: int | None) -> int:
        h = self.T if horizon is None else horizon
        if not 0 <= h <= self.T:
            raise ValueError(f"horizon {h} outside 0..{self.T}")
        if self.adaptive and h > self._observed:
            raise RuntimeError("adversarial losses are only defined for observed rounds")
        return h

    def values_at(self, w, horizon: int | None = None) -> np.ndarray:
        """``f_t(w)`` for a fixed point ``w`` and ``t = 1..horizon``."""
        h = self._rounds(horizon)
        w = np.asarray(w, dtype=float)
        if self.thetas is not None:
            return self.bounds.G * np.linalg.norm(w - self.thetas[:h], axis=1)
        g = self.grads[:h]
        return g @ (w - self.domain.center) + self.domain.radius * np.linalg.norm(g, axis=1)

    def gradients_at(self, w, horizon: int | None = None) -> np.ndarray:
        h = self._rounds(horizon)
        w = np.asarray(w, dtype=float)
        if self.thetas is not None:
            diff = w - self.thetas[:h]
            norms = np.linalg.norm(diff, axis=1, keepdims=True)
            safe = np.where(norms > 0, norms, 1.0)
            return np.where(norms > 0, self.bounds.G * diff / safe, 0.0)
        return self.grads[:h].copy()

    def values_along(self, decisions) -> np.ndarray:
        """``f_t(decisions[t])`` for every round covered by ``decisions``."""
        W = np.asarray(decisions, dtype=float).reshape(-1, self.domain.dim)
        h = self._rounds(W.shape[0])
        if self.thetas is not None:
            return self.bounds.G * np.linalg.norm(W - self.thetas[:h], axis=1)
        g = self.grads[:h]
        return np.einsum("td,td->t", g, W - self.domain.center) + self.domain.radius * np.linalg.norm(g, axis=1)

    def descriptor(self) -> dict[str, str]:
        out = {
            "kind": self.kind,
            "T": str(self.T),
            "d": str(self.domain.dim),
            "G": repr(self.bounds.G),
            "radius": repr(self.domain.radius),
            "seed": str(self.seed),
        }
        if self.segment_boundaries:
            out["segments"] = ",".join(str(b) for b in self.segment_boundaries)
        return out


def _random_in_ball(rng: np.random.Generator, domain: Domain, scale: float = 1.0) -> np.ndarray:
    d = domain.dim
    u = rng.normal(size=d)
    u /= np.linalg.norm(u)
    r = domain.radius * scale * rng.uniform() ** (1.0 / d)
    return domain.center + r * u


def default_segment_boundaries(T: int, length: int = DEFAULT_SEGMENT_LENGTH) -> tuple[int, ...]:
    """First rounds of each new segment after the first (1-indexed)."""
    return tuple(range(length + 1, T + 1, length))


def make_loss_sequence(
    kind: str,
    T: int,
    domain: Domain,
    bounds: ProblemBounds,
    seed: int,
    segment_boundaries=None,
) -> LossSequence:
    if kind not in KINDS:
        raise ValueError(f"unknown generator kind {kind!r}; expected one of {KINDS}")
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if bounds.D < domain.diameter * (1 - 1e-12):
        raise ValueError("bounds.D is smaller than the domain diameter")
    rng = np.random.default_rng(seed)
    d = domain.dim
    G = bounds.G

    if kind == "piecewise-stationary-absolute":
        if segment_boundaries is None:
            segment_boundaries = default_segment_boundaries(T)
        bnds = tuple(sorted(int(b) for b in segment_boundaries))
        if any(not 2 <= b <= T for b in bnds):
            raise ValueError("segment boundaries must lie in 2..T")
        starts = (1,) + bnds
        thetas = np.empty((T, d))
        for k, start in enumerate(starts):
            stop = starts[k + 1] if k + 1 < len(starts) else T + 1
            thetas[start - 1 : stop - 1] = _random_in_ball(rng, domain)
        return LossSequence(kind, T, domain, bounds, seed, bnds, thetas=thetas)

    if kind == "drifting-linear":
        u = rng.normal(size=d)
        u /= np.linalg.norm(u)
        grads = np.empty((T, d))
        for t in range(T):
            u = u + 0.05 * rng.normal(size=d)
            u /= np.linalg.norm(u)
            grads[t] = G * rng.uniform(0.5, 1.0) * u
        return LossSequence(kind, T, domain, bounds, seed, grads=grads)

    u = rng.normal(size=d)
    u /= np.linalg.norm(u)
    grads = np.zeros((T, d))
    grads[0] = G * u
    return LossSequence(kind, T, domain, bounds, seed, grads=grads)


# key=value descriptor files

def parse_keyvalue(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ValueError(f"{source}:{lineno}: empty key")
        out[key] = value
    return out


def format_keyvalue(entries: dict[str, str]) -> str:
    return "".join(f"{k}={v}\n" for k, v in entries.items())


def loss_sequence_from_descriptor(entries: dict[str, str]) -> LossSequence:
    d = int(entries.get("d", "1"))
    radius = float(entries.get("radius", "1.0"))
    G = float(entries.get("G", "1.0"))
    domain = Domain.ball(np.zeros(d), radius)
    segs = entries.get("segments")
    boundaries = tuple(int(s) for s in segs.split(",") if s) if segs else None
    return make_loss_sequence(
        entries["kind"], int(entries["T"]), domain, ProblemBounds(G, domain.diameter),
        int(entries.get("seed", "0")), segment_boundaries=boundaries,
    )

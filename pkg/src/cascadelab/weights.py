"""Laws of the weight vector W = (W1, W2).

Four model kinds are supported:

* ``Fractional`` -- deterministic moduli |W_k| = b**-alpha_k with random
  signs drawn from a 2x2 joint table;
* ``LognormalSigned`` -- W_k = X_k * exp(sigma*Y - sigma**2/2) with a
  single shared standard normal Y and X_k = +-b**-alpha;
* ``Mixed`` -- W1 is signed lognormal, W2 = b**-1 * exp(sigma*Y - sigma**2/2)
  is almost surely positive (the random-metric example);
* ``DiscreteTable`` -- an arbitrary finite-support law, used as an exact
  moment oracle.

Every model exposes sampling, exact joint absolute moments
E(|W1|**q1 * |W2|**q2), the concave functional

    phi(q1, q2) = -log_b E(|W1|**q1 * |W2|**q2)

with its gradient, and a checker for the moment assumptions: means equal
b**-1 (A0), some q in (1, 2] with E|W_k|**q < b**-1 (A1), and finiteness
of a negative moment of order > 2 (A2).  Infinite moments are first-class
values: joint_moment may return +inf, in which case phi returns -inf.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DivergenceError

_PROB_TOL = 1e-12


def _pow_abs(v: float, q: float) -> float:
    """|v|**q with the conventions 0**0 = 1 and 0**negative = +inf."""
    a = abs(v)
    if a == 0.0:
        if q == 0.0:
            return 1.0
        return math.inf if q < 0 else 0.0
    return a**q


@dataclass(frozen=True)
class SignJoint:
    """Joint probability table over the sign pairs (+,+), (+,-), (-,+), (-,-)."""

    pp: float
    pm: float
    mp: float
    mm: float

    def __post_init__(self):
        probs = (self.pp, self.pm, self.mp, self.mm)
        if any(p < -_PROB_TOL for p in probs):
            raise ConfigError(f"negative sign probability in {probs}")
        if abs(sum(probs) - 1.0) > _PROB_TOL:
            raise ConfigError(f"sign probabilities sum to {sum(probs)}, not 1")

    @classmethod
    def independent(cls, p1: float, p2: float) -> "SignJoint":
        return cls(p1 * p2, p1 * (1 - p2), (1 - p1) * p2, (1 - p1) * (1 - p2))

    @property
    def plus1(self) -> float:
        return self.pp + self.pm

    @property
    def plus2(self) -> float:
        return self.pp + self.mp

    @property
    def diagonal(self) -> float:
        """P(sign1 == sign2)."""
        return self.pp + self.mm

    def cumulative(self) -> np.ndarray:
        return np.cumsum([self.pp, self.pm, self.mp, self.mm])


def default_sign_plus(base: int, alpha: float) -> float:
    """Marginal P(sign = +) making E(+-b**-alpha) = b**-1 exact."""
    return (1.0 + base ** (alpha - 1.0)) / 2.0


@dataclass(frozen=True)
class AssumptionReport:
    a0_ok: bool
    a1_ok: bool
    a1_witness: float | None
    a2_ok: bool
    a2_witness: float | None
    notes: str = ""

    @property
    def all_ok(self) -> bool:
        return self.a0_ok and self.a1_ok and self.a2_ok


class WeightModel:
    """Common interface of the four weight-law kinds."""

    base: int

    # -- sampling ----------------------------------------------------------

    def sample_pairs(self, rng: np.random.Generator, size: int):
        """Draw ``size`` i.i.d. copies of (W1, W2); returns two arrays.

        The draw layout per model kind is fixed (uniforms first, then
        normals), so a stream consumed through this method is
        reproducible independently of the caller.
        """
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> tuple[float, float]:
        w1, w2 = self.sample_pairs(rng, 1)
        return float(w1[0]), float(w2[0])

    # -- analytic moments --------------------------------------------------

    def joint_moment(self, q1: float, q2: float) -> float:
        """E(|W1|**q1 * |W2|**q2); may be +inf."""
        raise NotImplementedError

    def mean(self, k: int) -> float:
        """E(W_k), signed, exact."""
        raise NotImplementedError

    def identical_weights(self) -> bool:
        """Whether P(W1 = W2) = 1 (certified from the parameters)."""
        raise NotImplementedError

    def phi(self, q1: float, q2: float) -> float:
        m = self.joint_moment(q1, q2)
        if math.isinf(m):
            return -math.inf
        if m == 0.0:
            return math.inf
        return -math.log(m) / math.log(self.base)

    def grad_phi(self, q1: float, q2: float) -> tuple[float, float]:
        raise NotImplementedError

    # -- description / digest ----------------------------------------------

    def describe(self) -> str:
        """Canonical model-file text (see modelio)."""
        raise NotImplementedError

    def digest(self) -> str:
        return hashlib.sha256(self.describe().encode()).hexdigest()[:16]


def _validate_alpha(alpha: float, lo: float = 0.0) -> None:
    if not lo < alpha <= 1.0:
        raise ConfigError(f"alpha must be in ({lo}, 1], got {alpha}")


@dataclass(frozen=True)
class Fractional(WeightModel):
    """|W_k| = b**-alpha_k almost surely, signs from ``sign_joint``.

    The sign marginals must reproduce E(W_k) = b**-1 exactly; the default
    joint is independent signs with those marginals.
    """

    base: int
    alpha1: float
    alpha2: float
    sign_joint: SignJoint = None  # type: ignore[assignment]

    def __post_init__(self):
        _validate_alpha(self.alpha1, 0.5)
        _validate_alpha(self.alpha2, 0.5)
        if self.sign_joint is None:
            sj = SignJoint.independent(
                default_sign_plus(self.base, self.alpha1),
                default_sign_plus(self.base, self.alpha2),
            )
            object.__setattr__(self, "sign_joint", sj)
        for k, plus, alpha in (
            (1, self.sign_joint.plus1, self.alpha1),
            (2, self.sign_joint.plus2, self.alpha2),
        ):
            want = default_sign_plus(self.base, alpha)
            if abs(plus - want) > 1e-9:
                raise ConfigError(
                    f"sign marginal {plus} for W{k} does not give E(W{k})=1/b "
                    f"(need {want})"
                )

    def sample_pairs(self, rng, size):
        u = rng.random(size)
        cell = np.searchsorted(self.sign_joint.cumulative(), u, side="right")
        cell = np.minimum(cell, 3)
        s1 = np.where(cell <= 1, 1.0, -1.0)
        s2 = np.where((cell == 0) | (cell == 2), 1.0, -1.0)
        return s1 * self.base**-self.alpha1, s2 * self.base**-self.alpha2

    def joint_moment(self, q1, q2):
        return float(self.base ** -(q1 * self.alpha1 + q2 * self.alpha2))

    def mean(self, k):
        plus = self.sign_joint.plus1 if k == 1 else self.sign_joint.plus2
        alpha = self.alpha1 if k == 1 else self.alpha2
        return self.base**-alpha * (2.0 * plus - 1.0)

    def identical_weights(self):
        return self.alpha1 == self.alpha2 and self.sign_joint.diagonal >= 1.0 - _PROB_TOL

    def grad_phi(self, q1, q2):
        return (self.alpha1, self.alpha2)

    def describe(self):
        sj = self.sign_joint
        return (
            f"kind fractional\nb {self.base}\nalpha1 {self.alpha1!r}\n"
            f"alpha2 {self.alpha2!r}\nsign ++ {sj.pp!r}\nsign +- {sj.pm!r}\n"
            f"sign -+ {sj.mp!r}\nsign -- {sj.mm!r}\n"
        )


def sigma_from_beta(beta: float, base: int) -> float:
    """Invert beta = sigma**2 / (2 ln b)."""
    if beta < 0:
        raise ConfigError(f"beta must be >= 0, got {beta}")
    return math.sqrt(2.0 * beta * math.log(base))


@dataclass(frozen=True)
class LognormalSigned(WeightModel):
    """W_k = X_k * exp(sigma*Y - sigma**2/2), one shared normal Y per draw.

    X_k = +-b**-alpha with marginals making E(W_k) = b**-1.  The shared
    lognormal factor means |W1| = |W2| almost surely; only the signs can
    differ.
    """

    base: int
    alpha: float
    sigma: float
    sign_joint: SignJoint = None  # type: ignore[assignment]

    def __post_init__(self):
        _validate_alpha(self.alpha)
        if self.sigma < 0:
            raise ConfigError(f"sigma must be >= 0, got {self.sigma}")
        if self.sign_joint is None:
            p = default_sign_plus(self.base, self.alpha)
            object.__setattr__(self, "sign_joint", SignJoint.independent(p, p))
        want = default_sign_plus(self.base, self.alpha)
        for plus in (self.sign_joint.plus1, self.sign_joint.plus2):
            if abs(plus - want) > 1e-9:
                raise ConfigError(
                    f"sign marginal {plus} does not give E(W_k)=1/b (need {want})"
                )

    @property
    def beta(self) -> float:
        return self.sigma**2 / (2.0 * math.log(self.base))

    @classmethod
    def from_beta(cls, base, alpha, beta, sign_joint=None):
        return cls(base, alpha, sigma_from_beta(beta, base), sign_joint)

    def sample_pairs(self, rng, size):
        u = rng.random(size)
        g = rng.standard_normal(size)
        cell = np.minimum(np.searchsorted(self.sign_joint.cumulative(), u, side="right"), 3)
        s1 = np.where(cell <= 1, 1.0, -1.0)
        s2 = np.where((cell == 0) | (cell == 2), 1.0, -1.0)
        factor = np.exp(self.sigma * g - self.sigma**2 / 2.0)
        mag = self.base**-self.alpha
        return s1 * mag * factor, s2 * mag * factor

    def joint_moment(self, q1, q2):
        s = q1 + q2
        return float(
            self.base ** (-self.alpha * s) * math.exp(self.sigma**2 * (s * s - s) / 2.0)
        )

    def mean(self, k):
        plus = self.sign_joint.plus1 if k == 1 else self.sign_joint.plus2
        return self.base**-self.alpha * (2.0 * plus - 1.0)

    def identical_weights(self):
        return self.sign_joint.diagonal >= 1.0 - _PROB_TOL

    def grad_phi(self, q1, q2):
        s = q1 + q2
        d = self.alpha - self.beta * (2.0 * s - 1.0)
        return (d, d)

    def describe(self):
        sj = self.sign_joint
        return (
            f"kind lognormal\nb {self.base}\nalpha {self.alpha!r}\n"
            f"sigma {self.sigma!r}\nsign ++ {sj.pp!r}\nsign +- {sj.pm!r}\n"
            f"sign -+ {sj.mp!r}\nsign -- {sj.mm!r}\n"
        )


@dataclass(frozen=True)
class Mixed(WeightModel):
    """W1 signed lognormal, W2 = b**-1 * exp(sigma*Y - sigma**2/2) > 0.

    The second coordinate is almost surely positive, so F2 is increasing
    and F induces a random metric on [0, 1].
    """

    base: int
    alpha: float
    sigma: float
    sign_plus: float = None  # type: ignore[assignment]

    def __post_init__(self):
        _validate_alpha(self.alpha)
        if self.sigma < 0:
            raise ConfigError(f"sigma must be >= 0, got {self.sigma}")
        if self.sign_plus is None:
            object.__setattr__(
                self, "sign_plus", default_sign_plus(self.base, self.alpha)
            )
        if not 0.0 <= self.sign_plus <= 1.0:
            raise ConfigError(f"sign_plus must be a probability, got {self.sign_plus}")

    @property
    def beta(self) -> float:
        return self.sigma**2 / (2.0 * math.log(self.base))

    @classmethod
    def from_beta(cls, base, alpha, beta, sign_plus=None):
        return cls(base, alpha, sigma_from_beta(beta, base), sign_plus)

    def sample_pairs(self, rng, size):
        u = rng.random(size)
        g = rng.standard_normal(size)
        s1 = np.where(u < self.sign_plus, 1.0, -1.0)
        factor = np.exp(self.sigma * g - self.sigma**2 / 2.0)
        return s1 * self.base**-self.alpha * factor, factor / self.base

    def joint_moment(self, q1, q2):
        s = q1 + q2
        return float(
            self.base ** -(self.alpha * q1 + q2)
            * math.exp(self.sigma**2 * (s * s - s) / 2.0)
        )

    def mean(self, k):
        if k == 1:
            return self.base**-self.alpha * (2.0 * self.sign_plus - 1.0)
        return 1.0 / self.base

    def identical_weights(self):
        # W1 == W2 a.s. requires X1 deterministic and equal to b**-1.
        return self.alpha == 1.0 and self.sign_plus >= 1.0 - _PROB_TOL

    def grad_phi(self, q1, q2):
        s = q1 + q2
        corr = self.beta * (2.0 * s - 1.0)
        return (self.alpha - corr, 1.0 - corr)

    def describe(self):
        return (
            f"kind mixed\nb {self.base}\nalpha {self.alpha!r}\n"
            f"sigma {self.sigma!r}\nsignplus {self.sign_plus!r}\n"
        )


@dataclass(frozen=True)
class DiscreteTable(WeightModel):
    """Finite-support law given as ((w1, w2), probability) atoms."""

    base: int
    atoms: tuple[tuple[tuple[float, float], float], ...]

    def __post_init__(self):
        if self.base < 2:
            raise ConfigError(f"base must be >= 2, got {self.base}")
        if not self.atoms:
            raise ConfigError("DiscreteTable needs at least one atom")
        atoms = tuple(((float(w1), float(w2)), float(p)) for (w1, w2), p in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        total = sum(p for _, p in atoms)
        if abs(total - 1.0) > _PROB_TOL:
            raise ConfigError(f"atom probabilities sum to {total}, not 1")
        if any(p < -_PROB_TOL for _, p in atoms):
            raise ConfigError("negative atom probability")

    def sample_pairs(self, rng, size):
        u = rng.random(size)
        cum = np.cumsum([p for _, p in self.atoms])
        idx = np.minimum(np.searchsorted(cum, u, side="right"), len(self.atoms) - 1)
        vals = np.array([v for v, _ in self.atoms])
        return vals[idx, 0], vals[idx, 1]

    def joint_moment(self, q1, q2):
        total = 0.0
        for (w1, w2), p in self.atoms:
            if p == 0.0:
                continue
            term = _pow_abs(w1, q1) * _pow_abs(w2, q2)
            if math.isinf(term):
                return math.inf
            total += p * term
        return total

    def mean(self, k):
        return sum(p * (w1 if k == 1 else w2) for (w1, w2), p in self.atoms)

    def identical_weights(self):
        return all(w1 == w2 for (w1, w2), p in self.atoms if p > 0.0)

    def grad_phi(self, q1, q2):
        m = self.joint_moment(q1, q2)
        if math.isinf(m) or m == 0.0:
            raise DivergenceError(f"phi not finite at q=({q1}, {q2})")
        n1 = n2 = 0.0
        for (w1, w2), p in self.atoms:
            if p == 0.0:
                continue
            term = p * _pow_abs(w1, q1) * _pow_abs(w2, q2)
            if term == 0.0:
                continue
            if abs(w1) == 0.0 or abs(w2) == 0.0:
                raise DivergenceError("gradient undefined at a zero atom")
            n1 += term * math.log(abs(w1))
            n2 += term * math.log(abs(w2))
        lb = math.log(self.base)
        return (-n1 / (m * lb), -n2 / (m * lb))

    def describe(self):
        lines = [f"kind table", f"b {self.base}"]
        for (w1, w2), p in self.atoms:
            lines.append(f"atom {w1!r} {w2!r} {p!r}")
        return "\n".join(lines) + "\n"


def finite_difference_grad(model: WeightModel, q1: float, q2: float, h: float = 1e-5):
    """Central-difference gradient of phi; oracle for the analytic forms."""
    vals = [
        model.phi(q1 + h, q2),
        model.phi(q1 - h, q2),
        model.phi(q1, q2 + h),
        model.phi(q1, q2 - h),
    ]
    if any(math.isinf(v) for v in vals):
        raise DivergenceError("phi infinite at a finite-difference stencil point")
    return ((vals[0] - vals[1]) / (2 * h), (vals[2] - vals[3]) / (2 * h))


def _a1_condition_closed_form(alpha: float, beta: float) -> bool:
    """Closed-form admissibility for the lognormal-factor kinds."""
    if beta >= 1.0 or alpha > 1.0:
        return False
    if beta >= 0.25:
        return 2.0 * math.sqrt(beta) - beta < alpha
    return beta + 0.5 < alpha


def check_assumptions(model: WeightModel, grid_points: int = 512) -> AssumptionReport:
    """Verify (A0)-(A2) for a model.

    (A0) is checked against the analytic means; (A1) by scanning
    E|W_k|**q over q in (1, 2] and refining the best candidate by
    trisection; (A2) analytically (the lognormal and fractional kinds
    have all negative moments, a table fails iff it carries a zero
    atom).  For the lognormal-factor kinds the scan answer is
    cross-checked against the closed-form admissibility condition.
    """
    b = model.base
    notes = []

    a0_ok = abs(model.mean(1) - 1.0 / b) <= 1e-9 and abs(model.mean(2) - 1.0 / b) <= 1e-9
    if not a0_ok:
        notes.append(f"means ({model.mean(1)}, {model.mean(2)}) != 1/b")

    def worst(q):
        return max(model.joint_moment(q, 0.0), model.joint_moment(0.0, q))

    qs = 1.0 + np.arange(1, grid_points + 1) / grid_points
    vals = np.array([worst(q) for q in qs])
    i = int(np.argmin(vals))
    lo = qs[max(i - 1, 0)]
    hi = qs[min(i + 1, grid_points - 1)]
    for _ in range(80):  # trisection on the (convex) moment curve
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if worst(m1) <= worst(m2):
            hi = m2
        else:
            lo = m1
    q_best = float(min(max((lo + hi) / 2.0, 1.0 + 1.0 / grid_points), 2.0))
    a1_ok = worst(q_best) < 1.0 / b
    a1_witness = q_best if a1_ok else None

    if isinstance(model, (LognormalSigned, Mixed)):
        closed = _a1_condition_closed_form(model.alpha, model.beta)
        if closed != a1_ok:
            notes.append(
                f"A1 scan ({a1_ok}) disagrees with closed form ({closed}); "
                "trusting the closed form"
            )
            a1_ok = closed
            a1_witness = q_best if closed else None

    if isinstance(model, DiscreteTable):
        a2_ok = all(w1 != 0.0 and w2 != 0.0 for (w1, w2), p in model.atoms if p > 0.0)
        if not a2_ok:
            notes.append("a zero atom gives infinite negative moments (A2 fails)")
    else:
        a2_ok = True  # moduli bounded away from 0 (lognormal has all negative moments)
    a2_witness = 3.0 if a2_ok else None

    return AssumptionReport(a0_ok, a1_ok, a1_witness, a2_ok, a2_witness, "; ".join(notes))

"""Size functionals and the ball rearrangements they induce.

A size functional of degree m fixes n - m compact reference bodies and maps
A -> V(A, ..., A, K_1, ..., K_{n-m}).  Its ball rearrangement replaces a body
by the centered ball of equal size, and a quasi-concave function by the
levelwise rearrangement of its level sets; volume as the size functional
gives the symmetric decreasing rearrangement.

The generalized variant weights the reference slots with quasi-concave
functions having homothetic level sets c_i(t) * K_i; it reduces to the plain
functional times the constant C = integral of prod c_i(t) dt, so rearranges
identically.  Arbitrary weight functions are rejected: without the homothety
the rearrangement would not preserve the functional's value.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .bodies import ConvexBody, volume
from .errors import DegenerateBody, DimensionMismatch
from .mixed_volumes import mixed_volume
from .qc import LevelStack, QCFunction, RadialQC, indicator, mixed_integral
from .quadrature import integrate_height


@dataclass(frozen=True)
class SizeFunctional:
    """A -> V(A, ..., A (m times), references...)."""

    dim: int
    degree: int
    references: tuple = ()
    weights: tuple = ()   # optional RadialQC weights for the generalized variant
    name: str = ""

    def __post_init__(self):
        n, m = self.dim, self.degree
        if not 1 <= m <= n:
            raise ValueError(f"degree must lie in [1, {n}], got {m}")
        refs = tuple(self.references)
        weights = tuple(self.weights)
        if weights:
            if refs:
                raise ValueError("give either reference bodies or weight functions")
            for w in weights:
                if not isinstance(w, RadialQC):
                    raise ValueError(
                        "generalized size functionals need weights with homothetic "
                        "level sets (a radial representation); got a general function")
            refs = tuple(w.base for w in weights)
        if len(refs) != n - m:
            raise ValueError(f"need exactly {n - m} reference bodies")
        for ref in refs:
            if ref.dim != n:
                raise DimensionMismatch("references must live in the ambient dimension")
            if ref.is_empty or (ref.is_ball and ref.radius <= 0) or (
                    ref.is_polytope and ref.affine_rank() < n):
                raise ValueError("references must be compact with nonempty interior")
        object.__setattr__(self, "references", refs)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def vol(cls, dim: int) -> "SizeFunctional":
        return cls(dim=dim, degree=dim, name="vol")

    @classmethod
    def quermass(cls, dim: int, k: int) -> "SizeFunctional":
        """W_k as a size functional: k unit-ball references, degree n - k."""
        if not 0 <= k < dim:
            raise ValueError("quermassintegral index must lie in [0, n)")
        refs = tuple(ConvexBody.ball(1.0, dim) for _ in range(k))
        return cls(dim=dim, degree=dim - k, references=refs, name=f"W{k}")

    @property
    def weight_constant(self) -> float:
        """C = integral of prod c_i(t) dt for the generalized variant, else 1.

        The generalized functional equals C times the plain one built on the
        weight bases, so both rearrange bodies identically.
        """
        if not self.weights:
            return 1.0
        cached = self.__dict__.get("_weight_constant")
        if cached is None:
            def integrand(ts):
                acc = np.ones_like(ts)
                for w in self.weights:
                    acc = acc * w.profile.inv(ts)
                return acc

            cached = integrate_height(integrand)
            if not 0.0 < cached < np.inf:
                raise ValueError("weight functions must have finite positive mass")
            self.__dict__["_weight_constant"] = cached
        return cached

    def ball_value(self) -> float:
        """Size of the unit ball (cached)."""
        cached = self.__dict__.get("_ball_value")
        if cached is None:
            cached = self.eval_body(ConvexBody.ball(1.0, self.dim))
            self.__dict__["_ball_value"] = cached
        return cached

    def eval_body(self, a: ConvexBody) -> float:
        """Phi(A) = V(A, ..., A, references), weighted by C when generalized."""
        if a.dim != self.dim:
            raise DimensionMismatch("body dimension does not match the functional")
        plain = mixed_volume([a] * self.degree + list(self.references))
        return self.weight_constant * plain

    def eval_fn(self, f: QCFunction) -> float:
        """Phi(f) = integral over t of Phi(level set at t)."""
        if self.weights:
            return mixed_integral([f] * self.degree + list(self.weights))
        return mixed_integral([f] * self.degree
                              + [indicator(ref) for ref in self.references])


def eval_body(phi: SizeFunctional, a: ConvexBody) -> float:
    return phi.eval_body(a)


def eval_fn(phi: SizeFunctional, f: QCFunction) -> float:
    return phi.eval_fn(f)


def ball_rearrange(phi: SizeFunctional, a: ConvexBody) -> ConvexBody:
    """The centered ball with the same Phi-size as a.

    Lower-dimensional bodies have Phi = 0 and map to the zero ball.
    """
    if a.is_empty:
        return ConvexBody.empty(phi.dim)
    value = phi.eval_body(a)
    if value <= 0.0:
        if a.is_polytope and a.affine_rank() == a.dim:
            raise DegenerateBody("full-dimensional body with zero size")
        return ConvexBody.ball(0.0, phi.dim)
    radius = (value / phi.ball_value()) ** (1.0 / phi.degree)
    return ConvexBody.ball(radius, phi.dim)


def phi_rearrange(phi: SizeFunctional, f: QCFunction) -> QCFunction:
    """Levelwise ball rearrangement f^Phi (rotation invariant, same Phi-size)."""
    if isinstance(f, LevelStack):
        return LevelStack(
            [(float(t), ball_rearrange(phi, b)) for t, b in zip(f.heights, f.bodies)],
            validate=False)
    if isinstance(f, RadialQC):
        # levelwise: Phi(r * base) = r^m Phi(base), so the rearranged function
        # is radial over the ball matched to the base
        radius = (phi.eval_body(f.base) / phi.ball_value()) ** (1.0 / phi.degree)
        return RadialQC(ConvexBody.ball(radius, f.dim), f.profile)
    heights = np.geomspace(1.0, 1e-3, 64)
    return LevelStack([(float(t), ball_rearrange(phi, f.level_set(float(t))))
                       for t in heights], validate=False)


def sdr(f: QCFunction) -> QCFunction:
    """Symmetric decreasing rearrangement: levelwise equal-volume balls."""
    return phi_rearrange(SizeFunctional.vol(f.dim), f)


def body_rearrange_vol(a: ConvexBody) -> ConvexBody:
    """K*: the ball with the volume of K."""
    return ball_rearrange(SizeFunctional.vol(a.dim), a)


def size_functional_to_json(phi: SizeFunctional) -> dict:
    from .bodies import body_to_json

    return {"dim": phi.dim, "degree": phi.degree,
            "references": [body_to_json(b) for b in phi.references],
            "name": phi.name}


def size_functional_from_json(obj: dict) -> SizeFunctional:
    from .bodies import body_from_json

    return SizeFunctional(dim=int(obj["dim"]), degree=int(obj["degree"]),
                          references=tuple(body_from_json(b)
                                           for b in obj.get("references", [])),
                          name=obj.get("name", ""))

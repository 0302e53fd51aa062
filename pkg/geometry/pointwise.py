"""
Everything the identity catalog needs at one chart point, computed lazily
from a single field bundle of order 2 and shared between identities.
"""
from __future__ import annotations

from functools import cached_property
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from geometry.connections import (
    Bundle,
    christoffel_jet,
    curvature_from_jet,
    exterior_derivative_eta_jet,
    exterior_derivative_jet,
    nabla_components,
    torsion_from_coefficients,
)
from geometry.einstein import einstein_builder, emc_residual
from geometry.nijenhuis import lower_last, nijenhuis_vector
from manifolds.fields import FIELD_ORDER, FIELD_VALENCE, FieldProvider
from utils.errors import MissingFieldError
from utils.jets import Jet


class PointGeometry:
    """Lazily evaluated geometry of a provider at one point.

    `builder` defaults to the skew-torsion Einstein connection; every
    quantity without a `_g` suffix refers to it.
    """

    def __init__(self, provider: FieldProvider, point: Sequence[float],
                 builder: Optional[Callable[[Bundle], Jet]] = None):
        self.provider = provider
        self.point = np.asarray(point, dtype=float)
        self.dim = provider.dim
        self.builder = builder or einstein_builder
        self._nabla_cache: Dict[tuple, np.ndarray] = {}

    @cached_property
    def bundle(self) -> Bundle:
        return self.provider.bundle(self.point, FIELD_ORDER)

    def field(self, name: str) -> np.ndarray:
        if name not in self.bundle:
            raise MissingFieldError(name, f"spec '{self.provider.spec.name}'")
        return self.bundle[name].value

    @property
    def g(self) -> np.ndarray:
        return self.field("g")

    @property
    def ginv(self) -> np.ndarray:
        return self.field("ginv")

    @property
    def F(self) -> np.ndarray:
        return self.field("F")

    @property
    def A(self) -> np.ndarray:
        return self.field("A")

    @property
    def Q(self) -> np.ndarray:
        return self.field("Q")

    @property
    def xi(self) -> np.ndarray:
        return self.field("xi")

    @property
    def eta(self) -> np.ndarray:
        return self.field("eta")

    # connections

    @cached_property
    def gam_g_jet(self) -> Jet:
        return christoffel_jet(self.bundle["g"], self.bundle["ginv"])

    @cached_property
    def gam_jet(self) -> Jet:
        return self.builder(self.bundle)

    @property
    def gam_g(self) -> np.ndarray:
        return self.gam_g_jet.value

    @property
    def gam(self) -> np.ndarray:
        return self.gam_jet.value

    @cached_property
    def torsion(self):
        return torsion_from_coefficients(self.gam, self.g)

    @property
    def T_vec(self) -> np.ndarray:
        return self.torsion[0]

    @property
    def T(self) -> np.ndarray:
        return self.torsion[1]

    @cached_property
    def K(self) -> np.ndarray:
        return np.einsum("ks,sij->ijk", self.g, self.gam - self.gam_g)

    @cached_property
    def R_g(self) -> np.ndarray:
        return curvature_from_jet(self.gam_g_jet)

    @cached_property
    def emc(self) -> np.ndarray:
        return emc_residual(self.gam, self.bundle["G"])

    # forms

    @cached_property
    def dF(self) -> np.ndarray:
        return exterior_derivative_jet(self.bundle["F"]).value

    @cached_property
    def deta(self) -> np.ndarray:
        if "eta" not in self.bundle:
            raise MissingFieldError("eta", f"spec '{self.provider.spec.name}'")
        return exterior_derivative_eta_jet(self.bundle["eta"]).value

    # covariant derivatives, differentiation index first

    def _nabla_of(self, name: str, gam: np.ndarray, key: str) -> np.ndarray:
        cache_key = (key, name)
        if cache_key not in self._nabla_cache:
            if name not in self.bundle:
                raise MissingFieldError(name, f"spec '{self.provider.spec.name}'")
            self._nabla_cache[cache_key] = nabla_components(gam, self.bundle[name], FIELD_VALENCE[name])
        return self._nabla_cache[cache_key]

    def nabla_g(self, name: str) -> np.ndarray:
        return self._nabla_of(name, self.gam_g, "g")

    def nabla_e(self, name: str) -> np.ndarray:
        return self._nabla_of(name, self.gam, "e")

    @cached_property
    def L_g(self) -> np.ndarray:
        """L[m, j, k] = g((nabla^g_m A) e_j, e_k)."""
        return np.einsum("kp,mpj->mjk", self.g, self.nabla_g("A"))

    # Nijenhuis tensors, lowered in the last slot

    @cached_property
    def N_A(self) -> np.ndarray:
        return lower_last(nijenhuis_vector(self.bundle["A"]), self.g)

    @cached_property
    def N_Q(self) -> np.ndarray:
        return lower_last(nijenhuis_vector(self.bundle["Q"]), self.g)

    @property
    def contact(self) -> bool:
        return "xi" in self.bundle

"""
Builds the physical model of an experiment from its config: cavity, site
subclasses, field orientation and the ensemble lines seen by the resonator.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from spinres.models.cavity import CavityParams, EnsembleTransition
from spinres.models.config import ExperimentConfig, SiteSection
from spinres.models.spin import FieldVector, SpinSystem
from spinres.services.cavity_model import resonance_field
from spinres.services.spin_hamiltonian import effective_g, misaligned_field, resonance_fields, subclasses
from spinres.services.thermal import polarization

logger = logging.getLogger(__name__)

# |<j|n.g.S|i>|^2 below this counts as a forbidden line
ALLOWED_STRENGTH = 1e-3


@dataclass(frozen=True)
class SiteSubclass:
    label: str
    site: SiteSection
    system: SpinSystem


class ExperimentService:
    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.cavity: CavityParams = config.cavity.params()
        self.sweep = config.sweep

    @property
    def field_direction(self) -> np.ndarray:
        """Unit field direction after the configured misalignment"""
        return misaligned_field(self.sweep.direction, 1.0, self.sweep.misalignment, self.sweep.tilt_axis).array

    @property
    def drive_direction(self) -> np.ndarray:
        n = np.asarray(self.sweep.drive_direction, dtype=float)
        return n / np.linalg.norm(n)

    def field_at(self, magnitude: float) -> FieldVector:
        return misaligned_field(self.sweep.direction, magnitude, self.sweep.misalignment, self.sweep.tilt_axis)

    def field_grid(self) -> np.ndarray:
        return self.sweep.grid()

    def site_subclasses(self) -> List[SiteSubclass]:
        """Every configured site, split into its C2 subclasses when an axis is given"""
        result = []
        for label, site in self.config.sites.items():
            for sub_label, system in subclasses(label, site.spin_system(), site.subclass_axis):
                result.append(SiteSubclass(sub_label, site, system))
        return result

    def g_coll_scale(self) -> float:
        """sqrt(polarization) at the configured temperature, 1 without one"""
        if self.sweep.temperature is None:
            return 1.0
        return math.sqrt(polarization(self.cavity.f_r, self.sweep.temperature))

    def ensemble_transitions(self) -> List[EnsembleTransition]:
        """Lines with gamma and g_coll configured; g from the tensor projected on the field"""
        scale = self.g_coll_scale()
        direction = self.field_direction
        lines = []
        for sub in self.site_subclasses():
            if not sub.site.has_ensemble:
                logger.debug(f"Site {sub.label} has no gamma/g_coll, skipped in the linewidth model")
                continue
            scalar = sub.site.scalar_g
            g_factor = scalar if scalar is not None and sub.site.subclass_axis is None \
                else effective_g(sub.system.g, direction)
            lines.append(sub.site.ensemble(sub.label, g_factor, scale))

        if scale != 1.0:
            logger.info(f"g_coll scaled by {scale:.4f} for T = {self.sweep.temperature} K")
        return lines

    def resonance_fields(self, field_max: Optional[float] = None) -> List[tuple]:
        """(label, [fields in T]) where each subclass meets the cavity frequency"""
        field_max = self.sweep.B_stop if field_max is None else field_max
        result = []
        for sub in self.site_subclasses():
            if sub.site.scalar_g is not None and sub.site.subclass_axis is None and sub.system.I == 0:
                line = EnsembleTransition(label=sub.label, g_factor=sub.site.scalar_g, gamma=1.0)
                field = resonance_field(line, self.cavity.f_r)
                result.append((sub.label, [field] if field <= field_max else []))
                continue
            fields = resonance_fields(sub.system, self.field_direction, self.cavity.f_r_mhz, field_max,
                                      drive_direction=self.drive_direction if sub.system.I > 0 else None,
                                      strength_floor=ALLOWED_STRENGTH)
            result.append((sub.label, fields))
        return result

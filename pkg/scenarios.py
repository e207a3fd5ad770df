#!/usr/bin/env python3
"""
Constructors for the standard example systems.

Basis orderings put ground states first so CSV columns are stable:

    two-level       [0, 1]           ground {0}
    four-level      [g1, g2, e1, e2] ground {0, 1}
    raman           [0, 1, e]        ground {0, 1}
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from errors import InvalidParameter
from system_model import FieldDrive, SystemSpec

logger = logging.getLogger(__name__)

STRONG_COUPLING_RATIO = 10.0


def _require_positive(**values: float) -> None:
    for name, v in values.items():
        if not (v > 0.0 and math.isfinite(v)):
            raise InvalidParameter(f"{name} must be positive, got {v}")


def _require_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise InvalidParameter(f"{name} must be finite, got {v}")


def _ket_bra(dim: int, row: int, col: int, value: complex = 1.0) -> np.ndarray:
    m = np.zeros((dim, dim), dtype=np.complex128)
    m[row, col] = value
    return m


def two_level(omega: float, delta: float, gamma: float) -> SystemSpec:
    """|0> coupled to a decaying |1> with Rabi frequency omega at detuning delta."""
    _require_finite(omega=omega, delta=delta)
    _require_positive(gamma=gamma)
    h = np.array([[0.0, omega / 2.0],
                  [omega / 2.0, delta]], dtype=np.complex128)
    return SystemSpec(
        dim=2,
        ground_indices=(0,),
        hamiltonian=h,
        jumps=[("gamma", _ket_bra(2, 0, 1, math.sqrt(gamma)))],
        basis_labels=("0", "1"),
    )


def engineered_four_level(omega: float, Delta: float, delta: float, g: float,
                          gamma: float, kappa: float) -> SystemSpec:
    """
    Drive g1 -> e1, coherent coupling e1 <-> e2, decays e1 -> g1 (gamma) and
    e2 -> g2 (kappa). H_g = 0; the effective kappa decay pumps g1 into g2.
    """
    _require_finite(omega=omega, Delta=Delta, delta=delta, g=g)
    _require_positive(gamma=gamma, kappa=kappa)
    h = np.zeros((4, 4), dtype=np.complex128)
    h[2, 2] = Delta
    h[3, 3] = delta
    h[2, 3] = h[3, 2] = g
    h[0, 2] = h[2, 0] = omega / 2.0
    return SystemSpec(
        dim=4,
        ground_indices=(0, 1),
        hamiltonian=h,
        jumps=[("gamma", _ket_bra(4, 0, 2, math.sqrt(gamma))),
               ("kappa", _ket_bra(4, 1, 3, math.sqrt(kappa)))],
        basis_labels=("g1", "g2", "e1", "e2"),
    )


def optimal_detunings(g: float, gamma: float, kappa: float) -> Tuple[float, float]:
    """Delta_opt = g sqrt(gamma/kappa), delta_opt = g^2 / Delta_opt."""
    _require_positive(g=g, gamma=gamma, kappa=kappa)
    if g < STRONG_COUPLING_RATIO * max(gamma, kappa):
        logger.warning("coupling g=%.3g is not much larger than gamma=%.3g, kappa=%.3g; "
                       "the optimum formula assumes g >> gamma, kappa", g, gamma, kappa)
    big = g * math.sqrt(gamma / kappa)
    return big, g * g / big


def engineered_four_level_optimal(omega: float, g: float, gamma: float, kappa: float) -> SystemSpec:
    Delta, delta = optimal_detunings(g, gamma, kappa)
    return engineered_four_level(omega, Delta, delta, g, gamma, kappa)


def _check_raman_decay(gamma0: float, gamma1: float, allow_no_decay: bool) -> None:
    for name, v in (("gamma0", gamma0), ("gamma1", gamma1)):
        if not (v >= 0.0 and math.isfinite(v)):
            raise InvalidParameter(f"{name} must be nonnegative, got {v}")
    if gamma0 + gamma1 <= 0.0 and not allow_no_decay:
        raise InvalidParameter("gamma0 + gamma1 must be positive; pass allow_no_decay for the "
                               "dissipation-free limit")


def _raman_jumps(gamma0: float, gamma1: float):
    return [("gamma0", _ket_bra(3, 0, 2, math.sqrt(gamma0))),
            ("gamma1", _ket_bra(3, 1, 2, math.sqrt(gamma1)))]


def raman_three_level(omega0: float, omega1: float, Delta0: float, Delta1: float,
                      gamma0: float, gamma1: float, allow_no_decay: bool = False,
                      omega2: float = 0.0) -> SystemSpec:
    """
    Lambda system in the frame where the excited level has no energy:
    H_g = -Delta0 |0><0| - Delta1 |1><1| (+ omega2/2 coupling), H_e = 0.

    H_g is not perturbative here, so derive with the dressed variant.
    With allow_no_decay the gamma = 0 limit is accepted; the effective
    dynamics is then purely Hamiltonian.
    """
    _require_finite(omega0=omega0, omega1=omega1, Delta0=Delta0, Delta1=Delta1, omega2=omega2)
    _check_raman_decay(gamma0, gamma1, allow_no_decay)
    h = np.zeros((3, 3), dtype=np.complex128)
    h[0, 0] = -Delta0
    h[1, 1] = -Delta1
    h[0, 1] = h[1, 0] = omega2 / 2.0
    h[0, 2] = h[2, 0] = omega0 / 2.0
    h[1, 2] = h[2, 1] = omega1 / 2.0
    return SystemSpec(
        dim=3,
        ground_indices=(0, 1),
        hamiltonian=h,
        jumps=_raman_jumps(gamma0, gamma1),
        basis_labels=("0", "1", "e"),
    )


def raman_three_level_fields(omega0: float, omega1: float, Delta0: float, Delta1: float,
                             gamma0: float, gamma1: float, allow_no_decay: bool = False) -> SystemSpec:
    """The same Raman system with the detunings moved onto two drive frequencies w_l = -Delta_l."""
    _require_finite(omega0=omega0, omega1=omega1, Delta0=Delta0, Delta1=Delta1)
    _check_raman_decay(gamma0, gamma1, allow_no_decay)
    return SystemSpec(
        dim=3,
        ground_indices=(0, 1),
        hamiltonian=np.zeros((3, 3), dtype=np.complex128),
        jumps=_raman_jumps(gamma0, gamma1),
        fields=(FieldDrive("omega0", _ket_bra(3, 2, 0, omega0 / 2.0), -Delta0),
                FieldDrive("omega1", _ket_bra(3, 2, 1, omega1 / 2.0), -Delta1)),
        basis_labels=("0", "1", "e"),
    )


# ---------- presets ----------

ParamValue = Union[float, bool]


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class Preset:
    name: str
    build: Callable[..., SystemSpec]
    defaults: Mapping[str, ParamValue]
    initial_index: int
    variant: str
    description: str = ""

    def parameters(self, overrides: Optional[Mapping[str, object]] = None) -> Dict[str, ParamValue]:
        """Defaults updated with `overrides`; string values are converted to the default's type."""
        params = dict(self.defaults)
        for key, raw in (overrides or {}).items():
            if key not in self.defaults:
                raise InvalidParameter(f"preset {self.name} has no parameter {key!r} "
                                       f"(known: {', '.join(self.defaults)})")
            kind = type(self.defaults[key])
            try:
                if kind is bool:
                    value = _parse_bool(raw) if isinstance(raw, str) else bool(raw)
                else:
                    value = float(raw)
            except (TypeError, ValueError) as e:
                raise InvalidParameter(f"preset {self.name}: bad value for {key}: {e}") from e
            params[key] = value
        return params

    def spec(self, overrides: Optional[Mapping[str, object]] = None) -> SystemSpec:
        return self.build(**self.parameters(overrides))


PRESETS: Dict[str, Preset] = {
    p.name: p for p in (
        Preset("two-level", two_level,
               {"omega": 0.1, "delta": 1.0, "gamma": 0.2},
               initial_index=0, variant="basic",
               description="driven two-level atom, Stark shift and Rayleigh scattering"),
        Preset("four-level", engineered_four_level,
               {"omega": 0.01, "Delta": 1.0, "delta": 1.0, "g": 1.0, "gamma": 0.1, "kappa": 0.1},
               initial_index=0, variant="basic",
               description="engineered decay g1 -> g2 at the optimal detunings"),
        Preset("raman", raman_three_level,
               {"omega0": 0.1, "omega1": 0.1, "Delta0": 0.495, "Delta1": 0.505,
                "gamma0": 0.1, "gamma1": 0.1, "allow_no_decay": False, "omega2": 0.0},
               initial_index=1, variant="dressed",
               description="dissipative Raman transition between two ground states"),
        Preset("raman-fields", raman_three_level_fields,
               {"omega0": 0.1, "omega1": 0.1, "Delta0": 0.495, "Delta1": 0.505,
                "gamma0": 0.1, "gamma1": 0.1, "allow_no_decay": False},
               initial_index=1, variant="fields",
               description="the Raman system with its detunings carried by the drive frequencies"),
    )
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise InvalidParameter(f"unknown preset {name!r} (available: {', '.join(PRESETS)})") from None

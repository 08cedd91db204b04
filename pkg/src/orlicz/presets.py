"""Named ``(phi, phi1)`` pairs used by the CLI and the verification suites.

Each entry is written in the function language so it doubles as a fixture.
"""

from __future__ import annotations

from dataclasses import dataclass

from .funcdsl import parse
from .young import YoungFunction


@dataclass(frozen=True)
class Preset:
    name: str
    phi: str
    phi1: str
    note: str = ""

    def functions(self) -> tuple[YoungFunction, YoungFunction]:
        return parse(self.phi), parse(self.phi1)

    @property
    def both_unbounded(self) -> bool:
        phi, phi1 = self.functions()
        return phi.b_phi == float("inf") and phi1.b_phi == float("inf")


PRESETS = {
    p.name: p
    for p in [
        Preset("holder", "pow(2)", "pow(3)", "M(L^3, L^2) = L^6"),
        Preset("power-1.5-3", "pow(1.5)", "pow(3)", "M(L^3, L^1.5) = L^3"),
        Preset("power-2-4", "pow(2)", "pow(4)", "M(L^4, L^2) = L^4"),
        Preset("linfty", "pow(2)", "pow(2)", "M(L^2, L^2) = L^inf"),
        Preset("l1-dual", "id", "pow(2,0.5)", "classical conjugate of u^2/2"),
        Preset("l1-exp", "id", "expm1()", "classical conjugate of e^u - 1"),
        Preset("square-exp", "pow(2)", "expm1()", "L^2 against the exponential class"),
        Preset("trivial", "cut(pow(2),1,inf)", "pow(2)", "b_phi finite, b_phi1 infinite: M = {0}"),
        Preset("cutoff-equal", "cut(pow(2),1,inf)", "cut(pow(2),1,inf)", "b_phi = b_phi1 = 1"),
        Preset("cutoff-closed", "cut(pow(2),2,inf)", "cut(pow(3),1,1)", "phi1 finite at its b"),
        Preset("unbounded-over-cutoff", "pow(2)", "cut(pow(2),1,inf)", "b_phi infinite, b_phi1 finite"),
        Preset("knee", "knee(1)", "pow(2)", "phi vanishes below 1"),
    ]
}

# pairs with b_phi = b_phi1 = inf, where the reverse-estimate drill applies
UNBOUNDED = ["holder", "power-1.5-3", "power-2-4", "linfty", "l1-dual", "l1-exp", "square-exp", "knee"]

# the b = inf power family; the factorization criterion holds with constant ratio
POWER_FAMILY = ["holder", "power-1.5-3", "power-2-4"]

# ten pairs for the Young inequality sweep, cut-off cases included
YOUNG_SWEEP = [
    "holder", "power-2-4", "linfty", "l1-dual", "l1-exp", "square-exp",
    "trivial", "cutoff-equal", "cutoff-closed", "unbounded-over-cutoff",
]

# six pairs for the Hölder sweep
HOLDER_SWEEP = ["holder", "power-1.5-3", "linfty", "l1-dual", "square-exp", "cutoff-equal"]


def get(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}") from None

from enum import Enum


class BumpKind(str, Enum):
    smooth = "smooth-bump"
    polynomial = "polynomial-C2-bump"
    hat = "hat"


class DomainKind(str, Enum):
    interval = "interval"
    rectangle = "rectangle"


class FormKind(str, Enum):
    frac = "frac"
    log = "log"
    mass = "mass"


class Method(str, Enum):
    spatial = "spatial"
    fourier = "fourier"


class SymbolKind(str, Enum):
    power = "power"
    log = "log"


# NLFM header byte for each matrix kind
FORM_KIND_CODES = {FormKind.frac: 0, FormKind.log: 1, FormKind.mass: 2}

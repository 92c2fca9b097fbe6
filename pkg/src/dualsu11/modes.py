"""Labels for the four optical modes of the dual interferometer.

Physical modes are stored in a fixed order::

    0: signal-H   1: signal-V   2: idler-H   3: idler-V

Loss ancillas are appended after index 3 and are never detected.
"""

from enum import Enum, IntEnum


class Frequency(str, Enum):
    SIGNAL = "s"
    IDLER = "i"


class Polarization(str, Enum):
    H = "H"
    V = "V"


class ModeIndex(IntEnum):
    SH = 0
    SV = 1
    IH = 2
    IV = 3

    @property
    def frequency(self) -> Frequency:
        return Frequency.SIGNAL if self.value < 2 else Frequency.IDLER

    @property
    def polarization(self) -> Polarization:
        return Polarization.H if self.value % 2 == 0 else Polarization.V

    @property
    def label(self) -> str:
        return f"{self.frequency.value}{self.polarization.value}"

    @classmethod
    def of(cls, frequency, polarization) -> "ModeIndex":
        f = Frequency(frequency)
        p = Polarization(polarization)
        return cls(2 * (f is Frequency.IDLER) + (p is Polarization.V))

    @classmethod
    def parse(cls, value) -> "ModeIndex":
        """Accept a ModeIndex, an integer, or a label such as ``"sH"``/``"iV"``."""
        if isinstance(value, ModeIndex):
            return value
        if isinstance(value, str):
            key = value.strip()
            for m in cls:
                if key in (m.label, m.name):
                    return m
            raise ValueError(f"unknown mode label {value!r}; expected one of sH, sV, iH, iV")
        return cls(int(value))


N_PHYSICAL = 4
SIGNAL_PAIR = (ModeIndex.SH, ModeIndex.SV)
IDLER_PAIR = (ModeIndex.IH, ModeIndex.IV)

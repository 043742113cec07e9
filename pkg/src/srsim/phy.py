"""11ax PHY abstraction: MCS ladder, data rates, frame airtimes, reception rule."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction


class NoLinkError(ValueError):
    """Received power is below the most robust MCS sensitivity."""


class FrameKind(enum.Enum):
    RTS = "RTS"
    CTS = "CTS"
    DATA_AMPDU = "DATA"
    BACK = "BACK"


class Reception(enum.Enum):
    SUCCESS = "success"
    FAILURE_CCA = "failure_cca"
    FAILURE_CAPTURE = "failure_capture"


@dataclass(frozen=True)
class PhyMacConstants:
    # durations in microseconds, lengths in bits
    sigma_leg_us: float = 4
    sigma_32_us: float = 16
    n_sc: int = 234
    n_ss: int = 1
    slot_us: float = 9
    sifs_us: float = 16
    difs_us: float = 34
    pifs_us: float = 25
    phy_leg_us: float = 20
    he_su_us: float = 100
    ack_us: float = 28
    back_us: float = 32
    legacy_symbol_bits: int = 24
    packet_bits: int = 12000
    n_agg: int = 64
    rts_bits: int = 160
    cts_bits: int = 112
    service_bits: int = 16
    mac_header_bits: int = 320
    cw: int = 15
    ce_db: float = 10.0

    def ns(self, name: str) -> int:
        """A duration field converted to integer nanoseconds."""
        return round(getattr(self, name) * 1000)


DEFAULT_PHY = PhyMacConstants()


@dataclass(frozen=True)
class McsEntry:
    index: int
    bits_per_subcarrier: int
    coding_rate: Fraction
    min_sensitivity_dbm: float

    @property
    def label(self) -> str:
        names = {1: "BPSK", 2: "QPSK", 4: "16-QAM", 6: "64-QAM", 8: "256-QAM", 10: "1024-QAM"}
        return f"MCS{self.index} {names[self.bits_per_subcarrier]} {self.coding_rate}"


# 20 MHz minimum-sensitivity ladder of the 11ax amendment
MCS_TABLE: tuple[McsEntry, ...] = tuple(
    McsEntry(i, bits, Fraction(rate), sens)
    for i, (bits, rate, sens) in enumerate([
        (1, "1/2", -82), (2, "1/2", -79), (2, "3/4", -77), (4, "1/2", -74),
        (4, "3/4", -70), (6, "2/3", -66), (6, "3/4", -65), (6, "5/6", -64),
        (8, "3/4", -59), (8, "5/6", -57), (10, "3/4", -54), (10, "5/6", -52),
    ])
)


def select_mcs(rx_power_dbm: float, table=MCS_TABLE) -> McsEntry:
    best = None
    for entry in table:
        if entry.min_sensitivity_dbm <= rx_power_dbm:
            best = entry
    if best is None:
        raise NoLinkError(f"rx power {rx_power_dbm:.2f} dBm below MCS0 sensitivity")
    return best


def bits_per_symbol(mcs: McsEntry, phy: PhyMacConstants = DEFAULT_PHY) -> Fraction:
    return phy.n_sc * mcs.bits_per_subcarrier * mcs.coding_rate * phy.n_ss


def data_rate_bps(mcs: McsEntry, phy: PhyMacConstants = DEFAULT_PHY) -> float:
    return float(bits_per_symbol(mcs, phy)) / (phy.sigma_32_us * 1e-6)


def _ceil_div(num, den) -> int:
    return math.ceil(Fraction(num) / Fraction(den))


def frame_duration_us(kind: FrameKind, n_agg: int = 1, mcs: McsEntry | None = None,
                      phy: PhyMacConstants = DEFAULT_PHY) -> float:
    if kind is FrameKind.DATA_AMPDU:
        if not 1 <= n_agg <= phy.n_agg:
            raise ValueError(f"n_agg={n_agg} outside [1, {phy.n_agg}]")
        if mcs is None:
            raise ValueError("DATA_AMPDU duration needs an MCS")
        payload = phy.service_bits + n_agg * (phy.mac_header_bits + phy.packet_bits)
        n_sym = _ceil_div(payload, bits_per_symbol(mcs, phy))
        return phy.phy_leg_us + phy.he_su_us + n_sym * phy.sigma_32_us
    if kind is FrameKind.RTS:
        n_sym = _ceil_div(phy.service_bits + phy.rts_bits, phy.legacy_symbol_bits)
        return phy.phy_leg_us + n_sym * phy.sigma_leg_us
    if kind is FrameKind.CTS:
        n_sym = _ceil_div(phy.service_bits + phy.cts_bits, phy.legacy_symbol_bits)
        return phy.phy_leg_us + n_sym * phy.sigma_leg_us
    return phy.back_us


def frame_duration_ns(kind: FrameKind, n_agg: int = 1, mcs: McsEntry | None = None,
                      phy: PhyMacConstants = DEFAULT_PHY) -> int:
    return round(frame_duration_us(kind, n_agg, mcs, phy) * 1000)


def reception_check(rx_power_dbm: float, min_sinr_over_frame_db: float,
                    cca_cs_dbm: float = -82.0, ce_db: float = 10.0) -> Reception:
    # rx power must stay decodable and the SINR must hold over the whole frame
    if rx_power_dbm < cca_cs_dbm:
        return Reception.FAILURE_CCA
    if min_sinr_over_frame_db < ce_db:
        return Reception.FAILURE_CAPTURE
    return Reception.SUCCESS

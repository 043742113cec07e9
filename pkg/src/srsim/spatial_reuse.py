"""OBSS PD-based spatial reuse: frame classification, thresholds and power limits."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

OBSS_PD_MIN = -82.0
OBSS_PD_MAX = -62.0
CCA_CS_DEFAULT = -82.0


class FrameClassification(enum.Enum):
    INTRA_BSS = "intra"
    INTER_BSS_SRG = "inter_srg"
    INTER_BSS_NON_SRG = "inter_non_srg"


class Detection(enum.Enum):
    OPPORTUNITY = "opportunity"
    BUSY = "busy"
    UNDETECTED = "undetected"


@dataclass(frozen=True)
class SrConfig:
    enabled: bool = False
    bss_color: int = 0
    srg_id: int | None = None
    obss_pd_nonsrg_dbm: float = OBSS_PD_MIN
    obss_pd_srg_dbm: float = OBSS_PD_MIN
    tx_pwr_ref_dbm: float = 21.0
    cca_cs_dbm: float = CCA_CS_DEFAULT


def classify_frame(observer: SrConfig, frame_color: int, frame_srg: int | None) -> FrameClassification:
    if observer.bss_color == frame_color:
        return FrameClassification.INTRA_BSS
    if observer.srg_id is not None and frame_srg is not None and observer.srg_id == frame_srg:
        return FrameClassification.INTER_BSS_SRG
    return FrameClassification.INTER_BSS_NON_SRG


def applicable_threshold(observer: SrConfig, cls: FrameClassification) -> float:
    if not observer.enabled or cls is FrameClassification.INTRA_BSS:
        return observer.cca_cs_dbm
    if cls is FrameClassification.INTER_BSS_SRG:
        return observer.obss_pd_srg_dbm
    return observer.obss_pd_nonsrg_dbm


def detect_opportunity(p_rx_dbm: float, cca_cs_dbm: float, obss_pd_dbm: float) -> Detection:
    if obss_pd_dbm < cca_cs_dbm:
        raise ValueError(f"OBSS/PD {obss_pd_dbm} dBm below CCA/CS {cca_cs_dbm} dBm")
    if p_rx_dbm < cca_cs_dbm:
        return Detection.UNDETECTED
    if p_rx_dbm < obss_pd_dbm:
        return Detection.OPPORTUNITY
    return Detection.BUSY


def max_tx_power(obss_pd_dbm: float, tx_pwr_ref_dbm: float = 21.0, device_max_dbm: float = 20.0) -> float:
    """Transmit power cap for a transmission held on an opportunity detected at ``obss_pd_dbm``."""
    if obss_pd_dbm <= OBSS_PD_MIN:
        return device_max_dbm
    return min(device_max_dbm, tx_pwr_ref_dbm - (obss_pd_dbm - OBSS_PD_MIN))


def obss_pd_upper_bound(tx_pwr_dbm: float, tx_pwr_ref_dbm: float = 21.0) -> float:
    return max(OBSS_PD_MIN, min(OBSS_PD_MAX, OBSS_PD_MIN + (tx_pwr_ref_dbm - tx_pwr_dbm)))


@dataclass
class PowerLimitState:
    """Pending power caps collected from opportunities seen before transmitting."""

    pending_opportunities: list[tuple[int, float]] = field(default_factory=list)

    @property
    def active_limit_dbm(self) -> float | None:
        if not self.pending_opportunities:
            return None
        return min(limit for _, limit in self.pending_opportunities)

    def clear(self) -> None:
        self.pending_opportunities.clear()


def merge_power_limits(state: PowerLimitState, new_limit_dbm: float, frame_id: int = -1) -> PowerLimitState:
    # the most restrictive cap wins; mutates and returns ``state``
    state.pending_opportunities.append((frame_id, new_limit_dbm))
    return state

"""Channel scanning algorithms over a simulated radio environment.

The scanner owns a discovery log (canonical device -> first-seen time) and
walks channels under an SDR model whose one hard constraint is the
instantaneous bandwidth: channels whose spans fit inside it together can be
received in parallel for the price of a single dwell.

Algorithms build on each other:

  listen                one channel, one dwell window
  passive_scan          round-robin listen over a channel list
  probe_channels        probe + short listen per channel; collects the
                        channels that showed any traffic
  active_scan           probe first, then passive only on active channels
  listen_in_parallel    union of listens across one bandwidth-fitting group
  multiprotocol_scan    partition channels into bandwidth groups, then
                        round-robin groups with parallel listens
  active_multiprotocol_scan
                        probe one protocol, merge its active channels with
                        the always-scanned list, multiprotocol over the merge
  sequential_passive_scan
                        baseline: finish one protocol's passive scan before
                        starting the next
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import frames
from .address import DeviceAddress
from .channels import Channel, Protocol, channel_sort_key, zwave_uses_crc16
from .errors import ParameterError
from .simulation import Environment

DEFAULT_PROBE_DWELL_S = 0.2


@dataclass(frozen=True)
class SdrConfig:
    """Receiver model: how much spectrum fits at once, and the hop cost."""

    instantaneous_bandwidth_hz: int
    retune_latency_s: float = 0.0

    def __post_init__(self):
        if self.instantaneous_bandwidth_hz <= 0:
            raise ParameterError("instantaneous bandwidth must be positive")
        if self.retune_latency_s < 0:
            raise ParameterError("retune latency must be >= 0")


@dataclass(frozen=True)
class ScanParams:
    dwell_time_s: float
    scan_time_s: float

    def __post_init__(self):
        if not 0 < self.dwell_time_s <= self.scan_time_s:
            raise ParameterError(
                f"need 0 < dwell ({self.dwell_time_s}) <= scan time ({self.scan_time_s})"
            )


@dataclass
class DiscoveryLog:
    """First-seen timestamps per canonical device, plus every raw address."""

    first_seen: dict[str, float] = field(default_factory=dict)
    addresses: set[DeviceAddress] = field(default_factory=set)

    def record(self, device: str, t: float, addr: DeviceAddress) -> None:
        self.addresses.add(addr)
        if device not in self.first_seen:
            self.first_seen[device] = t

    def covers(self, names: frozenset[str]) -> bool:
        return names <= self.first_seen.keys()


def find_channels_in_range(ch_list: Sequence[Channel], bandwidth_hz: int) -> list[Channel]:
    """Channels whose whole band fits in ``bandwidth_hz`` anchored at the
    first channel's lower edge.

    ``ch_list`` must be ascending by frequency. The first element is always
    included, so the result is never empty. Doubled-integer arithmetic keeps
    the edge comparison exact.
    """
    if not ch_list:
        raise ParameterError("channel list is empty")
    _require_ascending(ch_list)
    first = ch_list[0]
    anchor2 = 2 * first.center_freq_hz - first.bandwidth_hz  # 2 * lower edge
    out = [first]
    for ch in ch_list[1:]:
        if (2 * ch.center_freq_hz + ch.bandwidth_hz) - anchor2 <= 2 * bandwidth_hz:
            out.append(ch)
    return out


def plan_channel_groups(ch_list: Sequence[Channel], bandwidth_hz: int) -> list[list[Channel]]:
    """Greedy partition into bandwidth-fitting groups, lowest frequency first."""
    if not ch_list:
        raise ParameterError("channel list is empty")
    _require_ascending(ch_list)
    unscanned = list(ch_list)
    groups: list[list[Channel]] = []
    while unscanned:
        group = find_channels_in_range(unscanned, bandwidth_hz)
        groups.append(group)
        taken = set(group)
        unscanned = [ch for ch in unscanned if ch not in taken]
    return groups


def _require_ascending(ch_list: Sequence[Channel]) -> None:
    keys = [channel_sort_key(ch) for ch in ch_list]
    if keys != sorted(keys):
        raise ParameterError("channel list must be sorted by ascending frequency")


class Scanner:
    """Runs scan algorithms against one Environment, accumulating discoveries.

    ``until_complete`` (a set of canonical device names) lets an experiment
    runner stop a scan as soon as everything it is measuring has been found;
    windows past that point can never change a first-seen time, so recorded
    discovery times are identical with or without it.
    """

    def __init__(
        self,
        env: Environment,
        sdr: SdrConfig,
        *,
        probe_dwell_time_s: float = DEFAULT_PROBE_DWELL_S,
    ):
        if probe_dwell_time_s <= 0:
            raise ParameterError("probe dwell must be positive")
        self.env = env
        self.sdr = sdr
        self.probe_dwell_time_s = probe_dwell_time_s
        self.log = DiscoveryLog()
        self._t0 = env.clock

    # -- building blocks ------------------------------------------------------

    def _ingest(self, emissions) -> set[DeviceAddress]:
        found: set[DeviceAddress] = set()
        for em in emissions:
            hint = (
                zwave_uses_crc16(em.channel)
                if em.channel.protocol is Protocol.ZWAVE
                else None
            )
            frame = frames.decode(em.channel.protocol, em.frame, zwave_crc16=hint)
            addr = frames.extract_address(frame, lora_id_index=self.env.lora_id_index)
            if addr is None:
                continue
            found.add(addr)
            self.log.record(self.env.resolve(addr), em.time_s - self._t0, addr)
        return found

    def listen(self, channel: Channel, dwell_time_s: float) -> set[DeviceAddress]:
        """Receive on one channel for one dwell; returns the addresses heard."""
        t0 = self.env.clock
        return self._ingest(self.env.emissions_in(channel, t0, t0 + dwell_time_s))

    def listen_in_parallel(
        self, ch_range: Sequence[Channel], dwell_time_s: float
    ) -> set[DeviceAddress]:
        """Receive on every channel of one bandwidth-fitting group at once.

        One dwell of wall-clock time total; exactly the union of per-channel
        listens over the same window.
        """
        t0 = self.env.clock
        return self._ingest(
            self.env.emissions_in_parallel(ch_range, t0, t0 + dwell_time_s)
        )

    # -- scan algorithms -------------------------------------------------------

    def passive_scan(
        self,
        ch_list: Sequence[Channel],
        dwell_time_s: float,
        scan_time_s: float,
        *,
        until_complete: frozenset[str] | None = None,
    ) -> set[DeviceAddress]:
        """Round-robin listen over ``ch_list`` until the scan budget is spent.

        The elapsed check happens before each listen, so the final window may
        overrun ``scan_time_s`` by up to one dwell.
        """
        if not ch_list:
            raise ParameterError("passive scan needs a non-empty channel list")
        found: set[DeviceAddress] = set()
        t_start = self.env.clock
        i = 0
        while self.env.clock - t_start <= scan_time_s:
            found |= self.listen(ch_list[i], dwell_time_s)
            if self.sdr.retune_latency_s:
                self.env.advance(self.sdr.retune_latency_s)
            i = (i + 1) % len(ch_list)
            if until_complete is not None and self.log.covers(until_complete):
                break
        return found

    def probe_channels(
        self, ch_list: Sequence[Channel], dwell_time_s: float
    ) -> tuple[list[Channel], set[DeviceAddress]]:
        """Probe every channel and listen briefly; channels that produced any
        reception (a beacon reply or ordinary traffic) come back as active."""
        active: list[Channel] = []
        found: set[DeviceAddress] = set()
        for ch in ch_list:
            self.env.inject_probe(ch)
            heard = self.listen(ch, dwell_time_s)
            if self.sdr.retune_latency_s:
                self.env.advance(self.sdr.retune_latency_s)
            if heard:
                found |= heard
                active.append(ch)
        return active, found

    def active_scan(
        self,
        ch_list: Sequence[Channel],
        dwell_time_s: float,
        scan_time_s: float,
        *,
        probe_dwell_time_s: float | None = None,
        until_complete: frozenset[str] | None = None,
    ) -> set[DeviceAddress]:
        """Probe first, then spend the remaining budget passively on the
        channels that answered. With no active channels there is nothing to
        revisit, so phase one's findings are returned as-is."""
        probe_dwell = probe_dwell_time_s or self.probe_dwell_time_s
        t_start = self.env.clock
        active, found = self.probe_channels(ch_list, probe_dwell)
        remaining = scan_time_s - (self.env.clock - t_start)
        if active:
            found |= self.passive_scan(
                active, dwell_time_s, remaining, until_complete=until_complete
            )
        return found

    def multiprotocol_scan(
        self,
        ch_list: Sequence[Channel],
        dwell_time_s: float,
        scan_time_s: float,
        *,
        until_complete: frozenset[str] | None = None,
    ) -> set[DeviceAddress]:
        """Group channels by instantaneous bandwidth once, then round-robin
        the groups with parallel listens. Single-channel groups make this
        behave exactly like a passive scan."""
        groups = plan_channel_groups(ch_list, self.sdr.instantaneous_bandwidth_hz)
        found: set[DeviceAddress] = set()
        t_start = self.env.clock
        i = 0
        while self.env.clock - t_start <= scan_time_s:
            found |= self.listen_in_parallel(groups[i], dwell_time_s)
            if self.sdr.retune_latency_s:
                self.env.advance(self.sdr.retune_latency_s)
            i = (i + 1) % len(groups)
            if until_complete is not None and self.log.covers(until_complete):
                break
        return found

    def active_multiprotocol_scan(
        self,
        ch_list: Sequence[Channel],
        ch_probe_list: Sequence[Channel],
        dwell_time_s: float,
        scan_time_s: float,
        *,
        probe_dwell_time_s: float | None = None,
        until_complete: frozenset[str] | None = None,
    ) -> set[DeviceAddress]:
        """Probe one protocol's channels, merge the responders with the
        always-scanned list (sorted ascending), and multiprotocol-scan the
        merge for the remaining budget."""
        probe_dwell = probe_dwell_time_s or self.probe_dwell_time_s
        t_start = self.env.clock
        active, found = self.probe_channels(ch_probe_list, probe_dwell)
        merged = sorted(set(active) | set(ch_list), key=channel_sort_key)
        remaining = scan_time_s - (self.env.clock - t_start)
        if merged:
            found |= self.multiprotocol_scan(
                merged, dwell_time_s, remaining, until_complete=until_complete
            )
        return found

    def sequential_passive_scan(
        self,
        phases: Sequence[Sequence[Channel]],
        dwell_time_s: float,
        scan_time_s: float,
        *,
        until_complete: frozenset[str] | None = None,
    ) -> set[DeviceAddress]:
        """Passive-scan each phase in turn, moving on once every device
        audible in the current phase has been found (or the budget runs out).

        This is the one-protocol-after-another baseline the parallel scans
        are measured against.
        """
        if not phases or any(not p for p in phases):
            raise ParameterError("sequential scan needs non-empty phases")
        found: set[DeviceAddress] = set()
        t_start = self.env.clock
        for phase in phases:
            audible = self.env.device_names_on(phase)
            targets = audible if until_complete is None else audible & until_complete
            i = 0
            while self.env.clock - t_start <= scan_time_s:
                if self.log.covers(targets):
                    break
                found |= self.listen(phase[i], dwell_time_s)
                if self.sdr.retune_latency_s:
                    self.env.advance(self.sdr.retune_latency_s)
                i = (i + 1) % len(phase)
        return found

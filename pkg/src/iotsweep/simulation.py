"""Discrete-event radio environment.

Devices emit frames as point events on their channels; a frame is received
iff its timestamp falls inside a window the scanner is listening to. There
is no airtime and no collision model: with dwell times far above frame
durations for every protocol here, arrival counting is the behavior that
matters, and per-frame loss (``loss_prob``) is the only impairment.

Each device owns three RNG streams derived from (seed, trial, device, tag):
emission times, loss coins, and probe behavior. Emission sequences therefore
depend only on the scenario and seed, never on how the scanner queries the
environment, which is what makes trials reproducible and scan algorithms
comparable on identical traffic.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import frames
from .address import BleAdvA, DeviceAddress, LoRaId, ZigbeeExtended, ZigbeeShort, ZWaveId
from .channels import PROBEABLE_PROTOCOLS, Channel, Protocol, zwave_uses_crc16
from .errors import ScenarioError, SimulationError, UnsupportedProbe

_STREAM_TIMES = 0
_STREAM_LOSS = 1
_STREAM_PROBE = 2

_EXP_CHUNK = 64  # exponential gaps drawn per RNG call


class Role(Enum):
    COORDINATOR = "coordinator"
    ROUTER = "router"
    END_DEVICE = "end-device"
    GATEWAY = "gateway"
    PERIPHERAL = "peripheral"


#: Roles that answer a broadcast probe (sleepy end devices do not).
PROBE_RESPONDING_ROLES = frozenset({Role.COORDINATOR, Role.ROUTER})


class EmitterKind(Enum):
    POISSON = "poisson"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class DeviceSpec:
    """A simulated transmitter.

    ``channels`` carries resolved Channel objects: exactly one for Zigbee,
    LoRa, and Z-Wave devices; all three advertising channels for BLE (one
    advertising event produces one frame per advertising channel, same
    timestamp). ``mean_interarrival_s`` is the Poisson mean (or the period
    for periodic emitters). ``aliases`` lists additional addresses the
    device is also seen under; emitted frames rotate through canonical plus
    aliases so dedup across address forms is exercised.
    """

    name: str
    protocol: Protocol
    role: Role
    channels: tuple[Channel, ...]
    mean_interarrival_s: float
    address: DeviceAddress
    aliases: tuple[DeviceAddress, ...] = ()
    responds_to_probe: bool | None = None
    emitter: EmitterKind = EmitterKind.POISSON

    def probe_responder(self) -> bool:
        if self.responds_to_probe is not None:
            return self.responds_to_probe
        return self.role in PROBE_RESPONDING_ROLES

    def all_addresses(self) -> tuple[DeviceAddress, ...]:
        return (self.address,) + self.aliases


@dataclass(frozen=True)
class Emission:
    """One frame on the air: timestamp, channel, wire bytes, ground truth."""

    time_s: float
    channel: Channel
    frame: bytes
    device: str


def validate_device_spec(spec: DeviceSpec) -> None:
    if spec.mean_interarrival_s <= 0:
        raise ScenarioError(f"device {spec.name}: mean interval must be positive")
    if not spec.channels:
        raise ScenarioError(f"device {spec.name}: no channels")
    for ch in spec.channels:
        if ch.protocol is not spec.protocol:
            raise ScenarioError(
                f"device {spec.name}: channel {ch.label} belongs to {ch.protocol.value}"
            )
    if spec.protocol is Protocol.BLE_ADVERTISING:
        labels = sorted(ch.label for ch in spec.channels)
        if labels != ["ble-adv:37", "ble-adv:38", "ble-adv:39"]:
            raise ScenarioError(
                f"device {spec.name}: BLE devices advertise on all three "
                f"advertising channels, got {labels}"
            )
    elif len(spec.channels) != 1:
        raise ScenarioError(
            f"device {spec.name}: {spec.protocol.value} devices transmit on exactly one channel"
        )
    _expected_type = {
        Protocol.ZIGBEE: (ZigbeeShort, ZigbeeExtended),
        Protocol.BLE_ADVERTISING: BleAdvA,
        Protocol.LORA: LoRaId,
        Protocol.ZWAVE: ZWaveId,
    }[spec.protocol]
    for addr in spec.all_addresses():
        if not isinstance(addr, _expected_type):
            raise ScenarioError(
                f"device {spec.name}: address {addr} does not match protocol "
                f"{spec.protocol.value}"
            )


class SimDevice:
    """Runtime state for one device: RNG streams and pending emissions."""

    def __init__(
        self,
        spec: DeviceSpec,
        seed: int,
        trial: int,
        index: int,
        loss_prob: float,
        lora_id_index: int = frames.LORA_DEVICE_ID_INDEX,
    ):
        self.spec = spec
        self.name = spec.name
        self._loss_prob = loss_prob
        self._lora_id_index = lora_id_index
        self._times = np.random.default_rng(
            np.random.SeedSequence([seed, trial, index, _STREAM_TIMES])
        )
        self._loss = np.random.default_rng(
            np.random.SeedSequence([seed, trial, index, _STREAM_LOSS])
        )
        self.probe_rng = np.random.default_rng(
            np.random.SeedSequence([seed, trial, index, _STREAM_PROBE])
        )
        self._gap_buffer: list[float] = []
        self._emit_index = 0
        if spec.emitter is EmitterKind.PERIODIC:
            self._next_time = float(self._times.uniform(0.0, spec.mean_interarrival_s))
        else:
            self._next_time = self._draw_gap()
        self.pending: list[Emission] = []  # generated, observable, time-sorted

    def _draw_gap(self) -> float:
        if self.spec.emitter is EmitterKind.PERIODIC:
            return self.spec.mean_interarrival_s
        if not self._gap_buffer:
            gaps = self._times.exponential(self.spec.mean_interarrival_s, size=_EXP_CHUNK)
            self._gap_buffer = list(gaps[::-1])
        gap = self._gap_buffer.pop()
        return gap if gap > 0.0 else 1e-12  # keep event times strictly increasing

    def _emission_addr(self) -> DeviceAddress:
        addrs = self.spec.all_addresses()
        return addrs[self._emit_index % len(addrs)]

    def _build_frame(self) -> bytes:
        seq = self._emit_index & 0xFF
        addr = self._emission_addr()
        spec = self.spec
        if spec.protocol is Protocol.ZIGBEE:
            pan = spec.address.pan_id if isinstance(spec.address, ZigbeeShort) else 0xFFFF
            if isinstance(addr, ZigbeeExtended):
                f = frames.ZigbeeFrame(
                    frame_type=frames.ZigbeeFrameType.DATA,
                    seq=seq,
                    dest_pan=pan,
                    dest_addr=0x0000,
                    src_pan=pan,
                    src_addr=addr.addr,
                    src_extended=True,
                    payload=b"\x01",
                )
            else:
                f = frames.ZigbeeFrame(
                    frame_type=frames.ZigbeeFrameType.DATA,
                    seq=seq,
                    dest_pan=addr.pan_id,
                    dest_addr=0x0000,
                    src_pan=addr.pan_id,
                    src_addr=addr.addr,
                    payload=b"\x01",
                )
            return frames.encode_zigbee(f)
        if spec.protocol is Protocol.BLE_ADVERTISING:
            pdu = frames.BleAdvPdu(
                pdu_type=frames.BlePduType.ADV_IND,
                adv_a=addr.addr,
                adv_data=b"\x02\x01\x06",
            )
            return frames.encode_ble(pdu)
        if spec.protocol is Protocol.LORA:
            # id byte sits wherever the scanner's extraction offset points
            body = bytearray(max(5, self._lora_id_index + 2))
            body[0] = 0x40
            body[self._lora_id_index] = addr.device_id
            body[-1] = seq
            return frames.encode_lora(frames.LoRaFrame(addr.sync_word, bytes(body)))
        zw = frames.ZWaveFrame(
            home_id=addr.home_id,
            source_id=addr.source_id,
            frame_control=0x4101,
            dest_id=0xFF,
            payload=bytes([0x20, 0x01, seq]),
            crc16=self._zwave_crc16(),
        )
        return frames.encode_zwave(zw)

    def _zwave_crc16(self) -> bool:
        return zwave_uses_crc16(self.spec.channels[0])

    def beacon_frame(self) -> bytes:
        """Probe response; beacons always carry the canonical source address."""
        addr = self.spec.address
        if isinstance(addr, ZigbeeExtended):
            f = frames.ZigbeeFrame(
                frame_type=frames.ZigbeeFrameType.BEACON,
                seq=self._emit_index & 0xFF,
                src_pan=0xFFFF,
                src_addr=addr.addr,
                src_extended=True,
            )
        else:
            f = frames.zigbee_beacon(
                seq=self._emit_index & 0xFF, src_pan=addr.pan_id, src_addr=addr.addr
            )
        return frames.encode_zigbee(f)

    def generate_until(self, t_end: float) -> None:
        """Extend the pending emission list so it covers times < t_end."""
        while self._next_time < t_end:
            t = self._next_time
            frame = self._build_frame()
            for ch in self.spec.channels:
                lost = self._loss_prob > 0 and bool(self._loss.random() < self._loss_prob)
                if not lost:
                    self.pending.append(Emission(t, ch, frame, self.name))
            self._emit_index += 1
            self._next_time = t + self._draw_gap()

    def prune_before(self, t: float) -> None:
        if self.pending and self.pending[0].time_s < t:
            self.pending = [e for e in self.pending if e.time_s >= t]


class Environment:
    """One trial's radio world: devices, a clock, and probe plumbing.

    Single-threaded by design (the clock and RNG streams mutate); run one
    Environment per trial and as many trials in parallel as you like.
    """

    def __init__(
        self,
        devices: Sequence[DeviceSpec],
        *,
        seed: int,
        trial: int = 0,
        loss_prob: float = 0.0,
        probe_response_delay_max_s: float = 0.1,
        lora_id_index: int = frames.LORA_DEVICE_ID_INDEX,
    ):
        if not 0.0 <= loss_prob <= 1.0:
            raise ScenarioError(f"loss_prob must lie in [0, 1], got {loss_prob}")
        if probe_response_delay_max_s < 0:
            raise ScenarioError("probe response delay must be >= 0")
        names = [d.name for d in devices]
        if len(set(names)) != len(names):
            raise ScenarioError("device names must be unique")
        seen: dict[DeviceAddress, str] = {}
        for spec in devices:
            validate_device_spec(spec)
            for addr in spec.all_addresses():
                if addr in seen:
                    raise ScenarioError(
                        f"address {addr} used by both {seen[addr]} and {spec.name}"
                    )
                seen[addr] = spec.name

        self.clock = 0.0
        self.loss_prob = loss_prob
        self.probe_response_delay_max_s = probe_response_delay_max_s
        self.lora_id_index = lora_id_index
        self.address_table: dict[DeviceAddress, str] = seen
        self.devices = [
            SimDevice(
                spec,
                seed=seed,
                trial=trial,
                index=i,
                loss_prob=loss_prob,
                lora_id_index=lora_id_index,
            )
            for i, spec in enumerate(devices)
        ]
        self._by_channel: dict[Channel, list[SimDevice]] = {}
        for dev in self.devices:
            for ch in dev.spec.channels:
                self._by_channel.setdefault(ch, []).append(dev)
        self._pending_responses: list[tuple[float, int, Emission]] = []
        self._response_counter = 0

    # -- queries ------------------------------------------------------------

    def resolve(self, addr: DeviceAddress) -> str:
        """Canonical device name for an observed address."""
        return self.address_table[addr]

    def device_names_on(self, channels: Iterable[Channel]) -> frozenset[str]:
        chans = set(channels)
        return frozenset(
            dev.name for dev in self.devices if chans & set(dev.spec.channels)
        )

    def emissions_in(self, channel: Channel, t0: float, t1: float) -> list[Emission]:
        """Deliverable emissions on ``channel`` in [t0, t1); advances the clock to t1."""
        return self.emissions_in_parallel((channel,), t0, t1)

    def emissions_in_parallel(
        self, channels: Sequence[Channel], t0: float, t1: float
    ) -> list[Emission]:
        """Union of per-channel receptions over one shared window [t0, t1).

        Exactly equivalent to listening to every channel in the set at once;
        the clock advances once, to t1.
        """
        if t0 > t1:
            raise SimulationError(f"window reversed: [{t0}, {t1})")
        if t0 < self.clock - 1e-9:
            raise SimulationError(
                f"window starts at {t0} but the clock is already at {self.clock}"
            )
        wanted = set(channels)
        out: list[Emission] = []
        touched: set[int] = set()
        for ch in wanted:
            for dev in self._by_channel.get(ch, ()):
                if id(dev) not in touched:
                    dev.generate_until(t1)
                    touched.add(id(dev))
                for em in dev.pending:
                    if em.channel == ch and t0 <= em.time_s < t1:
                        out.append(em)
        while self._pending_responses and self._pending_responses[0][0] < t1:
            t, _, em = heapq.heappop(self._pending_responses)
            if t >= t0 and em.channel in wanted:
                out.append(em)
            # responses before t0 or on unmonitored channels are simply missed
        self.clock = t1
        for dev in self.devices:
            dev.prune_before(t1)
        out.sort(key=lambda e: (e.time_s, e.device, e.channel.label))
        return out

    def advance(self, duration_s: float) -> None:
        """Move the clock forward without listening (retune cost)."""
        if duration_s < 0:
            raise SimulationError("cannot advance backwards")
        self.clock += duration_s

    # -- active probing -----------------------------------------------------

    def inject_probe(self, channel: Channel, t: float | None = None) -> list[Emission]:
        """Broadcast a probe on ``channel``; responders schedule beacons.

        Only protocols with a broadcast probe support this (Zigbee beacon
        requests). Responses land at t + U(0, probe_response_delay_max) and
        are subject to the same per-frame loss as regular traffic. Returns
        the responses that survive loss; they are also delivered through the
        normal listen path.
        """
        if channel.protocol not in PROBEABLE_PROTOCOLS:
            raise UnsupportedProbe(
                f"{channel.protocol.value} has no broadcast probe (channel {channel.label})"
            )
        t = self.clock if t is None else t
        if t < self.clock - 1e-9:
            raise SimulationError("cannot probe in the past")
        scheduled: list[Emission] = []
        for dev in self._by_channel.get(channel, ()):
            if not dev.spec.probe_responder():
                continue
            delay = float(dev.probe_rng.uniform(0.0, self.probe_response_delay_max_s))
            lost = bool(dev.probe_rng.random() < self.loss_prob)
            if lost:
                continue
            em = Emission(t + delay, channel, dev.beacon_frame(), dev.name)
            self._response_counter += 1
            heapq.heappush(self._pending_responses, (em.time_s, self._response_counter, em))
            scheduled.append(em)
        return scheduled

    # -- bulk export ----------------------------------------------------------

    def iter_events(self, horizon_s: float) -> Iterator[Emission]:
        """All deliverable spontaneous emissions up to the horizon, time-ordered.

        Intended for a freshly built environment (event-log export); it
        consumes the same streams the scanner would observe.
        """
        if self.clock != 0.0:
            raise SimulationError("event export requires a fresh environment")
        everything: list[Emission] = []
        for dev in self.devices:
            dev.generate_until(horizon_s)
            everything.extend(em for em in dev.pending if em.time_s < horizon_s)
        everything.sort(key=lambda e: (e.time_s, e.device, e.channel.label))
        return iter(everything)


def build_environment(
    devices: Sequence[DeviceSpec],
    seed: int,
    *,
    trial: int = 0,
    loss_prob: float = 0.0,
    probe_response_delay_max_s: float = 0.1,
    lora_id_index: int = frames.LORA_DEVICE_ID_INDEX,
) -> Environment:
    """Deterministic environment factory: same inputs, same event sequence."""
    if seed < 0 or trial < 0:
        raise ScenarioError("seed and trial index must be non-negative")
    return Environment(
        devices,
        seed=seed,
        trial=trial,
        loss_prob=loss_prob,
        probe_response_delay_max_s=probe_response_delay_max_s,
        lora_id_index=lora_id_index,
    )

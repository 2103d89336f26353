import math

import numpy as np
import pytest

from iotsweep.address import BleAdvA, LoRaId, ZigbeeExtended, ZigbeeShort, ZWaveId
from iotsweep.channels import (
    Protocol,
    ble_advertising_channels,
    yolink_channel,
    zigbee_channel,
    zwave_channel,
)
from iotsweep.errors import ScenarioError, SimulationError, UnsupportedProbe
from iotsweep.frames import decode, extract_address
from iotsweep.simulation import (
    DeviceSpec,
    EmitterKind,
    Role,
    build_environment,
)

CH11 = zigbee_channel(11)
CH15 = zigbee_channel(15)
ADV = ble_advertising_channels()


def zigbee_device(name, addr, *, channel=CH11, mu=2.0, role=Role.END_DEVICE, **kw):
    return DeviceSpec(
        name=name,
        protocol=Protocol.ZIGBEE,
        role=role,
        channels=(channel,),
        mean_interarrival_s=mu,
        address=ZigbeeShort(0x1A62, addr),
        **kw,
    )


def ble_device(name, adv_a, mu=2.0):
    return DeviceSpec(
        name=name,
        protocol=Protocol.BLE_ADVERTISING,
        role=Role.PERIPHERAL,
        channels=tuple(ADV),
        mean_interarrival_s=mu,
        address=BleAdvA(adv_a),
    )


class TestDeterminism:
    def test_empty_environment(self):
        env = build_environment([], seed=1)
        assert env.emissions_in(CH11, 0.0, 100.0) == []

    def test_same_seed_identical_logs(self):
        devs = [zigbee_device("a", 1), zigbee_device("b", 2, channel=CH15)]
        logs = []
        for _ in range(2):
            env = build_environment(devs, seed=99)
            logs.append([(e.time_s, e.device, e.frame) for e in env.iter_events(500.0)])
        assert logs[0] == logs[1]
        assert len(logs[0]) > 100

    def test_trials_differ(self):
        devs = [zigbee_device("a", 1)]
        t0 = [e.time_s for e in build_environment(devs, seed=5, trial=0).iter_events(50)]
        t1 = [e.time_s for e in build_environment(devs, seed=5, trial=1).iter_events(50)]
        assert t0 != t1

    def test_times_independent_of_loss(self):
        devs = [zigbee_device("a", 1)]
        clean = [e.time_s for e in build_environment(devs, seed=7).iter_events(200)]
        lossy = [
            e.time_s
            for e in build_environment(devs, seed=7, loss_prob=0.5).iter_events(200)
        ]
        assert set(lossy) < set(clean)


class TestEmissionProcess:
    def test_empirical_mean_interarrival(self):
        env = build_environment([zigbee_device("a", 1, mu=2.0)], seed=31)
        times = [e.time_s for e in env.iter_events(1_000_000.0)]
        gaps = np.diff(times)
        assert abs(gaps.mean() - 2.0) / 2.0 < 0.01

    def test_memoryless_ks(self):
        # Kolmogorov-Smirnov against Exp(1/mu) at significance 0.01
        mu = 3.0
        env = build_environment([zigbee_device("a", 1, mu=mu)], seed=17)
        times = np.array([e.time_s for e in env.iter_events(mu * 30_000)])
        gaps = np.sort(np.diff(times))
        assert len(gaps) >= 10_000
        n = len(gaps)
        cdf = 1.0 - np.exp(-gaps / mu)
        upper = np.arange(1, n + 1) / n - cdf
        lower = cdf - np.arange(0, n) / n
        d_stat = max(upper.max(), lower.max())
        assert d_stat < 1.628 / math.sqrt(n)

    def test_superposition_rate(self):
        devs = [
            zigbee_device("a", 1, mu=2.0),
            zigbee_device("b", 2, mu=3.0),
            zigbee_device("c", 3, mu=7.0),
        ]
        horizon = 50_000.0
        env = build_environment(devs, seed=23)
        count = sum(1 for _ in env.iter_events(horizon))
        rate = 1 / 2.0 + 1 / 3.0 + 1 / 7.0
        expect = horizon * rate
        assert abs(count - expect) <= 3 * math.sqrt(expect)

    def test_window_counts_match_poisson_mean(self):
        lam = 0.5
        env = build_environment([zigbee_device("a", 1, mu=1 / lam)], seed=41)
        counts = [len(env.emissions_in(CH11, float(t), float(t + 1))) for t in range(20_000)]
        assert np.mean(counts) == pytest.approx(lam, rel=0.05)

    def test_periodic_emitter(self):
        dev = zigbee_device("a", 1, mu=10.0, emitter=EmitterKind.PERIODIC)
        env = build_environment([dev], seed=3)
        times = [e.time_s for e in env.iter_events(200.0)]
        gaps = np.diff(times)
        assert np.allclose(gaps, 10.0)
        assert 0.0 <= times[0] < 10.0

    def test_ble_event_atomicity(self):
        env = build_environment([ble_device("b", 0xC011_2200_0001, mu=1.0)], seed=13)
        events = list(env.iter_events(2_000.0))
        by_time = {}
        for em in events:
            by_time.setdefault(em.time_s, []).append(em.channel.label)
        for labels in by_time.values():
            assert sorted(labels) == ["ble-adv:37", "ble-adv:38", "ble-adv:39"]


class TestWindows:
    def test_no_device_on_channel(self):
        env = build_environment([zigbee_device("a", 1)], seed=1)
        assert env.emissions_in(CH15, 0.0, 50.0) == []

    def test_loss_one_silences_everything(self):
        env = build_environment([zigbee_device("a", 1)], seed=1, loss_prob=1.0)
        assert env.emissions_in(CH11, 0.0, 1000.0) == []

    def test_time_regression_rejected(self):
        env = build_environment([zigbee_device("a", 1)], seed=1)
        env.emissions_in(CH11, 0.0, 10.0)
        with pytest.raises(SimulationError):
            env.emissions_in(CH11, 5.0, 6.0)
        with pytest.raises(SimulationError):
            env.emissions_in(CH11, 20.0, 15.0)

    def test_window_advances_clock(self):
        env = build_environment([zigbee_device("a", 1)], seed=1)
        env.emissions_in(CH11, 0.0, 2.5)
        assert env.clock == 2.5

    def test_frames_decode_to_device_address(self):
        env = build_environment([zigbee_device("a", 7)], seed=2)
        ems = env.emissions_in(CH11, 0.0, 50.0)
        assert ems
        for em in ems:
            addr = extract_address(decode(Protocol.ZIGBEE, em.frame))
            assert addr == ZigbeeShort(0x1A62, 7)
            assert env.resolve(addr) == "a"


class TestAliases:
    def test_alias_rotation_and_resolution(self):
        dev = zigbee_device(
            "dual", 0x1501, aliases=(ZigbeeExtended(0x000B57FFFE1732AA),)
        )
        env = build_environment([dev], seed=4)
        ems = env.emissions_in(CH11, 0.0, 60.0)
        kinds = set()
        for em in ems:
            addr = extract_address(decode(Protocol.ZIGBEE, em.frame))
            kinds.add(type(addr).__name__)
            assert env.resolve(addr) == "dual"
        assert kinds == {"ZigbeeShort", "ZigbeeExtended"}


class TestProbes:
    def coordinator(self):
        return zigbee_device("coord", 0x0000, role=Role.COORDINATOR, mu=1000.0)

    def test_only_responders_reply(self):
        devs = [
            self.coordinator(),
            zigbee_device("e1", 1, mu=1000.0),
            zigbee_device("e2", 2, mu=1000.0),
        ]
        env = build_environment(devs, seed=6)
        responses = env.inject_probe(CH11)
        assert [r.device for r in responses] == ["coord"]
        heard = env.emissions_in(CH11, 0.0, 0.2)
        beacons = [e for e in heard if e.device == "coord"]
        assert len(beacons) == 1
        frame = decode(Protocol.ZIGBEE, beacons[0].frame)
        assert extract_address(frame) == ZigbeeShort(0x1A62, 0x0000)

    def test_router_replies_end_device_override(self):
        router = zigbee_device("r", 5, role=Role.ROUTER, mu=1000.0)
        stubborn = zigbee_device(
            "s", 6, role=Role.END_DEVICE, mu=1000.0, responds_to_probe=True
        )
        env = build_environment([router, stubborn], seed=8)
        names = {r.device for r in env.inject_probe(CH11)}
        assert names == {"r", "s"}

    def test_empty_channel(self):
        env = build_environment([self.coordinator()], seed=9)
        assert env.inject_probe(CH15) == []

    def test_response_delay_bounded(self):
        env = build_environment(
            [self.coordinator()], seed=10, probe_response_delay_max_s=0.05
        )
        responses = env.inject_probe(CH11)
        assert all(0.0 <= r.time_s <= 0.05 for r in responses)

    def test_probe_lost(self):
        env = build_environment([self.coordinator()], seed=11, loss_prob=1.0)
        assert env.inject_probe(CH11) == []

    def test_unsupported_protocols(self):
        env = build_environment([], seed=12)
        with pytest.raises(UnsupportedProbe):
            env.inject_probe(ADV[0])
        with pytest.raises(UnsupportedProbe):
            env.inject_probe(zwave_channel("R2"))
        with pytest.raises(UnsupportedProbe):
            env.inject_probe(yolink_channel("up"))


class TestValidation:
    def test_duplicate_addresses_rejected(self):
        devs = [zigbee_device("a", 1), zigbee_device("b", 1)]
        with pytest.raises(ScenarioError):
            build_environment(devs, seed=1)

    def test_duplicate_names_rejected(self):
        devs = [zigbee_device("a", 1), zigbee_device("a", 2)]
        with pytest.raises(ScenarioError):
            build_environment(devs, seed=1)

    def test_zigbee_single_channel_rule(self):
        dev = DeviceSpec(
            name="x",
            protocol=Protocol.ZIGBEE,
            role=Role.END_DEVICE,
            channels=(CH11, CH15),
            mean_interarrival_s=1.0,
            address=ZigbeeShort(1, 1),
        )
        with pytest.raises(ScenarioError):
            build_environment([dev], seed=1)

    def test_ble_needs_all_three_channels(self):
        dev = DeviceSpec(
            name="x",
            protocol=Protocol.BLE_ADVERTISING,
            role=Role.PERIPHERAL,
            channels=(ADV[0],),
            mean_interarrival_s=1.0,
            address=BleAdvA(1),
        )
        with pytest.raises(ScenarioError):
            build_environment([dev], seed=1)

    def test_address_protocol_mismatch(self):
        dev = DeviceSpec(
            name="x",
            protocol=Protocol.ZIGBEE,
            role=Role.END_DEVICE,
            channels=(CH11,),
            mean_interarrival_s=1.0,
            address=ZWaveId(1, 1),
        )
        with pytest.raises(ScenarioError):
            build_environment([dev], seed=1)

    def test_nonpositive_rate(self):
        with pytest.raises(ScenarioError):
            build_environment([zigbee_device("a", 1, mu=0.0)], seed=1)


class TestOtherProtocolFrames:
    def test_lora_device_emits_its_id(self):
        dev = DeviceSpec(
            name="leak",
            protocol=Protocol.LORA,
            role=Role.END_DEVICE,
            channels=(yolink_channel("up"),),
            mean_interarrival_s=5.0,
            address=LoRaId(0x1324, 0x42),
        )
        env = build_environment([dev], seed=14)
        ems = env.emissions_in(yolink_channel("up"), 0.0, 100.0)
        assert ems
        frame = decode(Protocol.LORA, ems[0].frame)
        assert extract_address(frame) == LoRaId(0x1324, 0x42)

    def test_zwave_device_uses_channel_trailer(self):
        r3 = zwave_channel("R3")
        dev = DeviceSpec(
            name="base",
            protocol=Protocol.ZWAVE,
            role=Role.GATEWAY,
            channels=(r3,),
            mean_interarrival_s=5.0,
            address=ZWaveId(0x9E0B1D42, 0x01),
        )
        env = build_environment([dev], seed=15)
        ems = env.emissions_in(r3, 0.0, 100.0)
        assert ems
        frame = decode(Protocol.ZWAVE, ems[0].frame, zwave_crc16=True)
        assert extract_address(frame) == ZWaveId(0x9E0B1D42, 0x01)


class TestLoraIdIndexWiring:
    def test_emitter_follows_configured_index(self):
        dev = DeviceSpec(
            name="odd",
            protocol=Protocol.LORA,
            role=Role.END_DEVICE,
            channels=(yolink_channel("up"),),
            mean_interarrival_s=3.0,
            address=LoRaId(0x1324, 0x42),
        )
        env = build_environment([dev], seed=21, lora_id_index=4)
        ems = env.emissions_in(yolink_channel("up"), 0.0, 60.0)
        assert ems
        frame = decode(Protocol.LORA, ems[0].frame)
        addr = extract_address(frame, lora_id_index=4)
        assert addr == LoRaId(0x1324, 0x42)
        assert env.resolve(addr) == "odd"

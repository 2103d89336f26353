from iotsweep.cli import main
from iotsweep.frames import BleAdvPdu, BlePduType, ZWaveFrame, beacon_request, encode

TINY = """
scenario cli-tiny
algorithm passive
channels zigbee:11
dwell-time 1.0
scan-time 120
trials 2
seed 5

device solo
  protocol zigbee
  role end-device
  channels zigbee:11
  mean-interval 3.0
  address zigbee-short:0x0001:0x0002
end
"""


def write_tiny(tmp_path):
    p = tmp_path / "tiny.scn"
    p.write_text(TINY)
    return p


class TestScan:
    def test_scan_writes_outputs(self, tmp_path, capsys):
        scn = write_tiny(tmp_path)
        out = tmp_path / "out"
        assert main(["scan", str(scn), "--out", str(out)]) == 0
        assert (out / "trials.csv").exists()
        assert (out / "summary.csv").exists()
        assert (out / "manifest.txt").exists()
        assert "cli-tiny" in capsys.readouterr().out

    def test_overrides(self, tmp_path, capsys):
        scn = write_tiny(tmp_path)
        out = tmp_path / "out"
        assert main(["scan", str(scn), "--out", str(out), "--trials", "3", "--seed", "9"]) == 0
        assert "3 trials" in capsys.readouterr().out
        assert "seed 9" in (out / "manifest.txt").read_text()

    def test_events_dump(self, tmp_path, capsys):
        scn = write_tiny(tmp_path)
        out = tmp_path / "out"
        assert main(["scan", str(scn), "--out", str(out), "--events-horizon", "30"]) == 0
        assert (out / "events.csv").read_text().startswith("time_s,")

    def test_bundled_name(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["scan", "zwave-lora-multi", "--trials", "2"]) == 0
        assert (tmp_path / "results" / "zwave-lora-multi" / "summary.csv").exists()

    def test_validation_error_exit_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.scn"
        bad.write_text(TINY.replace("channels zigbee:11\ndwell", "channels zigbee:12\ndwell", 1))
        assert main(["scan", str(bad)]) == 1
        assert "error:" in capsys.readouterr().err


class TestModelAndCompare:
    def test_model_prints_rows(self, tmp_path, capsys):
        scn = write_tiny(tmp_path)
        assert main(["model", str(scn)]) == 0
        assert "n=1" in capsys.readouterr().out

    def test_compare_pass_exit_0(self, tmp_path, capsys):
        scn = tmp_path / "c.scn"
        scn.write_text(TINY.replace("trials 2", "trials 10").replace("scan-time 120", "scan-time 400"))
        code = main(["compare", str(scn), "--out", str(tmp_path / "out")])
        assert code == 0
        assert (tmp_path / "out" / "compare.csv").exists()

    def test_compare_fail_exit_2(self, tmp_path, capsys):
        # loss breaks the lossless model: measurements shift right, CIs miss
        text = TINY.replace("trials 2", "trials 10").replace(
            "scan-time 120", "scan-time 5000\nloss-prob 0.95"
        )
        scn = tmp_path / "c.scn"
        scn.write_text(text)
        assert main(["compare", str(scn), "--out", str(tmp_path / "out")]) == 2


class TestDissect:
    def test_ble_frame(self, capsys):
        raw = encode(BleAdvPdu(BlePduType.ADV_NONCONN_IND, adv_a=0x665544332211))
        assert main(["dissect", "ble", raw.hex()]) == 0
        out = capsys.readouterr().out
        assert "access-address 0x8E89BED6" in out
        assert "ble:66:55:44:33:22:11" in out

    def test_zigbee_sourceless(self, capsys):
        raw = encode(beacon_request())
        assert main(["dissect", "zigbee", raw.hex()]) == 0
        out = capsys.readouterr().out
        assert "command 0x07" in out
        assert "address (none)" in out

    def test_zwave_variant_hint(self, capsys):
        raw = encode(ZWaveFrame(0x9E0B1D42, 3, 0x4101, 0xFF, b"\x20\x01", crc16=True))
        assert main(["dissect", "zwave-r3", raw.hex()]) == 0
        assert "home-id 0x9E0B1D42" in capsys.readouterr().out

    def test_odd_length_hex(self, capsys):
        assert main(["dissect", "ble", "d6be8"]) == 1
        assert "hex" in capsys.readouterr().err

    def test_checksum_error_reports_offset(self, capsys):
        raw = bytearray(encode(BleAdvPdu(BlePduType.ADV_IND, adv_a=5)))
        raw[-1] ^= 0x01
        assert main(["dissect", "ble", bytes(raw).hex()]) == 1
        err = capsys.readouterr().err
        assert "at byte" in err

    def test_unknown_protocol(self, capsys):
        assert main(["dissect", "wimax", "00"]) == 1

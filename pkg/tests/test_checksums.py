"""Known-answer vectors for the four check-sequence algorithms.

The b"123456789" check values are the standard catalogue constants for each
parametrization; frame-level behavior is covered in test_frames.
"""

from iotsweep.checksums import ble_crc24, zigbee_fcs, zwave_crc16, zwave_xor8

CHECK_INPUT = b"123456789"


def test_zigbee_fcs_check_value():
    # CRC-16, poly 0x1021 reflected, init 0x0000
    assert zigbee_fcs(CHECK_INPUT) == 0x2189


def test_zigbee_fcs_empty():
    assert zigbee_fcs(b"") == 0x0000


def test_zwave_crc16_check_value():
    # CRC-16, poly 0x1021, init 0x1D0F
    assert zwave_crc16(CHECK_INPUT) == 0xE5CC


def test_zwave_crc16_empty_is_init():
    assert zwave_crc16(b"") == 0x1D0F


def test_ble_crc24_check_value():
    # CRC-24, poly 0x00065B, init 0x555555
    assert ble_crc24(CHECK_INPUT) == 0xC25A56


def test_xor8_zeros_is_init():
    for n in (0, 1, 7, 64):
        assert zwave_xor8(bytes(n)) == 0xFF


def test_xor8_check_value():
    assert zwave_xor8(CHECK_INPUT) == 0xCE


def test_xor8_self_inverse():
    data = bytes(range(32))
    with_check = data + bytes([zwave_xor8(data)])
    assert zwave_xor8(with_check) == 0x00

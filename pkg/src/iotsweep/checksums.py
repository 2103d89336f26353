"""Frame check sequences for the four radio protocols.

Parametrizations (check value = algorithm over b"123456789"):

  zigbee_fcs      CRC-16, poly 0x1021 reflected, init 0x0000   check 0x2189
  zwave_crc16     CRC-16, poly 0x1021, init 0x1D0F             check 0xE5CC
  ble_crc24       CRC-24, poly 0x00065B reflected, init 0x555555  check 0xC25A56
  zwave_xor8      XOR of all bytes, init 0xFF                  check 0xCE
"""

from __future__ import annotations


def _reflected_table(poly_reflected: int, width: int) -> list[int]:
    mask = (1 << width) - 1
    table = []
    for byte in range(256):
        crc = byte
        for _ in range(8):
            crc = (crc >> 1) ^ poly_reflected if crc & 1 else crc >> 1
        table.append(crc & mask)
    return table


def _msb_table_16(poly: int) -> list[int]:
    table = []
    for byte in range(256):
        crc = byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ poly) & 0xFFFF if crc & 0x8000 else (crc << 1) & 0xFFFF
        table.append(crc)
    return table


_ZIGBEE_TABLE = _reflected_table(0x8408, 16)      # 0x1021 bit-reversed
_BLE_TABLE = _reflected_table(0xDA6000, 24)       # 0x00065B bit-reversed
_ZWAVE_R3_TABLE = _msb_table_16(0x1021)


def zigbee_fcs(data: bytes) -> int:
    """802.15.4 frame check sequence (ITU CRC-16, LSB-first, init 0)."""
    crc = 0x0000
    for b in data:
        crc = (crc >> 8) ^ _ZIGBEE_TABLE[(crc ^ b) & 0xFF]
    return crc


def ble_crc24(data: bytes) -> int:
    """BLE advertising CRC (24-bit LFSR preset 0x555555, LSB-first)."""
    crc = 0xAAAAAA  # 0x555555 in the reflected register domain
    for b in data:
        crc = (crc >> 8) ^ _BLE_TABLE[(crc ^ b) & 0xFF]
    return crc


def zwave_xor8(data: bytes) -> int:
    """G.9959 R1/R2 checksum: XOR of all bytes with initial value 0xFF."""
    check = 0xFF
    for b in data:
        check ^= b
    return check


def zwave_crc16(data: bytes) -> int:
    """G.9959 R3 CRC-16 (CCITT polynomial, init 0x1D0F, MSB-first)."""
    crc = 0x1D0F
    for b in data:
        crc = ((crc << 8) ^ _ZWAVE_R3_TABLE[((crc >> 8) ^ b) & 0xFF]) & 0xFFFF
    return crc

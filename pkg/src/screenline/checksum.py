"""CRC-32C (Castagnoli, polynomial 0x1EDC6F41) for file footers.

No C implementation is available in the stdlib, so this is a
slicing-by-8 table implementation: fast enough for the desk-scale
artifacts we checksum (a few MB), exact per the iSCSI/RFC 3720
parameters (reflected, init/xorout 0xFFFFFFFF).
Check value: crc32c(b"123456789") == 0xE3069283.
"""

from __future__ import annotations

_POLY_REFLECTED = 0x82F63B78


def _make_tables() -> list[list[int]]:
    base = []
    for n in range(256):
        c = n
        for _ in range(8):
            c = (c >> 1) ^ _POLY_REFLECTED if c & 1 else c >> 1
        base.append(c)
    tables = [base]
    for k in range(1, 8):
        prev = tables[k - 1]
        tables.append([(prev[n] >> 8) ^ base[prev[n] & 0xFF] for n in range(256)])
    return tables


_T = _make_tables()


def crc32c(data: bytes, crc: int = 0) -> int:
    """CRC-32C of ``data``; pass a previous result via ``crc`` to stream."""
    c = crc ^ 0xFFFFFFFF
    n = len(data)
    i = 0
    t0, t1, t2, t3, t4, t5, t6, t7 = _T[0], _T[1], _T[2], _T[3], _T[4], _T[5], _T[6], _T[7]
    end8 = n - (n % 8)
    while i < end8:
        c ^= data[i] | (data[i + 1] << 8) | (data[i + 2] << 16) | (data[i + 3] << 24)
        c = (
            t7[c & 0xFF]
            ^ t6[(c >> 8) & 0xFF]
            ^ t5[(c >> 16) & 0xFF]
            ^ t4[(c >> 24) & 0xFF]
            ^ t3[data[i + 4]]
            ^ t2[data[i + 5]]
            ^ t1[data[i + 6]]
            ^ t0[data[i + 7]]
        )
        i += 8
    while i < n:
        c = (c >> 8) ^ t0[(c ^ data[i]) & 0xFF]
        i += 1
    return c ^ 0xFFFFFFFF

"""Small index hashes for predictor tables."""


def xor_fold(value: int, bits: int) -> int:
    """Fold a 64-bit value into ``bits`` bits by XOR-ing successive slices."""
    mask = (1 << bits) - 1
    out = 0
    value &= (1 << 64) - 1
    while value:
        out ^= value & mask
        value >>= bits
    return out

def clamp_nonneg(x: int) -> int:
    return x

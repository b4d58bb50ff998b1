def clamp_nonneg(x: int) -> int:
    if x < 0:
        return 0
    return x

def neg_abs(x: int) -> int:
    return abs(x)

def negate(x: int) -> int:
    return x

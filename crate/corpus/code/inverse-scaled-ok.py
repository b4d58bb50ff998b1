def inverse_scaled(x: int) -> int:
    if x == 0:
        return 0
    return 100 // x

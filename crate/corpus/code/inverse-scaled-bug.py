def inverse_scaled(x: int) -> int:
    return 100 // x

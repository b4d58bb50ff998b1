def next_odd(x: int) -> int:
    return 2 * (x + 1)

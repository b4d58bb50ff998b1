def my_max(a: int, b: int) -> int:
    if a >= b:
        return a
    return b

def wrap_index(i: int, n: int) -> int:
    if n <= 0:
        return 0
    return i % n

def wrap_index(i: int, n: int) -> int:
    return i % n

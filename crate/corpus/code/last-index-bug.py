def last_index(n: int) -> int:
    return n

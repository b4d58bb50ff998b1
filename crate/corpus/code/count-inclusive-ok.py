def count_inclusive(lo: int, hi: int) -> int:
    return hi - lo + 1

def midpoint(lo: int, hi: int) -> int:
    return lo + (hi - lo) // 2

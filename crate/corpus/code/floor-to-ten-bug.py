def floor_to_ten(n: int) -> int:
    return ((n + 5) // 10) * 10

def floor_to_ten(n: int) -> int:
    return (n // 10) * 10

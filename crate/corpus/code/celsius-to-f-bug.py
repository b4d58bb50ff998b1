def celsius_to_f(c: int) -> int:
    return c * 5 // 9 + 32

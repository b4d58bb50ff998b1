def celsius_to_f(c: int) -> int:
    return c * 9 // 5 + 32

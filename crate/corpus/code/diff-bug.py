def diff(a: int, b: int) -> int:
    return b - a

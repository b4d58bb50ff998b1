def diff(a: int, b: int) -> int:
    return a - b

def distance(a: int, b: int) -> int:
    return a - b

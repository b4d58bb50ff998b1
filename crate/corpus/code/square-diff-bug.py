def square_diff(a: int, b: int) -> int:
    return (a - b) * (a - b)

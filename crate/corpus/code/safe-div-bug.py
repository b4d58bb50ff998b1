def safe_div(a: int, b: int) -> int:
    return a // b

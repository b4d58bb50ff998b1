def safe_div(a: int, b: int) -> int:
    return a // b if b != 0 else 0

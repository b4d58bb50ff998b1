def half_round_up(x: int) -> int:
    return x // 2

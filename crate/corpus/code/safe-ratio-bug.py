def safe_ratio(total: float, count: float) -> float:
    return total / count

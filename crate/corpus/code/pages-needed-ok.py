def pages_needed(items: int, per_page: int) -> int:
    return (items + per_page - 1) // per_page

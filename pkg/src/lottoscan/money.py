from decimal import ROUND_HALF_EVEN, Decimal, InvalidOperation


def to_cents(value) -> int:
    """Parse a dollar amount (``"$1,234.50"``, ``1234.5``, ``"700"``) to integer cents."""
    if isinstance(value, int) and not isinstance(value, bool):
        return value * 100
    text = str(value).strip().replace(",", "").replace("$", "")
    if text.startswith("(") and text.endswith(")"):
        text = "-" + text[1:-1]
    try:
        d = Decimal(text)
    except InvalidOperation:
        raise ValueError(f"not a dollar amount: {value!r}") from None
    if not d.is_finite():
        raise ValueError(f"not a dollar amount: {value!r}")
    return int((d * 100).quantize(Decimal(1), rounding=ROUND_HALF_EVEN))


def to_dollars(cents: int) -> float:
    return cents / 100.0


def format_cents(cents: int) -> str:
    sign = "-" if cents < 0 else ""
    cents = abs(cents)
    return f"{sign}{cents // 100}.{cents % 100:02d}"

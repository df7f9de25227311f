"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition or invariant."""


class IntegralityError(ValidationError):
    """Raised when flow scaling would produce a non-integer number of agents.

    Carries the offending demand group so callers can report it.
    """

    def __init__(self, depart_time_s: float, distance_km: float, count: int, ratio) -> None:
        self.depart_time_s = depart_time_s
        self.distance_km = distance_km
        self.count = count
        self.ratio = ratio
        super().__init__(
            f"scaling ratio {ratio} maps demand group "
            f"(T={depart_time_s} s, X={distance_km} km, n={count}) "
            f"to the non-integer count {count} * {ratio}"
        )

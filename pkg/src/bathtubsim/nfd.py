"""Network fundamental diagrams: speed-density relations and their slopes.

Speeds are in km/h, densities in veh/km. All forms are immutable and pure, so
values can be shared freely across concurrent runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

# Codes used to dispatch NFD evaluation inside the compiled engine kernels.
KIND_EXPONENTIAL = 0
KIND_TRAPEZOIDAL = 1
KIND_TABULATED = 2

_GRID_POINTS = 10_000


@dataclass(frozen=True)
class ExponentialNFD:
    """V(rho) = u_f * (1 - rho/rho_j)^2, clamped to 0 beyond jam density."""

    u_f_kmh: float
    rho_j_veh_km: float

    def __post_init__(self) -> None:
        if not self.u_f_kmh > 0:
            raise ValidationError(f"u_f_kmh must be > 0, got {self.u_f_kmh}")
        if not self.rho_j_veh_km > 0:
            raise ValidationError(f"rho_j_veh_km must be > 0, got {self.rho_j_veh_km}")

    def speed(self, rho: float) -> float:
        _check_rho(rho)
        if rho >= self.rho_j_veh_km:
            return 0.0
        s = 1.0 - rho / self.rho_j_veh_km
        return self.u_f_kmh * s * s

    def slope(self, rho: float) -> float:
        _check_rho_range(rho, self.rho_j_veh_km)
        return -2.0 * self.u_f_kmh / self.rho_j_veh_km * (1.0 - rho / self.rho_j_veh_km)

    def max_abs_slope(self) -> float:
        # |dV/drho| is largest at rho = 0 and decreases linearly to the jam density.
        return 2.0 * self.u_f_kmh / self.rho_j_veh_km

    def _kernel_encoding(self):
        params = np.array([self.u_f_kmh, self.rho_j_veh_km, 0.0, 0.0])
        return KIND_EXPONENTIAL, params, _EMPTY, _EMPTY


@dataclass(frozen=True)
class TrapezoidalNFD:
    """V(rho) = min(u_f, C/rho, w*(rho_j/rho - 1)) with V(0) defined as u_f.

    C is the network capacity in veh/h, w the backward wave speed in km/h.
    """

    u_f_kmh: float
    capacity_veh_h: float
    w_kmh: float
    rho_j_veh_km: float

    def __post_init__(self) -> None:
        if not self.u_f_kmh > 0:
            raise ValidationError(f"u_f_kmh must be > 0, got {self.u_f_kmh}")
        if not self.rho_j_veh_km > 0:
            raise ValidationError(f"rho_j_veh_km must be > 0, got {self.rho_j_veh_km}")
        if not 0 < self.capacity_veh_h <= self.u_f_kmh * self.rho_j_veh_km:
            raise ValidationError(
                f"capacity_veh_h must be in (0, u_f*rho_j], got {self.capacity_veh_h}"
            )
        if not self.w_kmh > 0:
            raise ValidationError(f"w_kmh must be > 0, got {self.w_kmh}")

    @property
    def rho_crit_veh_km(self) -> float:
        """Density where the free-flow and capacity branches meet."""
        return self.capacity_veh_h / self.u_f_kmh

    @property
    def rho_cong_veh_km(self) -> float:
        """Density where the capacity and congested branches meet."""
        return self.rho_j_veh_km - self.capacity_veh_h / self.w_kmh

    def speed(self, rho: float) -> float:
        _check_rho(rho)
        if rho <= 0.0:
            return self.u_f_kmh
        if rho >= self.rho_j_veh_km:
            return 0.0
        return min(
            self.u_f_kmh,
            self.capacity_veh_h / rho,
            self.w_kmh * (self.rho_j_veh_km / rho - 1.0),
        )

    def slope(self, rho: float) -> float:
        """Analytic dV/drho; at branch kinks the left-branch value is returned."""
        _check_rho_range(rho, self.rho_j_veh_km)
        if rho <= 0.0:
            return 0.0
        v_cap = self.capacity_veh_h / rho
        v_cong = self.w_kmh * (self.rho_j_veh_km / rho - 1.0)
        v = min(self.u_f_kmh, v_cap, v_cong)
        # Branches appear in rho-order free -> capacity -> congested, so testing
        # in that order yields the left branch at kinks.
        if v == self.u_f_kmh:
            return 0.0
        if v == v_cap:
            return -self.capacity_veh_h / (rho * rho)
        return -self.w_kmh * self.rho_j_veh_km / (rho * rho)

    def max_abs_slope(self) -> float:
        # Each branch's |dV/drho| is monotone decreasing in rho, so the supremum
        # sits at a branch's left endpoint (one-sided); a dense grid scan backs
        # up the endpoint candidates.
        rc = self.rho_crit_veh_km
        rw = self.rho_cong_veh_km
        # Density where the congested branch meets free flow when the capacity
        # branch is inactive.
        rx = self.w_kmh * self.rho_j_veh_km / (self.u_f_kmh + self.w_kmh)
        candidates = [0.0]
        if rc < rw:
            candidates.append(self.capacity_veh_h / (rc * rc))
        r_cong = max(rw, rx)
        if r_cong < self.rho_j_veh_km:
            candidates.append(self.w_kmh * self.rho_j_veh_km / (r_cong * r_cong))
        grid = np.linspace(0.0, self.rho_j_veh_km, _GRID_POINTS + 1)[1:]
        candidates.append(float(np.max(np.abs([self.slope(r) for r in grid]))))
        return max(candidates)

    def _kernel_encoding(self):
        params = np.array(
            [self.u_f_kmh, self.capacity_veh_h, self.w_kmh, self.rho_j_veh_km]
        )
        return KIND_TRAPEZOIDAL, params, _EMPTY, _EMPTY


@dataclass(frozen=True)
class TabulatedNFD:
    """Piecewise-linear speed-density relation from (rho, v) samples.

    Samples must be sorted by rho with non-increasing v and v = 0 at the last
    sample (the jam density). Below the first sample the first speed is used.
    """

    rho_veh_km: tuple[float, ...]
    v_kmh: tuple[float, ...]
    _rho_arr: np.ndarray = field(repr=False, compare=False, default=None)
    _v_arr: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho_veh_km, dtype=np.float64)
        v = np.asarray(self.v_kmh, dtype=np.float64)
        if rho.size < 2 or rho.size != v.size:
            raise ValidationError("tabulated NFD needs >= 2 (rho, v) samples")
        if np.any(np.diff(rho) <= 0):
            raise ValidationError("tabulated NFD rho samples must be strictly increasing")
        if np.any(np.diff(v) > 0):
            raise ValidationError("tabulated NFD speeds must be non-increasing")
        if np.any(v < 0) or not np.all(np.isfinite(v)) or not np.all(np.isfinite(rho)):
            raise ValidationError("tabulated NFD samples must be finite with v >= 0")
        if v[-1] != 0.0:
            raise ValidationError("tabulated NFD must end at v = 0 (jam density)")
        object.__setattr__(self, "rho_veh_km", tuple(float(r) for r in rho))
        object.__setattr__(self, "v_kmh", tuple(float(x) for x in v))
        object.__setattr__(self, "_rho_arr", rho)
        object.__setattr__(self, "_v_arr", v)

    @property
    def u_f_kmh(self) -> float:
        return self.v_kmh[0]

    @property
    def rho_j_veh_km(self) -> float:
        return self.rho_veh_km[-1]

    def speed(self, rho: float) -> float:
        _check_rho(rho)
        if rho >= self.rho_j_veh_km:
            return 0.0
        return float(np.interp(rho, self._rho_arr, self._v_arr))

    def slope(self, rho: float) -> float:
        """Secant slope of the containing segment (left segment at sample points)."""
        _check_rho_range(rho, self.rho_j_veh_km)
        if rho < self._rho_arr[0]:
            return 0.0  # flat extrapolation below the first sample
        idx = int(np.searchsorted(self._rho_arr, rho, side="left"))
        idx = max(1, min(idx, len(self.rho_veh_km) - 1))
        dr = self._rho_arr[idx] - self._rho_arr[idx - 1]
        dv = self._v_arr[idx] - self._v_arr[idx - 1]
        return float(dv / dr)

    def max_abs_slope(self) -> float:
        secants = np.diff(self._v_arr) / np.diff(self._rho_arr)
        return float(np.max(np.abs(secants)))

    def _kernel_encoding(self):
        params = np.zeros(4)
        return KIND_TABULATED, params, self._rho_arr, self._v_arr

    @classmethod
    def from_csv(cls, path) -> "TabulatedNFD":
        """Load samples from a CSV with header rho_veh_km,v_km_h."""
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(tuple(data[:, 0]), tuple(data[:, 1]))


NFD = ExponentialNFD | TrapezoidalNFD | TabulatedNFD

_EMPTY = np.empty(0, dtype=np.float64)


def _check_rho(rho: float) -> None:
    if rho < 0:
        raise ValidationError(f"density must be >= 0, got {rho}")


def _check_rho_range(rho: float, rho_j: float) -> None:
    if rho < 0 or rho > rho_j:
        raise ValidationError(f"density must be in [0, {rho_j}], got {rho}")


def speed(nfd: NFD, rho: float) -> float:
    """Speed V(rho) in km/h; 0 at and beyond jam density."""
    return nfd.speed(rho)


def slope(nfd: NFD, rho: float) -> float:
    """dV/drho in km/h per veh/km (left-branch value at kinks)."""
    return nfd.slope(rho)


def max_speed_variation(nfd: NFD, length_km: float, delta_agents: int = 1) -> float:
    """Largest speed change that delta_agents entering or leaving can cause.

    Equals max over rho of |dV/drho| * delta_agents / length_km; for a scaled
    network pass the scaled length.
    """
    if not length_km > 0:
        raise ValidationError(f"length_km must be > 0, got {length_km}")
    return nfd.max_abs_slope() * delta_agents / length_km


def min_length_for_smoothness(nfd: NFD, delta_v_kmh: float) -> float:
    """Smallest network length for which one vehicle shifts speed <= delta_v."""
    if not delta_v_kmh > 0:
        raise ValidationError(f"delta_v_kmh must be > 0, got {delta_v_kmh}")
    return nfd.max_abs_slope() / delta_v_kmh

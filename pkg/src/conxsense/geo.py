"""Small-distance geometry on latitude/longitude pairs."""
import math

EARTH_RADIUS_M = 6371000.0
DEG = math.pi / 180.0


def equirect_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Equirectangular distance in meters, evaluated at the mean latitude.

    The operation order is mirrored exactly by the compiled kernel so both
    backends produce bit-identical distances.
    """
    phi = ((lat1 + lat2) / 2.0) * DEG
    x = ((lon2 - lon1) * DEG) * math.cos(phi)
    y = (lat2 - lat1) * DEG
    return EARTH_RADIUS_M * math.sqrt(x * x + y * y)


def box_size_m(lat_min: float, lon_min: float, lat_max: float, lon_max: float) -> tuple[float, float]:
    """(width, height) of a lat/lon rectangle in meters, width taken at the mean latitude."""
    phi = ((lat_min + lat_max) / 2.0) * DEG
    width = EARTH_RADIUS_M * ((lon_max - lon_min) * DEG) * math.cos(phi)
    height = EARTH_RADIUS_M * ((lat_max - lat_min) * DEG)
    return width, height


def offset(lat: float, lon: float, north_m: float, east_m: float) -> tuple[float, float]:
    """Shift a position by a metric offset (inverse of the equirectangular projection)."""
    dlat = north_m / EARTH_RADIUS_M / DEG
    dlon = east_m / (EARTH_RADIUS_M * math.cos(lat * DEG)) / DEG
    return lat + dlat, lon + dlon

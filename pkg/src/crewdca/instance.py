"""Flight-schedule data model: feasibility rules, pairing costs, synthetic
instance generation and JSON round-tripping.

Times are integer minutes since the start of the month; a calendar day is
t // 1440.  Flights are kept sorted by (dep_time, id) and, for generated
instances, ids coincide with that ordering.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

MINUTES_PER_DAY = 1440

INSTANCE_SCHEMA_VERSION = 1
SOLUTION_SCHEMA_VERSION = 1


class ParseError(ValueError):
    """Raised when an instance or solution file fails schema validation."""


class UnknownFlightId(KeyError):
    """Raised when a pairing references a flight id absent from the instance."""


class InfeasibleConfig(ValueError):
    """Raised when a generator config admits no base-to-base rotation."""


class ConnectionKind(Enum):
    INFEASIBLE = "infeasible"
    SAME_DUTY = "same_duty"
    LAYOVER = "layover"


@dataclass(frozen=True)
class Flight:
    id: int
    flight_code: int
    origin: int
    destination: int
    dep_time: int
    arr_time: int
    aircraft_type: int

    @property
    def duration(self) -> int:
        return self.arr_time - self.dep_time


@dataclass(frozen=True)
class Rules:
    min_connect_min: int = 30
    max_duty_span_min: int = 14 * 60
    max_duty_flying_min: int = 8 * 60
    max_landings_per_duty: int = 5
    min_rest_min: int = 9 * 60
    max_pairing_days: int = 5
    max_duties_per_pairing: int = 4
    candidate_window_min: int = 2880

    def __post_init__(self) -> None:
        if self.min_rest_min <= self.min_connect_min:
            raise ValueError("min_rest_min must exceed min_connect_min")


@dataclass(frozen=True)
class CostModel:
    pay_per_flying_min: float = 1.0
    hotel_per_layover: float = 100.0
    per_diem_per_day: float = 50.0
    deadhead_penalty: float = 500.0
    base_violation_penalty: float = 10.0

    def __post_init__(self) -> None:
        for name in ("pay_per_flying_min", "hotel_per_layover", "per_diem_per_day",
                     "deadhead_penalty", "base_violation_penalty"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class BaseBound:
    city: int
    lo_min: int
    hi_min: int


@dataclass(frozen=True)
class Leg:
    """One leg of a pairing: a flight plus whether the crew rides it as deadhead."""

    flight: int
    deadhead: bool = False


@dataclass(frozen=True)
class Pairing:
    base: int
    duties: tuple[tuple[Leg, ...], ...]

    def legs(self) -> Iterable[Leg]:
        for duty in self.duties:
            yield from duty

    def operated_flights(self) -> tuple[int, ...]:
        return tuple(leg.flight for leg in self.legs() if not leg.deadhead)

    def deadhead_count(self) -> int:
        return sum(1 for leg in self.legs() if leg.deadhead)


class Instance:
    """Immutable after construction; safe to share read-only."""

    def __init__(self, flights: Sequence[Flight], cities: Sequence[int],
                 bases: Sequence[BaseBound], rules: Rules, costs: CostModel,
                 month_len_days: int):
        self.flights: tuple[Flight, ...] = tuple(
            sorted(flights, key=lambda f: (f.dep_time, f.id)))
        self.cities: tuple[int, ...] = tuple(sorted(cities))
        self.bases: tuple[BaseBound, ...] = tuple(sorted(bases, key=lambda b: b.city))
        self.rules = rules
        self.costs = costs
        self.month_len_days = month_len_days

        ids = [f.id for f in self.flights]
        if len(set(ids)) != len(ids):
            raise ParseError("duplicate flight ids")
        city_set = set(self.cities)
        base_cities = {b.city for b in self.bases}
        if not base_cities <= city_set:
            raise ParseError("bases must be a subset of cities")
        for f in self.flights:
            if f.arr_time <= f.dep_time:
                raise ParseError(f"flight {f.id}: arr_time must exceed dep_time")
            if f.origin not in city_set or f.destination not in city_set:
                raise ParseError(f"flight {f.id}: unknown city")

        self.by_id: dict[int, Flight] = {f.id: f for f in self.flights}
        # rank in the (dep_time, id) ordering; used wherever path order matters
        self.dep_rank: dict[int, int] = {f.id: i for i, f in enumerate(self.flights)}
        self.base_cities: tuple[int, ...] = tuple(sorted(base_cities))

    def flight(self, flight_id: int) -> Flight:
        try:
            return self.by_id[flight_id]
        except KeyError:
            raise UnknownFlightId(flight_id) from None

    def sort_by_departure(self, flight_ids: Iterable[int]) -> list[int]:
        return sorted(flight_ids, key=lambda i: self.dep_rank[i])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.flights == other.flights and self.cities == other.cities
                and self.bases == other.bases and self.rules == other.rules
                and self.costs == other.costs
                and self.month_len_days == other.month_len_days)


def check_connection(f1: Flight, f2: Flight, rules: Rules) -> ConnectionKind:
    """Classify the connection f1 -> f2.  Total function, never raises."""
    if f1.destination != f2.origin or f1.aircraft_type != f2.aircraft_type:
        return ConnectionKind.INFEASIBLE
    gap = f2.dep_time - f1.arr_time
    if gap < rules.min_connect_min or gap > rules.candidate_window_min:
        return ConnectionKind.INFEASIBLE
    if gap < rules.min_rest_min:
        return ConnectionKind.SAME_DUTY
    return ConnectionKind.LAYOVER


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str
    duty: int | None = None
    index: int | None = None


def day_of(t: int) -> int:
    return t // MINUTES_PER_DAY


def elapsed_days(p: Pairing, inst: Instance) -> int:
    legs = list(p.legs())
    first = inst.flight(legs[0].flight)
    last = inst.flight(legs[-1].flight)
    return day_of(last.arr_time) - day_of(first.dep_time) + 1


def validate_pairing(p: Pairing, inst: Instance) -> list[Violation]:
    """Return every violated rule; an empty list means the pairing is feasible.

    Raises UnknownFlightId when the pairing references a missing flight.
    """
    rules = inst.rules
    v: list[Violation] = []
    legs_per_duty = [list(d) for d in p.duties]
    for duty in legs_per_duty:
        for leg in duty:
            inst.flight(leg.flight)  # raises UnknownFlightId

    if not legs_per_duty or any(not d for d in legs_per_duty):
        v.append(Violation("EmptyDuty", "pairing has an empty duty"))
        return v

    first = inst.flight(legs_per_duty[0][0].flight)
    last = inst.flight(legs_per_duty[-1][-1].flight)
    if p.base not in inst.base_cities:
        v.append(Violation("UnknownBase", f"city {p.base} is not a base"))
    if first.origin != p.base:
        v.append(Violation("StartAwayFromBase",
                           f"first departure city {first.origin} != base {p.base}"))
    if last.destination != p.base:
        v.append(Violation("EndAwayFromBase",
                           f"last arrival city {last.destination} != base {p.base}"))

    if len(legs_per_duty) > rules.max_duties_per_pairing:
        v.append(Violation("TooManyDuties",
                           f"{len(legs_per_duty)} > {rules.max_duties_per_pairing}"))
    if elapsed_days(p, inst) > rules.max_pairing_days:
        v.append(Violation("TooManyDays",
                           f"{elapsed_days(p, inst)} > {rules.max_pairing_days}"))

    for di, duty in enumerate(legs_per_duty):
        flights = [inst.flight(leg.flight) for leg in duty]
        for i in range(len(flights) - 1):
            kind = check_connection(flights[i], flights[i + 1], rules)
            if kind != ConnectionKind.SAME_DUTY:
                v.append(Violation("BadConnection",
                                   f"{flights[i].id}->{flights[i + 1].id} is {kind.value}",
                                   duty=di, index=i))
        flying = sum(f.duration for f, leg in zip(flights, duty) if not leg.deadhead)
        if flying > rules.max_duty_flying_min:
            v.append(Violation("TooMuchFlying",
                               f"{flying} > {rules.max_duty_flying_min}", duty=di))
        if len(flights) > rules.max_landings_per_duty:
            v.append(Violation("TooManyLandings",
                               f"{len(flights)} > {rules.max_landings_per_duty}", duty=di))
        span = flights[-1].arr_time - flights[0].dep_time
        if span > rules.max_duty_span_min:
            v.append(Violation("DutyTooLong",
                               f"{span} > {rules.max_duty_span_min}", duty=di))

    for di in range(len(legs_per_duty) - 1):
        f1 = inst.flight(legs_per_duty[di][-1].flight)
        f2 = inst.flight(legs_per_duty[di + 1][0].flight)
        if check_connection(f1, f2, rules) != ConnectionKind.LAYOVER:
            v.append(Violation("BadRest", f"{f1.id}->{f2.id} is not a layover",
                               duty=di, index=len(legs_per_duty[di]) - 1))
    return v


def operated_flying_minutes(p: Pairing, inst: Instance) -> int:
    return sum(inst.flight(leg.flight).duration
               for leg in p.legs() if not leg.deadhead)


def pairing_cost(p: Pairing, inst: Instance) -> float:
    """Four-term linear cost: pay + hotels + per diem + deadhead penalties."""
    costs = inst.costs
    return (costs.pay_per_flying_min * operated_flying_minutes(p, inst)
            + costs.hotel_per_layover * (len(p.duties) - 1)
            + costs.per_diem_per_day * elapsed_days(p, inst)
            + costs.deadhead_penalty * p.deadhead_count())


# ---------------------------------------------------------------------------
# Synthetic instance generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorConfig:
    n_flights: int
    n_cities: int = 20
    n_bases: int = 2
    n_aircraft_types: int = 1
    month_len_days: int = 28
    min_leg_min: int = 60
    max_leg_min: int = 180
    same_duty_gap_max: int = 90
    layover_gap_max: int = 960
    planted_max_days: int | None = None
    base_leg_bias: float = 0.5
    base_lo_frac: float = 0.85
    base_hi_frac: float = 1.15
    rules: Rules = field(default_factory=Rules)
    costs: CostModel = field(default_factory=CostModel)

    def __post_init__(self) -> None:
        if self.n_bases < 1 or self.n_cities < 2 or self.n_aircraft_types < 1:
            raise InfeasibleConfig("need >=1 base, >=2 cities, >=1 aircraft type")
        if self.n_flights < 1:
            raise InfeasibleConfig("need >=1 flight")
        if self.n_bases > self.n_cities:
            raise InfeasibleConfig("more bases than cities")


@dataclass(frozen=True)
class _DraftLeg:
    origin: int
    destination: int
    dep_time: int
    arr_time: int
    aircraft_type: int
    deadhead: bool = False


def _plan_pairing_sizes(n_flights: int, max_legs: int, rng: random.Random) -> list[int]:
    """Split n_flights into pairing sizes in [2, max_legs] (a final 1 only if forced)."""
    sizes: list[int] = []
    remaining = n_flights
    while remaining > 0:
        if remaining == 1:
            sizes.append(1)
            break
        hi = min(max_legs, remaining)
        size = rng.randint(2, hi)
        if remaining - size == 1:  # avoid stranding a single leg
            size = size + 1 if size + 1 <= hi else size - 1
        sizes.append(size)
        remaining -= size
    return sizes


def _build_pairing_walk(cfg: GeneratorConfig, rng: random.Random, base: int,
                        n_legs: int, actype: int,
                        start_day: int, max_days: int) -> list[list[_DraftLeg]] | None:
    """Random base-to-base walk of n_legs legs; returns duties or None on dead end.

    Intermediate stops avoid the pairing's own base so that "back at base"
    always means "pairing over" on planted data.
    """
    rules = cfg.rules
    non_base_cities = [c for c in range(cfg.n_cities) if c != base]
    t = start_day * MINUTES_PER_DAY + rng.randint(5 * 60, 14 * 60)
    deadline = (start_day + max_days) * MINUTES_PER_DAY
    month_end = cfg.month_len_days * MINUTES_PER_DAY

    other_bases = [c for c in range(cfg.n_bases) if c != base]
    duties: list[list[_DraftLeg]] = [[]]
    city = base
    duty_start = t
    duty_flying = 0
    for i in range(n_legs):
        last = i == n_legs - 1
        duration = rng.randint(cfg.min_leg_min, cfg.max_leg_min)
        if last:
            dest = base
        elif other_bases and rng.random() < cfg.base_leg_bias and city not in other_bases:
            dest = rng.choice(other_bases)
        else:
            choices = [c for c in non_base_cities if c != city]
            if not choices:
                return None
            dest = rng.choice(choices)
        if dest == city:
            return None

        arr = t + duration
        duty = duties[-1]
        fits_duty = (len(duty) < rules.max_landings_per_duty
                     and duty_flying + duration <= rules.max_duty_flying_min
                     and arr - duty_start <= rules.max_duty_span_min)
        if duty and not fits_duty:
            if len(duties) >= rules.max_duties_per_pairing:
                return None
            rest = rng.randint(rules.min_rest_min,
                               min(cfg.layover_gap_max, rules.candidate_window_min))
            t = duty[-1].arr_time + rest
            duties.append([])
            duty_start = t
            duty_flying = 0
            arr = t + duration
        if arr > deadline or arr > month_end:
            return None

        duties[-1].append(_DraftLeg(city, dest, t, arr, actype))
        duty_flying += duration
        city = dest
        if not last:
            gap = rng.randint(rules.min_connect_min,
                              rules.min_connect_min + cfg.same_duty_gap_max)
            t = arr + gap
    if city != base:
        return None
    return duties


def generate_instance(cfg: GeneratorConfig, seed: int) -> tuple[Instance, list[Pairing]]:
    """Deterministic synthetic month: aircraft rotations equal planted pairings.

    Returns the instance together with the planted cover (ground-truth
    labels for predictor training); every flight is operated exactly once.
    """
    rng = random.Random(seed)
    rules = cfg.rules
    max_days = cfg.planted_max_days or rules.max_pairing_days
    max_days = min(max_days, rules.max_pairing_days, cfg.month_len_days)
    max_legs = min(rules.max_landings_per_duty * rules.max_duties_per_pairing, 12)

    sizes = _plan_pairing_sizes(cfg.n_flights, max_legs, rng)
    drafts: list[tuple[int, list[list[_DraftLeg]]]] = []
    for size in sizes:
        built = None
        for _ in range(200):
            base = rng.randrange(cfg.n_bases)
            actype = rng.randrange(cfg.n_aircraft_types)
            latest_start = max(0, cfg.month_len_days - max_days)
            start_day = rng.randint(0, latest_start)
            built = _build_pairing_walk(cfg, rng, base, size, actype,
                                        start_day, max_days)
            if built is not None:
                drafts.append((base, built))
                break
        if built is None:
            raise InfeasibleConfig(
                f"could not place a {size}-leg base-to-base rotation")

    all_legs: list[tuple[_DraftLeg, int, int, int]] = []  # leg, pairing, duty, pos
    for pi, (_, duties) in enumerate(drafts):
        for di, duty in enumerate(duties):
            for li, leg in enumerate(duty):
                all_legs.append((leg, pi, di, li))
    all_legs.sort(key=lambda item: (item[0].dep_time, item[1], item[2], item[3]))

    code_of: dict[tuple[int, int], int] = {}
    flights: list[Flight] = []
    leg_id: dict[tuple[int, int, int], int] = {}
    for fid, (leg, pi, di, li) in enumerate(all_legs):
        pair = (leg.origin, leg.destination)
        code = code_of.setdefault(pair, len(code_of))
        flights.append(Flight(fid, code, leg.origin, leg.destination,
                              leg.dep_time, leg.arr_time, leg.aircraft_type))
        leg_id[(pi, di, li)] = fid

    planted: list[Pairing] = []
    fly_per_base: dict[int, int] = {b: 0 for b in range(cfg.n_bases)}
    for pi, (base, duties) in enumerate(drafts):
        tup = tuple(
            tuple(Leg(leg_id[(pi, di, li)]) for li in range(len(duty)))
            for di, duty in enumerate(duties))
        planted.append(Pairing(base=base, duties=tup))
        fly_per_base[base] += sum(l.arr_time - l.dep_time
                                  for duty in duties for l in duty)

    bases = [BaseBound(b, int(cfg.base_lo_frac * fly_per_base[b]),
                       int(cfg.base_hi_frac * fly_per_base[b]) + 1)
             for b in range(cfg.n_bases)]
    inst = Instance(flights, list(range(cfg.n_cities)), bases, rules, cfg.costs,
                    cfg.month_len_days)

    for p in planted:
        bad = validate_pairing(p, inst)
        if bad:
            raise InfeasibleConfig(f"planted pairing invalid: {bad[0]}")
    return inst, planted


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------

def instance_to_dict(inst: Instance) -> dict:
    return {
        "version": INSTANCE_SCHEMA_VERSION,
        "month_len_days": inst.month_len_days,
        "cities": list(inst.cities),
        "bases": [{"city": b.city, "lo_min": b.lo_min, "hi_min": b.hi_min}
                  for b in inst.bases],
        "rules": {
            "min_connect_min": inst.rules.min_connect_min,
            "max_duty_span_min": inst.rules.max_duty_span_min,
            "max_duty_flying_min": inst.rules.max_duty_flying_min,
            "max_landings_per_duty": inst.rules.max_landings_per_duty,
            "min_rest_min": inst.rules.min_rest_min,
            "max_pairing_days": inst.rules.max_pairing_days,
            "max_duties_per_pairing": inst.rules.max_duties_per_pairing,
            "candidate_window_min": inst.rules.candidate_window_min,
        },
        "costs": {
            "pay_per_flying_min": inst.costs.pay_per_flying_min,
            "hotel_per_layover": inst.costs.hotel_per_layover,
            "per_diem_per_day": inst.costs.per_diem_per_day,
            "deadhead_penalty": inst.costs.deadhead_penalty,
            "base_violation_penalty": inst.costs.base_violation_penalty,
        },
        "flights": [{"id": f.id, "code": f.flight_code, "origin": f.origin,
                     "destination": f.destination, "dep": f.dep_time,
                     "arr": f.arr_time, "actype": f.aircraft_type}
                    for f in inst.flights],
    }


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=1) + "\n",
                          encoding="utf-8")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ParseError(msg)


def instance_from_dict(doc: dict) -> Instance:
    _require(isinstance(doc, dict), "instance document must be an object")
    _require(doc.get("version") == INSTANCE_SCHEMA_VERSION,
             f"unknown schema version {doc.get('version')!r}")
    for key in ("month_len_days", "cities", "bases", "rules", "costs", "flights"):
        _require(key in doc, f"missing field {key!r}")
    try:
        rules = Rules(**doc["rules"])
        costs = CostModel(**doc["costs"])
        bases = [BaseBound(b["city"], b["lo_min"], b["hi_min"]) for b in doc["bases"]]
        flights = []
        for rec in doc["flights"]:
            f = Flight(rec["id"], rec["code"], rec["origin"], rec["destination"],
                       rec["dep"], rec["arr"], rec["actype"])
            if f.arr_time <= f.dep_time:
                raise ParseError(f"flight {f.id}: arr_time must exceed dep_time")
            flights.append(f)
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed instance document: {exc}") from exc
    return Instance(flights, doc["cities"], bases, rules, costs,
                    doc["month_len_days"])


def load_instance(path: str | Path) -> Instance:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}") from exc
    return instance_from_dict(doc)


def pairings_to_obj(pairings: Sequence[Pairing]) -> list:
    return [[[{"flight": leg.flight, "deadhead": leg.deadhead} for leg in duty]
             for duty in p.duties] for p in pairings]


def pairings_from_obj(obj: list, inst: Instance) -> list[Pairing]:
    pairings = []
    for duties in obj:
        _require(isinstance(duties, list) and duties, "pairing must be a list of duties")
        legs = tuple(
            tuple(Leg(rec["flight"], bool(rec.get("deadhead", False))) for rec in duty)
            for duty in duties)
        first = inst.flight(legs[0][0].flight)
        pairings.append(Pairing(base=first.origin, duties=legs))
    return pairings


def save_planted(pairings: Sequence[Pairing], path: str | Path) -> None:
    Path(path).write_text(json.dumps(pairings_to_obj(pairings)) + "\n",
                          encoding="utf-8")


def load_planted(path: str | Path, inst: Instance) -> list[Pairing]:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}") from exc
    _require(isinstance(obj, list), "planted solution must be a JSON list")
    return pairings_from_obj(obj, inst)


def planted_window_config(cfg: GeneratorConfig, overlap: int) -> GeneratorConfig:
    """Clamp planted pairing length so rolling windows can always re-cover them."""
    return replace(cfg, planted_max_days=min(
        cfg.planted_max_days or cfg.rules.max_pairing_days, overlap + 1))

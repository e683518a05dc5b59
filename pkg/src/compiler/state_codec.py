"""
Flattened contract state and its encoding as state outputs.

Variables and map points share one key space: ``H("var_x")`` and
``H("map_m[" + toStr(indices) + "]")``. A flat state is the sorted list of
non-default ``(hash, value)`` entries; on chain it becomes an alternating
sequence of intervals and points that partitions ``(MIN_H, MAX_H)``::

    Interval(MIN_H, h1), Point(h1, v1), Interval(h1, h2), ..., Point(hn, vn), Interval(hn, MAX_H)

Intervals certify that every hash strictly inside them maps to 0.
"""

import logging
from bisect import bisect_left, insort
from collections import deque
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

from hurf.ast import BVal, is_default
from hurf.evaluator import render_point
from hurf.semantics import ContractState
from ledger.model import DEFAULT_TAG, NON_DEFAULT_TAG, Output, OutputRef, StateScript
from utils.crypto import MAX_H, MIN_H, HashCollisionError, hash_bytes

logger = logging.getLogger(__name__)

FlatState = list[tuple[int, BVal]]
UpdateList = Sequence[tuple[int, BVal]]


class StateCodecError(ValueError):
    """Malformed item set, missing witness or unsorted update list."""


class OutputGenerationError(StateCodecError):
    """The output function is undefined for the given inputs and updates."""


@dataclass(frozen=True, slots=True)
class Point:
    h: int
    value: BVal

    @property
    def key(self) -> tuple[int, int]:
        return (self.h, 0)

    @property
    def datum(self) -> tuple:
        return (NON_DEFAULT_TAG, self.h, self.value)

    def covers(self, h: int) -> bool:
        return h == self.h


@dataclass(frozen=True, slots=True)
class Interval:
    lo: int
    hi: int

    @property
    def key(self) -> tuple[int, int]:
        return (self.lo, 1)

    @property
    def datum(self) -> tuple:
        return (DEFAULT_TAG, self.lo, self.hi)

    def covers(self, h: int) -> bool:
        return self.lo < h < self.hi


StateItem = Point | Interval

STATE_SCRIPT = StateScript()


def item_to_output(item: StateItem) -> Output:
    return Output(validator=STATE_SCRIPT, datum=item.datum, in_contract=True)


def item_from_datum(datum: tuple) -> StateItem | None:
    """Decode a state datum, or ``None`` when it is not a well-formed one."""
    match datum:
        case (tag, int() as h, value) if tag == NON_DEFAULT_TAG and not isinstance(h, bool):
            if isinstance(value, (bool, int, str)) and not is_default(value) and MIN_H < h < MAX_H:
                return Point(h, value)
        case (tag, int() as lo, int() as hi) if tag == DEFAULT_TAG:
            if not isinstance(lo, bool) and not isinstance(hi, bool) and MIN_H <= lo < hi <= MAX_H:
                return Interval(lo, hi)
    return None


def item_from_output(output: Output) -> StateItem | None:
    if not output.in_contract or not isinstance(output.validator, StateScript):
        return None
    if not output.value.is_zero():
        return None
    return item_from_datum(output.datum)


# ------------------------------------------------------------------ state keys


@dataclass(frozen=True, slots=True)
class StateKey:
    source: str | tuple[str, tuple[BVal, ...]]
    preimage: str
    hash: int


def _preimage(source: str | tuple[str, tuple[BVal, ...]]) -> str:
    if isinstance(source, str):
        return f"var_{source}"
    map_name, point = source
    return f"map_{map_name}[{render_point(point)}]"


def _key_hash(preimage: str) -> int:
    h = hash_bytes(preimage.encode("utf-8"))
    if not MIN_H < h < MAX_H:
        raise HashCollisionError(f"State key {preimage!r} hashed onto a sentinel")
    return h


def state_key(source: str | tuple[str, tuple[BVal, ...]]) -> StateKey:
    """Key of a variable name or a ``(map name, point)`` pair."""
    preimage = _preimage(source)
    return StateKey(source, preimage, _key_hash(preimage))


def var_key_hash(name: str) -> int:
    return _key_hash(f"var_{name}")


def map_key_hash(map_name: str, point: tuple[BVal, ...]) -> int:
    return _key_hash(f"map_{map_name}[{render_point(point)}]")


def flatten_state(state: ContractState) -> FlatState:
    """
    Hash a contract state into its flat form.

    Raises:
        HashCollisionError: When two distinct keys share a hash.
    """
    preimages: dict[int, str] = {}
    entries: dict[int, BVal] = {}

    def put(preimage: str, value: BVal) -> None:
        h = _key_hash(preimage)
        if h in preimages and preimages[h] != preimage:
            raise HashCollisionError(f"{preimage!r} and {preimages[h]!r} share a state key")
        preimages[h] = preimage
        entries[h] = value

    for name, value in state.vars.items():
        if not is_default(value):
            put(f"var_{name}", value)
    for map_name, points in state.maps.items():
        for rendered, value in points.items():
            if not is_default(value):
                put(f"map_{map_name}[{rendered}]", value)
    return sorted(entries.items())


def encode_state_outputs(flat: FlatState) -> list[StateItem]:
    items: list[StateItem] = []
    previous = MIN_H
    for h, value in flat:
        if not previous < h < MAX_H:
            raise StateCodecError(f"flat state is not strictly increasing at {h:#x}")
        if is_default(value):
            raise StateCodecError(f"flat state holds a default value at {h:#x}")
        items.append(Interval(previous, h))
        items.append(Point(h, value))
        previous = h
    items.append(Interval(previous, MAX_H))
    return items


def decode_state(items: Iterable[StateItem]) -> FlatState:
    """
    Recover the flat state from a complete item set.

    Raises:
        StateCodecError: On duplicate points, overlapping intervals or gaps.
    """
    ordered = sorted(items, key=lambda item: item.key)
    for first, second in zip(ordered, ordered[1:]):
        if first.key == second.key:
            kind = "points" if isinstance(first, Point) else "intervals"
            raise StateCodecError(f"duplicate {kind} at {first.key[0]:#x}")

    flat: FlatState = []
    expected_lo = MIN_H
    last_hi: int | None = None
    for item in ordered:
        if last_hi == MAX_H:
            raise StateCodecError(f"item past the end of the key space at {item.key[0]:#x}")
        if isinstance(item, Interval):
            if last_hi is not None and expected_lo != last_hi:
                raise StateCodecError(f"interval at {item.lo:#x} overlaps or skips a point")
            if not item.lo < item.hi:
                raise StateCodecError(f"empty interval at {item.lo:#x}")
            if item.lo != expected_lo:
                problem = "overlap" if item.lo < expected_lo else "gap"
                raise StateCodecError(f"{problem} before interval starting at {item.lo:#x}")
            last_hi = item.hi
        else:
            if last_hi is None or item.h != last_hi or expected_lo == last_hi:
                problem = "gap" if last_hi is None or item.h > last_hi else "overlap"
                raise StateCodecError(f"{problem} around point {item.h:#x}")
            if is_default(item.value):
                raise StateCodecError(f"point {item.h:#x} holds the default value")
            flat.append((item.h, item.value))
            expected_lo = item.h
    if last_hi != MAX_H:
        raise StateCodecError("gap at the end of the key space")
    return flat


# --------------------------------------------------------------------- index


class StateIndex:
    """
    Sorted state items with optional output references.

    Lookups are binary searches on ``(hash, 0)`` for points and ``(lo, 1)``
    for intervals, so an interval sorts right after the point it starts at.
    """

    def __init__(
        self,
        items: Iterable[StateItem] = (),
        refs: Mapping[StateItem, OutputRef] | None = None,
    ):
        self._keys: list[tuple[int, int]] = []
        self._items: list[StateItem] = []
        self._refs: dict[StateItem, OutputRef] = {}
        self._by_ref: dict[OutputRef, StateItem] = {}
        for item in sorted(items, key=lambda i: i.key):
            self._keys.append(item.key)
            self._items.append(item)
        for item, ref in (refs or {}).items():
            self._refs[item] = ref
            self._by_ref[ref] = item

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self):
        return iter(self._items)

    @property
    def items(self) -> list[StateItem]:
        return list(self._items)

    def _position(self, key: tuple[int, int]) -> int | None:
        i = bisect_left(self._keys, key)
        if i < len(self._keys) and self._keys[i] == key:
            return i
        return None

    def point_at(self, h: int) -> Point | None:
        i = self._position((h, 0))
        return self._items[i] if i is not None else None

    def enclosing(self, h: int) -> Interval | None:
        i = bisect_left(self._keys, (h, 0)) - 1
        if i >= 0:
            candidate = self._items[i]
            if isinstance(candidate, Interval) and candidate.covers(h):
                return candidate
        return None

    def interval_ending_at(self, h: int) -> Interval | None:
        i = bisect_left(self._keys, (h, 0)) - 1
        if i >= 0:
            candidate = self._items[i]
            if isinstance(candidate, Interval) and candidate.hi == h:
                return candidate
        return None

    def interval_starting_at(self, h: int) -> Interval | None:
        i = self._position((h, 1))
        return self._items[i] if i is not None else None

    def lookup(self, h: int) -> tuple[BVal, StateItem]:
        """
        Value at ``h`` and the item witnessing it.

        Raises:
            StateCodecError: When neither a point nor an enclosing interval is present.
        """
        point = self.point_at(h)
        if point is not None:
            return point.value, point
        interval = self.enclosing(h)
        if interval is None:
            raise StateCodecError(f"no state item witnesses hash {h:#x}")
        return 0, interval

    def ref_of(self, item: StateItem) -> OutputRef:
        ref = self._refs.get(item)
        if ref is None:
            raise StateCodecError(f"no output reference recorded for {item}")
        return ref

    def item_for_ref(self, ref: OutputRef) -> StateItem | None:
        return self._by_ref.get(ref)

    def add(self, item: StateItem, ref: OutputRef | None = None) -> None:
        if self._position(item.key) is not None:
            raise StateCodecError(f"an item with key {item.key[0]:#x} is already indexed")
        i = bisect_left(self._keys, item.key)
        self._keys.insert(i, item.key)
        self._items.insert(i, item)
        if ref is not None:
            self._refs[item] = ref
            self._by_ref[ref] = item

    def remove(self, item: StateItem) -> None:
        i = self._position(item.key)
        if i is None or self._items[i] != item:
            raise StateCodecError(f"{item} is not indexed")
        del self._keys[i]
        del self._items[i]
        ref = self._refs.pop(item, None)
        if ref is not None:
            self._by_ref.pop(ref, None)

    def remove_ref(self, ref: OutputRef) -> StateItem | None:
        item = self._by_ref.get(ref)
        if item is not None:
            self.remove(item)
        return item

    def replace(self, consumed: Iterable[StateItem], produced: Iterable[StateItem]) -> None:
        for item in consumed:
            self.remove(item)
        for item in produced:
            self.add(item)


def lookup(items: Iterable[StateItem] | StateIndex, h: int) -> tuple[BVal, StateItem]:
    return _as_index(items).lookup(h)


def _as_index(items: Iterable[StateItem] | StateIndex) -> StateIndex:
    return items if isinstance(items, StateIndex) else StateIndex(items)


def _check_sorted(updates: UpdateList) -> None:
    for (a, _), (b, _) in zip(updates, updates[1:]):
        if not a < b:
            raise StateCodecError("update list is not strictly increasing")
    for h, _ in updates:
        if not MIN_H < h < MAX_H:
            raise StateCodecError(f"update key {h:#x} outside the key space")


def gen_inputs(items: Iterable[StateItem] | StateIndex, updates: UpdateList) -> list[StateItem]:
    """
    State items a transaction must spend to apply ``updates``.

    Since ``updates`` is sorted, an interval can only repeat as the last
    appended item, so deduplication looks only at that one.

    Raises:
        StateCodecError: On unsorted updates or a missing witness.
    """
    _check_sorted(updates)
    index = _as_index(items)
    result: list[StateItem] = []

    def push_interval(interval: Interval | None, h: int) -> None:
        if interval is None:
            raise StateCodecError(f"no interval next to hash {h:#x}")
        if not result or result[-1] != interval:
            result.append(interval)

    for h, value in updates:
        _, witness = index.lookup(h)
        if isinstance(witness, Point):
            if is_default(value):
                push_interval(index.interval_ending_at(h), h)
                result.append(witness)
                push_interval(index.interval_starting_at(h), h)
            else:
                result.append(witness)
        else:
            push_interval(witness, h)
    return result


def gen_outputs(inputs: Sequence[StateItem], updates: UpdateList) -> list[StateItem]:
    """
    New state items replacing ``inputs`` after applying ``updates``.

    Walks inputs and updates left to right. An interval containing the next
    update point is split (non-default value) or kept whole (default value);
    a point is rewritten in place; an interval, point, interval triple whose
    point is reset to default merges into one interval. A pending interval is
    emitted once the next update lies past its end, or at its end with a
    non-default value.

    Raises:
        OutputGenerationError: When inputs and updates do not line up.
    """
    _check_sorted(updates)
    queue: deque[StateItem] = deque(inputs)
    pending = deque(updates)
    out: list[StateItem] = []
    starred = False

    def fail(reason: str) -> OutputGenerationError:
        return OutputGenerationError(f"cannot generate outputs: {reason}")

    while True:
        if starred:
            if not queue:
                if pending:
                    raise fail("updates left after the last input")
                return out
            head = queue[0]
            if not isinstance(head, Interval):
                raise fail("expected a pending interval")
            if not pending:
                if len(queue) != 1:
                    raise fail("inputs left after the last update")
                out.append(queue.popleft())
                return out
            h, value = pending[0]
            if h > head.hi or (h == head.hi and not is_default(value)):
                out.append(queue.popleft())
            starred = False
            continue

        if not queue and not pending:
            return out
        if not queue or not pending:
            raise fail("inputs and updates do not line up")

        head = queue[0]
        h, value = pending[0]
        if isinstance(head, Interval) and head.covers(h):
            queue.popleft()
            pending.popleft()
            if is_default(value):
                queue.appendleft(head)
            else:
                out.append(Interval(head.lo, h))
                out.append(Point(h, value))
                queue.appendleft(Interval(h, head.hi))
            starred = True
        elif isinstance(head, Point) and head.h == h and not is_default(value):
            queue.popleft()
            pending.popleft()
            out.append(Point(h, value))
        elif (
            isinstance(head, Interval)
            and head.hi == h
            and is_default(value)
            and len(queue) >= 3
            and isinstance(queue[1], Point)
            and queue[1].h == h
            and isinstance(queue[2], Interval)
            and queue[2].lo == h
        ):
            right = queue[2]
            for _ in range(3):
                queue.popleft()
            pending.popleft()
            queue.appendleft(Interval(head.lo, right.hi))
            starred = True
        else:
            raise fail(f"no case applies to {head} with update at {h:#x}")


def apply_updates(items: Iterable[StateItem], updates: UpdateList) -> list[StateItem]:
    """Full item set after ``updates``: consume ``gen_inputs`` and add ``gen_outputs``."""
    index = StateIndex(items)
    consumed = gen_inputs(index, updates)
    produced = gen_outputs(consumed, updates)
    index.replace(consumed, produced)
    return index.items

"""Football game metadata: HTTP client with disk cache plus offline
fixtures, and derived game-time quantities.

The client prefers a warm disk cache (so reruns are reproducible and
offline), then the network, then the packaged fixture file.  The fixture
ships the six games the analyses are calibrated against.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import os
import tempfile
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import requests

from .errors import ConfigError, DataError

API_URL = "https://api.collegefootballdata.com/games"
API_KEY_ENV = "CFB_API_KEY"

#: average game length used to estimate end times (3 h 22 min)
GAME_MINUTES = 202

FIXTURE_HEADER = ["matchup", "date", "start_time", "attendance",
                  "excitement_index", "home_win_prob"]


@dataclass(frozen=True)
class GameRecord:
    matchup: str
    date: dt.date
    start_time: dt.time
    attendance: int
    excitement_index: float
    home_win_prob: float

    def __post_init__(self):
        if not 0.0 <= self.home_win_prob <= 1.0:
            raise DataError(f"home_win_prob out of range: {self.home_win_prob}")
        if self.attendance < 0:
            raise DataError("attendance must be >= 0")

    @property
    def away_win_prob(self) -> float:
        return 1.0 - self.home_win_prob

    @property
    def start_seconds(self) -> float:
        return self.start_time.hour * 3600.0 + self.start_time.minute * 60.0

    def to_dict(self) -> dict:
        return {
            "matchup": self.matchup,
            "date": self.date.isoformat(),
            "start_time": self.start_time.strftime("%H:%M"),
            "attendance": self.attendance,
            "excitement_index": self.excitement_index,
            "home_win_prob": self.home_win_prob,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "GameRecord":
        try:
            return cls(
                matchup=str(raw["matchup"]),
                date=dt.date.fromisoformat(raw["date"]),
                start_time=dt.datetime.strptime(raw["start_time"], "%H:%M").time(),
                attendance=int(raw["attendance"]),
                excitement_index=float(raw["excitement_index"]),
                home_win_prob=float(raw["home_win_prob"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed game record: {exc}") from exc


def estimated_end(start: dt.time) -> dt.time:
    """Estimated game end: start plus the average game length."""
    anchor = dt.datetime.combine(dt.date(2000, 1, 1), start)
    return (anchor + dt.timedelta(minutes=GAME_MINUTES)).time()


def estimated_end_seconds(start_seconds: float) -> float:
    """Seconds-since-midnight variant; may exceed 24 h (past midnight)."""
    return start_seconds + GAME_MINUTES * 60.0


def default_fixture_path() -> Path:
    return Path(resources.files("intersafe.data") / "games_fixture.csv")


def load_fixture(path=None) -> dict[dt.date, GameRecord]:
    path = Path(path) if path else default_fixture_path()
    games = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != FIXTURE_HEADER:
            raise DataError(f"{path}: malformed fixture header")
        for row in reader:
            if not row:
                continue
            record = GameRecord.from_dict(dict(zip(FIXTURE_HEADER, row)))
            games[record.date] = record
    return games


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".cache-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_api_payload(payload, date: dt.date) -> GameRecord | None:
    """Map a provider response (list of game objects) onto a GameRecord."""
    if not isinstance(payload, list):
        raise DataError(f"unexpected payload shape: {str(payload)[:200]}")
    for game in payload:
        try:
            start = dt.datetime.fromisoformat(game["start_date"].replace("Z", "+00:00"))
            if start.date() != date and game.get("local_date") != date.isoformat():
                continue
            home_prob = float(game["home_post_win_prob"]
                              if game.get("home_post_win_prob") is not None
                              else game["home_pregame_elo_prob"])
            return GameRecord(
                matchup=f"{game['away_team']} @ {game['home_team']}",
                date=date,
                start_time=start.time().replace(second=0, microsecond=0),
                attendance=int(game.get("attendance") or 0),
                excitement_index=float(game.get("excitement_index") or 0.0),
                home_win_prob=home_prob,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(
                f"malformed game payload for {date}: {exc}; "
                f"body: {str(game)[:200]}") from exc
    return None


class GameSource:
    """Per-date game lookup with cache/fixture fallback.

    source="fixture" reads only the fixture file; source="http" tries the
    disk cache first (warm caches make reruns byte-identical), then the
    API, then the fixture.
    """

    def __init__(self, source: str = "fixture", fixture_path=None,
                 cache_dir=None, api_url: str = API_URL, timeout: float = 10.0):
        if source not in ("http", "fixture"):
            raise ConfigError(f"unknown game source {source!r}")
        self.source = source
        self.fixture_path = fixture_path
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.api_url = api_url
        self.timeout = timeout
        self._fixture: dict[dt.date, GameRecord] | None = None

    def _from_fixture(self, date: dt.date) -> GameRecord | None:
        if self._fixture is None:
            self._fixture = load_fixture(self.fixture_path)
        return self._fixture.get(date)

    def _cache_path(self, date: dt.date) -> Path | None:
        if self.cache_dir is None:
            return None
        return self.cache_dir / f"{date.isoformat()}.json"

    def _from_cache(self, date: dt.date) -> GameRecord | None:
        path = self._cache_path(date)
        if path is None or not path.exists():
            return None
        raw = json.loads(path.read_text())
        if raw is None:
            return None
        return GameRecord.from_dict(raw)

    def _store_cache(self, date: dt.date, record: GameRecord | None) -> None:
        path = self._cache_path(date)
        if path is None:
            return
        payload = None if record is None else record.to_dict()
        _atomic_write(path, json.dumps(payload, sort_keys=True))

    def _from_http(self, date: dt.date) -> GameRecord | None:
        key = os.environ.get(API_KEY_ENV, "")
        if not key:
            raise DataError(f"{API_KEY_ENV} is not set")
        resp = requests.get(
            self.api_url,
            params={"year": date.year, "date": date.isoformat()},
            headers={"Authorization": f"Bearer {key}"},
            timeout=self.timeout)
        resp.raise_for_status()
        try:
            payload = resp.json()
        except ValueError as exc:
            raise DataError(
                f"non-JSON response for {date}: {resp.text[:200]}") from exc
        return _parse_api_payload(payload, date)

    def fetch_game(self, date: dt.date) -> GameRecord | None:
        """The game played on ``date``, or None on a non-gameday."""
        if self.source == "fixture":
            return self._from_fixture(date)
        cached = self._from_cache(date)
        if cached is not None:
            return cached
        cache_path = self._cache_path(date)
        if cache_path is not None and cache_path.exists():
            return None                     # cached non-gameday
        try:
            record = self._from_http(date)
        except requests.RequestException:
            return self._from_fixture(date)
        self._store_cache(date, record)
        return record


def fetch_game(date: dt.date, source: str = "fixture", **kwargs) -> GameRecord | None:
    return GameSource(source, **kwargs).fetch_game(date)

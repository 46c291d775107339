"""MUSHRA session backend: randomized trial plans, blind stimulus serving,
and score persistence.

Blinding rules: playback tokens are opaque random identifiers; no response
body, URL, or ordering discloses which slot holds which condition, and the
word "anchor" never appears on the protocol surface. Plans are a pure
function of (master seed, listener id, stimulus index), so the append-only
submission log plus the configuration reproduces the full unblinded export
at any time.
"""

import hashlib
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ManifestError, ValidationError
from .manifest import CONDITIONS, StimulusIndex
from .params import ProcessingMethod
from .scores import CANONICAL_COLUMNS, Cohort

__all__ = [
    "PlannedTrial",
    "SessionPlan",
    "ServiceConfig",
    "ListeningTestService",
    "build_session",
    "create_app",
]

SLOTS_PER_TRIAL = 8
TRIALS_PER_SESSION = 10
TRAINING_TRIALS = 3


@dataclass(frozen=True)
class PlannedTrial:
    trial_id: str
    item_id: str
    method: ProcessingMethod
    slot_conditions: tuple[str, ...]  # condition occupying each slot; server-side only
    slot_tokens: tuple[str, ...]
    reference_token: str
    training: bool


@dataclass
class SessionPlan:
    listener_id: str
    rng_seed: int
    training: list[PlannedTrial]
    sessions: list[list[PlannedTrial]]

    def test_trials(self) -> list[PlannedTrial]:
        return [t for session in self.sessions for t in session]

    def all_trials(self) -> list[PlannedTrial]:
        return self.training + self.test_trials()

    def trial(self, trial_id: str) -> PlannedTrial | None:
        for t in self.all_trials():
            if t.trial_id == trial_id:
                return t
        return None

    def client_view(self) -> dict:
        """The blinded plan sent to the UI: tokens only, no condition data."""
        def view(t: PlannedTrial) -> dict:
            return {
                "trial_id": t.trial_id,
                "training": t.training,
                "reference_token": t.reference_token,
                "slots": [
                    {"slot": i, "token": tok} for i, tok in enumerate(t.slot_tokens)
                ],
            }

        return {
            "listener_id": self.listener_id,
            "training": [view(t) for t in self.training],
            "sessions": [[view(t) for t in s] for s in self.sessions],
            "volume_locked_after_training": True,
            "playback_gain": 1.0,  # fixed server-side; UI must not rescale
        }


def _listener_seed(master_seed: int, listener_id: str) -> np.random.SeedSequence:
    digest = hashlib.sha256(listener_id.encode("utf-8")).digest()
    return np.random.SeedSequence([int(master_seed), int.from_bytes(digest[:8], "big")])


def build_session(
    index: StimulusIndex,
    listener_id: str,
    seed: int,
    training_items: list[str] | None = None,
) -> SessionPlan:
    """Deterministic randomized plan for one listener.

    Every test (item, method) pair appears exactly once; trial order is a
    seeded permutation chunked into sessions; slot order is an independent
    uniform permutation per trial.
    """
    missing = index.missing_files()
    if missing:
        raise ManifestError("incomplete stimulus set: " + ", ".join(missing))

    training_items = list(training_items or [])
    training_pairs = sorted(p for p in index.pairs if p[0] in training_items)
    test_pairs = sorted(p for p in index.pairs if p[0] not in training_items)
    if not test_pairs:
        raise ManifestError("stimulus index holds no test (item, method) pairs")
    if len({item for item, _ in training_pairs}) < TRAINING_TRIALS:
        raise ManifestError(
            f"need at least {TRAINING_TRIALS} training items, "
            f"got {sorted({i for i, _ in training_pairs})}"
        )

    rng = np.random.default_rng(_listener_seed(seed, listener_id))

    def make_trial(trial_id: str, item_id: str, method: ProcessingMethod, training: bool):
        order = rng.permutation(len(CONDITIONS))
        slot_conditions = tuple(CONDITIONS[i] for i in order)
        tokens = tuple(rng.bytes(16).hex() for _ in range(SLOTS_PER_TRIAL))
        reference_token = rng.bytes(16).hex()
        return PlannedTrial(
            trial_id, item_id, method, slot_conditions, tokens, reference_token, training
        )

    # one training trial per item, distinct items first
    picked: list[tuple[str, ProcessingMethod]] = []
    for item in rng.permutation(sorted({i for i, _ in training_pairs})):
        methods = [m for i, m in training_pairs if i == item]
        picked.append((str(item), methods[int(rng.integers(len(methods)))]))
        if len(picked) == TRAINING_TRIALS:
            break
    training = [
        make_trial(f"train{i + 1}", item, method, True)
        for i, (item, method) in enumerate(picked)
    ]

    order = rng.permutation(len(test_pairs))
    shuffled = [test_pairs[i] for i in order]
    trials = [
        make_trial(f"t{i + 1:02d}", item, method, False)
        for i, (item, method) in enumerate(shuffled)
    ]
    sessions = [
        trials[i:i + TRIALS_PER_SESSION] for i in range(0, len(trials), TRIALS_PER_SESSION)
    ]
    return SessionPlan(listener_id, int(seed), training, sessions)


@dataclass
class ServiceConfig:
    stimulus_dir: Path
    results_path: Path
    master_seed: int
    listeners: dict[str, str]  # listener_id -> cohort name
    training_items: list[str] = field(default_factory=list)
    frontend_dir: Path | None = None


class ListeningTestService:
    """In-process state: plans, token registry, idempotent submission store."""

    def __init__(self, config: ServiceConfig, index: StimulusIndex | None = None):
        self.config = config
        self.index = index or StimulusIndex.from_directory(config.stimulus_dir)
        missing = self.index.missing_files()
        if missing:
            raise ManifestError("incomplete stimulus set: " + ", ".join(missing))
        for cohort in config.listeners.values():
            Cohort(cohort)  # validate early
        self._plans: dict[str, SessionPlan] = {}
        self._session_tokens: dict[str, str] = {}
        self._token_owner: dict[str, tuple[str, str, int | None]] = {}
        self._submissions: dict[tuple[str, str], dict] = {}
        self._lock = threading.Lock()
        self._load_store()

    # ------------------------------------------------------------- plans

    def plan_for(self, listener_id: str) -> SessionPlan:
        if listener_id not in self.config.listeners:
            raise KeyError(listener_id)
        plan = self._plans.get(listener_id)
        if plan is None:
            plan = build_session(
                self.index, listener_id, self.config.master_seed, self.config.training_items
            )
            self._plans[listener_id] = plan
            for trial in plan.all_trials():
                for slot, token in enumerate(trial.slot_tokens):
                    self._token_owner[token] = (listener_id, trial.trial_id, slot)
                self._token_owner[trial.reference_token] = (listener_id, trial.trial_id, None)
        return plan

    def open_client_session(self, listener_id: str, token: str | None) -> tuple[dict, str]:
        """Plan view plus the per-browser session token; a second tab without
        the original token is refused."""
        plan = self.plan_for(listener_id)
        with self._lock:
            current = self._session_tokens.get(listener_id)
            if current is None:
                current = hashlib.sha256(
                    f"{listener_id}:{time.time_ns()}".encode()
                ).hexdigest()[:32]
                self._session_tokens[listener_id] = current
            elif token != current:
                raise PermissionError("an active client session already exists for this listener")
        view = plan.client_view()
        view["client_session_token"] = current
        return view, current

    def audio_path(self, token: str, listener_id: str) -> Path:
        owner = self._token_owner.get(token)
        if owner is None:
            raise KeyError(token)
        owner_listener, trial_id, slot = owner
        if owner_listener != listener_id:
            raise PermissionError("token belongs to a different listener")
        trial = self._plans[owner_listener].trial(trial_id)
        condition = "reference" if slot is None else trial.slot_conditions[slot]
        return self.index.condition_path(trial.item_id, trial.method, condition)

    # ------------------------------------------------------------- store

    def _load_store(self) -> None:
        self.quarantined: list[str] = []
        path = Path(self.config.results_path)
        if not path.exists():
            return
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    key = (obj["listener_id"], obj["trial_id"])
                    scores = {int(k): float(v) for k, v in obj["scores"].items()}
                except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                    self.quarantined.append(line)
                    continue
                self._submissions[key] = {**obj, "scores": scores}

    def submit(self, payload: dict) -> str:
        """Validate and persist one submission; returns 'stored' or 'duplicate'."""
        listener_id = payload.get("listener_id", "")
        trial_id = payload.get("trial_id", "")
        if listener_id not in self.config.listeners:
            raise KeyError(f"unknown listener {listener_id!r}")
        plan = self.plan_for(listener_id)
        trial = plan.trial(trial_id)
        if trial is None:
            raise KeyError(f"unknown trial {trial_id!r}")
        if payload.get("client_session_token") != self._session_tokens.get(listener_id):
            raise PermissionError("client session token mismatch")

        raw_scores = payload.get("scores") or {}
        raw_audits = payload.get("auditioned") or {}
        problems = []
        scores: dict[int, float] = {}
        for slot in range(SLOTS_PER_TRIAL):
            value = raw_scores.get(str(slot), raw_scores.get(slot))
            if value is None:
                problems.append(f"slot {slot}: score missing")
                continue
            value = float(value)
            if not 0.0 <= value <= 100.0:
                problems.append(f"slot {slot}: score {value} outside [0, 100]")
                continue
            scores[slot] = value
        for slot in range(SLOTS_PER_TRIAL):
            heard = raw_audits.get(str(slot), raw_audits.get(slot))
            if not heard:
                problems.append(f"slot {slot}: not auditioned")
        if problems:
            raise ValidationError("; ".join(problems))

        key = (listener_id, trial_id)
        with self._lock:
            existing = self._submissions.get(key)
            if existing is not None:
                if existing["scores"] == scores:
                    return "duplicate"
                raise FileExistsError(f"conflicting submission for trial {trial_id}")
            record = {
                "listener_id": listener_id,
                "trial_id": trial_id,
                "scores": scores,
                "auditioned": {str(s): True for s in range(SLOTS_PER_TRIAL)},
                "client_session_token": payload.get("client_session_token"),
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            }
            path = Path(self.config.results_path)
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({**record, "scores": {str(k): v for k, v in scores.items()}},
                                    sort_keys=True) + "\n")
            self._submissions[key] = record
        return "stored"

    # ------------------------------------------------------------- export

    def export_scores(self) -> str:
        """Unblind the store into the canonical subjective score CSV."""
        lines = [",".join(CANONICAL_COLUMNS)]
        for listener_id in sorted(self.config.listeners):
            plan_needed = any(k[0] == listener_id for k in self._submissions)
            if not plan_needed:
                continue
            plan = self.plan_for(listener_id)
            cohort = self.config.listeners[listener_id]
            trial_index = 0
            for s_i, session in enumerate(plan.sessions, start=1):
                for trial in session:
                    trial_index += 1
                    submission = self._submissions.get((listener_id, trial.trial_id))
                    if submission is None:
                        continue
                    for slot in range(SLOTS_PER_TRIAL):
                        condition = trial.slot_conditions[slot]
                        score = submission["scores"][slot]
                        lines.append(
                            f"{listener_id},{cohort},{s_i},{trial_index},"
                            f"{trial.item_id},{trial.method.value},{condition},{score}"
                        )
        return "\n".join(lines) + "\n"


def create_app(service: ListeningTestService):
    """FastAPI wiring around a ListeningTestService."""
    from fastapi import FastAPI, HTTPException, Query, Request
    from fastapi.responses import FileResponse, HTMLResponse, JSONResponse

    app = FastAPI(title="listening-test service", docs_url=None, redoc_url=None)

    @app.get("/health")
    def health():
        return {"status": "ok", "trials": len(service.index.pairs)}

    @app.get("/plan/{listener_id}")
    def get_plan(listener_id: str, token: str | None = Query(default=None)):
        try:
            view, _ = service.open_client_session(listener_id, token)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown listener") from None
        except PermissionError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        except ManifestError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from None
        return JSONResponse(view)

    @app.get("/audio/{token}")
    def get_audio(token: str, listener: str = Query(default="")):
        try:
            path = service.audio_path(token, listener)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown token") from None
        except PermissionError:
            raise HTTPException(status_code=403, detail="token not valid for listener") from None
        return FileResponse(path, media_type="audio/wav", filename="stimulus.wav")

    @app.post("/submit")
    async def submit(request: Request):
        payload = await request.json()
        try:
            status = service.submit(payload)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        except PermissionError as exc:
            raise HTTPException(status_code=403, detail=str(exc)) from None
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        except FileExistsError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        return {"status": status}

    if service.config.frontend_dir is not None:
        frontend = Path(service.config.frontend_dir)

        @app.get("/", response_class=HTMLResponse)
        def index_page():
            return (frontend / "index.html").read_text(encoding="utf-8")

        @app.get("/static/{name:path}")
        def static(name: str):
            target = (frontend / name).resolve()
            if not str(target).startswith(str(frontend.resolve())) or not target.is_file():
                raise HTTPException(status_code=404)
            media = "text/javascript" if target.suffix == ".js" else None
            return FileResponse(target, media_type=media)

    return app

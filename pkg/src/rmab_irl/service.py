"""Session-scoped HTTP service for the steer-train-inspect-approve loop.

Every session is a directory of the package's file formats plus a manifest,
so a session doubles as a reproducibility bundle and survives restarts.
Training runs in a background thread; clients poll the job endpoint.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from . import io
from .core import RmabInstance
from .directives import Directive, generate_expert_set, moved_action_count
from .errors import RmabError
from .learning import TrainConfig, train
from .simulate import (
    RolloutConfig,
    aggregate_stats,
    final_states,
    naive_rewards,
    simulate,
    whatif_report,
)

DEFAULT_DATA_DIR = "./sessions"


class SessionCreate(BaseModel):
    instance: dict
    transitions_csv: str | None = None
    features_csv: str | None = None
    trajectories_csv: str | None = None
    observed: dict | None = None  # {"runs": int, "seed": int} -> simulate under naive rewards


class DirectiveRequest(BaseModel):
    directive: dict
    replicas: int = 5
    seed: int = 0


class TrainRequest(BaseModel):
    expert_id: str
    config: dict = {}


class WhatIfRequest(BaseModel):
    rewards_id: str
    groupby: str | list = "risk"
    config: dict = {}


class ApproveRequest(BaseModel):
    rewards_id: str


class SessionStore:
    """Directory-backed session state with per-session write locks."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def lock(self, sid: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(sid, threading.Lock())

    def path(self, sid: str) -> Path:
        p = self.root / sid
        if not p.is_dir():
            raise HTTPException(status_code=404, detail=f"unknown session {sid}")
        return p

    def manifest(self, sid: str) -> dict:
        doc = json.loads((self.path(sid) / "manifest.json").read_text())
        # a job that was running when the process died can never finish
        stale = any(
            job["status"] == "running" and job["pid"] != os.getpid()
            for job in doc["jobs"].values()
        )
        if stale:
            with self.lock(sid):
                doc = json.loads((self.path(sid) / "manifest.json").read_text())
                for job in doc["jobs"].values():
                    if job["status"] == "running" and job["pid"] != os.getpid():
                        job["status"] = "failed"
                        job["error"] = "process restarted while training"
                self.write_manifest(sid, doc)
        return doc

    def write_manifest(self, sid: str, doc: dict) -> None:
        # atomic replace: concurrent readers never see a half-written file
        path = self.root / sid / "manifest.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(doc, indent=2) + "\n")
        os.replace(tmp, path)

    def load_instance(self, sid: str) -> RmabInstance:
        p = self.path(sid)
        features = p / "features.csv"
        return io.load_instance(
            p / "instance.json",
            p / "transitions.csv",
            features if features.exists() else None,
        )

    def load_observed(self, sid: str):
        p = self.path(sid) / "observed.csv"
        if not p.exists():
            raise HTTPException(status_code=409, detail="session has no observed trajectories")
        return io.load_trajectories_csv(p)

    def load_rewards(self, sid: str, rid: str, instance: RmabInstance) -> np.ndarray:
        if rid == "naive":
            return naive_rewards(instance)
        if rid == "approved":
            approved = self.manifest(sid)["approved"]
            if approved is None:
                raise HTTPException(status_code=404, detail="no approved rewards")
            rid = approved
        p = self.path(sid) / "rewards" / f"{rid}.csv"
        if not p.exists():
            raise HTTPException(status_code=404, detail=f"unknown rewards id {rid}")
        return io.load_rewards_csv(p)


def _new_id() -> str:
    return uuid.uuid4().hex[:12]


def _http_wrap(fn):
    """Translate library errors into HTTP validation errors."""
    try:
        return fn()
    except RmabError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def create_app(data_dir: str | Path = DEFAULT_DATA_DIR) -> FastAPI:
    store = SessionStore(Path(data_dir))
    app = FastAPI(title="rmab-irl service")
    app.state.store = store

    @app.post("/sessions")
    def create_session(req: SessionCreate):
        sid = _new_id()
        p = store.root / sid
        p.mkdir()
        (p / "instance.json").write_text(json.dumps(req.instance, indent=2) + "\n")
        if req.transitions_csv is not None:
            (p / "transitions.csv").write_text(req.transitions_csv)
        if req.features_csv is not None:
            (p / "features.csv").write_text(req.features_csv)

        def build():
            if req.transitions_csv is None:
                # materialise seed-synthesised transitions and features so the
                # session directory is a complete bundle
                instance = io.load_instance(p / "instance.json", None,
                                            p / "features.csv" if req.features_csv else None)
                io.save_transitions_csv(instance.transitions, p / "transitions.csv")
                if instance.features is not None and req.features_csv is None:
                    io.save_features_csv(instance.features, p / "features.csv")
            else:
                instance = store.load_instance(sid)
            if req.trajectories_csv is not None:
                (p / "observed.csv").write_text(req.trajectories_csv)
                for traj in io.load_trajectories_csv(p / "observed.csv"):
                    traj.check_feasible(instance)
            elif req.observed is not None:
                cfg = RolloutConfig(
                    horizon=instance.horizon,
                    runs=int(req.observed.get("runs", 1)),
                    seed=int(req.observed.get("seed", 0)),
                )
                io.save_trajectories_csv(
                    simulate(instance, naive_rewards(instance), cfg), p / "observed.csv"
                )
            return instance

        try:
            _http_wrap(build)
        except HTTPException:
            import shutil

            shutil.rmtree(p, ignore_errors=True)
            raise
        (p / "experts").mkdir()
        (p / "rewards").mkdir()
        (p / "reports").mkdir()
        store.write_manifest(
            sid, {"id": sid, "directives": [], "jobs": {}, "rewards": {}, "approved": None}
        )
        return {"session_id": sid}

    @app.get("/sessions")
    def list_sessions():
        return {"sessions": sorted(d.name for d in store.root.iterdir() if d.is_dir())}

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        return store.manifest(sid)

    @app.get("/sessions/{sid}/stats")
    def stats(sid: str, groupby: str = "risk"):
        instance = store.load_instance(sid)
        observed = store.load_observed(sid)
        return _http_wrap(lambda: aggregate_stats(instance, observed, groupby))

    @app.post("/sessions/{sid}/directives")
    def post_directive(sid: str, req: DirectiveRequest):
        instance = store.load_instance(sid)
        observed = store.load_observed(sid)

        def run():
            directive = Directive(
                source=req.directive["source"],
                target=req.directive["target"],
                max_moves_per_timestep=req.directive.get("cap"),
            )
            directive.validate(instance.features, instance.n_states)
            expert = generate_expert_set(
                observed, directive, instance.features, instance.transitions,
                replicas=req.replicas, seed=req.seed,
            )
            eid = _new_id()
            io.save_trajectories_csv(expert, store.path(sid) / "experts" / f"{eid}.csv")
            groupby = "risk" if instance.features is not None else "state"
            before = aggregate_stats(instance, observed, groupby)
            after = aggregate_stats(instance, expert, groupby)
            # mean moved actions per edited trajectory
            moved = sum(
                moved_action_count(observed[j // req.replicas], expert[j])
                for j in range(len(expert))
            ) / len(expert)
            with store.lock(sid):
                doc = store.manifest(sid)
                doc["directives"].append(
                    {"expert_id": eid, "directive": req.directive,
                     "replicas": req.replicas, "seed": req.seed}
                )
                store.write_manifest(sid, doc)
            return {
                "expert_id": eid,
                "preview": {
                    "groupby": before["groupby"],
                    "categories": before["categories"],
                    "actions_before": before["actions"],
                    "actions_after": after["actions"],
                    "moved_actions": moved,
                },
            }

        return _http_wrap(run)

    @app.post("/sessions/{sid}/train")
    def post_train(sid: str, req: TrainRequest):
        instance = store.load_instance(sid)
        expert_path = store.path(sid) / "experts" / f"{req.expert_id}.csv"
        if not expert_path.exists():
            raise HTTPException(status_code=404, detail=f"unknown expert set {req.expert_id}")
        cfg = _http_wrap(lambda: TrainConfig(**req.config))

        with store.lock(sid):
            doc = store.manifest(sid)
            if any(job["status"] == "running" for job in doc["jobs"].values()):
                raise HTTPException(status_code=409, detail="a training job is already running")
            job_id = _new_id()
            doc["jobs"][job_id] = {
                "status": "running",
                "expert_id": req.expert_id,
                "config": req.config,
                "pid": os.getpid(),
                "rewards_id": None,
                "trace": [],
                "error": None,
            }
            store.write_manifest(sid, doc)

        def work():
            try:
                expert = io.load_trajectories_csv(expert_path)
                rewards, trace = train(instance, expert, cfg)
                rid = _new_id()
                io.save_rewards_csv(rewards, store.path(sid) / "rewards" / f"{rid}.csv")
                with store.lock(sid):
                    doc = store.manifest(sid)
                    doc["jobs"][job_id].update(status="done", rewards_id=rid, trace=trace)
                    doc["rewards"][rid] = {"job_id": job_id, "expert_id": req.expert_id}
                    store.write_manifest(sid, doc)
            except Exception as exc:  # surface the failure through the job status
                with store.lock(sid):
                    doc = store.manifest(sid)
                    doc["jobs"][job_id].update(status="failed", error=str(exc))
                    store.write_manifest(sid, doc)

        threading.Thread(target=work, daemon=True).start()
        return {"job_id": job_id}

    @app.get("/sessions/{sid}/jobs/{job_id}")
    def get_job(sid: str, job_id: str):
        doc = store.manifest(sid)
        if job_id not in doc["jobs"]:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id}")
        return doc["jobs"][job_id]

    @app.post("/sessions/{sid}/whatif")
    def post_whatif(sid: str, req: WhatIfRequest):
        instance = store.load_instance(sid)
        candidate = store.load_rewards(sid, req.rewards_id, instance)
        baseline = naive_rewards(instance)
        observed = store.load_observed(sid)

        def run():
            cfg_args = dict(req.config)
            cfg_args.setdefault("horizon", instance.horizon)
            cfg_args.setdefault("runs", 60)
            cfg_args.setdefault("policy_mode", "soft")
            cfg = RolloutConfig(initial_states=final_states(observed[0]), **cfg_args)
            report = whatif_report(instance, baseline, candidate, req.groupby, cfg)
            doc = report.to_dict()
            doc["rewards_id"] = req.rewards_id
            wid = _new_id()
            (store.path(sid) / "reports" / f"{wid}.json").write_text(
                json.dumps(doc, indent=2) + "\n"
            )
            doc["report_id"] = wid
            return doc

        return _http_wrap(run)

    @app.post("/sessions/{sid}/approve")
    def approve(sid: str, req: ApproveRequest):
        with store.lock(sid):
            doc = store.manifest(sid)
            if req.rewards_id not in doc["rewards"]:
                raise HTTPException(status_code=404, detail=f"unknown rewards id {req.rewards_id}")
            doc["approved"] = req.rewards_id
            store.write_manifest(sid, doc)
        return {"approved": req.rewards_id}

    @app.get("/sessions/{sid}/rewards.csv", response_class=PlainTextResponse)
    def export_rewards(sid: str, id: str = "approved"):
        rid = id
        if rid == "approved":
            approved = store.manifest(sid)["approved"]
            if approved is None:
                raise HTTPException(status_code=404, detail="no approved rewards")
            rid = approved
        p = store.path(sid) / "rewards" / f"{rid}.csv"
        if not p.exists():
            raise HTTPException(status_code=404, detail=f"unknown rewards id {rid}")
        return p.read_text()

    return app


def main() -> None:
    import uvicorn

    port = int(os.environ.get("RMAB_IRL_PORT", "8000"))
    data_dir = os.environ.get("RMAB_IRL_DATA_DIR", DEFAULT_DATA_DIR)
    uvicorn.run(create_app(data_dir), host="127.0.0.1", port=port)


if __name__ == "__main__":
    main()

"""Agent loops: planner/executor runs plus the ReAct and Reflexion baselines.

One trajectory is strictly sequential and owns its ToolEnvironment and
variable store. Tool errors never escape a loop; they come back as
observation text. Backend failures terminate the trajectory with a
dedicated reason.

Malformed completions get one re-sample; a second failure burns the step
(executor) or the search slot (planner) so every loop stays bounded. The
total completion count is asserted at trajectory end against the
structural worst case: every logical turn sampled at most twice.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from rpreact import prompts, protocol
from rpreact.context import (
    compose_executor_notice,
    ingest_tool_output,
    tokenize_for_threshold,
)
from rpreact.llm_backend import Backend, BackendError, CompletionRequest
from rpreact.protocol import (
    END_SEARCH_QUERY,
    FINISH_CLOSE,
    MalformedOutput,
    Verdict,
)
from rpreact.toolkit import ToolEnvironment, dispatch

RP_REACT = "rp-react"
REACT = "react"
REFLEXION = "reflexion"
APPROACHES = (RP_REACT, REACT, REFLEXION)

FINISHED = "finished"
STEP_LIMIT = "step_limit"
SEARCH_LIMIT = "search_limit"
BACKEND_ERROR = "backend_error"

RPA_STOPS = [END_SEARCH_QUERY, FINISH_CLOSE]
PEA_STOPS = ["Observation:"]

# One re-sample per malformed turn, so any logical step costs at most
# two completions.
MAX_SAMPLES_PER_TURN = 2


class NoPeaConfigured(Exception):
    pass


@dataclass
class AgentConfig:
    approach: str = RP_REACT
    rpa_search_limit: int = 10
    pea_step_limit: int = 10
    react_step_limit: int = 20
    max_reflections: int = 3
    temperature: float = 0.6
    top_p: float = 1.0
    context_threshold_t: int = 100
    max_completion_tokens: int = 4096

    def __post_init__(self) -> None:
        if self.approach not in APPROACHES:
            raise ValueError(f"unknown approach: {self.approach!r}")
        for name in ("rpa_search_limit", "pea_step_limit", "react_step_limit", "context_threshold_t"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.max_reflections < 0:
            raise ValueError("max_reflections must be >= 0")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")

    @property
    def worst_case_pea_steps(self) -> int:
        return self.rpa_search_limit * self.pea_step_limit

    def max_backend_calls(self) -> int:
        # Planner turns (one per search slot plus the closing turn) and
        # every possible executor step, each re-sampled at most once.
        logical_turns = self.rpa_search_limit * (1 + self.pea_step_limit) + 1
        return logical_turns * MAX_SAMPLES_PER_TURN


@dataclass
class PeaRegistration:
    tools: frozenset[str] = frozenset(protocol.ACTION_NAMES)
    domains: frozenset[str] = frozenset()
    examples: str | None = None


@dataclass
class StepRecord:
    role: str
    turn_index: int
    prompt_tokens: int
    completion_text: str
    action: str | None
    observation: str | None
    ts: float = field(default_factory=time.time)


@dataclass
class Trajectory:
    question_id: str
    approach: str
    steps: list[StepRecord] = field(default_factory=list)
    termination: str | None = None
    final_answer: str | None = None
    rpa_queries: int = 0
    pea_steps_total: int = 0
    backend_calls: int = 0
    trials_run: int = 1
    reflections_used: int = 0
    error: str | None = None


@dataclass
class ExecutionResult:
    """What one executor invocation hands back to the planner."""

    content: str
    succeeded: bool
    steps_used: int
    action_names: list[str] = field(default_factory=list)
    last_observation: str = ""


def route_pea(subquery: str, registry: dict[str, PeaRegistration], domain: str | None = None) -> str:
    """Pick the executor for a sub-query.

    A single-entry registry always wins (the tested configuration).
    Otherwise the first registration declaring the question's domain is
    chosen, in registry order.
    """
    if not registry:
        raise NoPeaConfigured("registry is empty")
    if len(registry) == 1:
        return next(iter(registry))
    for pea_id, registration in registry.items():
        if domain is not None and domain in registration.domains:
            return pea_id
    raise NoPeaConfigured(f"no executor declared for domain {domain!r}")


class _Session:
    """Mutable per-trajectory state shared by the loop helpers."""

    def __init__(
        self,
        qid: str,
        config: AgentConfig,
        environment: ToolEnvironment,
        backend: Backend,
        domain: str | None,
    ) -> None:
        self.config = config
        self.environment = environment
        self.backend = backend
        self.domain = domain
        self.trajectory = Trajectory(question_id=qid, approach=config.approach)
        self._turns: dict[str, int] = {}

    def complete(self, role: str, prompt: str, stops: list[str]) -> str:
        request = CompletionRequest(
            messages=[{"role": "user", "content": prompt}],
            role=role,
            temperature=self.config.temperature,
            top_p=self.config.top_p,
            stop_sequences=list(stops),
            max_completion_tokens=self.config.max_completion_tokens,
        )
        self.trajectory.backend_calls += 1
        return self.backend.complete(request)

    def record(
        self,
        role: str,
        prompt: str,
        completion: str,
        action: str | None,
        observation: str | None,
    ) -> StepRecord:
        turn = self._turns.get(role, 0)
        self._turns[role] = turn + 1
        step = StepRecord(
            role=role,
            turn_index=turn,
            prompt_tokens=len(tokenize_for_threshold(prompt)),
            completion_text=completion,
            action=action,
            observation=observation,
        )
        self.trajectory.steps.append(step)
        return step


def _restore_rpa_stops(text: str) -> str:
    """Re-append the stop token the endpoint swallowed, for transcript fidelity."""
    if protocol.BEGIN_SEARCH_QUERY in text and END_SEARCH_QUERY not in text:
        return text + END_SEARCH_QUERY
    if protocol.FINISH_OPEN in text and FINISH_CLOSE not in text:
        return text + FINISH_CLOSE
    return text


def _observation_text(raw: str, subquery: str, session: _Session) -> str:
    obs = ingest_tool_output(raw, session.config.context_threshold_t, session.environment.store)
    if obs.truncated:
        return compose_executor_notice(obs, subquery)
    return obs.preview


def _digest_line(subquery: str, result: ExecutionResult, threshold: int) -> str:
    names = ", ".join(result.action_names) if result.action_names else "none"
    final = result.last_observation or result.content
    final = " ".join(tokenize_for_threshold(final)[:threshold])
    return f"- {subquery} | actions: {names} | result: {final}"


def run_pea(
    subquery: str,
    prev_actions: str,
    config: AgentConfig,
    environment: ToolEnvironment,
    backend: Backend,
    session: _Session | None = None,
    examples: str | None = None,
) -> ExecutionResult:
    """Resolve one sub-query with a ReAct loop over the tools.

    Runs at most ``pea_step_limit`` steps; without a Finish action the
    result is a failure whose content is empty (the planner prompt defines
    the recovery semantics for an empty result block).
    """
    if session is None:
        session = _Session("adhoc", config, environment, backend, None)
    if examples is None:
        examples = prompts.load_examples("pea")
    scratchpad = ""
    action_names: list[str] = []
    last_observation = ""
    steps_used = 0
    for _ in range(config.pea_step_limit):
        prompt = prompts.render_pea(subquery, scratchpad, examples, prev_actions)
        completion, turn = _sample_pea(session, prompt)
        steps_used += 1
        session.trajectory.pea_steps_total += 1
        if turn is None:
            observation = "Error: could not parse a valid action from the output."
            scratchpad += f"\n{completion.strip()}\nObservation: {observation}\n"
            session.record("pea", prompt, completion, None, observation)
            last_observation = observation
            continue
        rendered = protocol.render_action(turn.action)
        action_names.append(turn.action.kind)
        if turn.action.kind == protocol.FINISH:
            session.record("pea", prompt, completion, rendered, None)
            return ExecutionResult(
                content=turn.action.payload.strip(),
                succeeded=True,
                steps_used=steps_used,
                action_names=action_names,
                last_observation=last_observation,
            )
        raw = dispatch(turn.action, environment)
        observation = _observation_text(raw, subquery, session)
        scratchpad += (
            f"\nThought: {turn.thought}\nAction: {rendered}\nObservation: {observation}\n"
        )
        session.record("pea", prompt, completion, rendered, observation)
        last_observation = observation
    return ExecutionResult(
        content="",
        succeeded=False,
        steps_used=steps_used,
        action_names=action_names,
        last_observation=last_observation,
    )


def _sample_pea(session: _Session, prompt: str):
    completion = ""
    for _ in range(MAX_SAMPLES_PER_TURN):
        completion = session.complete("pea", prompt, PEA_STOPS)
        try:
            return completion, protocol.parse_pea_output(completion)
        except MalformedOutput:
            continue
    return completion, None


def run_rp_react(
    question: str,
    config: AgentConfig,
    environment: ToolEnvironment,
    backend: Backend,
    qid: str = "q0",
    domain: str | None = None,
    registry: dict[str, PeaRegistration] | None = None,
) -> Trajectory:
    """Planner loop delegating sub-queries to the executor.

    Failure recovery is emergent: a failed execution comes back as an
    empty result block and the planner rewrites its query, exactly as its
    prompt instructs. No special branch exists in code.
    """
    session = _Session(qid, config, environment, backend, domain)
    trajectory = session.trajectory
    rpa_examples = prompts.load_examples("rpa", domain)
    registry = registry or {"pea": PeaRegistration()}
    scratchpad = ""
    digest_lines: list[str] = []
    # Search slots bound the loop. Executed queries and hard-failed turns
    # both consume one; after the last slot the planner still gets one
    # closing turn, which may finish but not search again.
    slots_used = 0
    try:
        while True:
            prompt = prompts.render_rpa(
                question, scratchpad, rpa_examples, config.rpa_search_limit
            )
            completion, turn = _sample_rpa(session, prompt)
            if turn is None:
                session.record(
                    "rpa", prompt, completion, None, "Error: no directive in planner output"
                )
                slots_used += 1
                if slots_used >= config.rpa_search_limit:
                    trajectory.termination = SEARCH_LIMIT
                    break
                continue
            if turn.finish is not None:
                session.record("rpa", prompt, completion, protocol.FINISH, None)
                trajectory.final_answer = turn.finish
                trajectory.termination = FINISHED
                break
            if slots_used >= config.rpa_search_limit:
                session.record("rpa", prompt, completion, turn.query, None)
                trajectory.termination = SEARCH_LIMIT
                break
            slots_used += 1
            trajectory.rpa_queries += 1
            pea_id = route_pea(turn.query, registry, domain)
            pea_examples = registry[pea_id].examples or prompts.load_examples("pea")
            result = run_pea(
                turn.query,
                "\n".join(digest_lines),
                config,
                environment,
                backend,
                session=session,
                examples=pea_examples,
            )
            digest_lines.append(_digest_line(turn.query, result, config.context_threshold_t))
            result_block = protocol.render_search_result(result.content)
            scratchpad += f"\n{completion.strip()}\n{result_block}\n"
            session.record("rpa", prompt, completion, turn.query, result.content)
    except BackendError as exc:
        trajectory.termination = BACKEND_ERROR
        trajectory.error = str(exc)
    _check_budget(trajectory, config)
    return trajectory


def _sample_rpa(session: _Session, prompt: str):
    completion = ""
    for _ in range(MAX_SAMPLES_PER_TURN):
        completion = _restore_rpa_stops(session.complete("rpa", prompt, RPA_STOPS))
        try:
            return completion, protocol.parse_rpa_output(completion)
        except MalformedOutput:
            continue
    return completion, None


def _check_budget(trajectory: Trajectory, config: AgentConfig) -> None:
    assert trajectory.backend_calls <= config.max_backend_calls(), (
        f"backend calls {trajectory.backend_calls} exceed budget {config.max_backend_calls()}"
    )
    assert trajectory.pea_steps_total <= config.worst_case_pea_steps
    assert trajectory.rpa_queries <= config.rpa_search_limit
    assert (trajectory.termination == FINISHED) == (trajectory.final_answer is not None)


def _react_trial(
    question: str,
    config: AgentConfig,
    session: _Session,
    examples: str,
    scratchpad_prefix: str = "",
) -> tuple[str | None, str, int]:
    """Shared monolithic loop; returns (answer, transcript, steps)."""
    scratchpad = scratchpad_prefix
    steps = 0
    for _ in range(config.react_step_limit):
        prompt = prompts.render_react(question, scratchpad, examples)
        completion, turn = _sample_react(session, prompt)
        steps += 1
        if turn is None:
            observation = "Error: could not parse a valid action from the output."
            scratchpad += f"\n{completion.strip()}\nObservation: {observation}\n"
            session.record("react", prompt, completion, None, observation)
            continue
        rendered = protocol.render_action(turn.action)
        if turn.action.kind == protocol.FINISH:
            session.record("react", prompt, completion, rendered, None)
            return turn.action.payload.strip(), scratchpad + f"\n{completion.strip()}\n", steps
        raw = dispatch(turn.action, session.environment)
        observation = _observation_text(raw, question, session)
        scratchpad += (
            f"\nThought: {turn.thought}\nAction: {rendered}\nObservation: {observation}\n"
        )
        session.record("react", prompt, completion, rendered, observation)
    return None, scratchpad, steps


def _sample_react(session: _Session, prompt: str):
    completion = ""
    for _ in range(MAX_SAMPLES_PER_TURN):
        completion = session.complete("react", prompt, PEA_STOPS)
        try:
            return completion, protocol.parse_pea_output(completion)
        except MalformedOutput:
            continue
    return completion, None


def run_react(
    question: str,
    config: AgentConfig,
    environment: ToolEnvironment,
    backend: Backend,
    qid: str = "q0",
    domain: str | None = None,
) -> Trajectory:
    session = _Session(qid, config, environment, backend, domain)
    trajectory = session.trajectory
    examples = prompts.react_examples(domain)
    try:
        answer, _, _ = _react_trial(question, config, session, examples)
        if answer is not None:
            trajectory.final_answer = answer
            trajectory.termination = FINISHED
        else:
            trajectory.termination = STEP_LIMIT
    except BackendError as exc:
        trajectory.termination = BACKEND_ERROR
        trajectory.error = str(exc)
    assert (trajectory.termination == FINISHED) == (trajectory.final_answer is not None)
    return trajectory


_REFLECTIONS_HEADER = "\nPrevious reflections from earlier attempts on this question:\n"


def run_reflexion(
    question: str,
    config: AgentConfig,
    environment: ToolEnvironment,
    backend: Backend,
    qid: str = "q0",
    domain: str | None = None,
) -> Trajectory:
    """ReAct trials with an evaluator verdict and self-refine retries.

    At most 1 + max_reflections trials. The evaluator is consulted only
    while a retry is still possible; reflections thread into the next
    trial's prompt and the environment is reset between trials. The
    returned trajectory keeps the last trial's outcome.
    """
    session = _Session(qid, config, environment, backend, domain)
    trajectory = session.trajectory
    examples = prompts.react_examples(domain)
    reflections: list[str] = []
    answer: str | None = None
    try:
        for attempt in range(1 + config.max_reflections):
            if attempt > 0:
                environment.reset()
            trajectory.trials_run = attempt + 1
            prefix = ""
            if reflections:
                prefix = _REFLECTIONS_HEADER + "\n".join(f"- {r}" for r in reflections) + "\n"
            answer, transcript, _ = _react_trial(question, config, session, examples, prefix)
            if attempt == config.max_reflections:
                break
            eval_prompt = prompts.render_evaluator(question, transcript)
            eval_completion = session.complete("evaluator", eval_prompt, [])
            verdict = protocol.parse_verdict(eval_completion)
            session.record(
                "evaluator", eval_prompt, eval_completion, None, verdict.value
            )
            if verdict is Verdict.SUCCESS:
                break
            refine_prompt = prompts.render_refine(question, transcript, "\n".join(reflections))
            refine_completion = session.complete("refine", refine_prompt, [])
            reflection = _strip_think(refine_completion).strip()
            reflections.append(reflection)
            trajectory.reflections_used = len(reflections)
            session.record("refine", refine_prompt, refine_completion, None, reflection)
    except BackendError as exc:
        trajectory.termination = BACKEND_ERROR
        trajectory.error = str(exc)
        return trajectory
    if answer is not None:
        trajectory.final_answer = answer
        trajectory.termination = FINISHED
    else:
        trajectory.termination = STEP_LIMIT
    assert trajectory.trials_run <= 1 + config.max_reflections
    return trajectory


def _strip_think(text: str) -> str:
    out = []
    pos = 0
    while True:
        i = text.find("<think>", pos)
        if i < 0:
            out.append(text[pos:])
            break
        j = text.find("</think>", i)
        if j < 0:
            out.append(text[pos:i])
            break
        out.append(text[pos:i])
        pos = j + len("</think>")
    return "".join(out)


def run_approach(
    question: str,
    config: AgentConfig,
    environment: ToolEnvironment,
    backend: Backend,
    qid: str = "q0",
    domain: str | None = None,
) -> Trajectory:
    if config.approach == RP_REACT:
        return run_rp_react(question, config, environment, backend, qid=qid, domain=domain)
    if config.approach == REACT:
        return run_react(question, config, environment, backend, qid=qid, domain=domain)
    return run_reflexion(question, config, environment, backend, qid=qid, domain=domain)


def trajectory_step_dicts(trajectory: Trajectory) -> list[dict]:
    """One JSON-ready dict per step, in the trajectory-log schema."""
    return [
        {
            "qid": trajectory.question_id,
            "approach": trajectory.approach,
            "role": step.role,
            "turn_index": step.turn_index,
            "prompt_tokens": step.prompt_tokens,
            "completion_text": step.completion_text,
            "action": step.action,
            "observation": step.observation,
            "termination": trajectory.termination,
            "ts": step.ts,
        }
        for step in trajectory.steps
    ]

from pydantic import BaseModel, Field
from typing import List, Dict, Optional, Literal
from datetime import datetime


class StageRecord(BaseModel):
    """One stage of an iteration"""
    record: Literal["stage"] = "stage"
    operator: str = Field(..., description="Operator label, e.g. GRbar[point]")
    ordinal: str = Field(..., description="Stage ordinal (12, w, w+1, w*2)")
    restriction: str = Field(..., description="Restriction rendered as {C,D} | {C}")


class VerdictRecord(BaseModel):
    """How an iteration ended"""
    record: Literal["verdict"] = "verdict"
    operator: str = Field(..., description="Operator label")
    kind: Literal["fixpoint", "cycle", "cap"] = Field(..., description="Verdict kind")
    ordinal: str = Field(..., description="Closure ordinal, cycle start, or last computed stage")
    period: Optional[str] = Field(None, description="Cycle period")
    text: str = Field(..., description="Rendered verdict line")


class OutcomeRecord(BaseModel):
    """A distinct outcome of the sampled relaxations of an operator"""
    record: Literal["outcome"] = "outcome"
    operator: str = Field(..., description="Operator label")
    restriction: str = Field(..., description="Outcome restriction")
    count: int = Field(..., description="Trials reaching this outcome")
    closures: List[str] = Field(default_factory=list, description="Closure ordinals observed")
    omega_outcome: bool = Field(..., description="Every trial reached it by stage w")


class TrialSummaryRecord(BaseModel):
    """Summary of an order-independence experiment"""
    record: Literal["trials"] = "trials"
    operator: str = Field(..., description="Operator label")
    trials: int = Field(..., description="Number of sampled relaxations")
    seed: int = Field(..., description="Experiment seed")
    distinct: int = Field(..., description="Distinct outcomes")
    no_outcome: int = Field(..., description="Trials ending without a fixpoint")
    singleton: bool = Field(..., description="Exactly one outcome and no trial without one")
    base_outcome: Optional[str] = Field(None, description="Outcome of the operator itself")
    base_closure: Optional[str] = Field(None, description="Closure ordinal of the operator itself")


class ComparisonRecord(BaseModel):
    """Lockstep comparison of several operators"""
    record: Literal["comparison"] = "comparison"
    operators: List[str] = Field(..., description="Operator labels in request order")
    coincide: bool = Field(..., description="All stages agree up to the verdict")
    ordinal: str = Field(..., description="Divergence ordinal, or last compared stage")
    verdict: Optional[str] = Field(None, description="Common verdict when the operators coincide")
    stages: Dict[str, str] = Field(default_factory=dict, description="Per operator stage at the divergence")


class PropertyRecord(BaseModel):
    """A property predicate evaluated at one stage (or once for the game)"""
    record: Literal["property"] = "property"
    property: Literal["B", "C", "D", "E", "MD"] = Field(..., description="Property name")
    ordinal: Optional[str] = Field(None, description="Stage ordinal; absent for game-level properties")
    holds: bool = Field(..., description="Whether the property holds")
    violation: Optional[str] = Field(None, description="Player and strategy violating the property")
    witnesses: Dict[str, str] = Field(default_factory=dict, description="Dominated strategy -> witness dominator")


class CheckRecord(BaseModel):
    """A validation step of an example replay"""
    record: Literal["check"] = "check"
    name: str = Field(..., description="Check name")
    passed: bool = Field(..., description="Whether the check passed")
    detail: str = Field("", description="Details")


class RelaxationRecord(BaseModel):
    """A scripted relaxation replayed alongside an example"""
    record: Literal["relaxation"] = "relaxation"
    name: str = Field(..., description="Relaxation script name")
    verdict: str = Field(..., description="Rendered verdict of the relaxation")
    outcome: Optional[str] = Field(None, description="Outcome of the relaxation")
    valid: bool = Field(..., description="Whether the relaxation conditions held along the trace")


class ExampleRecord(BaseModel):
    """Catalogue entry of a replayable example"""
    record: Literal["example"] = "example"
    name: str = Field(..., description="Example name")
    title: str = Field(..., description="Short description")
    operator: str = Field(..., description="Operator label")
    player_count: int = Field(..., description="Number of players")
    expected: str = Field(..., description="Expected verdict")
    expected_closure: Optional[str] = Field(None, description="Expected closure ordinal")


class GameRequest(BaseModel):
    """Common fields of requests that carry a game file"""
    game: str = Field(..., description="Game file text")
    beliefs: Optional[Literal["point", "correlated", "independent"]] = Field(
        None, description="Belief structure for rationalizability operators"
    )
    cap: Optional[str] = Field(None, description="Ordinal cap (default from configuration)")


class EliminateRequest(GameRequest):
    """Request model for iterating one operator"""
    operator: str = Field(..., description="Operator token, e.g. gsbar")


class CompareRequest(GameRequest):
    """Request model for comparing operators stage by stage"""
    operators: List[str] = Field(..., min_length=1, description="Operator tokens")


class OrderIndependenceRequest(GameRequest):
    """Request model for an order-independence experiment"""
    operator: str = Field(..., description="Contracting operator token")
    trials: Optional[int] = Field(None, ge=0, le=10000, description="Number of sampled relaxations")
    seed: Optional[int] = Field(None, ge=0, description="Experiment seed")


class CheckRequest(GameRequest):
    """Request model for evaluating properties along a trace"""
    operator: str = Field(..., description="Operator token")
    properties: List[Literal["B", "C", "D", "E", "MD"]] = Field(
        default_factory=lambda: ["B", "C", "D", "E", "MD"], description="Properties to evaluate"
    )


class EliminateResponse(BaseModel):
    """Response model for an iteration"""
    game: str = Field(..., description="Game name")
    operator: str = Field(..., description="Operator label")
    stages: List[StageRecord] = Field(..., description="Stages up to the verdict")
    verdict: VerdictRecord = Field(..., description="Verdict")
    closure: Optional[str] = Field(None, description="Closure ordinal")
    outcome: Optional[str] = Field(None, description="Outcome restriction")


class CompareResponse(BaseModel):
    """Response model for an operator comparison"""
    game: str = Field(..., description="Game name")
    comparison: ComparisonRecord = Field(..., description="Comparison result")
    lines: List[str] = Field(..., description="Rendered report")


class OrderIndependenceResponse(BaseModel):
    """Response model for an order-independence experiment"""
    game: str = Field(..., description="Game name")
    summary: TrialSummaryRecord = Field(..., description="Experiment summary")
    outcomes: List[OutcomeRecord] = Field(..., description="Distinct outcomes in discovery order")


class CheckResponse(BaseModel):
    """Response model for property checks"""
    game: str = Field(..., description="Game name")
    operator: str = Field(..., description="Operator label")
    properties: List[PropertyRecord] = Field(..., description="Property evaluations")
    passed: bool = Field(..., description="Every evaluated property holds")


class ReplayResponse(BaseModel):
    """Response model for an example replay"""
    example: str = Field(..., description="Example name")
    validated: bool = Field(..., description="Every check passed")
    stages: List[StageRecord] = Field(..., description="Stages up to the verdict")
    verdict: VerdictRecord = Field(..., description="Computed verdict")
    expected: str = Field(..., description="Expected verdict")
    closure: Optional[str] = Field(None, description="Computed closure ordinal")
    checks: List[CheckRecord] = Field(..., description="Validation steps")
    relaxations: List[RelaxationRecord] = Field(default_factory=list, description="Scripted relaxations")


class OperatorInfo(BaseModel):
    """An available elimination operator"""
    token: str = Field(..., description="CLI token")
    name: str = Field(..., description="Operator name")
    contracting: bool = Field(..., description="Intersected with its argument")
    monotonic: bool = Field(..., description="Monotonic on every game")
    needs_beliefs: bool = Field(..., description="Takes a belief structure")


class ErrorResponse(BaseModel):
    """Error response model"""
    error: str = Field(..., description="Error message")
    details: Optional[str] = Field(None, description="Additional error details")
    timestamp: datetime = Field(default_factory=datetime.utcnow, description="Error timestamp")


class HealthResponse(BaseModel):
    """Health check response model"""
    status: str = Field(..., description="Service status")
    timestamp: datetime = Field(default_factory=datetime.utcnow, description="Health check timestamp")
    version: str = Field(default="1.0.0", description="Service version")
    operators: int = Field(..., description="Number of available operators")
    examples: int = Field(..., description="Number of replayable examples")
    default_cap: str = Field(..., description="Default ordinal cap")
    error: Optional[str] = Field(None, description="Error message if unhealthy")

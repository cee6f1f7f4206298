from fastapi import APIRouter, HTTPException, Query, status

from .config import _parse_floats
from .constants import constant_set
from .harness import bound_checks
from .operators import evaluate_request
from .schemas import BoundReport, ConstantSet, OperatorEval, OpEvalRequest

router = APIRouter()


@router.get("/constants", response_model=ConstantSet)
async def get_constants(dim: int = Query(1, ge=1), s: float | None = Query(None, gt=0.0, lt=1.0)):
    try:
        return constant_set(dim, s)
    except ValueError as exc:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(exc)) from exc


@router.post("/opeval", response_model=OperatorEval)
def post_opeval(payload: OpEvalRequest):
    try:
        return evaluate_request(payload)
    except ValueError as exc:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(exc)) from exc


@router.get("/bounds", response_model=BoundReport)
def get_bounds(
    dim: int = Query(1, ge=1),
    s: str = Query("0.25,0.1,0.05"),
    galerkin: bool = False,
    n: int = Query(128, ge=2, le=1024),
):
    grid = _parse_floats(s)
    if not grid:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail="s must be a comma-separated list of numbers")
    try:
        return bound_checks(dim, grid, n=n, galerkin=galerkin, refine=False)
    except ValueError as exc:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(exc)) from exc

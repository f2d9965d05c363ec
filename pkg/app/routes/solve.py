from fastapi import APIRouter, HTTPException, status
from pydantic import ValidationError
import asyncio
import logging

from app.models.request import SolveRequest
from app.models.response import SolveResponse
from app.services.exceptions import InstanceParseError, InvariantViolation
from app.services.instance_service import solution_to_json
from app.services.master_service import MasterConfig, solve

# Configure logging
logger = logging.getLogger(__name__)

# Create router
router = APIRouter()


@router.post("/solve", response_model=SolveResponse)
async def solve_endpoint(request: SolveRequest):
    """
    Solve an instance and return the bounds and a certified packing.
    """
    try:
        inst = request.to_instance()
        cfg = MasterConfig.from_settings(
            time_limit=request.time_limit,
            alpha=request.alpha,
            beta=request.beta,
            gamma=request.gamma,
            tilde_n=request.tilde_n,
            eta=request.eta,
            seed=request.seed,
            u0=request.u0,
        )
        logger.info(f"📦 Solve request: n={inst.n} bin={inst.W}x{inst.H} time_limit={cfg.time_limit}")

        # The search is CPU bound; keep the event loop free
        loop = asyncio.get_event_loop()
        sol = await loop.run_in_executor(None, lambda: solve(inst, cfg))

        logger.info(f"✅ Solve finished: {sol.status.value} L={sol.lower_bound} U={sol.upper_bound}")
        return SolveResponse(**solution_to_json(sol))

    except HTTPException:
        raise
    except (InstanceParseError, ValidationError, ValueError) as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    except InvariantViolation as e:
        logger.error(f"❌ Solution rejected by verification: {str(e)}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Solution failed verification"
        )
    except Exception as e:
        logger.error(f"Error solving instance: {str(e)}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Failed to solve instance"
        )

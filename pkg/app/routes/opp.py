from fastapi import APIRouter, HTTPException, status
from pydantic import ValidationError
import asyncio
import logging

from app.config.settings import get_settings
from app.models.request import OppRequest
from app.models.response import Coordinate, OppResponse
from app.services.exceptions import InstanceParseError, InvariantViolation
from app.services.instance_service import verify_placement
from app.services.opp_service import opp_check

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/opp", response_model=OppResponse)
async def opp_endpoint(request: OppRequest):
    """
    Decide whether every item of the instance fits a single bin.
    """
    try:
        inst = request.to_instance()
        time_limit = request.time_limit or get_settings().per_check_limit

        loop = asyncio.get_event_loop()
        result = await loop.run_in_executor(
            None, lambda: opp_check(inst.items, inst.W, inst.H, time_limit=time_limit)
        )

        coords = []
        if result.feasible:
            violation = verify_placement(dict(enumerate(inst.dims)), inst.W, inst.H, range(inst.n), result.placement)
            if violation:
                raise InvariantViolation(f"placement rejected: {violation}")
            coords = [Coordinate(id=j, x=x, y=y) for j, (x, y) in sorted(result.placement.coords.items())]

        logger.info(f"📦 OPP n={inst.n}: {result.verdict.value} after {result.nodes} nodes")
        return OppResponse(verdict=result.verdict.value, coords=coords, nodes=result.nodes, seconds=result.seconds)

    except HTTPException:
        raise
    except (InstanceParseError, ValidationError, ValueError) as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    except Exception as e:
        logger.error(f"Error checking packing: {str(e)}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Failed to check packing"
        )

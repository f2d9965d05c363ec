from fastapi import APIRouter, HTTPException, status
from pydantic import ValidationError
import asyncio
import logging

from app.config.settings import get_settings
from app.models.request import BoundRequest, InstanceRequest
from app.models.response import BoundResponse, PreprocessResponse
from app.services.dff_service import bound_report
from app.services.exceptions import InstanceParseError
from app.services.preprocess_service import preprocess_report

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/bounds", response_model=BoundResponse)
async def bounds_endpoint(request: BoundRequest):
    """
    Lower bounds of an instance: continuous, L2-CCM, L-BKRS and their maximum L0.
    """
    try:
        inst = request.to_instance()
        eta = request.eta or get_settings().eta

        loop = asyncio.get_event_loop()
        report = await loop.run_in_executor(None, lambda: bound_report(inst, eta))

        logger.info(f"📊 Bounds for n={inst.n}: L0={report.l0} ({report.seconds:.2f}s)")
        return BoundResponse(**report.to_dict())

    except HTTPException:
        raise
    except (InstanceParseError, ValidationError, ValueError) as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    except Exception as e:
        logger.error(f"Error computing bounds: {str(e)}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Failed to compute bounds"
        )


@router.post("/preprocess", response_model=PreprocessResponse)
async def preprocess_endpoint(request: InstanceRequest):
    """
    Run dimension reduction, item fixing and removal; report what changed.
    """
    try:
        inst = request.to_instance()

        loop = asyncio.get_event_loop()
        report = await loop.run_in_executor(None, lambda: preprocess_report(inst))

        logger.info(f"✂️ Preprocessed n={inst.n}: removed {report.removed_pct:.1f}%, fixed {report.fixed_bins} bins")
        return PreprocessResponse(**report.to_dict())

    except HTTPException:
        raise
    except (InstanceParseError, ValidationError, ValueError) as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    except Exception as e:
        logger.error(f"Error preprocessing instance: {str(e)}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Failed to preprocess instance"
        )

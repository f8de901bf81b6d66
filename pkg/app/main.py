import logging
from typing import List, Optional
from fastapi import FastAPI, HTTPException, UploadFile, File, Form
from fastapi.responses import JSONResponse

from .models import (
    EliminateRequest, CompareRequest, OrderIndependenceRequest, CheckRequest,
    EliminateResponse, CompareResponse, OrderIndependenceResponse, CheckResponse,
    ReplayResponse, ExampleRecord, OperatorInfo, ErrorResponse, HealthResponse
)
from .services.elimination_service import EliminationService
from .services.game_service import GameParseError
from .services.symbolic_service import StageMismatchError, UnknownExampleError
from .config import get_config

# Initialize configuration
config = get_config()

# Configure logging
logging.basicConfig(level=getattr(logging, config.server.log_level.value))
logger = logging.getLogger(__name__)

# Initialize FastAPI app with configuration
app = FastAPI(
    title=config.server.api_title,
    description="Exact iterated elimination of strategies over transfinite stages",
    version=config.server.api_version,
    docs_url=config.server.docs_url,
    redoc_url=config.server.redoc_url
)

# Initialize elimination service
elimination_service: Optional[EliminationService] = None


@app.on_event("startup")
async def startup_event():
    """Initialize the elimination service on startup"""
    global elimination_service
    try:
        elimination_service = EliminationService(config)
        logger.info("Elimination service initialized successfully")
    except Exception as e:
        logger.error(f"Failed to initialize elimination service: {e}")
        raise


def _service() -> EliminationService:
    if elimination_service is None:
        raise HTTPException(status_code=503, detail="Service not initialized")
    return elimination_service


@app.get("/config")
async def get_engine_config():
    """Get current engine configuration"""
    return config.to_dict()


@app.get("/health", response_model=HealthResponse)
async def health_check():
    """Health check endpoint"""
    try:
        service = _service()
        return HealthResponse(
            status="healthy",
            version=config.server.api_version,
            operators=len(service.operators()),
            examples=len(service.examples()),
            default_cap=config.engine.cap,
        )
    except HTTPException:
        raise
    except Exception as e:
        logger.error(f"Health check failed: {e}")
        return HealthResponse(
            status="unhealthy",
            version=config.server.api_version,
            operators=0,
            examples=0,
            default_cap=config.engine.cap,
            error=str(e)
        )


@app.get("/operators", response_model=List[OperatorInfo])
async def list_operators():
    """List the available elimination operators"""
    return _service().operators()


@app.post("/eliminate", response_model=EliminateResponse)
async def eliminate(request: EliminateRequest):
    """Iterate one operator on a game until a fixpoint, a cycle, or the cap"""
    try:
        service = _service()
        game = service.load_game(request.game)
        return service.eliminate(game, request.operator, request.beliefs, request.cap)
    except HTTPException:
        raise
    except GameParseError as e:
        logger.warning(f"Game parsing failed: {e}")
        raise HTTPException(status_code=400, detail=f"Game parsing failed: {str(e)}")
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error in elimination: {e}")
        raise HTTPException(status_code=500, detail="Internal server error")


@app.post("/eliminate/file", response_model=EliminateResponse)
async def eliminate_file(
    file: UploadFile = File(...),
    operator: str = Form(...),
    beliefs: Optional[str] = Form(None),
    cap: Optional[str] = Form(None)
):
    """Iterate one operator on a game uploaded as a multipart file"""
    try:
        service = _service()
        content = await file.read()
        try:
            text = content.decode("utf-8")
        except UnicodeDecodeError:
            raise HTTPException(status_code=400, detail="Game file is not UTF-8 text")
        game = service.load_game(text)
        return service.eliminate(game, operator, beliefs, cap)
    except HTTPException:
        raise
    except GameParseError as e:
        logger.warning(f"Game parsing failed for {file.filename}: {e}")
        raise HTTPException(status_code=400, detail=f"Game parsing failed: {str(e)}")
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error eliminating uploaded game: {e}")
        raise HTTPException(status_code=500, detail="Internal server error")


@app.post("/compare", response_model=CompareResponse)
async def compare(request: CompareRequest):
    """Iterate several operators in lockstep and report the first divergence"""
    try:
        service = _service()
        game = service.load_game(request.game)
        return service.compare(game, request.operators, request.beliefs, request.cap)
    except HTTPException:
        raise
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error comparing operators: {e}")
        raise HTTPException(status_code=500, detail="Internal server error")


@app.post("/order-independence", response_model=OrderIndependenceResponse)
async def order_independence(request: OrderIndependenceRequest):
    """Collect the outcomes of sampled relaxations of a contracting operator"""
    try:
        service = _service()
        game = service.load_game(request.game)
        return service.order_independence(
            game, request.operator, request.beliefs, request.trials, request.seed, request.cap
        )
    except HTTPException:
        raise
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error in order-independence trial: {e}")
        raise HTTPException(status_code=500, detail="Internal server error")


@app.post("/check", response_model=CheckResponse)
async def check_properties(request: CheckRequest):
    """Evaluate properties B, C, D, E and MD along an operator's trace"""
    try:
        service = _service()
        game = service.load_game(request.game)
        return service.check(game, request.operator, request.beliefs, request.properties, request.cap)
    except HTTPException:
        raise
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error checking properties: {e}")
        raise HTTPException(status_code=500, detail="Internal server error")


@app.get("/examples", response_model=List[ExampleRecord])
async def list_examples():
    """List the replayable examples"""
    return _service().examples()


@app.get("/examples/{name}/replay", response_model=ReplayResponse)
async def replay_example(name: str, upto: Optional[str] = None):
    """Validate an example's closed-form stages and return its trace"""
    try:
        return _service().replay_example(name, upto)
    except HTTPException:
        raise
    except UnknownExampleError as e:
        raise HTTPException(status_code=404, detail=str(e))
    except StageMismatchError as e:
        logger.warning(f"Replay of {name} failed: {e}")
        raise HTTPException(status_code=422, detail=str(e))
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error replaying example {name}: {e}")
        raise HTTPException(status_code=500, detail="Internal server error")


@app.exception_handler(Exception)
async def global_exception_handler(request, exc):
    """Global exception handler"""
    logger.error(f"Unhandled exception: {exc}")
    return JSONResponse(
        status_code=500,
        content=ErrorResponse(
            error="Internal server error",
            details=str(exc)
        ).model_dump(mode="json")
    )


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "app.main:app",
        host=config.server.host,
        port=config.server.port,
        reload=config.server.debug,
        log_level=config.server.log_level.value.lower()
    )

from fastapi import FastAPI
from contextlib import asynccontextmanager

from .core import configure_logging
from .api import params_router, runs_router, instances_router


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Startup and shutdown events."""
    configure_logging()
    yield


app = FastAPI(
    title="Ramsey Forge API",
    description="Randomized C_ell-free graph construction and verification",
    version="1.0.0",
    lifespan=lifespan
)

# Include routers
app.include_router(params_router, prefix="/api")
app.include_router(runs_router, prefix="/api")
app.include_router(instances_router, prefix="/api")


@app.get("/")
async def root():
    """Root endpoint."""
    return {
        "name": "Ramsey Forge API",
        "version": "1.0.0",
        "status": "running"
    }


@app.get("/health")
async def health_check():
    """Health check endpoint."""
    return {"status": "healthy"}

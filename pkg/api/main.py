"""
FastAPI main application file.
Handles startup/shutdown events and CORS configuration.
"""

import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from api import routes
from evopref import __version__
from evopref import config as settings
from evopref.storage import get_db_connection

# Configure logging
logging.basicConfig(
    level=settings.LOG_LEVEL,
    format=settings.LOG_FORMAT
)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Handle startup and shutdown events"""
    logger.info("Starting up EvoPref API...")
    try:
        get_db_connection().close()
        logger.info(f"Run index ready at {settings.DB_PATH}")
    except Exception as e:
        logger.error(f"Failed to open run index: {e}")
        logger.error("API will start but stored runs will not be available")

    yield

    logger.info("Shutting down EvoPref API...")


app = FastAPI(
    title="EvoPref API",
    description="Quality-diversity evolution on synthetic preference landscapes",
    version=__version__,
    lifespan=lifespan
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(routes.router, prefix="/api", tags=["experiments"])


@app.get("/")
async def root():
    """Root endpoint"""
    return {
        "message": "EvoPref API",
        "version": __version__,
        "status": "running"
    }


@app.get("/health")
async def health_check():
    """Health check endpoint"""
    return {
        "status": "healthy",
        "output_dir": settings.OUTPUT_DIR,
        "db_path": settings.DB_PATH,
        "workers": settings.NUM_WORKERS,
    }

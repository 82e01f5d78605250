"""
Unit Teissier Toolkit - Main Application
========================================
Entry point for the FastAPI application
"""

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from config import settings
from app.utils import setup_logging
from app.dist.views import router as dist_router
from app.moments.views import router as moments_router
from app.charact.views import router as charact_router
from app.estimate.views import router as estimate_router
from app.gof.views import router as gof_router
from app.simulate.views import router as simulate_router
from app.data_ingestion.views import router as data_ingestion_router

settings.validate()
logger = setup_logging()

app = FastAPI(
    title="Unit Teissier Toolkit",
    version="1.0.0",
    description="Distribution functions, order-statistic moments, estimation and goodness of fit for the unit Teissier model",
)

# --- CORS (allow all for development; restrict in production) ---
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(dist_router, prefix="/dist", tags=["Distribution"])
app.include_router(moments_router, prefix="/moments", tags=["Moments"])
app.include_router(charact_router, prefix="/characterization", tags=["Characterization"])
app.include_router(estimate_router, prefix="/estimate", tags=["Estimation"])
app.include_router(gof_router, prefix="/gof", tags=["Goodness of Fit"])
app.include_router(simulate_router, prefix="/simulate", tags=["Simulation"])
app.include_router(data_ingestion_router, prefix="/data_ingestion", tags=["Data Ingestion"])


@app.get("/", tags=["Health"])
async def root():
    """Root endpoint with API information"""
    return {
        "message": "Unit Teissier Toolkit API",
        "version": "1.0.0",
        "status": "active",
        "endpoints": {
            "dist": "/dist",
            "moments": "/moments",
            "characterization": "/characterization",
            "estimate": "/estimate",
            "gof": "/gof",
            "simulate": "/simulate",
            "data_ingestion": "/data_ingestion",
            "docs": "/docs",
        },
    }


@app.get("/health", tags=["Health"])
async def health_check():
    """General health check endpoint"""
    return {
        "status": "healthy",
        "service": "Unit Teissier Toolkit",
        "theta_bracket": [settings.THETA_MIN, settings.THETA_MAX],
        "builtin_datasets": sorted(settings.BUILTIN_DATASETS),
    }


if __name__ == "__main__":
    import uvicorn

    print("\n" + "=" * 60)
    print("🚀 STARTING UNIT TEISSIER TOOLKIT")
    print("=" * 60)
    print(f"📡 FastAPI Server: http://{settings.HOST}:{settings.PORT}")
    print(f"   - Swagger UI: http://{settings.HOST}:{settings.PORT}/docs")
    print("=" * 60 + "\n")

    uvicorn.run("main:app", host=settings.HOST, port=settings.PORT, reload=True)

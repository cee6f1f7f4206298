from datetime import datetime, timezone

from fastapi import FastAPI

from . import __version__
from .api import router
from .config import get_settings

settings = get_settings()

app = FastAPI(title=settings.app_name, version=__version__)
app.include_router(router)


@app.get("/health")
async def health_check():
    return {
        "status": "healthy",
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "version": __version__,
    }

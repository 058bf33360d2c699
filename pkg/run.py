"""
Run the Ramsey Forge API with auto-reload for local development.
Usage: python run.py [--host HOST] [--port PORT]
"""
import argparse

import uvicorn

from app.core import configure_logging

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Development server for the construction API.")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args()
    configure_logging()
    uvicorn.run(
        "app.main:app",
        host=args.host,
        port=args.port,
        reload=True
    )

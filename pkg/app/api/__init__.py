from .params import router as params_router
from .runs import router as runs_router
from .instances import router as instances_router

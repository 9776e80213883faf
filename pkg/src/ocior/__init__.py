"""Error-free asynchronous Byzantine agreement: protocols, codec and simulator."""

from .core import BOT, BOT_DEFAULT, InstanceId, PartialVector

__version__ = "0.1.0"

__all__ = ["BOT", "BOT_DEFAULT", "InstanceId", "PartialVector", "__version__"]

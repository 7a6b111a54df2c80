"""Key queues (dynamic dictionaries of momentum-encoder features)."""
from memory.key_queue import KeyQueue, QueueEntry, QueueView, view_of
from memory.memory_manager import QueueManager

__all__ = ["KeyQueue", "QueueEntry", "QueueManager", "QueueView", "view_of"]

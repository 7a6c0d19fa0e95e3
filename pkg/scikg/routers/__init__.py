from scikg.routers import graph

__all__ = ["graph"]

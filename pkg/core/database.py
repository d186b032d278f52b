from functools import lru_cache

from sqlalchemy import create_engine
from sqlalchemy.orm import DeclarativeBase, sessionmaker

from core.config import settings


class Base(DeclarativeBase):
    pass


@lru_cache(maxsize=8)
def get_session_factory(url: str | None = None) -> sessionmaker:
    """
    Builds (once per URL) an engine for the run ledger, creates the schema if missing
    and returns a session factory bound to it.

    :param url: SQLAlchemy URL, defaults to `settings.LEDGER_URL`.
    """
    # Registers the ledger tables on Base.metadata
    import runs.models  # noqa: F401

    engine = create_engine(url=url or settings.LEDGER_URL, echo=settings.DEBUG)
    Base.metadata.create_all(engine)
    return sessionmaker(bind=engine)

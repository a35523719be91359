"""Run ledger persistence."""

from divrate.persistence.ledger import DEFAULT_DB_NAME, LedgerError, RunLedger, RunRecord


__all__ = ["DEFAULT_DB_NAME", "LedgerError", "RunLedger", "RunRecord"]

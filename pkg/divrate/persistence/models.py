#!/usr/bin/env python3
"""SQLAlchemy ORM models for the divrate run ledger.

One Run row per CLI invocation, with its scalar results and α sweep points.
"""

from typing import List, Optional

from sqlalchemy import Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column, relationship


class Base(DeclarativeBase):
    """Base class for all ORM models."""


class Run(Base):
    """A single CLI run."""

    __tablename__ = "runs"

    run_id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    command: Mapped[str] = mapped_column(String, nullable=False)
    started: Mapped[str] = mapped_column(String, nullable=False)
    finished: Mapped[Optional[str]] = mapped_column(String, nullable=True)
    status: Mapped[str] = mapped_column(String, nullable=False, default="running")
    exit_code: Mapped[Optional[int]] = mapped_column(Integer, nullable=True)
    config: Mapped[Optional[str]] = mapped_column(Text, nullable=True)  # JSON as TEXT
    error: Mapped[Optional[str]] = mapped_column(Text, nullable=True)

    metrics: Mapped[List["RunMetric"]] = relationship(
        "RunMetric", back_populates="run", cascade="all, delete-orphan"
    )
    sweep_points: Mapped[List["SweepPoint"]] = relationship(
        "SweepPoint", back_populates="run", cascade="all, delete-orphan"
    )

    def __repr__(self) -> str:
        return f"<Run(id={self.run_id}, command={self.command}, status={self.status})>"


class RunMetric(Base):
    """Named scalar produced by a run (λ₀, α*, residual, ...)."""

    __tablename__ = "run_metrics"

    metric_id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    run_id: Mapped[int] = mapped_column(Integer, ForeignKey("runs.run_id"), nullable=False)
    name: Mapped[str] = mapped_column(String, nullable=False)
    value: Mapped[float] = mapped_column(Float, nullable=False)

    run: Mapped["Run"] = relationship("Run", back_populates="metrics")

    def __repr__(self) -> str:
        return f"<RunMetric(run={self.run_id}, {self.name}={self.value})>"


class SweepPoint(Base):
    """One α of a regularization sweep; failed α values carry a reason instead of numbers."""

    __tablename__ = "sweep_points"

    point_id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    run_id: Mapped[int] = mapped_column(Integer, ForeignKey("runs.run_id"), nullable=False)
    method: Mapped[str] = mapped_column(String, nullable=False)
    alpha: Mapped[float] = mapped_column(Float, nullable=False)
    residual: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    ratio: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    solution_norm: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    failure: Mapped[Optional[str]] = mapped_column(Text, nullable=True)

    run: Mapped["Run"] = relationship("Run", back_populates="sweep_points")

    def __repr__(self) -> str:
        return f"<SweepPoint(run={self.run_id}, method={self.method}, alpha={self.alpha})>"

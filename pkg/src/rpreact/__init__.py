"""Planner/executor multi-agent QA harness with ReAct and Reflexion baselines."""

__version__ = "0.1.0"

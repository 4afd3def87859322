"""Command groups registered by app.py"""

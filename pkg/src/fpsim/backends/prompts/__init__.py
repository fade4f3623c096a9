"""Prompt templates for the chat-completions backend."""

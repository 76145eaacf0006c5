"""
Command-line entry point for OVFormer Desk.

Usage: python app.py <gen|embed|prompt|train|finetune|predict|eval|report|experiment> [options]
"""

from src.cli import main

if __name__ == '__main__':
    main()

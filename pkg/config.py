"""
Configuration file for the control-tts project.
"""

# Application information
APP_NAME = "control-tts"
APP_VERSION = "1.0.0"

# Logging
DEFAULT_LOG_DIR = "logs"

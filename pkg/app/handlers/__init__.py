# CLI Command Handlers Package

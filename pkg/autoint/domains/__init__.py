"""
Application domains of automatic integration.
"""

# strategies/__init__.py

"""Standalone command-line entry point: ``python manage.py mega --bundle ...``.

Loads ``.env`` and exposes the same commands as ``flask <command>``, plus
Flask-Migrate's ``db`` group.
"""

from dotenv import load_dotenv
from flask.cli import FlaskGroup

load_dotenv()

from app import create_app  # noqa: E402

cli = FlaskGroup(create_app=create_app)

if __name__ == '__main__':
    cli()

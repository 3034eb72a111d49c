"""Run model: one persisted engine invocation made through the API."""

import uuid
from datetime import datetime

from app.extensions import db
from app.utils.slugs import generate_slug


class RunCommand:
    """Run command constants."""
    MEGA = 'mega'
    SWEEP = 'sweep'


class Run(db.Model):
    """A search run and its JSON result."""
    __tablename__ = 'runs'

    id = db.Column(db.String(36), primary_key=True, default=lambda: str(uuid.uuid4()))
    slug = db.Column(db.String(21), unique=True, nullable=False, index=True, default=generate_slug)
    command = db.Column(db.String(20), nullable=False)
    alpha = db.Column(db.String(64), nullable=True)  # exact rational as text, e.g. '1/3'
    explanation_size = db.Column(db.Integer, nullable=True)
    objective = db.Column(db.String(64), nullable=True)
    delta_size = db.Column(db.Integer, nullable=True)
    result = db.Column(db.JSON, nullable=False, default=dict)
    created_at = db.Column(db.DateTime, default=datetime.utcnow)

    def to_dict(self, include_result=True):
        data = {
            'id': self.id,
            'slug': self.slug,
            'command': self.command,
            'alpha': self.alpha,
            'explanation_size': self.explanation_size,
            'objective': self.objective,
            'delta_size': self.delta_size,
            'created_at': self.created_at.isoformat() + 'Z',
        }
        if include_result:
            data['result'] = self.result
        return data

    def __repr__(self):
        return f'<Run {self.slug}: {self.command}>'

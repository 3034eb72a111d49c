"""Create runs

Revision ID: 3f9a2c71d0b4
Revises: 
Create Date: 2026-10-17 09:12:44.318204

"""
from alembic import op
import sqlalchemy as sa


# revision identifiers, used by Alembic.
revision = '3f9a2c71d0b4'
down_revision = None
branch_labels = None
depends_on = None


def upgrade():
    op.create_table('runs',
    sa.Column('id', sa.String(length=36), nullable=False),
    sa.Column('slug', sa.String(length=21), nullable=False),
    sa.Column('command', sa.String(length=20), nullable=False),
    sa.Column('alpha', sa.String(length=64), nullable=True),
    sa.Column('explanation_size', sa.Integer(), nullable=True),
    sa.Column('objective', sa.String(length=64), nullable=True),
    sa.Column('delta_size', sa.Integer(), nullable=True),
    sa.Column('result', sa.JSON(), nullable=False),
    sa.Column('created_at', sa.DateTime(), nullable=True),
    sa.PrimaryKeyConstraint('id')
    )
    with op.batch_alter_table('runs', schema=None) as batch_op:
        batch_op.create_index(batch_op.f('ix_runs_slug'), ['slug'], unique=True)


def downgrade():
    with op.batch_alter_table('runs', schema=None) as batch_op:
        batch_op.drop_index(batch_op.f('ix_runs_slug'))

    op.drop_table('runs')

from flask_sqlalchemy import SQLAlchemy

# Create a single SQLAlchemy instance that can be shared
db = SQLAlchemy()

import logging
from flask import Flask
from werkzeug.middleware.proxy_fix import ProxyFix
from config import Config

# Configure logging
logging.basicConfig(level=Config.LOG_LEVEL, format=Config.LOG_FORMAT)
logger = logging.getLogger(__name__)


def create_app(config_object=Config):
    """Create the allocation service application"""
    app = Flask(__name__)
    app.config.from_object(config_object)

    # Use ProxyFix for proper handling of proxied requests
    app.wsgi_app = ProxyFix(app.wsgi_app, x_proto=1, x_host=1)

    # Import and register the allocation API
    from allocation_api import allocation_api
    app.register_blueprint(allocation_api)

    logger.info("Allocation service initialized")
    return app


# WSGI entry point for gunicorn: `gunicorn app:app`
app = create_app()

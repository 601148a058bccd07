#!/usr/bin/env python3
"""
Concatenated [[4,1,2]] Threshold Simulator - WSGI Entry Point

This is the WSGI entry point for the Flask application; it also backs the
``flask sim`` command group (FLASK_APP=wsgi).
Named 'wsgi.py' to avoid conflict with the 'app/' package directory.
"""
import os
from app import create_app

# Create the Flask application
app = create_app()

if __name__ == '__main__':
    port = int(os.environ.get('PORT', 5002))
    debug = os.environ.get('FLASK_ENV') != 'production'

    app.logger.info('Starting server on port %d', port)
    app.run(debug=debug, host='0.0.0.0', port=port)

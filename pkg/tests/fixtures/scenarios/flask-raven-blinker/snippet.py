from flask import Flask
from raven.contrib.flask import Sentry

app = Flask(__name__)
sentry = Sentry(app)

@app.route('/')
def index():
    return 'ok'

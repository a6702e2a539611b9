import heroku3
import os

conn = heroku3.from_key(os.environ["HEROKU_KEY"])
app = conn.apps()["my-static-site"]
app.scale_formation_process("web", 2)
print(app.web_url)

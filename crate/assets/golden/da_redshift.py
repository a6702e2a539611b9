import os
import redshift_connector

connection = redshift_connector.connect(
    host="analytics.abc123xyz.eu-west-1.redshift.amazonaws.com",
    database="sales",
    user=os.environ["RS_USER"],
    password=os.environ["RS_PASSWORD"],
)
cursor = connection.cursor()
cursor.execute("SELECT quarter, SUM(total) FROM orders GROUP BY quarter")
print(cursor.fetchall())

import os
import snowflake.connector

connection = snowflake.connector.connect(
    user=os.environ["SF_USER"],
    password=os.environ["SF_PASSWORD"],
    account="xy12345.eu-central-1",
)
cursor = connection.cursor()
cursor.execute("SELECT segment, COUNT(*) FROM customers GROUP BY segment")
for segment, count in cursor.fetchall():
    print(segment, count)

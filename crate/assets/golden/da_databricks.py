from databricks import sql
import os

with sql.connect(
    server_hostname=os.environ["DBX_HOST"],
    http_path=os.environ["DBX_PATH"],
    access_token=os.environ["DBX_TOKEN"],
) as connection:
    with connection.cursor() as cursor:
        cursor.execute("SELECT month, revenue FROM sales_trends")
        print(cursor.fetchall())

from google.cloud.bigquery import Client

client = Client()
query = """
    SELECT region, SUM(amount) AS total
    FROM `shop.sales`
    GROUP BY region
    ORDER BY total DESC
"""
for row in client.query(query).result():
    print(row.region, row.total)

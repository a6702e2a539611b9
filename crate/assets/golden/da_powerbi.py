import os
import requests

headers = {"Authorization": "Bearer " + os.environ["POWERBI_TOKEN"]}
response = requests.get("https://api.powerbi.com/v1.0/myorg/datasets", headers=headers)
for dataset in response.json()["value"]:
    print(dataset["name"])

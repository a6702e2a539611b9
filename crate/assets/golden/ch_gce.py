from google.cloud.compute_v1 import InstancesClient

client = InstancesClient()
for instance in client.list(project="demo-project", zone="europe-west1-b"):
    print(instance.name, instance.status)

import os
from azure.identity import DefaultAzureCredential
from azure.mgmt.compute import ComputeManagementClient

client = ComputeManagementClient(DefaultAzureCredential(), os.environ["AZURE_SUBSCRIPTION"])
for vm in client.virtual_machines.list_all():
    print(vm.name)

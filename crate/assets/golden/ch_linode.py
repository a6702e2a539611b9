import os
from linode_api4 import LinodeClient

client = LinodeClient(os.environ["LINODE_TOKEN"])
linode = client.linode.instance_create(
    "g6-nanode-1",
    "eu-west",
    image="linode/ubuntu22.04",
    label="static-site",
)
print(linode.ipv4)

import digitalocean
import os

manager = digitalocean.Manager(token=os.environ["DO_TOKEN"])
droplet = digitalocean.Droplet(
    token=manager.token,
    name="web-1",
    region="ams3",
    image="ubuntu-22-04-x64",
    size_slug="s-1vcpu-1gb",
)
droplet.create()

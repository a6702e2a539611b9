import boto3

ec2 = boto3.resource("ec2")
instances = ec2.create_instances(
    ImageId="ami-0abcdef1234567890",
    InstanceType="t3.micro",
    MinCount=1,
    MaxCount=4,
)
for instance in instances:
    print(instance.id)
